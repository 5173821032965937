"""Resonant monomials on a generation set and the associated vector field.

A monomial ``coeff * r^alpha * conj(r)^beta`` is stored as two index arrays
of length ``d`` (multisets with repetition) plus its coefficient, so that
the Hamiltonian and its gradient vectorise over all monomials at once.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ContractError, InputError, ResourceBudgetError
from ..genset.geometry import GenerationSet
from ..genset.tree import ResonanceVector, multisets, span_elements

DEFAULT_BUDGET = 5_000_000


def multiset_weight(d: int, ms) -> int:
    """``binom(d, alpha)`` for the multiset ``ms`` of size ``d``."""
    counts: dict = {}
    for i in ms:
        counts[i] = counts.get(i, 0) + 1
    out = math.factorial(d)
    for c in counts.values():
        out //= math.factorial(c)
    return out


@dataclass
class MonomialTable:
    """``sum_t c_t prod_s r[alpha[t, s]] prod_s conj(r[beta[t, s]])``."""

    alpha: np.ndarray
    beta: np.ndarray
    coeff: np.ndarray
    size: int
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.alpha.shape[1]

    def __len__(self) -> int:
        return len(self.coeff)

    def _check(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=complex)
        if r.shape != (self.size,):
            raise InputError(f"state must have shape ({self.size},), got {r.shape}")
        return r

    def _terms(self, r, phases=None):
        ra = np.prod(r[self.alpha], axis=1)
        c = self.coeff if phases is None else self.coeff * phases
        return c * ra

    def value(self, r, phases=None) -> float:
        r = self._check(r)
        rb = np.prod(np.conj(r[self.beta]), axis=1)
        return float(np.real(np.sum(self._terms(r, phases) * rb)))

    def grad_conj(self, r, phases=None) -> np.ndarray:
        """``dH / d conj(r)`` accumulated slot by slot over ``beta``."""
        r = self._check(r)
        base = self._terms(r, phases)
        rc = np.conj(r[self.beta])
        out = np.zeros(self.size, dtype=complex)
        d = self.beta.shape[1]
        for s in range(d):
            others = [k for k in range(d) if k != s]
            part = base * (np.prod(rc[:, others], axis=1) if others else 1.0)
            np.add.at(out, self.beta[:, s], part)
        return out

    def field(self, r, phases=None) -> np.ndarray:
        """``dr/dt = 2i dH/d conj(r)``."""
        return 2j * self.grad_conj(r, phases)

    def keys(self) -> set:
        return {(tuple(a), tuple(b)) for a, b in zip(self.alpha.tolist(), self.beta.tolist())}


@dataclass
class ResonantIndex(MonomialTable):
    """Monomials with ``alpha - beta`` in the family lattice."""

    content_hash: str = ""


def set_hash(S: GenerationSet, d: int) -> str:
    h = hashlib.sha256()
    h.update(f"{S.N}:{d}:".encode())
    for x, y in S.modes:
        h.update(f"{x},{y};".encode())
    return h.hexdigest()


def resonant_pairs(tree, m: int, d: int, budget: int = DEFAULT_BUDGET):
    """Yield ``(alpha, beta)`` multisets with ``alpha - beta`` in the span."""
    lams = [ResonanceVector({})] + [v for v in span_elements(tree, d)
                                   if sum(c for c in v.entries.values() if c > 0) <= d]
    work = math.comb(m + d - 1, d) + len(lams) * m ** max(0, d - 2)
    if work > budget:
        raise ResourceBudgetError("resonant index over budget",
                                  stats={"lambdas": len(lams), "modes": m})
    for lam in lams:
        plus = [i for i, c in sorted(lam.entries.items()) if c > 0 for _ in range(c)]
        minus = [i for i, c in sorted(lam.entries.items()) if c < 0 for _ in range(-c)]
        for gam in multisets(range(m), d - len(plus)):
            yield tuple(sorted(plus + list(gam))), tuple(sorted(minus + list(gam)))


def build_resonant_index(S: GenerationSet, d: int | None = None, *,
                         budget: int = DEFAULT_BUDGET) -> ResonantIndex:
    """All resonant monomials of degree ``d`` on ``S`` with exact weights."""
    d = S.d if d is None else d
    if d < 2:
        raise InputError("d must be at least 2")
    al, be, co = [], [], []
    for a, b in resonant_pairs(S.tree, S.m, d, budget):
        al.append(a)
        be.append(b)
        co.append(multiset_weight(d, a) * multiset_weight(d, b))
    return ResonantIndex(np.array(al, dtype=np.int64), np.array(be, dtype=np.int64),
                         np.array(co, dtype=float), S.m, {"N": S.N, "d": d},
                         set_hash(S, d))


def hres_field(idx: MonomialTable, r) -> np.ndarray:
    """``dr/dt = 2i dH_Res/d conj(r)``."""
    return idx.field(r)


def hres_E(idx: MonomialTable, r) -> np.ndarray:
    """``E(r) = -i dr/dt = 2 dH_Res/d conj(r)``."""
    return 2 * idx.grad_conj(r)


def lift(S: GenerationSet, b) -> np.ndarray:
    """Copy generation amplitudes onto every mode of that generation."""
    b = np.asarray(b, dtype=complex)
    if b.shape[-1] != S.N:
        raise ContractError(f"toy state has {b.shape[-1]} generations, set has {S.N}")
    return np.repeat(b, S.n, axis=-1)


def generation_spread(S: GenerationSet, r) -> float:
    """Largest difference between two modes of the same generation."""
    r = np.asarray(r).reshape(-1, S.N, S.n)
    return float(np.max(np.abs(r - r[..., :1])))


def save_index(idx: ResonantIndex, directory) -> Path:
    """Write ``idx`` to ``<directory>/<content_hash>.npz``."""
    path = Path(directory) / f"{idx.content_hash}.npz"
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, alpha=idx.alpha, beta=idx.beta, coeff=idx.coeff, size=idx.size,
             N=idx.meta["N"], d=idx.meta["d"])
    return path


def load_index(S: GenerationSet, d: int, directory) -> ResonantIndex | None:
    """Cached index for ``(S, d)`` or ``None`` when absent."""
    key = set_hash(S, d)
    path = Path(directory) / f"{key}.npz"
    if not path.exists():
        return None
    with np.load(path) as z:
        return ResonantIndex(z["alpha"], z["beta"], z["coeff"], int(z["size"]),
                             {"N": int(z["N"]), "d": int(z["d"])}, key)


def cached_index(S: GenerationSet, d: int | None = None, directory=None, **kw) -> ResonantIndex:
    """Build the index, reusing a sidecar file in ``directory`` when present."""
    d = S.d if d is None else d
    if directory is not None:
        idx = load_index(S, d, directory)
        if idx is not None:
            return idx
    idx = build_resonant_index(S, d, **kw)
    if directory is not None:
        save_index(idx, directory)
    return idx
