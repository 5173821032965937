"""Exact toy-model Hamiltonians as polynomials in the amplitudes and in ``n``.

A term is indexed by a pair of generation exponent profiles ``(a, b)`` and
carries a Laurent polynomial in ``n`` (dict power -> Fraction).  The value
at a state ``b`` is ``sum coeff(n) * b**a * conj(b)**b``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from ..errors import ConsistencyError, InputError, ResourceBudgetError
from ..genset.tree import (GenealogicalTree, ResonanceVector, genealogical_tree, multisets,
                           span_elements)

Profile = tuple
Key = tuple  # (Profile, Profile)

DEFAULT_BUDGET = 2_000_000


def multinomial(d: int, counts) -> int:
    out = math.factorial(d)
    for c in counts:
        out //= math.factorial(c)
    return out


def _mult(ms) -> dict[int, int]:
    out: dict[int, int] = {}
    for i in ms:
        out[i] = out.get(i, 0) + 1
    return out


@dataclass
class PolyHamiltonian:
    """``h = sum_{a,b} P_{a,b}(n) b^a conj(b)^b`` with exact Laurent ``P``."""

    N: int
    d: int
    terms: dict = field(default_factory=dict)
    label: str = "derived"

    # -- algebra -----------------------------------------------------------
    def add(self, a: Profile, b: Profile, power: int, coeff) -> None:
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        poly = self.terms.setdefault((tuple(a), tuple(b)), {})
        poly[power] = poly.get(power, Fraction(0)) + coeff
        if poly[power] == 0:
            del poly[power]
            if not poly:
                del self.terms[(tuple(a), tuple(b))]

    def coefficient(self, a, b, n) -> Fraction:
        poly = self.terms.get((tuple(a), tuple(b)), {})
        n = Fraction(n)
        return sum((c * n ** p for p, c in poly.items()), Fraction(0))

    def powers(self) -> list[int]:
        return sorted({p for poly in self.terms.values() for p in poly})

    def slice(self, power: int) -> dict:
        """Amplitude polynomial multiplying ``n**power``."""
        return {k: poly[power] for k, poly in self.terms.items() if power in poly}

    def at(self, n) -> dict:
        """Numeric coefficients at a given ``n`` (exact Fractions)."""
        out = {}
        for k in self.terms:
            c = self.coefficient(k[0], k[1], n)
            if c:
                out[k] = c
        return out

    def with_tail_scaled(self, factor, below: int) -> "PolyHamiltonian":
        """Copy with every power ``< below`` multiplied by ``factor``."""
        out = PolyHamiltonian(self.N, self.d, {}, self.label + "+scaled_tail")
        for (a, b), poly in self.terms.items():
            for p, c in poly.items():
                out.add(a, b, p, c * (Fraction(factor) if p < below else 1))
        return out

    # -- structural invariants --------------------------------------------
    def is_real(self) -> bool:
        return all(self.terms.get((b, a)) == poly for (a, b), poly in self.terms.items())

    def is_gauge_invariant(self) -> bool:
        return all(sum(a) == sum(b) == self.d for a, b in self.terms)

    def has_even_parity(self) -> bool:
        return all((x + y) % 2 == 0 for a, b in self.terms for x, y in zip(a, b))

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        rows = []
        for (a, b), poly in sorted(self.terms.items()):
            rows.append({"a": list(a), "b": list(b),
                         "poly": {str(p): str(c) for p, c in sorted(poly.items())}})
        return {"N": self.N, "d": self.d, "label": self.label, "terms": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolyHamiltonian":
        try:
            h = cls(int(data["N"]), int(data["d"]), {}, data.get("label", "derived"))
            for row in data["terms"]:
                for p, c in row["poly"].items():
                    h.add(tuple(row["a"]), tuple(row["b"]), int(p), Fraction(c))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed Hamiltonian: {exc}") from exc
        return h

    @classmethod
    def from_json(cls, text: str) -> "PolyHamiltonian":
        return cls.from_dict(json.loads(text))


# -- closed forms ------------------------------------------------------------

def mass_power_terms(N: int, k: int) -> dict:
    """``J**k`` with ``J = sum |b_i|^2`` as a dict ``(a, b) -> Fraction``."""
    out = {}
    for c in itertools.product(range(k + 1), repeat=N):
        if sum(c) == k:
            out[(c, c)] = Fraction(multinomial(k, c))
    return out


def quartic_terms(N: int) -> dict:
    """``Q = -1/4 sum |b_i|^4 + sum_i Re(b_i^2 conj(b_{i+1})^2)``."""
    out: dict = {}
    for i in range(N):
        e = tuple(2 if j == i else 0 for j in range(N))
        out[(e, e)] = Fraction(-1, 4)
    for i in range(N - 1):
        a = tuple(2 if j == i else 0 for j in range(N))
        b = tuple(2 if j == i + 1 else 0 for j in range(N))
        out[(a, b)] = out.get((a, b), 0) + Fraction(1, 2)
        out[(b, a)] = out.get((b, a), 0) + Fraction(1, 2)
    return out


def poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            key = (tuple(x + y for x, y in zip(a1, a2)), tuple(x + y for x, y in zip(b1, b2)))
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def leading_order_hamiltonian(N: int, d: int) -> PolyHamiltonian:
    """``d! n^{d-1} J^d + d! d (d-1) n^{d-2} J^{d-2} Q`` (tail dropped)."""
    h = PolyHamiltonian(N, d, {}, "leading_order")
    for (a, b), c in mass_power_terms(N, d).items():
        h.add(a, b, d - 1, math.factorial(d) * c)
    quart = poly_mul(mass_power_terms(N, d - 2), quartic_terms(N))
    k = math.factorial(d) * d * (d - 1)
    for (a, b), c in quart.items():
        h.add(a, b, d - 2, k * c)
    return h


# -- derivation from the family lattice ----------------------------------------

def _window_coefficients(tree: GenealogicalTree, N: int, d: int, budget: int) -> dict:
    """Integer ``C_{a,b}`` restricted to profiles on generations ``1..N``."""
    n = tree.n
    window = list(range(N * n))
    gen = [i // n for i in range(N * n)]
    lams = [ResonanceVector({})] + [v for v in span_elements(tree, d, window)
                                   if sum(c for c in v.entries.values() if c > 0) <= d]
    W = len(window)
    work = math.comb(W + d - 1, d) + len(lams) * W ** max(0, d - 2)
    if work > budget:
        raise ResourceBudgetError("toy coefficient enumeration over budget",
                                  stats={"lambdas": len(lams), "window": len(window)})
    C: dict = {}
    dfact = math.factorial(d)
    for lam in lams:
        plus = {i: c for i, c in lam.entries.items() if c > 0}
        minus = {i: -c for i, c in lam.entries.items() if c < 0}
        p = sum(plus.values())
        for gam in multisets(window, d - p):
            g = _mult(gam)
            al = dict(plus)
            be = dict(minus)
            for i, c in g.items():
                al[i] = al.get(i, 0) + c
                be[i] = be.get(i, 0) + c
            w = dfact // math.prod(math.factorial(c) for c in al.values())
            w *= dfact // math.prod(math.factorial(c) for c in be.values())
            pa = [0] * N
            pb = [0] * N
            for i, c in al.items():
                pa[gen[i]] += c
            for i, c in be.items():
                pb[gen[i]] += c
            key = (tuple(pa), tuple(pb))
            C[key] = C.get(key, 0) + w
    return C


def _interpolate(xs: list[int], ys: list[int]) -> dict[int, Fraction]:
    """Coefficients (power -> value) of the polynomial through the points."""
    k = len(xs)
    M = [[Fraction(x) ** j for j in range(k)] + [Fraction(y)] for x, y in zip(xs, ys)]
    for col in range(k):
        piv = next(r for r in range(col, k) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        for r in range(k):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return {j: M[j][k] / M[j][j] for j in range(k) if M[j][k] != 0}


def derive_hamiltonian(tree: GenealogicalTree | int, d: int, *,
                       budget: int = DEFAULT_BUDGET) -> PolyHamiltonian:
    """Toy Hamiltonian ``h = C_{a,b}(n) / n`` as exact polynomials in ``n``.

    The coefficients of an ``N`` generation tree are evaluated on the first
    ``N`` generations of trees with ``N, ..., N + d + 1`` generations, which
    share the local family structure but have ``n' = 2**(N'-1)`` modes per
    generation.  A degree ``d`` interpolation in ``n'`` gives the polynomial;
    the extra node checks it.
    """
    N = tree if isinstance(tree, int) else tree.N
    if d < 2:
        raise InputError("d must be at least 2")
    nodes = list(range(N, N + d + 2))
    values = []
    for Np in nodes:
        values.append(_window_coefficients(genealogical_tree(Np), N, d, budget))
    xs = [2 ** (Np - 1) for Np in nodes]
    h = PolyHamiltonian(N, d)
    keys = set().union(*values)
    for key in sorted(keys):
        ys = [v.get(key, 0) for v in values]
        poly = _interpolate(xs[:-1], ys[:-1])
        check = sum(c * Fraction(xs[-1]) ** p for p, c in poly.items())
        if check != ys[-1]:
            raise ConsistencyError(f"coefficient of {key} is not polynomial of degree {d} in n")
        for p, c in poly.items():
            h.add(key[0], key[1], p - 1, c)
    return h


def brute_force_coefficients(tree: GenealogicalTree, d: int) -> dict:
    """``C_{a,b}`` by summing over every pair of degree ``d`` multisets."""
    m, n, N = tree.m, tree.n, tree.N
    ms = list(multisets(range(m), d))
    dfact = math.factorial(d)
    C: dict = {}
    info = []
    for a in ms:
        c = _mult(a)
        w = dfact // math.prod(math.factorial(v) for v in c.values())
        prof = [0] * N
        for i, v in c.items():
            prof[i // n] += v
        info.append((c, w, tuple(prof)))
    for ca, wa, pa in info:
        for cb, wb, pb in info:
            lam = dict(ca)
            for i, v in cb.items():
                lam[i] = lam.get(i, 0) - v
            if tree.in_span(ResonanceVector(lam)):
                C[(pa, pb)] = C.get((pa, pb), 0) + wa * wb
    return C


# -- numerical evaluation ------------------------------------------------------

@dataclass
class CompiledHamiltonian:
    """Dense numeric form ``h = sum c_t b^{A_t} conj(b)^{B_t}``."""

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    @property
    def N(self) -> int:
        return self.A.shape[1]

    def _check(self, b):
        b = np.asarray(b, dtype=complex)
        if b.shape != (self.N,):
            raise InputError(f"state must have shape ({self.N},), got {b.shape}")
        return b

    def value(self, b) -> float:
        b = self._check(b)
        mon = np.prod(b ** self.A, axis=1) * np.prod(np.conj(b) ** self.B, axis=1)
        return float(np.real(np.sum(self.c * mon)))

    def grad_conj(self, b) -> np.ndarray:
        """``d h / d conj(b)``."""
        b = self._check(b)
        pa = np.prod(b ** self.A, axis=1)
        bc = np.conj(b)
        out = np.zeros(self.N, dtype=complex)
        for j in range(self.N):
            Bj = self.B.copy()
            e = self.B[:, j]
            mask = e > 0
            if not mask.any():
                continue
            Bj[mask, j] -= 1
            pb = np.prod(bc ** Bj[mask], axis=1)
            out[j] = np.sum(self.c[mask] * e[mask] * pa[mask] * pb)
        return out

    def field(self, b) -> np.ndarray:
        """``db/dt = 2i dh/d conj(b)``."""
        return 2j * self.grad_conj(b)


def compile_hamiltonian(h: PolyHamiltonian, n=None, *, gauge: bool = True,
                        rescale: bool = True) -> CompiledHamiltonian:
    """Numeric form at ``n`` (default ``2**(N-1)``).

    ``gauge`` removes ``d! n^{d-1} J^d``; ``rescale`` divides by
    ``n^{d-2} d! d (d-1)`` so that the quartic leading part is ``J^{d-2} Q``.
    """
    N, d = h.N, h.d
    n = 2 ** (N - 1) if n is None else n
    coeffs = h.at(n)
    if gauge:
        for key, c in mass_power_terms(N, d).items():
            coeffs[key] = coeffs.get(key, 0) - math.factorial(d) * Fraction(n) ** (d - 1) * c
    scale = Fraction(1)
    if rescale:
        scale = 1 / (Fraction(n) ** (d - 2) * math.factorial(d) * d * (d - 1))
    keys = [k for k, v in sorted(coeffs.items()) if v != 0]
    if not keys:
        keys = [((0,) * N, (0,) * N)]
        coeffs[keys[0]] = Fraction(0)
    A = np.array([k[0] for k in keys], dtype=np.int64)
    B = np.array([k[1] for k in keys], dtype=np.int64)
    c = np.array([float(coeffs[k] * scale) for k in keys])
    return CompiledHamiltonian(A, B, c)
