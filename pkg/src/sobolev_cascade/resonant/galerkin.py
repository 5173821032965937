"""Galerkin truncation of the power nonlinearity around a generation set.

Coordinates are rotating, ``a_k = r_k exp(i |k|^2 t)``, so a monomial
``r^alpha conj(r)^beta`` carries the phase ``exp(i Omega t)`` with
``Omega = sum_alpha |k|^2 - sum_beta |k|^2``.  The truncation keeps every
momentum conserving monomial whose indices lie in the set plus those with
exactly one index in the buffer: the forcing of the buffer by the set and
its linear back reaction.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..genset.geometry import GenerationSet
from .index import MonomialTable, multiset_weight


@dataclass
class GalerkinBox:
    """Modes of ``S`` followed by buffer modes; ``G_coeffs`` maps ``r >= d+1``
    to the coefficient of ``[u]^{2r}``."""

    modes: list
    n_set: int
    d: int
    tables: list = field(default_factory=list)   # (MonomialTable, Omega) per degree
    G_coeffs: dict = field(default_factory=dict)
    margin: int = 1

    @property
    def size(self) -> int:
        return len(self.modes)

    @property
    def buffer(self) -> list:
        return self.modes[self.n_set:]

    def phases(self, t: float) -> list:
        return [np.exp(1j * Om * t) for _, Om in self.tables]

    def field(self, t: float, r) -> np.ndarray:
        r = np.asarray(r, dtype=complex)
        if r.shape != (self.size,):
            raise InputError(f"state must have shape ({self.size},)")
        out = np.zeros(self.size, dtype=complex)
        for (tab, Om) in self.tables:
            out += tab.field(r, np.exp(1j * Om * t))
        return out

    def hamiltonian(self, t: float, r) -> float:
        return sum(tab.value(r, np.exp(1j * Om * t)) for tab, Om in self.tables)

    def embed(self, r_set) -> np.ndarray:
        """Extend a state on the set by zeros on the buffer."""
        out = np.zeros(self.size, dtype=complex)
        out[: self.n_set] = r_set
        return out


def _sum(points, ms):
    return (sum(points[i][0] for i in ms), sum(points[i][1] for i in ms))


def _degree_table(points, n_set: int, buffer_index: dict, deg: int, weight: float):
    """Momentum conserving monomials of degree ``deg`` with at most one buffer index."""
    set_idx = range(n_set)
    by_sum: dict = {}
    for A in itertools.combinations_with_replacement(set_idx, deg):
        by_sum.setdefault(_sum(points, A), []).append(A)
    al, be = [], []
    # all indices in the set
    for group in by_sum.values():
        for A in group:
            for B in group:
                al.append(A)
                be.append(B)
    # exactly one buffer index, on the conjugate side, and the mirror term
    if buffer_index:
        for A_sum, groupA in by_sum.items():
            for Bp in itertools.combinations_with_replacement(set_idx, deg - 1):
                bs = _sum(points, Bp)
                k = (A_sum[0] - bs[0], A_sum[1] - bs[1])
                j = buffer_index.get(k)
                if j is None:
                    continue
                B = tuple(sorted(Bp + (j,)))
                for A in groupA:
                    al.append(A)
                    be.append(B)
                    al.append(B)
                    be.append(A)
    alpha = np.array(al, dtype=np.int64).reshape(-1, deg)
    beta = np.array(be, dtype=np.int64).reshape(-1, deg)
    coeff = np.array([weight * multiset_weight(deg, a) * multiset_weight(deg, b)
                      for a, b in zip(al, be)], dtype=float)
    norms = np.array([x * x + y * y for x, y in points], dtype=float)
    Om = norms[alpha].sum(axis=1) - norms[beta].sum(axis=1)
    return MonomialTable(alpha, beta, coeff, len(points), {"degree": deg}), Om


def build_galerkin_box(S: GenerationSet, d: int | None = None, margin: int = 1,
                       G_coeffs: dict | None = None) -> GalerkinBox:
    """Set ``S`` plus, for ``margin = 1``, every mode one convolution step away."""
    d = S.d if d is None else d
    if margin not in (0, 1):
        raise InputError("margin must be 0 or 1")
    G_coeffs = dict(G_coeffs or {})
    if any(int(r) <= d for r in G_coeffs):
        raise InputError("G coefficients start at degree d + 1")
    pts = [tuple(p) for p in S.modes]
    in_set = set(pts)
    degrees = [d] + sorted(int(r) for r in G_coeffs)
    buf: list = []
    if margin == 1:
        seen = set()
        for deg in degrees:
            for A in itertools.combinations_with_replacement(range(len(pts)), deg):
                a = _sum(pts, A)
                for Bp in itertools.combinations_with_replacement(range(len(pts)), deg - 1):
                    b = _sum(pts, Bp)
                    k = (a[0] - b[0], a[1] - b[1])
                    if k not in in_set and k not in seen:
                        seen.add(k)
                        buf.append(k)
        buf.sort()
    else:
        warnings.warn("Galerkin box without buffer: the first convolution image is discarded",
                      stacklevel=2)
    modes = pts + buf
    bidx = {k: len(pts) + i for i, k in enumerate(buf)}
    tables = [_degree_table(modes, len(pts), bidx, d, 1.0)]
    for r in sorted(G_coeffs, key=int):
        tables.append(_degree_table(modes, len(pts), bidx, int(r), float(G_coeffs[r])))
    return GalerkinBox(modes, len(pts), d, tables, G_coeffs, margin)


def galerkin_field(box: GalerkinBox, u, t: float = 0.0) -> np.ndarray:
    """Rotating-frame field ``dr/dt`` of the truncated Hamiltonian."""
    return box.field(t, u)
