"""Abstract combinatorics of generation sets.

Indices ``0..m-1`` are split into ``N`` consecutive blocks (generations) of
``n = 2**(N-1)`` elements.  Inside generation ``g`` (1-based) an element is a
word of ``N-1`` symbols: the first ``g-1`` slots take values in ``{0, 1+i}``,
the remaining ones in ``{1, i}``.  Words are stored as bit tuples (bit 0 is the
first symbol of each alphabet) and ordered lexicographically, so the position
of a word inside its generation is the big-endian integer of its bits.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import ConsistencyError, ContractError, SizeError

MAX_N = 16

# Gaussian integers as (re, im) pairs; index = bit value.
OUTER_SYMBOLS = ((1, 0), (0, 1))  # {1, i}
INNER_SYMBOLS = ((0, 0), (1, 1))  # {0, 1+i}


def _gauss_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


@dataclass(frozen=True)
class PrototypeEmbedding:
    N: int
    elements: tuple  # words as bit tuples, grouped by generation
    gauss_points: tuple  # (re, im) of the symbol products

    @property
    def n(self) -> int:
        return 2 ** (self.N - 1)

    @property
    def m(self) -> int:
        return self.N * self.n

    def generation_of(self, index: int) -> int:
        return index // self.n + 1

    def symbols(self, index: int) -> tuple:
        """Symbols of an element as Gaussian integers."""
        g = self.generation_of(index)
        bits = self.elements[index]
        return tuple(
            INNER_SYMBOLS[b] if slot < g - 1 else OUTER_SYMBOLS[b]
            for slot, b in enumerate(bits)
        )


def build_prototype(N: int) -> PrototypeEmbedding:
    """Enumerate the ``N * 2**(N-1)`` prototype words and their products."""
    if not isinstance(N, (int, np.integer)) or N < 2 or N > MAX_N:
        raise SizeError(f"N must be an integer in [2, {MAX_N}], got {N!r}")
    N = int(N)
    elements = []
    points = []
    for g in range(1, N + 1):
        for bits in itertools.product((0, 1), repeat=N - 1):
            prod = (1, 0)
            for slot, b in enumerate(bits):
                sym = INNER_SYMBOLS[b] if slot < g - 1 else OUTER_SYMBOLS[b]
                prod = _gauss_mul(prod, sym)
            elements.append(bits)
            points.append(prod)
    return PrototypeEmbedding(N, tuple(elements), tuple(points))


@dataclass(frozen=True)
class Family:
    """A rectangle relation ``e_p1 + e_p2 - e_c1 - e_c2``.

    ``p1``/``p2`` carry the symbols 1 and i, ``c1``/``c2`` carry 0 and 1+i in
    the varied slot; ``c2`` is the pivot child.
    """

    generation: int
    p1: int
    p2: int
    c1: int
    c2: int

    @property
    def parents(self):
        return (self.p1, self.p2)

    @property
    def children(self):
        return (self.c1, self.c2)

    @property
    def pivot(self):
        return self.c2

    def as_dict(self) -> dict:
        return {self.p1: 1, self.p2: 1, self.c1: -1, self.c2: -1}


@dataclass(frozen=True)
class ResonanceVector:
    """Sparse integer vector over the abstract basis."""

    entries: Mapping[int, int]
    signed_sum: int = field(init=False)
    l1: int = field(init=False)

    def __post_init__(self):
        clean = {int(k): int(v) for k, v in dict(self.entries).items() if v}
        object.__setattr__(self, "entries", clean)
        object.__setattr__(self, "signed_sum", sum(clean.values()))
        object.__setattr__(self, "l1", sum(abs(v) for v in clean.values()))

    @classmethod
    def coerce(cls, vec) -> "ResonanceVector":
        if isinstance(vec, ResonanceVector):
            return vec
        if isinstance(vec, Mapping):
            return cls(vec)
        return cls({i: int(v) for i, v in enumerate(vec) if v})

    @classmethod
    def basis(cls, i: int) -> "ResonanceVector":
        return cls({i: 1})

    @property
    def support(self):
        return tuple(sorted(self.entries))

    def in_resonance_class(self, k: int) -> bool:
        """Membership in the class of order ``k``: zero sum and l1 <= 2k."""
        return self.signed_sum == 0 and self.l1 <= 2 * k

    def dense(self, m: int) -> np.ndarray:
        out = np.zeros(m, dtype=np.int64)
        for i, v in self.entries.items():
            out[i] = v
        return out

    def __add__(self, other):
        other = ResonanceVector.coerce(other)
        out = dict(self.entries)
        for i, v in other.entries.items():
            out[i] = out.get(i, 0) + v
        return ResonanceVector(out)

    def __neg__(self):
        return ResonanceVector({i: -v for i, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-ResonanceVector.coerce(other))

    def __rmul__(self, c: int):
        return ResonanceVector({i: c * v for i, v in self.entries.items()})

    def __eq__(self, other):
        if not isinstance(other, ResonanceVector):
            try:
                other = ResonanceVector.coerce(other)
            except Exception:
                return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def key(self):
        return tuple(sorted(self.entries.items()))

    def __repr__(self):
        return f"ResonanceVector({dict(sorted(self.entries.items()))})"


class GenealogicalTree:
    """The family system of the prototype, with row-echelon bookkeeping."""

    def __init__(self, N: int, prototype: PrototypeEmbedding | None = None):
        self.prototype = prototype or build_prototype(N)
        self.N = self.prototype.N
        self.n = self.prototype.n
        self.m = self.prototype.m
        self.families = self._build_families()
        self.parent_family = {}
        self.child_family = {}
        for k, f in enumerate(self.families):
            for p in f.parents:
                self.parent_family[p] = k
            for c in f.children:
                self.child_family[c] = k
        self._check_structure()
        self.column_order = self._column_order()
        self._check_echelon()

    # -- construction -----------------------------------------------------
    def _index(self, g: int, bits: Sequence[int]) -> int:
        pos = 0
        for b in bits:
            pos = 2 * pos + b
        return (g - 1) * self.n + pos

    def _build_families(self):
        N = self.N
        fams = []
        for g in range(1, N):
            slot = g - 1
            for rest in itertools.product((0, 1), repeat=N - 2):
                def word(b, rest=rest):
                    return rest[:slot] + (b,) + rest[slot:]

                fams.append(Family(
                    g,
                    self._index(g, word(0)), self._index(g, word(1)),
                    self._index(g + 1, word(0)), self._index(g + 1, word(1)),
                ))
        return tuple(fams)

    def _check_structure(self):
        N, n = self.N, self.n
        if len(self.families) != (N - 1) * 2 ** (N - 2):
            raise ConsistencyError("wrong family count")
        as_parent = np.zeros(self.m, dtype=int)
        as_child = np.zeros(self.m, dtype=int)
        for f in self.families:
            for p in f.parents:
                if self.generation_of(p) != f.generation:
                    raise ConsistencyError(f"parent outside generation in {f}")
                as_parent[p] += 1
            for c in f.children:
                if self.generation_of(c) != f.generation + 1:
                    raise ConsistencyError(f"child outside generation in {f}")
                as_child[c] += 1
            if f.p1 == f.p2 or f.c1 == f.c2:
                raise ConsistencyError(f"repeated member in {f}")
        for j in range(self.m):
            g = self.generation_of(j)
            if as_parent[j] != (1 if g < N else 0):
                raise ConsistencyError(f"index {j} is parent {as_parent[j]} times")
            if as_child[j] != (1 if g > 1 else 0):
                raise ConsistencyError(f"index {j} is child {as_child[j]} times")
        for j in range(n, (N - 1) * n):
            if self.sibling(j) == self.spouse(j):
                raise ConsistencyError(f"sibling equals spouse for index {j}")

    def _column_order(self):
        order = list(range(self.n))
        for f in self.families:
            order.extend([f.c1, f.c2])
        return order

    def _check_echelon(self):
        pos = {col: k for k, col in enumerate(self.column_order)}
        if sorted(pos) != list(range(self.m)):
            raise ConsistencyError("column order is not a permutation")
        last = -1
        for f in self.families:
            rightmost = max(pos[j] for j in f.as_dict())
            if rightmost != pos[f.pivot] or rightmost <= last:
                raise ConsistencyError("family matrix is not in row echelon form")
            last = rightmost

    # -- queries ----------------------------------------------------------
    def generation_of(self, j: int) -> int:
        return j // self.n + 1

    def generation_slice(self, g: int) -> range:
        return range((g - 1) * self.n, g * self.n)

    def sibling(self, j: int) -> int | None:
        k = self.child_family.get(j)
        if k is None:
            return None
        f = self.families[k]
        return f.c1 if j == f.c2 else f.c2

    def spouse(self, j: int) -> int | None:
        k = self.parent_family.get(j)
        if k is None:
            return None
        f = self.families[k]
        return f.p1 if j == f.p2 else f.p2

    @cached_property
    def echelon_matrix(self) -> np.ndarray:
        """Family matrix, one row per family, columns in natural index order."""
        mat = np.zeros((len(self.families), self.m), dtype=np.int64)
        for k, f in enumerate(self.families):
            for j, v in f.as_dict().items():
                mat[k, j] = v
        return mat

    @property
    def pivot_columns(self):
        return [f.pivot for f in self.families]

    def family_vector(self, k: int) -> ResonanceVector:
        return ResonanceVector(self.families[k].as_dict())

    # -- symmetry maps ----------------------------------------------------
    def symmetry_map(self, j1: int, j2: int) -> np.ndarray:
        """Permutation ``g`` of the basis with ``g[j1] == j2``.

        Built from the slot-wise involutions swapping ``0 <-> 1+i`` and
        ``1 <-> i``; on indices this XORs the in-generation position.
        """
        if self.generation_of(j1) != self.generation_of(j2):
            raise ContractError("symmetry maps only relate indices of one generation")
        mask = (j1 % self.n) ^ (j2 % self.n)
        idx = np.arange(self.m)
        return (idx // self.n) * self.n + ((idx % self.n) ^ mask)

    @cached_property
    def _family_keys(self):
        return {(frozenset(f.parents), frozenset(f.children)) for f in self.families}

    def verify_symmetry_map(self, perm: np.ndarray) -> bool:
        if sorted(perm.tolist()) != list(range(self.m)):
            return False
        if np.any(perm // self.n != np.arange(self.m) // self.n):
            return False
        for f in self.families:
            key = (frozenset(int(perm[p]) for p in f.parents),
                   frozenset(int(perm[c]) for c in f.children))
            if key not in self._family_keys:
                return False
        return True

    def verify_all_symmetries(self) -> bool:
        """Check item-4 maps for every ordered pair inside each generation."""
        ok_mask = {}
        for g in range(1, self.N + 1):
            for j1 in self.generation_slice(g):
                for j2 in self.generation_slice(g):
                    mask = (j1 % self.n) ^ (j2 % self.n)
                    if mask not in ok_mask:
                        ok_mask[mask] = self.verify_symmetry_map(self.symmetry_map(j1, j2))
                    if not ok_mask[mask]:
                        return False
                    if self.symmetry_map(j1, j2)[j1] != j2:
                        return False
        return True

    # -- lattice membership -----------------------------------------------
    def span_decompose(self, lam) -> dict | None:
        """Integer coefficients of ``lam`` on the families, or ``None``.

        Families are peeled from the youngest generation down: the pivot
        child of a family appears in no younger family, so its current
        entry fixes the coefficient.
        """
        lam = ResonanceVector.coerce(lam)
        for i in lam.entries:
            if not 0 <= i < self.m:
                raise ContractError(f"index {i} outside 0..{self.m - 1}")
        res = dict(lam.entries)
        coeffs = {}
        for k in range(len(self.families) - 1, -1, -1):
            f = self.families[k]
            a = -res.get(f.pivot, 0)
            if a:
                coeffs[k] = a
                for j, v in f.as_dict().items():
                    res[j] = res.get(j, 0) - a * v
        if any(res.values()):
            return None
        return coeffs

    def in_span(self, lam) -> bool:
        return self.span_decompose(lam) is not None

    def combine(self, coeffs: Mapping[int, int]) -> ResonanceVector:
        out: dict[int, int] = {}
        for k, a in coeffs.items():
            for j, v in self.families[k].as_dict().items():
                out[j] = out.get(j, 0) + a * v
        return ResonanceVector(out)

    def is_family_multiple(self, lam) -> bool:
        coeffs = self.span_decompose(lam)
        return coeffs is not None and len(coeffs) == 1

    # -- generic embedding ------------------------------------------------
    def generic_embedding(self, dim: int = 3, seed: int = 12345,
                          bits: int = 61) -> list[tuple[int, ...]]:
        """Random point of the linear family variety in ``Z^dim``.

        Only family relations hold identically, so a zero of the induced
        projection is (up to a negligible collision chance, re-checked by the
        callers) an element of the family lattice.
        """
        import random

        rng = random.Random(seed)
        pts: list = [None] * self.m
        for j in self.generation_slice(1):
            pts[j] = tuple(rng.getrandbits(bits) for _ in range(dim))
        for f in self.families:
            pts[f.c1] = tuple(rng.getrandbits(bits) for _ in range(dim))
            pts[f.c2] = tuple(a + b - c for a, b, c in zip(pts[f.p1], pts[f.p2], pts[f.c1]))
        return pts


def genealogical_tree(N: int) -> GenealogicalTree:
    return GenealogicalTree(N)


def span_decompose(lam, tree: GenealogicalTree) -> dict | None:
    return tree.span_decompose(lam)


def multisets(indices: Sequence[int], size: int) -> Iterable[tuple[int, ...]]:
    return itertools.combinations_with_replacement(indices, size)


def span_elements(tree: GenealogicalTree, order: int,
                  indices: Sequence[int] | None = None) -> list[ResonanceVector]:
    """All nonzero lattice elements with zero sum and l1 <= 2*order.

    Meet in the middle on a generic embedding: positive and negative parts
    are multisets of equal size with equal image.  ``indices`` restricts the
    support (used for generation windows).
    """
    indices = list(range(tree.m)) if indices is None else list(indices)
    emb = tree.generic_embedding()
    dim = len(emb[0])
    found = set()
    for s in range(2, order + 1):
        buckets: dict = {}
        for ms in multisets(indices, s):
            key = tuple(sum(emb[i][c] for i in ms) for c in range(dim))
            buckets.setdefault(key, []).append(ms)
        for group in buckets.values():
            if len(group) < 2:
                continue
            for a, b in itertools.permutations(group, 2):
                if set(a) & set(b):
                    continue
                lam: dict[int, int] = {}
                for i in a:
                    lam[i] = lam.get(i, 0) + 1
                for i in b:
                    lam[i] = lam.get(i, 0) - 1
                vec = ResonanceVector(lam)
                if tree.in_span(vec):
                    found.add(vec)
    return sorted(found, key=lambda v: (v.l1, v.key()))
