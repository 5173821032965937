"""Building generation sets: the inductive circle placement and a small
coordinate randomized search.

Both builders reject candidates online with :class:`RelationIndex`, which
keeps the partial sums of every small multiset of placed modes in a hash map
so that only relations touching a new mode have to be examined.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from math import isqrt

from ..errors import ConstructionError, InputError, SearchExhaustedError
from .geometry import GenerationSet, tree_for
from .tree import GenealogicalTree, ResonanceVector, build_prototype
from .verify import _vec_from

MAX_WINDOW = 64 * 2 ** 16


class RelationIndex:
    """Incremental detector of degenerate relations among placed modes.

    ``max_half`` bounds the size of each side of a linear relation.  When
    ``defect_l1`` is positive, zero-defect vectors of weight one up to that
    l1 norm are checked as well.
    """

    def __init__(self, tree: GenealogicalTree, max_half: int, defect_l1: int = 0):
        self.tree = tree
        self.max_half = max_half
        self.defect_l1 = defect_l1
        self.points: dict[int, tuple] = {}
        self._reset()

    def _reset(self):
        self._buckets: dict = {}
        # multisets of each size with their sums; size 0 seeds the recursion
        self._sets: list[list] = [[((), 0, 0)]] + [[] for _ in range(self.max_half)]
        self._log: list[list] = []

    # -- bookkeeping -----------------------------------------------------
    def _insert(self, j: int) -> list[ResonanceVector]:
        """Add multisets containing ``j``; return relations not in the span."""
        px, py = self.points[j]
        bad = []
        lengths = [len(v) for v in self._sets]
        added = []
        # descending sizes so that smaller lists do not yet contain j
        for s in range(self.max_half, 0, -1):
            fresh = []
            for t in range(1, s + 1):
                tail = (j,) * t
                for rest, x0, y0 in self._sets[s - t][:lengths[s - t]]:
                    ms = rest + tail
                    key = (s, x0 + t * px, y0 + t * py)
                    group = self._buckets.get(key)
                    if group is None:
                        self._buckets[key] = [ms]
                    else:
                        for other in group:
                            if set(other) & set(ms):
                                continue
                            lam = _vec_from(ms, other)
                            if not self.tree.in_span(lam):
                                bad.append(lam)
                        group.append(ms)
                    added.append(key)
                    fresh.append((ms, key[1], key[2]))
            self._sets[s].extend(fresh)
        self._log[-1].append((lengths, added))
        return bad

    def _defects(self, new: set) -> list[ResonanceVector]:
        if self.defect_l1 < 3:
            return []
        from .verify import defect_zeros

        idx = sorted(self.points)
        pts = [self.points[i] for i in idx]
        loc = {g: k for k, g in enumerate(idx)}
        # defect_zeros works on compact indices; escape test needs global ones
        m = max(idx) + 1
        full = [None] * m
        for g in idx:
            full[g] = self.points[g]
        out = []
        for mu in defect_zeros(pts, self.defect_l1, _NullTree(), involving={loc[g] for g in new}):
            gmu = ResonanceVector({idx[i]: c for i, c in mu.entries.items()})
            if _escapes(gmu, self.tree, full):
                out.append(gmu)
        return out

    def try_add(self, new: dict[int, tuple]) -> list[ResonanceVector]:
        """Place ``new`` modes; on any violation undo and return witnesses."""
        self._log.append([])
        for j, p in new.items():
            if j in self.points:
                raise ConstructionError(f"index {j} already placed")
            self.points[j] = p
        bad = []
        for j in new:
            bad.extend(self._insert(j))
            if bad:
                break
        if not bad:
            bad = self._defects(set(new))
        if bad:
            self.undo()
        else:
            self._log.pop()
        return bad

    def undo(self):
        for lengths, keys in reversed(self._log.pop()):
            for key in keys:
                group = self._buckets[key]
                group.pop()
                if not group:
                    del self._buckets[key]
            for s, n in enumerate(lengths):
                del self._sets[s][n:]

    def remove_points(self, idx):
        for j in idx:
            self.points.pop(j, None)

    def rescale(self, factor: int):
        """Multiply every placed mode by ``factor`` and rebuild the index."""
        pts = {j: (p[0] * factor, p[1] * factor) for j, p in self.points.items()}
        self.points = {}
        self._reset()
        for j in sorted(pts):
            self.points[j] = pts[j]
            self._log.append([])
            self._insert(j)
            self._log.pop()


class _NullTree:
    """Stand-in that makes ``defect_zeros`` report every zero-defect vector."""

    def in_span(self, lam):
        return False


def _escapes(mu: ResonanceVector, tree: GenealogicalTree, full) -> bool:
    target = (sum(c * full[i][0] for i, c in mu.entries.items()),
              sum(c * full[i][1] for i, c in mu.entries.items()))
    for j, p in enumerate(full):
        if p is not None and tuple(p) == target:
            if tree.in_span(mu - ResonanceVector.basis(j)):
                return False
    return True


def _add_checked(index: RelationIndex, new: dict[int, tuple]) -> bool:
    bad = index.try_add(new)
    if bad:
        index.remove_points(new)
        return False
    return True


# -- inductive circle placement -------------------------------------------

def first_radius(N: int, d: int) -> int:
    """Smallest power of two ``R`` whose tube of radius ``10**-N R`` has area
    at least ``2**(8 d N)``."""
    e = 0
    target = 2 ** (8 * d * N)
    while True:
        R = 2 ** e
        # pi r^2 >= target with r = R / 10^N, tested with a rational lower bound of pi
        if Fraction(314159, 100000) * Fraction(R, 10 ** N) ** 2 >= target:
            return R
        e += 1


def _rot(v):
    """``O(x, y) = (y, -x)``."""
    return (v[1], -v[0])


def _child_candidates(p1, p2, k: int):
    """The rational circle point ``P_{tau_k}`` and its partner on the diameter."""
    dx, dy = p1[0] - p2[0], p1[1] - p2[1]
    ox, oy = _rot((dx, dy))
    tau = (ox - dx, oy - dy)
    ot = _rot(tau)
    tk = (k * tau[0] + ot[0], k * tau[1] + ot[1])
    c = Fraction(k + 1, 2 * (k * k + 1))
    P = (p1[0] + c * tk[0], p1[1] + c * tk[1])
    Q = (p1[0] + p2[0] - P[0], p1[1] + p2[1] - P[1])
    return P, Q


def _dist2(a, b) -> Fraction:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def _k_order(k0: int):
    """``k0, -k0, k0+1, -(k0+1), ...`` skipping the degenerate ``k = 0``."""
    k = max(k0, 1)
    while True:
        yield k
        yield -k
        k += 1


def construct_paper(N: int, d: int, rng_seed: int = 0, *, nondeg: str = "full",
                    max_window: int = MAX_WINDOW) -> GenerationSet:
    """Place the modes generation by generation on circles over the parents.

    ``nondeg="full"`` rejects every degenerate relation of order ``2d`` and
    zero-defect vector of l1 norm ``2d - 1`` online.  ``nondeg="light"``
    only enforces distinctness and relations of l1 norm at most four, which
    keeps large ``N`` tractable; the mode used is stored in the metadata.
    """
    if N < 2 or d < 2:
        raise InputError("construct_paper needs N >= 2 and d >= 2")
    if nondeg not in ("full", "light"):
        raise InputError("nondeg must be 'full' or 'light'")
    proto = build_prototype(N)
    tree = tree_for(N)
    n = 2 ** (N - 1)
    m = N * n
    rng = random.Random(rng_seed)
    if nondeg == "full":
        index = RelationIndex(tree, 2 * d, 2 * d - 1)
    else:
        index = RelationIndex(tree, 2)

    R = first_radius(N, d)
    rho = R // 10 ** N
    history: list = [{"op": "first_generation", "R1": R, "tube_radius": rho}]
    targets = [(gx, gy) for gx, gy in proto.gauss_points]

    for j in range(n):
        cx, cy = R * targets[j][0], R * targets[j][1]
        for _ in range(10_000):
            x, y = cx + rng.randint(-rho, rho), cy + rng.randint(-rho, rho)
            if (x - cx) ** 2 + (y - cy) ** 2 > rho * rho:
                continue
            if _add_checked(index, {j: (x, y)}):
                break
        else:
            raise ConstructionError(f"could not place first-generation mode {j}")

    tries_total = 0
    for g in range(1, N):
        tol2 = (Fraction(3 ** g, 10 ** N) * R) ** 2
        for fi, fam in enumerate(tree.families):
            if fam.generation != g:
                continue
            p1, p2 = index.points[fam.p1], index.points[fam.p2]
            t1 = (R * targets[fam.c1][0], R * targets[fam.c1][1])
            t2 = (R * targets[fam.c2][0], R * targets[fam.c2][1])
            # relative to R so that floats never overflow
            R2 = R * R
            err = max(math.sqrt(float(Fraction(_dist2(p, (R * targets[i][0], R * targets[i][1])), R2)))
                      for p, i in ((p1, fam.p1), (p2, fam.p2)))
            slack = 3 ** g / 10 ** N - math.sqrt(2) * err
            span = math.sqrt(float(Fraction(_dist2(p1, p2), R2)))
            k0 = int(span / slack) + 1 if slack > 0 else 1
            window = 64 * max(1, len(index.points))
            placed = False
            tried = 0
            for k in _k_order(k0):
                if tried >= window:
                    if window >= max_window:
                        break
                    window *= 2
                tried += 1
                tries_total += 1
                P, Q = _child_candidates(p1, p2, k)
                if _dist2(P, t1) + _dist2(Q, t2) > _dist2(P, t2) + _dist2(Q, t1):
                    P, Q = Q, P
                if _dist2(P, t1) > tol2 or _dist2(Q, t2) > tol2:
                    continue
                if _add_checked(index, {fam.c1: P, fam.c2: Q}):
                    placed = True
                    break
            if not placed:
                raise ConstructionError(
                    f"no admissible circle point within window {window} for family {fi}",
                    family=fi)
        dens = [Fraction(c).denominator for j, p in index.points.items() for c in p]
        L = math.lcm(*dens)
        if L > 1:
            index.rescale(L)
            R *= L
        history.append({"op": "clear_denominators", "generation": g + 1, "factor": L})

    modes = [index.points[j] for j in range(m)]
    modes = [(int(x), int(y)) for x, y in modes]
    meta = {"method": "paper", "seed": rng_seed, "R": R, "nondeg": nondeg,
            "certified_relation_order": 2 * d if nondeg == "full" else 2,
            "candidates_tried": tries_total}
    S = GenerationSet(N, d, modes, history, meta)
    if not within_tube(S):
        raise ConstructionError("final proximity check failed")
    return S


def within_tube(S: GenerationSet) -> bool:
    """Exact test ``|v_i - R j_i| <= 3**-N R`` for every mode."""
    R = int(S.metadata["R"])
    proto = build_prototype(S.N)
    bound = R * R
    for (x, y), (gx, gy) in zip(S.modes, proto.gauss_points):
        if 9 ** S.N * ((x - R * gx) ** 2 + (y - R * gy) ** 2) > bound:
            return False
    return True


# -- small coordinate search ----------------------------------------------

def circle_points(p1, p2) -> list[tuple[int, int]]:
    """Integer points ``w`` other than ``p1``, ``p2`` with ``(w-p1).(w-p2) = 0``."""
    sx, sy = p1[0] + p2[0], p1[1] + p2[1]
    D = (p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2
    r = isqrt(D)
    out = []
    for a in range(-r, r + 1):
        if (a - sx) % 2:
            continue
        b2 = D - a * a
        b = isqrt(b2)
        if b * b != b2:
            continue
        for bb in {b, -b}:
            if (bb - sy) % 2:
                continue
            w = ((a + sx) // 2, (bb + sy) // 2)
            if w != tuple(p1) and w != tuple(p2):
                out.append(w)
    return out


def construct_search(N: int, d: int, height: int, rng_seed: int = 0, *,
                     budget: int = 200_000, restarts: int = 50) -> GenerationSet:
    """Randomized backtracking search for a set with ``max|coord| <= height``.

    The first generation is drawn uniformly from the box; each family then
    picks an ordered pair of children on the circle over its parents, taking
    candidates in a seeded random order.  Every placement is checked online.
    """
    if N > 5:
        raise InputError("construct_search supports N <= 5")
    if N < 2 or d < 2 or height < 1:
        raise InputError("construct_search needs N >= 2, d >= 2, height >= 1")
    tree = tree_for(N)
    n = 2 ** (N - 1)
    m = N * n
    rng = random.Random(rng_seed)
    fams = list(tree.families)
    nodes = 0
    h = height

    def ok(p):
        return abs(p[0]) <= h and abs(p[1]) <= h

    for attempt in range(restarts):
        index = RelationIndex(tree, 2 * d, 2 * d - 1)
        gen1_ok = True
        for j in range(n):
            for _ in range(1000):
                p = (rng.randint(-h, h), rng.randint(-h, h))
                nodes += 1
                if _add_checked(index, {j: p}):
                    break
            else:
                gen1_ok = False
                break
        if not gen1_ok:
            continue

        # depth first over families with per-level candidate iterators
        stack: list = []
        level = 0

        def candidates(f):
            p1, p2 = index.points[f.p1], index.points[f.p2]
            pts = [w for w in circle_points(p1, p2)
                   if ok(w) and ok((p1[0] + p2[0] - w[0], p1[1] + p2[1] - w[1]))]
            pts.sort()
            order = list(range(len(pts)))
            rng.shuffle(order)
            return iter([pts[i] for i in order])

        stack.append(candidates(fams[0]))
        while stack:
            if nodes > budget:
                break
            f = fams[level]
            placed = False
            for w in stack[-1]:
                nodes += 1
                p1, p2 = index.points[f.p1], index.points[f.p2]
                other = (p1[0] + p2[0] - w[0], p1[1] + p2[1] - w[1])
                if _add_checked(index, {f.c1: w, f.c2: other}):
                    placed = True
                    break
                if nodes > budget:
                    break
            if placed:
                level += 1
                if level == len(fams):
                    modes = [index.points[j] for j in range(m)]
                    meta = {"method": "search", "seed": rng_seed, "height": height,
                            "nodes": nodes, "restarts": attempt}
                    return GenerationSet(N, d, modes, [], meta)
                stack.append(candidates(fams[level]))
            else:
                stack.pop()
                level -= 1
                if level < 0:
                    break
                prev = fams[level]
                index.remove_points((prev.c1, prev.c2))
                _rebuild(index)
        if nodes > budget:
            break
    raise SearchExhaustedError(
        f"no acceptable set with height {height} after {nodes} search nodes")


def _rebuild(index: RelationIndex):
    index.rescale(1)
