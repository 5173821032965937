"""Exhaustive finite verification of generation sets.

Linear relations of bounded l1 norm are found by meet in the middle: a
relation ``lam = A - B`` with ``A``, ``B`` disjoint multisets of equal size
corresponds to a collision of the partial sums of ``A`` and ``B``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import ResourceBudgetError
from .geometry import GenerationSet, norm_explosion_ratio, tree_for
from .tree import GenealogicalTree, ResonanceVector

DEFAULT_BUDGET = 5_000_000


@dataclass
class VerificationReport:
    completeness_ok: bool | None = None
    nondeg_i_ok: bool | None = None
    nondeg_ii_ok: bool | None = None
    norm_explosion_ok: bool | None = None
    distinct_ok: bool | None = None
    witnesses: list = field(default_factory=list)
    explosion_ratio: Fraction | None = None
    counts: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        """True when every applicable flag holds (``None`` = not applicable)."""
        flags = [self.distinct_ok, self.nondeg_i_ok, self.nondeg_ii_ok,
                 self.completeness_ok, self.norm_explosion_ok]
        return all(f is not False for f in flags)

    def to_dict(self) -> dict:
        ratio = self.explosion_ratio
        return {
            "distinct_ok": self.distinct_ok,
            "nondeg_i_ok": self.nondeg_i_ok,
            "nondeg_ii_ok": self.nondeg_ii_ok,
            "completeness_ok": self.completeness_ok,
            "norm_explosion_ok": self.norm_explosion_ok,
            "all_ok": self.all_ok,
            "explosion_ratio": None if ratio is None else str(ratio),
            "witnesses": self.witnesses,
            "counts": self.counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _count_multisets(m: int, s: int) -> int:
    from math import comb

    return comb(m + s - 1, s)


def _vec_from(a: Sequence[int], b: Sequence[int]) -> ResonanceVector:
    lam: dict[int, int] = {}
    for i in a:
        lam[i] = lam.get(i, 0) + 1
    for i in b:
        lam[i] = lam.get(i, 0) - 1
    return ResonanceVector(lam)


def linear_relations(points: Sequence, max_half: int, *, involving: Iterable[int] | None = None,
                     budget: int = DEFAULT_BUDGET) -> list[ResonanceVector]:
    """All ``lam = A - B`` with ``sum_A v = sum_B v``, ``|A| = |B| <= max_half``.

    Only one orientation of each relation is returned.  ``involving``
    restricts the output to relations touching at least one of those indices.
    Points may have integer or rational coordinates.
    """
    m = len(points)
    total = sum(_count_multisets(m, s) for s in range(1, max_half + 1))
    if total > budget:
        raise ResourceBudgetError(
            f"linear relation enumeration needs {total} multisets (budget {budget})",
            stats={"multisets": total})
    need = None if involving is None else set(involving)
    found = set()
    for s in range(1, max_half + 1):
        buckets: dict = {}
        for ms in itertools.combinations_with_replacement(range(m), s):
            x = y = 0
            for i in ms:
                x += points[i][0]
                y += points[i][1]
            buckets.setdefault((x, y), []).append(ms)
        for group in buckets.values():
            if len(group) < 2:
                continue
            for a, b in itertools.combinations(group, 2):
                if set(a) & set(b):
                    continue
                if need is not None and not (need & (set(a) | set(b))):
                    continue
                found.add(_vec_from(a, b))
    return sorted(found, key=lambda v: (v.l1, v.key()))


def _canonical(lam: ResonanceVector) -> ResonanceVector:
    """Fix the sign so that the first nonzero entry is positive."""
    first = lam.support[0]
    return lam if lam.entries[first] > 0 else -lam


def defect_zeros(points: Sequence, max_l1: int, tree: GenealogicalTree, *,
                 involving: Iterable[int] | None = None,
                 budget: int = DEFAULT_BUDGET) -> list[ResonanceVector]:
    """Vectors ``mu`` of weight one, ``|mu|_1 <= max_l1``, with zero defect
    and no ``j`` such that ``mu - e_j`` lies in the family lattice."""
    m = len(points)
    norms = [p[0] * p[0] + p[1] * p[1] for p in points]
    need = None if involving is None else set(involving)
    bad = []
    # positive part of size a, negative part of size a-1, 2a-1 <= max_l1
    amax = (max_l1 + 1) // 2
    work = sum(_count_multisets(m, a) * _count_multisets(m, a - 1) for a in range(2, amax + 1))
    if work > budget:
        raise ResourceBudgetError(f"defect enumeration needs {work} candidates (budget {budget})",
                                  stats={"candidates": work})
    for a in range(2, amax + 1):
        for pos in itertools.combinations_with_replacement(range(m), a):
            px = sum(points[i][0] for i in pos)
            py = sum(points[i][1] for i in pos)
            pq = sum(norms[i] for i in pos)
            for neg in itertools.combinations_with_replacement(range(m), a - 1):
                if set(pos) & set(neg):
                    continue
                if need is not None and not (need & (set(pos) | set(neg))):
                    continue
                x = px - sum(points[i][0] for i in neg)
                y = py - sum(points[i][1] for i in neg)
                q = pq - sum(norms[i] for i in neg)
                if x * x + y * y != q:
                    continue
                mu = _vec_from(pos, neg)
                if not _escapes_to_set(mu, tree, points):
                    continue
                bad.append(mu)
    return bad


def _escapes_to_set(mu: ResonanceVector, tree: GenealogicalTree, points) -> bool:
    """True when no ``j`` has ``mu - e_j`` in the family lattice."""
    m = len(points)
    target = (sum(c * points[i][0] for i, c in mu.entries.items()),
              sum(c * points[i][1] for i, c in mu.entries.items()))
    candidates = [j for j in range(m) if points[j] is not None and tuple(points[j]) == target]
    for j in candidates:
        if tree.in_span(mu - ResonanceVector.basis(j)):
            return False
    return True


def check_acceptable(S: GenerationSet, d: int | None = None, s=Fraction(3, 2), *,
                     budget: int = DEFAULT_BUDGET, tree: GenealogicalTree | None = None,
                     ) -> VerificationReport:
    """Distinctness, both non-degeneracy conditions and norm explosion.

    Raises :class:`ResourceBudgetError` when a stage would exceed ``budget``
    candidates; the error lists the stages already completed.
    """
    d = S.d if d is None else d
    tree = tree or tree_for(S.N)
    rep = VerificationReport()
    stages = []
    pts = S.modes

    seen: dict = {}
    dup = []
    for i, p in enumerate(pts):
        if p in seen:
            dup.append([seen[p], i])
        else:
            seen[p] = i
    rep.distinct_ok = not dup
    rep.witnesses.extend({"kind": "duplicate", "indices": w} for w in dup)
    stages.append("distinct")

    try:
        rels = linear_relations(pts, 2 * d, budget=budget)
        rep.counts["linear_relations"] = len(rels)
        bad_i = sorted((_canonical(v) for v in rels if not tree.in_span(v)),
                       key=lambda v: (v.l1, v.key()))
        rep.nondeg_i_ok = not bad_i
        rep.witnesses.extend({"kind": "nondeg_i", "lambda": dict(v.entries)} for v in bad_i)
        stages.append("nondeg_i")

        bad_ii = defect_zeros(pts, 2 * d - 1, tree, budget=budget)
        rep.counts["defect_zeros"] = len(bad_ii)
        rep.nondeg_ii_ok = not bad_ii
        rep.completeness_ok = rep.nondeg_ii_ok
        rep.witnesses.extend({"kind": "nondeg_ii", "mu": dict(v.entries)}
                             for v in sorted(bad_ii, key=lambda v: (v.l1, v.key())))
        stages.append("nondeg_ii")
    except ResourceBudgetError as exc:
        raise ResourceBudgetError(str(exc), completed_stages=stages, stats=exc.stats) from exc

    if S.N >= 7:
        ratio = norm_explosion_ratio(S, s)
        rep.explosion_ratio = ratio.lo if ratio.exact else ratio.lo
        rep.norm_explosion_ok = ratio.exceeds_threshold()
    else:
        rep.norm_explosion_ok = None
    for w in rep.witnesses:
        for key in ("lambda", "mu"):
            if key in w:
                w[key] = {str(k): v for k, v in sorted(w[key].items())}
    return rep
