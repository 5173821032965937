from __future__ import annotations

import itertools

import pytest

from sobolev_cascade.errors import ResourceBudgetError
from sobolev_cascade.genset import (check_acceptable, defect_zeros,
                                    genealogical_tree, linear_relations)

PTS = [(0, 0), (1, 2), (2, 1), (3, 3), (1, 0)]


def _brute_relations(points, max_half):
    """Every vector in {-h..h}^m with zero sum, equal positive/negative mass and zero image."""
    m = len(points)
    out = set()
    for lam in itertools.product(range(-max_half, max_half + 1), repeat=m):
        pos = sum(c for c in lam if c > 0)
        if pos == 0 or pos > max_half or sum(lam) != 0:
            continue
        if any(sum(c * p[k] for c, p in zip(lam, points)) for k in (0, 1)):
            continue
        first = next(c for c in lam if c)
        if first > 0:
            out.add(lam)
    return out


def test_linear_relations_match_brute_force():
    got = set()
    for v in linear_relations(PTS, 2):
        dense = tuple(v.dense(len(PTS)))
        first = next(c for c in dense if c)
        got.add(dense if first > 0 else tuple(-c for c in dense))
    assert got == _brute_relations(PTS, 2)


def test_linear_relations_budget():
    with pytest.raises(ResourceBudgetError):
        linear_relations(PTS * 20, 4, budget=100)


def test_defect_zeros_empty_for_rectangle():
    rect = [(0, 0), (5, 3), (5, 0), (0, 3)]
    assert defect_zeros(rect, 3, genealogical_tree(2)) == []


def test_defect_zero_found_when_rectangle_closes_outside():
    # a square: (0,0) + (1,1) - (1,0) = (0,1), which is not in the set
    pts = [(0, 0), (1, 1), (1, 0), (7, 5)]
    bad = defect_zeros(pts, 3, genealogical_tree(2))
    assert bad, "the escaping rectangle must be reported"


def test_check_acceptable_budget_reports_stages(set4_paper):
    with pytest.raises(ResourceBudgetError) as info:
        check_acceptable(set4_paper, budget=10)
    assert info.value.completed_stages == ["distinct"]


def test_report_json_is_serializable(set3):
    rep = check_acceptable(set3)
    assert rep.all_ok
    assert '"all_ok": true' in rep.to_json()
