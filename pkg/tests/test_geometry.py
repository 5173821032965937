from __future__ import annotations

from fractions import Fraction

import pytest

from sobolev_cascade.errors import InputError, NotApplicableError
from sobolev_cascade.genset import (GenerationSet, check_acceptable, defect, norm_explosion_ratio,
                                    project, scale, weight_sum)
from sobolev_cascade.genset.geometry import exceeds_power_of_two

RECT = GenerationSet(2, 2, [(0, 0), (5, 3), (5, 0), (0, 3)])


def test_rectangle_satisfies_family():
    assert RECT.satisfies_families()
    assert RECT.n == 2 and RECT.m == 4


def test_rectangle_is_acceptable():
    rep = check_acceptable(RECT)
    assert rep.all_ok and rep.witnesses == []
    assert rep.norm_explosion_ok is None


def test_duplicate_points_are_witnessed():
    S = GenerationSet(2, 2, [(0, 0), (0, 0), (0, 0), (0, 0)])
    rep = check_acceptable(S)
    assert not rep.distinct_ok
    assert any(w["kind"] == "duplicate" for w in rep.witnesses)


def test_json_roundtrip_keeps_big_integers():
    big = 10 ** 40
    S = GenerationSet(2, 2, [(0, 0), (big, 3), (big, 0), (0, 3)], [big])
    T = GenerationSet.from_json(S.to_json())
    assert T.modes == S.modes
    assert isinstance(S.to_dict()["modes"][1][0], str)


def test_malformed_json_rejected():
    with pytest.raises(InputError):
        GenerationSet.from_dict({"N": 2})


def test_project_and_defect_of_family_vanish():
    assert project(RECT, {0: 1, 1: 1, 2: -1, 3: -1}) == ((0, 0), 0)
    # (0,0) + (5,3) - (5,0) lands on (0,3), a mode of the set
    assert defect(RECT, {0: 1, 1: 1, 2: -1}) == 0
    # 2(5,3) - (0,0) = (10,6): 136 - 68
    assert defect(RECT, {1: 2, 0: -1}) == 68


def test_weight_sum_exact_for_integer_s():
    ws = weight_sum([(3, 4), (1, 0)], 1)
    assert ws.exact and ws.lo == 25 + 1


def test_weight_sum_bracket_for_half_integer_s():
    ws = weight_sum([(1, 1)], Fraction(3, 2))    # 2^(3/2) = 2.828...
    assert (ws.lo, ws.hi) == (2, 3)


def test_exceeds_power_of_two_exact():
    assert exceeds_power_of_two(Fraction(3, 2), Fraction(1, 2))        # 1.5 > 1.414
    assert not exceeds_power_of_two(Fraction(7, 5), Fraction(1, 2))    # 1.4 < 1.414


def test_explosion_ratio_scale_invariant(set4_paper):
    a = norm_explosion_ratio(set4_paper, 1)
    b = norm_explosion_ratio(scale(set4_paper, 3), 1)
    assert a.lo == b.lo and a.exact


def test_explosion_ratio_needs_four_generations():
    with pytest.raises(NotApplicableError):
        norm_explosion_ratio(RECT, 1)
