from __future__ import annotations

from sobolev_cascade.pipeline import end_to_end_growth


def test_growth_close_to_weight_ratio(set7):
    rep = end_to_end_growth(set7, 1.5, 1e-3)
    assert rep.discrepancy < 8
    assert rep.explosion_ratio > rep.meta["threshold"]
    d = rep.to_dict()
    assert d["final_amplitudes"][4] > 0.9


def test_growth_independent_of_rho(set7):
    a = end_to_end_growth(set7, 1.5, 1e-2)
    b = end_to_end_growth(set7, 1.5, 1e-2, rho=1e6)
    assert abs(a.growth_ratio - b.growth_ratio) < 1e-9 * a.growth_ratio
