from __future__ import annotations

import numpy as np
import pytest

from sobolev_cascade.resonant import (ApproxResult, approximation_experiment, build_galerkin_box,
                                      envelope, fit_envelope)
from sobolev_cascade.toy import ToyParams, derive_hamiltonian


@pytest.fixture(scope="module")
def shared(set3):
    return build_galerkin_box(set3, 2, 1), ToyParams(3, 2, "full_poly", derive_hamiltonian(3, 2))


def test_deviation_starts_at_zero(set3, shared):
    box, p = shared
    r = approximation_experiment(set3, 2, 10, 0.1, box=box, params=p, samples=21)
    assert r.xi[0] == 0.0
    assert r.meta["mass_drift"] < 1e-8


def test_larger_rho_smaller_deviation(set3, shared):
    box, p = shared
    a, b = (approximation_experiment(set3, 2, rho, 0.2, box=box, params=p, samples=41)
            for rho in (5, 20))
    assert b.max_xi < a.max_xi


def test_envelope_monotone_and_overflow_safe():
    t = np.linspace(0, 10, 50)
    e = envelope(t, 0.0, 1e6, 2.0, 3, 2)
    assert np.all(np.isfinite(e)) and np.all(np.diff(e) >= 0)


def test_envelope_linear_regime():
    # for small L t the envelope is xi0 + F t
    t = np.array([0.0, 1e-6])
    e = envelope(t, 0.0, 1.0, 10.0, 3, 2)
    F = 10.0 ** -5 * 2.0 ** 15
    assert e[1] == pytest.approx(F * 1e-6, rel=1e-4)


def test_fit_recovers_synthetic_constant():
    t = np.linspace(0, 1, 101)
    runs = [ApproxResult(t, envelope(t, 0.0, 0.3, rho, 3, 2), rho, 3, 2) for rho in (5, 10)]
    fit = fit_envelope(runs)
    assert fit["C"] == pytest.approx(0.3, rel=1e-6)
    assert fit["slack"] == pytest.approx(1.0, rel=1e-6)


def test_csv(tmp_path):
    t = np.linspace(0, 1, 3)
    r = ApproxResult(t, np.zeros(3), 5.0, 3, 2)
    r.to_csv(tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "t,l1_error,envelope"
