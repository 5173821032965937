from __future__ import annotations

import numpy as np
import pytest

from sobolev_cascade.errors import ContractError, InputError
from sobolev_cascade.resonant import (ModeTrajectory, RescaleParams, build_resonant_index,
                                      default_seed, integrate_modes, lift, lift_and_compare,
                                      rescale)
from sobolev_cascade.toy import ToyParams, derive_hamiltonian


@pytest.fixture(scope="module")
def setup(set3):
    idx = build_resonant_index(set3, 2)
    p = ToyParams(3, 2, "full_poly", derive_hamiltonian(3, 2))
    return set3, idx, p


def test_lift_and_compare_small_deviation(setup):
    S, idx, p = setup
    rep = lift_and_compare(S, 2, idx, p, default_seed(3), 0.2, tol=1e-12, samples=101)
    assert rep.max_l1_deviation <= 10 * rep.tolerance
    assert rep.max_spread <= 1e-10


def test_lift_and_compare_contract(setup):
    S, idx, _ = setup
    with pytest.raises(ContractError):
        lift_and_compare(S, 2, idx, ToyParams(3), default_seed(3), 0.1)
    with pytest.raises(ContractError):
        lift_and_compare(S, 2, idx, ToyParams(4), default_seed(4), 0.1)


def test_mass_conserved(setup):
    S, idx, _ = setup
    r0 = lift(S, default_seed(3)) / np.sqrt(S.n)
    traj = integrate_modes(idx, r0, 0.5, 1e-12, samples=51)
    m = traj.mass()
    assert np.max(np.abs(m - m[0])) < 1e-10


def test_rescale_scaling():
    t = np.linspace(0, 1, 5)
    tr = ModeTrajectory(t, np.ones((5, 2), dtype=complex))
    out = rescale(tr, RescaleParams(rho=10, n=2, d=2))
    assert np.allclose(out.t, 100 * t) and np.allclose(out.r, 0.1)


def test_rescale_rejects_nonpositive_rho():
    with pytest.raises(InputError):
        RescaleParams(rho=0, n=2, d=2)
