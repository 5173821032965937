"""Resonant flows on a generation set and their relation to the toy model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import ContractError, InputError, StiffnessError
from ..genset.geometry import GenerationSet
from ..toy.dynamics import ToyParams, integrate as toy_integrate
from .index import MonomialTable, ResonantIndex, generation_spread, hres_field, lift


def time_factor(n: int, d: int) -> int:
    """``n^{d-2} d! d (d-1)``: toy time ``tau`` equals this times ``t``."""
    return n ** (d - 2) * math.factorial(d) * d * (d - 1)


def gauge_frequency(n: int, d: int, J: float) -> float:
    """Phase speed of the removed term ``d! n^{d-1} J^d``."""
    return 2 * d * math.factorial(d) * n ** (d - 1) * J ** (d - 1)


@dataclass
class ModeTrajectory:
    """Samples of a finite-mode state; ``frame`` is ``"rotating"`` or ``"lab"``."""

    t: np.ndarray
    r: np.ndarray
    frame: str = "rotating"
    meta: dict = field(default_factory=dict)

    def ell1(self) -> np.ndarray:
        return np.sum(np.abs(self.r), axis=1)

    def mass(self) -> np.ndarray:
        return np.sum(np.abs(self.r) ** 2, axis=1)


def integrate_modes(table: MonomialTable, r0, horizon: float, tol: float = 1e-10, *,
                    t_eval=None, samples: int = 501, phases=None) -> ModeTrajectory:
    """Integrate ``dr/dt = 2i dH/d conj(r)`` with DOP853.

    ``phases`` is an optional callable ``t -> per-monomial factors``.
    """
    r0 = np.asarray(r0, dtype=complex)
    if r0.shape != (table.size,):
        raise InputError(f"state must have shape ({table.size},)")
    if t_eval is None:
        t_eval = np.linspace(0.0, horizon, samples)
    if phases is None:
        rhs = lambda t, y: table.field(y)  # noqa: E731
    else:
        rhs = lambda t, y: table.field(y, phases(t))  # noqa: E731
    sol = solve_ivp(rhs, (0.0, horizon), r0, method="DOP853", rtol=tol, atol=tol * 1e-3,
                    t_eval=t_eval)
    if sol.status == -1:
        raise StiffnessError(sol.message, time=float(sol.t[-1]))
    return ModeTrajectory(sol.t, sol.y.T, "rotating", {"tol": tol})


@dataclass
class RescaleParams:
    rho: float
    n: int
    d: int

    def __post_init__(self):
        if self.rho <= 0:
            raise InputError("rho must be positive")

    @property
    def time_factor(self) -> int:
        return time_factor(self.n, self.d)

    @property
    def time_stretch(self) -> float:
        return self.rho ** (2 * (self.d - 1))


def rescale(traj: ModeTrajectory, p: RescaleParams) -> ModeTrajectory:
    """``r^rho(t) = rho^{-1} r(rho^{-(2d-2)} t)``: amplitudes shrink, time stretches."""
    return ModeTrajectory(traj.t * p.time_stretch, traj.r / p.rho, traj.frame,
                          dict(traj.meta, rho=p.rho))


@dataclass
class LiftReport:
    """``tolerance`` is the combined relative tolerance times the l1 size."""

    max_l1_deviation: float
    max_spread: float
    tolerance: float
    t: np.ndarray
    deviation: np.ndarray
    amplitude_gap: float

    def to_dict(self) -> dict:
        return {"max_l1_deviation": self.max_l1_deviation, "max_spread": self.max_spread,
                "tolerance": self.tolerance, "amplitude_gap": self.amplitude_gap}


def lifted_toy(S: GenerationSet, d: int, params: ToyParams, b0, t: np.ndarray,
               tol: float) -> np.ndarray:
    """Toy solution lifted to ``S`` at lab times ``t`` with the gauge rotation."""
    K = time_factor(S.n, d)
    horizon_tau = float(t[-1]) * K
    traj = toy_integrate(params, b0, horizon_tau, tol, samples=len(t))
    tau = traj.t
    J = float(np.sum(np.abs(np.asarray(b0)) ** 2))
    omega = gauge_frequency(S.n, d, J)
    b = traj.b * np.exp(1j * omega * (tau / K))[:, None]
    return lift(S, b)


def lift_and_compare(S: GenerationSet, d: int, idx: ResonantIndex, params: ToyParams, b0,
                     horizon: float, tol: float = 1e-12, samples: int = 401) -> LiftReport:
    """Integrate ``H_Res`` from the lifted toy state and compare with the
    lifted toy trajectory over ``[0, horizon]`` (lab time)."""
    if (params.N, params.d) != (S.N, d) or idx.meta.get("N") != S.N or idx.meta.get("d") != d:
        raise ContractError("toy parameters, index and set disagree on (N, d)")
    if params.mode != "full_poly":
        raise ContractError("lift_and_compare needs the derived Hamiltonian")
    t = np.linspace(0.0, horizon, samples)
    pred = lifted_toy(S, d, params, b0, t, tol)
    res = integrate_modes(idx, lift(S, b0), horizon, tol, t_eval=t)
    dev = np.sum(np.abs(res.r - pred), axis=1)
    spread = max(generation_spread(S, x) for x in res.r)
    amp_gap = float(np.max(np.abs(np.abs(res.r) - np.abs(pred))))
    # both integrators use relative tolerance tol, so scale by the state size
    combined = 2 * tol * float(np.max(np.sum(np.abs(pred), axis=1)))
    return LiftReport(float(dev.max()), spread, combined, t, dev, amp_gap)
