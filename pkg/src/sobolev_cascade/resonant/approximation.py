"""Comparison of the Galerkin flow with the rescaled resonant toy solution.

The deviation ``xi(t)`` is measured in l1 over the Galerkin box and
compared with the Gronwall envelope

    E(t) = |xi(0)| e^{L t} + (F / L) (e^{L t} - 1),
    L = C rho^{-(2d-2)} 2^{N(2d-2)},  F = C rho^{-(2d+1)} 2^{(2d+1)N},

with one constant ``C`` fitted to all curves of a sweep.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from ..errors import StiffnessError
from ..genset.geometry import GenerationSet
from ..toy.cascade import cascade_initial_state
from ..toy.dynamics import ToyParams
from ..toy.polynomial import derive_hamiltonian
from .flows import lifted_toy
from .galerkin import GalerkinBox, build_galerkin_box


@dataclass
class ApproxResult:
    t: np.ndarray
    xi: np.ndarray
    rho: float
    N: int
    d: int
    meta: dict = field(default_factory=dict)
    envelope: np.ndarray | None = None

    @property
    def max_xi(self) -> float:
        return float(np.max(self.xi))

    def to_csv(self, path) -> None:
        env = self.envelope if self.envelope is not None else np.full_like(self.t, np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "l1_error", "envelope"])
            for row in zip(self.t, self.xi, env):
                w.writerow([repr(float(x)) for x in row])


def default_seed(N: int, delta: float = 0.1):
    """Mostly generation 1 with generation 2 on its unstable direction."""
    return cascade_initial_state(max(N, 3), delta, start=1)[:N] if N >= 3 else \
        np.array([math.sqrt(1 - delta ** 2), delta * 1j])


def approximation_experiment(S: GenerationSet, d: int, rho: float, horizon: float,
                             margin: int = 1, *, b0=None, tol: float = 1e-10,
                             samples: int = 401, box: GalerkinBox | None = None,
                             params: ToyParams | None = None) -> ApproxResult:
    """Galerkin flow from ``rho^{-1} lift(b0)`` against the rescaled toy flow."""
    if params is None:
        params = ToyParams(S.N, d, "full_poly", derive_hamiltonian(S.N, d))
    if box is None:
        box = build_galerkin_box(S, d, margin)
    b0 = default_seed(S.N) if b0 is None else np.asarray(b0, dtype=complex)
    t = np.linspace(0.0, horizon, samples)
    stretch = rho ** (2 * d - 2)
    # the resonant solution r at slow time t / stretch, amplitudes / rho
    slow = lifted_toy(S, d, params, b0, t / stretch, tol) / rho
    ref = np.zeros((len(t), box.size), dtype=complex)
    ref[:, : box.n_set] = slow
    sol = solve_ivp(lambda s, y: box.field(s, y), (0.0, horizon), ref[0], method="DOP853",
                    rtol=tol, atol=tol * 1e-3 / rho, t_eval=t)
    if sol.status == -1:
        raise StiffnessError(sol.message, time=float(sol.t[-1]))
    gal = sol.y.T
    xi = np.sum(np.abs(gal - ref), axis=1)
    mass = np.sum(np.abs(gal) ** 2, axis=1)
    meta = {"margin": margin, "box_size": box.size, "tol": tol, "horizon": horizon,
            "mass_drift": float(np.max(np.abs(mass - mass[0])) / mass[0]),
            "buffer_l1_max": float(np.max(np.sum(np.abs(gal[:, box.n_set:]), axis=1)))}
    return ApproxResult(t, xi, rho, S.N, d, meta)


def envelope(t, xi0: float, C: float, rho: float, N: int, d: int) -> np.ndarray:
    L = C * rho ** (-(2 * d - 2)) * 2.0 ** (N * (2 * d - 2))
    F = C * rho ** (-(2 * d + 1)) * 2.0 ** ((2 * d + 1) * N)
    t = np.asarray(t, dtype=float)
    growth = np.expm1(np.minimum(L * t, 700.0))
    return xi0 * (growth + 1) + (F / L) * growth


def fit_envelope(results: list[ApproxResult], floor: float = 1e-14) -> dict:
    """One ``C`` for every curve: least squares of ``log xi`` against ``log E``.

    Points with ``xi <= floor`` (numerical zero) are left out of the fit.
    The returned ``slack`` is ``max xi / E`` over ``t > 0``.
    """
    def loss(logC):
        C = math.exp(logC)
        err = 0.0
        for r in results:
            m = (r.t > 0) & (r.xi > floor)
            E = envelope(r.t[m], r.xi[0], C, r.rho, r.N, r.d)
            err += float(np.sum((np.log(r.xi[m]) - np.log(E)) ** 2))
        return err

    opt = minimize_scalar(loss, bounds=(-80.0, 40.0), method="bounded",
                          options={"xatol": 1e-10})
    C = math.exp(opt.x)
    slack = 0.0
    for r in results:
        r.envelope = envelope(r.t, r.xi[0], C, r.rho, r.N, r.d)
        m = r.t > 0
        slack = max(slack, float(np.max(r.xi[m] / r.envelope[m])))
    return {"C": C, "slack": slack, "loss": float(opt.fun)}


def sweep(S: GenerationSet, d: int, rhos=(5, 10, 20), horizon: float = 2.0, margin: int = 1,
          **kw) -> tuple[list[ApproxResult], dict]:
    """Run the experiment for several ``rho`` sharing the box and toy model."""
    params = ToyParams(S.N, d, "full_poly", derive_hamiltonian(S.N, d))
    box = build_galerkin_box(S, d, margin)
    runs = [approximation_experiment(S, d, rho, horizon, margin, box=box, params=params, **kw)
            for rho in rhos]
    fit = fit_envelope(runs)
    xs = [r.max_xi for r in runs]
    fit["max_xi"] = dict(zip([float(r) for r in rhos], xs))
    fit["decreasing"] = all(a > b for a, b in zip(xs, xs[1:]))
    # measured power law of the deviation in rho, for comparison with the envelope
    if len(xs) >= 2:
        fit["rho_exponent"] = float(np.polyfit(np.log([float(r) for r in rhos]), np.log(xs), 1)[0])
    return runs, fit
