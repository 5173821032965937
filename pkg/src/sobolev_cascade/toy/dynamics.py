"""Numerical integration of the N-generation toy model.

Time is the rescaled time ``tau``: the gauge term ``d! n^{d-1} J^d`` is
removed and the Hamiltonian divided by ``n^{d-2} d! d (d-1)``, so that at
leading order ``h = J^{d-2} Q``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import InputError, StiffnessError
from .polynomial import (CompiledHamiltonian, PolyHamiltonian, compile_hamiltonian,
                         leading_order_hamiltonian)


@dataclass
class ToyParams:
    """Which toy Hamiltonian to integrate.

    ``mode="leading_order"`` drops the ``O(n^{d-3})`` tail; ``"full_poly"``
    uses a derived :class:`PolyHamiltonian` passed as ``h``.
    """

    N: int
    d: int = 2
    mode: str = "leading_order"
    h: PolyHamiltonian | None = None
    n: int | None = None

    def __post_init__(self):
        if self.mode not in ("leading_order", "full_poly"):
            raise InputError(f"unknown toy mode {self.mode!r}")
        if self.mode == "full_poly":
            if self.h is None:
                raise InputError("full_poly mode needs a derived Hamiltonian")
            if (self.h.N, self.h.d) != (self.N, self.d):
                raise InputError("Hamiltonian does not match N, d")
        if self.n is None:
            self.n = 2 ** (self.N - 1)
        self._compiled = None

    @property
    def polynomial(self) -> PolyHamiltonian:
        return self.h if self.mode == "full_poly" else leading_order_hamiltonian(self.N, self.d)

    @property
    def compiled(self) -> CompiledHamiltonian:
        if self._compiled is None:
            self._compiled = compile_hamiltonian(self.polynomial, self.n)
        return self._compiled

    def hamiltonian(self, b) -> float:
        return self.compiled.value(b)

    def field(self, b) -> np.ndarray:
        return vector_field(self, b)


def _closed_form_d2(b: np.ndarray) -> np.ndarray:
    """``-i|b_j|^2 b_j + 2i conj(b_j)(b_{j-1}^2 + b_{j+1}^2)``."""
    sq = b * b
    nb = np.zeros_like(b)
    nb[1:] += sq[:-1]
    nb[:-1] += sq[1:]
    return -1j * np.abs(b) ** 2 * b + 2j * np.conj(b) * nb


def vector_field(params: ToyParams, b) -> np.ndarray:
    """``db/dtau = 2i dh/d conj(b)`` for the rescaled toy Hamiltonian."""
    b = np.asarray(b, dtype=complex)
    if b.shape != (params.N,):
        raise InputError(f"state must have shape ({params.N},), got {b.shape}")
    if params.mode == "leading_order" and params.d == 2:
        return _closed_form_d2(b)
    return params.compiled.field(b)


def mass(b) -> float:
    return float(np.sum(np.abs(b) ** 2))


@dataclass
class Trajectory:
    """Samples ``(t, b, J, h)`` plus the dense solution when available."""

    t: np.ndarray
    b: np.ndarray
    J: np.ndarray
    h: np.ndarray
    params: dict = field(default_factory=dict)
    sol: object = None

    @property
    def J_drift(self) -> float:
        return float(np.max(np.abs(self.J - self.J[0])) / abs(self.J[0]))

    @property
    def h_drift(self) -> float:
        scale = max(abs(self.h[0]), 1e-300)
        return float(np.max(np.abs(self.h - self.h[0])) / scale)

    def amplitudes(self) -> np.ndarray:
        return np.abs(self.b) ** 2

    def to_csv(self, path) -> None:
        N = self.b.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"abs_b{i + 1}_sq" for i in range(N)] + ["J", "h"])
            for t, row, J, h in zip(self.t, self.amplitudes(), self.J, self.h):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in row]
                           + [repr(float(J)), repr(float(h))])

    def metadata_json(self) -> str:
        meta = dict(self.params)
        meta.update(J_drift=self.J_drift, h_drift=self.h_drift, samples=len(self.t))
        return json.dumps(meta, indent=1)


def integrate(params: ToyParams, b0, horizon: float, tol: float = 1e-10, *,
              samples: int = 2001, events=None, dense: bool = False,
              max_step: float = np.inf) -> Trajectory:
    """Adaptive DOP853 integration on ``[0, horizon]`` with conservation checks."""
    if not 1e-13 <= tol <= 1e-6:
        raise InputError("tol must lie in [1e-13, 1e-6]")
    b0 = np.asarray(b0, dtype=complex)
    if b0.shape != (params.N,):
        raise InputError(f"initial state must have shape ({params.N},)")
    t_eval = np.linspace(0.0, horizon, samples)
    sol = solve_ivp(lambda t, y: vector_field(params, y), (0.0, horizon), b0,
                    method="DOP853", rtol=tol, atol=tol * 1e-3, t_eval=t_eval,
                    events=events, dense_output=dense, max_step=max_step)
    if sol.status == -1:
        t_fail = float(sol.t[-1]) if len(sol.t) else 0.0
        raise StiffnessError(f"integration failed: {sol.message}", time=t_fail)
    b = sol.y.T
    J = np.sum(np.abs(b) ** 2, axis=1)
    h = np.array([params.hamiltonian(x) for x in b])
    meta = {"N": params.N, "d": params.d, "mode": params.mode, "tol": tol,
            "horizon": horizon, "J0": float(J[0])}
    traj = Trajectory(sol.t, b, J, h, meta, sol if dense else None)
    traj.events = sol.t_events
    return traj
