"""The generation-to-generation energy transfer of the toy model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import CascadeStallError, InputError, StiffnessError
from .dynamics import ToyParams, Trajectory, vector_field

THRESHOLD = 0.5


def unstable_phase(a: float = 0.5) -> float:
    """Argument of the unstable direction of ``dc/dt = 2i kappa (a c + conj c)``."""
    return math.atan(math.sqrt((1 + a) / (1 - a)))


def cascade_initial_state(N: int, delta: float, *, start: int = 3,
                          phase: float | None = None, background: float | None = None):
    """``|b_start|^2 = 1 - delta^2``, ``b_{start+1} = delta e^{i phase}``, rest
    ``background`` (default ``delta**3``), normalised to unit mass.

    Background modes beyond ``start + 1`` carry the phase that puts each on
    the unstable direction relative to its predecessor.
    """
    if not 0 < delta <= 0.1:
        raise InputError("delta must lie in (0, 0.1]")
    phase = unstable_phase() if phase is None else phase
    bg = delta ** 3 if background is None else background
    b = np.full(N, bg, dtype=complex)
    s = start - 1
    b[s] = math.sqrt(1 - delta ** 2)
    b[s + 1] = delta * np.exp(1j * phase)
    for k in range(s + 2, N):
        b[k] = bg * np.exp(1j * phase * (k - s))
    b /= math.sqrt(float(np.sum(np.abs(b) ** 2)))
    return b


@dataclass
class CascadeResult:
    trajectory: Trajectory
    tau: dict                     # generation -> first time |b_j| > 1/2
    peaks: dict                   # generation -> max |b_j|
    off_window: dict              # generation j -> max |b_k|, k outside j-1..j+1, on [tau_j, tau_{j+1}]
    delta: float
    T0: float
    meta: dict = field(default_factory=dict)

    @property
    def stage_durations(self) -> list[float]:
        keys = sorted(self.tau)
        return [self.tau[b] - self.tau[a] for a, b in zip(keys, keys[1:])]

    def final_amplitudes(self) -> np.ndarray:
        return np.abs(self.trajectory.b[-1])

    def to_dict(self) -> dict:
        return {"delta": self.delta, "T0": self.T0,
                "tau": {str(k): v for k, v in self.tau.items()},
                "stage_durations": self.stage_durations,
                "peaks": {str(k): v for k, v in self.peaks.items()},
                "off_window": {str(k): v for k, v in self.off_window.items()},
                "J_drift": self.trajectory.J_drift, "h_drift": self.trajectory.h_drift,
                **self.meta}


def cascade(params: ToyParams, delta: float, *, tol: float = 1e-12,
            stage_cap: float | None = None, samples_per_unit: int = 20,
            start: int = 3, phase: float | None = None) -> CascadeResult:
    """Integrate from near ``T_start`` until ``|b_{N-2}|`` peaks.

    ``stage_cap`` bounds the time spent between consecutive thresholds
    (default ``40 + 20 ln(1/delta)``).
    """
    N = params.N
    if N < 6:
        raise InputError("the cascade experiment needs N >= 6")
    last = N - 2
    b0 = cascade_initial_state(N, delta, start=start, phase=phase)
    cap = stage_cap if stage_cap is not None else 40 + 20 * math.log(1 / delta)
    horizon = cap * (last - start + 1)
    k = last - 1

    def peak(t, y):
        if abs(y[k]) < THRESHOLD:
            return 1.0
        return float(np.real(np.conj(y[k]) * vector_field(params, y)[k]))
    peak.terminal = True
    peak.direction = -1

    crossings = []
    for j in range(start, last + 1):
        def cross(t, y, j=j):
            return abs(y[j - 1]) - THRESHOLD
        cross.direction = 1
        crossings.append(cross)

    sol = solve_ivp(lambda t, y: vector_field(params, y), (0.0, horizon), b0,
                    method="DOP853", rtol=tol, atol=tol * 1e-3, dense_output=True,
                    events=[peak] + crossings)
    if sol.status == -1:
        raise StiffnessError(sol.message, time=float(sol.t[-1]))
    tau = {}
    for j, ev in zip(range(start, last + 1), sol.t_events[1:]):
        if abs(b0[j - 1]) > THRESHOLD:
            tau[j] = 0.0
        elif len(ev):
            tau[j] = float(ev[0])
    done = [j for j in range(start, last + 1) if j in tau]
    stalled = len(sol.t_events[0]) == 0 or len(done) != last - start + 1
    if stalled:
        reached = max(done) if done else None
        raise CascadeStallError(
            f"cascade stalled after generation {reached} (t = {sol.t[-1]:.3g})",
            last_stage=reached)
    T0 = float(sol.t_events[0][0])
    n_s = max(200, int(samples_per_unit * T0))
    t = np.linspace(0.0, T0, n_s)
    b = sol.sol(t).T
    J = np.sum(np.abs(b) ** 2, axis=1)
    h = np.array([params.hamiltonian(x) for x in b])
    traj = Trajectory(t, b, J, h, {"N": N, "d": params.d, "mode": params.mode,
                                   "tol": tol, "delta": delta}, sol)
    amp = np.abs(b)
    peaks = {j + 1: float(amp[:, j].max()) for j in range(N)}
    off = {}
    keys = sorted(tau)
    for a, nxt in zip(keys, keys[1:] + [None]):
        lo = tau[a]
        hi = tau[nxt] if nxt is not None else T0
        mask = (t >= lo) & (t <= hi)
        outside = [i for i in range(N) if abs((i + 1) - a) > 1]
        if mask.any() and outside:
            off[a] = float(amp[np.ix_(mask, outside)].max())
    return CascadeResult(traj, tau, peaks, off, delta, T0,
                         {"start": start, "last": last, "threshold": THRESHOLD})


def fit_stage_times(results: list[CascadeResult]) -> dict:
    """Least squares of stage durations against ``ln(1/delta)``.

    Both a pooled fit (one slope for every stage) and per-stage fits are
    returned; ``K_max`` is the largest per-stage slope.
    """
    x, y = [], []
    per_stage: dict = {}
    for r in results:
        L = math.log(1 / r.delta)
        keys = sorted(r.tau)
        for a, b in zip(keys, keys[1:]):
            dur = r.tau[b] - r.tau[a]
            x.append(L)
            y.append(dur)
            per_stage.setdefault(a, []).append((L, dur))
    x = np.array(x)
    y = np.array(y)
    A = np.vstack([x, np.ones_like(x)]).T
    (K, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (K * x + c)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    slopes, r2s = {}, {}
    for j, pts in per_stage.items():
        if len(pts) >= 2:
            px, py = np.array(pts).T
            kj, cj = np.polyfit(px, py, 1)
            slopes[j] = float(kj)
            tot = float(np.sum((py - py.mean()) ** 2))
            r2s[j] = 1 - float(np.sum((py - kj * px - cj) ** 2)) / tot if tot > 0 else 1.0
    vals = np.array(list(slopes.values())) if slopes else np.array([K])
    cv = float(np.std(vals) / abs(np.mean(vals))) if len(vals) > 1 else 0.0
    return {"K": float(K), "intercept": float(c), "r2_pooled": r2, "per_stage_K": slopes,
            "per_stage_r2": r2s, "r2_min_stage": min(r2s.values()) if r2s else r2,
            "K_max": float(vals.max()), "K_cv": cv}
