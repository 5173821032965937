"""End-to-end growth: constructed set, toy cascade, lift, Sobolev ratio."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2

from .genset.geometry import GenerationSet, norm_explosion_ratio
from .resonant.index import lift
from .resonant.norms import ModeState, sobolev_norm
from .toy.cascade import CascadeResult, cascade
from .toy.dynamics import ToyParams


@dataclass
class GrowthReport:
    """Squared ``H^s`` ratio of the lifted cascade against the weight ratio."""

    N: int
    s: float
    delta: float
    growth_ratio: float
    explosion_ratio: float
    T0: float
    meta: dict = field(default_factory=dict)

    @property
    def discrepancy(self) -> float:
        """Multiplicative distance ``max(g/e, e/g)``."""
        q = self.growth_ratio / self.explosion_ratio
        return max(q, 1 / q)

    def to_dict(self) -> dict:
        return {"N": self.N, "s": self.s, "delta": self.delta,
                "growth_ratio": self.growth_ratio, "explosion_ratio": self.explosion_ratio,
                "discrepancy": self.discrepancy, "T0": self.T0, **self.meta}


def end_to_end_growth(S: GenerationSet, s=1.5, delta: float = 1e-3, *, mode: str = "leading_order",
                      tol: float = 1e-12, rho: float = 1.0,
                      result: CascadeResult | None = None) -> GrowthReport:
    """Run the cascade on ``S``, lift the first and last states and compare norms.

    The rescaling ``r -> r / rho`` scales both norms alike and cancels in the ratio.
    """
    if result is None:
        result = cascade(ToyParams(S.N, 2, mode), delta, tol=tol)
    b = result.trajectory.b
    states = [ModeState(list(S.modes), lift(S, b[i]) / rho, t=float(result.trajectory.t[i]))
              for i in (0, -1)]
    with gmpy2.context(gmpy2.get_context(), precision=128):
        before, after = (sobolev_norm(u, s) for u in states)
        growth = float(after / before)
    expl = norm_explosion_ratio(S, s).value
    amps = result.final_amplitudes()
    return GrowthReport(S.N, float(s), delta, growth, expl, result.T0,
                        {"final_amplitudes": [float(a) for a in amps],
                         "log10_norm_initial": float(gmpy2.log10(before)),
                         "log10_norm_final": float(gmpy2.log10(after)),
                         "threshold": 2 ** ((S.N - 6) * (float(s) - 1)) if S.N >= 7 else math.nan})
