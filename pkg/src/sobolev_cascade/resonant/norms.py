"""Sobolev and l1 functionals of finitely supported Fourier data.

Coordinates of constructed sets can have hundreds of digits, so weights are
evaluated with 128-bit ``mpfr`` arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np

from ..errors import InputError

PRECISION = 128


@dataclass
class ModeState:
    """Amplitudes ``amps[i]`` at lattice points ``modes[i]``."""

    modes: list
    amps: np.ndarray
    frame: str = "rotating"
    t: float = 0.0

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if len(self.modes) != len(self.amps):
            raise InputError("modes and amplitudes differ in length")
        if self.frame not in ("rotating", "lab"):
            raise InputError("frame must be 'rotating' or 'lab'")


def _weights(modes, s):
    with gmpy2.context(gmpy2.get_context(), precision=PRECISION):
        ms = gmpy2.mpfr(s)
        return [(1 + gmpy2.mpz(x) ** 2 + gmpy2.mpz(y) ** 2) ** ms for x, y in modes]


def sobolev_norm(u: ModeState, s) -> gmpy2.mpfr:
    """Squared ``H^s`` functional ``sum <k>^{2s} |u_k|^2`` with ``<k>^2 = 1 + |k|^2``."""
    with gmpy2.context(gmpy2.get_context(), precision=PRECISION):
        total = gmpy2.mpfr(0)
        for w, a in zip(_weights(u.modes, s), u.amps):
            total += w * gmpy2.mpfr(float(abs(a)) ** 2)
        return total


def sobolev_norm_root(u: ModeState, s) -> gmpy2.mpfr:
    """``H^s`` norm proper (square root of :func:`sobolev_norm`)."""
    with gmpy2.context(gmpy2.get_context(), precision=PRECISION):
        return gmpy2.sqrt(sobolev_norm(u, s))


def ell1(u: ModeState) -> float:
    return float(np.sum(np.abs(u.amps)))


def generation_weights(S, s) -> list:
    """``sum_{k in S_i} <k>^{2s}`` per generation."""
    w = _weights(S.modes, s)
    with gmpy2.context(gmpy2.get_context(), precision=PRECISION):
        return [sum(w[i * S.n:(i + 1) * S.n], gmpy2.mpfr(0)) for i in range(S.N)]
