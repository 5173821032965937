"""Concrete generation sets in Z^2 and exact linear/quadratic projections."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import gmpy2

from ..errors import ContractError, InputError, NotApplicableError
from .tree import GenealogicalTree, ResonanceVector, genealogical_tree

_TREES: dict[int, GenealogicalTree] = {}


def tree_for(N: int) -> GenealogicalTree:
    if N not in _TREES:
        _TREES[N] = genealogical_tree(N)
    return _TREES[N]


@dataclass
class GenerationSet:
    """``m = N * 2**(N-1)`` lattice points ordered like the prototype words.

    Coordinates are Python integers of arbitrary size.  ``scale_history``
    records radii and denominator-clearing factors applied while building.
    """

    N: int
    d: int
    modes: list
    scale_history: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.modes = [(int(x), int(y)) for x, y in self.modes]
        if len(self.modes) != self.m:
            raise InputError(f"expected {self.m} modes for N={self.N}, got {len(self.modes)}")

    @property
    def n(self) -> int:
        return 2 ** (self.N - 1)

    @property
    def m(self) -> int:
        return self.N * 2 ** (self.N - 1)

    @cached_property
    def tree(self) -> GenealogicalTree:
        return tree_for(self.N)

    @property
    def generation_offsets(self) -> list[int]:
        return [g * self.n for g in range(self.N + 1)]

    def generation(self, g: int) -> list:
        """Modes of generation ``g`` (1-based)."""
        return self.modes[(g - 1) * self.n: g * self.n]

    def norms2(self) -> list[int]:
        return [x * x + y * y for x, y in self.modes]

    def family_residuals(self):
        """``(pi(f), pi2(f))`` for every family, exact."""
        return [project(self, self.tree.family_vector(k)) for k in range(len(self.tree.families))]

    def satisfies_families(self) -> bool:
        return all(p == (0, 0) and q == 0 for p, q in self.family_residuals())

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "modes": [[str(x), str(y)] for x, y in self.modes],
            "generation_offsets": self.generation_offsets,
            "scale_history": _stringify(self.scale_history),
            "metadata": _stringify(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationSet":
        try:
            N, d = int(data["N"]), int(data["d"])
            modes = [(int(x), int(y)) for x, y in data["modes"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed generation set: {exc}") from exc
        out = cls(N, d, modes, list(data.get("scale_history", [])), dict(data.get("metadata", {})))
        if "generation_offsets" in data and list(data["generation_offsets"]) != out.generation_offsets:
            raise InputError("generation_offsets inconsistent with N")
        return out

    @classmethod
    def from_json(cls, text: str) -> "GenerationSet":
        return cls.from_dict(json.loads(text))


def _stringify(obj):
    """Big integers and fractions become decimal strings."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= 2 ** 53 else obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    return obj


def _vector(S, lam) -> ResonanceVector:
    lam = ResonanceVector.coerce(lam)
    for i in lam.entries:
        if not 0 <= i < len(S.modes):
            raise InputError(f"index {i} outside 0..{len(S.modes) - 1}")
    return lam


def project(S: GenerationSet, lam) -> tuple[tuple[int, int], int]:
    """Exact ``(sum lam_i v_i, sum lam_i |v_i|^2)``."""
    lam = _vector(S, lam)
    x = y = q = 0
    for i, c in lam.entries.items():
        vx, vy = S.modes[i]
        x += c * vx
        y += c * vy
        q += c * (vx * vx + vy * vy)
    return (x, y), q


def defect(S: GenerationSet, mu) -> int:
    """``|pi(mu)|^2 - pi2(mu)`` for a vector of total weight one."""
    mu = _vector(S, mu)
    if mu.signed_sum != 1:
        raise ContractError(f"defect needs sum(mu) == 1, got {mu.signed_sum}")
    (x, y), q = project(S, mu)
    return x * x + y * y - q


def scale(S: GenerationSet, q: int) -> GenerationSet:
    if int(q) != q or q < 1:
        raise ContractError("scale factor must be a positive integer")
    q = int(q)
    hist = list(S.scale_history) + [{"op": "scale", "factor": q}]
    meta = dict(S.metadata)
    if "R" in meta:
        meta["R"] = int(meta["R"]) * q
    return GenerationSet(S.N, S.d, [(q * x, q * y) for x, y in S.modes], hist, meta)


# -- Sobolev weights ------------------------------------------------------

def _as_fraction(s) -> Fraction | None:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s)
    return None


def _root_bounds(x: int, p: int, q: int) -> tuple[int, int]:
    """Integers ``lo <= x**(p/q) <= hi`` with ``hi - lo <= 1``."""
    val = gmpy2.mpz(x) ** p
    r, exact = gmpy2.iroot(val, q)
    r = int(r)
    return (r, r) if exact else (r, r + 1)


@dataclass(frozen=True)
class WeightSum:
    """Integer bracket ``lo <= sum |k|^(2s) <= hi`` (equal when exact)."""

    lo: int
    hi: int

    @property
    def exact(self) -> bool:
        return self.lo == self.hi


def weight_sum(modes: Sequence, s) -> WeightSum:
    """``sum |k|^(2s)`` over ``modes`` for rational ``s``.

    ``|k|^(2s) = (|k|^2)^(p/q)``; irrational roots are bracketed by integer
    roots, so comparisons built on the bracket are exact.
    """
    sf = _as_fraction(s)
    if sf is None:
        raise InputError("weight_sum needs a rational s; use weight_sum_float for reals")
    if sf < 0:
        raise InputError("s must be non-negative")
    p, q = sf.numerator, sf.denominator
    lo = hi = 0
    for x, y in modes:
        a, b = _root_bounds(x * x + y * y, p, q)
        lo += a
        hi += b
    return WeightSum(lo, hi)


def weight_sum_float(modes: Sequence, s: float, precision: int = 128):
    """High precision ``sum |k|^(2s)`` as an ``mpfr``."""
    with gmpy2.context(gmpy2.get_context(), precision=precision):
        total = gmpy2.mpfr(0)
        for x, y in modes:
            total += gmpy2.mpfr(x * x + y * y) ** gmpy2.mpfr(s)
        return total


@dataclass(frozen=True)
class ExplosionRatio:
    """Ratio of generation N-2 to generation 3 Sobolev weights.

    For rational ``s`` the ratio is bracketed by exact rationals ``lo <= r <= hi``.
    """

    lo: Fraction
    hi: Fraction
    s: object
    N: int

    @property
    def value(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def exceeds_threshold(self) -> bool | None:
        """``ratio > 2**((N-6)(s-1))`` decided exactly, ``None`` if N < 7."""
        if self.N < 7:
            return None
        sf = _as_fraction(self.s)
        if sf is None:
            with gmpy2.context(gmpy2.get_context(), precision=128):
                thr = gmpy2.mpfr(2) ** ((self.N - 6) * (gmpy2.mpfr(self.s) - 1))
                return gmpy2.mpfr(self.lo.numerator) / self.lo.denominator > thr * (1 + gmpy2.mpfr(2) ** -100)
        return exceeds_power_of_two(self.lo, (self.N - 6) * (sf - 1))


def exceeds_power_of_two(value: Fraction, exponent: Fraction) -> bool:
    """Exact test of ``value > 2**exponent`` for rational exponent."""
    exponent = Fraction(exponent)
    p, q = exponent.numerator, exponent.denominator
    # value > 2^(p/q)  <=>  value^q > 2^p   (value > 0)
    if value <= 0:
        return False
    lhs = value ** q
    rhs = Fraction(2) ** p
    return lhs > rhs


def norm_explosion_ratio(S: GenerationSet, s) -> ExplosionRatio:
    if S.N < 4:
        raise NotApplicableError("norm explosion ratio needs N >= 4")
    sf = _as_fraction(s)
    if sf is None:
        top = weight_sum_float(S.generation(S.N - 2), s)
        bot = weight_sum_float(S.generation(3), s)
        r = top / bot
        # 128-bit interval: a few ulps either side
        eps = r * gmpy2.mpfr(2) ** -120
        return ExplosionRatio(Fraction(float(r - eps)), Fraction(float(r + eps)), s, S.N)
    top = weight_sum(S.generation(S.N - 2), sf)
    bot = weight_sum(S.generation(3), sf)
    lo = Fraction(top.lo, bot.hi) if bot.hi else Fraction(0)
    hi = Fraction(top.hi, bot.lo) if bot.lo else Fraction(top.hi)
    return ExplosionRatio(lo, hi, sf, S.N)
