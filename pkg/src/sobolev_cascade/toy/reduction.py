"""Reduction of the toy model to two adjacent generations at unit mass.

With ``b_1 = sqrt(1 - |c|^2)`` (gauge fixed real) and ``b_2 = c`` the
rescaled Hamiltonian becomes a polynomial ``H(c, conj c)`` whose quadratic
part is ``kappa (a |c|^2 + Re c^2)``.  The linear change
``c = (omega q + conj(omega) p) / sqrt(Im omega^2)`` with
``Re omega^2 = -a`` diagonalises it to a multiple of ``p q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.optimize import root

from ..errors import ReductionError, TopologyError
from .polynomial import PolyHamiltonian, compile_hamiltonian, leading_order_hamiltonian

c_sym, cb_sym = sp.symbols("c cbar")
p_sym, q_sym = sp.symbols("p q", real=True)


def _restricted_coefficients(h: PolyHamiltonian, n, tail_factor) -> dict:
    """Rescaled, gauged coefficients restricted to generations 1 and 2."""
    src = h if tail_factor == 1 else h.with_tail_scaled(tail_factor, h.d - 2)
    comp = compile_hamiltonian(src, n)
    # recover exact values: compile_hamiltonian works in floats, so redo exactly
    from .polynomial import mass_power_terms
    import math

    d, N = h.d, h.N
    n = 2 ** (N - 1) if n is None else n
    coeffs = src.at(n)
    for key, c in mass_power_terms(N, d).items():
        coeffs[key] = coeffs.get(key, 0) - math.factorial(d) * Fraction(n) ** (d - 1) * c
    scale = 1 / (Fraction(n) ** (d - 2) * math.factorial(d) * d * (d - 1))
    out = {}
    for (a, b), v in coeffs.items():
        if v and all(x == 0 for x in a[2:]) and all(x == 0 for x in b[2:]):
            out[(a[:2], b[:2])] = v * scale
    del comp
    return out


@dataclass
class ReducedSystem:
    """Two-generation reduced Hamiltonian in ``(c, conj c)`` and ``(p, q)``."""

    a: sp.Expr
    kappa: sp.Expr
    h_c: sp.Expr
    h_pq: sp.Expr
    omega: sp.Expr
    meta: dict = field(default_factory=dict)

    @property
    def theta(self) -> float:
        return float(sp.acos(-self.a) / 2)

    @property
    def im_omega2(self) -> sp.Expr:
        return sp.sqrt(1 - self.a ** 2)

    @property
    def lam(self) -> sp.Expr:
        """``2 Im(omega^2)``."""
        return 2 * self.im_omega2

    def quadratic_pq(self) -> dict:
        """Coefficients of ``p^2``, ``p q``, ``q^2`` in ``h_pq``."""
        poly = sp.Poly(sp.expand(self.h_pq), p_sym, q_sym)
        return {k: sp.nsimplify(sp.simplify(poly.coeff_monomial(m)))
                for k, m in (("pp", p_sym ** 2), ("pq", p_sym * q_sym), ("qq", q_sym ** 2))}

    def ctopq_jacobian(self) -> sp.Matrix:
        s = sp.sqrt(self.im_omega2)
        w = self.omega
        cexpr = (w * q_sym + sp.conjugate(w) * p_sym) / s
        x, y = sp.re(cexpr), sp.im(cexpr)
        return sp.Matrix([[sp.diff(x, p_sym), sp.diff(x, q_sym)],
                          [sp.diff(y, p_sym), sp.diff(y, q_sym)]]).applyfunc(sp.simplify)

    # numeric helpers --------------------------------------------------
    def numeric(self):
        """``(h, grad, field)`` callables on ``z = (p, q)``."""
        hf = sp.lambdify((p_sym, q_sym), self.h_pq, "numpy")
        gp = sp.lambdify((p_sym, q_sym), sp.diff(self.h_pq, p_sym), "numpy")
        gq = sp.lambdify((p_sym, q_sym), sp.diff(self.h_pq, q_sym), "numpy")
        Jac = np.array(self.ctopq_jacobian().evalf(), dtype=float)
        Jinv = np.linalg.inv(Jac)

        def h(z):
            return float(np.real(hf(z[0], z[1])))

        def grad(z):
            return np.array([np.real(gp(z[0], z[1])), np.real(gq(z[0], z[1]))], dtype=float)

        def fld(z):
            # dc/dt = 2i dH/dconj(c) means xdot = -H_y, ydot = H_x; pull back to (p, q)
            gx, gy = np.linalg.solve(Jac.T, grad(z))
            return Jinv @ np.array([-gy, gx])

        return h, grad, fld

    def c_field(self):
        """Numeric ``dc/dt = 2i dH/d conj(c)``."""
        dH = sp.lambdify((c_sym, cb_sym), sp.diff(self.h_c, cb_sym), "numpy")
        return lambda c: 2j * complex(dH(c, np.conj(c)))


def reduce_two_generation(h: PolyHamiltonian | None = None, *, N: int = 2, d: int = 2,
                          n=None, tail_factor=1) -> ReducedSystem:
    """Reduce a toy Hamiltonian (default: leading order) to generations 1, 2."""
    if h is None:
        h = leading_order_hamiltonian(N, d)
    coeffs = _restricted_coefficients(h, n, Fraction(tail_factor))
    x = c_sym * cb_sym
    b1sq = 1 - x
    H = 0
    for (a, b), v in coeffs.items():
        k = (a[0] + b[0])
        if k % 2:
            raise ReductionError("odd degree in the first generation")
        H += sp.Rational(v.numerator, v.denominator) * b1sq ** (k // 2) \
            * c_sym ** a[1] * cb_sym ** b[1]
    H = sp.expand(H)
    H = sp.expand(H - H.subs({c_sym: 0, cb_sym: 0}))
    poly = sp.Poly(H, c_sym, cb_sym)
    kappa = 2 * poly.coeff_monomial(c_sym ** 2)
    if kappa == 0:
        raise ReductionError("no Re(c^2) term; omega undefined")
    if poly.coeff_monomial(c_sym ** 2) != poly.coeff_monomial(cb_sym ** 2):
        raise ReductionError("reduced Hamiltonian is not real")
    a = sp.nsimplify(poly.coeff_monomial(c_sym * cb_sym) / kappa)
    if not (0 < a < 1):
        raise ReductionError(f"a = {a} outside (0, 1)")
    cos_t = sp.sqrt((1 - a) / 2)
    sin_t = sp.sqrt((1 + a) / 2)
    omega = cos_t + sp.I * sin_t
    s = sp.sqrt(sp.sqrt(1 - a ** 2))
    cexpr = (omega * q_sym + sp.conjugate(omega) * p_sym) / s
    H_pq = sp.expand(H.subs({c_sym: cexpr, cb_sym: sp.conjugate(cexpr)}, simultaneous=True))
    H_pq = sp.expand(sp.simplify(sp.re(H_pq)))
    return ReducedSystem(a, kappa, H, H_pq, omega,
                         {"N": h.N, "d": h.d, "label": h.label, "tail_factor": str(tail_factor)})


@dataclass
class Separatrix:
    """Unstable manifold of the origin as a graph over its unstable axis.

    ``p`` holds the unstable coordinate (oriented so the endpoint is
    positive) and ``xi`` the transverse one; ``axis`` names the unstable
    coordinate of the ``(p, q)`` chart.
    """

    p: np.ndarray
    xi: np.ndarray
    p_star: float
    q_star: float
    energy_error: float
    axis: str = "p"

    @property
    def sup_xi(self) -> float:
        return float(np.max(np.abs(self.xi)))


def _unstable_direction(fld) -> np.ndarray:
    A = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = 1e-7
        A[:, j] = (fld(e) - fld(-e)) / 2e-7
    w, V = np.linalg.eig(A)
    k = int(np.argmax(w.real))
    if w[k].real <= 0:
        raise TopologyError("origin has no unstable direction")
    v = np.real(V[:, k])
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(v)))
    return v if v[j] > 0 else -v


def critical_point(sys: ReducedSystem, guess=None) -> np.ndarray:
    """Hyperbolic critical point on ``|c| = 1`` reached by the unstable
    manifold of the origin."""
    _, grad, fld = sys.numeric()
    if guess is None:
        v = _unstable_direction(fld)
        j = int(np.argmax(np.abs(v)))
        guess = np.zeros(2)
        guess[j] = float(sp.sqrt(sys.im_omega2))
    sol = root(grad, guess, tol=1e-14)
    if not sol.success:
        raise TopologyError(f"critical point not found: {sol.message}")
    return sol.x


def separatrix(sys: ReducedSystem, grid: int = 201, *, eps: float = 1e-8,
               t_max: float = 200.0) -> Separatrix:
    """Trace the unstable manifold of the origin to the critical point and
    return it as a graph over the unstable coordinate on ``grid`` points."""
    h, grad, fld = sys.numeric()
    v = _unstable_direction(fld)
    j = int(np.argmax(np.abs(v)))
    star = critical_point(sys)
    if star[j] <= 0:
        raise TopologyError("critical point lies on the wrong side of the origin")

    def near(t, z):
        return np.hypot(z[0] - star[0], z[1] - star[1]) - 1e-7
    near.terminal = True

    sol = solve_ivp(lambda t, z: fld(z), (0.0, t_max), eps * v, method="DOP853",
                    rtol=1e-12, atol=1e-14, events=near, dense_output=True)
    z = sol.y
    if z.shape[1] < 2:
        raise TopologyError("trajectory too short")
    if np.any(np.diff(z[j]) <= 0):
        raise TopologyError("unstable manifold is not a graph over the unstable axis")
    reach = np.hypot(z[0, -1] - star[0], z[1, -1] - star[1])
    if reach > 1e-4:
        raise TopologyError(f"connection missed the critical point by {reach:.2e}")
    ts = np.linspace(sol.t[0], sol.t[-1], 20 * grid)
    zz = sol.sol(ts)
    u, w = zz[j], zz[1 - j]
    pg = np.linspace(u[0], u[-1], grid)
    xi = np.interp(pg, u, w)
    energy = max(abs(h(zz[:, i]) - h(zz[:, 0])) for i in range(0, zz.shape[1], 10))
    return Separatrix(pg, xi, float(star[j]), float(star[1 - j]), float(energy),
                      "pq"[j])
