from __future__ import annotations

import math

import numpy as np
import sympy as sp

from sobolev_cascade.toy import (critical_point, derive_hamiltonian, reduce_two_generation,
                                 separatrix)


def test_leading_order_constants():
    R = reduce_two_generation()
    assert R.a == sp.Rational(1, 2) and R.kappa == 1
    assert abs(R.theta - math.pi / 3) < 1e-12


def test_quadratic_part_is_hyperbolic_normal_form():
    R = reduce_two_generation()
    q = R.quadratic_pq()
    # 2 kappa Im(omega^2) pq with Im(omega^2) = sqrt(3)/2
    assert sp.simplify(q["pq"] - sp.sqrt(3)) == 0
    assert sp.simplify(q["pp"]) == 0 and sp.simplify(q["qq"]) == 0


def test_change_of_variables_is_symplectic():
    R = reduce_two_generation()
    assert sp.simplify(R.ctopq_jacobian().det() - 1) == 0


def test_h_c_factorisation():
    R = reduce_two_generation()
    c, cb = sorted(R.h_c.free_symbols, key=str)
    expected = (1 - c * cb) * (sp.Rational(1, 2) * c * cb + (c ** 2 + cb ** 2) / 2)
    assert sp.expand(R.h_c - expected) == 0


def test_critical_point_on_invariant_ellipse():
    R = reduce_two_generation()
    z = critical_point(R)
    re = float(sp.re(R.omega ** 2))
    im = float(R.im_omega2)
    p, q = z
    assert abs(p * p + q * q + 2 * re * p * q - im) < 1e-12


def test_separatrix_straight_at_leading_order():
    S = separatrix(reduce_two_generation())
    assert S.sup_xi < 1e-8
    assert S.energy_error < 1e-10
    assert abs(S.p_star - math.sqrt(math.sqrt(3) / 2)) < 1e-8


def test_derived_n4_separatrix_finite():
    R = reduce_two_generation(derive_hamiltonian(4, 2))
    S = separatrix(R)
    assert np.isfinite(S.sup_xi)
