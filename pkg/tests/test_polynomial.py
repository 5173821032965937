from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from _oracles import closed_leading_slices
from sobolev_cascade.errors import InputError
from sobolev_cascade.genset import genealogical_tree
from sobolev_cascade.toy import (PolyHamiltonian, brute_force_coefficients, compile_hamiltonian,
                                 derive_hamiltonian, leading_order_hamiltonian)


def _as_fraction_dict(sl):
    return {k: Fraction(v) for k, v in sl.items() if v}


@pytest.mark.parametrize("N,d", [(2, 2), (2, 3), (3, 2)])
def test_derived_matches_brute_force(N, d):
    h = derive_hamiltonian(N, d)
    tree = genealogical_tree(N)
    C = brute_force_coefficients(tree, d)
    n = tree.n
    got = {k: v * n for k, v in h.at(n).items() if v}
    assert got == {k: Fraction(v) for k, v in C.items()}


@pytest.mark.parametrize("N,d", [(2, 2), (3, 2), (2, 3), (4, 2)])
def test_leading_slices_closed_form(N, d):
    h = derive_hamiltonian(N, d)
    top, nxt = closed_leading_slices(N, d)
    assert _as_fraction_dict(h.slice(d - 1)) == top
    assert _as_fraction_dict(h.slice(d - 2)) == nxt


def test_leading_order_hamiltonian_is_the_two_slices():
    h = leading_order_hamiltonian(3, 3)
    top, nxt = closed_leading_slices(3, 3)
    assert h.powers() == [1, 2]
    assert _as_fraction_dict(h.slice(2)) == top
    assert _as_fraction_dict(h.slice(1)) == nxt


def test_symmetries_of_derived():
    h = derive_hamiltonian(3, 2)
    assert h.is_real() and h.is_gauge_invariant() and h.has_even_parity()


def test_json_roundtrip():
    h = derive_hamiltonian(2, 3)
    g = PolyHamiltonian.from_json(h.to_json())
    assert g.terms == h.terms


def test_tail_scaling():
    h = derive_hamiltonian(2, 3)
    low = min(h.powers())
    g = h.with_tail_scaled(Fraction(1, 2), below=1)
    assert g.slice(low) == {k: v / 2 for k, v in h.slice(low).items()}
    assert g.slice(2) == h.slice(2)


def test_derive_rejects_linear():
    with pytest.raises(InputError):
        derive_hamiltonian(2, 1)


def _field_fd(comp, b, eps=1e-6):
    """``2i dh/d conj(b)`` by central differences on real and imaginary parts."""
    out = np.zeros_like(b)
    for j in range(len(b)):
        e = np.zeros_like(b)
        e[j] = eps
        dx = (comp.value(b + e) - comp.value(b - e)) / (2 * eps)
        dy = (comp.value(b + 1j * e) - comp.value(b - 1j * e)) / (2 * eps)
        out[j] = 2j * 0.5 * (dx + 1j * dy)
    return out


def test_compiled_field_matches_finite_differences():
    rng = np.random.default_rng(3)
    comp = compile_hamiltonian(derive_hamiltonian(3, 2))
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(comp.field(b), _field_fd(comp, b), atol=1e-7)


def test_compiled_leading_d2_closed_form():
    comp = compile_hamiltonian(leading_order_hamiltonian(4, 2))
    rng = np.random.default_rng(0)
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    # gauge removed and divided by d! d (d-1) = 4: h = Q
    Q = -0.25 * np.sum(np.abs(b) ** 4) + sum(np.real(b[i] ** 2 * np.conj(b[i + 1]) ** 2)
                                            for i in range(3))
    assert comp.value(b) == pytest.approx(Q, rel=1e-12)
