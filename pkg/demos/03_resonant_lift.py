"""
Toy model inside the resonant system
====================================

On the symmetric subspace (equal amplitudes within each generation) the
resonant flow reproduces the toy model once time and phase are matched.
"""
from sobolev_cascade.genset import construct_search
from sobolev_cascade.resonant import build_resonant_index, default_seed, lift_and_compare
from sobolev_cascade.toy import ToyParams, derive_hamiltonian

S = construct_search(3, 2, height=30, rng_seed=0)
idx = build_resonant_index(S, 2)
print(f"{len(idx)} resonant monomials on {S.m} modes")

params = ToyParams(3, 2, "full_poly", derive_hamiltonian(3, 2))
rep = lift_and_compare(S, 2, idx, params, default_seed(3), horizon=0.5, tol=1e-12)
print(f"max l1 deviation {rep.max_l1_deviation:.2e} (tolerance scale {rep.tolerance:.2e})")
print(f"largest difference inside a generation {rep.max_spread:.1e}")
