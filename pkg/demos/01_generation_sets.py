"""
Generation sets
===============

Build small sets with both constructions, verify them exactly and look at
the weight ratio between the middle generations.
"""
from fractions import Fraction

from sobolev_cascade.genset import (check_acceptable, construct_paper, construct_search,
                                    norm_explosion_ratio)

# Two generations are a single rectangle.
S2 = construct_paper(2, 2)
print("N=2 modes:", S2.modes)

# Three generations by randomized search in a small box.
S3 = construct_search(3, 2, height=30, rng_seed=0)
rep = check_acceptable(S3)
print(f"N=3: {S3.m} modes, acceptable = {rep.all_ok}, counts = {rep.counts}")

# Four generations on circles over their parents; coordinates grow quickly.
S4 = construct_paper(4, 2)
print(f"N=4: largest coordinate has {max(len(str(abs(x))) for p in S4.modes for x in p)} digits")
print("N=4 acceptable:", check_acceptable(S4).all_ok)

# The weight ratio of generation N-2 to generation 3 is exact (rational bracket).
r = norm_explosion_ratio(S4, Fraction(3, 2))
print(f"S_2 / S_3 weight ratio at N=4: {r.value:.6f} (exact bracket: {r.exact})")
