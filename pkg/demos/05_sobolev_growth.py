"""
Sobolev growth from the cascade
===============================

Lift the start and end of a toy cascade onto a seven generation set and
compare the squared H^s norms with the weight ratio of the set.
"""
from fractions import Fraction

from sobolev_cascade.genset import construct_paper, norm_explosion_ratio
from sobolev_cascade.pipeline import end_to_end_growth

# The light relation check keeps the construction within a few seconds.
S = construct_paper(7, 2, nondeg="light")
ratio = norm_explosion_ratio(S, Fraction(3, 2))
print(f"S_5 / S_3 = {ratio.value:.9f}, threshold sqrt(2), exceeds: {ratio.exceeds_threshold()}")

rep = end_to_end_growth(S, 1.5, 1e-3)
print(f"H^s growth {rep.growth_ratio:.6f} after time {rep.T0:.2f}")
print(f"log10 of the squared norm: {rep.meta['log10_norm_initial']:.3f} -> "
      f"{rep.meta['log10_norm_final']:.3f}")
