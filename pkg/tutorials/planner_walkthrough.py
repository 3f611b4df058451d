"""Plan how many random sequences to draw before running an experiment.

Run with ``python3 tutorials/planner_walkthrough.py``.
"""

import math

from urbench import bounds

# Small SPAM errors: squared deviations of 0.02 on the state and the measurement.
spam = bounds.SpamParams.from_squares(0.02, 0.02)
L = bounds.interval_bound(spam)
cp = bounds.ConfidenceParams(epsilon=0.02, delta=0.01)
print(f"each sequence purity lies in an interval of width L = {L:.6f}")

print("\n  m     sigma^2 bound    N (Hoeffding)")
for m in (10, 30, 100, math.inf):
    s2 = bounds.variance_bound(bounds.BoundInputs(0.98, m, 2, spam))
    print(f"{m!s:>5}  {s2:14.6e}  {bounds.hoeffding_N(cp, s2, L):8d}")

print(f"\nignoring the variance entirely needs N = {bounds.first_order_N(cp, L)}")

# The inverse question: what accuracy does a fixed budget buy?
for m in (8, 174):
    s2 = bounds.variance_bound(bounds.BoundInputs(0.98, m, 2, spam))
    eps = bounds.hoeffding_epsilon(250, 0.01, s2, L)
    print(f"N = 250 sequences at m = {m}: half-width {eps:.4f}")

print("\ndimension constants (c1, c2, c3):")
for d in (2, 4, 8):
    print(d, tuple(round(c, 4) for c in bounds.c_constants(d)))
