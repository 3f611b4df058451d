"""Compare the exact variance of the sequence purity with its upper bound.

Run with ``python3 tutorials/verify_bounds.py``.
"""

import numpy as np

from urbench import bounds, channels, protocol, reptheory, verify

rng = np.random.default_rng(11)
noise = channels.mix_with_identity(channels.random_cptp(2, 3, rng), 0.2)
spam = protocol.perturbed_two_copy_spam(2, 0.1, rng)
u = channels.unitarity(noise)

rho_bar = reptheory.absorb_first_noise(noise, spam.rho_bar)
params = bounds.spam_decompose(rho_bar, spam.e)
model = reptheory.MomentModel(noise, "dense")
r2, e2 = reptheory.two_copy_tensor(rho_bar, 1), reptheory.two_copy_tensor(spam.e, 1)

print(f"u = {u:.6f}, alpha = {params.alpha:.4f}, beta = {params.beta:.4f}")
print("\n  m   exact variance   bound")
for m in (1, 2, 5, 10, 50, 200):
    v = model.variance(r2, e2, m)
    s2 = bounds.variance_bound(bounds.BoundInputs(u, m, 2, params))
    print(f"{m:4d}  {v:.4e}      {s2:.4e}")

print("\nfast verification suite:")
for r in verify.run_checks("fast", seed=0):
    print(f"  {r.status:4s}  {r.name:36s} margin {r.worst_margin:+.2e}  {r.detail}")
