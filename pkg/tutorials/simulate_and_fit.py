"""Simulate the two-copy protocol on a noisy qubit and recover the unitarity.

Run with ``python3 tutorials/simulate_and_fit.py``.
"""

import numpy as np

from urbench import bounds, channels, fitting, protocol, reptheory

rng = np.random.default_rng(3)
noise, _ = channels.with_unitarity(channels.random_cptp(2, 4, rng), 0.98)
spam = protocol.perturbed_two_copy_spam(2, 0.05, rng)
u = channels.unitarity(noise)
print(f"true unitarity u = {u:.6f}, average fidelity {channels.avg_gate_fidelity(noise):.6f}")

cfg = protocol.ProtocolConfig(q=1, lengths=[1, 2, 4, 8, 16, 32, 64, 128], n_sequences=250, seed=7)
data = protocol.run_experiment(cfg, noise, spam)

rho_bar = reptheory.absorb_first_noise(noise, spam.rho_bar)
params = bounds.spam_decompose(rho_bar, spam.e)
L = bounds.interval_bound(params)

print("\n  m      mean      exact    +- (99%)")
for m, mean in data.means().items():
    s2 = bounds.variance_bound(bounds.BoundInputs(u, m, 2, params))
    eps = bounds.hoeffding_epsilon(250, 0.01, s2, L)
    exact = reptheory.exact_mean(noise, rho_bar, spam.e, m)
    print(f"{m:4d}  {mean:.6f}  {exact:.6f}  {eps:.4f}")

fit = fitting.fit_decay(data.points())
print(f"\nfit: u_hat = {fit.u_hat:.6f}, B_hat = {fit.B_hat:.6f}, R^2 = {fit.r_squared:.6f}")
