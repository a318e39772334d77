"""
Explicit constants of the small-data theory
===========================================

The smallness threshold k0(alpha) is the root of 2 C(alpha) F(z) = 1, where F
is the weighted series with a closed form. We tabulate it together with the
slope threshold and the L-infinity decay constants for unit data.
"""

import numpy as np

from muskat_lab import constants as cst
from muskat_lab import special_fn as sf

alphas = np.round(np.arange(0.0, 0.46, 0.05), 2)
print(f"{'alpha':>6} {'C(alpha)':>10} {'k0':>10} {'slope thr':>10} {'c_decay':>10}")
for a in alphas:
    k0 = cst.k0_of_alpha(a)
    gt = cst.grad_threshold(a, 0.1)
    cd = cst.decay_constants(a, 1.0, 1.0)["c_decay"]
    print(f"{a:6.2f} {cst.c_alpha(a):10.5f} {k0:10.6f} {gt:10.6f} {cd:10.6f}")

# the closed form against brute-force partial sums
z, a = 0.5, 0.25
print("closed form :", sf.weighted_series(z, a))
print("200 terms   :", sf.weighted_partial_sum(z, a, 200))

# mu(alpha) shrinks to zero as ||f0||_1 approaches k0
k0 = cst.k0_of_alpha(0.0)
for frac in (0.0, 0.5, 0.8, 0.99):
    print(f"||f0||_1 = {frac:.2f} k0 -> mu = {cst.mu_of(0.0, frac * k0):.6f}")
