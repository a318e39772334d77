"""
Three evaluators of the right-hand side
=======================================

The contour integral is evaluated directly, in split form (exact linear part
plus the nonlinear remainder) and with the truncated series. At small
amplitude all three collapse onto -Lambda^(1+alpha) f.
"""

import numpy as np

from muskat_lab.experiments import RandomBand, initial_field
from muskat_lab.kernel_eval import linear_symbol, rhs_direct, rhs_series, rhs_split
from muskat_lab.spectral_core import GridSpec, ScalarField, SpectralField, forward, inverse

g = GridSpec(128, 128, 2 * np.pi, 2 * np.pi)
base = initial_field(RandomBand(1.0, 4), g, seed=3)

for amp in (1e-6, 1e-1):
    f = base * amp
    lin = inverse(SpectralField(g, linear_symbol(g, 0.0) * forward(f).coeffs)).values
    d = rhs_direct(f, 0.0).values
    s = rhs_split(f, 0.0).values
    r = rhs_series(f, 0.0, 8).values
    n = np.linalg.norm(s)
    print(f"amp={amp:g}")
    print("  |direct - linear| / |linear| =", np.linalg.norm(d - lin) / np.linalg.norm(lin))
    print("  |direct - split|  / |split|  =", np.linalg.norm(d - s) / n)
    print("  |series - split|  / |split|  =", np.linalg.norm(r - s) / n)

# the nonlinear part is cubic in the amplitude
for amp in (1e-1, 1e-2):
    f = base * amp
    lin = inverse(SpectralField(g, linear_symbol(g, 0.0) * forward(f).coeffs)).values
    s = rhs_split(f, 0.0).values
    print(f"amp={amp:g}: |N| / |linear| = {np.linalg.norm(s - lin) / np.linalg.norm(lin):.3e}")
