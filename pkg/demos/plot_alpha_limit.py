"""
The alpha -> 0 limit
====================

Runs at alpha in {0.2, 0.1, 0.05, 0.025} are compared with the alpha = 0 run
at t* = 1. The L2 distance shrinks roughly linearly in alpha.
"""

import json

import numpy as np

from muskat_lab.cli import load_config
from muskat_lab.experiments import alpha_convergence_study

s, _ = load_config(__file__.replace("plot_alpha_limit.py", "configs/bump.json"))
res = alpha_convergence_study(s, [0.2, 0.1, 0.05, 0.025], t_star=1.0)
print(json.dumps(res.as_dict(), indent=2))
ratios = np.array(res.l2_errors[:-1]) / np.array(res.l2_errors[1:])
print("successive l2 ratios (2 means first order):", ratios)
