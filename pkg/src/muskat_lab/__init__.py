"""
muskat_lab
==========

Numerical laboratory for the generalized (alpha) Muskat contour equation on
a periodic cell: spectral tools, special functions and constants, three
cross-validating right-hand-side evaluators, an exponential integrator,
diagnostics and experiment drivers.
"""

__version__ = "0.1.0"

from .spectral_core import (AlphaParams, GridSpec, ScalarField, SpectralField, forward,
                            fourier_norm, inverse, sup_norms)
from .kernel_eval import DirectQuadrature, SeriesTruncated, SplitSpectral, evaluate
from .stepper import SimState, StepperConfig, run, step

__all__ = [
    "AlphaParams",
    "GridSpec",
    "ScalarField",
    "SpectralField",
    "forward",
    "inverse",
    "fourier_norm",
    "sup_norms",
    "DirectQuadrature",
    "SplitSpectral",
    "SeriesTruncated",
    "evaluate",
    "SimState",
    "StepperConfig",
    "run",
    "step",
]
