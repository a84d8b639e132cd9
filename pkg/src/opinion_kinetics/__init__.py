"""Simulation and verification toolkit for a kinetic opinion-dynamics model.

Finite-population event-driven simulation, mean-field particle and grid/
spectral solvers, closed-form equilibrium analysis (uniform, fractal,
volcano and Gaussian regimes), and a metrics suite that checks the model's
convergence statements numerically at desk scale.
"""

__version__ = "0.1.0"

from .core import (DomainError, InitSpec, ModelParams, NumericsError,
                   OpinionKineticsError, RandomSource, SampleSet, rademacher,
                   validate_params)

__all__ = [
    "__version__",
    "DomainError",
    "InitSpec",
    "ModelParams",
    "NumericsError",
    "OpinionKineticsError",
    "RandomSource",
    "SampleSet",
    "rademacher",
    "validate_params",
]
