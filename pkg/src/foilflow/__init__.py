"""foilflow: plane-parallel motion of a circular foil coupled to a point
source in an ideal fluid.

Layers: model (full fixed-frame dynamics and the force oracle), reduced
(co-rotating reduction at fixed angular momentum), integrators (projection
and collocation stepping with events), balanced / unbalanced (qualitative
analysis of the d = 0 and d > 0 cases), scattering (the secant map), cli.
"""

from .params import (
    ConfigurationError,
    ContactError,
    EnergyLevelError,
    FoilParams,
    FullState,
    Integrals,
    ReducedState,
    SourceSpec,
)

__version__ = "1.0.0"

__all__ = [
    "ConfigurationError",
    "ContactError",
    "EnergyLevelError",
    "FoilParams",
    "FullState",
    "Integrals",
    "ReducedState",
    "SourceSpec",
    "__version__",
]
