"""Physical parameters and domain state containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ConfigurationError(ValueError):
    """Invalid physical parameters or a state outside the configuration space."""


class EnergyLevelError(ValueError):
    """Requested energy level is unreachable at the given angles."""


class ContactError(RuntimeError):
    """Foil boundary reached the source (r <= R)."""


@dataclass(frozen=True)
class FoilParams:
    """Constants of the foil and the fluid, per unit length of the cylinder."""

    m_c: float = 1.0
    I_c: float = 1.0
    R: float = 1.0
    d: float = 0.0
    rho: float = 1.0

    def __post_init__(self):
        if self.m_c <= 0 or self.I_c <= 0 or self.R <= 0 or self.rho <= 0:
            raise ConfigurationError("m_c, I_c, R and rho must be positive")
        if not 0 <= self.d < self.R:
            raise ConfigurationError("center-of-mass offset must satisfy 0 <= d < R")

    @property
    def m(self) -> float:
        """Total effective mass m_c + rho*pi*R^2 (foil plus added mass)."""
        return self.m_c + self.rho * math.pi * self.R**2

    @property
    def i_eff(self) -> float:
        """Effective inertia I_c + m_c d^2 - (m_c d)^2 / m of the reduced rotation."""
        g = self.m_c * self.d
        return self.I_c + self.m_c * self.d**2 - g * g / self.m

    def kernel_params(self, q: float) -> np.ndarray:
        """Flat parameter vector consumed by the numeric kernels."""
        from .kernels import pack_params

        return pack_params(
            self.m,
            self.m_c * self.d,
            self.i_eff,
            self.rho * q * q * self.R**2 / (2 * math.pi),
            self.rho * q * q / (4 * math.pi),
            self.R,
        )


@dataclass(frozen=True)
class SourceSpec:
    """Point source: position, intensity q(t) and its exact derivative."""

    position: tuple[float, float] = (0.0, 0.0)
    intensity: Callable[[float], float] = lambda t: 1.0
    intensity_rate: Callable[[float], float] = lambda t: 0.0
    mobile: bool = False

    @staticmethod
    def constant(q: float, position=(0.0, 0.0), mobile: bool = False) -> "SourceSpec":
        return SourceSpec(
            position=position,
            intensity=lambda t, _q=q: _q,
            intensity_rate=lambda t: 0.0,
            mobile=mobile,
        )


CHART_BODY = "body"  # momenta of the foil alone (Newtonian form)
CHART_CANONICAL = "canonical"  # conjugate momenta (fixed source at origin)


@dataclass
class FullState:
    """Fixed-frame pose, momenta, and source position.

    The chart tag tells which momenta are stored: "body" momenta
    (P_x, P_y, P_theta) of the foil, or "canonical" conjugate momenta
    (Pi_x, Pi_y, Pi_theta) valid for a fixed source at the origin.
    theta is kept unwrapped so angle quadratures stay continuous.
    """

    X_c: float
    Y_c: float
    theta: float
    px: float
    py: float
    ptheta: float
    X_q: float = 0.0
    Y_q: float = 0.0
    chart: str = CHART_BODY

    def __post_init__(self):
        if self.chart not in (CHART_BODY, CHART_CANONICAL):
            raise ConfigurationError(f"unknown momentum chart {self.chart!r}")

    def separation2(self) -> float:
        return (self.X_q - self.X_c) ** 2 + (self.Y_q - self.Y_c) ** 2

    def validate(self, params: FoilParams):
        if self.separation2() <= params.R**2:
            raise ConfigurationError("source lies inside the foil (r <= R)")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.X_c, self.Y_c, self.theta, self.px, self.py, self.ptheta,
             self.X_q, self.Y_q],
            dtype=np.float64,
        )

    @classmethod
    def from_array(cls, a, chart: str = CHART_BODY) -> "FullState":
        return cls(*map(float, a[:8]), chart=chart)


@dataclass
class ReducedState:
    """Polar chart (r, phi, p, alpha) of the reduced system at fixed k.

    degenerate is set when p = 0 forced alpha to the 0 convention.
    """

    r: float
    phi: float
    p: float
    alpha: float
    k: float
    degenerate: bool = False

    def cart(self) -> np.ndarray:
        """Cartesian chart (x, y, p_x, p_y) used by the integrators."""
        return np.array(
            [
                self.r * math.cos(self.phi),
                self.r * math.sin(self.phi),
                self.p * math.cos(self.alpha),
                self.p * math.sin(self.alpha),
            ],
            dtype=np.float64,
        )

    @classmethod
    def from_cart(cls, cart, k: float) -> "ReducedState":
        x, y, px, py = map(float, cart[:4])
        p = math.hypot(px, py)
        degenerate = p == 0.0
        alpha = 0.0 if degenerate else math.atan2(py, px)
        return cls(r=math.hypot(x, y), phi=math.atan2(y, x), p=p, alpha=alpha,
                   k=k, degenerate=degenerate)


@dataclass(frozen=True)
class Integrals:
    """Values of the conserved quantities on a trajectory.

    c and f (body spin and orbital angular momentum) only exist for d = 0;
    there k = c + f.
    """

    h: float
    k: float
    c: float | None = None
    f: float | None = None
