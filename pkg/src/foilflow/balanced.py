"""Qualitative analysis of the balanced foil (d = 0).

After symmetry reduction the radial motion decouples into a one-degree
system in (s, P_s) governed by an effective radial potential; everything
here (critical value, saddle, phase portraits, bifurcation diagram with
leaf counts) follows from that potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from skimage import measure

from .params import ConfigurationError, FoilParams


class NoSaddleError(ValueError):
    """The radial potential is monotone: no interior maximum exists."""


def f_critical(params: FoilParams, q: float) -> float:
    """Orbital-momentum threshold separating monotone from barrier-type potentials."""
    return abs(q) * params.R * math.sqrt(params.rho * params.m / (2 * math.pi))


def radial_potential(s, f: float, params: FoilParams, q: float):
    """Effective radial potential U(s) = f^2/(2 m s^2) + source log term."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= params.R):
        raise ConfigurationError("radial potential defined for s > R only")
    m = params.m
    out = f * f / (2 * m * s * s) + params.rho * q * q / (4 * math.pi) * np.log(
        1 - params.R**2 / s**2
    )
    return out if out.shape else float(out)


def radial_potential_deriv(s, f: float, params: FoilParams, q: float):
    s = np.asarray(s, dtype=float)
    m = params.m
    out = -f * f / (m * s**3) + params.rho * q * q * params.R**2 / (
        2 * math.pi * s * (s**2 - params.R**2)
    )
    return out if out.shape else float(out)


def saddle_radius(f: float, params: FoilParams, q: float) -> float:
    """Location of the potential maximum (exists only above the critical f)."""
    f_cr = f_critical(params, q)
    if abs(f) <= f_cr:
        raise NoSaddleError("potential is monotone for |f| <= f_cr")
    denom = 2 * math.pi * f * f - params.rho * params.m * q * q * params.R**2
    s0 = params.R * abs(f) * math.sqrt(2 * math.pi / denom)
    assert abs(radial_potential_deriv(s0, f, params, q)) <= 1e-10 * max(
        1.0, abs(f)
    ), "saddle radius does not zero the potential slope"
    return s0


def radial_rhs(s: float, p_s: float, f: float, params: FoilParams, q: float):
    """Reduced radial flow (sdot, P_s dot)."""
    if s <= params.R:
        raise ConfigurationError("s <= R")
    m = params.m
    return (
        p_s / m,
        f * f / (m * s**3)
        - params.rho * q * q * params.R**2 / (2 * math.pi * s * (s**2 - params.R**2)),
    )


def radial_hamiltonian(s: float, p_s: float, f: float, params: FoilParams,
                       q: float) -> float:
    return p_s * p_s / (2 * params.m) + radial_potential(s, f, params, q)


@dataclass
class RadialProfile:
    """Sampled radial potential with its qualitative classification."""

    f: float
    samples: np.ndarray  # columns (s, U)
    classification: str  # "monotone" | "has_maximum" | "critical"


def radial_profile(f: float, params: FoilParams, q: float, s_min: float | None = None,
                   s_max: float = 20.0, n: int = 400,
                   rel_tol: float = 1e-6) -> RadialProfile:
    if s_min is None:
        s_min = params.R * (1 + 1e-3)
    s = np.linspace(s_min, s_max, n)
    u = radial_potential(s, f, params, q)
    f_cr = f_critical(params, q)
    if f_cr == 0.0:
        cls = "critical" if f == 0 else "has_maximum"
    elif abs(abs(f) - f_cr) <= rel_tol * f_cr:
        cls = "critical"
    elif abs(f) > f_cr:
        cls = "has_maximum"
    else:
        cls = "monotone"
    return RadialProfile(f=f, samples=np.column_stack([s, u]), classification=cls)


def alpha_quadrature(times, s_trace, f: float, params: FoilParams,
                     alpha0: float = 0.0) -> np.ndarray:
    """Polar angle alpha(t) recovered by quadrature of f/(m s^2) along s(t)."""
    times = np.asarray(times, dtype=float)
    s_trace = np.asarray(s_trace, dtype=float)
    integrand = f / (params.m * s_trace**2)
    return alpha0 + cumulative_simpson(integrand, x=times, initial=0.0)


def phase_portrait(f: float, h_levels, params: FoilParams, q: float,
                   s_range=(None, 10.0), resolution: int = 600):
    """Level curves of the radial energy in the (s, P_s) plane.

    Returns a dict with the requested level polylines, the separatrix level
    when the saddle exists, and the fixed point.
    """
    s_lo, s_hi = s_range
    if s_lo is None:
        s_lo = params.R * (1 + 1e-3)
    if s_lo <= params.R or s_hi <= s_lo:
        raise ConfigurationError("s_range must lie inside (R, inf)")
    h_levels = list(h_levels)
    f_cr = f_critical(params, q)
    saddle = None
    separatrix_level = None
    if abs(f) > f_cr:
        s0 = saddle_radius(f, params, q)
        if s_lo < s0 < s_hi:
            saddle = (s0, 0.0)
        separatrix_level = float(radial_potential(s0, f, params, q))

    s = np.linspace(s_lo, s_hi, resolution)
    u = radial_potential(s, f, params, q)
    h_all = h_levels + ([separatrix_level] if separatrix_level is not None else [])
    p_max = math.sqrt(2 * params.m * max(1e-12, max(h_all) - float(np.min(u))))
    p = np.linspace(-p_max, p_max, resolution)
    energy = p[:, None] ** 2 / (2 * params.m) + u[None, :]

    def curves(level):
        out = []
        for poly in measure.find_contours(energy, level):
            ps = p[0] + poly[:, 0] * (p[-1] - p[0]) / (resolution - 1)
            ss = s[0] + poly[:, 1] * (s[-1] - s[0]) / (resolution - 1)
            out.append(np.column_stack([ss, ps]))
        return out

    return {
        "levels": {h: curves(h) for h in h_levels},
        "separatrix_level": separatrix_level,
        "separatrix": curves(separatrix_level) if separatrix_level is not None else [],
        "fixed_point": saddle,
        "f_critical": f_cr,
    }


def count_phase_components(f: float, h: float, params: FoilParams, q: float,
                           s_big: float = 1e3, n: int = 20000) -> int:
    """Number of connected level-set components of the radial energy at h.

    Works on the window (R, s_big]: each admissible s-interval contributes
    one component when it has a turning point and two (the +-P_s branches)
    when it does not.
    """
    s = np.geomspace(params.R * (1 + 1e-9), s_big, n)
    allowed = h - radial_potential(s, f, params, q) >= 0
    count = 0
    i = 0
    while i < n:
        if not allowed[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and allowed[j + 1]:
            j += 1
        # interior endpoints are turning points; window edges leave branches open
        has_turning = (i > 0) or (j < n - 1)
        count += 1 if has_turning else 2
        i = j + 1
    return count


@dataclass
class BifurcationDiagram:
    """Critical-energy curves and leaf counts on the (f, h) plane."""

    f_grid: np.ndarray
    f_critical: float
    sigma_a: np.ndarray  # (f, h) rows: critical-trajectory energies, f < f_cr
    sigma_b: np.ndarray  # (f, h) rows: saddle energies, f > f_cr
    sigma_c: np.ndarray  # (f, h) rows: leaf boundary, f > f_cr
    leaf_count: list = field(default_factory=list)  # (f, h, count) probes


def bifurcation_diagram(params: FoilParams, q: float, f_range=(0.05, 2.0),
                        resolution: int = 200, probe_count: int = 8,
                        s_big: float = 1e3) -> BifurcationDiagram:
    """Bifurcation data of the radial system for f > 0.

    sigma_b follows the saddle energy U(s_0(f)).  sigma_a is the detected
    boundary of the critical trajectories for f < f_cr, which numerically is
    the h = 0 line (the escape threshold); the same boundary continues as
    the leaf edge sigma_c above f_cr.
    """
    f_lo, f_hi = f_range
    if f_lo <= 0:
        raise ConfigurationError("f_range must be positive (negative f is mirror)")
    f_grid = np.linspace(f_lo, f_hi, resolution) if resolution else np.array([])
    f_cr = f_critical(params, q)
    sig_a, sig_b, sig_c = [], [], []
    for f in f_grid:
        if f < f_cr:
            sig_a.append((f, 0.0))
        elif f > f_cr:
            s0 = saddle_radius(f, params, q)
            sig_b.append((f, float(radial_potential(s0, f, params, q))))
            sig_c.append((f, 0.0))
    probes = []
    for f in np.linspace(f_lo, f_hi, probe_count):
        for h in (-0.01, 0.01):
            probes.append((float(f), h, count_phase_components(f, h, params, q, s_big)))
    return BifurcationDiagram(
        f_grid=f_grid,
        f_critical=f_cr,
        sigma_a=np.array(sig_a).reshape(-1, 2),
        sigma_b=np.array(sig_b).reshape(-1, 2),
        sigma_c=np.array(sig_c).reshape(-1, 2),
        leaf_count=probes,
    )
