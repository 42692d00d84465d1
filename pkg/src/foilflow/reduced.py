"""Reduced co-rotating dynamics at fixed angular momentum k.

Public interface is in the polar chart (r, phi, p, alpha); stepping happens
in the Cartesian chart (x, y, p_x, p_y) to avoid the 1/p singularity in the
alpha equation (see kernels).
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .params import (
    ContactError,
    EnergyLevelError,
    FoilParams,
    ReducedState,
)


def reduced_rhs(rs: ReducedState, params: FoilParams, q: float) -> np.ndarray:
    """Time derivative of (r, phi, p, alpha) of the reduced system."""
    if rs.r <= params.R:
        raise ContactError("r <= R: foil in contact with the source")
    par = params.kernel_params(q)
    x, y, px, py = rs.cart()
    dx, dy, dpx, dpy = kernels.reduced_rhs_cart(x, y, px, py, rs.k, par)
    r = rs.r
    p = rs.p
    dr = (x * dx + y * dy) / r
    dphi = (x * dy - y * dx) / (r * r)
    if p == 0.0:
        raise EnergyLevelError("alpha rate undefined at p = 0")
    dp = (px * dpx + py * dpy) / p
    dalpha = (px * dpy - py * dpx) / (p * p)
    return np.array([dr, dphi, dp, dalpha], dtype=np.float64)


def reduced_rhs_cart(cart, k: float, params: FoilParams, q: float) -> np.ndarray:
    """Cartesian-chart right-hand side (stepping chart; no p = 0 singularity)."""
    par = params.kernel_params(q)
    return np.array(
        kernels.reduced_rhs_cart(cart[0], cart[1], cart[2], cart[3], k, par),
        dtype=np.float64,
    )


def angular_rate(rs: ReducedState, params: FoilParams) -> float:
    """Co-rotating frame rate Omega (the foil's angular velocity)."""
    par = params.kernel_params(0.0)  # Omega does not involve q
    x, y, px, py = rs.cart()
    return kernels.angular_rate(x, y, px, py, rs.k, par)


def reduced_hamiltonian(rs: ReducedState, params: FoilParams, q: float) -> float:
    """Conserved energy of the reduced system."""
    if rs.r <= params.R:
        raise ContactError("r <= R: foil in contact with the source")
    par = params.kernel_params(q)
    x, y, px, py = rs.cart()
    return kernels.reduced_energy_cart(x, y, px, py, rs.k, par)


def momentum_on_energy_level(r: float, phi: float, alpha: float, h: float,
                             k: float, branch: str, params: FoilParams,
                             q: float) -> float:
    """Momentum magnitude p >= 0 with energy h at (r, phi, alpha) on level k.

    The energy is quadratic in p; branch selects the largest or smallest
    admissible root.
    """
    if branch not in ("largest", "smallest"):
        raise ValueError("branch must be 'largest' or 'smallest'")
    if r <= params.R:
        raise ContactError("r <= R")
    m = params.m
    i_eff = params.i_eff
    beta = r * math.sin(alpha - phi) + params.m_c * params.d / m * math.sin(alpha)
    v_pot = params.rho * q * q / (4 * math.pi) * math.log(1 - params.R**2 / r**2)
    a = 1.0 / m + beta * beta / i_eff
    b = -k * beta / i_eff
    c = k * k / (2 * i_eff) + v_pot - h
    disc = b * b - 2.0 * a * c
    if disc < 0:
        raise EnergyLevelError("energy level unreachable at this angle")
    root = math.sqrt(disc)
    candidates = [p for p in ((-b + root) / a, (-b - root) / a) if p >= 0.0]
    if not candidates:
        raise EnergyLevelError("energy level unreachable at this angle")
    return max(candidates) if branch == "largest" else min(candidates)


def impact_parameter(rs: ReducedState, params: FoilParams) -> float:
    """Asymptotic signed offset of the trajectory (well-defined as r grows)."""
    return (
        rs.r * math.sin(rs.alpha - rs.phi)
        + params.m_c * params.d / params.m * math.sin(rs.alpha)
    )
