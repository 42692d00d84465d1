"""Effective-potential analysis for the unbalanced foil (d > 0).

At fixed angular momentum k the accessible motion is organized by the
effective potential U_e(x, y) in the co-rotating frame.  Its critical
points lie on the x axis and solve a quartic; the two thresholds where the
critical-point structure changes are the inflection value and the value at
which the quartic degenerates to a cubic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize
from skimage import measure

from .params import ConfigurationError, FoilParams

REGIMES = (
    "no_critical",
    "inflection",
    "max_plus_saddle_negative_axis",
    "max_only",
    "max_negative_saddle_positive",
)


@dataclass
class CriticalPoint:
    x: float
    kind: str  # "maximum" | "saddle" | "inflection"
    value: float  # U_e(x, 0)
    hessian: tuple[float, float]  # (U_xx, U_yy) at (x, 0)


@dataclass
class EffectivePotentialReport:
    k: float
    regime: str
    critical_points: list[CriticalPoint]
    k_inf: float | None
    k_cr: float


def _inertia_denom(x, y, params: FoilParams):
    return (
        params.m * (x * x + y * y)
        + 2 * params.m_c * params.d * x
        + params.I_c
        + params.m_c * params.d**2
    )


def effective_potential(x, y, k: float, params: FoilParams, q: float):
    """U_e(x, y): centrifugal term over the configuration inertia plus the
    source log term."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s2 = x * x + y * y
    if np.any(s2 <= params.R**2):
        raise ConfigurationError("effective potential defined outside the foil radius")
    out = k * k / (2 * _inertia_denom(x, y, params)) + params.rho * q * q / (
        4 * math.pi
    ) * np.log(1 - params.R**2 / s2)
    return out if out.shape else float(out)


def effective_potential_dx(x, k: float, params: FoilParams, q: float):
    """d U_e / dx on the axis y = 0."""
    x = np.asarray(x, dtype=float)
    den = _inertia_denom(x, 0.0, params)
    out = -k * k * (params.m * x + params.m_c * params.d) / den**2 + (
        params.rho * q * q / (2 * math.pi)
    ) * params.R**2 / (x * (x * x - params.R**2))
    return out if out.shape else float(out)


def effective_potential_dxx(x, k: float, params: FoilParams, q: float):
    """d^2 U_e / dx^2 on the axis y = 0."""
    x = np.asarray(x, dtype=float)
    m, g = params.m, params.m_c * params.d
    den = _inertia_denom(x, 0.0, params)
    dden = 2 * m * x + 2 * g
    term1 = -k * k * (m / den**2 - dden**2 / den**3)
    c = params.rho * q * q / (2 * math.pi) * params.R**2
    u = x * (x * x - params.R**2)
    du = 3 * x * x - params.R**2
    term2 = -c * du / u**2
    out = term1 + term2
    return out if out.shape else float(out)


def effective_potential_dyy_axis(x, k: float, params: FoilParams, q: float):
    """d^2 U_e / dy^2 on the axis y = 0."""
    x = np.asarray(x, dtype=float)
    den = _inertia_denom(x, 0.0, params)
    out = -k * k * params.m / den**2 + (
        params.rho * q * q / (2 * math.pi)
    ) * params.R**2 / (x * x * (x * x - params.R**2))
    return out if out.shape else float(out)


def quartic_coefficients(k: float, params: FoilParams, q: float):
    """Coefficients (a4, a3, a2, a1, a0) of the axis critical-point equation."""
    m, m_c, d, R, rho = params.m, params.m_c, params.d, params.R, params.rho
    I_c = params.I_c
    j = I_c + m_c * d * d
    c = rho * q * q * R * R / (2 * math.pi)
    a4 = c * m * m - m * k * k
    a3 = 4 * c * m * m_c * d - m_c * d * k * k
    a2 = c * (2 * m * j + 4 * m_c**2 * d**2) + m * R * R * k * k
    a1 = 4 * c * m_c * d * j + m_c * d * R * R * k * k
    a0 = c * j * j
    return a4, a3, a2, a1, a0


def k_critical(params: FoilParams, q: float) -> float:
    """Angular-momentum value where the quartic's leading coefficient vanishes."""
    return abs(q) * params.R * math.sqrt(params.rho * params.m / (2 * math.pi))


def _axis_roots(k: float, params: FoilParams, q: float):
    """Certified real roots of the critical-point equation with |x| > R.

    Companion-matrix eigenvalues plus one Newton polish on the potential
    slope; near the leading-coefficient degeneracy the cubic is solved
    instead.
    """
    coeffs = np.array(quartic_coefficients(k, params, q))
    k_cr = k_critical(params, q)
    if abs(abs(k) - k_cr) < 1e-8 * max(k_cr, 1.0):
        coeffs = coeffs[1:]  # boundary case: quartic degenerates to a cubic
    roots = np.roots(coeffs)
    out = []
    scale = np.max(np.abs(coeffs))
    for z in roots:
        if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
            continue
        x = float(z.real)
        if x * x <= params.R**2:
            continue
        # one Newton step on the slope of the potential itself
        g = effective_potential_dx(x, k, params, q)
        gp = effective_potential_dxx(x, k, params, q)
        if gp != 0.0:
            x_new = x - g / gp
            if x_new * x_new > params.R**2 and abs(
                effective_potential_dx(x_new, k, params, q)
            ) < abs(g):
                x = x_new
        resid = float(np.polyval(coeffs, x))
        if abs(resid) > 1e-10 * scale * max(1.0, abs(x)) ** len(coeffs):
            continue
        out.append(x)
    # collapse duplicates from the polish
    out.sort()
    dedup = []
    for x in out:
        if not dedup or abs(x - dedup[-1]) > 1e-9 * max(1.0, abs(x)):
            dedup.append(x)
    return dedup


def _classify(x: float, k: float, params: FoilParams, q: float) -> CriticalPoint:
    uxx = effective_potential_dxx(x, k, params, q)
    uyy = effective_potential_dyy_axis(x, k, params, q)
    curv_scale = abs(k * k * params.m / _inertia_denom(x, 0.0, params) ** 2)
    if abs(uxx) <= 1e-6 * max(curv_scale, 1e-300):
        kind = "inflection"
    elif uxx < 0 and uyy < 0:
        kind = "maximum"
    else:
        kind = "saddle"
    return CriticalPoint(
        x=x,
        kind=kind,
        value=effective_potential(x, 0.0, k, params, q),
        hessian=(float(uxx), float(uyy)),
    )


def k_inflection(params: FoilParams, q: float):
    """Threshold k and axis coordinate where an inflection point first appears.

    Bisects on the number of negative-axis critical points, then polishes
    the degenerate-root system (slope = curvature = 0) with a 2D solve.
    """
    if params.d == 0:
        raise ConfigurationError(
            "inflection scenario degenerates for a balanced foil (d = 0)"
        )
    k_cr = k_critical(params, q)

    def n_negative(k):
        return sum(1 for x in _axis_roots(k, params, q) if x < 0)

    k_hi = k_cr * (1 - 1e-7)
    if n_negative(k_hi) < 2:
        raise ConfigurationError("no two-critical-point regime found below k_cr")
    k_lo = k_cr * 0.5
    while n_negative(k_lo) >= 2:
        k_lo *= 0.5
        if k_lo < 1e-12:
            raise ConfigurationError("inflection bracketing failed")
    for _ in range(60):
        mid = 0.5 * (k_lo + k_hi)
        if n_negative(mid) >= 2:
            k_hi = mid
        else:
            k_lo = mid
    roots = [x for x in _axis_roots(k_hi, params, q) if x < 0]
    x_guess = float(np.mean(roots))

    def system(v):
        x, k = v
        return [
            effective_potential_dx(x, k, params, q),
            effective_potential_dxx(x, k, params, q),
        ]

    sol, info, ier, msg = optimize.fsolve(
        system, [x_guess, 0.5 * (k_lo + k_hi)], full_output=True, xtol=1e-13
    )
    if ier != 1:
        raise ConfigurationError(
            f"inflection solve failed ({msg}); bracket [{k_lo}, {k_hi}]"
        )
    x_inf, k_inf = float(sol[0]), float(sol[1])
    resid = system([x_inf, k_inf])
    if max(abs(resid[0]), abs(resid[1])) > 1e-9:
        raise ConfigurationError("inflection residuals above tolerance")
    return k_inf, x_inf


def critical_points(k: float, params: FoilParams, q: float) -> EffectivePotentialReport:
    """Critical points of the effective potential with regime classification."""
    pts = [_classify(x, k, params, q) for x in _axis_roots(k, params, q)]
    k_cr = k_critical(params, q)
    try:
        k_inf, _ = k_inflection(params, q)
    except ConfigurationError:
        k_inf = None
    ak = abs(k)
    if abs(ak - k_cr) < 1e-8 * max(k_cr, 1.0):
        regime = "max_only"
    elif ak > k_cr:
        regime = "max_negative_saddle_positive"
    elif k_inf is not None and ak < k_inf - 1e-8 * k_cr:
        regime = "no_critical"
    elif k_inf is not None and abs(ak - k_inf) <= 1e-8 * k_cr:
        regime = "inflection"
    elif not pts:
        regime = "no_critical"
    else:
        regime = "max_plus_saddle_negative_axis"
    return EffectivePotentialReport(
        k=k, regime=regime, critical_points=pts, k_inf=k_inf, k_cr=k_cr
    )


def circular_solution(x_star: float, k: float, params: FoilParams, q: float,
                      fd_step: float = 1e-6):
    """Circular motion riding a critical point, with its stability verdict.

    Returns (law, rate, eigenvalues, verdict): law maps t to
    (X_c, Y_c, theta); rate is the constant angular velocity; eigenvalues
    are those of the reduced-flow linearization at the fixed point.
    """
    slope = effective_potential_dx(x_star, k, params, q)
    scale = abs(k * k / _inertia_denom(x_star, 0.0, params) ** 2) + abs(
        params.rho * q * q / (2 * math.pi * x_star)
    )
    if abs(slope) > 1e-7 * max(scale, 1e-300):
        raise ConfigurationError("x_star is not a certified critical point")
    rate = k / _inertia_denom(x_star, 0.0, params)

    def law(t):
        th = rate * np.asarray(t, dtype=float)
        return x_star * np.cos(th), x_star * np.sin(th), th

    # fixed point of the reduced Cartesian flow
    from .reduced import reduced_rhs_cart

    p_y = rate * (params.m * x_star + params.m_c * params.d)
    fixed = np.array([x_star, 0.0, 0.0, p_y])
    jac = np.empty((4, 4))
    for i in range(4):
        h = fd_step * max(1.0, abs(fixed[i]))
        up = fixed.copy()
        dn = fixed.copy()
        up[i] += h
        dn[i] -= h
        jac[:, i] = (
            reduced_rhs_cart(up, k, params, q) - reduced_rhs_cart(dn, k, params, q)
        ) / (2 * h)
    eigs = np.linalg.eigvals(jac)
    unstable = bool(np.max(eigs.real) > 1e-6 * max(abs(rate), 1e-300))
    return law, rate, eigs, "unstable" if unstable else "spectrally_neutral"


@dataclass
class HillRegions:
    h: float
    k: float
    boundaries: list  # polylines (x, y)
    regions: list  # labels: "A" (escape-connected), "B" (source-connected), "merged"
    n_regions: int
    contact_circle: float
    window: tuple
    barrier_contained: bool = True


def hill_regions(h: float, k: float, params: FoilParams, q: float,
                 window=None, resolution: int = 500) -> HillRegions:
    """Accessible regions {U_e <= h} with connectivity labels.

    Components touching the window edge are escape-connected ("A"); those
    adjacent to the foil-contact circle are source-connected ("B"); a
    component doing both is "merged".
    """
    report = critical_points(k, params, q)
    if window is None:
        span = 2.5 * max((abs(p.x) for p in report.critical_points), default=10.0)
        span = max(span, 5.0 * params.R)
        window = (-span, span, -span, span)
    x_lo, x_hi, y_lo, y_hi = window
    xs = np.linspace(x_lo, x_hi, resolution)
    ys = np.linspace(y_lo, y_hi, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    S2 = X * X + Y * Y
    inside = S2 <= (params.R * (1 + 1e-9)) ** 2
    U = np.full_like(X, -np.inf)
    mask = ~inside
    U[mask] = (
        k * k / (2 * _inertia_denom(X[mask], Y[mask], params))
        + params.rho
        * q
        * q
        / (4 * math.pi)
        * np.log(1 - params.R**2 / S2[mask])
    )

    allowed = (U <= h) & ~inside
    labels, n_regions = ndimage.label(allowed)
    region_tags = []
    # cells adjacent to the excluded disk
    disk_halo = ndimage.binary_dilation(inside) & ~inside
    for idx in range(1, n_regions + 1):
        region = labels == idx
        touches_edge = (
            region[0, :].any() or region[-1, :].any()
            or region[:, 0].any() or region[:, -1].any()
        )
        touches_disk = (region & disk_halo).any()
        if touches_edge and touches_disk:
            region_tags.append("merged")
        elif touches_edge:
            region_tags.append("A")
        elif touches_disk:
            region_tags.append("B")
        else:
            region_tags.append("A")  # enclosed pocket, counts as accessible

    # boundary polylines of {U_e = h}; clamp the -inf disk for the marcher
    U_for_contour = np.where(np.isfinite(U), U, -1e30)
    boundaries = []
    for poly in measure.find_contours(U_for_contour, h):
        px = x_lo + poly[:, 0] * (x_hi - x_lo) / (resolution - 1)
        py = y_lo + poly[:, 1] * (y_hi - y_lo) / (resolution - 1)
        r = np.hypot(px, py)
        keep = r > params.R * (1 + 5e-2)  # drop marching artifacts at the disk rim
        if keep.any():
            boundaries.append(np.column_stack([px[keep], py[keep]]))

    saddles = [p for p in report.critical_points if p.kind == "saddle"]
    barrier_ok = True
    if saddles:
        barrier_ok = all(
            x_lo < p.x < x_hi and y_lo < 0.0 < y_hi for p in saddles
        )
    return HillRegions(
        h=h,
        k=k,
        boundaries=boundaries,
        regions=region_tags,
        n_regions=int(n_regions),
        contact_circle=params.R,
        window=window,
        barrier_contained=barrier_ok,
    )
