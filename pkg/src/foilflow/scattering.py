"""Scattering map on the secant r = r_max.

One iterate is the composition B∘F: the direct map F integrates the reduced
flow from the secant until it returns to it (or hits the foil, or times
out), and the feedback map B reinjects the final angles as a fresh inward
launch.  Portraits live on the (alpha, b) plane with b the impact
parameter measured at the secant.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .params import ConfigurationError, EnergyLevelError, FoilParams, ReducedState
from .reduced import impact_parameter, momentum_on_energy_level

OUTCOME_RETURNED = "returned"
OUTCOME_CONTACT = "contact"
OUTCOME_TIMEOUT = "timeout"

_EVENT_OUTCOME = {
    kernels.EVENT_SECANT: OUTCOME_RETURNED,
    kernels.EVENT_CONTACT: OUTCOME_CONTACT,
    kernels.EVENT_TIMEOUT: OUTCOME_TIMEOUT,
    kernels.EVENT_STEPFAIL: OUTCOME_TIMEOUT,
}

TWO_PI = 2.0 * math.pi


def _wrap(angle: float) -> float:
    return angle % TWO_PI


@dataclass(frozen=True)
class ScatterConfig:
    """Levels and budgets of one scattering experiment."""

    r_max: float
    h: float
    k: float
    branch: str = "largest"
    max_flight_time: float = 1e5
    params: FoilParams = field(default_factory=FoilParams)
    q: float = 1.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    project: bool = True
    newton_tol: float = 1e-12

    def __post_init__(self):
        if self.r_max <= self.params.R:
            raise ConfigurationError("secant radius must exceed the foil radius")
        if self.branch not in ("largest", "smallest"):
            raise ConfigurationError("branch must be 'largest' or 'smallest'")
        if not self._level_reachable():
            raise ConfigurationError(
                "energy level admits no momentum root anywhere on the secant"
            )

    def _level_reachable(self) -> bool:
        for alpha in np.linspace(0.0, TWO_PI, 12, endpoint=False):
            for phi in np.linspace(0.0, TWO_PI, 12, endpoint=False):
                try:
                    momentum_on_energy_level(
                        self.r_max, phi, alpha, self.h, self.k, self.branch,
                        self.params, self.q,
                    )
                    return True
                except EnergyLevelError:
                    continue
        return False


@dataclass
class ScatterPoint:
    """One secant sample of an orbit."""

    index: int
    alpha: float
    phi: float
    b: float
    p: float
    outcome: str
    branch: str
    degenerate: bool = False


def _launch_state(phi: float, alpha: float, p: float) -> np.ndarray:
    return np.array(
        [0.0, 0.0, p * math.cos(alpha), p * math.sin(alpha)], dtype=np.float64
    )


def _realized_branch(rs: ReducedState, cfg: ScatterConfig) -> str:
    """Which quadratic root the integrated end momentum corresponds to."""
    try:
        p_large = momentum_on_energy_level(
            rs.r, rs.phi, rs.alpha, cfg.h, cfg.k, "largest", cfg.params, cfg.q
        )
        p_small = momentum_on_energy_level(
            rs.r, rs.phi, rs.alpha, cfg.h, cfg.k, "smallest", cfg.params, cfg.q
        )
    except EnergyLevelError:
        return cfg.branch
    return "largest" if abs(rs.p - p_large) <= abs(rs.p - p_small) else "smallest"


def direct_map(phi_k: float, alpha_k: float, cfg: ScatterConfig):
    """Direct map F: integrate from the secant until the next secant return.

    Returns (phi_e, alpha_e, p_e, outcome, degenerate).  An unreachable
    energy level at the start raises EnergyLevelError (the caller records a
    hole); contact and timeout are outcomes, not exceptions.
    """
    p0 = momentum_on_energy_level(
        cfg.r_max, phi_k, alpha_k, cfg.h, cfg.k, cfg.branch, cfg.params, cfg.q
    )
    par = cfg.params.kernel_params(cfg.q)
    x0 = cfg.r_max * math.cos(phi_k)
    y0 = cfg.r_max * math.sin(phi_k)
    state = np.array(
        [x0, y0, p0 * math.cos(alpha_k), p0 * math.sin(alpha_k)], dtype=np.float64
    )
    dx, dy, _, _ = kernels.reduced_rhs_cart(
        state[0], state[1], state[2], state[3], cfg.k, par
    )
    r_dot = (state[0] * dx + state[1] * dy) / cfg.r_max
    if r_dot >= 0.0:
        # tangential or outward launch: zero-flight return, flagged degenerate
        return phi_k, alpha_k, p0, OUTCOME_RETURNED, True

    # start a hair inside so the upward-crossing detector is armed
    eps = 1e-12 * cfg.r_max
    state[0] -= eps * math.cos(phi_k)
    state[1] -= eps * math.sin(phi_k)
    out, _t, code, _n = kernels.integrate_leg(
        state,
        cfg.k,
        par,
        cfg.h,
        cfg.r_max,
        # slightly inflated contact radius: the potential diverges at r = R,
        # so adaptive steps underflow before an exact crossing can be hit
        cfg.params.R * (1.0 + 1e-5),
        cfg.max_flight_time,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_step,
        1e-13,
        cfg.newton_tol,
        50,
        cfg.project,
    )
    rs = ReducedState.from_cart(out, cfg.k)
    return rs.phi, rs.alpha, rs.p, _EVENT_OUTCOME[code], False


def feedback_map(alpha_e: float, phi_e: float):
    """Feedback map B: alpha_next = alpha_e, phi_next = 2 alpha_e - phi_e + pi."""
    return _wrap(alpha_e), _wrap(2.0 * alpha_e - phi_e + math.pi)


def scatter_orbit(phi_0: float, alpha_0: float, n_iter: int,
                  cfg: ScatterConfig) -> list[ScatterPoint]:
    """Iterate B∘F, recording each secant sample; stops on a non-return."""
    p0 = momentum_on_energy_level(
        cfg.r_max, phi_0, alpha_0, cfg.h, cfg.k, cfg.branch, cfg.params, cfg.q
    )
    rs0 = ReducedState(r=cfg.r_max, phi=phi_0, p=p0, alpha=alpha_0, k=cfg.k)
    points = [
        ScatterPoint(
            index=0,
            alpha=_wrap(alpha_0),
            phi=_wrap(phi_0),
            b=impact_parameter(rs0, cfg.params),
            p=p0,
            outcome=OUTCOME_RETURNED,
            branch=cfg.branch,
        )
    ]
    phi, alpha = phi_0, alpha_0
    for i in range(1, n_iter + 1):
        phi_e, alpha_e, p_e, outcome, degenerate = direct_map(phi, alpha, cfg)
        rs = ReducedState(r=cfg.r_max, phi=phi_e, p=p_e, alpha=alpha_e, k=cfg.k)
        points.append(
            ScatterPoint(
                index=i,
                alpha=_wrap(alpha_e),
                phi=_wrap(phi_e),
                b=impact_parameter(rs, cfg.params),
                p=p_e,
                outcome=outcome,
                branch=_realized_branch(rs, cfg) if outcome == OUTCOME_RETURNED
                else cfg.branch,
                degenerate=degenerate,
            )
        )
        if outcome != OUTCOME_RETURNED or degenerate:
            break
        alpha, phi = feedback_map(alpha_e, phi_e)
    return points


def incoming_angle(alpha: float, b: float, cfg: ScatterConfig) -> float:
    """Secant angle phi of an inward launch with direction alpha and offset b.

    Inverts b = r sin(alpha - phi) + (m_c d / m) sin(alpha) on the inward
    branch.  Raises EnergyLevelError when |b| exceeds the secant reach.
    """
    arg = (b - cfg.params.m_c * cfg.params.d / cfg.params.m * math.sin(alpha)) / (
        cfg.r_max
    )
    if abs(arg) > 1.0:
        raise EnergyLevelError("impact parameter outside the secant reach")
    # alpha - phi = pi - asin(arg) selects the inward-moving branch
    return _wrap(alpha - math.pi + math.asin(arg))


def level_is_safe(cfg: ScatterConfig) -> bool:
    """True when trajectories are barred from the source: |k| above the
    leading-coefficient threshold and 0 < h below the saddle barrier."""
    from .unbalanced import critical_points, k_critical

    if abs(cfg.k) <= k_critical(cfg.params, cfg.q):
        return False
    report = critical_points(cfg.k, cfg.params, cfg.q)
    saddles = [p for p in report.critical_points if p.kind == "saddle"]
    if not saddles:
        return False
    barrier = min(p.value for p in saddles)
    return 0.0 < cfg.h < barrier


def scatter_portrait(alpha_grid, b_grid, n_iter: int, cfg: ScatterConfig,
                     allow_unsafe_level: bool = False, n_workers: int | None = None):
    """Point cloud in (alpha, b) from a grid of inward launches.

    Orbits are independent and distributed over a thread pool; results are
    merged in grid order so the output is deterministic.  Returns a dict
    with the point rows, the holes (starts with no admissible launch), and
    the run metadata.
    """
    alpha_grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    b_grid = np.atleast_1d(np.asarray(b_grid, dtype=float))
    if alpha_grid.size == 0 or b_grid.size == 0:
        raise ConfigurationError("portrait grid must be nonempty")
    if not allow_unsafe_level and not level_is_safe(cfg):
        raise ConfigurationError(
            "level set allows contact with the source; pass allow_unsafe_level=True "
            "to proceed (contact outcomes are then expected)"
        )

    starts = [
        (i * b_grid.size + j, float(a), float(b))
        for i, a in enumerate(alpha_grid)
        for j, b in enumerate(b_grid)
    ]

    def run(start):
        orbit_id, alpha0, b0 = start
        try:
            phi0 = incoming_angle(alpha0, b0, cfg)
            points = scatter_orbit(phi0, alpha0, n_iter, cfg)
        except EnergyLevelError:
            return orbit_id, None
        if any(p.degenerate for p in points):
            return orbit_id, None  # tangential launch, excluded
        return orbit_id, points

    if n_workers is None:
        n_workers = int(os.environ.get("FSD_THREADS", "0")) or (os.cpu_count() or 1)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    results.sort(key=lambda r: r[0])

    rows = []
    holes = []
    for orbit_id, points in results:
        if points is None:
            holes.append(orbit_id)
            continue
        for p in points:
            rows.append(
                (
                    orbit_id,
                    p.index,
                    p.alpha,
                    p.b,
                    p.phi,
                    p.p,
                    1.0 if p.branch == "largest" else 0.0,
                    {OUTCOME_RETURNED: 0.0, OUTCOME_CONTACT: 1.0,
                     OUTCOME_TIMEOUT: 2.0}[p.outcome],
                )
            )
    return {
        "points": np.array(rows, dtype=np.float64).reshape(-1, 8),
        "columns": ("orbit", "iterate", "alpha", "b", "phi", "p", "branch",
                    "outcome"),
        "holes": holes,
        "r_max": cfg.r_max,
        "branch": cfg.branch,
        "h": cfg.h,
        "k": cfg.k,
    }
