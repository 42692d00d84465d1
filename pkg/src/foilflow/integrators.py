"""Conservative ODE stepping with event detection.

Two method families: an explicit embedded Runge-Kutta pair with per-step
orthogonal projection back onto invariant level sets, and fully implicit
Gauss collocation (symplectic).  Both operate on plain numpy state vectors
and arbitrary rhs callables; the specialized scattering kernels mirror the
same algorithms in compiled form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class IntegrationError(RuntimeError):
    """Step-size underflow or a diverged implicit solve."""


@dataclass
class Invariant:
    """A conserved quantity with an (optionally finite-difference) gradient."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None

    def gradient(self, y: np.ndarray) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(y), dtype=float)
        g = np.empty_like(y)
        for i in range(len(y)):
            h = 1e-7 * max(1.0, abs(y[i]))
            yp = y.copy()
            ym = y.copy()
            yp[i] += h
            ym[i] -= h
            g[i] = (self.value(yp) - self.value(ym)) / (2 * h)
        return g


@dataclass
class IntegratorConfig:
    method: str = "projection"  # "projection" | "gauss_collocation"
    order: int = 5  # base explicit order (informational; the pair is 5(4))
    stages: int = 3  # Gauss stages, 2 or 3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    min_step: float = 1e-13
    dt: float = 1e-2  # fixed collocation step
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    projection_targets: tuple[str, ...] = ("H",)

    def __post_init__(self):
        if self.method == "explicit_rk_projection":  # accepted alias
            self.method = "projection"
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.min_step >= self.max_step:
            raise ValueError("min_step must be below max_step")
        if self.method == "gauss_collocation" and self.stages not in (2, 3):
            raise ValueError("Gauss collocation supports 2 or 3 stages")


@dataclass(frozen=True)
class EventSpec:
    """Terminal event on the radial distance (or on elapsed time).

    kinds: "secant_crossing" (r crosses value), "contact" (r falls to value),
    "escape" (r exceeds value), "max_time".
    """

    kind: str
    value: float
    direction: str = "any"  # "increasing" | "decreasing" | "any"
    refinement_tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in ("secant_crossing", "contact", "escape", "max_time"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.refinement_tol <= 0:
            raise ValueError("refinement_tol must be positive")


@dataclass
class IntegrationResult:
    state: np.ndarray
    time: float
    event: EventSpec | None
    trace_t: np.ndarray | None = None
    trace_y: np.ndarray | None = None
    near_contact: bool = False


# Dormand-Prince 5(4) tableau in array form
_DP_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    ]
)
_DP_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_DP_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_DP_B4 = np.array(
    [5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_G_A = {
    2: np.array([[1 / 4, 1 / 4 - math.sqrt(3) / 6], [1 / 4 + math.sqrt(3) / 6, 1 / 4]]),
    3: np.array(
        [
            [5 / 36, 2 / 9 - math.sqrt(15) / 15, 5 / 36 - math.sqrt(15) / 30],
            [5 / 36 + math.sqrt(15) / 24, 2 / 9, 5 / 36 - math.sqrt(15) / 24],
            [5 / 36 + math.sqrt(15) / 30, 2 / 9 + math.sqrt(15) / 15, 5 / 36],
        ]
    ),
}
_G_B = {2: np.array([0.5, 0.5]), 3: np.array([5 / 18, 4 / 9, 5 / 18])}
_G_C = {
    2: np.array([0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6]),
    3: np.array([0.5 - math.sqrt(15) / 10, 0.5, 0.5 + math.sqrt(15) / 10]),
}


def dp5_step(rhs, t: float, y: np.ndarray, dt: float):
    """One explicit 5(4) step; returns (y5, error_estimate)."""
    k = np.empty((7, len(y)))
    k[0] = rhs(t, y)
    for i in range(1, 6):
        k[i] = rhs(t + _DP_C[i] * dt, y + dt * (_DP_A[i, :i] @ k[:i]))
    y5 = y + dt * (_DP_B5[:6] @ k[:6])
    k[6] = rhs(t + dt, y5)
    err = dt * ((_DP_B5 - _DP_B4) @ k)
    return y5, err


def project_onto_invariants(y: np.ndarray, invariants: Sequence[Invariant],
                            targets: Sequence[float], newton_tol: float,
                            max_iter: int) -> np.ndarray:
    """Minimal-norm Newton correction onto the invariant level sets."""
    y = y.copy()
    for _ in range(max_iter):
        defect = np.array([inv.value(y) - tv for inv, tv in zip(invariants, targets)])
        if np.max(np.abs(defect)) <= newton_tol:
            return y
        jac = np.array([inv.gradient(y) for inv in invariants])
        gram = jac @ jac.T
        lam = np.linalg.solve(gram, -defect)
        y = y + jac.T @ lam
    defect = np.array([inv.value(y) - tv for inv, tv in zip(invariants, targets)])
    if np.max(np.abs(defect)) > newton_tol:
        raise IntegrationError("invariant projection did not converge")
    return y


def step_projection(rhs, t: float, y: np.ndarray, dt: float,
                    invariants: Sequence[Invariant], targets: Sequence[float],
                    config: IntegratorConfig):
    """One projected explicit step at fixed dt (no error control).

    Newton divergence propagates as IntegrationError; the adaptive driver
    downstream halves dt on that.
    """
    y5, err = dp5_step(rhs, t, y, dt)
    y5 = project_onto_invariants(
        y5, invariants, targets, config.newton_tol, config.newton_max_iter
    )
    return y5, err


def step_collocation(rhs, t: float, y: np.ndarray, dt: float,
                     config: IntegratorConfig) -> np.ndarray:
    """One s-stage Gauss collocation step (implicit; fixed-point stage solve)."""
    a = _G_A[config.stages]
    b = _G_B[config.stages]
    c = _G_C[config.stages]
    s = config.stages
    n = len(y)
    k = np.tile(np.asarray(rhs(t, y), dtype=float), (s, 1))
    for _ in range(config.newton_max_iter):
        k_new = np.empty_like(k)
        for i in range(s):
            yi = y + dt * (a[i] @ k)
            k_new[i] = rhs(t + c[i] * dt, yi)
        delta = np.max(np.abs(k_new - k))
        k = k_new
        if delta <= config.newton_tol:
            return y + dt * (b @ k)
    raise IntegrationError("collocation stage iteration did not converge")


def _radius(y: np.ndarray) -> float:
    return math.hypot(y[0], y[1])


def _event_fn(ev: EventSpec, y: np.ndarray, t: float) -> float:
    if ev.kind == "max_time":
        return t - ev.value
    return _radius(y) - ev.value


def _fires(ev: EventSpec, g_old: float, g_new: float) -> bool:
    if ev.kind == "max_time":
        return g_new >= 0
    if ev.direction == "increasing":
        return g_old < 0 <= g_new
    if ev.direction == "decreasing":
        return g_old > 0 >= g_new
    return (g_old < 0 <= g_new) or (g_old > 0 >= g_new)


def integrate_until_event(rhs, y0: np.ndarray, events: Sequence[EventSpec],
                          config: IntegratorConfig,
                          invariants: Sequence[Invariant] = (),
                          targets: Sequence[float] | None = None,
                          t0: float = 0.0,
                          trace_dt: float | None = None) -> IntegrationResult:
    """Advance until the first event fires; localize its time by bisection.

    Each bisection probe takes a single step of the active method from the
    pre-event state, so event localization inherits the integration accuracy.
    A state already inside a terminal region returns immediately.
    """
    y = np.asarray(y0, dtype=float).copy()
    t = t0
    if targets is None:
        targets = [inv.value(y) for inv in invariants]
    use_projection = config.method == "projection"

    # immediate-termination check (contact / escape regions)
    for ev in events:
        g = _event_fn(ev, y, t)
        if ev.kind == "contact" and g <= 0:
            return IntegrationResult(y, t, ev)
        if ev.kind == "escape" and g >= 0:
            return IntegrationResult(y, t, ev)

    max_time = None
    for ev in events:
        if ev.kind == "max_time":
            max_time = ev

    trace_t: list[float] = []
    trace_y: list[np.ndarray] = []
    if trace_dt is not None:
        trace_t.append(t)
        trace_y.append(y.copy())
        next_sample = t + trace_dt

    def single_step(t_from, y_from, dt):
        if use_projection:
            ynew, _ = dp5_step(rhs, t_from, y_from, dt)
            if invariants:
                ynew = project_onto_invariants(
                    ynew, invariants, targets, config.newton_tol,
                    config.newton_max_iter,
                )
            return ynew
        return step_collocation(rhs, t_from, y_from, dt, config)

    dt = min(config.dt, config.max_step) if not use_projection else min(
        1e-3, config.max_step
    )
    err_prev = 1.0
    g_old = [_event_fn(ev, y, t) for ev in events]

    while True:
        if max_time is not None and t + dt > max_time.value:
            dt = max_time.value - t
            if dt <= 0:
                return IntegrationResult(y, t, max_time, *_pack(trace_t, trace_y))
        step_dt = min(dt, config.max_step)
        try:
            if use_projection:
                ynew, err = dp5_step(rhs, t, y, step_dt)
                scale = config.abs_tol + config.rel_tol * np.maximum(
                    np.abs(y), np.abs(ynew)
                )
                enorm = math.sqrt(float(np.mean((err / scale) ** 2)))
                if not math.isfinite(enorm) or enorm > 1.0:
                    dt = step_dt * max(0.2, 0.9 * enorm**-0.2) if math.isfinite(
                        enorm
                    ) else step_dt * 0.2
                    if dt < config.min_step:
                        raise IntegrationError("step size underflow")
                    continue
                if invariants:
                    ynew = project_onto_invariants(
                        ynew, invariants, targets, config.newton_tol,
                        config.newton_max_iter,
                    )
            else:
                ynew = step_collocation(rhs, t, y, step_dt, config)
                enorm = None
        except IntegrationError:
            dt = step_dt * 0.5
            if dt < config.min_step:
                # stiffness blowup close to contact: report as near contact
                contact = next((e for e in events if e.kind == "contact"), None)
                if contact is not None:
                    return IntegrationResult(
                        y, t, contact, *_pack(trace_t, trace_y), near_contact=True
                    )
                raise
            continue

        t_new = t + step_dt
        fired = None
        for ev, g0 in zip(events, g_old):
            if ev.kind == "max_time":
                continue
            g1 = _event_fn(ev, ynew, t_new)
            if _fires(ev, g0, g1):
                fired = ev
                break
        if fired is not None:
            lo, hi = 0.0, step_dt
            y_hi = ynew
            for _ in range(200):
                if hi - lo <= fired.refinement_tol:
                    break
                mid = 0.5 * (lo + hi)
                y_mid = single_step(t, y, mid)
                if _fires(fired, _event_fn(fired, y, t), _event_fn(fired, y_mid, t + mid)):
                    hi, y_hi = mid, y_mid
                else:
                    lo = mid
            return IntegrationResult(y_hi, t + hi, fired, *_pack(trace_t, trace_y))

        y, t = ynew, t_new
        g_old = [_event_fn(ev, y, t) for ev in events]
        if trace_dt is not None:
            while t >= next_sample - 1e-15:
                trace_t.append(t)
                trace_y.append(y.copy())
                next_sample += trace_dt
        if max_time is not None and t >= max_time.value - 1e-15:
            return IntegrationResult(y, t, max_time, *_pack(trace_t, trace_y))

        if use_projection and enorm is not None:
            fac = 0.9 * (enorm + 1e-300) ** (-0.7 / 5.0) * (err_prev + 1e-300) ** (
                0.4 / 5.0
            )
            dt = step_dt * min(5.0, max(0.2, fac))
            err_prev = enorm
        # collocation keeps its fixed dt


def _pack(trace_t, trace_y):
    if not trace_t:
        return None, None
    return np.asarray(trace_t), np.asarray(trace_y)
