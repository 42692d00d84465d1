"""Hot numeric kernels for the reduced co-rotating system.

The reduced dynamics at fixed angular momentum k lives on the canonical
chart (x, y, p_x, p_y); the polar variables (r, phi, p, alpha) are derived
views.  Everything here is written as plain scalar numpy code and compiled
with numba unless FOILFLOW_DISABLE_NUMBA is set, in which case the same
functions run as-is (the benchmark in benchmarks/ compares both paths).

Parameters are packed into a flat float64 array to keep the kernel
signatures numba-friendly:

    par = [m, mc_d, I_eff, c_pot, v_pot, R]

with m = m_c + rho*pi*R^2, mc_d = m_c*d, I_eff = I_c + m_c d^2 - mc_d^2/m,
c_pot = rho q^2 R^2 / (2 pi), v_pot = rho q^2 / (4 pi).
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("FOILFLOW_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)

if NUMBA_ENABLED:
    from numba import njit
else:  # pure-numpy fallback: decorators become no-ops

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# event / outcome codes shared with the scattering layer
EVENT_SECANT = 0
EVENT_CONTACT = 1
EVENT_TIMEOUT = 2
EVENT_STEPFAIL = 3

IDX_M = 0
IDX_MCD = 1
IDX_IEFF = 2
IDX_CPOT = 3
IDX_VPOT = 4
IDX_R = 5


def pack_params(m, mc_d, i_eff, c_pot, v_pot, radius):
    return np.array([m, mc_d, i_eff, c_pot, v_pot, radius], dtype=np.float64)


@njit(cache=True)
def angular_rate(x, y, px, py, k, par):
    """Co-rotating angular velocity Omega = (k - (x p_y - y p_x) - (m_c d/m) p_y) / I_eff."""
    return (k - (x * py - y * px) - par[IDX_MCD] / par[IDX_M] * py) / par[IDX_IEFF]


@njit(cache=True)
def reduced_rhs_cart(x, y, px, py, k, par):
    """Right-hand side of the reduced system in the Cartesian chart."""
    m = par[IDX_M]
    r2 = x * x + y * y
    omega = angular_rate(x, y, px, py, k, par)
    c2 = par[IDX_CPOT] / (r2 * (r2 - par[IDX_R] ** 2))
    dx = px / m + omega * y
    dy = py / m - par[IDX_MCD] / m * omega - omega * x
    dpx = -c2 * x + omega * py
    dpy = -c2 * y - omega * px
    return dx, dy, dpx, dpy


@njit(cache=True)
def reduced_energy_cart(x, y, px, py, k, par):
    """Conserved energy of the reduced system (translation + rotation + source potential)."""
    m = par[IDX_M]
    r2 = x * x + y * y
    omega = angular_rate(x, y, px, py, k, par)
    return (
        0.5 * (px * px + py * py) / m
        + 0.5 * par[IDX_IEFF] * omega * omega
        + par[IDX_VPOT] * np.log(1.0 - par[IDX_R] ** 2 / r2)
    )


@njit(cache=True)
def reduced_energy_grad_cart(x, y, px, py, k, par):
    """Analytic gradient of the reduced energy w.r.t. (x, y, p_x, p_y)."""
    m = par[IDX_M]
    r2 = x * x + y * y
    omega = angular_rate(x, y, px, py, k, par)
    c2 = par[IDX_CPOT] / (r2 * (r2 - par[IDX_R] ** 2))
    gx = -omega * py + c2 * x
    gy = omega * px + c2 * y
    gpx = px / m + omega * y
    gpy = py / m - omega * (x + par[IDX_MCD] / m)
    return gx, gy, gpx, gpy


# Dormand-Prince 5(4) tableau
_DP_C2, _DP_C3, _DP_C4, _DP_C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# 4th-order embedded weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    5179.0 / 57600.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
)


@njit(cache=True)
def dp5_step_cart(x, y, px, py, k, par, dt):
    """One Dormand-Prince 5(4) step; returns the new state and an error estimate."""
    k1 = reduced_rhs_cart(x, y, px, py, k, par)
    k2 = reduced_rhs_cart(
        x + dt * _A21 * k1[0],
        y + dt * _A21 * k1[1],
        px + dt * _A21 * k1[2],
        py + dt * _A21 * k1[3],
        k,
        par,
    )
    k3 = reduced_rhs_cart(
        x + dt * (_A31 * k1[0] + _A32 * k2[0]),
        y + dt * (_A31 * k1[1] + _A32 * k2[1]),
        px + dt * (_A31 * k1[2] + _A32 * k2[2]),
        py + dt * (_A31 * k1[3] + _A32 * k2[3]),
        k,
        par,
    )
    k4 = reduced_rhs_cart(
        x + dt * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
        y + dt * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]),
        px + dt * (_A41 * k1[2] + _A42 * k2[2] + _A43 * k3[2]),
        py + dt * (_A41 * k1[3] + _A42 * k2[3] + _A43 * k3[3]),
        k,
        par,
    )
    k5 = reduced_rhs_cart(
        x + dt * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
        y + dt * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
        px + dt * (_A51 * k1[2] + _A52 * k2[2] + _A53 * k3[2] + _A54 * k4[2]),
        py + dt * (_A51 * k1[3] + _A52 * k2[3] + _A53 * k3[3] + _A54 * k4[3]),
        k,
        par,
    )
    k6 = reduced_rhs_cart(
        x + dt * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0]),
        y + dt * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1] + _A65 * k5[1]),
        px + dt * (_A61 * k1[2] + _A62 * k2[2] + _A63 * k3[2] + _A64 * k4[2] + _A65 * k5[2]),
        py + dt * (_A61 * k1[3] + _A62 * k2[3] + _A63 * k3[3] + _A64 * k4[3] + _A65 * k5[3]),
        k,
        par,
    )
    xn = x + dt * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0] + _B5 * k5[0] + _B6 * k6[0])
    yn = y + dt * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1] + _B5 * k5[1] + _B6 * k6[1])
    pxn = px + dt * (_B1 * k1[2] + _B3 * k3[2] + _B4 * k4[2] + _B5 * k5[2] + _B6 * k6[2])
    pyn = py + dt * (_B1 * k1[3] + _B3 * k3[3] + _B4 * k4[3] + _B5 * k5[3] + _B6 * k6[3])
    k7 = reduced_rhs_cart(xn, yn, pxn, pyn, k, par)
    # difference between 5th- and 4th-order solutions
    ex = dt * (
        (_B1 - _E1) * k1[0]
        + (_B3 - _E3) * k3[0]
        + (_B4 - _E4) * k4[0]
        + (_B5 - _E5) * k5[0]
        + (_B6 - _E6) * k6[0]
        - _E7 * k7[0]
    )
    ey = dt * (
        (_B1 - _E1) * k1[1]
        + (_B3 - _E3) * k3[1]
        + (_B4 - _E4) * k4[1]
        + (_B5 - _E5) * k5[1]
        + (_B6 - _E6) * k6[1]
        - _E7 * k7[1]
    )
    epx = dt * (
        (_B1 - _E1) * k1[2]
        + (_B3 - _E3) * k3[2]
        + (_B4 - _E4) * k4[2]
        + (_B5 - _E5) * k5[2]
        + (_B6 - _E6) * k6[2]
        - _E7 * k7[2]
    )
    epy = dt * (
        (_B1 - _E1) * k1[3]
        + (_B3 - _E3) * k3[3]
        + (_B4 - _E4) * k4[3]
        + (_B5 - _E5) * k5[3]
        + (_B6 - _E6) * k6[3]
        - _E7 * k7[3]
    )
    return xn, yn, pxn, pyn, ex, ey, epx, epy


@njit(cache=True)
def project_energy_cart(x, y, px, py, k, par, h_target, newton_tol, max_iter):
    """Pull a state back onto the energy level h_target along the energy gradient.

    Minimal-norm correction, Newton iteration on the scalar defect.
    Returns the corrected state and a success flag.
    """
    for _ in range(max_iter):
        defect = reduced_energy_cart(x, y, px, py, k, par) - h_target
        if abs(defect) <= newton_tol:
            return x, y, px, py, True
        gx, gy, gpx, gpy = reduced_energy_grad_cart(x, y, px, py, k, par)
        gnorm2 = gx * gx + gy * gy + gpx * gpx + gpy * gpy
        if gnorm2 == 0.0:
            return x, y, px, py, False
        lam = -defect / gnorm2
        x += lam * gx
        y += lam * gy
        px += lam * gpx
        py += lam * gpy
    defect = reduced_energy_cart(x, y, px, py, k, par) - h_target
    return x, y, px, py, abs(defect) <= newton_tol


@njit(cache=True)
def _err_norm(ex, ey, epx, epy, x0, y0, px0, py0, x1, y1, px1, py1, rtol, atol):
    sx = atol + rtol * max(abs(x0), abs(x1))
    sy = atol + rtol * max(abs(y0), abs(y1))
    spx = atol + rtol * max(abs(px0), abs(px1))
    spy = atol + rtol * max(abs(py0), abs(py1))
    return np.sqrt(
        ((ex / sx) ** 2 + (ey / sy) ** 2 + (epx / spx) ** 2 + (epy / spy) ** 2) / 4.0
    )


@njit(cache=True)
def integrate_leg(
    state,
    k,
    par,
    h_target,
    r_secant,
    r_contact,
    t_max,
    rtol,
    atol,
    max_step,
    min_step,
    newton_tol,
    newton_max_iter,
    project,
):
    """Integrate one scattering leg until secant return, contact, or timeout.

    state is a float64[4] array (x, y, p_x, p_y) with r == r_secant at t = 0
    and inward radial motion.  The secant event fires on the first upward
    crossing of r = r_secant; its time is localized by bisection, each
    evaluation taking a single explicit step from the pre-event state.
    Returns (final_state, t_event, event_code, n_steps).
    """
    x, y, px, py = state[0], state[1], state[2], state[3]
    t = 0.0
    dt = min(1e-3, max_step)
    err_prev = 1.0
    n_steps = 0
    r2_secant = r_secant * r_secant
    r2_contact = r_contact * r_contact
    out = np.empty(4, dtype=np.float64)

    while t < t_max:
        if dt > max_step:
            dt = max_step
        if t + dt > t_max:
            dt = t_max - t
        xn, yn, pxn, pyn, ex, ey, epx, epy = dp5_step_cart(x, y, px, py, k, par, dt)
        err = _err_norm(ex, ey, epx, epy, x, y, px, py, xn, yn, pxn, pyn, rtol, atol)
        if not np.isfinite(err) or err > 1.0:
            dt *= max(0.2, 0.9 * err ** (-0.2)) if np.isfinite(err) else 0.2
            if dt < min_step:
                out[0], out[1], out[2], out[3] = x, y, px, py
                return out, t, EVENT_STEPFAIL, n_steps
            continue
        if project:
            xn, yn, pxn, pyn, ok = project_energy_cart(
                xn, yn, pxn, pyn, k, par, h_target, newton_tol, newton_max_iter
            )
            if not ok:
                dt *= 0.5
                if dt < min_step:
                    out[0], out[1], out[2], out[3] = x, y, px, py
                    return out, t, EVENT_STEPFAIL, n_steps
                continue
        n_steps += 1
        r2_old = x * x + y * y
        r2_new = xn * xn + yn * yn

        # secant return: upward crossing of r = r_secant from strictly inside
        if r2_old < r2_secant and r2_new >= r2_secant:
            lo, hi = 0.0, dt
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                xm, ym, pxm, pym, _, _, _, _ = dp5_step_cart(x, y, px, py, k, par, mid)
                if xm * xm + ym * ym >= r2_secant:
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-16 * dt + 1e-300:
                    break
            xm, ym, pxm, pym, _, _, _, _ = dp5_step_cart(x, y, px, py, k, par, hi)
            out[0], out[1], out[2], out[3] = xm, ym, pxm, pym
            return out, t + hi, EVENT_SECANT, n_steps

        # contact: downward crossing of r = r_contact
        if r2_new <= r2_contact:
            lo, hi = 0.0, dt
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                xm, ym, pxm, pym, _, _, _, _ = dp5_step_cart(x, y, px, py, k, par, mid)
                if xm * xm + ym * ym <= r2_contact:
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-16 * dt + 1e-300:
                    break
            xm, ym, pxm, pym, _, _, _, _ = dp5_step_cart(x, y, px, py, k, par, hi)
            out[0], out[1], out[2], out[3] = xm, ym, pxm, pym
            return out, t + hi, EVENT_CONTACT, n_steps

        x, y, px, py = xn, yn, pxn, pyn
        t += dt
        # PI step-size controller
        fac = 0.9 * err ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
        if fac < 0.2:
            fac = 0.2
        elif fac > 5.0:
            fac = 5.0
        dt *= fac
        err_prev = err
        if dt < min_step:
            out[0], out[1], out[2], out[3] = x, y, px, py
            return out, t, EVENT_STEPFAIL, n_steps

    out[0], out[1], out[2], out[3] = x, y, px, py
    return out, t, EVENT_TIMEOUT, n_steps


# Gauss-Legendre collocation tableaux (2- and 3-stage)
_SQ3 = np.sqrt(3.0)
_SQ15 = np.sqrt(15.0)
_GA2 = np.array(
    [[0.25, 0.25 - _SQ3 / 6.0], [0.25 + _SQ3 / 6.0, 0.25]], dtype=np.float64
)
_GB2 = np.array([0.5, 0.5], dtype=np.float64)
_GA3 = np.array(
    [
        [5.0 / 36.0, 2.0 / 9.0 - _SQ15 / 15.0, 5.0 / 36.0 - _SQ15 / 30.0],
        [5.0 / 36.0 + _SQ15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - _SQ15 / 24.0],
        [5.0 / 36.0 + _SQ15 / 30.0, 2.0 / 9.0 + _SQ15 / 15.0, 5.0 / 36.0],
    ],
    dtype=np.float64,
)
_GB3 = np.array([5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0], dtype=np.float64)


@njit(cache=True)
def gauss_step_cart(x, y, px, py, k, par, dt, stages, newton_tol, max_iter):
    """One s-stage Gauss collocation step (fixed-point solve of the stage system)."""
    if stages == 2:
        a = _GA2
        b = _GB2
    else:
        a = _GA3
        b = _GB3
    s = a.shape[0]
    kx = np.empty(s)
    ky = np.empty(s)
    kpx = np.empty(s)
    kpy = np.empty(s)
    f0 = reduced_rhs_cart(x, y, px, py, k, par)
    for i in range(s):
        kx[i], ky[i], kpx[i], kpy[i] = f0[0], f0[1], f0[2], f0[3]
    converged = False
    for _ in range(max_iter):
        delta = 0.0
        for i in range(s):
            xi, yi, pxi, pyi = x, y, px, py
            for j in range(s):
                xi += dt * a[i, j] * kx[j]
                yi += dt * a[i, j] * ky[j]
                pxi += dt * a[i, j] * kpx[j]
                pyi += dt * a[i, j] * kpy[j]
            fx, fy, fpx, fpy = reduced_rhs_cart(xi, yi, pxi, pyi, k, par)
            delta = max(
                delta,
                abs(fx - kx[i]),
                abs(fy - ky[i]),
                abs(fpx - kpx[i]),
                abs(fpy - kpy[i]),
            )
            kx[i], ky[i], kpx[i], kpy[i] = fx, fy, fpx, fpy
        if delta <= newton_tol:
            converged = True
            break
    xn, yn, pxn, pyn = x, y, px, py
    for i in range(s):
        xn += dt * b[i] * kx[i]
        yn += dt * b[i] * ky[i]
        pxn += dt * b[i] * kpx[i]
        pyn += dt * b[i] * kpy[i]
    return xn, yn, pxn, pyn, converged


@njit(cache=True)
def integrate_collocation(state, k, par, t_end, dt, stages, newton_tol, max_iter):
    """Fixed-step Gauss collocation run; halves dt once on solver failure.

    Returns (final_state, t_reached, ok).
    """
    x, y, px, py = state[0], state[1], state[2], state[3]
    t = 0.0
    h = dt
    out = np.empty(4, dtype=np.float64)
    while t < t_end - 1e-14 * t_end:
        step = min(h, t_end - t)
        xn, yn, pxn, pyn, ok = gauss_step_cart(
            x, y, px, py, k, par, step, stages, newton_tol, max_iter
        )
        if not ok:
            h *= 0.5
            if h < 1e-12:
                out[0], out[1], out[2], out[3] = x, y, px, py
                return out, t, False
            continue
        x, y, px, py = xn, yn, pxn, pyn
        t += step
    out[0], out[1], out[2], out[3] = x, y, px, py
    return out, t, True
