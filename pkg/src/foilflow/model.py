"""Core hydrodynamic model of a circular foil coupled to a point source.

Covers the flow field (complex potential, fluid velocity), the pressure
force on the foil, the Newtonian / Lagrangian / Hamiltonian descriptions
of the coupled motion, and chart conversions into the reduced co-rotating
variables.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .params import (
    CHART_BODY,
    CHART_CANONICAL,
    ConfigurationError,
    FoilParams,
    FullState,
    Integrals,
    ReducedState,
    SourceSpec,
)

TWO_PI = 2.0 * math.pi


# --- flow field ---


def complex_potential(Z, state: FullState, vel_c, params: FoilParams, q: float):
    """Complex potential of the flow: moving-cylinder dipole, source, and its
    Milne-Thomson image in the foil.

    Logs use the principal branch; only the Z-derivative is consumed
    downstream, so the branch constant is irrelevant to the dynamics.
    """
    Zc = complex(state.X_c, state.Y_c)
    Zq = complex(state.X_q, state.Y_q)
    R = params.R
    if abs(Z - Zc) <= R:
        raise ConfigurationError("field point inside the foil")
    if Z == Zq:
        raise ConfigurationError("field point coincides with the source")
    return (
        -R * R * vel_c / (Z - Zc)
        + q / TWO_PI * cmath.log(Z - Zq)
        + q / TWO_PI * cmath.log(R * R / (Z - Zc) - (Zq - Zc).conjugate())
    )


def dpotential_dz(Z, Zc, vel_c, Zq, R: float, q: float):
    """Analytic dW/dZ of the three-term potential."""
    dz = Z - Zc
    img = R * R / dz - (Zq - Zc).conjugate()
    return (
        R * R * vel_c / (dz * dz)
        + q / (TWO_PI * (Z - Zq))
        - q / TWO_PI * (R * R / (dz * dz)) / img
    )


def flow_velocity(Z, state: FullState, vel_c, params: FoilParams, q: float):
    """Physical fluid velocity conj(dW/dZ) at the field point Z."""
    Zc = complex(state.X_c, state.Y_c)
    Zq = complex(state.X_q, state.Y_q)
    if abs(Z - Zc) <= params.R:
        raise ConfigurationError("field point inside the foil")
    if Z == Zq:
        raise ConfigurationError("field point coincides with the source")
    return dpotential_dz(Z, Zc, vel_c, Zq, params.R, q).conjugate()


def source_velocity(Zc, vel_c, Zq, R: float, q: float):
    """Velocity of the source: the regular part of the flow at Z_q.

    The self-term of the source is removed; what remains is the dipole of
    the moving foil and the image of the source.
    """
    D = Zq - Zc
    if abs(D) <= R:
        raise ConfigurationError("source inside the foil")
    w = R * R * vel_c / (D * D) + q / TWO_PI * R * R / (D * (abs(D) ** 2 - R * R))
    return w.conjugate()


# --- pressure force ---


def sedov_force(state: FullState, vel_c, acc_c, vel_q, q: float, qdot: float,
                params: FoilParams):
    """Closed-form pressure force on the foil (circulation-free flow).

    Terms: source advection past the foil, intensity variation, source-image
    attraction, and the added-mass reaction to the foil's acceleration.
    """
    Zc = complex(state.X_c, state.Y_c)
    Zq = complex(state.X_q, state.Y_q)
    rho, R = params.rho, params.R
    D = Zq - Zc
    D2 = abs(D) ** 2
    if D2 <= R * R:
        raise ConfigurationError("contact singularity: source on or inside the foil")
    F = (
        rho * q * R * R * D * D / (D2 * D2) * vel_q.conjugate()
        - rho * qdot * R * R * D / D2
        + rho * q * q * R * R / TWO_PI * D / ((D2 - R * R) * D2)
        - rho * math.pi * R * R * acc_c
    )
    return F.real, F.imag


def sedov_force_quadrature(state: FullState, vel_c, acc_c, vel_q, q: float,
                           qdot: float, params: FoilParams, n_nodes: int = 2048,
                           eps: float = 1e-5):
    """Contour-integral evaluation of the pressure force (independent oracle).

    Evaluates conj((i rho/2) \\oint (dW/dZ)^2 dZ) plus the time derivative of
    rho*S*Zc' + i rho \\oint Z (dW/dZ) dZ along the contour moving with the
    foil.  The time derivative uses 4th-order central differences on paths
    consistent with the supplied velocities and accelerations.
    """
    rho, R = params.rho, params.R
    S = math.pi * R * R
    Zc0 = complex(state.X_c, state.Y_c)
    Zq0 = complex(state.X_q, state.Y_q)
    theta = np.linspace(0.0, TWO_PI, n_nodes, endpoint=False)
    ring = np.exp(1j * theta)

    def contour_integrals(tau):
        Zc = Zc0 + vel_c * tau + 0.5 * acc_c * tau * tau
        vc = vel_c + acc_c * tau
        Zq = Zq0 + vel_q * tau
        qt = q + qdot * tau
        Z = Zc + R * ring
        dZ = 1j * R * ring * (TWO_PI / n_nodes)
        w = dpotential_dz(Z, Zc, vc, Zq, R, qt)
        int_sq = np.sum(w * w * dZ)
        int_zw = np.sum(Z * w * dZ)
        return int_sq, int_zw, vc

    int_sq0, _, _ = contour_integrals(0.0)
    term1 = (0.5j * rho * int_sq0).conjugate()

    def momentum_like(tau):
        _, int_zw, vc = contour_integrals(tau)
        return rho * S * vc + 1j * rho * int_zw

    d_dt = (
        -momentum_like(2 * eps)
        + 8 * momentum_like(eps)
        - 8 * momentum_like(-eps)
        + momentum_like(-2 * eps)
    ) / (12 * eps)
    F = term1 + d_dt
    return F.real, F.imag


# --- momentum / velocity charts ---


def _solve_inertia(px, py, ptheta, theta, m_lin, g, J):
    """Solve the 3x3 inertia relation for (Xdot, Ydot, thetadot).

    The matrix is [[m_lin, 0, -g sin], [0, m_lin, g cos], [-g sin, g cos, J]];
    its determinant m_lin^2 (J - g^2/m_lin) is positive for valid parameters.
    """
    s, c = math.sin(theta), math.cos(theta)
    i_eff = J - g * g / m_lin
    v3 = (ptheta + g * (s * px - c * py) / m_lin) / i_eff
    v1 = (px + g * s * v3) / m_lin
    v2 = (py - g * c * v3) / m_lin
    return v1, v2, v3


def body_velocities(state: FullState, params: FoilParams):
    """(Xdot_c, Ydot_c, thetadot) from body momenta (inverts the momentum relations)."""
    if state.chart != CHART_BODY:
        raise ConfigurationError("body chart required")
    return _solve_inertia(
        state.px, state.py, state.ptheta, state.theta,
        params.m_c, params.m_c * params.d, params.I_c + params.m_c * params.d**2,
    )


def canonical_velocities(state: FullState, params: FoilParams, q: float):
    """(Xdot_c, Ydot_c, thetadot) from canonical momenta (fixed source at origin)."""
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    ax, ay = _vector_potential(state.X_c, state.Y_c, params, q)
    return _solve_inertia(
        state.px + ax, state.py + ay, state.ptheta, state.theta,
        params.m, params.m_c * params.d, params.I_c + params.m_c * params.d**2,
    )


def _vector_potential(X, Y, params: FoilParams, q: float):
    s2 = X * X + Y * Y
    coef = params.rho * q * params.R**2 / s2
    return coef * X, coef * Y


def body_to_canonical(state: FullState, params: FoilParams, q: float) -> FullState:
    """Convert body momenta to canonical momenta (source must sit at the origin)."""
    if state.chart != CHART_BODY:
        raise ConfigurationError("body chart required")
    if abs(state.X_q) > 0 or abs(state.Y_q) > 0:
        raise ConfigurationError("canonical chart assumes the source at the origin")
    vx, vy, _ = body_velocities(state, params)
    ax, ay = _vector_potential(state.X_c, state.Y_c, params, q)
    added = params.rho * math.pi * params.R**2
    return FullState(
        state.X_c, state.Y_c, state.theta,
        state.px + added * vx - ax,
        state.py + added * vy - ay,
        state.ptheta, 0.0, 0.0, chart=CHART_CANONICAL,
    )


def canonical_to_body(state: FullState, params: FoilParams, q: float) -> FullState:
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    vx, vy, _ = canonical_velocities(state, params, q)
    ax, ay = _vector_potential(state.X_c, state.Y_c, params, q)
    added = params.rho * math.pi * params.R**2
    return FullState(
        state.X_c, state.Y_c, state.theta,
        state.px - added * vx + ax,
        state.py - added * vy + ay,
        state.ptheta, 0.0, 0.0, chart=CHART_BODY,
    )


# --- Newtonian equations of motion (general case) ---


def full_rhs(state: FullState, t: float, params: FoilParams, source: SourceSpec):
    """Time derivative of the full Newtonian state (body chart).

    Velocities invert the momentum relations; momenta change by the pressure
    force, with the acceleration-dependent added-mass part moved to the
    left-hand side and solved for consistently.  The source moves with the
    regular part of the flow unless pinned.
    """
    state.validate(params)
    q = source.intensity(t)
    qdot = source.intensity_rate(t)
    m_c, d, R, rho = params.m_c, params.d, params.R, params.rho
    g = m_c * d
    J = params.I_c + m_c * d * d
    added = rho * math.pi * R * R

    v1, v2, v3 = body_velocities(state, params)
    Zc = complex(state.X_c, state.Y_c)
    Zq = complex(state.X_q, state.Y_q)
    vel_c = complex(v1, v2)

    if source.mobile:
        vel_q = source_velocity(Zc, vel_c, Zq, R, q)
    else:
        vel_q = 0j

    # pressure force minus its added-mass part
    D = Zq - Zc
    D2 = abs(D) ** 2
    G = (
        rho * q * R * R * D * D / (D2 * D2) * vel_q.conjugate()
        - rho * qdot * R * R * D / D2
        + rho * q * q * R * R / TWO_PI * D / ((D2 - R * R) * D2)
    )

    s, c = math.sin(state.theta), math.cos(state.theta)
    torque = -d * (state.px * c + state.py * s) * v3

    # accelerations: (M + added-mass) a = (G, torque) - dM/dt * v
    mdot_v1 = -g * c * v3 * v3
    mdot_v2 = -g * s * v3 * v3
    mdot_v3 = -g * v3 * (c * v1 + s * v2)
    a1, a2, a3 = _solve_inertia(
        G.real - mdot_v1, G.imag - mdot_v2, torque - mdot_v3,
        state.theta, params.m, g, J,
    )
    del a3  # angular acceleration not needed: ptheta evolves by the torque

    dpx = G.real - added * a1
    dpy = G.imag - added * a2
    return np.array(
        [v1, v2, v3, dpx, dpy, torque, vel_q.real, vel_q.imag], dtype=np.float64
    )


# --- Hamiltonian description (fixed source at the origin, constant q) ---


def hamiltonian(state: FullState, params: FoilParams, q: float) -> float:
    """Energy of the foil for a fixed source of constant intensity."""
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    s2 = state.X_c**2 + state.Y_c**2
    if s2 <= params.R**2:
        raise ConfigurationError("foil center within one radius of the source")
    vx, vy, v3 = canonical_velocities(state, params, q)
    ax, ay = _vector_potential(state.X_c, state.Y_c, params, q)
    p1, p2, p3 = state.px + ax, state.py + ay, state.ptheta
    kinetic = 0.5 * (p1 * vx + p2 * vy + p3 * v3)
    pot = -params.rho * q * q / (4 * math.pi) * (
        math.log(s2) - math.log(s2 - params.R**2)
    )
    return kinetic + pot


def hamiltonian_grad(state: FullState, params: FoilParams, q: float):
    """Analytic gradient of H w.r.t. (X_c, Y_c, theta, Pi_x, Pi_y, Pi_theta)."""
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    X, Y = state.X_c, state.Y_c
    s2 = X * X + Y * Y
    rho, R = params.rho, params.R
    g = params.m_c * params.d
    vx, vy, v3 = canonical_velocities(state, params, q)

    coef = rho * q * R * R
    dax_dx = coef * (Y * Y - X * X) / s2**2
    dax_dy = -2 * coef * X * Y / s2**2
    day_dx = dax_dy
    day_dy = -dax_dx
    dv_dx = rho * q * q / TWO_PI * X * R * R / (s2 * (s2 - R * R))
    dv_dy = rho * q * q / TWO_PI * Y * R * R / (s2 * (s2 - R * R))

    s, c = math.sin(state.theta), math.cos(state.theta)
    # dH/dtheta = -(1/2) v^T (dQ/dtheta) v with the off-diagonal sin/cos block
    dh_dtheta = g * v3 * (c * vx + s * vy)

    return np.array(
        [
            vx * dax_dx + vy * day_dx + dv_dx,
            vx * dax_dy + vy * day_dy + dv_dy,
            dh_dtheta,
            vx,
            vy,
            v3,
        ],
        dtype=np.float64,
    )


def hamiltonian_rhs(state: FullState, params: FoilParams, q: float):
    """Canonical equations for the fixed-source constant-intensity case."""
    grad = hamiltonian_grad(state, params, q)
    return np.array(
        [grad[3], grad[4], grad[5], -grad[0], -grad[1], -grad[2], 0.0, 0.0],
        dtype=np.float64,
    )


def angular_momentum(state: FullState) -> float:
    """Angular momentum about the source, K = Pi_theta + Pi_y X_c - Pi_x Y_c."""
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    return state.ptheta + state.py * state.X_c - state.px * state.Y_c


def angular_momentum_grad(state: FullState):
    return np.array(
        [state.py, -state.px, 0.0, -state.Y_c, state.X_c, 1.0], dtype=np.float64
    )


def integrals_of(state: FullState, params: FoilParams, q: float) -> Integrals:
    """Energy and angular momentum; for d = 0 also the spin/orbital split."""
    h = hamiltonian(state, params, q)
    k = angular_momentum(state)
    if params.d == 0:
        c = state.ptheta
        return Integrals(h=h, k=k, c=c, f=k - c)
    return Integrals(h=h, k=k)


# --- reduced co-rotating chart ---


def to_reduced(state: FullState, params: FoilParams, q: float) -> ReducedState:
    """Project a canonical state onto the reduced chart (r, phi, p, alpha, k).

    Positions and the gauge-shifted momenta Pi + A are rotated into the
    frame co-rotating with the foil; k is the angular momentum about the
    source.  p = 0 is flagged degenerate with alpha = 0 by convention.
    """
    if state.chart != CHART_CANONICAL:
        raise ConfigurationError("canonical chart required")
    s, c = math.sin(state.theta), math.cos(state.theta)
    x = state.X_c * c + state.Y_c * s
    y = -state.X_c * s + state.Y_c * c
    ax, ay = _vector_potential(state.X_c, state.Y_c, params, q)
    tx, ty = state.px + ax, state.py + ay
    px = tx * c + ty * s
    py = -tx * s + ty * c
    k = angular_momentum(state)
    return ReducedState.from_cart((x, y, px, py), k)


def from_reduced(rs: ReducedState, theta: float, params: FoilParams,
                 q: float) -> FullState:
    """Rebuild the canonical state from the reduced chart and an orientation."""
    cart = rs.cart()
    x, y, px, py = cart
    s, c = math.sin(theta), math.cos(theta)
    X = x * c - y * s
    Y = x * s + y * c
    tx = px * c - py * s
    ty = px * s + py * c
    ax, ay = _vector_potential(X, Y, params, q)
    ptheta = rs.k - (x * py - y * px)
    return FullState(X, Y, theta, tx - ax, ty - ay, ptheta, 0.0, 0.0,
                     chart=CHART_CANONICAL)


# --- Lagrangian form (moving source of constant intensity): consistency oracle ---


def lagrangian_vector_potential(coords, source_pos, params: FoilParams, q: float):
    """Vector potential A coupling the foil velocity to the source."""
    X, Y = coords[0], coords[1]
    Xq, Yq = source_pos
    s2 = (Xq - X) ** 2 + (Yq - Y) ** 2
    coef = -params.rho * q * params.R**2 / s2
    return coef * (Xq - X), coef * (Yq - Y)


def lagrangian(coords, vels, source_pos, params: FoilParams, q: float) -> float:
    """Lagrangian of the foil in the field of a source of constant intensity."""
    X, Y, theta = coords
    vx, vy, vth = vels
    Xq, Yq = source_pos
    m_c, d, R, rho = params.m_c, params.d, params.R, params.rho
    s2 = (X - Xq) ** 2 + (Y - Yq) ** 2
    T = (
        0.5 * params.m * (vx * vx + vy * vy)
        + m_c * d * (-math.sin(theta) * vx + math.cos(theta) * vy) * vth
        + 0.5 * (params.I_c + m_c * d * d) * vth * vth
    )
    U = -rho * q * q / (4 * math.pi) * (math.log(s2) - math.log(s2 - R * R))
    ax, ay = lagrangian_vector_potential(coords, source_pos, params, q)
    return T - U - (ax * vx + ay * vy)


def _dl_dvel(coords, vels, source_pos, params: FoilParams, q: float):
    """Analytic velocity-gradient of the Lagrangian (the conjugate momenta)."""
    X, Y, theta = coords
    vx, vy, vth = vels
    m_c, d = params.m_c, params.d
    ax, ay = lagrangian_vector_potential(coords, source_pos, params, q)
    s, c = math.sin(theta), math.cos(theta)
    return np.array(
        [
            params.m * vx - m_c * d * vth * s - ax,
            params.m * vy + m_c * d * vth * c - ay,
            m_c * d * (-s * vx + c * vy) + (params.I_c + m_c * d * d) * vth,
        ]
    )


def _dl_dcoord(coords, vels, source_pos, params: FoilParams, q: float,
               rel_step: float = 1e-6):
    grad = np.empty(3)
    for i in range(3):
        h = rel_step * max(1.0, abs(coords[i]))
        cp = list(coords)
        cm = list(coords)
        cp[i] += h
        cm[i] -= h
        grad[i] = (
            lagrangian(cp, vels, source_pos, params, q)
            - lagrangian(cm, vels, source_pos, params, q)
        ) / (2 * h)
    return grad


def lagrangian_forms_check(times, states, params: FoilParams, q: float):
    """Euler-Lagrange and source-velocity residuals along a sampled trajectory.

    times must be uniformly spaced; states are body-chart samples.  Returns
    the max residual of each Euler-Lagrange equation, the max mismatch of
    the source velocity identity dZq/dt = -(1/rho q) dL/dRq, and a skipped
    flag when q = 0 makes that identity undefined.  Oracle only, not used
    in production stepping.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    if n < 5:
        raise ValueError("need at least five samples for the time differences")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9):
        raise ValueError("uniform time sampling required")

    momenta = np.empty((n, 3))
    coord_grad = np.empty((n, 3))
    src_residual = 0.0
    for i, st in enumerate(states):
        vels = body_velocities(st, params)
        coords = (st.X_c, st.Y_c, st.theta)
        src = (st.X_q, st.Y_q)
        momenta[i] = _dl_dvel(coords, vels, src, params, q)
        coord_grad[i] = _dl_dcoord(coords, vels, src, params, q)
        if q != 0.0:
            # velocity of the source from the flow vs from the Lagrangian
            vel_flow = source_velocity(
                complex(st.X_c, st.Y_c), complex(vels[0], vels[1]),
                complex(st.X_q, st.Y_q), params.R, q,
            )
            grad_q = np.empty(2)
            for j in range(2):
                h = 1e-6 * max(1.0, abs(src[j]))
                sp = list(src)
                sm = list(src)
                sp[j] += h
                sm[j] -= h
                grad_q[j] = (
                    lagrangian(coords, vels, sp, params, q)
                    - lagrangian(coords, vels, sm, params, q)
                ) / (2 * h)
            vel_lagr = -grad_q / (params.rho * q)
            src_residual = max(
                src_residual,
                abs(vel_lagr[0] - vel_flow.real),
                abs(vel_lagr[1] - vel_flow.imag),
            )

    # 4th-order centered time derivative of the conjugate momenta
    residuals = np.zeros(3)
    for i in range(2, n - 2):
        dmom = (
            -momenta[i + 2] + 8 * momenta[i + 1] - 8 * momenta[i - 1] + momenta[i - 2]
        ) / (12 * dt)
        residuals = np.maximum(residuals, np.abs(dmom - coord_grad[i]))

    return {
        "euler_lagrange": residuals,
        "source_identity": src_residual if q != 0.0 else None,
        "source_identity_skipped": q == 0.0,
    }
