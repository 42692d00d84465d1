"""Acceptance suite.

One test per acceptance criterion; each prints a single pass/fail line of
the form ``[acceptance] <criterion>: PASS|FAIL (<detail>)`` before asserting,
so the verdicts survive in captured output either way.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from foilflow import balanced, model, scattering, unbalanced
from foilflow.integrators import (
    EventSpec,
    IntegratorConfig,
    Invariant,
    integrate_until_event,
)
from foilflow.params import (
    CHART_BODY,
    CHART_CANONICAL,
    FoilParams,
    FullState,
    SourceSpec,
)
from foilflow.scattering import ScatterConfig, incoming_angle, scatter_orbit

COLLAGE = FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.1, rho=1.0)
SCATTER = FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.01, rho=1.0)
BALANCED = FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.0, rho=1.0)
Q = 1.0


def verdict(name: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: {tag}{suffix}", flush=True)
    assert ok, f"{name}: {detail}"


def rel_err(value, target):
    return abs(value - target) / abs(target)


class TestAcceptance:
    def test_01_critical_value(self):
        k_cr = unbalanced.k_critical(COLLAGE, Q)
        ok = round(k_cr, 5) == 0.81188
        verdict("critical value k_cr = 0.81188 (5 sig figs)", ok,
                f"k_cr = {k_cr:.7f}")

    def test_02_inflection_threshold(self):
        k_inf, x_inf = unbalanced.k_inflection(COLLAGE, Q)
        ok = abs(k_inf - 0.81153) <= 5e-5 and rel_err(x_inf, -41.0591) <= 1e-3
        verdict("inflection threshold (k_inf, x_inf)", ok,
                f"k_inf = {k_inf:.6f}, x_inf = {x_inf:.4f}")

    def test_03_critical_points_case3(self):
        rep = unbalanced.critical_points(0.81156, COLLAGE, Q)
        x_s = next(p.x for p in rep.critical_points if p.kind == "saddle")
        x_m = next(p.x for p in rep.critical_points if p.kind == "maximum")
        ok = rel_err(x_s, -59.09713) <= 1e-2 and rel_err(x_m, -31.45989) <= 1e-2
        verdict("critical points, case 3 (k = 0.81156)", ok,
                f"x_s = {x_s:.4f}, x_max = {x_m:.4f}")

    def test_04_critical_points_case5(self):
        rep = unbalanced.critical_points(0.86872, COLLAGE, Q)
        x_s = next(p.x for p in rep.critical_points if p.kind == "saddle")
        x_m = next(p.x for p in rep.critical_points if p.kind == "maximum")
        ok = rel_err(x_s, 3.62443) <= 1e-3 and rel_err(x_m, -3.11904) <= 1e-3
        verdict("critical points, case 5 (k = 0.86872)", ok,
                f"x_s = {x_s:.5f}, x_max = {x_m:.5f}")

    def test_05_boundary_case(self):
        k_cr = unbalanced.k_critical(COLLAGE, Q)
        rep = unbalanced.critical_points(k_cr, COLLAGE, Q)
        kinds = [p.kind for p in rep.critical_points]
        ok = (
            kinds == ["maximum"]
            and rel_err(rep.critical_points[0].x, -20.54072) <= 1e-3
        )
        verdict("boundary case |k| = k_cr: single maximum", ok,
                f"kinds = {kinds}, x = {rep.critical_points[0].x:.5f}")

    def test_06_force_oracle(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        max_err = 0.0
        for _ in range(100):
            zc = complex(*rng.uniform(-1, 1, 2))
            angle = rng.uniform(0, 2 * math.pi)
            sep = COLLAGE.R * rng.uniform(1.5, 4.0)
            zq = zc + sep * complex(math.cos(angle), math.sin(angle))
            vel_c = complex(*rng.uniform(-1, 1, 2))
            acc_c = complex(*rng.uniform(-1, 1, 2))
            vel_q = complex(*rng.uniform(-1, 1, 2))
            q = rng.uniform(-2, 2)
            qdot = rng.uniform(-1, 1)
            st = FullState(zc.real, zc.imag, 0.0, 0.0, 0.0, 0.0,
                           zq.real, zq.imag)
            f_c = complex(*model.sedov_force(st, vel_c, acc_c, vel_q, q,
                                             qdot, COLLAGE))
            f_q = complex(*model.sedov_force_quadrature(st, vel_c, acc_c,
                                                        vel_q, q, qdot,
                                                        COLLAGE))
            max_err = max(max_err, abs(f_c - f_q) / max(abs(f_c), 1e-12))
        wall = time.perf_counter() - t0
        ok = max_err <= 1e-8 and wall < 10.0
        verdict("force oracle (closed form vs quadrature, 100 configs)", ok,
                f"max rel err = {max_err:.2e}, {wall:.1f} s")

    def test_07_formulation_equivalence(self):
        t0 = time.perf_counter()
        params, q = SCATTER, Q
        source = SourceSpec.constant(q)
        body0 = FullState(4.0, 0.0, 0.0, 0.0, -0.3, 0.05, 0.0, 0.0,
                          chart=CHART_BODY)

        def newtonian(t, y):
            return model.full_rhs(FullState.from_array(y, CHART_BODY), t,
                                  params, source)

        sol_n = solve_ivp(newtonian, (0, 10), body0.as_array(), rtol=1e-12,
                          atol=1e-13, method="DOP853", dense_output=True)

        canon0 = model.body_to_canonical(body0, params, q)

        def hamiltonian(t, y):
            return model.hamiltonian_rhs(
                FullState.from_array(y, CHART_CANONICAL), params, q
            )

        sol_h = solve_ivp(hamiltonian, (0, 10), canon0.as_array(), rtol=1e-12,
                          atol=1e-13, method="DOP853")
        end_h = model.canonical_to_body(
            FullState.from_array(sol_h.y[:, -1], CHART_CANONICAL), params, q
        )

        # Lagrangian leg: y = (X, Y, theta, dL/dvx, dL/dvy, dL/dvth)
        m = params.m
        mcd = params.m_c * params.d
        j = params.I_c + params.m_c * params.d**2

        def mass_matrix(theta):
            s, c = math.sin(theta), math.cos(theta)
            return np.array([[m, 0.0, -mcd * s],
                             [0.0, m, mcd * c],
                             [-mcd * s, mcd * c, j]])

        def dl_dcoord(coords, vels, src):
            grad = np.empty(3)
            for i in range(3):
                h = 1e-6 * max(1.0, abs(coords[i]))
                cp, cm = list(coords), list(coords)
                cp[i] += h
                cm[i] -= h
                grad[i] = (
                    model.lagrangian(cp, vels, src, params, q)
                    - model.lagrangian(cm, vels, src, params, q)
                ) / (2 * h)
            return grad

        def lagrangian_rhs(t, y):
            coords = y[:3]
            theta = coords[2]
            ax, ay = model.lagrangian_vector_potential(coords, (0.0, 0.0),
                                                       params, q)
            vels = np.linalg.solve(mass_matrix(theta),
                                   y[3:] + np.array([ax, ay, 0.0]))
            return np.concatenate(
                [vels, dl_dcoord(coords, vels, (0.0, 0.0))]
            )

        vels0 = model.body_velocities(body0, params)
        ax0, ay0 = model.lagrangian_vector_potential(
            (4.0, 0.0, 0.0), (0.0, 0.0), params, q
        )
        p0 = mass_matrix(0.0) @ np.asarray(vels0) - np.array([ax0, ay0, 0.0])
        sol_l = solve_ivp(lagrangian_rhs, (0, 10),
                          np.concatenate([[4.0, 0.0, 0.0], p0]), rtol=1e-12,
                          atol=1e-13, method="DOP853")

        end_n = sol_n.y[:3, -1]
        d_h = np.max(np.abs(end_n - np.array(
            [end_h.X_c, end_h.Y_c, end_h.theta]
        )))
        d_l = np.max(np.abs(end_n - sol_l.y[:3, -1]))
        wall = time.perf_counter() - t0
        ok = d_h <= 1e-8 and d_l <= 1e-8 and wall < 10.0
        verdict("formulation equivalence (Newtonian/Lagrangian/Hamiltonian)",
                ok, f"Hamiltonian dev = {d_h:.2e}, Lagrangian dev = {d_l:.2e}")

    def test_08_conservation_suite(self):
        t0 = time.perf_counter()
        params, q, k = SCATTER, Q, 1.0
        from foilflow.params import ReducedState
        from foilflow.reduced import momentum_on_energy_level

        cfg = ScatterConfig(r_max=100.0, h=0.001, k=k, branch="largest",
                            params=params, q=q)
        phi0 = incoming_angle(1.0, 14.0, cfg)
        p = momentum_on_energy_level(100.0, phi0, 1.0, 0.001, k, "largest",
                                     params, q)
        rs = ReducedState(r=100.0, phi=phi0, p=p, alpha=1.0, k=k)
        st0 = model.from_reduced(rs, 0.0, params, q)
        y0 = st0.as_array()

        def ham(y):
            return model.hamiltonian(
                FullState.from_array(y, CHART_CANONICAL), params, q
            )

        def mom(y):
            return model.angular_momentum(
                FullState.from_array(y, CHART_CANONICAL)
            )

        def rhs(t, y):
            return model.hamiltonian_rhs(
                FullState.from_array(y, CHART_CANONICAL), params, q
            )

        h0, k0 = ham(y0), mom(y0)
        events = [EventSpec(kind="max_time", value=1000.0)]
        coll = integrate_until_event(
            rhs, y0, events,
            IntegratorConfig(method="gauss_collocation", stages=3, dt=0.05,
                             newton_tol=1e-14, newton_max_iter=100),
        )
        drift_h = abs(ham(coll.state) - h0) / max(abs(h0), 1e-12)
        drift_k = abs(mom(coll.state) - k0) / max(abs(k0), 1e-12)

        proj_tol = 1e-11
        proj = integrate_until_event(
            rhs, y0, [EventSpec(kind="max_time", value=50.0)],
            IntegratorConfig(method="projection", rel_tol=1e-10,
                             abs_tol=1e-12, newton_tol=proj_tol),
            invariants=[
                Invariant(ham),
                Invariant(mom, lambda y: np.array(
                    model.angular_momentum_grad(
                        FullState.from_array(y, CHART_CANONICAL)
                    )
                )),
            ],
        )
        pd_h = abs(ham(proj.state) - h0) / max(abs(h0), 1e-12)
        pd_k = abs(mom(proj.state) - k0) / max(abs(k0), 1e-12)
        wall = time.perf_counter() - t0
        ok = (drift_h <= 1e-9 and drift_k <= 1e-9
              and pd_h <= proj_tol and pd_k <= proj_tol and wall < 60.0)
        verdict("conservation suite (H, K drift)", ok,
                f"collocation H {drift_h:.1e} K {drift_k:.1e}, "
                f"projection H {pd_h:.1e} K {pd_k:.1e}, {wall:.0f} s")

    def test_09_balanced_integrability(self):
        t0 = time.perf_counter()
        cfg = ScatterConfig(r_max=100.0, h=0.001, k=1.0, branch="largest",
                            params=BALANCED, q=Q)
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(50):
            alpha0 = rng.uniform(0, 2 * math.pi)
            b0 = rng.uniform(15.0, 90.0)
            phi0 = incoming_angle(alpha0, b0, cfg)
            orbit = scatter_orbit(phi0, alpha0, 20, cfg)
            bs = [p.b for p in orbit if p.outcome == "returned"]
            worst = max(worst, max(abs(b - bs[0]) for b in bs))
        wall = time.perf_counter() - t0
        ok = worst <= 1e-6 and wall < 120.0
        verdict("balanced integrability (b constant, 50 starts x 20 iters)",
                ok, f"worst |b - b0| = {worst:.1e}, {wall:.0f} s")

    def test_10_nonintegrability_evidence(self):
        t0 = time.perf_counter()
        base = dict(r_max=100.0, h=0.001, k=1.0, params=SCATTER, q=Q)

        # (a) invariant-curve family on the largest branch
        cfg_reg = ScatterConfig(branch="largest", **base)
        family_var = 0.0
        for b0 in (13.0, 14.0, 15.0):
            phi0 = incoming_angle(1.0, b0, cfg_reg)
            orbit = scatter_orbit(phi0, 1.0, 20, cfg_reg)
            bs = [p.b for p in orbit if p.outcome == "returned"]
            family_var = max(family_var, max(bs) - min(bs))

        # (b) sensitive pair on the smallest branch
        cfg_cha = ScatterConfig(branch="smallest", **base)
        phi0 = incoming_angle(1.0, 11.05, cfg_cha)
        o1 = scatter_orbit(phi0, 1.0, 20, cfg_cha)
        o2 = scatter_orbit(phi0, 1.0 + 1e-8, 20, cfg_cha)
        n = min(len(o1), len(o2))
        sep = max(abs(o1[i].b - o2[i].b) for i in range(n))
        wall = time.perf_counter() - t0
        ok = family_var < 1e-3 and sep > 0.1
        verdict("nonintegrability evidence (invariant family + sensitivity)",
                ok, f"family b-variation = {family_var:.1e}, "
                    f"pair separation = {sep:.3f}, {wall:.0f} s")

    def test_11_hill_region_counts(self):
        t0 = time.perf_counter()
        k = 0.86872
        rep = unbalanced.critical_points(k, COLLAGE, Q)
        barrier = next(p.value for p in rep.critical_points
                       if p.kind == "saddle")
        below = unbalanced.hill_regions(0.5 * barrier, k, COLLAGE, Q,
                                        window=(-12, 12, -12, 12),
                                        resolution=400)
        above = unbalanced.hill_regions(1.5 * barrier, k, COLLAGE, Q,
                                        window=(-12, 12, -12, 12),
                                        resolution=400)
        wall = time.perf_counter() - t0
        ok = below.n_regions == 2 and above.n_regions == 1 and wall < 30.0
        verdict("Hill-region counts (2 below barrier, 1 above)", ok,
                f"below = {below.n_regions}, above = {above.n_regions}")

    def test_12_circular_solution(self):
        t0 = time.perf_counter()
        k = 0.86872
        rep = unbalanced.critical_points(k, COLLAGE, Q)
        worst_res = 0.0
        all_unstable = True
        for pt in rep.critical_points:
            law, rate, eigs, kind = unbalanced.circular_solution(
                pt.x, k, COLLAGE, Q
            )
            # residual of the law against the canonical flow over one period
            from foilflow.params import ReducedState
            from foilflow.reduced import reduced_rhs_cart

            p_y = rate * (COLLAGE.m * pt.x + COLLAGE.m_c * COLLAGE.d)
            rs = ReducedState.from_cart(
                np.array([pt.x, 0.0, 0.0, p_y]), k
            )
            period = 2 * math.pi / abs(rate)
            eps = 1e-3 * period
            for t in np.linspace(0.0, period, 17):
                y = model.from_reduced(rs, rate * t, COLLAGE, Q).as_array()
                # 4th-order finite difference of the law in time
                ys = [
                    model.from_reduced(rs, rate * (t + s * eps), COLLAGE,
                                       Q).as_array()
                    for s in (-2, -1, 1, 2)
                ]
                ydot = (ys[0] - 8 * ys[1] + 8 * ys[2] - ys[3]) / (12 * eps)
                f = np.asarray(
                    model.hamiltonian_rhs(
                        FullState.from_array(y, CHART_CANONICAL), COLLAGE, Q
                    )
                )
                worst_res = max(worst_res, float(np.max(np.abs(f - ydot))))
            if kind != "unstable" or np.max(eigs.real) <= 1e-4 * abs(rate):
                all_unstable = False
        wall = time.perf_counter() - t0
        ok = worst_res <= 1e-9 and all_unstable and wall < 10.0
        verdict("circular solutions (residual + instability)", ok,
                f"max residual = {worst_res:.1e}, unstable = {all_unstable}")
