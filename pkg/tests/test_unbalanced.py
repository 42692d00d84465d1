"""Unbalanced case (d > 0): effective potential, thresholds, Hill regions."""

import math

import numpy as np
import pytest

from foilflow import model, unbalanced
from foilflow.params import ConfigurationError, FoilParams

# collage parameter set
PARAMS = FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.1, rho=1.0)
Q = 1.0
K_CR = unbalanced.k_critical(PARAMS, Q)


class TestEffectivePotential:
    def test_axis_derivatives_match_fd(self):
        for x in (-30.0, -3.0, 2.5, 40.0):
            k = 0.85
            h = 1e-5 * max(1.0, abs(x))
            fd1 = (
                unbalanced.effective_potential(x + h, 0.0, k, PARAMS, Q)
                - unbalanced.effective_potential(x - h, 0.0, k, PARAMS, Q)
            ) / (2 * h)
            assert unbalanced.effective_potential_dx(x, k, PARAMS, Q) == (
                pytest.approx(fd1, rel=1e-6, abs=1e-12)
            )
            fd2 = (
                unbalanced.effective_potential(x + h, 0.0, k, PARAMS, Q)
                - 2 * unbalanced.effective_potential(x, 0.0, k, PARAMS, Q)
                + unbalanced.effective_potential(x - h, 0.0, k, PARAMS, Q)
            ) / (h * h)
            assert unbalanced.effective_potential_dxx(x, k, PARAMS, Q) == (
                pytest.approx(fd2, rel=1e-4, abs=1e-10)
            )

    def test_quartic_encodes_slope_roots(self):
        """Real quartic roots with |x| > R zero the axis slope."""
        k = 0.86872
        coeffs = unbalanced.quartic_coefficients(k, PARAMS, Q)
        for z in np.roots(coeffs):
            if abs(z.imag) < 1e-10 and z.real**2 > PARAMS.R**2:
                assert unbalanced.effective_potential_dx(
                    float(z.real), k, PARAMS, Q
                ) == pytest.approx(0.0, abs=1e-12)

    def test_inside_rejected(self):
        with pytest.raises(ConfigurationError):
            unbalanced.effective_potential(0.5, 0.0, 0.8, PARAMS, Q)


class TestThresholds:
    def test_k_critical_closed_form(self):
        assert K_CR == pytest.approx(0.81188, abs=5e-6)

    def test_k_inflection(self):
        k_inf, x_inf = unbalanced.k_inflection(PARAMS, Q)
        assert k_inf == pytest.approx(0.81153, abs=5e-5)
        assert x_inf == pytest.approx(-41.0591, rel=1e-3)

    def test_k_inflection_rejects_balanced(self):
        with pytest.raises(ConfigurationError):
            unbalanced.k_inflection(
                FoilParams(m_c=1.0, I_c=1.0, R=1.0, d=0.0, rho=1.0), Q
            )


class TestRegimes:
    def test_below_inflection_no_critical(self):
        rep = unbalanced.critical_points(0.73070, PARAMS, Q)
        assert rep.regime == "no_critical"
        assert rep.critical_points == []

    def test_between_thresholds_pair_on_negative_axis(self):
        rep = unbalanced.critical_points(0.81156, PARAMS, Q)
        assert rep.regime == "max_plus_saddle_negative_axis"
        kinds = {p.kind for p in rep.critical_points}
        assert kinds == {"maximum", "saddle"}
        assert all(p.x < 0 for p in rep.critical_points)

    def test_boundary_single_maximum(self):
        rep = unbalanced.critical_points(K_CR, PARAMS, Q)
        assert rep.regime == "max_only"
        assert len(rep.critical_points) == 1
        pt = rep.critical_points[0]
        assert pt.kind == "maximum"
        assert pt.x == pytest.approx(-20.54072, rel=1e-3)

    def test_supercritical_split_axes(self):
        rep = unbalanced.critical_points(0.86872, PARAMS, Q)
        assert rep.regime == "max_negative_saddle_positive"
        saddle = next(p for p in rep.critical_points if p.kind == "saddle")
        maximum = next(p for p in rep.critical_points if p.kind == "maximum")
        assert saddle.x > 0 > maximum.x

    def test_k_zero_no_critical_points(self):
        rep = unbalanced.critical_points(0.0, PARAMS, Q)
        assert rep.critical_points == []
        assert rep.regime == "no_critical"

    def test_classification_signs(self):
        """U_yy at an axis critical point has the sign of x (exact identity)."""
        rep = unbalanced.critical_points(0.86872, PARAMS, Q)
        for p in rep.critical_points:
            assert (p.hessian[1] > 0) == (p.x > 0)


class TestCircularSolutions:
    def test_residual_over_one_period(self):
        """The circular law substituted into the full flow closes."""
        rep = unbalanced.critical_points(0.86872, PARAMS, Q)
        for pt in rep.critical_points:
            law, rate, eigs, verdict = unbalanced.circular_solution(
                pt.x, 0.86872, PARAMS, Q
            )
            # the fixed point of the reduced flow must be stationary
            from foilflow.reduced import reduced_rhs_cart

            p_y = rate * (PARAMS.m * pt.x + PARAMS.m_c * PARAMS.d)
            rhs = reduced_rhs_cart(
                np.array([pt.x, 0.0, 0.0, p_y]), 0.86872, PARAMS, Q
            )
            assert np.max(np.abs(rhs)) < 1e-9
            # the law traces the circle at the constant rate
            t = np.linspace(0, 2 * math.pi / abs(rate), 7)
            X, Y, th = law(t)
            assert np.allclose(np.hypot(X, Y), abs(pt.x), atol=1e-12)

    def test_both_points_unstable(self):
        rep = unbalanced.critical_points(0.86872, PARAMS, Q)
        for pt in rep.critical_points:
            _, rate, eigs, verdict = unbalanced.circular_solution(
                pt.x, 0.86872, PARAMS, Q
            )
            assert verdict == "unstable"
            assert np.max(eigs.real) > 1e-4 * abs(rate)

    def test_non_critical_point_rejected(self):
        with pytest.raises(ConfigurationError):
            unbalanced.circular_solution(-10.0, 0.86872, PARAMS, Q)

    def test_full_model_follows_circular_law(self):
        """Integrating the canonical equations from the circular state stays
        on the circle."""
        from scipy.integrate import solve_ivp
        from foilflow.params import CHART_CANONICAL, FullState, ReducedState

        k = 0.86872
        rep = unbalanced.critical_points(k, PARAMS, Q)
        pt = next(p for p in rep.critical_points if p.kind == "saddle")
        _, rate, _, _ = unbalanced.circular_solution(pt.x, k, PARAMS, Q)
        p_y = rate * (PARAMS.m * pt.x + PARAMS.m_c * PARAMS.d)
        rs = ReducedState.from_cart(np.array([pt.x, 0.0, 0.0, p_y]), k)
        st0 = model.from_reduced(rs, 0.0, PARAMS, Q)

        def rhs(t, y):
            return model.hamiltonian_rhs(
                FullState.from_array(y, CHART_CANONICAL), PARAMS, Q
            )

        t_end = min(2 * math.pi / abs(rate), 200.0)
        sol = solve_ivp(rhs, (0, t_end), st0.as_array(), rtol=1e-12,
                        atol=1e-12, method="DOP853")
        radii = np.hypot(sol.y[0], sol.y[1])
        assert np.max(np.abs(radii - abs(pt.x))) < 1e-6 * abs(pt.x)


class TestHillRegions:
    def test_two_regions_below_barrier(self):
        k = 0.86872
        rep = unbalanced.critical_points(k, PARAMS, Q)
        barrier = next(p.value for p in rep.critical_points if p.kind == "saddle")
        hr = unbalanced.hill_regions(0.5 * barrier, k, PARAMS, Q,
                                     window=(-12, 12, -12, 12), resolution=400)
        assert hr.n_regions == 2
        assert sorted(hr.regions) == ["A", "B"]
        assert hr.barrier_contained

    def test_one_region_above_barrier(self):
        k = 0.86872
        rep = unbalanced.critical_points(k, PARAMS, Q)
        barrier = next(p.value for p in rep.critical_points if p.kind == "saddle")
        hr = unbalanced.hill_regions(1.5 * barrier, k, PARAMS, Q,
                                     window=(-12, 12, -12, 12), resolution=400)
        assert hr.n_regions == 1
        assert hr.regions == ["merged"]

    def test_boundary_residual(self):
        """Points on emitted boundary polylines satisfy U_e = h closely."""
        k = 0.86872
        hr = unbalanced.hill_regions(3e-4, k, PARAMS, Q,
                                     window=(-12, 12, -12, 12), resolution=600)
        assert hr.boundaries
        worst = 0.0
        for poly in hr.boundaries:
            for x, y in poly[:: max(1, len(poly) // 50)]:
                u = unbalanced.effective_potential(x, y, k, PARAMS, Q)
                worst = max(worst, abs(u - 3e-4))
        assert worst < 5e-5
