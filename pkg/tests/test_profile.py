import numpy as np
import pytest

import perwave as pw
from perwave.errors import DegenerateRoot


class TestSolveProfile:
    def test_anchoring(self, kdv_profile, kdv_well):
        assert kdv_profile.u[0] == pytest.approx(kdv_well.u_minus, abs=1e-12)
        assert kdv_profile.u_x[0] == 0.0

    def test_energy_residual(self, kdv_profile, kdv_params):
        p = kdv_params
        nl = kdv_profile.well.nl
        resid = 0.5 * kdv_profile.u_x**2 + pw.potential(nl, p, kdv_profile.u) - p.E
        assert np.max(np.abs(resid)) <= 1e-9 * (abs(p.E) + 1)
        assert kdv_profile.energy_residual <= 1e-9

    def test_gbbm_energy_residual(self, bbm_profile, bbm_params):
        p = bbm_params
        nl = bbm_profile.well.nl
        resid = 0.5 * p.c * bbm_profile.u_x**2 + pw.potential(nl, p, bbm_profile.u) - p.E
        assert np.max(np.abs(resid)) <= 1e-9 * (abs(p.E) + 1)

    def test_periodicity(self, kdv_profile):
        assert abs(kdv_profile.u[-1] - kdv_profile.u[0]) <= 1e-10
        assert abs(kdv_profile.u_x[-1] - kdv_profile.u_x[0]) <= 1e-10

    def test_max_at_half_period(self, kdv_profile, kdv_well):
        n = len(kdv_profile.grid) - 1
        assert kdv_profile.u[n // 2] == pytest.approx(kdv_well.u_plus, abs=1e-10)
        assert np.argmax(kdv_profile.u) == n // 2

    def test_even_about_half_period(self, kdv_profile):
        u = kdv_profile.u[:-1]
        n = len(u)
        mirrored = np.roll(u[::-1], 1)  # x -> T - x on the periodic grid
        assert np.max(np.abs(u - mirrored)) <= 1e-8

    def test_uxx_matches_potential_gradient(self, kdv_profile):
        nl = kdv_profile.well.nl
        p = kdv_profile.params
        assert np.max(
            np.abs(kdv_profile.u_xx + pw.potential_derivative(nl, p, kdv_profile.u))
        ) <= 1e-12
        # independent route: spectral derivative of u_x on the periodic grid
        ux = kdv_profile.u_x[:-1]
        n = ux.size
        freq = 2j * np.pi * np.fft.fftfreq(n) * n / kdv_profile.T
        uxx_fft = np.real(np.fft.ifft(freq * np.fft.fft(ux)))
        assert np.max(np.abs(uxx_fft - kdv_profile.u_xx[:-1])) <= 1e-8

    def test_dense_evaluator_consistency(self, kdv_profile):
        x = np.linspace(0, kdv_profile.T, 313)
        u, ux = kdv_profile.dense(x)
        ug, uxg = kdv_profile.dense(kdv_profile.grid)
        assert np.max(np.abs(ug - kdv_profile.u)) == 0.0
        p = kdv_profile.params
        nl = kdv_profile.well.nl
        resid = 0.5 * ux**2 + pw.potential(nl, p, u) - p.E
        assert np.max(np.abs(resid)) <= 1e-9

    def test_degenerate_well_never_produces_profile(self, kdv_nl):
        with pytest.raises(DegenerateRoot):
            pw.find_turning_points(kdv_nl, pw.WaveParams(0.0, -1 / 6, 1.0))

    def test_small_grid_rejected(self, kdv_well):
        with pytest.raises(ValueError):
            pw.solve_profile(kdv_well, n_points=32)


class TestPeriodQuadrature:
    def test_dual_period_reference(self, kdv_well, kdv_profile):
        T_quad = pw.period_quadrature(kdv_well)
        assert abs(kdv_profile.T - T_quad) / T_quad <= 1e-10

    def test_dual_period_gbbm(self, bbm_profile):
        T_quad = pw.period_quadrature(bbm_profile.well)
        assert abs(bbm_profile.T - T_quad) / T_quad <= 1e-10

    def test_scaling_homogeneity(self, kdv_nl):
        # (u, x) -> (s^2 u, x/s) maps KdV wells to KdV wells:
        # (a, E, c) -> (s^4 a, s^6 E, s^2 c) with period T -> T/s
        s = 1.3
        base = pw.WaveParams(0.02, -0.05, 1.0)
        T1 = pw.period_quadrature(pw.find_turning_points(kdv_nl, base))
        mapped = pw.WaveParams(s**4 * base.a, s**6 * base.E, s**2 * base.c)
        T2 = pw.period_quadrature(pw.find_turning_points(kdv_nl, mapped))
        assert T2 == pytest.approx(T1 / s, rel=1e-10)

    def test_harmonic_limit(self, kdv_nl):
        # E -> V_min from above: T -> 2 pi / sqrt(V''(u_min)); V''(1) = 1
        params = pw.WaveParams(0.0, -1 / 6 + 1e-10, 1.0)
        well = pw.find_turning_points(kdv_nl, params)
        T = pw.period_quadrature(well)
        assert T == pytest.approx(2 * np.pi, rel=1e-5)

    def test_positive_and_finite(self, kdv_well):
        T = pw.period_quadrature(kdv_well)
        assert np.isfinite(T) and T > 0
