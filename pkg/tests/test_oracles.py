import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

import perwave as pw
from perwave import oracles as orc


class TestEllipticIntegrals:
    def test_degenerate_modulus(self):
        assert orc.elliptic_K(0.0) == pytest.approx(np.pi / 2, rel=1e-15)
        assert orc.elliptic_E(0.0) == pytest.approx(np.pi / 2, rel=1e-15)

    def test_K_09_value(self):
        # cross-checked against the defining integral by quadrature
        theta, w = np.polynomial.legendre.leggauss(400)
        t = 0.25 * np.pi * (theta + 1)
        K_quad = 0.25 * np.pi * np.dot(w, 1.0 / np.sqrt(1 - 0.81 * np.sin(t) ** 2))
        assert orc.elliptic_K(0.9) == pytest.approx(K_quad, rel=1e-13)
        assert orc.elliptic_K(0.9) == pytest.approx(2.280549, abs=5e-7)

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9, 0.99, 0.9999])
    def test_against_scipy(self, gamma):
        assert orc.elliptic_K(gamma) == pytest.approx(special.ellipk(gamma**2), rel=1e-13)
        assert orc.elliptic_E(gamma) == pytest.approx(special.ellipe(gamma**2), rel=1e-13)

    def test_domain_errors(self):
        for g in (1.0, 1.5, -0.1):
            with pytest.raises(ValueError):
                orc.elliptic_K(g)
            with pytest.raises(ValueError):
                orc.elliptic_E(g)


class TestJacobiFunctions:
    def test_initial_values(self):
        for g in (0.2, 0.9):
            assert orc.jacobi_cn(0.0, g) == pytest.approx(1.0, abs=1e-14)
            assert orc.jacobi_sn(0.0, g) == pytest.approx(0.0, abs=1e-14)
            assert orc.jacobi_dn(0.0, g) == pytest.approx(1.0, abs=1e-14)

    def test_quarter_period_zero(self):
        for g in (0.3, 0.9, 0.99):
            assert abs(orc.jacobi_cn(orc.elliptic_K(g), g)) <= 1e-12

    def test_circular_limit(self):
        assert orc.jacobi_cn(1.0, 0.0) == pytest.approx(np.cos(1.0), abs=1e-14)

    @given(
        x=st.floats(-10.0, 10.0),
        gamma=st.floats(0.0, 0.999),
    )
    @settings(max_examples=200, deadline=None)
    def test_identities(self, x, gamma):
        sn = orc.jacobi_sn(x, gamma)
        cn = orc.jacobi_cn(x, gamma)
        dn = orc.jacobi_dn(x, gamma)
        assert abs(sn**2 + cn**2 - 1.0) <= 1e-12
        assert abs(dn**2 + gamma**2 * sn**2 - 1.0) <= 1e-12

    def test_against_scipy_ellipj(self):
        x = np.linspace(-8, 8, 161)
        for g in (0.3, 0.9, 0.99):
            sn, cn, dn = (f(x, g) for f in (orc.jacobi_sn, orc.jacobi_cn, orc.jacobi_dn))
            s, c, d, _ = special.ellipj(x, g**2)
            assert np.max(np.abs(sn - s)) <= 1e-12
            assert np.max(np.abs(cn - c)) <= 1e-12
            assert np.max(np.abs(dn - d)) <= 1e-12


def _profile_invariants(prof):
    """The WaveProfile invariant suite applied to a closed-form profile."""
    well = prof.well
    assert prof.u[0] == pytest.approx(well.u_minus, abs=1e-10)
    assert abs(prof.u_x[0]) <= 1e-10
    assert abs(prof.u[-1] - prof.u[0]) + abs(prof.u_x[-1] - prof.u_x[0]) <= 1e-10
    n = len(prof.grid) - 1
    assert prof.u[n // 2] == pytest.approx(well.u_plus, abs=1e-8)
    m = pw.effective_mass(prof.params)
    resid = (
        0.5 * m * prof.u_x**2
        + pw.potential(well.nl, prof.params, prof.u)
        - prof.params.E
    )
    assert np.max(np.abs(resid)) <= 1e-9 * (1 + abs(prof.params.E))


class TestCnoidalProfile:
    def test_period_and_speed(self):
        prof, params = orc.kdv_cnoidal_profile(1.0, 0.9)
        assert prof.T == pytest.approx(2 * orc.elliptic_K(0.9), rel=1e-14)
        assert params.c == pytest.approx(4 * (2 * 0.81 - 1), rel=1e-14)

    def test_small_modulus_small_amplitude(self):
        prof, _ = orc.kdv_cnoidal_profile(1.0, 0.05)
        assert np.max(prof.u) <= 6 * 0.05**2 + 1e-12
        with pytest.raises(ValueError):
            orc.kdv_cnoidal_profile(1.0, 0.0)

    def test_dual_construction_agreement(self):
        prof_cn, params = orc.kdv_cnoidal_profile(1.0, 0.9)
        prof = pw.solve_profile(prof_cn.well)
        u_ref, _ = prof_cn.dense(prof.grid * (prof_cn.T / prof.T))
        assert np.max(np.abs(prof.u - u_ref)) <= 1e-8

    def test_invariant_suite(self):
        for gamma in (0.5, 0.9):
            prof, _ = orc.kdv_cnoidal_profile(1.0, gamma)
            _profile_invariants(prof)


class TestMkdvFamilies:
    def test_dn_positive_and_a_zero(self):
        prof, params = orc.mkdv_dn_profile(1.0, 0.8)
        assert np.all(prof.u >= np.sqrt(6) * np.sqrt(1 - 0.64) - 1e-12)
        assert abs(params.a) <= 1e-10
        _profile_invariants(prof)

    def test_cn_mean_zero_and_a_zero(self):
        prof, params = orc.mkdv_cn_profile(1.0, 0.9)
        assert abs(params.a) <= 1e-10
        fn = pw.compute_functionals(prof)
        assert abs(fn.M) <= 1e-10 * fn.T
        _profile_invariants(prof)

    def test_cn_low_modulus_is_galilean_representative(self):
        prof, params = orc.mkdv_cn_profile(1.0, 0.6)
        assert params.c < 0
        assert prof.T == pytest.approx(4 * orc.elliptic_K(0.6), rel=1e-13)
        _profile_invariants(prof)

    def test_dn_period(self):
        prof, _ = orc.mkdv_dn_profile(1.0, 0.9)
        assert prof.T == pytest.approx(2 * orc.elliptic_K(0.9), rel=1e-13)


class TestDiscriminant:
    def test_simple_cubic(self):
        # roots -1, 0, 1: product of squared differences via the root oracle
        roots = np.array([-1.0, 0.0, 1.0])
        prod = np.prod([(r1 - r2) ** 2 for i, r1 in enumerate(roots) for r2 in roots[i + 1 :]])
        assert orc.cubic_discriminant((1, 0, -1, 0)) == pytest.approx(prod, rel=1e-14)
        assert orc.cubic_discriminant((1, 0, -1, 0)) == 4.0

    def test_triple_root(self):
        assert orc.cubic_discriminant((1, 0, 0, 0)) == 0.0

    def test_leading_zero_rejected(self):
        with pytest.raises(ValueError):
            orc.cubic_discriminant((0, 1, 2, 3))

    def test_reference_well_positive(self):
        disc = orc.cubic_discriminant((-1 / 3, 0.5, 0.0, -0.01))
        assert disc > 0
        assert np.all(np.abs(np.roots([-1 / 3, 0.5, 0.0, -0.01]).imag) < 1e-12)


class TestClosedFormIndices:
    def test_kdv_j3_matches_fd(self, kdv_params, kdv_gradients):
        closed = orc.kdv_jacobian3_closed(kdv_params)
        assert pw.jacobian3(kdv_gradients) == pytest.approx(closed, rel=1e-5)
        assert closed > 0

    def test_bbm_j2_matches_fd(self, bbm_params, bbm_gradients):
        closed = orc.bbm_jacobian2_closed(bbm_params)
        assert pw.jacobian2(bbm_gradients) == pytest.approx(closed, rel=1e-5)
        assert closed > 0

    def test_mean_value_inside_well(self, kdv_nl, kdv_params, kdv_gradients):
        fn = kdv_gradients
        assert kdv_params.E - float(pw.potential(kdv_nl, kdv_params, fn.M / fn.T)) > 0

    def test_bbm_jensen_inequality(self, bbm_nl, bbm_params, bbm_gradients):
        fn = bbm_gradients
        mean = fn.M / fn.T
        gp = float(bbm_nl.f(mean)) - (bbm_params.c - 1) * mean - bbm_params.a
        assert gp < 0

    def test_family_validation(self, kdv_params, bbm_params):
        with pytest.raises(ValueError):
            orc.kdv_jacobian3_closed(bbm_params)
        with pytest.raises(ValueError):
            orc.bbm_jacobian2_closed(kdv_params)

    def test_notes_report_fitted_constants(self):
        notes = orc.closed_form_notes()
        assert notes["kdv_j3"]["implemented"] != notes["kdv_j3"]["printed"]
        assert notes["bbm_j2"]["fitted_T_power"] == 2.0
