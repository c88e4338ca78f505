import numpy as np
import pytest

import perwave as pw
from perwave import evans as ev
from perwave import oracles as orc
from perwave.errors import VerdictConflict
from perwave.functionals import (
    JacobianIndices,
    StepPolicy,
    classify,
    indices_at,
)


@pytest.fixture(scope="module")
def kdv_report(kdv_profile):
    return ev.extract_normal_form(kdv_profile)


@pytest.fixture(scope="module")
def kdv_indices(kdv_nl, kdv_params):
    return indices_at(kdv_nl, kdv_params)


class TestCoefficientMatrix:
    def test_gkdv_trace_free(self, kdv_profile):
        H = ev.coefficient_matrix(kdv_profile, 0.7, 0.0, 0.0)
        assert np.trace(H) == 0.0
        assert H[0, 1] == 1.0 and H[1, 2] == 1.0

    def test_gkdv_at_anchor_point(self, kdv_profile):
        # u_x(0) = 0 kills the f''(u) u_x term: bottom-left is exactly -mu
        mu = 0.3 + 0.1j
        H = ev.coefficient_matrix(kdv_profile, 0.0, mu, 0.2)
        assert H[2, 0] == -mu

    def test_gbbm_entries(self, bbm_profile):
        H = ev.coefficient_matrix(bbm_profile, 0.5, 0.0, 0.1)
        assert H[2, 2] == 0.0  # mu/c with mu = 0
        mu = 0.2j
        H = ev.coefficient_matrix(bbm_profile, 0.5, mu, 0.1)
        assert H[2, 2] == mu / bbm_profile.params.c

    def test_matches_internal_spline(self, kdv_profile):
        from perwave.evans import _coefficient_spline

        spl = _coefficient_spline(kdv_profile)
        for x in (0.3, 1.7, 4.4):
            H = ev.coefficient_matrix(kdv_profile, x, 0.0, 0.0)
            h31, h32 = spl(x)
            assert H[2, 0] == pytest.approx(h31, abs=1e-9)
            assert H[2, 1] == pytest.approx(h32, abs=1e-9)


class TestMonodromy:
    def test_liouville_gkdv(self, kdv_profile):
        assert ev.monodromy(kdv_profile, 0.1j, 0.0).liouville_residual <= 1e-9

    def test_liouville_gbbm(self, bbm_profile):
        M = ev.monodromy(bbm_profile, 0.05, 0.1)
        assert M.liouville_residual <= 1e-9
        expected = np.exp(0.05 * bbm_profile.T / bbm_profile.params.c)
        assert M.det() == pytest.approx(expected, rel=1e-9)

    def test_origin_rank_one(self, kdv_profile):
        sv = ev.origin_singular_values(kdv_profile)
        assert sv[1] <= 1e-8 * sv[0]
        assert sv[2] <= 1e-8 * sv[0]

    def test_periodic_null_directions(self, kdv_profile):
        y_x, y_combo, (T_a, T_E) = ev.periodic_null_directions(kdv_profile)
        M = ev.monodromy(kdv_profile, 0.0, 0.0).entries.real
        defect_x = np.linalg.norm((M - np.eye(3)) @ y_x) / np.linalg.norm(y_x)
        defect_c = np.linalg.norm((M - np.eye(3)) @ y_combo) / np.linalg.norm(y_combo)
        assert defect_x <= 1e-9
        assert defect_c <= 1e-6  # limited by the FD accuracy of (T_a, T_E)
        assert T_E > 0


class TestEvansFunction:
    def test_zero_at_origin_axis(self, kdv_profile):
        vals = ev.evans_batch(kdv_profile, np.zeros(3, complex), [0.02, 0.05, 0.1])
        scale = abs(ev.evans(kdv_profile, 0.3 + 0.1j, 0.05))
        assert np.max(np.abs(vals)) <= 1e-9 * scale

    def test_odd_in_mu(self, kdv_profile):
        for mu in (0.02, 0.02j, 0.15 + 0.05j):
            a = ev.evans(kdv_profile, mu, 0.05)
            b = ev.evans(kdv_profile, -mu, 0.05)
            assert abs(a + b) <= 1e-9 * max(abs(a), 1e-30)

    def test_even_in_k(self, kdv_profile):
        a = ev.evans(kdv_profile, 0.1 + 0.03j, 0.07)
        b = ev.evans(kdv_profile, 0.1 + 0.03j, -0.07)
        assert abs(a - b) <= 1e-9 * abs(a)

    def test_large_mu_sign_negative(self, kdv_profile):
        assert ev.evans(kdv_profile, 10.0 / kdv_profile.T, 0.0).real < 0

    def test_off_circle_warning(self, kdv_profile):
        with pytest.warns(UserWarning):
            ev.evans(kdv_profile, 0.1, 0.0, lam=1.5)

    def test_sample_type(self, kdv_profile):
        value = ev.evans(kdv_profile, 0.1j, 0.05)
        s = ev.EvansSample(mu=0.1j, k=0.05, lam=1.0, value=value)
        assert s.value == value


class TestNormalForm:
    def test_gkdv_coefficients_vs_jacobians(self, kdv_report, kdv_indices):
        assert kdv_report.a3 == pytest.approx(-0.5 * kdv_indices.J3, rel=1e-4)
        assert kdv_report.a1 == pytest.approx(
            kdv_indices.J2 * kdv_indices.kinetic, rel=1e-4
        )
        assert kdv_report.slope_sq > 0
        assert kdv_report.predicted_slope == pytest.approx(
            np.sqrt(kdv_report.slope_sq), rel=1e-12
        )

    def test_gbbm_coefficients_vs_jacobians(self, bbm_nl, bbm_params, bbm_profile):
        idx = indices_at(bbm_nl, bbm_params)
        rep = ev.extract_normal_form(bbm_profile)
        assert rep.a3 == pytest.approx(-idx.J3, rel=1e-4)
        # Measured mu k^2 coefficient carries constant 1 (the lemma's own
        # proof), not the 2 printed in its statement; see decisions ledger.
        assert rep.a1 == pytest.approx(idx.J2 * idx.kinetic, rel=1e-4)

    def test_error_estimates_present(self, kdv_report):
        assert kdv_report.errors["a3"] <= 1e-5 * abs(kdv_report.a3)
        assert kdv_report.errors["a1"] <= 1e-5 * abs(kdv_report.a1)


class TestRootTracking:
    def test_winding_counts_triple_root_at_origin(self, kdv_profile):
        from perwave.evans import _winding_number

        w, scale = _winding_number(kdv_profile, 0.0, 0.02)
        assert w is not None and round(w) == 3

    def test_tracked_real_branch(self, kdv_profile, kdv_report, kdv_indices):
        rep = ev.track_roots(kdv_profile, report=kdv_report)
        assert len(rep.tracked) == 3
        for k, roots in rep.tracked:
            big = sorted(roots, key=abs)[-1]
            assert abs(big.imag) <= 1e-8 * abs(big)
            assert abs(abs(big) / k - np.sqrt(rep.slope_sq)) <= 2e-2 * np.sqrt(rep.slope_sq)
        rel = abs(rep.measured_slope_sq.real - rep.slope_sq) / rep.slope_sq
        assert rel <= 1e-3
        rep = ev.transverse_verdict(rep, kdv_indices)
        assert rep.verdict is ev.BranchVerdict.UNSTABLE_LONGWAVE
        assert rep.printed_constant_match == "2"
        assert rep.slope_constant_measured == pytest.approx(2.0, abs=1e-3)

    def test_p5_sign_flip_real_root_at_k0(self):
        nl = pw.make_power_law(5)
        params = pw.WaveParams(0.0, -1e-4, 1.0)
        well = pw.find_turning_points(nl, params, u_seed=1.0)
        prof = pw.solve_profile(well)
        idx = indices_at(nl, params, policy=StepPolicy(base=5e-6), u_seed=1.0)
        assert idx.J3 < 0
        mu_star = ev.real_positive_root(prof)
        assert mu_star is not None and mu_star > 0
        assert abs(ev.evans(prof, mu_star, 0.0)) <= 1e-6


class TestVerdicts:
    def _report(self, slope_sq, tracked_real):
        rep = ev.BranchReport(
            a3=-1.0,
            a1=slope_sq,
            slope_sq=slope_sq,
            predicted_slope=np.sqrt(slope_sq) if slope_sq > 0 else None,
            family=pw.EquationFamily.GKDV_ZK,
        )
        root = 0.01 * (np.sqrt(abs(slope_sq)) if tracked_real else 1j * np.sqrt(abs(slope_sq)))
        rep.tracked = [(0.01, [0.0, root, -root])]
        rep.measured_slope_sq = complex(slope_sq)
        return rep

    def _indices(self, J2, J3):
        return classify(JacobianIndices(J2=J2, J3=J3, kinetic=1.0, tol_j2=1e-9, tol_j3=1e-9))

    def test_conflict_indices_unstable_evans_imaginary(self):
        rep = self._report(-0.5, tracked_real=False)
        with pytest.raises(VerdictConflict):
            ev.transverse_verdict(rep, self._indices(1.0, 1.0))

    def test_conflict_indices_inconclusive_evans_real(self):
        rep = self._report(0.5, tracked_real=True)
        with pytest.raises(VerdictConflict):
            ev.transverse_verdict(rep, self._indices(-1.0, 1.0))

    def test_no_real_branch_is_consistent_with_inconclusive(self):
        rep = self._report(-0.5, tracked_real=False)
        rep = ev.transverse_verdict(rep, self._indices(-1.0, 1.0))
        assert rep.verdict is ev.BranchVerdict.NO_REAL_BRANCH

    def test_degenerate_indices_never_conflict(self):
        rep = self._report(0.5, tracked_real=True)
        rep = ev.transverse_verdict(rep, self._indices(1.0, -1.0))
        assert rep.verdict is ev.BranchVerdict.UNSTABLE_LONGWAVE
