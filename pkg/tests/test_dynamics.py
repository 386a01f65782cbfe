"""Projective measurement dynamics, renewal recursion, and the dissipative series."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreset import (
    BoundaryContaminationError,
    DetectionSeries,
    LatticeSpec,
    ModelKind,
    RenewalSeries,
    build_model2_heff,
    initial_state,
    measured_evolution,
    nh_survival_series,
    renewal_amplitudes,
)

from conftest import taylor_expm


TWO_SITE = LatticeSpec(L=2, detector_index=2, initial_index=1)


class TestTwoSiteClosedForms:
    @pytest.mark.parametrize("tau", [0.3, np.pi / 4])
    def test_pmf_is_geometric_in_cos_squared(self, tau):
        n = 8
        series = measured_evolution(TWO_SITE, tau, n, bulk_guard=False)
        s2, c2 = np.sin(tau) ** 2, np.cos(tau) ** 2
        expected_p = s2 * c2 ** np.arange(n)
        assert np.max(np.abs(series.p - expected_p)) < 1e-12
        assert np.max(np.abs(series.P - c2 ** np.arange(1, n + 1))) < 1e-12

    def test_quarter_period_detects_immediately(self):
        series = measured_evolution(TWO_SITE, np.pi / 2, 5, bulk_guard=False)
        assert abs(series.p[0] - 1.0) < 1e-12
        assert np.max(np.abs(series.p[1:])) < 1e-12
        assert abs(series.Pdet[-1] - 1.0) < 1e-12

    def test_zeno_slowdown_at_small_tau(self):
        # Detection in the first step scales as tau^2: halving tau
        # quarters it, up to O(tau^2) corrections.
        tau = 0.01
        missing_full = 1.0 - measured_evolution(TWO_SITE, tau, 1, bulk_guard=False).P[0]
        missing_half = 1.0 - measured_evolution(TWO_SITE, tau / 2, 1, bulk_guard=False).P[0]
        assert abs(missing_full / missing_half - 4.0) < 1e-3


class TestRenewalRecursion:
    def test_two_site_amplitudes(self):
        tau = 0.3
        ren = renewal_amplitudes(TWO_SITE, tau, 4)
        assert abs(ren.amplitudes[0] - (-1j * np.sin(tau))) < 1e-12
        assert abs(ren.amplitudes[1] - (-1j * np.sin(tau) * np.cos(tau))) < 1e-12

    def test_first_amplitude_is_free_transition(self):
        spec = LatticeSpec(L=12, detector_index=8, initial_index=5)
        tau = 0.9
        ren = renewal_amplitudes(spec, tau, 1)
        from qreset import build_tb_hamiltonian, propagator

        u = propagator(build_tb_hamiltonian(spec), tau, hermitian=True).matrix
        free = u[7, 4]
        assert abs(ren.amplitudes[0] - free) < 1e-12

    def test_matches_projective_dynamics_midsize(self):
        spec = LatticeSpec(L=20, detector_index=14, initial_index=10)
        tau = 0.3
        base = measured_evolution(spec, tau, 50, bulk_guard=False)
        ren = renewal_amplitudes(spec, tau, 50)
        assert np.max(np.abs(np.abs(ren.amplitudes) ** 2 - base.p)) <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(
        half_l=st.integers(min_value=2, max_value=8),
        tau=st.floats(min_value=0.1, max_value=1.5),
        data=st.data(),
    )
    def test_matches_projective_dynamics_randomized(self, half_l, tau, data):
        L = 2 * half_l
        s = data.draw(st.integers(min_value=1, max_value=L))
        initial = data.draw(
            st.integers(min_value=1, max_value=L).filter(lambda j: j != s)
        )
        spec = LatticeSpec(L=L, detector_index=s, initial_index=initial)
        base = measured_evolution(spec, tau, 30, bulk_guard=False)
        ren = renewal_amplitudes(spec, tau, 30)
        assert np.max(np.abs(np.abs(ren.amplitudes) ** 2 - base.p)) <= 1e-10

    def test_series_length_bookkeeping(self):
        ren = renewal_amplitudes(TWO_SITE, 0.4, 7)
        assert isinstance(ren, RenewalSeries)
        assert ren.n_max == 7
        assert ren.amplitudes.shape == (7,)


class TestDissipativeSeries:
    def test_first_step_against_taylor_oracle(self):
        spec = LatticeSpec(L=8, detector_index=5, initial_index=4)
        tau = 0.6
        series = nh_survival_series(spec, ModelKind.MODEL2, tau, 1, bulk_guard=False)
        u = taylor_expm(build_model2_heff(spec, tau), tau)
        phi = u @ initial_state(spec)
        assert abs(series.P[0] - np.vdot(phi, phi).real) < 1e-10

    @pytest.mark.parametrize("kind", [ModelKind.MODEL1, ModelKind.MODEL2])
    def test_tracks_projective_detection_at_operating_point(self, kind):
        spec = LatticeSpec(L=500, detector_index=260, initial_index=250)
        tau = 0.25
        n = 400  # horizon T = 100
        exact = measured_evolution(spec, tau, n)
        eff = nh_survival_series(spec, kind, tau, n)
        assert np.max(np.abs(exact.Pdet - eff.Pdet)) < 0.02

    def test_model1_improves_as_tau_shrinks(self):
        spec = LatticeSpec(L=100, detector_index=60, initial_index=50)
        gaps = {}
        for tau in (0.1, 0.5):
            n = int(round(20 / tau))
            exact = measured_evolution(spec, tau, n)
            eff = nh_survival_series(spec, ModelKind.MODEL1, tau, n)
            gaps[tau] = np.max(np.abs(exact.Pdet - eff.Pdet))
        assert gaps[0.1] < gaps[0.5]

    def test_exact_kind_rejected(self):
        with pytest.raises(ValueError):
            nh_survival_series(TWO_SITE, ModelKind.EXACT, 0.5, 3, bulk_guard=False)


class TestBulkGuard:
    def test_contaminated_horizon_rejected(self):
        spec = LatticeSpec(L=20, detector_index=14, initial_index=10)
        with pytest.raises(BoundaryContaminationError):
            measured_evolution(spec, 0.5, 50)

    def test_opt_out_runs(self):
        spec = LatticeSpec(L=20, detector_index=14, initial_index=10)
        series = measured_evolution(spec, 0.5, 50, bulk_guard=False)
        assert series.n_max == 50

    def test_guard_applies_to_dissipative_series_too(self):
        spec = LatticeSpec(L=20, detector_index=14, initial_index=10)
        with pytest.raises(BoundaryContaminationError):
            nh_survival_series(spec, ModelKind.MODEL2, 0.5, 50)

    def test_safe_horizon_passes(self):
        spec = LatticeSpec(L=500, detector_index=260, initial_index=250)
        series = measured_evolution(spec, 0.25, 100)
        assert series.n_max == 100


class TestSeriesBookkeeping:
    def test_probability_is_conserved(self):
        spec = LatticeSpec(L=16, detector_index=12, initial_index=8)
        series = measured_evolution(spec, 0.7, 40, bulk_guard=False)
        total = np.sum(series.p) + series.P[-1]
        assert abs(total - 1.0) <= 1e-12

    @pytest.mark.parametrize("kind", [ModelKind.MODEL1, ModelKind.MODEL2])
    def test_dissipative_survival_never_increases(self, kind):
        spec = LatticeSpec(L=16, detector_index=12, initial_index=8)
        series = nh_survival_series(spec, kind, 0.7, 40, bulk_guard=False)
        padded = np.concatenate(([1.0], series.P))
        assert np.all(np.diff(padded) <= 1e-12)

    def test_projective_survival_never_increases(self):
        spec = LatticeSpec(L=16, detector_index=12, initial_index=8)
        series = measured_evolution(spec, 0.7, 40, bulk_guard=False)
        padded = np.concatenate(([1.0], series.P))
        assert np.all(np.diff(padded) <= 1e-12)

    def test_times_axis(self):
        series = measured_evolution(TWO_SITE, 0.5, 4, bulk_guard=False)
        assert np.allclose(series.times, [0.5, 1.0, 1.5, 2.0])

    def test_invalid_run_args(self):
        with pytest.raises(ValueError):
            measured_evolution(TWO_SITE, 0.0, 5, bulk_guard=False)
        with pytest.raises(ValueError):
            measured_evolution(TWO_SITE, 0.5, 0, bulk_guard=False)


class TestFromPmf:
    def test_builds_consistent_series(self):
        series = DetectionSeries.from_pmf(1.0, np.array([0.3, 0.2, 0.1]))
        assert np.allclose(series.Pdet, [0.3, 0.5, 0.6])
        assert np.allclose(series.P, [0.7, 0.5, 0.4])
        assert series.n_max == 3

    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError):
            DetectionSeries.from_pmf(1.0, np.array([0.5, -0.1]))

    def test_rejects_excess_mass(self):
        with pytest.raises(ValueError):
            DetectionSeries.from_pmf(1.0, np.array([0.8, 0.5]))
