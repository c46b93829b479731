"""
Tests for count simulation, background subtraction and fringe fitting
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from experiment import (
    CountRecord, SingularFitError, design_matrix, fit_fringe, fit_harmonics, fringe_model, point_generator,
    rate_scale_for_mean, rate_scale_for_peak, simulate_counts, subtract_background,
)
from schemes import FringeSeries, SchemeKind, uniform_phase_grid
from spectral import OverlapIntegrals, p4_asym, visibilities

REFERENCE = OverlapIntegrals.from_ratio(0.86, 0.96)


def reference_curve(points=24):
    grid = uniform_phase_grid(points)
    return FringeSeries(tuple(grid), tuple(p4_asym(np.array(grid), REFERENCE)))


class TestSimulateCounts:
    """Test cases for Poisson count simulation"""

    def test_deterministic(self):
        """Test that the same seed gives identical counts"""
        curve = reference_curve()
        first = simulate_counts(curve, 500.0, 10.0, 1.2, seed=42)
        second = simulate_counts(curve, 500.0, 10.0, 1.2, seed=42)
        assert [r.raw_counts for r in first] == [r.raw_counts for r in second]

    def test_seed_changes_counts(self):
        """Test that a different seed gives different counts"""
        curve = reference_curve()
        first = [r.raw_counts for r in simulate_counts(curve, 500.0, 10.0, 1.2, seed=1)]
        second = [r.raw_counts for r in simulate_counts(curve, 500.0, 10.0, 1.2, seed=2)]
        assert first != second

    def test_points_are_independent_streams(self):
        """Test that a point's count depends only on the seed and its index"""
        curve = reference_curve()
        full = simulate_counts(curve, 500.0, 10.0, 1.2, seed=7)
        head = FringeSeries(curve.phases[:5], curve.values[:5])
        partial = simulate_counts(head, 500.0, 10.0, 1.2, seed=7)
        assert [r.raw_counts for r in partial] == [r.raw_counts for r in full[:5]]

    def test_zero_rate(self):
        """Test that zero signal and background give zero counts"""
        records = simulate_counts(reference_curve(), 0.0, 10.0, 0.0, seed=3)
        assert all(r.raw_counts == 0 for r in records)
        assert all(r.background_estimate == 0.0 for r in records)

    def test_zero_duration(self):
        """Test that zero duration gives zero counts"""
        records = simulate_counts(reference_curve(), 500.0, 0.0, 1.2, seed=3)
        assert all(r.raw_counts == 0 for r in records)

    def test_record_fields(self):
        """Test the phase, duration and background of each record"""
        curve = reference_curve(6)
        records = simulate_counts(curve, 500.0, 100.0, 1.2, seed=3)
        assert [r.phase for r in records] == list(curve.phases)
        assert all(r.duration == 100.0 for r in records)
        assert all(r.background_estimate == pytest.approx(120.0) for r in records)

    @pytest.mark.parametrize("kwargs", [
        {"rate_scale": -1.0}, {"duration": -1.0}, {"bg_rate": -0.1}, {"seed": -1}, {"seed": 2 ** 64},
    ])
    def test_invalid_arguments(self, kwargs):
        """Test that negative rates, durations and out-of-range seeds are rejected"""
        arguments = {"rate_scale": 1.0, "duration": 1.0, "bg_rate": 0.0, "seed": 0}
        arguments.update(kwargs)
        with pytest.raises(ValueError):
            simulate_counts(reference_curve(4), **arguments)

    def test_peak_scaling(self):
        """Test the rate scale that puts peak_counts at the curve maximum"""
        curve = reference_curve()
        scale = rate_scale_for_peak(curve, 184.0, 100.0)
        assert scale * curve.maximum * 100.0 == pytest.approx(184.0)

    def test_peak_scaling_needs_duration(self):
        """Test that a zero duration cannot be scaled to a peak"""
        with pytest.raises(ValueError):
            rate_scale_for_peak(reference_curve(), 184.0, 0.0)

    def test_mean_scaling(self):
        """Test the rate scale that puts mean_counts at the curve mean"""
        curve = reference_curve(25)
        scale = rate_scale_for_mean(curve, 184.0, 100.0)
        assert scale * np.mean(curve.values) * 100.0 == pytest.approx(184.0)

    def test_mean_scaling_needs_duration(self):
        """Test that a zero duration or a flat zero curve cannot be scaled to a mean"""
        with pytest.raises(ValueError):
            rate_scale_for_mean(reference_curve(), 184.0, 0.0)
        with pytest.raises(ValueError):
            rate_scale_for_mean(FringeSeries((0.0, 1.0), (0.0, 0.0)), 184.0, 100.0)

    def test_mean_scaling_sets_fitted_level(self):
        """Test that a high-count scan scaled by its mean fits P40 to that mean"""
        curve = reference_curve(25)
        scale = rate_scale_for_mean(curve, 1e6, 100.0)
        result = fit_fringe(simulate_counts(curve, scale, 100.0, 1.2, seed=4))
        assert result.P40 == pytest.approx(1e6, rel=1e-3)

    def test_point_generator_reproducible(self):
        """Test that the per-point stream is fixed by (seed, index)"""
        assert point_generator(5, 2).integers(1 << 30) == point_generator(5, 2).integers(1 << 30)

    @pytest.mark.slow
    def test_background_only_mean(self):
        """Test that background-only counts average to bg_rate x duration"""
        curve = FringeSeries((0.0,), (0.0,))
        counts = [simulate_counts(curve, 1.0, 10.0, 1.2, seed)[0].raw_counts for seed in range(10000)]
        # standard error of the mean is sqrt(12 / 10^4)
        assert np.mean(counts) == pytest.approx(12.0, abs=4.0 * math.sqrt(12.0 / 10000))


class TestBackgroundSubtraction:
    """Test cases for background subtraction"""

    def test_subtraction(self):
        """Test raw minus background"""
        record = CountRecord(0.0, 100.0, 304, 120.0)
        assert record.corrected == 184.0

    def test_negative_values_kept(self):
        """Test that a deficit below background stays negative"""
        series = subtract_background([CountRecord(0.0, 100.0, 100, 120.0)])
        assert series.values[0] == -20.0

    def test_variance_floor(self):
        """Test that zero raw counts get unit variance"""
        series = subtract_background([CountRecord(0.0, 1.0, 0, 0.0), CountRecord(1.0, 1.0, 9, 0.0)])
        np.testing.assert_array_equal(series.variances, [1.0, 9.0])

    @pytest.mark.parametrize("raw", [-1, 2.5, True])
    def test_invalid_raw_counts(self, raw):
        """Test that raw counts must be non-negative integers"""
        with pytest.raises(ValueError):
            CountRecord(0.0, 1.0, raw, 0.0)


class TestFitHarmonics:
    """Test cases for the harmonic least-squares fit"""

    def test_noiseless_recovery(self):
        """Test exact recovery of P40, V3, V1 and phi0 from noiseless data"""
        phases = np.array(uniform_phase_grid(24))
        values = fringe_model(phases, 100.0, 0.8, 0.05, 0.1)
        result = fit_harmonics(phases, values, (1, 3))
        assert result.P40 == pytest.approx(100.0, abs=1e-9)
        assert result.V3 == pytest.approx(0.8, abs=1e-9)
        assert result.V1 == pytest.approx(0.05, abs=1e-9)
        assert result.phi0 == pytest.approx(0.1, abs=1e-9)
        assert result.chi2 == pytest.approx(0.0, abs=1e-12)
        assert result.dof == 24 - 5

    def test_constant_data(self):
        """Test that constant data gives zero visibilities"""
        phases = np.array(uniform_phase_grid(12))
        result = fit_harmonics(phases, np.full(12, 7.0), (3,))
        assert result.P40 == pytest.approx(7.0)
        assert result.V3 == pytest.approx(0.0, abs=1e-12)
        assert result.V1 == 0.0

    def test_residuals_orthogonal_to_design(self, rng):
        """Test that residuals are orthogonal to every weighted design column"""
        phases = np.array(uniform_phase_grid(20))
        values = fringe_model(phases, 50.0, 0.7, 0.1) + rng.normal(0.0, 2.0, size=20)
        weights = rng.uniform(0.5, 2.0, size=20)
        result = fit_harmonics(phases, values, (1, 3), weights=weights)
        X, names = design_matrix(phases, (1, 3))
        residuals = values - X @ result.coefficients
        np.testing.assert_allclose(X.T @ (weights * residuals), 0.0, atol=1e-8)
        assert names == ("a0", "a1", "b1", "a3", "b3")

    def test_visibility_clipped_to_one(self, caplog):
        """Test that an amplitude above the mean level reports V3 = 1 with a warning"""
        phases = np.array(uniform_phase_grid(12))
        with caplog.at_level('WARNING', logger='experiment'):
            result = fit_harmonics(phases, fringe_model(phases, 10.0, 1.5), (3,))
        assert result.V3 == 1.0
        assert 'exceeds 1' in caplog.text

    def test_unit_visibility_not_flagged(self, caplog):
        """Test that a noiseless full-contrast fringe stays at 1 without a warning"""
        phases = np.array(uniform_phase_grid(12))
        with caplog.at_level('WARNING', logger='experiment'):
            result = fit_harmonics(phases, fringe_model(phases, 10.0, 1.0), (3,))
        assert result.V3 == pytest.approx(1.0, abs=1e-12)
        assert 'exceeds 1' not in caplog.text

    def test_too_few_points(self):
        """Test that fewer points than parameters is singular"""
        with pytest.raises(SingularFitError):
            fit_harmonics([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], (1, 3))

    def test_degenerate_phases(self):
        """Test that repeated phases give a rank-deficient design"""
        with pytest.raises(SingularFitError):
            fit_harmonics([0.5] * 10, np.arange(10.0), (1, 3))

    def test_invalid_harmonics(self):
        """Test that non-positive harmonics are rejected"""
        with pytest.raises(ValueError):
            fit_harmonics(uniform_phase_grid(10), np.ones(10), (0, 3))

    def test_length_mismatch(self):
        """Test that phases and values must pair up"""
        with pytest.raises(ValueError):
            fit_harmonics(uniform_phase_grid(10), np.ones(9), (3,))

    def test_report_keys(self):
        """Test the report dictionary of a fit"""
        phases = np.array(uniform_phase_grid(12))
        report = fit_harmonics(phases, fringe_model(phases, 10.0, 0.5), (3,)).to_report()
        assert list(report) == ["P40", "V3", "V1", "phi0", "chi2", "dof", "covariance"]
        assert len(report["covariance"]) == 3


class TestFitFringe:
    """Test cases for fitting simulated counts"""

    def test_consistency_with_model(self):
        """Test that a high-count scan recovers the model visibilities"""
        curve = reference_curve(36)
        records = simulate_counts(curve, 1e6, 100.0, 1.2, seed=11)
        result = fit_fringe(records)
        assert result.V3 == pytest.approx(0.8363, abs=0.01)
        assert result.V1 == pytest.approx(0.0526, abs=0.01)
        assert result.stderr["V3"] > 0.0

    def test_noon_harmonics_only(self):
        """Test a fit restricted to the third harmonic"""
        records = simulate_counts(reference_curve(24), 1e5, 100.0, 0.0, seed=5)
        result = fit_fringe(records, harmonics=(3,))
        assert result.harmonics == (3,)
        assert result.V1 == 0.0
        assert result.parameter_names == ("a0", "a3", "b3")

    @pytest.mark.slow
    def test_ensemble_statistics(self):
        """Test unbiased V3 and a chi2 near its degrees of freedom over many seeds"""
        curve = reference_curve(25)
        scale = rate_scale_for_peak(curve, 184.0, 100.0)
        expected = visibilities(REFERENCE, SchemeKind.ASYMMETRIC_BS).V3

        fits = [fit_fringe(simulate_counts(curve, scale, 100.0, 1.2, seed)) for seed in range(500)]
        v3 = np.array([f.V3 for f in fits])
        chi2 = np.array([f.chi2 for f in fits])
        dof = fits[0].dof

        standard_error = np.std(v3, ddof=1) / math.sqrt(v3.size)
        assert abs(np.mean(v3) - expected) < 2.0 * standard_error
        assert np.mean(chi2) == pytest.approx(dof, rel=0.10)
