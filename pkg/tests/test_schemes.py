"""
Tests for the asymmetric beam-splitter and NOON-projection schemes
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fock_core import fock_state, make_beamsplitter, apply_transform, mode, superposition, FockVector
from schemes import (
    ASYM_ROTATION, NOON_PRE_ROTATION, FringeSeries, Normalization, SchemeConfig, SchemeKind,
    asym_fringe, asymmetric_output_amplitudes, build_scheme, de_broglie_fringe, fringe_visibility,
    harmonic_content, heralded_input_state, noon_circuit_probability, noon_fringe, noon_projection_prob,
    phase_to_path_difference, symmetric_tritter, uniform_phase_grid,
)

AH, AV = mode("a", "H"), mode("a", "V")


class TestAsymmetricOutputAmplitudes:
    """Test cases for the closed-form splitter amplitudes"""

    def test_values_at_one_third(self):
        """Test the closed form at T = 1/3"""
        amps = asymmetric_output_amplitudes(1.0 / 3.0)
        assert amps[(3, 0)] == pytest.approx(math.sqrt(2.0) / 3.0, abs=1e-12)
        assert amps[(0, 3)] == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert amps[(2, 1)] == pytest.approx(-math.sqrt(3.0) / 3.0, abs=1e-12)
        assert amps[(1, 2)] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("T", [0.15, 1.0 / 3.0, 0.5, 0.85])
    def test_matches_engine(self, T):
        """Test the closed form against the Fock engine"""
        a, b = mode("a"), mode("b")
        output = apply_transform(fock_state({a: 2, b: 1}), make_beamsplitter(T))
        for (n_a, n_b), value in asymmetric_output_amplitudes(T).items():
            assert output.amplitude(FockVector.of({a: n_a, b: n_b})).real == pytest.approx(value, abs=1e-12)


class TestAsymmetricFringe:
    """Test cases for the ideal asymmetric-scheme scan"""

    def test_pointwise_values(self):
        """Test (32/81)(1 + cos 3 phi) on a coarse grid"""
        grid = uniform_phase_grid(24)
        series = asym_fringe(grid)
        for phi, value in zip(series.phases, series.values):
            assert value == pytest.approx(32.0 / 81.0 * (1.0 + math.cos(3.0 * phi)), abs=1e-12)

    def test_extrema(self):
        """Test the maximum 64/81 at phi = 0 and the zero at pi/3"""
        series = asym_fringe([0.0, math.pi / 3.0])
        assert series.values[0] == pytest.approx(64.0 / 81.0, abs=1e-12)
        assert series.values[1] == pytest.approx(0.0, abs=1e-12)

    def test_pure_third_harmonic(self):
        """Test that only the mean and the third harmonic survive"""
        magnitudes = harmonic_content(asym_fringe(uniform_phase_grid(36)).values)
        assert magnitudes[0] == pytest.approx(32.0 / 81.0, abs=1e-12)
        assert magnitudes[3] == pytest.approx(32.0 / 81.0, abs=1e-12)
        stray = np.delete(magnitudes, [0, 3])
        assert np.max(stray) < 1e-12

    def test_full_visibility(self):
        """Test unit visibility of the ideal scan"""
        assert fringe_visibility(asym_fringe(uniform_phase_grid(12)).values) == pytest.approx(1.0, abs=1e-12)

    def test_probability_normalization(self):
        """Test that the fan-out coincidence is a quarter of the correlation"""
        grid = uniform_phase_grid(9)
        correlation = asym_fringe(grid)
        probability = asym_fringe(grid, normalization=Normalization.PROBABILITY)
        assert probability.metadata["normalization"] == "probability"
        np.testing.assert_allclose(probability.values, np.array(correlation.values) / 4.0, atol=1e-12)

    def test_metadata(self):
        """Test the scheme tags carried by the series"""
        series = asym_fringe([0.0])
        assert series.metadata["scheme"] == "asym"
        assert series.metadata["model"] == "ideal"

    def test_empty_grid(self):
        """Test that an empty grid is rejected"""
        with pytest.raises(ValueError):
            asym_fringe([])


class TestNoonProjection:
    """Test cases for the NOON-state projection scheme"""

    def test_heralded_state_projects_to_zero(self):
        """Test that |2_H,1_V> has no NOON component"""
        assert noon_projection_prob(heralded_input_state()) == pytest.approx(0.0, abs=1e-15)

    def test_noon_state_projection(self):
        """Test that the NOON state itself projects with the 1/18 scale"""
        state = superposition([1.0, 0.0, 0.0, -1.0], AH, AV)
        assert noon_projection_prob(state) == pytest.approx(1.0 / 18.0, abs=1e-12)

    def test_wrong_photon_number(self):
        """Test that a two-photon state is rejected"""
        with pytest.raises(ValueError):
            noon_projection_prob(fock_state({AH: 1, AV: 1}))

    def test_fringe_values(self):
        """Test (1 + cos 3 phi)/48 with its maximum 1/24 and minimum 0"""
        grid = uniform_phase_grid(12)
        series = noon_fringe(grid)
        for phi, value in zip(series.phases, series.values):
            assert value == pytest.approx((1.0 + math.cos(3.0 * phi)) / 48.0, abs=1e-12)
        assert series.maximum == pytest.approx(1.0 / 24.0, abs=1e-12)
        assert min(series.values) == pytest.approx(0.0, abs=1e-12)

    def test_fringe_period(self):
        """Test the 2 pi / 3 period"""
        values = noon_fringe([0.4, 0.4 + 2.0 * math.pi / 3.0]).values
        assert values[0] == pytest.approx(values[1], abs=1e-12)

    def test_fringe_has_no_first_harmonic(self):
        """Test that only the mean and the third harmonic survive"""
        magnitudes = harmonic_content(noon_fringe(uniform_phase_grid(18)).values)
        assert np.max(np.delete(magnitudes, [0, 3])) < 1e-12

    @pytest.mark.parametrize("seed", range(50))
    def test_circuit_matches_projection(self, seed):
        """Test the explicit circuit against the projection formula for random states"""
        generator = np.random.default_rng(seed)
        coefficients = generator.normal(size=4) + 1j * generator.normal(size=4)
        state = superposition(coefficients, AH, AV)
        circuit = noon_circuit_probability(state)
        assert circuit == pytest.approx(noon_projection_prob(state), abs=1e-12)

    def test_circuit_rejects_other_path(self):
        """Test that a state outside the input path is rejected"""
        state = fock_state({mode("q", "H"): 2, mode("q", "V"): 1})
        with pytest.raises(ValueError):
            noon_circuit_probability(state)


class TestSchemeConstruction:
    """Test cases for scheme configuration and the 1->3 splitter"""

    def test_tritter_first_column(self):
        """Test the uniform first column and orthogonality"""
        matrix = symmetric_tritter()
        np.testing.assert_allclose(matrix[:, 0], np.full(3, 1.0 / math.sqrt(3.0)), atol=1e-12)
        np.testing.assert_allclose(matrix.T @ matrix, np.eye(3), atol=1e-12)

    def test_default_rotations(self):
        """Test the default rotation angle of each scheme"""
        assert SchemeConfig("asym").rotation_alpha == pytest.approx(ASYM_ROTATION)
        assert SchemeConfig(SchemeKind.NOON_PROJECTION).rotation_alpha == pytest.approx(NOON_PRE_ROTATION)
        assert math.cos(ASYM_ROTATION) ** 2 == pytest.approx(1.0 / 3.0)

    def test_unknown_scheme(self):
        """Test that an unknown scheme name is rejected"""
        with pytest.raises(ValueError):
            SchemeConfig("hybrid")

    def test_build_scheme_wiring(self):
        """Test that both schemes wire three detectors for three photons"""
        for kind in SchemeKind:
            chain, wiring = build_scheme(SchemeConfig(kind, phase=0.3))
            assert len(chain) > 0
            assert wiring.total_required == 3
            assert [d.name for d in wiring.detectors] == ["A", "B", "C"]


class TestFringeHelpers:
    """Test cases for phase grids and path-difference helpers"""

    def test_uniform_grid_excludes_stop(self):
        """Test that the grid covers [start, stop) with equal steps"""
        grid = uniform_phase_grid(4)
        assert grid == pytest.approx([0.0, math.pi / 2.0, math.pi, 1.5 * math.pi])

    def test_grid_needs_points(self):
        """Test that zero points are rejected"""
        with pytest.raises(ValueError):
            uniform_phase_grid(0)

    def test_path_difference(self):
        """Test that a full phase turn equals one wavelength"""
        assert phase_to_path_difference(2.0 * math.pi, 800.0) == pytest.approx(800.0)

    def test_de_broglie_period(self):
        """Test that the three-photon fringe repeats every third of a wavelength"""
        values = de_broglie_fringe(np.array([0.0, 800.0 / 3.0, 800.0 / 6.0]), 800.0, 3)
        np.testing.assert_allclose(values, [2.0, 2.0, 0.0], atol=1e-12)

    def test_series_path_differences(self):
        """Test the series conversion to path differences"""
        series = FringeSeries((0.0, math.pi), (1.0, 0.5))
        np.testing.assert_allclose(series.path_differences(702.0), [0.0, 351.0])

    def test_wavelength_label(self):
        """Test that a labelled series converts phases with its own wavelength"""
        series = noon_fringe([0.0, math.pi / 2.0]).with_wavelength(780.0)
        assert series.metadata["wavelength_nm"] == "780.0"
        assert series.metadata["scheme"] == "noon"
        assert float(series.metadata["path_difference_per_rad"]) == pytest.approx(780.0 / (2.0 * math.pi))
        np.testing.assert_allclose(series.path_differences(), [0.0, 195.0])

    def test_unlabelled_series_needs_wavelength(self):
        """Test that a series without a wavelength label asks for one"""
        with pytest.raises(ValueError):
            FringeSeries((0.0,), (1.0,)).path_differences()

    def test_negative_values_rejected(self):
        """Test that clearly negative fringe values are rejected"""
        with pytest.raises(ValueError):
            FringeSeries((0.0,), (-0.1,))

    def test_length_mismatch(self):
        """Test that phases and values must pair up"""
        with pytest.raises(ValueError):
            FringeSeries((0.0, 1.0), (0.5,))
