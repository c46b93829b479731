"""
Tests for scenario input validation
"""

import pytest
import os

import sys
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from validation import InputValidator, ScenarioForm, parse_harmonics
from config import DEFAULTS


def form_for(**values):
    data = dict(DEFAULTS)
    data.update(values)
    form = ScenarioForm.from_values(data)
    return form, form.validate()


class TestInputValidator:
    """Test cases for InputValidator class"""

    def test_valid_harmonics(self):
        """Test valid harmonic lists"""
        for text in ['3', '1,3', ' 1 , 3 ', '3,1,3']:
            is_valid, error = InputValidator.validate_harmonics(text)
            assert is_valid, f"'{text}' should be valid: {error}"

    def test_invalid_harmonics(self):
        """Test invalid harmonic lists"""
        for text in ['', '   ', 'a', '1,b', '0', '-1,3', ',']:
            is_valid, error = InputValidator.validate_harmonics(text)
            assert not is_valid, f"'{text}' should be invalid"
            assert error

    def test_finite(self):
        """Test the finiteness check"""
        assert InputValidator.validate_finite(1.5, 'x') == (True, "")
        assert InputValidator.validate_finite(None, 'x') == (True, "")
        assert InputValidator.validate_finite(float('nan'), 'x') == (False, "x must be finite")

    def test_output_path(self):
        """Test path screening"""
        assert InputValidator.validate_output_path('results/run1')[0] is True
        assert InputValidator.validate_output_path('bad\x00path')[0] is False

    def test_parse_harmonics(self):
        """Test that harmonics are deduplicated and sorted"""
        assert parse_harmonics('3,1,3') == (1, 3)
        with pytest.raises(ValueError):
            parse_harmonics('0')


class TestScenarioForm:
    """Test cases for ScenarioForm"""

    def test_defaults_validate(self):
        """Test that the default scenario is valid"""
        form, valid = form_for()
        assert valid, form.field_errors()
        assert form.points.data == 25
        assert form.sigma_p.data is None

    def test_field_errors_in_declaration_order(self):
        """Test that errors come back field by field"""
        form, valid = form_for(points='1', duration='-2')
        assert not valid
        assert [name for name, _ in form.field_errors()] == ['points', 'duration']

    def test_spectral_pair(self):
        """Test that sigma_p and sigma_f validate together"""
        form, valid = form_for(sigma_p='1.0', sigma_f='0.5', delay_h='0.2', v1='0.9')
        assert valid, form.field_errors()

    def test_ratio_with_v1(self):
        """Test that overlap_ratio and v1 validate together"""
        form, valid = form_for(overlap_ratio='-0.5', v1='1')
        assert valid, form.field_errors()

    def test_bad_float(self):
        """Test that unparsable numbers are reported"""
        form, valid = form_for(bg_rate='lots')
        assert not valid
        assert form.bg_rate.errors

    def test_seed_range(self):
        """Test the 64-bit seed bounds"""
        assert form_for(seed=str(2 ** 64 - 1))[1] is True
        assert form_for(seed=str(2 ** 64))[1] is False

    def test_bad_choice(self):
        """Test unknown scheme and log level names"""
        form, valid = form_for(scheme='tritter', log_level='LOUD')
        assert not valid
        assert {name for name, _ in form.field_errors()} == {'scheme', 'log_level'}


if __name__ == '__main__':
    pytest.main([__file__])
