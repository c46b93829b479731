"""
Scenario input validation
WTForms form for flat key=value scenarios plus small reusable validators
"""

import math
import logging
from typing import Dict, List, Optional, Tuple

from wtforms import Form, FloatField, IntegerField, SelectField, StringField
from wtforms.validators import NumberRange, Optional as OptionalValue, ValidationError

logger = logging.getLogger(__name__)

SCHEME_CHOICES = [('asym', 'asymmetric beam splitter'), ('noon', 'NOON projection')]
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
SPECTRAL_KEYS = ('sigma_p', 'sigma_f', 'delay_h', 'delay_v')
MAX_SEED = 2 ** 64 - 1


class InputValidator:
    """Input validation utilities"""

    @classmethod
    def validate_harmonics(cls, text: str) -> Tuple[bool, str]:
        """Comma separated positive harmonic orders, e.g. '1,3'"""
        if not text or not text.strip():
            return False, "Harmonics are required"
        try:
            orders = [int(part) for part in text.split(',') if part.strip()]
        except ValueError:
            return False, f"Harmonics must be integers, got '{text}'"
        if not orders:
            return False, "Harmonics are required"
        if any(k < 1 for k in orders):
            return False, "Harmonic orders must be positive"
        return True, ""

    @classmethod
    def validate_finite(cls, value: Optional[float], field_name: str) -> Tuple[bool, str]:
        if value is None:
            return True, ""
        if not math.isfinite(value):
            return False, f"{field_name} must be finite"
        return True, ""

    @classmethod
    def validate_output_path(cls, path: str) -> Tuple[bool, str]:
        if not path:
            return True, ""
        if '\x00' in path:
            return False, "Path contains a NUL character"
        return True, ""


def parse_harmonics(text: str) -> Tuple[int, ...]:
    valid, error = InputValidator.validate_harmonics(text)
    if not valid:
        raise ValueError(error)
    return tuple(sorted({int(part) for part in text.split(',') if part.strip()}))


def positive(form, field):
    if field.data is not None and not field.data > 0:
        raise ValidationError("Must be positive")


def finite(form, field):
    valid, error = InputValidator.validate_finite(field.data, field.name)
    if not valid:
        raise ValidationError(error)


def harmonic_list(form, field):
    valid, error = InputValidator.validate_harmonics(field.data)
    if not valid:
        raise ValidationError(error)


def usable_path(form, field):
    valid, error = InputValidator.validate_output_path(field.data)
    if not valid:
        raise ValidationError(error)


class _FormData(dict):
    """Plain mapping with the getlist() interface WTForms expects from request data"""

    def getlist(self, key: str) -> List[str]:
        return [self[key]] if key in self else []


class ScenarioForm(Form):
    """Every scenario key, its type and its range; cross-key rules live in validate_<key>"""

    scheme = SelectField(choices=SCHEME_CHOICES)
    phase_start = FloatField(validators=[finite])
    phase_stop = FloatField(validators=[finite])
    points = IntegerField(validators=[NumberRange(min=2, message="Phase grid needs at least %(min)s points")])

    sigma_p = FloatField(validators=[OptionalValue(), finite, positive])
    sigma_f = FloatField(validators=[OptionalValue(), finite, positive])
    delay_h = FloatField(validators=[OptionalValue(), finite])
    delay_v = FloatField(validators=[OptionalValue(), finite])
    overlap_ratio = FloatField(validators=[OptionalValue(), NumberRange(min=-1.0, max=1.0)])
    v1 = FloatField(validators=[OptionalValue(), NumberRange(min=0.0, max=1.0)])

    rate_scale = FloatField(validators=[OptionalValue(), finite, NumberRange(min=0.0)])
    peak_counts = FloatField(validators=[OptionalValue(), finite, positive])
    mean_counts = FloatField(validators=[OptionalValue(), finite, positive])
    duration = FloatField(validators=[finite, NumberRange(min=0.0)])
    bg_rate = FloatField(validators=[finite, NumberRange(min=0.0)])
    seed = IntegerField(validators=[NumberRange(min=0, max=MAX_SEED)])
    harmonics = StringField(validators=[OptionalValue(), harmonic_list])

    wavelength_nm = FloatField(validators=[finite, positive])
    quadrature_nodes = IntegerField(validators=[NumberRange(min=2, max=400)])

    output_dir = StringField(validators=[OptionalValue(), usable_path])
    log_level = SelectField(choices=[(level, level) for level in LOG_LEVELS])
    log_file = StringField(validators=[OptionalValue(), usable_path])

    @classmethod
    def from_values(cls, values: Dict[str, str]) -> 'ScenarioForm':
        return cls(formdata=_FormData(values))

    def _given(self, *names: str) -> List[str]:
        return [name for name in names if self[name].raw_data]

    def validate_phase_stop(self, field):
        if self.phase_start.data is not None and field.data is not None and field.data <= self.phase_start.data:
            raise ValidationError("phase_stop must be greater than phase_start")

    def validate_overlap_ratio(self, field):
        clash = self._given(*SPECTRAL_KEYS)
        if clash:
            raise ValidationError(f"overlap_ratio cannot be combined with spectral parameters ({', '.join(clash)})")

    def validate_sigma_p(self, field):
        if not self._given('sigma_f'):
            raise ValidationError("sigma_p requires sigma_f")

    def validate_sigma_f(self, field):
        if not self._given('sigma_p'):
            raise ValidationError("sigma_f requires sigma_p")

    def validate_delay_h(self, field):
        if not self._given('sigma_p', 'sigma_f'):
            raise ValidationError("delay_h requires sigma_p and sigma_f")

    def validate_delay_v(self, field):
        if not self._given('sigma_p', 'sigma_f'):
            raise ValidationError("delay_v requires sigma_p and sigma_f")

    def validate_v1(self, field):
        if not self._given('overlap_ratio', 'sigma_p', 'sigma_f'):
            raise ValidationError("v1 applies only with spectral parameters or overlap_ratio")

    def validate_peak_counts(self, field):
        if self._given('rate_scale'):
            raise ValidationError("peak_counts and rate_scale are mutually exclusive")

    def validate_mean_counts(self, field):
        clash = self._given('rate_scale', 'peak_counts')
        if clash:
            raise ValidationError(f"mean_counts and {clash[0]} are mutually exclusive")

    def field_errors(self) -> List[Tuple[str, str]]:
        """(field name, message) for every failed field, in declaration order"""
        return [(field.name, message) for field in self for message in field.errors]
