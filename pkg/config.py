"""
Scenario configuration
Flat key=value scenario files, command-line overrides and defaults
"""

import io
import os
import math
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from dotenv.parser import parse_stream

from schemes import SchemeKind, uniform_phase_grid
from spectral import OverlapIntegrals, QuadratureGrid, SpectralModel, overlap_integrals
from validation import ScenarioForm, parse_harmonics

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
OUTPUT_DIR_ENV = 'TRIPHOTON_OUTPUT_DIR'

CONFIG_KEYS = (
    'scheme', 'phase_start', 'phase_stop', 'points',
    'sigma_p', 'sigma_f', 'delay_h', 'delay_v', 'overlap_ratio', 'v1',
    'rate_scale', 'peak_counts', 'mean_counts', 'duration', 'bg_rate', 'seed', 'harmonics',
    'wavelength_nm', 'quadrature_nodes',
    'output_dir', 'log_level', 'log_file',
)

# output locations and logging never change a generated file
NON_ECHO_KEYS = ('output_dir', 'log_level', 'log_file')

DEFAULTS = {
    'scheme': 'asym',
    'phase_start': '0.0',
    'phase_stop': repr(2.0 * math.pi),
    'points': '25',
    'duration': '100.0',
    'bg_rate': '1.2',
    'seed': '0',
    'wavelength_nm': '780.0',
    'quadrature_nodes': '48',
    'log_level': 'INFO',
}

DEFAULT_HARMONICS = {
    SchemeKind.ASYMMETRIC_BS: (1, 3),
    SchemeKind.NOON_PROJECTION: (3,),
}

DEFAULT_RATE_SCALE = 1.0
DEFAULT_V1 = 1.0


class ConfigValidationError(ValueError):
    """Scenario rejected; diagnostics are (location, message) pairs"""

    def __init__(self, diagnostics: List[Tuple[str, str]]):
        self.diagnostics = list(diagnostics)
        detail = '; '.join(f"{location}: {message}" for location, message in self.diagnostics)
        super().__init__(f"Configuration validation failed: {detail}")


def _flag(key: str) -> str:
    return '--' + key.replace('_', '-')


def resolve_output_dir(cli_value: Optional[str] = None, file_value: Optional[str] = None,
                       environ: Optional[Mapping[str, str]] = None) -> Path:
    """--output-dir, then the scenario file, then TRIPHOTON_OUTPUT_DIR, then the working directory"""
    environ = os.environ if environ is None else environ
    for candidate in (cli_value, file_value, environ.get(OUTPUT_DIR_ENV)):
        if candidate:
            return Path(candidate)
    return Path.cwd()


def _line_of(binding) -> int:
    """Line of the key itself; the parser folds preceding blank lines into the binding"""
    raw = binding.original.string
    return binding.original.line + raw[:len(raw) - len(raw.lstrip())].count("\n")


def read_config_lines(text: str) -> Tuple[Dict[str, str], Dict[str, str], List[Tuple[str, str]]]:
    """Values, their 'line N' sources and parse diagnostics of a flat key=value text"""
    values, sources, diagnostics = {}, {}, []
    for binding in parse_stream(io.StringIO(text)):
        location = f"line {_line_of(binding)}"
        if binding.error:
            diagnostics.append((location, f"cannot parse '{binding.original.string.strip()}'"))
            continue
        if binding.key is None:
            continue
        if binding.key not in CONFIG_KEYS:
            diagnostics.append((location, f"unknown key '{binding.key}'"))
            continue
        if binding.value is None:
            diagnostics.append((location, f"'{binding.key}' has no value"))
            continue
        if binding.key in values:
            logger.warning(f"{location}: '{binding.key}' repeated, overriding {sources[binding.key]}")
        values[binding.key] = binding.value.strip()
        sources[binding.key] = location
    return values, sources, diagnostics


class SimulatorConfig:
    """Resolved scenario for the fringe and counts commands"""

    def __init__(self, config_file: Optional[str] = None, overrides: Optional[Mapping[str, object]] = None,
                 environ: Optional[Mapping[str, str]] = None, text: Optional[str] = None):
        self.config_file = config_file
        self.overrides = dict(overrides or {})
        self.environ = os.environ if environ is None else environ

        # Load scenario values
        self.load_config(text)

        # Validate them
        self.validate_config()

    def load_config(self, text: Optional[str] = None):
        """Defaults, then the scenario file, then command-line overrides"""
        self.raw = dict(DEFAULTS)
        self.sources = {key: 'default' for key in DEFAULTS}
        self.diagnostics = []

        if text is None and self.config_file:
            text = Path(self.config_file).read_text(encoding='utf-8')
            logger.debug(f"Read scenario file {self.config_file}")
        if text is not None:
            values, sources, diagnostics = read_config_lines(text)
            self.raw.update(values)
            self.sources.update(sources)
            self.diagnostics.extend(diagnostics)

        for key, value in self.overrides.items():
            if value is None:
                continue
            if key not in CONFIG_KEYS:
                self.diagnostics.append((_flag(key), "unknown option"))
                continue
            self.raw[key] = value if isinstance(value, str) else repr(value)
            self.sources[key] = _flag(key)

        # an empty value means "not given"
        self.raw = {key: value for key, value in self.raw.items() if value != ''}
        if 'log_level' in self.raw:
            self.raw['log_level'] = self.raw['log_level'].upper()

    def validate_config(self):
        """Run every key through ScenarioForm and collect all failures"""
        form = ScenarioForm.from_values(self.raw)
        valid = form.validate()
        errors = list(self.diagnostics)
        if not valid:
            errors += [(self.sources.get(name, name), f"{name}: {message}") for name, message in form.field_errors()]

        if errors:
            for location, message in errors:
                logger.error(f"Configuration error at {location}: {message}")
            raise ConfigValidationError(errors)

        self.values = {key: form[key].data for key in CONFIG_KEYS if key in self.raw}
        logger.info(f"Configuration validation passed ({self.scheme.value}, {'multimode' if self.is_multimode else 'ideal'})")

    @property
    def scheme(self) -> SchemeKind:
        return SchemeKind(self.values['scheme'])

    def phase_grid(self) -> List[float]:
        return uniform_phase_grid(self.values['points'], self.values['phase_start'], self.values['phase_stop'])

    @property
    def has_spectral_parameters(self) -> bool:
        return 'sigma_p' in self.values

    @property
    def is_multimode(self) -> bool:
        return self.has_spectral_parameters or 'overlap_ratio' in self.values

    @property
    def v1(self) -> float:
        return self.values.get('v1', DEFAULT_V1)

    def spectral_model(self) -> SpectralModel:
        if not self.has_spectral_parameters:
            raise ValueError("Scenario has no spectral parameters")
        return SpectralModel(
            pump_bandwidth=self.values['sigma_p'],
            filter_bandwidth=self.values['sigma_f'],
            delay_h=self.values.get('delay_h', 0.0),
            delay_v=self.values.get('delay_v', 0.0),
        )

    def overlaps(self) -> OverlapIntegrals:
        """A, E and v1 of a multimode scenario"""
        if 'overlap_ratio' in self.values:
            return OverlapIntegrals.from_ratio(self.values['overlap_ratio'], self.v1)
        quadrature = QuadratureGrid(nodes=self.values['quadrature_nodes'])
        return overlap_integrals(self.spectral_model(), quadrature, self.v1)

    @property
    def harmonics(self) -> Tuple[int, ...]:
        if 'harmonics' in self.values:
            return parse_harmonics(self.values['harmonics'])
        return DEFAULT_HARMONICS[self.scheme]

    @property
    def rate_scale(self) -> Optional[float]:
        """None when the scale is to be derived from peak_counts or mean_counts"""
        if 'peak_counts' in self.values or 'mean_counts' in self.values:
            return None
        return self.values.get('rate_scale', DEFAULT_RATE_SCALE)

    @property
    def peak_counts(self) -> Optional[float]:
        return self.values.get('peak_counts')

    @property
    def mean_counts(self) -> Optional[float]:
        """Signal counts per point at the mean fringe level, the fitted P40"""
        return self.values.get('mean_counts')

    @property
    def duration(self) -> float:
        return self.values['duration']

    @property
    def bg_rate(self) -> float:
        return self.values['bg_rate']

    @property
    def seed(self) -> int:
        return self.values['seed']

    @property
    def wavelength_nm(self) -> float:
        return self.values['wavelength_nm']

    @property
    def log_level(self) -> str:
        return self.values['log_level']

    @property
    def log_file(self) -> Optional[str]:
        return self.values.get('log_file')

    @property
    def output_dir(self) -> Path:
        return resolve_output_dir(self.overrides.get('output_dir'), self.raw.get('output_dir'), self.environ)

    def echo(self) -> List[Tuple[str, str]]:
        """Resolved key=value pairs that regenerate the same output when read back as a scenario file"""
        pairs = []
        for key in CONFIG_KEYS:
            if key in NON_ECHO_KEYS:
                continue
            if key == 'harmonics':
                pairs.append((key, ','.join(str(k) for k in self.harmonics)))
            elif key == 'rate_scale' and self.rate_scale is not None:
                pairs.append((key, repr(float(self.rate_scale))))
            elif key in self.values:
                pairs.append((key, _format_value(self.values[key])))
        return pairs


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
