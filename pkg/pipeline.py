"""
Command orchestration
Turns a resolved scenario into fringe scans, simulated counts and fit reports
"""

import functools
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from config import CONFIG_KEYS, LOG_FORMAT, DEFAULT_HARMONICS, SimulatorConfig
from experiment import (
    CountRecord, FitResult, fit_fringe, fit_harmonics, rate_scale_for_mean, rate_scale_for_peak, simulate_counts,
)
from io_formats import (
    COUNTS_KIND, FRINGE_KIND, Header, config_from_header, counts_header, detect_csv_kind, format_counts,
    format_fringe, parse_counts, parse_fringe,
)
from schemes import FringeSeries, SchemeKind, asym_fringe, noon_fringe
from spectral import p4_asym, p4_noon
from validation import parse_harmonics

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def handle_command_errors(func):
    """Decorator mapping command failures to exit codes: invalid input 2, numerical failure 3"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            result = func(*args, **kwargs)
        except ArithmeticError as e:
            logger.error(f"Numerical failure in {func.__name__}: {e}")
            return EXIT_NUMERICAL
        except (ValueError, OSError) as e:
            logger.error(f"Invalid input in {func.__name__}: {e}")
            return EXIT_VALIDATION
        return EXIT_OK if result is None else result
    return wrapper


def apply_logging_settings(config: SimulatorConfig, cli_level: Optional[str] = None,
                           cli_log_file: Optional[str] = None):
    """Scenario log_level and log_file take effect unless the command line already set them"""
    root = logging.getLogger()
    if not cli_level and config.sources.get('log_level', 'default') != 'default':
        root.setLevel(config.log_level)
    if not cli_log_file and config.log_file:
        handler = logging.FileHandler(config.log_file)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler.triphoton_owned = True
        root.addHandler(handler)
        logger.debug(f"Logging to {config.log_file}")


def build_fringe(config: SimulatorConfig) -> FringeSeries:
    """Ideal scenarios run the single-mode circuits; multimode ones use the overlap-integral curves"""
    grid = config.phase_grid()
    if not config.is_multimode:
        series = asym_fringe(grid) if config.scheme is SchemeKind.ASYMMETRIC_BS else noon_fringe(grid)
        return series.with_wavelength(config.wavelength_nm)

    overlaps = config.overlaps()
    curve = p4_asym if config.scheme is SchemeKind.ASYMMETRIC_BS else p4_noon
    values = curve(grid, overlaps)
    logger.info(f"Multimode {config.scheme.value} scan: E/A={overlaps.ratio:.6f}, v1={overlaps.v1:.4f}")
    return FringeSeries(
        tuple(grid), tuple(float(v) for v in values),
        {"scheme": config.scheme.value, "model": "multimode", "normalization": "rate",
         "photon_number": "3", "overlap_ratio_resolved": repr(float(overlaps.ratio))},
    ).with_wavelength(config.wavelength_nm)


def fringe_header(config: SimulatorConfig, series: FringeSeries) -> Header:
    header = list(config.echo())
    for key in ("model", "normalization", "overlap_ratio_resolved", "path_difference_per_rad"):
        if key in series.metadata:
            header.append((key, series.metadata[key]))
    return header


def build_counts(config: SimulatorConfig) -> Tuple[FringeSeries, List[CountRecord]]:
    curve = build_fringe(config)
    rate_scale = config.rate_scale
    if rate_scale is None and config.mean_counts is not None:
        rate_scale = rate_scale_for_mean(curve, config.mean_counts, config.duration)
        logger.info(f"Rate scale {rate_scale:.6g} gives {config.mean_counts:g} signal counts at the mean level")
    elif rate_scale is None:
        rate_scale = rate_scale_for_peak(curve, config.peak_counts, config.duration)
        logger.info(f"Rate scale {rate_scale:.6g} gives {config.peak_counts:g} signal counts at the fringe maximum")
    records = simulate_counts(curve, rate_scale, config.duration, config.bg_rate, config.seed)
    return curve, records


def fringe_text(config: SimulatorConfig) -> str:
    series = build_fringe(config)
    return format_fringe(series, fringe_header(config, series))


def counts_text(config: SimulatorConfig) -> str:
    _, records = build_counts(config)
    return format_counts(records, counts_header(config.echo()))


def scenario_from_header(header: Header) -> Optional[SimulatorConfig]:
    """Scenario echoed in a file header, or None for a bare CSV"""
    text = config_from_header(header, CONFIG_KEYS)
    if not text:
        return None
    return SimulatorConfig(text=text)


def harmonics_for(header: Header, requested: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
    """Requested harmonics, else those of the echoed scheme, else {1, 3}"""
    if requested:
        return tuple(sorted(set(requested)))
    values = dict(header)
    if 'harmonics' in values:
        return parse_harmonics(values['harmonics'])
    if 'scheme' in values:
        return DEFAULT_HARMONICS[SchemeKind(values['scheme'])]
    return DEFAULT_HARMONICS[SchemeKind.ASYMMETRIC_BS]


def fit_text(text: str, requested: Optional[Sequence[int]] = None) -> Tuple[str, Header, FitResult]:
    """Fit a counts file with Poisson weights, or a fringe file with uniform weights"""
    kind = detect_csv_kind(text)
    if kind == COUNTS_KIND:
        header, records = parse_counts(text)
        harmonics = harmonics_for(header, requested)
        return kind, header, fit_fringe(records, harmonics)

    header, series = parse_fringe(text)
    harmonics = harmonics_for(header, requested)
    result = fit_harmonics(series.phases, series.values, harmonics)
    logger.info(f"Fringe fit: P40={result.P40:.6g} V3={result.V3:.6f} V1={result.V1:.6f}")
    return FRINGE_KIND, header, result


def output_path(directory: Path, explicit: Optional[str], default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    return Path(directory) / default_name
