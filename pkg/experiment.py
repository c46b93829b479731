"""
Photon-counting simulation and fringe fitting
Poisson counts with a flat background, background subtraction and harmonic least squares
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from schemes import FringeSeries

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"
VARIANCE_FLOOR = 1.0
MAX_SEED = 2 ** 64 - 1
CONDITION_LIMIT = 1e12
VISIBILITY_SLACK = 1e-9


class SingularFitError(ArithmeticError):
    """Design matrix of a fringe fit is rank deficient"""


@dataclass(frozen=True)
class CountRecord:
    """Detector counts integrated at one phase setting"""
    phase: float
    duration: float
    raw_counts: int
    background_estimate: float

    def __post_init__(self):
        if isinstance(self.raw_counts, bool) or int(self.raw_counts) != self.raw_counts or self.raw_counts < 0:
            raise ValueError(f"raw_counts must be a non-negative integer, got {self.raw_counts!r}")
        if not self.duration >= 0:
            raise ValueError(f"duration must be non-negative, got {self.duration}")
        object.__setattr__(self, 'raw_counts', int(self.raw_counts))

    @property
    def corrected(self) -> float:
        return self.raw_counts - self.background_estimate


@dataclass(frozen=True, eq=False)
class CorrectedSeries:
    phases: np.ndarray
    values: np.ndarray
    variances: np.ndarray


@dataclass(frozen=True, eq=False)
class FitResult:
    """Harmonic fit of a fringe scan; each V_k is the k-th harmonic amplitude over the mean P40, clipped to [0, 1]"""
    P40: float
    V3: float
    V1: float
    phi0: float
    chi2: float
    dof: int
    covariance: np.ndarray
    parameter_names: Tuple[str, ...]
    coefficients: np.ndarray
    harmonics: Tuple[int, ...]
    stderr: Dict[str, float] = field(default_factory=dict)

    def to_report(self) -> Dict[str, object]:
        return {
            "P40": self.P40,
            "V3": self.V3,
            "V1": self.V1,
            "phi0": self.phi0,
            "chi2": self.chi2,
            "dof": self.dof,
            "covariance": self.covariance.tolist(),
        }


def point_generator(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one phase point, derived from (seed, index)"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def rate_scale_for_peak(curve: FringeSeries, peak_counts: float, duration: float) -> float:
    """Rate scale at which the curve maximum yields peak_counts signal counts per point"""
    if curve.maximum <= 0.0 or duration <= 0.0:
        raise ValueError("Peak scaling needs a curve with a positive maximum and a positive duration")
    return peak_counts / (curve.maximum * duration)


def rate_scale_for_mean(curve: FringeSeries, mean_counts: float, duration: float) -> float:
    """
    Rate scale at which the curve mean yields mean_counts signal counts per point.

    On a grid spanning whole periods the curve mean is the constant term, so mean_counts is the fitted P40.
    """
    level = float(np.mean(curve.values)) if curve.values else 0.0
    if level <= 0.0 or duration <= 0.0:
        raise ValueError("Mean scaling needs a curve with a positive mean and a positive duration")
    return mean_counts / (level * duration)


def simulate_counts(curve: FringeSeries, rate_scale: float, duration: float, bg_rate: float,
                    seed: int) -> List[CountRecord]:
    """Poisson counts with mean (rate_scale value + bg_rate) duration at every phase"""
    for name, value in (("rate_scale", rate_scale), ("duration", duration), ("bg_rate", bg_rate)):
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit non-negative integer, got {seed}")

    background = bg_rate * duration
    records = []
    for index, (phase, value) in enumerate(zip(curve.phases, curve.values)):
        mean = (rate_scale * value + bg_rate) * duration
        raw = int(point_generator(seed, index).poisson(mean)) if mean > 0 else 0
        records.append(CountRecord(phase, duration, raw, background))

    logger.debug(f"Simulated {len(records)} points, seed={seed}, rng={RNG_ALGORITHM}")
    return records


def subtract_background(records: Iterable[CountRecord]) -> CorrectedSeries:
    """Raw counts minus background, negative values kept"""
    records = list(records)
    phases = np.array([r.phase for r in records], dtype=float)
    values = np.array([r.corrected for r in records], dtype=float)
    variances = np.maximum(np.array([r.raw_counts for r in records], dtype=float), VARIANCE_FLOOR)
    return CorrectedSeries(phases, values, variances)


def fringe_model(phases, P40: float, V3: float, V1: float = 0.0, phi0: float = 0.0):
    """P40 [1 + V3 cos 3(phi + phi0) + V1 cos phi]"""
    phases = np.asarray(phases, dtype=float)
    return P40 * (1.0 + V3 * np.cos(3.0 * (phases + phi0)) + V1 * np.cos(phases))


def design_matrix(phases: np.ndarray, harmonics: Sequence[int]) -> Tuple[np.ndarray, Tuple[str, ...]]:
    columns = [np.ones_like(phases)]
    names = ["a0"]
    for k in harmonics:
        columns += [np.cos(k * phases), np.sin(k * phases)]
        names += [f"a{k}", f"b{k}"]
    return np.column_stack(columns), tuple(names)


def _normalize_harmonics(harmonics: Iterable[int]) -> Tuple[int, ...]:
    ordered = tuple(sorted(set(int(k) for k in harmonics)))
    if not ordered or any(k < 1 for k in ordered):
        raise ValueError(f"Harmonics must be a nonempty set of positive integers, got {ordered}")
    return ordered


def _weighted_solve(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    root = np.sqrt(weights)
    Xw = X * root[:, None]
    if np.linalg.matrix_rank(Xw) < X.shape[1] or np.linalg.cond(Xw) > CONDITION_LIMIT:
        raise SingularFitError(f"Design matrix is singular for {X.shape[0]} points and {X.shape[1]} parameters")
    coefficients, _, _, _ = linalg.lstsq(Xw, y * root)
    covariance = linalg.inv(Xw.T @ Xw)
    return coefficients, 0.5 * (covariance + covariance.T)


def _derived(coefficients: np.ndarray, covariance: np.ndarray, harmonics: Tuple[int, ...]):
    a0 = coefficients[0]
    amplitudes = {}
    for i, k in enumerate(harmonics):
        amplitudes[k] = (coefficients[1 + 2 * i], coefficients[2 + 2 * i], 1 + 2 * i)

    if a0 <= 0.0:
        if all(a == 0.0 and b == 0.0 for a, b, _ in amplitudes.values()) and a0 == 0.0:
            visibilities = {k: 0.0 for k in harmonics}
        else:
            raise SingularFitError(f"Fitted mean level {a0:.6g} is not positive; visibilities undefined")
    else:
        visibilities = {}
        for k, (a, b, _) in amplitudes.items():
            value = math.hypot(a, b) / a0
            if value > 1.0 + VISIBILITY_SLACK:
                logger.warning(f"Fitted V{k}={value:.4f} exceeds 1, clipped")
            visibilities[k] = min(value, 1.0)

    phase_harmonic = 3 if 3 in harmonics else max(harmonics)
    a, b, column = amplitudes[phase_harmonic]
    phi0 = math.atan2(-b, a) / phase_harmonic + 0.0

    stderr = {"P40": math.sqrt(covariance[0, 0])}
    for k, (a, b, column) in amplitudes.items():
        r = math.hypot(a, b)
        if r == 0.0 or a0 <= 0.0:
            stderr[f"V{k}"] = float('nan')
            continue
        gradient = np.zeros(len(coefficients))
        gradient[0] = -r / a0 ** 2
        gradient[column] = a / (r * a0)
        gradient[column + 1] = b / (r * a0)
        stderr[f"V{k}"] = math.sqrt(gradient @ covariance @ gradient)
        if k == phase_harmonic:
            phase_gradient = np.zeros(len(coefficients))
            phase_gradient[column] = b / (r ** 2 * k)
            phase_gradient[column + 1] = -a / (r ** 2 * k)
            stderr["phi0"] = math.sqrt(phase_gradient @ covariance @ phase_gradient)
    return visibilities, phi0, stderr


def fit_harmonics(phases: Sequence[float], values: Sequence[float], harmonics: Iterable[int] = (1, 3),
                  weights: Optional[Sequence[float]] = None,
                  chi2_variances: Optional[Sequence[float]] = None) -> FitResult:
    """
    Weighted linear least squares on {1, cos k phi, sin k phi}.

    weights default to one; chi2 uses chi2_variances when given, 1/weights otherwise.
    """
    harmonics = _normalize_harmonics(harmonics)
    phases = np.asarray(phases, dtype=float)
    values = np.asarray(values, dtype=float)
    if phases.shape != values.shape:
        raise ValueError(f"{phases.size} phases but {values.size} values")

    X, names = design_matrix(phases, harmonics)
    if phases.size < X.shape[1]:
        raise SingularFitError(f"{phases.size} points cannot determine {X.shape[1]} parameters")

    period = 2.0 * math.pi / min(harmonics)
    span = np.ptp(phases) * phases.size / max(phases.size - 1, 1)
    if span < period - 1e-9:
        logger.warning(f"Phase points span {span:.4f} rad, less than one period {period:.4f} rad")

    w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    coefficients, covariance = _weighted_solve(X, values, w)
    residuals = values - X @ coefficients
    variances = 1.0 / w if chi2_variances is None else np.asarray(chi2_variances, dtype=float)
    chi2 = float(np.sum(residuals ** 2 / variances))

    visibilities, phi0, stderr = _derived(coefficients, covariance, harmonics)
    return FitResult(
        P40=float(coefficients[0]),
        V3=float(visibilities.get(3, 0.0)),
        V1=float(visibilities.get(1, 0.0)),
        phi0=float(phi0),
        chi2=chi2,
        dof=int(phases.size - X.shape[1]),
        covariance=covariance,
        parameter_names=names,
        coefficients=coefficients,
        harmonics=harmonics,
        stderr=stderr,
    )


def fit_fringe(records: Sequence[CountRecord], harmonics: Iterable[int] = (1, 3)) -> FitResult:
    """
    Fit background-subtracted counts.

    Weights come from an unweighted first pass evaluated on the raw scale; chi2 uses the raw
    counts as Poisson variances. Both carry a floor of one count.
    """
    series = subtract_background(records)
    harmonics = _normalize_harmonics(harmonics)
    background = np.array([r.background_estimate for r in records], dtype=float)

    first = fit_harmonics(series.phases, series.values, harmonics)
    X, _ = design_matrix(series.phases, harmonics)
    expected_raw = np.maximum(X @ first.coefficients + background, VARIANCE_FLOOR)

    result = fit_harmonics(series.phases, series.values, harmonics,
                           weights=1.0 / expected_raw, chi2_variances=series.variances)
    logger.info(f"Fringe fit: P40={result.P40:.2f} V3={result.V3:.4f} V1={result.V1:.4f} "
                f"chi2={result.chi2:.2f}/{result.dof}")
    return result
