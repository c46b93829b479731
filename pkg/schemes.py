"""
Projection-measurement schemes
Asymmetric beam-splitter scheme and NOON-state projection, both built from fock_core primitives,
plus the ideal single-mode fringe scans they produce
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import qr

from fock_core import (
    DetectorWiring, Detector, FockVector, ModeLabel, ModeTransform, PhotonNumberError, PureState,
    apply_chain, balanced_fanout, compose, detector_coincidence_probability, fock_state,
    inner_product, make_phase_shift, make_polarization_rotation, make_polarizing_splitter,
    make_unitary, mode, mode_pattern_correlation, noon_state,
)

logger = logging.getLogger(__name__)

ASYM_ROTATION = math.acos(1.0 / math.sqrt(3.0))
NOON_PRE_ROTATION = math.pi / 4
NOON_ARM_ROTATION = math.pi / 4
NOON_PROJECTION_SCALE = 1.0 / 18.0

INPUT_PATH = "a"
NOON_ARMS = ("a", "b", "c")

ASYM_OUTPUT_PATTERN = FockVector.of({mode("e", "H"): 1, mode("f", "V"): 2})


class SchemeKind(Enum):
    ASYMMETRIC_BS = "asym"
    NOON_PROJECTION = "noon"


class Normalization(Enum):
    CORRELATION = "correlation"   # normally ordered moment of the two output modes
    PROBABILITY = "probability"   # three-detector coincidence probability


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection with its polarization rotation"""
    kind: SchemeKind
    phase: float = 0.0
    rotation_alpha: Optional[float] = None

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if self.rotation_alpha is None:
            default = ASYM_ROTATION if kind is SchemeKind.ASYMMETRIC_BS else NOON_PRE_ROTATION
            object.__setattr__(self, 'rotation_alpha', default)


@dataclass(frozen=True)
class FringeSeries:
    """Coincidence values over a phase scan"""
    phases: Tuple[float, ...]
    values: Tuple[float, ...]
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        phases = tuple(float(p) for p in self.phases)
        values = [float(v) for v in self.values]
        if len(phases) != len(values):
            raise ValueError(f"{len(phases)} phases but {len(values)} values")
        for i, v in enumerate(values):
            if v < -1e-12:
                raise ValueError(f"Fringe value at index {i} is negative: {v}")
            values[i] = max(v, 0.0)
        object.__setattr__(self, 'phases', phases)
        object.__setattr__(self, 'values', tuple(values))

    def with_wavelength(self, wavelength: float) -> 'FringeSeries':
        """Copy labelled with the wavelength that converts its phases to path differences"""
        metadata = dict(self.metadata)
        metadata["wavelength_nm"] = repr(float(wavelength))
        metadata["path_difference_per_rad"] = repr(float(phase_to_path_difference(1.0, wavelength)))
        return FringeSeries(self.phases, self.values, metadata)

    def path_differences(self, wavelength: Optional[float] = None) -> np.ndarray:
        if wavelength is None:
            if "wavelength_nm" not in self.metadata:
                raise ValueError("Series carries no wavelength label")
            wavelength = float(self.metadata["wavelength_nm"])
        return phase_to_path_difference(np.asarray(self.phases), wavelength)

    @property
    def maximum(self) -> float:
        return max(self.values) if self.values else 0.0


def phase_to_path_difference(phase, wavelength: float):
    """Delta = phi lambda / 2 pi, in the units of wavelength"""
    return phase * wavelength / (2.0 * math.pi)


def de_broglie_fringe(delta, wavelength: float, photon_number: int):
    """Reference N-photon fringe 1 + cos(2 pi N delta / lambda)"""
    return 1.0 + np.cos(2.0 * math.pi * photon_number * np.asarray(delta) / wavelength)


def fringe_visibility(values: Sequence[float]) -> float:
    high, low = float(np.max(values)), float(np.min(values))
    if high + low == 0.0:
        return 0.0
    return (high - low) / (high + low)


def harmonic_content(values: Sequence[float]) -> np.ndarray:
    """
    Magnitudes of the cosine/sine amplitude at each harmonic for samples on a uniform
    grid covering one 2 pi period; index 0 is the mean
    """
    samples = np.asarray(values, dtype=float)
    spectrum = np.fft.rfft(samples) / samples.size
    magnitudes = np.abs(spectrum)
    magnitudes[1:] *= 2.0
    if samples.size % 2 == 0:
        magnitudes[-1] /= 2.0
    return magnitudes


def uniform_phase_grid(points: int, start: float = 0.0, stop: float = 2.0 * math.pi) -> List[float]:
    """points phases on [start, stop), stop excluded"""
    if points < 1:
        raise ValueError(f"Phase grid needs at least one point, got {points}")
    return np.linspace(start, stop, points, endpoint=False).tolist()


def asymmetric_output_amplitudes(T: float) -> Dict[Tuple[int, int], float]:
    """Closed-form output amplitudes of |2,1> through a splitter of transmissivity T"""
    R = 1.0 - T
    return {
        (3, 0): math.sqrt(3.0 * T * T * R),
        (0, 3): math.sqrt(3.0 * T * R * R),
        (2, 1): math.sqrt(T) * (T - 2.0 * R),
        (1, 2): math.sqrt(R) * (R - 2.0 * T),
    }


def heralded_input_state(path: str = INPUT_PATH) -> PureState:
    """|2_H, 1_V> in one spatial path"""
    return fock_state({mode(path, "H"): 2, mode(path, "V"): 1})


def build_asym_scheme(phi: float, alpha: float = ASYM_ROTATION) -> Tuple[Tuple[ModeTransform, ...], DetectorWiring]:
    """Rotation, phase on V, rotation and polarizing splitter; A on the H output, B and C behind a fan-out of V"""
    h_mode, v_mode = mode(INPUT_PATH, "H"), mode(INPUT_PATH, "V")
    chain = (
        make_polarization_rotation(alpha, INPUT_PATH),
        make_phase_shift(phi, [v_mode], modes=[h_mode, v_mode]),
        make_polarization_rotation(alpha, INPUT_PATH),
        make_polarizing_splitter(INPUT_PATH, "e", "f"),
    )
    detectors = [Detector("A", (mode("e", "H"),), number_resolving=False)]
    detectors += balanced_fanout(["B", "C"], mode("f", "V"))
    wiring = DetectorWiring.create(detectors, {"A": 1, "B": 1, "C": 1})
    return chain, wiring


def asym_fringe(phi_grid: Sequence[float], alpha: float = ASYM_ROTATION,
                normalization: Normalization = Normalization.CORRELATION) -> FringeSeries:
    """Ideal scheme-1 scan; the default reports the normally ordered correlation of the two outputs"""
    if len(phi_grid) == 0:
        raise ValueError("Phase grid is empty")

    normalization = Normalization(normalization)
    source = heralded_input_state()
    values = []
    for phi in phi_grid:
        chain, wiring = build_asym_scheme(phi, alpha)
        output = apply_chain(source, chain)
        if normalization is Normalization.CORRELATION:
            values.append(mode_pattern_correlation(output, ASYM_OUTPUT_PATTERN))
        else:
            values.append(detector_coincidence_probability(output, wiring))

    logger.debug(f"Scheme-1 scan over {len(values)} phases, alpha={math.degrees(alpha):.4f} deg")
    return FringeSeries(
        tuple(phi_grid), tuple(values),
        {"scheme": SchemeKind.ASYMMETRIC_BS.value, "model": "ideal",
         "normalization": normalization.value, "photon_number": "3"},
    )


def symmetric_tritter() -> np.ndarray:
    """
    Real 3x3 orthogonal matrix whose first column is uniform 1/sqrt(3), completed by Gram-Schmidt
    on the remaining unit vectors
    """
    seed = np.eye(3)
    seed[:, 0] = 1.0 / math.sqrt(3.0)
    q, r = qr(seed)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _arm_splitter() -> ModeTransform:
    split = symmetric_tritter()
    modes = [mode(p, "H") for p in NOON_ARMS] + [mode(p, "V") for p in NOON_ARMS]
    block = np.zeros((6, 6))
    block[:3, :3] = split
    block[3:, 3:] = split
    return make_unitary(modes, block, "1->3 splitter")


def _arm_phases() -> ModeTransform:
    targets = [mode(p, "V") for p in NOON_ARMS]
    diagonal = [np.exp(2j * math.pi * k / 3.0) for k in range(len(NOON_ARMS))]
    return make_unitary(targets, np.diag(diagonal), "arm phases 0, 2pi/3, 4pi/3")


def build_noon_scheme(phi: float, pre_rotation: float = NOON_PRE_ROTATION) -> Tuple[Tuple[ModeTransform, ...], DetectorWiring]:
    """Pre-rotation, phase, 1->3 split, stepped arm phases and a 135 degree polarizer per arm"""
    h_mode, v_mode = mode(INPUT_PATH, "H"), mode(INPUT_PATH, "V")
    polarizers = compose(*(
        make_polarization_rotation(NOON_ARM_ROTATION, arm).then(
            make_polarizing_splitter(arm, f"det_{arm}", f"dump_{arm}"))
        for arm in NOON_ARMS
    ))
    chain = (
        make_polarization_rotation(pre_rotation, INPUT_PATH),
        make_phase_shift(phi, [v_mode], modes=[h_mode, v_mode]),
        _arm_splitter(),
        _arm_phases(),
        polarizers,
    )
    detectors = [Detector(name, (mode(f"det_{arm}", "H"),), number_resolving=False)
                 for name, arm in zip("ABC", NOON_ARMS)]
    wiring = DetectorWiring.create(detectors, {"A": 1, "B": 1, "C": 1})
    return chain, wiring


def build_scheme(config: SchemeConfig) -> Tuple[Tuple[ModeTransform, ...], DetectorWiring]:
    if config.kind is SchemeKind.ASYMMETRIC_BS:
        return build_asym_scheme(config.phase, config.rotation_alpha)
    return build_noon_scheme(config.phase, config.rotation_alpha)


def _check_two_mode_triplet(state: PureState) -> Tuple[ModeLabel, ModeLabel]:
    if state.photon_number != 3:
        raise PhotonNumberError(f"NOON_3 projection needs 3 photons, state has {state.photon_number}")
    if len(state.modes) != 2 or state.modes[0].spatial_path != state.modes[1].spatial_path:
        raise ValueError(f"NOON_3 projection needs the (H, V) modes of one path, got {[str(m) for m in state.modes]}")
    return state.modes[0], state.modes[1]


def noon_projection_prob(state: PureState) -> float:
    """(1/18)|<NOON_3|state>|^2 with NOON_3 = (|3_H,0_V> - |0_H,3_V>)/sqrt(2)"""
    h_mode, v_mode = _check_two_mode_triplet(state)
    overlap = inner_product(noon_state(3, h_mode, v_mode), state)
    return NOON_PROJECTION_SCALE * abs(overlap) ** 2


def noon_circuit_probability(state: PureState, phi: float = 0.0, pre_rotation: float = 0.0) -> float:
    """Triple coincidence of the explicit projection circuit for a state in the input path"""
    h_mode, _ = _check_two_mode_triplet(state)
    if h_mode.spatial_path != INPUT_PATH:
        raise ValueError(f"Circuit input path is '{INPUT_PATH}', state lives in '{h_mode.spatial_path}'")
    chain, wiring = build_noon_scheme(phi, pre_rotation)
    return detector_coincidence_probability(apply_chain(state, chain), wiring)


def noon_fringe(phi_grid: Sequence[float], pre_rotation: float = NOON_PRE_ROTATION) -> FringeSeries:
    """Ideal NOON-projection scan of the rotated heralded state"""
    if len(phi_grid) == 0:
        raise ValueError("Phase grid is empty")

    source = heralded_input_state()
    values = [noon_circuit_probability(source, phi, pre_rotation) for phi in phi_grid]
    return FringeSeries(
        tuple(phi_grid), tuple(values),
        {"scheme": SchemeKind.NOON_PROJECTION.value, "model": "ideal",
         "normalization": Normalization.PROBABILITY.value, "photon_number": "3"},
    )
