"""
Fock-space engine for passive linear optics
Multi-photon states over labelled modes, unitary mode transforms and photon-counting projections
"""

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import multinomial
from thewalrus import perm

logger = logging.getLogger(__name__)

UNITARITY_TOLERANCE = 1e-10
RATIO_TOLERANCE = 1e-12
AMPLITUDE_CUTOFF = 1e-15


class UnknownModeError(ValueError):
    """A mode label is not part of the transform, state or wiring it was used with"""


class PhotonNumberError(ValueError):
    """Photon numbers of two objects that must agree do not"""


class NonUnitaryError(ValueError):
    """Matrix handed to a ModeTransform is not unitary"""

    def __init__(self, max_deviation: float, description: str = ""):
        self.max_deviation = max_deviation
        label = f" '{description}'" if description else ""
        super().__init__(
            f"Transform{label} is not unitary: max |M M^dagger - I| = {max_deviation:.3e} "
            f"(tolerance {UNITARITY_TOLERANCE:.0e})"
        )


class Polarization(str, Enum):
    H = "H"
    V = "V"


class PhaseConvention(Enum):
    """Sign pattern of the 2x2 beam-splitter matrix"""
    REAL = "real"            # [[t, r], [-r, t]]
    SYMMETRIC = "symmetric"  # [[t, i r], [i r, t]]
    REAL_ALT = "real_alt"    # [[t, -r], [r, t]]


@dataclass(frozen=True, order=True)
class ModeLabel:
    """One optical mode: spatial path plus polarization"""
    spatial_path: str
    polarization: Polarization = Polarization.H

    def __post_init__(self):
        if not self.spatial_path:
            raise ValueError("Mode label needs a spatial path")
        object.__setattr__(self, 'polarization', Polarization(self.polarization))

    def __str__(self) -> str:
        return f"{self.spatial_path}{self.polarization.value}"


def mode(spatial_path: str, polarization: str = "H") -> ModeLabel:
    return ModeLabel(spatial_path, Polarization(polarization))


@dataclass(frozen=True)
class FockVector:
    """Occupation-number basis vector; zero occupations are dropped"""
    occupations: Tuple[Tuple[ModeLabel, int], ...]

    def __post_init__(self):
        counts: Dict[ModeLabel, int] = {}
        for label, count in self.occupations:
            if not isinstance(label, ModeLabel):
                raise TypeError(f"Expected ModeLabel, got {type(label).__name__}")
            if isinstance(count, bool) or not isinstance(count, (int, np.integer)):
                raise ValueError(f"Occupation of {label} must be an integer, got {count!r}")
            if count < 0:
                raise ValueError(f"Occupation of {label} must be non-negative, got {count}")
            if label in counts:
                raise ValueError(f"Mode {label} listed twice")
            counts[label] = int(count)
        object.__setattr__(
            self, 'occupations', tuple(sorted((m, c) for m, c in counts.items() if c > 0))
        )

    @classmethod
    def of(cls, counts: Mapping[ModeLabel, int]) -> 'FockVector':
        return cls(tuple(counts.items()))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.occupations)

    @property
    def modes(self) -> Tuple[ModeLabel, ...]:
        return tuple(m for m, _ in self.occupations)

    def count(self, label: ModeLabel) -> int:
        for m, c in self.occupations:
            if m == label:
                return c
        return 0

    def factorial_weight(self) -> int:
        """Product of n! over occupied modes"""
        return math.prod(math.factorial(c) for _, c in self.occupations)

    def __str__(self) -> str:
        if not self.occupations:
            return "|vac>"
        return "|" + ",".join(f"{c}_{m}" for m, c in self.occupations) + ">"


def basis_patterns(modes: Sequence[ModeLabel], photon_number: int) -> Iterator[FockVector]:
    """Every Fock vector with the given photon number over the given modes"""
    for chosen in itertools.combinations_with_replacement(range(len(modes)), photon_number):
        counts = Counter(chosen)
        yield FockVector(tuple((modes[i], k) for i, k in counts.items()))


@dataclass(frozen=True)
class PureState:
    """Normalized superposition of Fock vectors sharing one photon number"""
    modes: Tuple[ModeLabel, ...]
    terms: Tuple[Tuple[FockVector, complex], ...]
    norm_drift: float = 0.0

    @classmethod
    def from_amplitudes(cls, amplitudes: Mapping[FockVector, complex],
                        modes: Optional[Iterable[ModeLabel]] = None,
                        normalize: bool = True) -> 'PureState':
        if not amplitudes:
            raise ValueError("A state needs at least one basis vector")

        numbers = {vector.total for vector in amplitudes}
        if len(numbers) != 1:
            raise PhotonNumberError(f"Basis vectors carry different photon numbers: {sorted(numbers)}")

        if modes is None:
            mode_set = sorted({m for vector in amplitudes for m in vector.modes})
        else:
            mode_set = sorted(set(modes))
        if not mode_set:
            raise ValueError("A state needs at least one mode")

        outside = {m for vector in amplitudes for m in vector.modes} - set(mode_set)
        if outside:
            raise UnknownModeError(f"Basis vectors use modes outside the state: {sorted(map(str, outside))}")

        values = {vector: complex(amp) for vector, amp in amplitudes.items()}
        norm_sq = sum(abs(a) ** 2 for a in values.values())
        if norm_sq == 0.0:
            raise ValueError("Cannot build a state with zero norm")

        drift = abs(1.0 - norm_sq)
        if normalize:
            scale = 1.0 / math.sqrt(norm_sq)
            values = {vector: a * scale for vector, a in values.items()}

        terms = tuple(sorted(values.items(), key=lambda item: item[0].occupations))
        return cls(tuple(mode_set), terms, drift)

    @property
    def photon_number(self) -> int:
        return self.terms[0][0].total

    @property
    def amplitudes(self) -> Dict[FockVector, complex]:
        return dict(self.terms)

    def amplitude(self, vector: FockVector) -> complex:
        for v, a in self.terms:
            if v == vector:
                return a
        return 0j

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for _, a in self.terms))

    def __str__(self) -> str:
        return " + ".join(f"({a.real:.6g}{a.imag:+.6g}j){v}" for v, a in self.terms)


def fock_state(counts: Mapping[ModeLabel, int], modes: Optional[Iterable[ModeLabel]] = None) -> PureState:
    """Single basis state; modes default to every key of counts, zeros included"""
    mode_set = list(modes) if modes is not None else list(counts)
    return PureState.from_amplitudes({FockVector.of(counts): 1.0}, mode_set)


def superposition(coefficients: Sequence[complex], mode_a: ModeLabel, mode_b: ModeLabel,
                  normalize: bool = True) -> PureState:
    """sum_k c_k |N-k, k> over two modes, N = len(coefficients) - 1"""
    n = len(coefficients) - 1
    if n < 0:
        raise ValueError("At least one coefficient is required")
    amplitudes = {
        FockVector.of({mode_a: n - k, mode_b: k}): c
        for k, c in enumerate(coefficients) if c != 0
    }
    return PureState.from_amplitudes(amplitudes, (mode_a, mode_b), normalize=normalize)


def noon_state(n: int, mode_a: ModeLabel, mode_b: ModeLabel, relative: complex = -1.0) -> PureState:
    """(|N,0> + relative |0,N>)/sqrt(2); the default relative sign gives (|N,0> - |0,N>)/sqrt(2)"""
    if n < 1:
        raise ValueError(f"NOON state needs N >= 1, got {n}")
    coefficients = [0j] * (n + 1)
    coefficients[0] = 1.0
    coefficients[n] = relative
    return superposition(coefficients, mode_a, mode_b)


def unitarity_deviation(matrix: np.ndarray) -> float:
    product = matrix @ matrix.conj().T
    return float(np.max(np.abs(product - np.eye(matrix.shape[0]))))


@dataclass(frozen=True, eq=False)
class ModeTransform:
    """Unitary acting on annihilation operators, out = M in (rows outputs, columns inputs)"""
    modes: Tuple[ModeLabel, ...]
    matrix: np.ndarray
    description: str = ""

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("A transform needs at least one mode")
        if len(set(modes)) != len(modes):
            raise ValueError(f"Duplicate mode labels in transform '{self.description}'")

        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (len(modes), len(modes)):
            raise ValueError(
                f"Transform '{self.description}' has shape {matrix.shape} for {len(modes)} modes"
            )

        deviation = unitarity_deviation(matrix)
        if deviation > UNITARITY_TOLERANCE:
            raise NonUnitaryError(deviation, self.description)

        matrix.setflags(write=False)
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, 'matrix', matrix)

    def index(self, label: ModeLabel) -> int:
        try:
            return self.modes.index(label)
        except ValueError:
            raise UnknownModeError(f"Mode {label} is not part of transform '{self.description}'") from None

    def embed(self, modes: Iterable[ModeLabel]) -> 'ModeTransform':
        """Same action on a larger mode set, identity on the added modes"""
        ordered = list(self.modes) + [m for m in modes if m not in self.modes]
        size = len(ordered)
        matrix = np.eye(size, dtype=complex)
        k = len(self.modes)
        matrix[:k, :k] = self.matrix
        return ModeTransform(tuple(ordered), matrix, self.description)

    def then(self, other: 'ModeTransform') -> 'ModeTransform':
        """Apply self first, then other"""
        union = list(self.modes) + [m for m in other.modes if m not in self.modes]
        first = self.embed(union)
        second = other.embed(union)
        order = [second.index(m) for m in first.modes]
        second_matrix = second.matrix[np.ix_(order, order)]
        description = " -> ".join(d for d in (self.description, other.description) if d)
        return ModeTransform(first.modes, second_matrix @ first.matrix, description)


def compose(*transforms: ModeTransform) -> ModeTransform:
    """Chain transforms in application order"""
    if not transforms:
        raise ValueError("compose needs at least one transform")
    result = transforms[0]
    for t in transforms[1:]:
        result = result.then(t)
    return result


def make_unitary(modes: Sequence[ModeLabel], matrix: np.ndarray, description: str = "") -> ModeTransform:
    return ModeTransform(tuple(modes), np.asarray(matrix, dtype=complex), description)


def make_beamsplitter(T: float, phase_convention: PhaseConvention = PhaseConvention.REAL,
                      modes: Tuple[ModeLabel, ModeLabel] = (ModeLabel("a"), ModeLabel("b"))) -> ModeTransform:
    """Two-mode splitter with intensity transmission T"""
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"Transmissivity must lie in [0, 1], got {T}")

    t = math.sqrt(T)
    r = math.sqrt(1.0 - T)
    convention = PhaseConvention(phase_convention)
    if convention is PhaseConvention.REAL:
        matrix = [[t, r], [-r, t]]
    elif convention is PhaseConvention.SYMMETRIC:
        matrix = [[t, 1j * r], [1j * r, t]]
    else:
        matrix = [[t, -r], [r, t]]
    return make_unitary(modes, matrix, f"BS(T={T:.6g},{convention.value})")


def make_polarization_rotation(alpha: float, spatial_path: str = "a") -> ModeTransform:
    """Rotation by alpha on the (H, V) pair of one path"""
    c, s = math.cos(alpha), math.sin(alpha)
    modes = (mode(spatial_path, "H"), mode(spatial_path, "V"))
    return make_unitary(modes, [[c, -s], [s, c]], f"rot({math.degrees(alpha):.4f}deg,{spatial_path})")


def make_phase_shift(phi: float, targets: Iterable[ModeLabel],
                     modes: Optional[Iterable[ModeLabel]] = None) -> ModeTransform:
    """Multiplies every target mode by e^{i phi}"""
    target_list = list(targets)
    if not target_list:
        raise ValueError("Phase shift needs at least one target mode")
    mode_list = list(modes) if modes is not None else target_list
    unknown = [m for m in target_list if m not in mode_list]
    if unknown:
        raise UnknownModeError(f"Phase targets outside the transform: {[str(m) for m in unknown]}")

    diagonal = [np.exp(1j * phi) if m in target_list else 1.0 for m in mode_list]
    names = ",".join(str(m) for m in target_list)
    return make_unitary(mode_list, np.diag(diagonal), f"phase({phi:.6g} on {names})")


def make_polarizing_splitter(spatial_path: str, h_path: str, v_path: str) -> ModeTransform:
    """Routes H of one path to h_path and V to v_path"""
    modes = (mode(spatial_path, "H"), mode(spatial_path, "V"), mode(h_path, "H"), mode(v_path, "V"))
    matrix = np.zeros((4, 4))
    matrix[2, 0] = matrix[0, 2] = 1.0
    matrix[3, 1] = matrix[1, 3] = 1.0
    return make_unitary(modes, matrix, f"PBS({spatial_path}->{h_path}H,{v_path}V)")


def apply_transform(state: PureState, t: ModeTransform) -> PureState:
    """Substitute every creation operator by its image and re-expand over the Fock basis"""
    missing = [m for m in state.modes if m not in t.modes]
    if missing:
        raise UnknownModeError(
            f"State modes {[str(m) for m in missing]} are not covered by transform '{t.description}'"
        )

    n = state.photon_number
    if n == 0:
        return PureState.from_amplitudes({FockVector(()): state.terms[0][1]}, t.modes)

    matrix = t.matrix
    out: Dict[Tuple[int, ...], complex] = defaultdict(complex)
    for vector, coefficient in state.terms:
        columns = [t.index(m) for m, c in vector.occupations for _ in range(c)]
        input_weight = vector.factorial_weight()
        reachable = np.flatnonzero(np.any(np.abs(matrix[:, columns]) > 0.0, axis=1))

        for rows in itertools.combinations_with_replacement(reachable.tolist(), n):
            output_weight = math.prod(math.factorial(k) for k in Counter(rows).values())
            sub = np.ascontiguousarray(matrix[np.ix_(rows, columns)])
            out[rows] += coefficient * perm(sub) / math.sqrt(input_weight * output_weight)

    amplitudes = {}
    for rows, amp in out.items():
        if abs(amp) > AMPLITUDE_CUTOFF:
            counts = Counter(rows)
            amplitudes[FockVector(tuple((t.modes[i], k) for i, k in counts.items()))] = amp

    result = PureState.from_amplitudes(amplitudes, t.modes)
    if result.norm_drift > 1e-12:
        logger.debug(f"Renormalized output of '{t.description}', drift {result.norm_drift:.2e}")
    return result


def apply_chain(state: PureState, chain: Sequence[ModeTransform]) -> PureState:
    """Apply transforms in order, widening the state's mode set as needed"""
    for t in chain:
        if not set(state.modes) <= set(t.modes):
            t = t.embed(state.modes)
        state = apply_transform(state, t)
    return state


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b>, conjugate-linear in a"""
    if set(a.modes) != set(b.modes):
        raise UnknownModeError(
            f"Mode sets differ: {[str(m) for m in a.modes]} vs {[str(m) for m in b.modes]}"
        )
    if a.photon_number != b.photon_number:
        raise PhotonNumberError(f"Photon numbers differ: {a.photon_number} vs {b.photon_number}")
    left = a.amplitudes
    return complex(sum(left[v].conjugate() * amp for v, amp in b.terms if v in left))


def _check_pattern(state: PureState, pattern: FockVector) -> None:
    if pattern.total != state.photon_number:
        raise PhotonNumberError(
            f"Pattern {pattern} has {pattern.total} photons, state has {state.photon_number}"
        )
    outside = [m for m in pattern.modes if m not in state.modes]
    if outside:
        raise UnknownModeError(f"Pattern uses modes outside the state: {[str(m) for m in outside]}")


def mode_pattern_probability(state: PureState, pattern: FockVector) -> float:
    _check_pattern(state, pattern)
    return float(abs(state.amplitude(pattern)) ** 2)


def mode_pattern_correlation(state: PureState, pattern: FockVector) -> float:
    """Normally ordered moment <prod a^dag^n a^n> for the pattern's occupations"""
    return mode_pattern_probability(state, pattern) * pattern.factorial_weight()


@dataclass(frozen=True)
class Detector:
    """A detector and the fraction of each feeding mode's light it receives"""
    name: str
    modes: Tuple[ModeLabel, ...]
    ratios: Tuple[float, ...] = ()
    number_resolving: bool = True

    def __post_init__(self):
        modes = tuple(self.modes)
        ratios = tuple(float(r) for r in self.ratios) or (1.0,) * len(modes)
        if not modes:
            raise ValueError(f"Detector '{self.name}' is not fed by any mode")
        if len(ratios) != len(modes):
            raise ValueError(f"Detector '{self.name}' has {len(ratios)} ratios for {len(modes)} modes")
        if any(not 0.0 < r <= 1.0 for r in ratios):
            raise ValueError(f"Detector '{self.name}' ratios must lie in (0, 1]: {ratios}")
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, 'ratios', ratios)


def balanced_fanout(names: Sequence[str], label: ModeLabel, number_resolving: bool = False) -> List[Detector]:
    """Equal split of one mode over several detectors"""
    share = 1.0 / len(names)
    return [Detector(name, (label,), (share,), number_resolving) for name in names]


@dataclass(frozen=True)
class DetectorWiring:
    detectors: Tuple[Detector, ...]
    pattern: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        detectors = tuple(self.detectors)
        names = [d.name for d in detectors]
        if len(set(names)) != len(names):
            raise ValueError(f"Detector names must be unique: {names}")

        required = dict(self.pattern)
        if set(required) != set(names):
            raise ValueError(f"Pattern must name every detector exactly once: {sorted(required)} vs {sorted(names)}")
        for det in detectors:
            count = required[det.name]
            if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 0:
                raise ValueError(f"Required count for '{det.name}' must be a non-negative integer")
            if not det.number_resolving and count > 1:
                raise ValueError(f"Detector '{det.name}' only clicks; it cannot require {count} photons")

        totals: Dict[ModeLabel, float] = defaultdict(float)
        for det in detectors:
            for label, ratio in zip(det.modes, det.ratios):
                totals[label] += ratio
        for label, total in totals.items():
            if abs(total - 1.0) > RATIO_TOLERANCE:
                raise ValueError(f"Splitting ratios for mode {label} sum to {total}, not 1")

        object.__setattr__(self, 'detectors', detectors)
        object.__setattr__(self, 'pattern', tuple((d.name, int(required[d.name])) for d in detectors))

    @classmethod
    def create(cls, detectors: Iterable[Detector], pattern: Mapping[str, int]) -> 'DetectorWiring':
        return cls(tuple(detectors), tuple(pattern.items()))

    @property
    def total_required(self) -> int:
        return sum(count for _, count in self.pattern)

    @property
    def modes(self) -> Tuple[ModeLabel, ...]:
        return tuple(sorted({m for d in self.detectors for m in d.modes}))

    def branches(self, label: ModeLabel) -> List[Tuple[int, float]]:
        return [
            (i, ratio)
            for i, det in enumerate(self.detectors)
            for m, ratio in zip(det.modes, det.ratios) if m == label
        ]

    def accepts(self, counts: Sequence[int]) -> bool:
        for det, (_, required), got in zip(self.detectors, self.pattern, counts):
            if det.number_resolving:
                if got != required:
                    return False
            elif (got >= 1) != (required >= 1):
                return False
        return True


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    for split in itertools.product(range(total + 1), repeat=parts):
        if sum(split) == total:
            yield split


def _acceptance(vector: FockVector, wiring: DetectorWiring) -> float:
    """Probability that the photons of one basis vector satisfy the wiring pattern"""
    size = len(wiring.detectors)
    distribution: Dict[Tuple[int, ...], float] = {(0,) * size: 1.0}

    for label, count in vector.occupations:
        branches = wiring.branches(label)
        if not branches:
            # open port: photons leave undetected
            continue
        ratios = [r for _, r in branches]
        law = multinomial(count, ratios)
        updated: Dict[Tuple[int, ...], float] = defaultdict(float)
        for split in _compositions(count, len(branches)):
            weight = float(law.pmf(split))
            if weight == 0.0:
                continue
            for counts, p in distribution.items():
                new_counts = list(counts)
                for (det_index, _), k in zip(branches, split):
                    new_counts[det_index] += k
                updated[tuple(new_counts)] += p * weight
        distribution = updated

    return sum(p for counts, p in distribution.items() if wiring.accepts(counts))


def detector_coincidence_probability(state: PureState, wiring: DetectorWiring) -> float:
    """Probability that every detector registers its required count"""
    n = state.photon_number
    if wiring.total_required != n:
        raise PhotonNumberError(
            f"Pattern requires {wiring.total_required} photons but the state carries {n}"
        )
    unknown = [m for m in wiring.modes if m not in state.modes]
    if unknown:
        raise UnknownModeError(f"Wiring uses modes outside the state: {[str(m) for m in unknown]}")

    total = 0.0
    for vector, amp in state.terms:
        weight = abs(amp) ** 2
        if weight > 0.0:
            total += weight * _acceptance(vector, wiring)
    return float(min(max(total, 0.0), 1.0))
