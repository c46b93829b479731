"""
Multimode model of the two-pair down-conversion source
Joint spectral kernel, overlap integrals A and E, the time-ordering pairing engine and the
visibility and rate predictions of both projection schemes
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq
from scipy.special import roots_hermite

from schemes import SchemeKind

logger = logging.getLogger(__name__)

DEFAULT_NODES = 48
CONVERGENCE_TOLERANCE = 1e-6
IMAG_RESIDUE_TOLERANCE = 1e-8
SCHWARTZ_SLACK = 1e-9

ASYM_PREFACTOR = 1.0 / 4.0
NOON_PREFACTOR = 1.0 / 12.0 ** 3
THIRD_ROOT = np.exp(2j * math.pi / 3.0)

TimeOrder = Tuple[int, int, int]
ALL_TIME_ORDERS = tuple(itertools.permutations(range(3)))

PhaseLike = Union[float, Sequence[float], np.ndarray]


class QuadratureConvergenceError(ArithmeticError):
    """Grid doubling moved A or E by more than the tolerance"""


@dataclass(frozen=True)
class SpectralModel:
    """Gaussian joint spectral amplitude in detuning coordinates"""
    pump_bandwidth: float = 1.0
    filter_bandwidth: float = 1.0
    center_offset: float = 0.0
    delay_h: float = 0.0
    delay_v: float = 0.0
    symmetrized: bool = True
    pump_scale: complex = 1.0

    def __post_init__(self):
        if not self.pump_bandwidth > 0:
            raise ValueError(f"Pump bandwidth must be positive, got {self.pump_bandwidth}")
        if not self.filter_bandwidth > 0:
            raise ValueError(f"Filter bandwidth must be positive, got {self.filter_bandwidth}")

    def _raw(self, w1, w2):
        sp, sf, d = self.pump_bandwidth, self.filter_bandwidth, self.center_offset
        return (np.exp(-(w1 + w2) ** 2 / (4.0 * sp ** 2))
                * np.exp(-(w1 - d) ** 2 / (4.0 * sf ** 2))
                * np.exp(-(w2 + d) ** 2 / (4.0 * sf ** 2)))

    def magnitude(self, w1, w2):
        """Kernel without delay phases"""
        w1, w2 = np.asarray(w1, dtype=float), np.asarray(w2, dtype=float)
        if self.symmetrized:
            return 0.5 * (self._raw(w1, w2) + self._raw(w2, w1))
        return self._raw(w1, w2)

    def phi_value(self, w1, w2, delayed: bool = True):
        value = self.magnitude(w1, w2).astype(complex)
        if delayed and (self.delay_h or self.delay_v):
            value = value * np.exp(1j * (np.asarray(w1) * self.delay_h + np.asarray(w2) * self.delay_v))
        return value

    @property
    def is_symmetric(self) -> bool:
        return self.symmetrized or self.center_offset == 0.0


def phi_value(model: SpectralModel, w1, w2):
    return model.phi_value(w1, w2)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Hermite grid; scale maps Hermite abscissae to angular frequency"""
    nodes: int = DEFAULT_NODES
    scale: Optional[float] = None
    check_convergence: bool = True

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError(f"Quadrature needs at least 2 nodes per axis, got {self.nodes}")

    def points(self, model: SpectralModel, nodes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        x, w = roots_hermite(nodes or self.nodes)
        scale = self.scale or math.sqrt(2.0) * model.filter_bandwidth
        # weights of the plain integral, e^{-x^2} divided back out
        return scale * x, scale * np.exp(np.log(w) + x ** 2)


@dataclass(frozen=True)
class OverlapIntegrals:
    A: float
    E: float
    v1: float = 1.0
    imag_residue: float = 0.0

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"A must be positive, got {self.A}")
        if abs(self.E) > self.A * (1.0 + SCHWARTZ_SLACK):
            raise ValueError(f"|E| = {abs(self.E)} exceeds A = {self.A}")
        if not 0.0 <= self.v1 <= 1.0:
            raise ValueError(f"v1 must lie in [0, 1], got {self.v1}")

    @classmethod
    def from_ratio(cls, ratio: float, v1: float = 1.0) -> 'OverlapIntegrals':
        return cls(1.0, float(ratio), float(v1))

    @property
    def ratio(self) -> float:
        return self.E / self.A

    def with_v1(self, v1: float) -> 'OverlapIntegrals':
        return OverlapIntegrals(self.A, self.E, v1, self.imag_residue)


def _integrals_on_grid(model: SpectralModel, omega: np.ndarray, weight: np.ndarray) -> Tuple[float, complex]:
    w1, w2 = np.meshgrid(omega, omega, indexing='ij')
    delayed = model.phi_value(w1, w2)
    plain = model.phi_value(w1, w2, delayed=False)

    single = np.einsum('i,j,ij->', weight, weight, np.abs(plain) ** 2)
    a_value = float(single) ** 2

    # indices: i = H of heralded pair, j = its trigger partner, k = H of second pair, l = its V
    herald = np.einsum('j,ij,kj->ik', weight, delayed.conj(), delayed)
    second = np.einsum('l,kl,il->ki', weight, plain.conj(), plain)
    e_value = complex(np.einsum('i,k,ik,ki->', weight, weight, herald, second))
    return a_value, e_value


def _schwartz_bounded(a_value: float, e_real: float) -> float:
    """E clipped to [-A, A]; rounding overshoot within SCHWARTZ_SLACK A is clipped, anything larger is an error"""
    overshoot = abs(e_real) - a_value
    if overshoot <= 0.0:
        return e_real
    if overshoot > SCHWARTZ_SLACK * a_value:
        raise QuadratureConvergenceError(f"|E| exceeds A by {overshoot / a_value:.2e} A; the quadrature violates |E| <= A")
    logger.debug(f"|E| exceeds A by {overshoot / a_value:.2e} A from rounding, clipped to the bound")
    return math.copysign(a_value, e_real)


def overlap_integrals(model: SpectralModel, quadrature: QuadratureGrid = QuadratureGrid(),
                      v1: float = 1.0) -> OverlapIntegrals:
    """A and E of the model on a tensor grid, with an optional grid-doubling check"""
    if model.delay_v:
        logger.warning("H-V delay cancels from A and E in the symmetric-kernel reduction; it is ignored here")
    if not model.is_symmetric:
        logger.warning("Kernel is not symmetric; the A/E reduction is only approximate")

    omega, weight = quadrature.points(model)
    a_value, e_value = _integrals_on_grid(model, omega, weight)

    if quadrature.check_convergence:
        fine_omega, fine_weight = quadrature.points(model, 2 * quadrature.nodes)
        a_fine, e_fine = _integrals_on_grid(model, fine_omega, fine_weight)
        delta_a = abs(a_fine - a_value) / a_fine
        delta_e = abs(e_fine.real - e_value.real) / a_fine
        logger.debug(f"Grid doubling {quadrature.nodes}->{2 * quadrature.nodes}: dA={delta_a:.2e} dE={delta_e:.2e}")
        if delta_a > CONVERGENCE_TOLERANCE or delta_e > CONVERGENCE_TOLERANCE:
            raise QuadratureConvergenceError(
                f"Quadrature not converged at {quadrature.nodes} nodes/axis "
                f"(relative change A {delta_a:.2e}, E {delta_e:.2e})"
            )

    residue = abs(e_value.imag)
    if model.is_symmetric and not model.delay_h and residue > IMAG_RESIDUE_TOLERANCE * a_value:
        logger.warning(f"Imaginary part of E is {residue:.2e}, above {IMAG_RESIDUE_TOLERANCE:.0e} A")

    scale = abs(model.pump_scale) ** 4
    e_real = _schwartz_bounded(a_value, e_value.real)
    return OverlapIntegrals(scale * a_value, scale * e_real, v1, scale * residue)


@dataclass(frozen=True)
class Visibilities:
    V3: float
    V1: float


def visibilities(ov: OverlapIntegrals, scheme: SchemeKind) -> Visibilities:
    A, E, v1 = ov.A, ov.E, ov.v1
    if SchemeKind(scheme) is SchemeKind.ASYMMETRIC_BS:
        return Visibilities(
            V3=v1 ** 3 * 8.0 * (A + 2.0 * E) / (17.0 * A + 7.0 * E),
            V1=v1 * 9.0 * (A - E) / (17.0 * A + 7.0 * E),
        )
    return Visibilities(V3=v1 ** 3 * (A + 2.0 * E) / (2.0 * A + E), V1=0.0)


def p4_asym(phi: PhaseLike, ov: OverlapIntegrals):
    """Four-fold coincidence of the asymmetric scheme, pump scale fixed to 1"""
    vis = visibilities(ov, SchemeKind.ASYMMETRIC_BS)
    phi = np.asarray(phi, dtype=float)
    level = 2.0 * (17.0 * ov.A + 7.0 * ov.E) / 243.0
    return level * (1.0 + vis.V3 * np.cos(3.0 * phi) + vis.V1 * np.cos(phi))


def p4_noon(phi: PhaseLike, ov: OverlapIntegrals):
    """Four-fold coincidence of the NOON projection, pump scale fixed to 1"""
    vis = visibilities(ov, SchemeKind.NOON_PROJECTION)
    phi = np.asarray(phi, dtype=float)
    level = (2.0 * ov.A + ov.E) / 72.0
    return level * (1.0 + vis.V3 * np.cos(3.0 * phi))


@dataclass(frozen=True, eq=False)
class SchemeCoefficients:
    """
    Interference weights of a scheme as polynomials in u = e^{i phi}.

    Each group is a time order (x, y, z) of the three detector times feeding
    G(t_x, t_y, t_z, t_4) = g(t_x, t_z) g(t_y, t_4): t_y is the photon paired with the trigger.
    """
    scheme: SchemeKind
    named: Mapping[str, Polynomial]
    groups: Tuple[Tuple[TimeOrder, Polynomial], ...]
    prefactor: float

    def __post_init__(self):
        orders = [order for order, _ in self.groups]
        if any(sorted(order) != [0, 1, 2] for order in orders):
            raise ValueError(f"Inconsistent group structure: {orders} are not time orders of three detectors")
        if len(set(orders)) != len(orders) or len(orders) != len(ALL_TIME_ORDERS):
            raise ValueError(f"Inconsistent group structure: need each of the six time orders once, got {orders}")

    def weights(self, phi: float) -> Dict[str, complex]:
        u = np.exp(1j * phi)
        return {name: complex(poly(u)) for name, poly in self.named.items()}

    def pairings(self) -> List[np.ndarray]:
        """Coefficient arrays of the three spectral pairings, keyed by the trigger partner"""
        grouped = [Polynomial([0j]) for _ in range(3)]
        for (_, partner, _), weight in self.groups:
            grouped[partner] = grouped[partner] + weight
        degree = max(len(p.coef) for p in grouped)
        return [np.pad(p.coef.astype(complex), (0, degree - len(p.coef))) for p in grouped]


def asym_coefficients() -> SchemeCoefficients:
    u = Polynomial([0j, 1.0])
    tau1 = (1.0 - 2.0 * u) / 3.0
    tau2 = (u - 2.0) / 3.0
    rho1 = math.sqrt(2.0) * (1.0 + u) / 3.0
    rho2 = -rho1
    mixed = tau1 * tau2 * rho2
    reflected = rho1 * rho2 * rho2
    groups = (
        ((0, 1, 2), mixed), ((1, 0, 2), mixed), ((0, 2, 1), mixed), ((2, 0, 1), mixed),
        ((1, 2, 0), reflected), ((2, 1, 0), reflected),
    )
    named = {"tau1": tau1, "rho1": rho1, "tau2": tau2, "rho2": rho2}
    return SchemeCoefficients(SchemeKind.ASYMMETRIC_BS, named, groups, ASYM_PREFACTOR)


def noon_coefficients() -> SchemeCoefficients:
    w, w2 = THIRD_ROOT, THIRD_ROOT ** 2
    a1 = Polynomial([1.0, 2.0 * w2, 2.0 * w, 1.0])
    a2 = Polynomial([1.0, 2.0 * w, 2.0 * w2, 1.0])
    a3 = Polynomial([1.0, 2.0, 2.0, 1.0])
    groups = (
        ((0, 1, 2), a1), ((1, 0, 2), a1),
        ((0, 2, 1), a2), ((2, 0, 1), a2),
        ((1, 2, 0), a3), ((2, 1, 0), a3),
    )
    return SchemeCoefficients(SchemeKind.NOON_PROJECTION, {"a1": a1, "a2": a2, "a3": a3}, groups, NOON_PREFACTOR)


def scheme_coefficients(scheme: SchemeKind) -> SchemeCoefficients:
    if SchemeKind(scheme) is SchemeKind.ASYMMETRIC_BS:
        return asym_coefficients()
    return noon_coefficients()


def _harmonic_series(coeffs: SchemeCoefficients, ov: OverlapIntegrals) -> Tuple[np.ndarray, np.ndarray]:
    """Orders m and complex coefficients h_m of P4(phi) = sum_m h_m e^{i m phi}"""
    pairings = coeffs.pairings()
    degree = len(pairings[0])
    series = np.zeros(2 * degree - 1, dtype=complex)
    for k, left in enumerate(pairings):
        for l, right in enumerate(pairings):
            overlap = ov.A if k == l else ov.E
            series += overlap * np.correlate(right, left, mode='full')
    orders = np.arange(-(degree - 1), degree)
    return orders, coeffs.prefactor * ov.v1 ** np.abs(orders) * series


def permutation_overlap_p4(coeffs: SchemeCoefficients, ov: OverlapIntegrals, phi: PhaseLike):
    """
    P4 summed over ordered pairs of spectral pairings: A when both pairings match, E otherwise.
    Harmonic m is damped by v1^|m|.
    """
    orders, series = _harmonic_series(coeffs, ov)
    phases = np.asarray(phi, dtype=float)
    values = np.exp(1j * np.multiply.outer(phases, orders)) @ series
    return np.real(values) if values.ndim else float(values.real)


def harmonic_magnitudes(coeffs: SchemeCoefficients, ov: OverlapIntegrals) -> np.ndarray:
    """Amplitude of each harmonic cos(m phi + theta), index m; index 0 is the mean"""
    orders, series = _harmonic_series(coeffs, ov)
    positive = series[orders >= 0]
    magnitudes = np.abs(positive)
    magnitudes[1:] *= 2.0
    return magnitudes


def rate_ratio(ov: OverlapIntegrals) -> float:
    """Phase-averaged asymmetric-scheme rate over phase-averaged NOON rate"""
    asym_mean = harmonic_magnitudes(asym_coefficients(), ov)[0]
    noon_mean = harmonic_magnitudes(noon_coefficients(), ov)[0]
    return float(asym_mean / noon_mean)


def direct_quadrature_p4(model: SpectralModel, coeffs: SchemeCoefficients, phi: PhaseLike,
                         quadrature: QuadratureGrid = QuadratureGrid(check_convergence=False)):
    """
    Four-dimensional quadrature of |sum_k c_k(phi) Phi Phi|^2 over all frequencies.
    Slabs over the first frequency are summed in index order.
    """
    omega, weight = quadrature.points(model)
    w1, w2 = np.meshgrid(omega, omega, indexing='ij')
    plain = model.phi_value(w1, w2, delayed=False)
    delayed = model.phi_value(w1, w2)
    pairings = coeffs.pairings()
    scale = abs(model.pump_scale) ** 4

    phases = np.atleast_1d(np.asarray(phi, dtype=float))
    results = np.empty(phases.size)
    for index, angle in enumerate(phases):
        u = np.exp(1j * angle)
        c1, c2, c3 = (np.polyval(p[::-1], u) for p in pairings)
        total = 0.0
        for i in range(omega.size):
            # axes of each slab: (j, k, l); l is the trigger frequency
            amplitude = (c1 * plain.T[:, :, None] * delayed[i][None, None, :]
                         + c2 * plain[i][:, None, None] * delayed[None, :, :]
                         + c3 * plain[i][None, :, None] * delayed[:, None, :])
            total += weight[i] * np.einsum('j,k,l,jkl->', weight, weight, weight, np.abs(amplitude) ** 2)
        results[index] = scale * coeffs.prefactor * total

    logger.debug(f"Direct quadrature over {omega.size}^4 nodes at {phases.size} phases")
    return results if np.ndim(phi) else float(results[0])


def overlap_ratio_from_visibility(visibility: float, scheme: SchemeKind, harmonic: int = 3) -> float:
    """E/A that reproduces one visibility with v1 = 1"""
    V = float(visibility)
    kind = SchemeKind(scheme)
    if kind is SchemeKind.ASYMMETRIC_BS and harmonic == 3:
        ratio = (17.0 * V - 8.0) / (16.0 - 7.0 * V)
    elif kind is SchemeKind.ASYMMETRIC_BS and harmonic == 1:
        ratio = (9.0 - 17.0 * V) / (9.0 + 7.0 * V)
    elif kind is SchemeKind.NOON_PROJECTION and harmonic == 3:
        ratio = (2.0 * V - 1.0) / (2.0 - V)
    else:
        raise ValueError(f"No visibility of harmonic {harmonic} for scheme '{kind.value}'")
    if abs(ratio) > 1.0:
        raise ValueError(f"Visibility {V} implies E/A = {ratio:.4f}, outside [-1, 1]")
    return ratio


def fit_overlap_parameters(V3: float, V1: float) -> OverlapIntegrals:
    """Joint (E/A, v1) for the asymmetric scheme that reproduces both measured visibilities"""
    if not 0.0 < V3 <= 1.0:
        raise ValueError(f"V3 must lie in (0, 1], got {V3}")
    if V1 < 0.0:
        raise ValueError(f"V1 must be non-negative, got {V1}")
    if V1 == 0.0:
        return OverlapIntegrals(1.0, 1.0, V3 ** (1.0 / 3.0))

    def v1_of(ratio: float) -> float:
        return V1 * (17.0 + 7.0 * ratio) / (9.0 * (1.0 - ratio))

    def mismatch(ratio: float) -> float:
        return visibilities(OverlapIntegrals(1.0, ratio, 1.0), SchemeKind.ASYMMETRIC_BS).V3 * v1_of(ratio) ** 3 - V3

    upper = overlap_ratio_from_visibility(V1, SchemeKind.ASYMMETRIC_BS, harmonic=1)
    if mismatch(upper) < 0.0:
        raise ValueError(f"V3={V3} and V1={V1} cannot be reproduced with v1 <= 1")
    ratio = brentq(mismatch, -1.0, upper, xtol=1e-15, rtol=1e-15)
    v1 = min(v1_of(ratio), 1.0)
    logger.info(f"Joint overlap solve: E/A={ratio:.4f}, v1={v1:.4f}")
    return OverlapIntegrals(1.0, ratio, v1)
