"""
Shared fixtures and independent oracles for the simulator tests
"""

import math
import os
import sys

import numpy as np
import pytest
import sympy

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def creation_operator_expansion(matrix, occupations):
    """
    Output amplitudes of a Fock input by symbolic expansion of prod_j (sum_i M_ij b_i^dag)^n_j.

    Returns {output occupations: amplitude}.
    """
    size = len(occupations)
    symbols = sympy.symbols(f'b0:{size}')
    entries = np.asarray(matrix, dtype=complex)

    polynomial = sympy.Integer(1)
    for j, count in enumerate(occupations):
        image = sum(
            (sympy.Float(entries[i, j].real, 30) + sympy.I * sympy.Float(entries[i, j].imag, 30)) * symbols[i]
            for i in range(size)
        )
        polynomial *= image ** count

    expanded = sympy.Poly(sympy.expand(polynomial), *symbols)
    input_weight = math.prod(math.factorial(n) for n in occupations)
    amplitudes = {}
    for monomial, coefficient in expanded.terms():
        output_weight = math.prod(math.factorial(m) for m in monomial)
        amplitudes[tuple(monomial)] = complex(sympy.N(coefficient)) * math.sqrt(output_weight / input_weight)
    return amplitudes


def gaussian_overlaps(sigma_p, sigma_f, delay_h=0.0):
    """Closed-form A and E of the Gaussian kernel from multivariate Gaussian integrals"""
    v = np.array([1.0, 1.0])
    single = np.outer(v, v) / sigma_p ** 2 + np.eye(2) / sigma_f ** 2
    A = (2.0 * math.pi) ** 2 / np.linalg.det(single)

    quadratic = np.eye(4) / sigma_f ** 2
    for x, y in ((0, 1), (2, 3), (2, 1), (0, 3)):
        pair = np.zeros(4)
        pair[x] = pair[y] = 1.0
        quadratic += np.outer(pair, pair) / (2.0 * sigma_p ** 2)
    linear = delay_h * np.array([-1.0, 0.0, 1.0, 0.0])
    E = ((2.0 * math.pi) ** 2 / math.sqrt(np.linalg.det(quadratic))
         * math.exp(-0.5 * linear @ np.linalg.solve(quadratic, linear)))
    return A, E


@pytest.fixture
def fock_oracle():
    return creation_operator_expansion


@pytest.fixture
def gaussian_oracle():
    return gaussian_overlaps


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
