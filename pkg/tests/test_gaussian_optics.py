#!/usr/bin/env python3
"""
Tests for Gaussian-state coefficients, the scattershot circuit and the unitary embedding
"""
import unittest
from math import cosh, sqrt, tanh
import sys
import os

import numpy as np
import pytest

# Add parent directory to path
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from bsim.errors import (DegenerateNormError, DimensionError, NotUnitaryError, ParameterError,
                         TailMassError)
from bsim.gaussian_optics import (adaptive_cutoff, alternating_squeezing, beamsplitter_tmss_sector,
                                  beamsplitter_unitary, build_tsbs_unitary, displaced_squeezed_coefficients,
                                  displaced_squeezed_product_sector, displaced_squeezed_table, embed_matrix,
                                  is_alternating, operator_exponential_state, split_tsbs_unitary,
                                  squeezed_product_sector, squeezed_vacuum_coefficients, tail_mass,
                                  thermal_diagonal, tmss_coefficient)
from bsim.tensor_core import haar_unitary, is_unitary, make_rng


class TestThermalAndTmss(unittest.TestCase):

    def test_vacuum_limits(self):
        self.assertEqual(tmss_coefficient(0.0, 0), 1.0)
        self.assertEqual(tmss_coefficient(0.0, 1), 0.0)
        self.assertEqual(thermal_diagonal(0.0, 0), 1.0)

    def test_thermal_value(self):
        self.assertAlmostEqual(thermal_diagonal(0.5, 1), 0.1875, places=15)

    def test_normalization(self):
        for t in (0.1, 0.5, 0.7):
            total = sum(tmss_coefficient(t, n) ** 2 for n in range(300))
            self.assertAlmostEqual(total, 1.0, places=12)
            self.assertAlmostEqual(sum(thermal_diagonal(t, n) for n in range(300)), 1.0, places=12)

    def test_partial_trace(self):
        for n in range(6):
            self.assertAlmostEqual(thermal_diagonal(0.6, n), tmss_coefficient(0.6, n) ** 2, places=15)

    def test_out_of_range(self):
        for t in (-0.1, 1.0, 1.5):
            with self.assertRaises(ParameterError):
                tmss_coefficient(t, 0)
            with self.assertRaises(ParameterError):
                thermal_diagonal(t, 0)


class TestSqueezedCoefficients(unittest.TestCase):
    """Closed forms against the operator-exponential oracle"""

    def test_vacuum(self):
        coeffs = squeezed_vacuum_coefficients(0.0, 10)
        self.assertEqual(coeffs[0], 1.0)
        self.assertTrue(np.all(coeffs[1:] == 0.0))

    def test_parity(self):
        coeffs = squeezed_vacuum_coefficients(0.4, 20)
        self.assertTrue(np.all(coeffs[1::2] == 0.0))

    def test_odd_cutoff(self):
        with self.assertRaises(ParameterError):
            squeezed_vacuum_coefficients(0.2, 7)

    def test_squeezed_matches_oracle(self):
        oracle = operator_exponential_state(0.0, 0.2, 60)[:21]
        self.assertLess(np.max(np.abs(squeezed_vacuum_coefficients(0.2, 20) - oracle)), 1e-8)

    def test_negative_squeezing_matches_oracle(self):
        oracle = operator_exponential_state(0.0, -0.35, 60)[:21]
        self.assertLess(np.max(np.abs(squeezed_vacuum_coefficients(-0.35, 20) - oracle)), 1e-8)

    def test_displaced_matches_oracle(self):
        oracle = operator_exponential_state(1.0, 0.3, 80)[:31]
        coeffs = displaced_squeezed_coefficients(1.0, 0.3, 30)
        self.assertLess(np.max(np.abs(coeffs - oracle)), 1e-8)

    def test_complex_displacement_matches_oracle(self):
        alpha = 0.8 - 0.6j
        oracle = operator_exponential_state(alpha, -0.25, 80)[:31]
        coeffs = displaced_squeezed_coefficients(alpha, -0.25, 30)
        self.assertLess(np.max(np.abs(coeffs - oracle)), 1e-8)

    def test_zero_displacement(self):
        coeffs = displaced_squeezed_coefficients(0.0, 0.3, 30)
        np.testing.assert_allclose(coeffs.real, squeezed_vacuum_coefficients(0.3, 30), atol=1e-15)

    def test_vacuum_displacement(self):
        coeffs = displaced_squeezed_coefficients(0.0, 0.0, 12)
        self.assertEqual(coeffs[0], 1.0)
        self.assertEqual(np.abs(coeffs[1:]).max(), 0.0)

    def test_insufficient_cutoff(self):
        with self.assertRaises(TailMassError):
            displaced_squeezed_coefficients(2.0, 0.3, 3)

    def test_adaptive_cutoff(self):
        n_max = adaptive_cutoff(1.5, 0.4, tol=1e-12)
        self.assertLessEqual(tail_mass(displaced_squeezed_table(1.5, 0.4, n_max)), 1e-12 + 1e-15)
        self.assertGreater(tail_mass(displaced_squeezed_table(1.5, 0.4, n_max - 1)), 1e-12 - 1e-15)

    def test_table_broadcasts(self):
        alphas = np.array([[0.1, 0.2j], [0.5, -0.3]])
        table = displaced_squeezed_table(alphas, 0.2, 8)
        self.assertEqual(table.shape, (2, 2, 9))
        np.testing.assert_allclose(table[1, 0], displaced_squeezed_table(0.5, 0.2, 8), atol=1e-15)


class TestBeamSplitter(unittest.TestCase):

    def test_entries(self):
        bs = beamsplitter_unitary()
        np.testing.assert_array_equal(bs * sqrt(2), np.array([[1, 1], [-1, 1]]))
        self.assertTrue(is_unitary(bs, tol=1e-15))
        self.assertAlmostEqual(np.linalg.det(bs).real, 1.0, places=15)

    def test_tmss_from_squeezed_pair(self):
        """Mixing S(xi)|0> and S(-xi)|0> gives a two-mode squeezed vacuum"""
        for xi in (0.1, 0.3, 0.5):
            t = tanh(xi)
            for n in range(5):
                state = beamsplitter_tmss_sector(xi, n)
                self.assertLess(abs(abs(state.amplitude((n, n))) - tmss_coefficient(t, n)), 1e-8)
                others = [abs(state.amplitude(p)) for p in state.patterns if p != (n, n)]
                self.assertLess(max(others, default=0.0), 1e-8)

    def test_tmss_phase(self):
        state = beamsplitter_tmss_sector(0.4, 1)
        self.assertAlmostEqual(state.amplitude((1, 1)).real, -sqrt(1 - tanh(0.4) ** 2) * tanh(0.4), places=12)

    def test_product_vacuum_component(self):
        state = squeezed_product_sector([0.3, -0.3], 0)
        self.assertAlmostEqual(state.amplitude((0, 0)).real, 1 / cosh(0.3), places=15)


class TestTsbsCircuit(unittest.TestCase):

    def setUp(self):
        self.u_a = haar_unitary(2, 21, 0)
        self.u_b = haar_unitary(2, 21, 1)

    def test_single_pair_is_beam_splitter(self):
        u = build_tsbs_unitary(np.eye(1), np.eye(1))
        np.testing.assert_allclose(u, beamsplitter_unitary(), atol=1e-15)

    def test_unitary(self):
        self.assertTrue(is_unitary(build_tsbs_unitary(self.u_a, self.u_b), tol=1e-12))

    def test_routing_sparsity(self):
        """Squeezed inputs 2i and 2i+1 reach only A-mode i and B-mode i"""
        modes = 3
        u = build_tsbs_unitary(np.eye(modes), np.eye(modes))
        for column in range(2 * modes):
            rows = set(np.flatnonzero(np.abs(u[:, column]) > 0))
            self.assertEqual(rows, {column // 2, modes + column // 2})

    def test_split_recovers_sides(self):
        u_a, u_b = split_tsbs_unitary(build_tsbs_unitary(self.u_a, self.u_b))
        np.testing.assert_allclose(u_a, self.u_a, atol=1e-14)
        np.testing.assert_allclose(u_b, self.u_b, atol=1e-14)

    def test_split_rejects_mixing(self):
        with self.assertRaises(DimensionError):
            split_tsbs_unitary(haar_unitary(4, 3))

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            build_tsbs_unitary(np.eye(2), np.eye(3))

    def test_non_unitary(self):
        with self.assertRaises(NotUnitaryError):
            build_tsbs_unitary(2 * np.eye(2), np.eye(2))


class TestEmbedding(unittest.TestCase):

    def test_identity(self):
        result = embed_matrix(np.eye(2))
        self.assertAlmostEqual(result.epsilon, 1.0, places=12)
        np.testing.assert_allclose(result.block(), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(result.unitary[:2, 2:], np.zeros((2, 2)), atol=1e-7)

    def test_random_matrix(self):
        for trial in range(5):
            x = make_rng(3, trial).standard_normal((2, 2))
            result = embed_matrix(x)
            self.assertEqual(result.size, 2)
            self.assertTrue(is_unitary(result.unitary, tol=1e-10))
            self.assertLess(np.max(np.abs(result.block() - result.epsilon * x)), 1e-12)

    def test_scale_invariance(self):
        x = make_rng(4).standard_normal((3, 3))
        np.testing.assert_allclose(embed_matrix(3.0 * x).unitary, embed_matrix(x).unitary, atol=1e-9)

    def test_all_ones(self):
        result = embed_matrix(np.ones((2, 2)))
        self.assertAlmostEqual(result.epsilon, 0.5, places=10)

    def test_zero_matrix(self):
        with self.assertRaises(DegenerateNormError):
            embed_matrix(np.zeros((2, 2)))

    def test_close_singular_values(self):
        """Nearly equal top singular values still give a unitary dilation"""
        angle = 0.4
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        for gap in (1e-3, 1e-5, 1e-7):
            x = rotation @ np.diag([1.0, 1.0 - gap]) @ rotation.T
            result = embed_matrix(x)
            self.assertTrue(is_unitary(result.unitary, tol=1e-12))
            self.assertLess(abs(result.epsilon * np.linalg.norm(x, 2) - 1.0), 1e-12)
            self.assertLess(np.max(np.abs(result.block() - result.epsilon * x)), 1e-15)


def test_alternating_squeezing():
    xis = alternating_squeezing(3, 0.4)
    assert list(xis) == [0.4, -0.4, 0.4, -0.4, 0.4, -0.4]
    assert is_alternating(xis)
    assert not is_alternating([0.4, 0.4])
    assert not is_alternating([0.4, -0.4, 0.4])


def test_alternating_needs_a_pair():
    with pytest.raises(DimensionError):
        alternating_squeezing(0, 0.2)


@pytest.mark.parametrize('levels', [0, 1])
def test_operator_exponential_levels(levels):
    with pytest.raises(ParameterError):
        operator_exponential_state(0.1, 0.1, levels)


def test_displaced_squeezed_product_sector():
    alphas, xis = [0.3 + 0.1j, -0.2], [0.2, -0.4]
    sector = displaced_squeezed_product_sector(alphas, xis, 2)
    first = displaced_squeezed_coefficients(alphas[0], xis[0], 30)
    second = displaced_squeezed_coefficients(alphas[1], xis[1], 30)
    for pattern in sector.patterns:
        expected = first[pattern[0]] * second[pattern[1]]
        assert abs(sector.amplitude(pattern) - expected) < 1e-15


def test_displaced_squeezed_product_sector_lengths():
    with pytest.raises(DimensionError):
        displaced_squeezed_product_sector([0.1], [0.2, 0.3], 1)
