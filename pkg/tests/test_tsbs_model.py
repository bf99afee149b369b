#!/usr/bin/env python3
"""
Tests for the twofold scattershot distributions
"""
import unittest
from itertools import product
from unittest.mock import patch
import sys
import os

import numpy as np
import pytest

# Add parent directory to path
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from bsim.config import Config
from bsim.errors import (ClosedFormInapplicableError, ConditioningError, ConservationError,
                         DimensionError, NotUnitaryError, ParameterError)
from bsim.fock_space import enumerate_patterns, pattern_rank, transition_amplitude
from bsim.gaussian_optics import alternating_squeezing, build_tsbs_unitary
from bsim.tensor_core import haar_unitary, permanent_ryser, reduced_matrix
from bsim.tsbs_model import (TsbsConfig, conditional_probability, conditional_table, herald_weight,
                             joint_probability_general, marginal_probability, marginal_probability_summed,
                             squeezed_joint_oracle, squeezed_joint_probability, time_unfolded_unitary,
                             two_sided_joint_table, unfolded_probability)


def _pair(modes, seed):
    return haar_unitary(modes, seed, 0), haar_unitary(modes, seed, 1)


class TestTsbsConfig(unittest.TestCase):

    def test_equal_squeezing(self):
        u_a, u_b = _pair(2, 1)
        cfg = TsbsConfig.equal(2, 0.4, u_a, u_b)
        self.assertTrue(cfg.equal_squeezing)
        self.assertEqual(cfg.common_t, 0.4)

    def test_unequal_squeezing_has_no_common_t(self):
        u_a, u_b = _pair(2, 1)
        cfg = TsbsConfig(2, [0.2, 0.7], u_a, u_b)
        self.assertFalse(cfg.equal_squeezing)
        with self.assertRaises(ClosedFormInapplicableError):
            cfg.common_t

    def test_rejects_bad_squeezing(self):
        with self.assertRaises(ParameterError):
            TsbsConfig.equal(2, 1.0, np.eye(2), np.eye(2))

    def test_rejects_wrong_size(self):
        with self.assertRaises(DimensionError):
            TsbsConfig.equal(2, 0.5, np.eye(3), np.eye(2))
        with self.assertRaises(DimensionError):
            TsbsConfig(2, [0.5], np.eye(2), np.eye(2))

    def test_rejects_non_unitary(self):
        with self.assertRaises(NotUnitaryError):
            TsbsConfig.equal(2, 0.5, np.ones((2, 2)), np.eye(2))


class TestJointAndMarginal(unittest.TestCase):
    """Test joint and marginal probabilities"""

    def setUp(self):
        self.u_a, self.u_b = _pair(3, 8)

    def test_vacuum(self):
        cfg = TsbsConfig(3, [0.2, 0.5, 0.7], self.u_a, self.u_b)
        expected = (1 - 0.04) * (1 - 0.25) * (1 - 0.49)
        self.assertAlmostEqual(joint_probability_general(cfg, (0, 0, 0), (0, 0, 0)), expected, places=14)

    def test_unequal_totals(self):
        cfg = TsbsConfig.equal(3, 0.5, self.u_a, self.u_b)
        self.assertEqual(joint_probability_general(cfg, (1, 0, 0), (1, 1, 0)), 0.0)

    def test_equal_squeezing_factorization(self):
        """joint = (1 - t^2)^M t^(2N) * conditional"""
        cfg = TsbsConfig.equal(3, 0.45, self.u_a, self.u_b)
        weight = herald_weight(3, 2, 0.45)
        for k in enumerate_patterns(3, 2):
            m = (1, 1, 0)
            joint = joint_probability_general(cfg, k, m)
            self.assertAlmostEqual(joint, weight * conditional_probability(cfg, k, m), places=14)

    def test_matches_two_sided_fock_simulation(self):
        for photons in (1, 2):
            u_a, u_b = _pair(2, 3 + photons)
            cfg = TsbsConfig.equal(2, 0.5, u_a, u_b)
            table = two_sided_joint_table(cfg, photons)
            for k, m in product(enumerate_patterns(2, photons), repeat=2):
                self.assertLess(abs(table[pattern_rank(k), pattern_rank(m)]
                                    - joint_probability_general(cfg, k, m)), 1e-10)

    def test_marginal_closed_form(self):
        cfg = TsbsConfig.equal(3, 0.4, self.u_a, self.u_b)
        closed = marginal_probability(cfg, (0, 1, 0))
        self.assertAlmostEqual(closed, (1 - 0.16) ** 3 * 0.16, places=15)
        self.assertLess(abs(marginal_probability_summed(cfg, (0, 1, 0)) - closed), 1e-10)

    def test_marginal_independent_of_u_b(self):
        for seed in range(3):
            cfg = TsbsConfig.equal(3, 0.4, self.u_a, haar_unitary(3, 100 + seed))
            self.assertLess(abs(marginal_probability_summed(cfg, (1, 1, 0)) - herald_weight(3, 2, 0.4)), 1e-10)

    def test_marginal_vacuum_and_zero_squeezing(self):
        cfg = TsbsConfig.equal(3, 0.4, self.u_a, self.u_b)
        self.assertAlmostEqual(marginal_probability(cfg, (0, 0, 0)), 0.84 ** 3, places=15)
        dark = TsbsConfig.equal(3, 0.0, self.u_a, self.u_b)
        self.assertEqual(marginal_probability(dark, (0, 0, 0)), 1.0)
        self.assertEqual(marginal_probability(dark, (1, 0, 0)), 0.0)

    def test_unequal_squeezing_breaks_invariance(self):
        """With unequal t_j the B marginal depends on U_B"""
        values = [marginal_probability_summed(TsbsConfig(2, [0.2, 0.7], haar_unitary(2, 1), haar_unitary(2, s)),
                                              (1, 0)) for s in (2, 3, 4)]
        self.assertGreater(max(values) - min(values), 1e-6)
        cfg = TsbsConfig(2, [0.2, 0.7], haar_unitary(2, 1), haar_unitary(2, 2))
        with self.assertRaises(ClosedFormInapplicableError):
            marginal_probability(cfg, (1, 0))

    def test_log_space_path(self):
        cfg = TsbsConfig(2, [0.3, 0.6], *_pair(2, 12))
        direct = joint_probability_general(cfg, (2, 0), (1, 1))
        with patch.object(Config, 'LOG_SPACE_MODES', 1):
            logged = joint_probability_general(cfg, (2, 0), (1, 1))
        self.assertLess(abs(logged / direct - 1.0), 1e-12)


class TestConditional(unittest.TestCase):
    """Test conditioning and the time-unfolded identity"""

    def test_normalization(self):
        cfg = TsbsConfig.equal(4, 0.5, *_pair(4, 2))
        total = sum(conditional_probability(cfg, k, (1, 0, 1, 0)) for k in enumerate_patterns(4, 2))
        self.assertAlmostEqual(total, 1.0, places=10)

    def test_independent_of_squeezing(self):
        u_a, u_b = _pair(3, 5)
        low = TsbsConfig.equal(3, 0.3, u_a, u_b)
        high = TsbsConfig.equal(3, 0.7, u_a, u_b)
        for k in enumerate_patterns(3, 2):
            self.assertLess(abs(conditional_probability(low, k, (0, 1, 1))
                                - conditional_probability(high, k, (0, 1, 1))), 1e-12)

    def test_equals_unfolded_probability(self):
        herald = (1, 1, 0, 0)
        for seed in range(5):
            u_a, u_b = _pair(4, 40 + seed)
            cfg = TsbsConfig.equal(4, 0.5, u_a, u_b)
            for k in enumerate_patterns(4, 2):
                self.assertLess(abs(conditional_probability(cfg, k, herald)
                                    - unfolded_probability(u_a, u_b, k, herald)), 1e-10)

    def test_zero_marginal(self):
        cfg = TsbsConfig.equal(2, 0.0, *_pair(2, 1))
        with self.assertRaises(ConditioningError):
            conditional_probability(cfg, (1, 0), (1, 0))

    def test_conditional_table(self):
        cfg = TsbsConfig.equal(3, 0.5, *_pair(3, 6))
        table = conditional_table(cfg, (1, 0, 1))
        self.assertEqual(len(table), 6)
        self.assertTrue(table.normalized)
        self.assertEqual(table.metadata['herald'], [1, 0, 1])
        self.assertEqual(table.metadata['N'], 2)


class TestUnfolded(unittest.TestCase):

    def test_inverse_sides_give_identity(self):
        u_b = haar_unitary(3, 2)
        u_a = u_b.conj()
        np.testing.assert_allclose(time_unfolded_unitary(u_a, u_b), np.eye(3), atol=1e-12)
        for k in enumerate_patterns(3, 2):
            for m in enumerate_patterns(3, 2):
                self.assertAlmostEqual(unfolded_probability(u_a, u_b, k, m), float(k == m), places=12)

    def test_standard_scattershot_case(self):
        u_a = haar_unitary(4, 7)
        k, m = (2, 0, 1, 0), (1, 1, 0, 1)
        perm = permanent_ryser(reduced_matrix(u_a, k, m))
        self.assertAlmostEqual(unfolded_probability(u_a, np.eye(4), k, m), abs(perm) ** 2 / 2, places=14)

    def test_matches_transition_amplitude(self):
        u_a, u_b = _pair(4, 9)
        u = time_unfolded_unitary(u_a, u_b)
        for k in enumerate_patterns(4, 2):
            for m in enumerate_patterns(4, 2):
                expected = abs(transition_amplitude(u, k, m)) ** 2
                self.assertLess(abs(unfolded_probability(u_a, u_b, k, m) - expected), 1e-12)

    def test_conservation(self):
        with self.assertRaises(ConservationError):
            unfolded_probability(np.eye(2), np.eye(2), (1, 0), (1, 1))


class TestSqueezedJoint(unittest.TestCase):
    """Closed form for alternating squeezed inputs against the Fock oracle"""

    def setUp(self):
        self.u_a, self.u_b = _pair(2, 31)
        self.u2m = build_tsbs_unitary(self.u_a, self.u_b)

    def test_vacuum_without_squeezing(self):
        xis = alternating_squeezing(2, 0.0)
        self.assertAlmostEqual(squeezed_joint_probability(self.u2m, xis, (0, 0), (0, 0)), 1.0, places=15)

    def test_closed_form_matches_oracle(self):
        xis = alternating_squeezing(2, 0.3)
        for photons in (1, 2):
            for k, m in product(enumerate_patterns(2, photons), repeat=2):
                closed = squeezed_joint_probability(self.u2m, xis, k, m)
                oracle = squeezed_joint_oracle(self.u2m, xis, k, m)
                self.assertLess(abs(closed - oracle), 1e-8)

    def test_sum_over_outputs(self):
        xis = alternating_squeezing(2, 0.3)
        t = np.tanh(0.3)
        total = sum(squeezed_joint_probability(self.u2m, xis, k, (0, 1)) for k in enumerate_patterns(2, 1))
        self.assertAlmostEqual(total, herald_weight(2, 1, t), places=12)

    def test_unequal_totals(self):
        xis = alternating_squeezing(2, 0.3)
        self.assertEqual(squeezed_joint_probability(self.u2m, xis, (1, 0), (1, 1)), 0.0)

    def test_non_alternating(self):
        with self.assertRaises(ClosedFormInapplicableError):
            squeezed_joint_probability(self.u2m, [0.3, 0.3, 0.3, -0.3], (1, 0), (1, 0))


@pytest.mark.parametrize('modes,photons,t', [(3, 0, 0.0), (40, 0, 0.0), (40, 3, 0.9), (5, 2, 0.5)])
def test_herald_weight(modes, photons, t):
    expected = (1 - t * t) ** modes * t ** (2 * photons)
    assert abs(herald_weight(modes, photons, t) - expected) <= 1e-12 * max(expected, 1e-300)


def test_herald_weight_range():
    with pytest.raises(ParameterError):
        herald_weight(2, 1, 1.0)
