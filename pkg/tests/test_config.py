#!/usr/bin/env python3
"""
Tests for environment configuration, run configuration and observability helpers
"""
import json
import os
import sys
import tempfile
import unittest
from unittest.mock import patch

import pytest
from pydantic import ValidationError

# Add parent directory to path
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from bsim.config import Config
from bsim.experiment import ExperimentConfig
from bsim.observability import get_apm_stats, record_apm_operation, reset_apm_stats, traced

SETTINGS = ['LOG_LEVEL', 'LOG_FORMAT', 'WORKERS', 'PERMANENT_CHUNKS', 'PARALLEL_MIN_ORDER', 'SAMPLE_BLOCK',
            'QUADRATURE_ORDER', 'QUADRATURE_TOLERANCE', 'TAIL_TOLERANCE', 'MAX_TSBS_MODES', 'MAX_PHOTONS',
            'LOG_SPACE_MODES']


class TestConfig(unittest.TestCase):
    """Test Config.load and validation"""

    def setUp(self):
        self.saved = {key: getattr(Config, key) for key in SETTINGS}

    def tearDown(self):
        for key, value in self.saved.items():
            setattr(Config, key, value)

    def test_environment_overrides(self):
        with patch.dict(os.environ, {'BSIM_WORKERS': '4', 'BSIM_QUADRATURE_ORDER': '24',
                                     'BSIM_TAIL_TOLERANCE': '1e-10'}):
            Config.load()
        self.assertEqual(Config.WORKERS, 4)
        self.assertEqual(Config.QUADRATURE_ORDER, 24)
        self.assertEqual(Config.TAIL_TOLERANCE, 1e-10)

    def test_invalid_integer_falls_back(self):
        with patch.dict(os.environ, {'BSIM_SAMPLE_BLOCK': 'lots'}):
            Config.load()
        self.assertEqual(Config.SAMPLE_BLOCK, self.saved['SAMPLE_BLOCK'])

    def test_validation_collects_errors(self):
        with patch.dict(os.environ, {'BSIM_WORKERS': '0', 'BSIM_QUADRATURE_ORDER': '4'}):
            with self.assertRaises(ValueError) as ctx:
                Config.load()
        self.assertIn('BSIM_WORKERS', str(ctx.exception))
        self.assertIn('BSIM_QUADRATURE_ORDER', str(ctx.exception))

    def test_invalid_log_format(self):
        with patch.dict(os.environ, {'BSIM_LOG_FORMAT': 'xml'}):
            with self.assertRaises(ValueError):
                Config.load()

    def test_summary(self):
        summary = Config.get_summary()
        self.assertEqual(summary['app_name'], Config.APP_NAME)
        self.assertIn('quadrature_order', summary)
        self.assertIn('workers', summary)


class TestExperimentConfig(unittest.TestCase):
    """Test run configuration parsing"""

    def test_defaults(self):
        config = ExperimentConfig(model='tsbs')
        self.assertEqual(config.modes, 2)
        self.assertEqual(config.photons, 1)
        self.assertEqual(config.squeezing, 0.5)
        self.assertAlmostEqual(config.xi, 0.5493061443340549, places=12)

    def test_xi_derives_squeezing(self):
        config = ExperimentConfig(model='squeezed', xi=0.3)
        self.assertAlmostEqual(config.squeezing, 0.2913126124515909, places=12)

    def test_inconsistent_squeezing(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='tsbs', squeezing=0.5, xi=0.1)

    def test_squeezing_range(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='tsbs', squeezing=1.0)

    def test_photons_above_modes(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='tsbs', modes=2, photons=3)

    def test_unknown_model(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='gbs')

    def test_seed_range(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='tsbs', seed=-1)
        with self.assertRaises(ValidationError):
            ExperimentConfig(model='tsbs', seed=2 ** 64)

    def test_config_file_and_overrides(self):
        with tempfile.NamedTemporaryFile('w', suffix='.json', delete=False) as handle:
            json.dump({'model': 'herald', 'modes': 4, 'seed': 3}, handle)
            path = handle.name
        try:
            config = ExperimentConfig.from_sources(path, {'seed': 9, 'shots': None})
        finally:
            os.unlink(path)
        self.assertEqual(config.model, 'herald')
        self.assertEqual(config.modes, 4)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.shots, 1000)


@pytest.mark.parametrize('grid,expected', [
    ('0.1,0.2,0.4', [0.1, 0.2, 0.4]),
    ('0:1:5', [0.0, 0.25, 0.5, 0.75, 1.0]),
    ('0.3:0.9:1', [0.3]),
])
def test_grid_values(grid, expected):
    values = ExperimentConfig(model='herald', grid=grid).grid_values()
    assert values == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize('grid', [None, '', '  ', '0:1', '0:1:0', ','])
def test_grid_values_rejects(grid):
    with pytest.raises(ValueError):
        ExperimentConfig(model='herald', grid=grid).grid_values()


def test_traced_records_operations():
    reset_apm_stats()

    @traced('test.operation')
    def work(x):
        return x * 2

    assert work(3) == 6
    stats = get_apm_stats()
    assert stats['operation_stats']['test.operation']['count'] == 1
    assert stats['summary']['total_errors'] == 0


def test_traced_records_failures():
    reset_apm_stats()

    @traced('test.failing')
    def broken():
        raise ValueError('boom')

    with pytest.raises(ValueError):
        broken()
    stats = get_apm_stats()
    assert stats['operation_stats']['test.failing']['errors'] == 1
    assert stats['recent_errors'][0]['error'] == 'boom'


def test_record_apm_operation_error_keyword():
    reset_apm_stats()
    record_apm_operation('kernel.fast', 2.0)
    record_apm_operation('kernel.fast', 4.0, error='diverged')
    record_apm_operation('kernel.slow', 1500.0)
    stats = get_apm_stats()
    fast = stats['operation_stats']['kernel.fast']
    assert (fast['count'], fast['errors']) == (2, 1)
    assert fast['min_duration_ms'] == 2.0
    assert fast['max_duration_ms'] == 4.0
    assert stats['recent_errors'] == [{'operation': 'kernel.fast', 'error': 'diverged', 'duration_ms': 4.0}]
    assert [entry['operation'] for entry in stats['slow_operations']] == ['kernel.slow']
    assert stats['summary'] == {'total_operations': 3, 'total_errors': 1, 'total_slow_operations': 1}
    reset_apm_stats()
