"""
sample command
Writes shot logs from the heralded scattershot sampler or from the exact
conditional sampler of a fixed herald
"""
from typing import Any, Dict, List
import logging

import numpy as np

from bsim.errors import ParameterError
from bsim.experiment import ExperimentConfig
from bsim.observability import traced
from bsim.sampling_engine import chi_square_gof, exact_sampler, heralded_sampler
from bsim.tsbs_model import TsbsConfig, conditional_table

from commands import common

logger = logging.getLogger(__name__)

COLUMNS = ['shot', 'herald_pattern', 'output_pattern']


def _metadata(config: ExperimentConfig) -> Dict[str, Any]:
    return {'model': config.model, 'M': config.modes, 'N': config.photons, 't': config.squeezing,
            'seed': config.seed, 'shots': config.shots}


def _tsbs_config(config: ExperimentConfig) -> TsbsConfig:
    u_a, u_b = common.haar_pair(config, 0)
    return TsbsConfig.equal(config.modes, config.squeezing, u_a, u_b)


def _sample_herald(config: ExperimentConfig):
    shots = heralded_sampler(_tsbs_config(config), config.seed, config.shots, config.max_photons)
    rows = []
    for index, shot in enumerate(shots):
        if shot.overflow:
            rows.append([index, 'overflow', 'overflow'])
        else:
            rows.append([index, common.pattern_text(shot.herald), common.pattern_text(shot.output)])
    metadata = _metadata(config)
    metadata['overflowShots'] = sum(shot.overflow for shot in shots)
    return rows, metadata


def _sample_tsbs(config: ExperimentConfig):
    if config.squeezing == 0.0 and config.photons > 0:
        raise ParameterError("Conditioning on photons needs squeezing t > 0")
    herald = (1,) * config.photons + (0,) * (config.modes - config.photons)
    table = conditional_table(_tsbs_config(config), herald)
    indices = exact_sampler(table, config.seed, config.shots)
    counts = np.bincount(indices, minlength=len(table))
    metadata = _metadata(config)
    try:
        metadata['chiSquareP'] = chi_square_gof(table, counts)
    except ValueError as e:
        logger.warning(f"Goodness-of-fit skipped: {e}")
    herald_text = common.pattern_text(herald)
    rows = [[index, herald_text, common.pattern_text(table.support[i])] for index, i in enumerate(indices)]
    return rows, metadata


SAMPLERS = {
    'herald': _sample_herald,
    'tsbs': _sample_tsbs,
}


@traced('command.sample')
def run(config: ExperimentConfig) -> int:
    """Draw config.shots shots and write them as CSV or JSON"""
    if config.model not in SAMPLERS:
        raise ParameterError(f"sample supports models {sorted(SAMPLERS)}, got {config.model!r}")
    common.check_feasible(config)
    rows, metadata = SAMPLERS[config.model](config)
    if config.format == 'csv':
        common.write_csv(COLUMNS, rows, config.out, metadata)
    else:
        document = common.base_report('sample', config)
        document['metadata'] = metadata
        document['shots'] = [dict(zip(COLUMNS, row)) for row in rows]
        common.write_json(document, config.out)
    return common.EXIT_PASS
