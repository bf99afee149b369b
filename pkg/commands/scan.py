"""
scan command
Evaluates one quantity over a parameter grid and writes plot-ready rows
"""
from typing import Any, Dict, List, Tuple
import logging

from bsim.errors import ParameterError
from bsim.experiment import ExperimentConfig
from bsim.gaussian_optics import build_tsbs_unitary
from bsim.homodyne_model import EightPortSpec, box_expansion_sweep
from bsim.observability import traced
from bsim.sampling_engine import herald_success_probability
from bsim.tsbs_model import herald_weight

from commands import common

logger = logging.getLogger(__name__)


def _scan_herald(config: ExperimentConfig, grid: List[float]) -> Tuple[List[str], List[list]]:
    rows = [[t, herald_success_probability(config.modes, config.photons, t)] for t in grid]
    return ['parameter', 'value'], rows


def _scan_tsbs(config: ExperimentConfig, grid: List[float]) -> Tuple[List[str], List[list]]:
    rows = [[t, herald_weight(config.modes, config.photons, t)] for t in grid]
    return ['parameter', 'value'], rows


def _scan_homodyne(config: ExperimentConfig, grid: List[float]) -> Tuple[List[str], List[list]]:
    spec = EightPortSpec.alternating(config.modes, config.xi)
    u_a, u_b = common.haar_pair(config, 0)
    u_g = build_tsbs_unitary(u_a, u_b).conj().T
    sweep = box_expansion_sweep(spec, u_g, (config.photons, config.photons), grid)
    rows = []
    for previous, row in zip([None] + sweep[:-1], sweep):
        ratio = previous['residual'] / row['residual'] if previous and row['residual'] > 0 else None
        rows.append([row['eta'], row['residual'], ratio, row['box'], row['expansion'], row['order']])
    return ['parameter', 'value', 'ratio', 'box', 'expansion', 'order'], rows


SCANS = {
    'herald': _scan_herald,
    'tsbs': _scan_tsbs,
    'homodyne': _scan_homodyne,
}


@traced('command.scan')
def run(config: ExperimentConfig) -> int:
    """Scan config.grid for config.model"""
    if config.model not in SCANS:
        raise ParameterError(f"scan supports models {sorted(SCANS)}, got {config.model!r}")
    grid = config.grid_values()
    common.check_feasible(config)
    columns, rows = SCANS[config.model](config, grid)
    best = max(rows, key=lambda row: row[1])
    logger.info(f"Scanned {len(rows)} points; maximum value {best[1]:.6g} at {best[0]:.6g}")
    if config.format == 'csv':
        common.write_csv(columns, rows, config.out, {'model': config.model, 'M': config.modes,
                                                     'N': config.photons, 'seed': config.seed})
    else:
        document: Dict[str, Any] = common.base_report('scan', config)
        document['rows'] = [dict(zip(columns, row)) for row in rows]
        common.write_json(document, config.out)
    return common.EXIT_PASS
