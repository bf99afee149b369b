"""
Shared helpers for the bs-sim commands: exit codes, feasibility guards,
Haar draws and report/CSV writers
"""
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, Sequence, TextIO, Tuple
import csv
import json
import logging
import sys

import numpy as np

from bsim.config import Config
from bsim.errors import FeasibilityError
from bsim.experiment import ExperimentConfig
from bsim.tables import format_float
from bsim.tensor_core import haar_unitary

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2


def check_feasible(config: ExperimentConfig) -> None:
    """Reject sizes beyond the exact enumeration limits"""
    if config.modes > Config.MAX_TSBS_MODES:
        raise FeasibilityError(f"M={config.modes} exceeds the desk-scale limit of "
                               f"{Config.MAX_TSBS_MODES} modes (BSIM_MAX_TSBS_MODES)")
    if config.photons > Config.MAX_PHOTONS:
        raise FeasibilityError(f"N={config.photons} exceeds the desk-scale limit of "
                               f"{Config.MAX_PHOTONS} photons (BSIM_MAX_PHOTONS)")


def haar_pair(config: ExperimentConfig, trial: int) -> Tuple[np.ndarray, np.ndarray]:
    """U_A and U_B for one trial, from independent streams of the run seed"""
    return (haar_unitary(config.modes, config.seed, stream=2 * trial),
            haar_unitary(config.modes, config.seed, stream=2 * trial + 1))


def identity_result(identity: str, deviation: float, tolerance: float, **details: Any) -> Dict[str, Any]:
    """One verification line of a report"""
    passed = bool(deviation < tolerance)
    level = logging.INFO if passed else logging.WARNING
    logger.log(level, f"{identity}: maxDeviation={deviation:.3e} tolerance={tolerance:.1e} "
                      f"{'pass' if passed else 'FAIL'}")
    return {'identity': identity, 'maxDeviation': float(deviation), 'tolerance': tolerance,
            'pass': passed, **details}


def base_report(command: str, config: ExperimentConfig) -> Dict[str, Any]:
    return {
        'command': command,
        'model': config.model,
        'config': config.model_dump(),
        'settings': Config.get_summary(),
    }


def pattern_text(pattern: Sequence[int]) -> str:
    return ' '.join(str(v) for v in pattern)


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Write to `path`, or stdout when no path is given"""
    if path is None:
        yield sys.stdout
        return
    with open(path, 'w', newline='') as stream:
        yield stream


def write_json(document: Dict[str, Any], path: Optional[str]) -> None:
    with open_output(path) as stream:
        json.dump(document, stream, indent=2, sort_keys=False, default=str)
        stream.write('\n')
    if path:
        logger.info(f"Wrote JSON report to {path}")


def write_csv(columns: List[str], rows: List[Sequence[Any]], path: Optional[str],
              metadata: Optional[Dict[str, Any]] = None) -> None:
    """CSV with `#` metadata lines; floats use 17 significant digits"""
    with open_output(path) as stream:
        for key, value in (metadata or {}).items():
            stream.write(f"# {key}={json.dumps(value, default=str)}\n")
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    if path:
        logger.info(f"Wrote {len(rows)} CSV rows to {path}")
