#!/usr/bin/env python3
"""
Sampling Engine Module
Exact samplers over discrete tables, the heralded scattershot sampler, the
heralding-rate optimum and the statistical validators used against them.

Randomness is counter based: shots are grouped in fixed blocks of
Config.SAMPLE_BLOCK and block b draws from make_rng(seed, stream, b), so a run
is reproducible whatever the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb, log, log1p
from threading import Lock
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.optimize import golden
from scipy.stats import chisquare

from bsim.config import Config
from bsim.errors import (DegenerateTableError, ParameterError, SupportMismatchError,
                         UnnormalizedTableError)
from bsim.fock_space import enumerate_patterns
from bsim.observability import traced
from bsim.tables import DistributionTable
from bsim.tensor_core import make_rng
from bsim.tsbs_model import TsbsConfig, conditional_table, herald_weight, joint_probability_general

logger = logging.getLogger(__name__)

STREAM_EXACT = 0
STREAM_HERALD = 1
POOL_THRESHOLD = 5.0
OVERFLOW_KEY = (-1,)


def _run_blocks(draw_block: Callable[[int, int], list], count: int) -> list:
    """Apply draw_block(block_index, size) over fixed blocks and concatenate in order"""
    if count < 0:
        raise ParameterError(f"Shot count must be nonnegative, got {count}")
    block = Config.SAMPLE_BLOCK
    jobs = [(b, min(block, count - b * block)) for b in range((count + block - 1) // block)]
    if Config.WORKERS > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=Config.WORKERS) as pool:
            parts = list(pool.map(lambda job: draw_block(*job), jobs))
    else:
        parts = [draw_block(*job) for job in jobs]
    return [item for part in parts for item in part]


def _inverse_cdf(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, uniforms, side='right'), len(probs) - 1)


@traced('sampling.exact_sampler')
def exact_sampler(table: DistributionTable, seed: int, count: int) -> List[int]:
    """I.i.d. support indices drawn by inverse CDF

    Args:
        table: Normalized distribution
        seed: 64-bit unsigned seed
        count: Number of draws

    Returns:
        List[int]: Indices into table.support
    """
    if not table.normalized:
        raise UnnormalizedTableError(f"Table sums to {table.total!r}, expected 1")

    def draw_block(index: int, size: int) -> list:
        uniforms = make_rng(seed, STREAM_EXACT, index).random(size)
        return _inverse_cdf(table.probs, uniforms).tolist()

    return _run_blocks(draw_block, count)


@dataclass(frozen=True)
class HeraldedShot:
    """One scattershot event: herald pattern m, output pattern k

    Overflow shots had more herald photons than the sampler enumerates.
    """
    herald: Tuple[int, ...]
    output: Tuple[int, ...]
    overflow: bool = False

    def key(self) -> Tuple[int, ...]:
        return OVERFLOW_KEY if self.overflow else self.herald + self.output


def herald_photon_distribution(modes: int, t: float, max_photons: int) -> Tuple[np.ndarray, float]:
    """P(N) = C(N+M-1, M-1)(1 - t^2)^M t^(2N) for N <= max_photons, plus the overflow mass"""
    probs = np.array([comb(n + modes - 1, modes - 1) * herald_weight(modes, n, t)
                      for n in range(max_photons + 1)])
    return probs, max(0.0, 1.0 - float(probs.sum()))


@traced('sampling.heralded_sampler')
def heralded_sampler(cfg: TsbsConfig, seed: int, count: int,
                     max_photons: Optional[int] = None) -> List[HeraldedShot]:
    """Scattershot shots: photon number, herald pattern, then the output given the herald

    Args:
        cfg: Equal-squeezing TSBS configuration
        seed: 64-bit unsigned seed
        count: Number of shots
        max_photons: Largest herald photon number sampled explicitly

    Returns:
        List[HeraldedShot]: Shots in order
    """
    t = cfg.common_t
    max_photons = Config.MAX_PHOTONS if max_photons is None else max_photons
    photon_probs, overflow = herald_photon_distribution(cfg.modes, t, max_photons)
    cell_probs = np.append(photon_probs, overflow)
    cdfs: Dict[Tuple[int, ...], np.ndarray] = {}
    lock = Lock()

    def conditional_cdf(m: Tuple[int, ...]) -> np.ndarray:
        with lock:
            if m not in cdfs:
                cdfs[m] = conditional_table(cfg, m).probs
            return cdfs[m]

    def draw_block(index: int, size: int) -> list:
        uniforms = make_rng(seed, STREAM_HERALD, index).random((size, 3))
        photon_numbers = _inverse_cdf(cell_probs, uniforms[:, 0])
        shots = []
        for n, u_m, u_k in zip(photon_numbers, uniforms[:, 1], uniforms[:, 2]):
            if n > max_photons:
                shots.append(HeraldedShot((), (), overflow=True))
                continue
            heralds = enumerate_patterns(cfg.modes, int(n))
            m = heralds[min(int(u_m * len(heralds)), len(heralds) - 1)]
            outputs = enumerate_patterns(cfg.modes, int(n))
            k = outputs[int(_inverse_cdf(conditional_cdf(m), np.array([u_k]))[0])]
            shots.append(HeraldedShot(m, k))
        return shots

    shots = _run_blocks(draw_block, count)
    logger.info(f"Drew {count} heralded shots (M={cfg.modes}, t={t}, overflow "
                f"{sum(s.overflow for s in shots)})")
    return shots


@traced('sampling.heralded_joint_table')
def heralded_joint_table(cfg: TsbsConfig, max_photons: int) -> DistributionTable:
    """Exact distribution of heralded-sampler keys, overflow cell last"""
    t = cfg.common_t
    support, probs = [], []
    for n in range(max_photons + 1):
        patterns = enumerate_patterns(cfg.modes, n)
        for m in patterns:
            for k in patterns:
                support.append(m + k)
                probs.append(joint_probability_general(cfg, k, m))
    _, overflow = herald_photon_distribution(cfg.modes, t, max_photons)
    support.append(OVERFLOW_KEY)
    probs.append(overflow)
    metadata = {'model': 'herald', 'M': cfg.modes, 't': t, 'maxPhotons': max_photons}
    return DistributionTable(support, probs, metadata)


def herald_success_probability(modes: int, photons: int, t: float) -> float:
    """Probability that exactly N of M heralds fire: C(M, N)(1 - t^2)^M t^(2N)"""
    if photons > modes or photons < 0:
        raise ParameterError(f"Need 0 <= N <= M, got N={photons}, M={modes}")
    return comb(modes, photons) * herald_weight(modes, photons, t)


def optimal_herald_squeezing(modes: int, photons: int) -> float:
    """Golden-section maximizer of herald_success_probability over t

    The stationary point is t^2 = N / (N + M); for N = 1 that is 1/sqrt(M + 1).
    """
    if photons > modes or photons < 0:
        raise ParameterError(f"Need 0 <= N <= M, got N={photons}, M={modes}")
    if photons == 0:
        return 0.0

    def objective(t: float) -> float:
        return -(2 * photons * log(t) + modes * log1p(-t * t))

    grid = np.linspace(1e-3, 1 - 1e-3, 999)
    middle = float(grid[np.argmin([objective(t) for t in grid])])
    return float(golden(objective, brack=(1e-6, middle, 1 - 1e-6), tol=1e-12))


def _check_supports(a: DistributionTable, b: DistributionTable) -> None:
    if a.support != b.support:
        raise SupportMismatchError(f"Supports differ ({len(a)} vs {len(b)} points)")


def total_variation(a: DistributionTable, b: DistributionTable) -> float:
    """Half the L1 distance between two tables on the same support"""
    _check_supports(a, b)
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def _pool_cells(expected: np.ndarray, observed: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Merge cells with expected count below POOL_THRESHOLD, smallest first"""
    order = np.argsort(expected, kind='stable')
    pooled_e, pooled_o = [], []
    run_e = run_o = 0.0
    for i in order:
        if run_e == 0.0 and expected[i] >= POOL_THRESHOLD:
            pooled_e.append(expected[i])
            pooled_o.append(observed[i])
            continue
        run_e += expected[i]
        run_o += observed[i]
        if run_e >= POOL_THRESHOLD:
            pooled_e.append(run_e)
            pooled_o.append(run_o)
            run_e = run_o = 0.0
    if run_e > 0.0 or run_o > 0.0:
        if not pooled_e:
            raise DegenerateTableError("All cells together expect fewer than 5 counts")
        pooled_e[-1] += run_e
        pooled_o[-1] += run_o
    return np.array(pooled_e), np.array(pooled_o)


def chi_square_gof(table: DistributionTable, counts: Sequence[int]) -> float:
    """Goodness-of-fit p-value of observed counts against the table

    Args:
        table: Hypothesized distribution
        counts: Observed count per support point

    Returns:
        float: Chi-square p-value after pooling sparse cells
    """
    observed = np.asarray(counts, dtype=float)
    if observed.size != len(table):
        raise SupportMismatchError(f"{observed.size} counts for {len(table)} cells")
    shots = observed.sum()
    if len(table) < 2 or shots <= 0:
        raise DegenerateTableError(f"Need at least 2 cells and some counts, got {len(table)} cells")
    expected = table.probs / table.total * shots
    pooled_e, pooled_o = _pool_cells(expected, observed)
    if pooled_e.size < 2:
        raise DegenerateTableError("Fewer than 2 cells remain after pooling")
    result = chisquare(pooled_o, pooled_e)
    logger.debug(f"Chi-square {result.statistic:.4f} on {pooled_e.size - 1} dof, p={result.pvalue:.4g}")
    return float(result.pvalue)


def empirical_table(support: Sequence[Tuple[int, ...]], indices: Sequence[int],
                    metadata: Optional[dict] = None) -> DistributionTable:
    """Histogram of support indices as a table on the same support"""
    counts = np.bincount(np.asarray(indices, dtype=int), minlength=len(support))
    return DistributionTable.from_counts(support, counts, metadata)


def shot_counts(table: DistributionTable, shots: Sequence[HeraldedShot]) -> np.ndarray:
    """Counts of heralded shots per support point of `table`"""
    index = {key: i for i, key in enumerate(table.support)}
    counts = np.zeros(len(table), dtype=int)
    for shot in shots:
        key = shot.key()
        if key not in index:
            raise SupportMismatchError(f"Shot {key} is outside the table support")
        counts[index[key]] += 1
    return counts
