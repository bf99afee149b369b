#!/usr/bin/env python3
"""
TSBS Model Module
Photon-counting distributions of twofold scattershot boson sampling: M two-mode
squeezed vacua whose A legs cross U_A and whose B legs cross U_B.

Conditioning on the B-side pattern m reduces the experiment to ordinary boson
sampling of m through the time-unfolded matrix U_A U_B^T.
"""
from dataclasses import dataclass
from math import factorial, log, log1p, prod
from typing import Any, Sequence, Tuple
import logging

import numpy as np

from bsim.config import Config
from bsim.errors import (ClosedFormInapplicableError, ConditioningError, ConservationError,
                         DimensionError, NotUnitaryError, ParameterError)
from bsim.fock_space import (SectorState, apply_interferometer, enumerate_patterns,
                             pattern_rank, transition_amplitude)
from bsim.gaussian_optics import is_alternating, split_tsbs_unitary, squeezed_product_sector
from bsim.observability import traced
from bsim.tables import DistributionTable
from bsim.tensor_core import as_pattern, as_square, direct_sum, is_unitary, permanent_ryser, reduced_matrix

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class TsbsConfig:
    """Mode count, per-source squeezing t_j and the two interferometers"""
    modes: int
    t: np.ndarray
    u_a: np.ndarray
    u_b: np.ndarray

    def __post_init__(self):
        if self.modes < 1:
            raise DimensionError(f"Mode count must be >= 1, got {self.modes}")
        t = np.asarray(self.t, dtype=float).ravel()
        if t.size != self.modes:
            raise DimensionError(f"Expected {self.modes} squeezing values, got {t.size}")
        if np.any(t < 0.0) or np.any(t >= 1.0):
            raise ParameterError(f"Squeezing values must lie in [0, 1): {t.tolist()}")
        object.__setattr__(self, 't', t)
        for name in ('u_a', 'u_b'):
            u = as_square(getattr(self, name), name.upper())
            if u.shape[0] != self.modes:
                raise DimensionError(f"{name.upper()} is {u.shape}, expected {self.modes}x{self.modes}")
            if not is_unitary(u, UNITARY_TOLERANCE):
                raise NotUnitaryError(f"{name.upper()} is not unitary")
            object.__setattr__(self, name, u)

    @classmethod
    def equal(cls, modes: int, t: float, u_a: Any, u_b: Any) -> 'TsbsConfig':
        return cls(modes, np.full(modes, float(t)), u_a, u_b)

    @property
    def equal_squeezing(self) -> bool:
        return bool(np.all(self.t == self.t[0]))

    @property
    def common_t(self) -> float:
        if not self.equal_squeezing:
            raise ClosedFormInapplicableError(
                f"Closed form needs equal squeezing, got t={self.t.tolist()}; use the summation path")
        return float(self.t[0])


def time_unfolded_unitary(u_a: Any, u_b: Any) -> np.ndarray:
    """Single-interferometer equivalent U_A U_B^T of the two-sided circuit"""
    return as_square(u_a, "U_A") @ as_square(u_b, "U_B").T


def herald_weight(modes: int, photons: int, t: float) -> float:
    """(1 - t^2)^M t^(2N), in log space above Config.LOG_SPACE_MODES modes"""
    if not 0.0 <= t < 1.0:
        raise ParameterError(f"Squeezing t must lie in [0, 1), got {t}")
    if modes <= Config.LOG_SPACE_MODES:
        return (1.0 - t * t) ** modes * t ** (2 * photons)
    if t == 0.0:
        return 1.0 if photons == 0 else 0.0
    return float(np.exp(modes * log1p(-t * t) + 2 * photons * log(t)))


def _factorial_norm(pattern: Tuple[int, ...]) -> float:
    return float(prod(factorial(v) for v in pattern))


def _monomials(t: np.ndarray, patterns: np.ndarray) -> Tuple[np.ndarray, float]:
    """Weights prod_j t_j^n_j, rescaled by exp(-shift) when evaluated in log space"""
    if t.size <= Config.LOG_SPACE_MODES:
        return np.prod(t[np.newaxis, :] ** patterns, axis=1), 0.0
    with np.errstate(divide='ignore'):
        log_t = np.log(t)
    log_w = np.where(patterns > 0, patterns * log_t[np.newaxis, :], 0.0).sum(axis=1)
    finite = np.isfinite(log_w)
    if not finite.any():
        return np.zeros(len(patterns)), 0.0
    shift = float(log_w[finite].max())
    return np.where(finite, np.exp(log_w - shift), 0.0), shift


def joint_probability_general(cfg: TsbsConfig, k: Sequence[int], m: Sequence[int]) -> float:
    """Probability of detecting k on side A and m on side B

    Sums prod_j t_j^n_j <k|U_A|n><m|U_B|n> over every n with the same total,
    so unequal squeezing is allowed. Different totals give exactly 0.

    Args:
        cfg: TSBS configuration
        k: Side-A output pattern
        m: Side-B output pattern

    Returns:
        float: Joint probability
    """
    k = as_pattern(k, cfg.modes, "k")
    m = as_pattern(m, cfg.modes, "m")
    if sum(k) != sum(m):
        return 0.0
    patterns = enumerate_patterns(cfg.modes, sum(k))
    weights, shift = _monomials(cfg.t, np.array(patterns, dtype=int))
    amplitude = 0j
    for weight, n in zip(weights, patterns):
        if weight == 0.0:
            continue
        amplitude += weight * transition_amplitude(cfg.u_a, k, n) * transition_amplitude(cfg.u_b, m, n)
    if shift == 0.0:
        return float(np.prod(1.0 - cfg.t ** 2) * abs(amplitude) ** 2)
    if amplitude == 0:
        return 0.0
    log_prob = float(np.sum(np.log1p(-cfg.t ** 2))) + 2.0 * shift + 2.0 * log(abs(amplitude))
    return float(np.exp(log_prob))


def marginal_probability(cfg: TsbsConfig, m: Sequence[int]) -> float:
    """Closed-form B-side marginal (1 - t^2)^M t^(2N), independent of U_B

    Raises:
        ClosedFormInapplicableError: If the squeezing is not equal
    """
    t = cfg.common_t
    m = as_pattern(m, cfg.modes, "m")
    return herald_weight(cfg.modes, sum(m), t)


def marginal_probability_summed(cfg: TsbsConfig, m: Sequence[int]) -> float:
    """B-side marginal by summing the joint over every k"""
    m = as_pattern(m, cfg.modes, "m")
    return float(sum(joint_probability_general(cfg, k, m) for k in enumerate_patterns(cfg.modes, sum(m))))


def conditional_probability(cfg: TsbsConfig, k: Sequence[int], m: Sequence[int]) -> float:
    """p(k | m) = joint / marginal, which no longer depends on t"""
    marginal = marginal_probability(cfg, m)
    if marginal == 0.0:
        raise ConditioningError(f"Herald pattern {tuple(m)} has zero probability at t={cfg.common_t}")
    return joint_probability_general(cfg, k, m) / marginal


@traced('tsbs.conditional_table')
def conditional_table(cfg: TsbsConfig, m: Sequence[int]) -> DistributionTable:
    """Distribution of side-A patterns given the herald m"""
    m = as_pattern(m, cfg.modes, "m")
    support = enumerate_patterns(cfg.modes, sum(m))
    probs = [conditional_probability(cfg, k, m) for k in support]
    metadata = {'model': 'tsbs', 'M': cfg.modes, 'N': sum(m), 't': cfg.common_t, 'herald': list(m)}
    return DistributionTable(support, probs, metadata)


def unfolded_probability(u_a: Any, u_b: Any, k: Sequence[int], m: Sequence[int]) -> float:
    """Standard boson-sampling probability of k from input m through U_A U_B^T

    Args:
        u_a: Side-A interferometer
        u_b: Side-B interferometer
        k: Output pattern
        m: Input pattern (bunched inputs are normalized by prod m_i!)

    Returns:
        float: |Perm U_{k,m}|^2 / (prod k_i! prod m_i!)
    """
    u = time_unfolded_unitary(u_a, u_b)
    k = as_pattern(k, u.shape[0], "k")
    m = as_pattern(m, u.shape[0], "m")
    if sum(k) != sum(m):
        raise ConservationError(f"Photon number not conserved: k={k}, m={m}")
    perm = permanent_ryser(reduced_matrix(u, k, m))
    return abs(perm) ** 2 / (_factorial_norm(k) * _factorial_norm(m))


@traced('tsbs.two_sided_joint_table')
def two_sided_joint_table(cfg: TsbsConfig, photons: int) -> np.ndarray:
    """Joint table of (k, m) from a full 2M-mode Fock simulation

    Prepares the N-photon-per-side component of the TMSS product on modes
    (A_1..A_M, B_1..B_M), applies U_A (+) U_B and reads off every (k, m).

    Returns:
        np.ndarray: D x D array indexed by (rank k, rank m)
    """
    patterns = enumerate_patterns(cfg.modes, photons)
    amplitudes = np.zeros(len(enumerate_patterns(2 * cfg.modes, 2 * photons)), dtype=complex)
    scale = np.sqrt(np.prod(1.0 - cfg.t ** 2))
    for n in patterns:
        amplitudes[pattern_rank(n + n)] = scale * np.prod(cfg.t ** np.array(n))
    state = SectorState(2 * cfg.modes, 2 * photons, amplitudes)
    evolved = apply_interferometer(state, direct_sum(cfg.u_a, cfg.u_b))
    table = np.empty((len(patterns), len(patterns)))
    for i, k in enumerate(patterns):
        for j, m in enumerate(patterns):
            table[i, j] = abs(evolved.amplitude(k + m)) ** 2
    return table


def _squeezing_split(u2m: Any, k: Sequence[int], m: Sequence[int]):
    u_a, u_b = split_tsbs_unitary(u2m)
    k = as_pattern(k, u_a.shape[0], "k")
    m = as_pattern(m, u_a.shape[0], "m")
    return u_a, u_b, k, m


def squeezed_joint_probability(u2m: Any, xi: Sequence[float], k: Sequence[int], m: Sequence[int]) -> float:
    """Closed form for alternating squeezed-vacuum inputs through build_tsbs_unitary

    (1 - t^2)^M t^(2N) |Perm U_{k,m}|^2 / (prod k! prod m!) with t = tanh(xi)
    and U = U_A U_B^T.
    """
    xi = np.asarray(xi, dtype=float)
    if not is_alternating(xi):
        raise ClosedFormInapplicableError(f"Squeezing is not alternating +/-xi: {xi.tolist()}")
    u_a, u_b, k, m = _squeezing_split(u2m, k, m)
    if xi.size != 2 * u_a.shape[0]:
        raise DimensionError(f"{xi.size} squeezers for {2 * u_a.shape[0]} modes")
    if sum(k) != sum(m):
        return 0.0
    t = abs(np.tanh(xi[0]))
    return herald_weight(u_a.shape[0], sum(k), t) * unfolded_probability(u_a, u_b, k, m)


def squeezed_joint_oracle(u2m: Any, xi: Sequence[float], k: Sequence[int], m: Sequence[int]) -> float:
    """Same probability from the sector-projected squeezed product state"""
    u2m = as_square(u2m, "U")
    xi = np.asarray(xi, dtype=float)
    if xi.size != u2m.shape[0]:
        raise DimensionError(f"{xi.size} squeezers for {u2m.shape[0]} modes")
    outcome = as_pattern(tuple(k) + tuple(m), u2m.shape[0], "k+m")
    state = squeezed_product_sector(xi, sum(outcome))
    evolved = apply_interferometer(state, u2m)
    return abs(evolved.amplitude(outcome)) ** 2
