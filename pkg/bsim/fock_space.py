#!/usr/bin/env python3
"""
Fock Space Module
Occupation-pattern combinatorics, fixed-photon-number sector states and the
exact action of a linear interferometer on them.

Every state lives in one photon-number sector, so nothing here is truncated:
an M-mode, N-photon sector has C(N+M-1, M-1) basis patterns, enumerated with
the first mode most occupied first.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, prod, sqrt
from typing import Any, Dict, List, Sequence, Tuple
import logging

import numpy as np

from bsim.errors import ConservationError, DimensionError, PatternError
from bsim.tensor_core import as_pattern, as_square, permanent_ryser, reduced_matrix

logger = logging.getLogger(__name__)

Pattern = Tuple[int, ...]


def pattern_count(modes: int, photons: int) -> int:
    """Number of ways to place `photons` bosons in `modes` modes"""
    if modes < 0 or photons < 0:
        raise PatternError(f"Invalid sector: modes={modes}, photons={photons}")
    if modes == 0:
        return 1 if photons == 0 else 0
    return comb(photons + modes - 1, modes - 1)


@lru_cache(maxsize=256)
def _enumerate(modes: int, photons: int) -> Tuple[Pattern, ...]:
    if modes == 1:
        return ((photons,),)
    patterns = []
    for first in range(photons, -1, -1):
        for rest in _enumerate(modes - 1, photons - first):
            patterns.append((first,) + rest)
    return tuple(patterns)


def enumerate_patterns(modes: int, photons: int) -> List[Pattern]:
    """All compositions of `photons` into `modes` nonnegative parts

    Args:
        modes: Mode count M (>= 1)
        photons: Total photon number N (>= 0)

    Returns:
        List[Pattern]: C(N+M-1, M-1) patterns, descending lexicographic order
    """
    if modes < 1 or photons < 0:
        raise PatternError(f"Invalid sector: modes={modes}, photons={photons}")
    return list(_enumerate(modes, photons))


def pattern_rank(pattern: Sequence[int]) -> int:
    """Position of `pattern` in enumerate_patterns(len(pattern), sum(pattern))"""
    values = as_pattern(pattern)
    if not values:
        raise PatternError("Empty pattern has no rank")
    rank = 0
    remaining = sum(values)
    for position, occupation in enumerate(values[:-1]):
        modes_left = len(values) - position - 1
        # patterns with a larger occupation at this position come first
        for larger in range(occupation + 1, remaining + 1):
            rank += pattern_count(modes_left, remaining - larger)
        remaining -= occupation
    return rank


@dataclass(frozen=True, eq=False)
class SectorState:
    """Amplitude vector over one photon-number sector"""
    modes: int
    photons: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        expected = pattern_count(self.modes, self.photons)
        if amps.size != expected:
            raise DimensionError(f"Sector ({self.modes} modes, {self.photons} photons) has "
                                 f"{expected} patterns, got {amps.size} amplitudes")
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def basis(cls, pattern: Sequence[int]) -> 'SectorState':
        """Fock state |pattern>"""
        values = as_pattern(pattern)
        amps = np.zeros(pattern_count(len(values), sum(values)), dtype=complex)
        amps[pattern_rank(values)] = 1.0
        return cls(len(values), sum(values), amps)

    @classmethod
    def from_amplitudes(cls, modes: int, photons: int, amplitudes: Sequence[complex]) -> 'SectorState':
        return cls(modes, photons, np.asarray(amplitudes, dtype=complex))

    @property
    def patterns(self) -> List[Pattern]:
        return enumerate_patterns(self.modes, self.photons)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, pattern: Sequence[int]) -> complex:
        values = as_pattern(pattern, self.modes)
        if sum(values) != self.photons:
            return 0j
        return complex(self.amplitudes[pattern_rank(values)])

    def to_json(self) -> Dict[str, Any]:
        return {
            'modes': self.modes,
            'photons': self.photons,
            're': [float(v) for v in self.amplitudes.real],
            'im': [float(v) for v in self.amplitudes.imag],
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> 'SectorState':
        re = np.asarray(obj['re'], dtype=float)
        im = np.asarray(obj['im'], dtype=float)
        if re.shape != im.shape:
            raise DimensionError(f"re/im length mismatch: {re.size} vs {im.size}")
        return cls(int(obj['modes']), int(obj['photons']), re + 1j * im)


def _factorial_norm(pattern: Pattern) -> float:
    return float(prod(factorial(v) for v in pattern))


def transition_amplitude(u: Any, out_pattern: Sequence[int], in_pattern: Sequence[int]) -> complex:
    """<out| U |in> = Perm(U[out rows, in cols]) / sqrt(prod out! * prod in!)

    Args:
        u: M x M interferometer matrix (columns are input modes)
        out_pattern: Output occupations k
        in_pattern: Input occupations n

    Returns:
        complex: Fock-space transition amplitude
    """
    u = as_square(u, "interferometer")
    k = as_pattern(out_pattern, u.shape[0], "output pattern")
    n = as_pattern(in_pattern, u.shape[0], "input pattern")
    if sum(k) != sum(n):
        raise ConservationError(f"Photon number not conserved: out={k} ({sum(k)}), in={n} ({sum(n)})")
    if sum(k) == 0:
        return 1 + 0j
    perm = permanent_ryser(reduced_matrix(u, k, n))
    return perm / sqrt(_factorial_norm(k) * _factorial_norm(n))


def _sector_columns(u: np.ndarray, photons: int, columns: Sequence[int]) -> np.ndarray:
    patterns = enumerate_patterns(u.shape[0], photons)
    block = np.empty((len(patterns), len(columns)), dtype=complex)
    for j, col in enumerate(columns):
        source = patterns[col]
        for i, target in enumerate(patterns):
            block[i, j] = transition_amplitude(u, target, source)
    return block


def sector_unitary(u: Any, photons: int) -> np.ndarray:
    """Dense matrix of all transition amplitudes in the `photons` sector"""
    u = as_square(u, "interferometer")
    dim = pattern_count(u.shape[0], photons)
    logger.debug(f"Building {dim}x{dim} sector matrix for M={u.shape[0]}, N={photons}")
    return _sector_columns(u, photons, range(dim))


def apply_interferometer(state: SectorState, u: Any) -> SectorState:
    """Propagate a sector state through the interferometer U

    Only input patterns with nonzero amplitude are expanded.
    """
    u = as_square(u, "interferometer")
    if u.shape[0] != state.modes:
        raise DimensionError(f"Interferometer has {u.shape[0]} modes, state has {state.modes}")
    support = np.flatnonzero(state.amplitudes)
    if support.size == 0:
        return SectorState(state.modes, state.photons, np.zeros_like(state.amplitudes))
    block = _sector_columns(u, state.photons, support)
    return SectorState(state.modes, state.photons, block @ state.amplitudes[support])


def sector_overlap(a: SectorState, b: SectorState) -> complex:
    """<a|b> with the bra conjugated"""
    if a.modes != b.modes or a.photons != b.photons:
        raise DimensionError(f"Sector mismatch: ({a.modes}, {a.photons}) vs ({b.modes}, {b.photons})")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
