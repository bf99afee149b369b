#!/usr/bin/env python3
"""
Gaussian Optics Module
Fock-basis coefficients of the Gaussian states used by the models, the fixed
optical layers of the twofold scattershot circuit and the unitary embedding of
an arbitrary matrix.

Conventions: D(alpha) = exp(alpha b^dagger - alpha* b) and
S(xi) = exp[xi/2 (b^dagger^2 - b^2)] with real xi, so t = tanh(xi) and the
balanced beam splitter turns S(xi)|0> (x) S(-xi)|0> into a two-mode squeezed
vacuum with amplitudes sqrt(1 - t^2) (-t)^n on |n, n>.
"""
from dataclasses import dataclass
from math import cosh, sinh, sqrt, tanh
from typing import Any, Sequence, Tuple
import logging

import numpy as np
from scipy.linalg import block_diag, expm

from bsim.config import Config
from bsim.errors import (DegenerateNormError, DimensionError, NotUnitaryError,
                         ParameterError, TailMassError)
from bsim.fock_space import SectorState, apply_interferometer, enumerate_patterns
from bsim.tensor_core import as_square, direct_sum, is_unitary

logger = logging.getLogger(__name__)

CUTOFF_LIMIT = 4096
UNITARY_TOLERANCE = 1e-10


def _check_t(t: float) -> float:
    if not 0.0 <= t < 1.0:
        raise ParameterError(f"Squeezing t must lie in [0, 1), got {t}")
    return float(t)


def tmss_coefficient(t: float, n: int) -> float:
    """Amplitude sqrt(1 - t^2) t^n of |n>_A |n>_B in a two-mode squeezed vacuum"""
    t = _check_t(t)
    return sqrt(1.0 - t * t) * t ** n


def thermal_diagonal(t: float, n: int) -> float:
    """Occupation probability (1 - t^2) t^(2n) of the reduced thermal state"""
    t = _check_t(t)
    return (1.0 - t * t) * t ** (2 * n)


def alternating_squeezing(mode_pairs: int, xi: float) -> np.ndarray:
    """Squeeze vector (xi, -xi, ..., xi, -xi) over 2 * mode_pairs modes"""
    if mode_pairs < 1:
        raise DimensionError(f"Need at least one mode pair, got {mode_pairs}")
    return np.tile([float(xi), -float(xi)], mode_pairs)


def is_alternating(xis: Sequence[float], tol: float = 1e-12) -> bool:
    xis = np.asarray(xis, dtype=float)
    if xis.size == 0 or xis.size % 2:
        return False
    return bool(np.all(np.abs(xis[0::2] - xis[0]) < tol) and np.all(np.abs(xis[1::2] + xis[0]) < tol))


def squeezed_vacuum_coefficients(xi: float, n_max: int) -> np.ndarray:
    """Fock coefficients c_0..c_nMax of S(xi)|0>

    Args:
        xi: Real squeezing parameter
        n_max: Even truncation index

    Returns:
        np.ndarray: Real coefficients; odd entries are zero
    """
    if n_max < 0 or n_max % 2:
        raise ParameterError(f"n_max must be a nonnegative even integer, got {n_max}")
    coeffs = np.zeros(n_max + 1)
    coeffs[0] = 1.0 / sqrt(cosh(xi))
    t = tanh(xi)
    for n in range(0, n_max - 1, 2):
        coeffs[n + 2] = coeffs[n] * t * sqrt((n + 1) / (n + 2))
    return coeffs


def displaced_squeezed_table(alphas: Any, xi: float, n_max: int) -> np.ndarray:
    """Coefficients of D(alpha) S(xi)|0> for an array of displacements

    Runs the eigenvalue recurrence of mu*b - nu*b^dagger,
    mu sqrt(n+1) c_{n+1} = (mu alpha - nu alpha*) c_n + nu sqrt(n) c_{n-1},
    from the closed-form vacuum component. No tail check.

    Args:
        alphas: Complex displacements of any shape
        xi: Real squeezing parameter
        n_max: Last Fock index

    Returns:
        np.ndarray: Shape alphas.shape + (n_max + 1,)
    """
    alphas = np.asarray(alphas, dtype=complex)
    mu, nu = cosh(xi), sinh(xi)
    table = np.zeros(alphas.shape + (n_max + 1,), dtype=complex)
    table[..., 0] = np.exp(-0.5 * np.abs(alphas) ** 2 + 0.5 * tanh(xi) * np.conj(alphas) ** 2) / sqrt(mu)
    eigenvalue = mu * alphas - nu * np.conj(alphas)
    for n in range(n_max):
        value = eigenvalue * table[..., n]
        if n > 0:
            value = value + nu * sqrt(n) * table[..., n - 1]
        table[..., n + 1] = value / (mu * sqrt(n + 1))
    return table


def tail_mass(coeffs: np.ndarray) -> float:
    """Probability discarded by truncating a normalized state to `coeffs`"""
    return max(0.0, 1.0 - float(np.sum(np.abs(coeffs) ** 2)))


def displaced_squeezed_coefficients(alpha: complex, xi: float, n_max: int,
                                    tol: float = None) -> np.ndarray:
    """Fock coefficients c_0..c_nMax of D(alpha) S(xi)|0>

    Args:
        alpha: Complex displacement
        xi: Real squeezing parameter
        n_max: Last Fock index
        tol: Largest allowed discarded tail (Config.TAIL_TOLERANCE by default)

    Returns:
        np.ndarray: Complex coefficients

    Raises:
        TailMassError: If the truncation discards more than `tol`
    """
    tol = Config.TAIL_TOLERANCE if tol is None else tol
    coeffs = displaced_squeezed_table(alpha, xi, n_max)
    tail = tail_mass(coeffs)
    if tail > tol:
        raise TailMassError(f"n_max={n_max} discards tail mass {tail:.3e} > {tol:.1e} "
                            f"(alpha={alpha}, xi={xi})")
    return coeffs


def adaptive_cutoff(alpha: complex, xi: float, tol: float = None) -> int:
    """Smallest n_max whose discarded tail stays below `tol`"""
    tol = Config.TAIL_TOLERANCE if tol is None else tol
    n_max = 16
    while n_max <= CUTOFF_LIMIT:
        coeffs = displaced_squeezed_table(alpha, xi, n_max)
        weights = np.abs(coeffs) ** 2
        tails = 1.0 - np.cumsum(weights)
        below = np.flatnonzero(tails <= tol)
        if below.size:
            return int(below[0])
        n_max *= 2
    raise TailMassError(f"No cutoff below {CUTOFF_LIMIT} reaches tail {tol:.1e} (alpha={alpha}, xi={xi})")


def ladder_operator(levels: int) -> np.ndarray:
    """Truncated annihilation operator on `levels` Fock levels"""
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)


def operator_exponential_state(alpha: complex, xi: float, levels: int) -> np.ndarray:
    """D(alpha) S(xi)|0> by matrix exponentials in a truncated Fock space

    Independent of the closed forms above; only the lowest levels are
    trustworthy once the state has weight near the truncation edge.
    """
    if levels < 2:
        raise ParameterError(f"Need at least 2 levels, got {levels}")
    b = ladder_operator(levels)
    bd = b.conj().T
    squeeze = expm(0.5 * xi * (bd @ bd - b @ b))
    displace = expm(alpha * bd - np.conj(alpha) * b)
    vacuum = np.zeros(levels, dtype=complex)
    vacuum[0] = 1.0
    return displace @ (squeeze @ vacuum)


def product_sector_amplitudes(tables: Sequence[np.ndarray], total: int) -> np.ndarray:
    """Total-photon-number component of a product state

    Args:
        tables: Per-mode coefficient arrays, each of shape (..., >= total + 1)
        total: Photon-number sector to project on

    Returns:
        np.ndarray: Shape (..., pattern_count) in enumerate_patterns order
    """
    patterns = np.array(enumerate_patterns(len(tables), total), dtype=int)
    amps = None
    for mode, table in enumerate(tables):
        factor = np.asarray(table)[..., patterns[:, mode]]
        amps = factor if amps is None else amps * factor
    return amps


def squeezed_product_sector(xis: Sequence[float], total: int) -> SectorState:
    """Unnormalized `total`-photon component of (x)_j S(xi_j)|0>"""
    n_max = total + total % 2
    tables = [squeezed_vacuum_coefficients(xi, n_max) for xi in xis]
    return SectorState.from_amplitudes(len(tables), total, product_sector_amplitudes(tables, total))


def displaced_squeezed_product_sector(alphas: Sequence[complex], xis: Sequence[float],
                                      total: int) -> SectorState:
    """Unnormalized `total`-photon component of (x)_j D(alpha_j) S(xi_j)|0>"""
    if len(alphas) != len(xis):
        raise DimensionError(f"{len(alphas)} displacements for {len(xis)} squeezers")
    tables = [displaced_squeezed_table(alpha, xi, total) for alpha, xi in zip(alphas, xis)]
    return SectorState.from_amplitudes(len(tables), total, product_sector_amplitudes(tables, total))


def beamsplitter_unitary() -> np.ndarray:
    """Balanced beam splitter (1/sqrt 2)[[1, 1], [-1, 1]]"""
    return np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex) / sqrt(2.0)


def beamsplitter_tmss_sector(xi: float, n: int) -> SectorState:
    """Beam splitter applied to S(xi)|0> (x) S(-xi)|0>, projected on 2n photons"""
    state = squeezed_product_sector([xi, -xi], 2 * n)
    return apply_interferometer(state, beamsplitter_unitary())


def routing_permutation(mode_pairs: int) -> np.ndarray:
    """Send the first output of beam splitter i to side-A mode i, the second to side-B mode i"""
    size = 2 * mode_pairs
    perm = np.zeros((size, size), dtype=complex)
    for i in range(mode_pairs):
        perm[i, 2 * i] = 1.0
        perm[mode_pairs + i, 2 * i + 1] = 1.0
    return perm


def pairwise_beamsplitters(mode_pairs: int) -> np.ndarray:
    """Beam splitters on mode pairs (2i, 2i+1)"""
    return block_diag(*[beamsplitter_unitary()] * mode_pairs)


def _fixed_layers(mode_pairs: int) -> np.ndarray:
    return routing_permutation(mode_pairs) @ pairwise_beamsplitters(mode_pairs)


def build_tsbs_unitary(u_a: Any, u_b: Any) -> np.ndarray:
    """(U_A (+) U_B) . P . (+)_i U_BS on 2M modes

    Args:
        u_a: Side-A interferometer (M x M)
        u_b: Side-B interferometer (M x M)

    Returns:
        np.ndarray: 2M x 2M unitary acting on the alternating squeezed inputs
    """
    u_a = as_square(u_a, "U_A")
    u_b = as_square(u_b, "U_B")
    if u_a.shape != u_b.shape:
        raise DimensionError(f"U_A is {u_a.shape}, U_B is {u_b.shape}")
    for name, u in (("U_A", u_a), ("U_B", u_b)):
        if not is_unitary(u, UNITARY_TOLERANCE):
            raise NotUnitaryError(f"{name} is not unitary")
    return direct_sum(u_a, u_b) @ _fixed_layers(u_a.shape[0])


def split_tsbs_unitary(u2m: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Recover (U_A, U_B) from a build_tsbs_unitary output"""
    u2m = as_square(u2m, "U")
    if u2m.shape[0] % 2:
        raise DimensionError(f"Expected an even mode count, got {u2m.shape[0]}")
    modes = u2m.shape[0] // 2
    blocks = u2m @ _fixed_layers(modes).T
    leak = max(np.abs(blocks[:modes, modes:]).max(), np.abs(blocks[modes:, :modes]).max())
    if leak > UNITARY_TOLERANCE:
        raise DimensionError(f"Matrix mixes sides A and B (off-diagonal block {leak:.3e})")
    return blocks[:modes, :modes], blocks[modes:, modes:]


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    """Unitary dilation whose top-left block is epsilon * X"""
    unitary: np.ndarray
    epsilon: float

    @property
    def size(self) -> int:
        return self.unitary.shape[0] // 2

    def block(self) -> np.ndarray:
        return self.unitary[:self.size, :self.size]


def embed_matrix(x: Any) -> EmbeddingResult:
    """Embed X / ||X|| as the top-left block of a 2N x 2N unitary

    With Y = epsilon X = W S V^dagger the dilation is
    [[Y, sqrt(I - Y Y^dagger)], [sqrt(I - Y^dagger Y), -Y^dagger]],
    assembled from the SVD so both defect operators share its factors.
    """
    x = as_square(x, "X")
    w, singular, vh = np.linalg.svd(x)
    norm = float(singular[0]) if singular.size else 0.0
    if norm == 0.0:
        raise DegenerateNormError("Cannot embed the zero matrix")
    # the norm must come from the same factors as the defect blocks
    epsilon = 1.0 / norm
    y = epsilon * x
    v = vh.conj().T
    sigma = np.minimum(singular * epsilon, 1.0)
    defect = np.sqrt(np.maximum(0.0, 1.0 - sigma ** 2))
    size = x.shape[0]
    unitary = np.empty((2 * size, 2 * size), dtype=complex)
    unitary[:size, :size] = y
    unitary[:size, size:] = (w * defect) @ w.conj().T
    unitary[size:, :size] = (v * defect) @ vh
    unitary[size:, size:] = -y.conj().T
    logger.debug(f"Embedded {size}x{size} matrix with epsilon={epsilon:.6g}")
    return EmbeddingResult(unitary=unitary, epsilon=epsilon)
