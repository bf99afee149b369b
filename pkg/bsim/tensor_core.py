#!/usr/bin/env python3
"""
Tensor Core Module
Dense complex linear algebra shared by every model: permanents, reduced
matrices, Haar-random unitaries, direct sums and the matrix JSON format.

Matrices are plain complex128 numpy arrays; occupation patterns are
sequences of nonnegative ints.
"""
from concurrent.futures import ThreadPoolExecutor
from itertools import permutations
from typing import Any, Dict, List, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.linalg import block_diag

from bsim.config import Config
from bsim.errors import DimensionError, PatternError, SizeLimitError

logger = logging.getLogger(__name__)

NAIVE_MAX_ORDER = 9
RYSER_MAX_ORDER = 30
SEED_LIMIT = 1 << 64


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Keyed random stream: identical (seed, key) pairs give identical draws

    Args:
        seed: 64-bit unsigned seed
        key: Stream coordinates (e.g. stream id, block index)

    Returns:
        np.random.Generator: Generator seeded from SeedSequence(seed, spawn_key=key)
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"Seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < SEED_LIMIT:
        raise ValueError(f"Seed {seed} outside the 64-bit unsigned range")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(sequence)


def as_square(a: Any, name: str = "matrix") -> np.ndarray:
    """Coerce to a complex square matrix or raise DimensionError"""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_pattern(pattern: Sequence[int], length: int = None, name: str = "pattern") -> Tuple[int, ...]:
    """Validate an occupation pattern and return it as a tuple of ints"""
    values = tuple(int(v) for v in pattern)
    if any(v < 0 for v in values):
        raise PatternError(f"{name} has negative occupations: {values}")
    if length is not None and len(values) != length:
        raise PatternError(f"{name} has {len(values)} modes, expected {length}")
    return values


def permanent_naive(a: Any) -> complex:
    """Permanent as the sum over all permutations (independent oracle, n <= 9)"""
    a = as_square(a)
    n = a.shape[0]
    if n > NAIVE_MAX_ORDER:
        raise SizeLimitError(f"Naive permanent limited to n <= {NAIVE_MAX_ORDER}, got n={n}")
    if n == 0:
        return 1 + 0j
    perms = np.array(list(permutations(range(n))))
    terms = a[np.arange(n), perms].prod(axis=1)
    return complex(terms.sum())


def _ryser_chunk(a: np.ndarray, lo: int, hi: int) -> complex:
    """Signed Ryser terms for Gray-code indices lo..hi-1 (lo >= 1)"""
    n = a.shape[0]
    gray = (lo - 1) ^ ((lo - 1) >> 1)
    members = [j for j in range(n) if (gray >> j) & 1]
    row_sums = a[:, members].sum(axis=1) if members else np.zeros(n, dtype=complex)
    odd = len(members) % 2 == 1
    total = 0j
    for index in range(lo, hi):
        # gray(index) differs from gray(index - 1) in the lowest set bit of index
        j = (index & -index).bit_length() - 1
        if (gray >> j) & 1:
            row_sums -= a[:, j]
        else:
            row_sums += a[:, j]
        gray ^= 1 << j
        odd = not odd
        term = np.prod(row_sums)
        total += -term if odd else term
    return complex(total)


def _tree_sum(values: List[complex]) -> complex:
    """Pairwise reduction in a fixed order"""
    values = list(values)
    if not values:
        return 0j
    while len(values) > 1:
        paired = [values[i] + values[i + 1] for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            paired.append(values[-1])
        values = paired
    return values[0]


def ryser_chunk_bounds(n: int) -> List[Tuple[int, int]]:
    """Fixed subset-index ranges for an n x n permanent

    The boundaries depend only on n and Config, never on the worker count.
    """
    total = 1 << n
    if n < Config.PARALLEL_MIN_ORDER:
        chunks = 1
    else:
        chunks = min(Config.PERMANENT_CHUNKS, total - 1)
    edges = [1 + (i * (total - 1)) // chunks for i in range(chunks + 1)]
    return [(edges[i], edges[i + 1]) for i in range(chunks) if edges[i] < edges[i + 1]]


def permanent_ryser(a: Any) -> complex:
    """Permanent by Ryser inclusion-exclusion with Gray-code row-sum updates

    Args:
        a: Square complex matrix, n <= 30

    Returns:
        complex: Perm(a)
    """
    a = as_square(a)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n > RYSER_MAX_ORDER:
        raise SizeLimitError(f"Ryser permanent limited to n <= {RYSER_MAX_ORDER}, got n={n}")

    ranges = ryser_chunk_bounds(n)
    if Config.WORKERS > 1 and len(ranges) > 1:
        logger.debug(f"Permanent n={n}: {len(ranges)} chunks on {Config.WORKERS} workers")
        with ThreadPoolExecutor(max_workers=Config.WORKERS) as pool:
            partials = list(pool.map(lambda bounds: _ryser_chunk(a, *bounds), ranges))
    else:
        partials = [_ryser_chunk(a, lo, hi) for lo, hi in ranges]

    total = _tree_sum(partials)
    return -total if n % 2 else total


def reduced_matrix(u: Any, row_pattern: Sequence[int], col_pattern: Sequence[int]) -> np.ndarray:
    """Repeat row j of u row_pattern[j] times and column i col_pattern[i] times

    Args:
        u: M x M matrix
        row_pattern: Output occupations k
        col_pattern: Input occupations m

    Returns:
        np.ndarray: N x N matrix with N = sum(k) = sum(m)
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2:
        raise DimensionError(f"Expected a matrix, got shape {u.shape}")
    k = as_pattern(row_pattern, u.shape[0], "row pattern")
    m = as_pattern(col_pattern, u.shape[1], "column pattern")
    if sum(k) != sum(m):
        raise PatternError(f"Photon-number mismatch: sum(k)={sum(k)} != sum(m)={sum(m)}")
    rows = np.repeat(np.arange(len(k)), k)
    cols = np.repeat(np.arange(len(m)), m)
    return u[np.ix_(rows, cols)]


def haar_unitary(dim: int, seed: int, stream: int = 0) -> np.ndarray:
    """Haar-random unitary from a Ginibre matrix and phase-fixed QR

    Args:
        dim: Matrix dimension (>= 1)
        seed: 64-bit unsigned seed
        stream: Independent stream index under the same seed

    Returns:
        np.ndarray: dim x dim unitary
    """
    if dim < 1:
        raise DimensionError(f"Haar unitary dimension must be >= 1, got {dim}")
    rng = make_rng(seed, stream)
    ginibre = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def is_unitary(a: Any, tol: float = 1e-12) -> bool:
    """True iff max |A^dagger A - I| < tol"""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    deviation = np.abs(a.conj().T @ a - np.eye(a.shape[0]))
    return bool(deviation.max() < tol) if deviation.size else True


def direct_sum(a: Any, b: Any) -> np.ndarray:
    """Block-diagonal concatenation a (+) b"""
    return block_diag(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def spectral_norm(x: Any, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Operator 2-norm by power iteration on X^dagger X

    Args:
        x: Matrix
        tol: Relative eigen-residual ||G v - lambda v|| / lambda that stops the iteration
        max_iter: Iteration cap

    Returns:
        float: Largest singular value of x
    """
    x = np.asarray(x, dtype=complex)
    gram = x.conj().T @ x
    vector = make_rng(0, gram.shape[0]).standard_normal(gram.shape[0]).astype(complex)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(max_iter):
        image = gram @ vector
        image_norm = np.linalg.norm(image)
        if image_norm == 0.0:
            return 0.0
        estimate = float(np.vdot(vector, image).real)
        # converged once v is an eigenvector to tol; the quotient alone stalls early for close singular values
        if np.linalg.norm(image - estimate * vector) <= tol * estimate:
            break
        vector = image / image_norm
    else:
        logger.warning(f"Power iteration did not converge in {max_iter} steps (estimate={estimate})")
    return math.sqrt(estimate)


def matrix_to_json(a: Any) -> Dict[str, Any]:
    """Serialize as {"rows", "cols", "re", "im"} in row-major order"""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"Expected a matrix, got shape {a.shape}")
    flat = a.ravel()
    return {
        'rows': int(a.shape[0]),
        'cols': int(a.shape[1]),
        're': [float(v) for v in flat.real],
        'im': [float(v) for v in flat.imag],
    }


def matrix_from_json(obj: Dict[str, Any]) -> np.ndarray:
    """Inverse of matrix_to_json"""
    rows, cols = int(obj['rows']), int(obj['cols'])
    re = np.asarray(obj['re'], dtype=float)
    im = np.asarray(obj['im'], dtype=float)
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise DimensionError(f"Entry count does not match {rows}x{cols}")
    return (re + 1j * im).reshape(rows, cols)
