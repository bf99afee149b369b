#!/usr/bin/env python3
"""
Homodyne Model Module
Single photons through U_G measured by eight-port homodyne detectors.

Detector i projects onto the displaced squeezed state D(alpha_i) S(xi_i)|0>
with alpha_i = (q_i + i p_i)/sqrt(2) and xi_i = ln(tau_i / rho_i). The outcome
density over the rescaled quadratures is
(2 pi)^(-L) |<(x)_i alpha_i, xi_i| U_G |input>|^2 for L measured modes, which
integrates to one. Points are arrays whose last axis is (q_1..q_L, p_1..p_L).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from math import factorial, log2, pi, prod, sqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import dblquad

from bsim.config import Config
from bsim.errors import (AccuracyError, DegenerateNormError, DimensionError, FeasibilityError,
                         ClosedFormInapplicableError, ParameterError, TailMassError)
from bsim.fock_space import SectorState, apply_interferometer, sector_overlap
from bsim.gaussian_optics import (alternating_squeezing, build_tsbs_unitary, displaced_squeezed_product_sector,
                                  displaced_squeezed_table, embed_matrix, is_alternating,
                                  product_sector_amplitudes, split_tsbs_unitary)
from bsim.observability import traced
from bsim.tables import DistributionTable
from bsim.tensor_core import as_pattern, as_square, permanent_ryser, reduced_matrix
from bsim.tsbs_model import herald_weight, time_unfolded_unitary

logger = logging.getLogger(__name__)

DENSITY_CHUNK = 1 << 15
BOX_MODES = 2
EMBED_MAX_SIZE = 3
CURVATURE_STEP = 0.02
NORMALIZATION_LIMIT = 12.0


def density_constant(measured_modes: int) -> float:
    """(2 pi)^(-L): POVM completeness pi^-1 d^2 alpha with d^2 alpha = dq dp / 2"""
    return (2.0 * pi) ** (-measured_modes)


@dataclass(frozen=True, eq=False)
class EightPortSpec:
    """Per-detector beam-splitter reflectivities rho_i and transmissivities tau_i"""
    rho: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float).ravel()
        tau = np.asarray(self.tau, dtype=float).ravel()
        if rho.size != tau.size or rho.size == 0:
            raise DimensionError(f"Got {rho.size} reflectivities and {tau.size} transmissivities")
        if np.any((rho <= 0) | (rho >= 1) | (tau <= 0) | (tau >= 1)):
            raise ParameterError("Reflectivities and transmissivities must lie strictly inside (0, 1)")
        if np.max(np.abs(rho ** 2 + tau ** 2 - 1.0)) > 1e-12:
            raise ParameterError("Each detector needs tau^2 + rho^2 = 1")
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'tau', tau)

    @classmethod
    def from_squeezing(cls, xis: Sequence[float]) -> 'EightPortSpec':
        """Beam splitters inducing squeezing xi_i = ln(tau_i / rho_i)"""
        xis = np.asarray(xis, dtype=float)
        tau = 1.0 / np.sqrt(1.0 + np.exp(-2.0 * xis))
        rho = 1.0 / np.sqrt(1.0 + np.exp(2.0 * xis))
        return cls(rho, tau)

    @classmethod
    def alternating(cls, mode_pairs: int, xi: float) -> 'EightPortSpec':
        """rho_i = tau_{i+1}, which yields (xi, -xi, ..., xi, -xi)"""
        return cls.from_squeezing(alternating_squeezing(mode_pairs, xi))

    @property
    def modes(self) -> int:
        return self.rho.size

    @property
    def xi(self) -> np.ndarray:
        return np.log(self.tau / self.rho)


@dataclass(frozen=True, eq=False)
class HomodyneOutcome:
    """Rescaled quadratures measured on every detector"""
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        p = np.asarray(self.p, dtype=float).ravel()
        if q.size != p.size:
            raise DimensionError(f"{q.size} q values and {p.size} p values")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'p', p)

    @classmethod
    def origin(cls, modes: int) -> 'HomodyneOutcome':
        return cls(np.zeros(modes), np.zeros(modes))

    @property
    def alpha(self) -> np.ndarray:
        return (self.q + 1j * self.p) / sqrt(2.0)

    def point(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


def segment(j: int, eta: float) -> Tuple[float, float]:
    """Half-open interval (lo, hi] of quadrature segment j

    Odd j run outwards on the positive side, even j on the negative side,
    and together they tile the real line.
    """
    if eta <= 0:
        raise ParameterError(f"Box parameter eta must be positive, got {eta}")
    if j < 0:
        raise ParameterError(f"Segment index must be nonnegative, got {j}")
    half = sqrt(eta) / 2.0
    if j % 2:
        return j * half, (j + 2) * half
    return (-j - 1) * half, (-j + 1) * half


@dataclass(frozen=True)
class BoxIndex:
    """Phase-space box: p_i in segment r_i and q_i in segment s_i"""
    r: Tuple[int, ...]
    s: Tuple[int, ...]
    eta: float

    @classmethod
    def origin(cls, modes: int, eta: float) -> 'BoxIndex':
        return cls((0,) * modes, (0,) * modes, eta)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners in (q..., p...) order"""
        intervals = [segment(j, self.eta) for j in tuple(self.s) + tuple(self.r)]
        return np.array([lo for lo, _ in intervals]), np.array([hi for _, hi in intervals])


class HomodyneDensity:
    """Vectorized outcome density for one (detectors, U_G, input) configuration

    The evolved input is computed once; each evaluation only needs the bra
    coefficients c_0..c_{total} per detector, so the overlap is exact.
    """

    def __init__(self, spec: EightPortSpec, u_g: Any, pattern: Sequence[int]):
        u_g = as_square(u_g, "U_G")
        if u_g.shape[0] != spec.modes:
            raise DimensionError(f"U_G acts on {u_g.shape[0]} modes, detectors cover {spec.modes}")
        self.spec = spec
        self.pattern = as_pattern(pattern, spec.modes, "input pattern")
        self.photons = sum(self.pattern)
        self.xi = spec.xi
        self.state = apply_interferometer(SectorState.basis(self.pattern), u_g)
        self.constant = density_constant(spec.modes)

    @property
    def dims(self) -> int:
        return 2 * self.spec.modes

    def _evaluate(self, block: np.ndarray) -> np.ndarray:
        modes = self.spec.modes
        alphas = (block[:, :modes] + 1j * block[:, modes:]) / sqrt(2.0)
        tables = [displaced_squeezed_table(alphas[:, j], self.xi[j], self.photons) for j in range(modes)]
        bra = product_sector_amplitudes(tables, self.photons)
        overlap = bra.conj() @ self.state.amplitudes
        return self.constant * np.abs(overlap) ** 2

    def __call__(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dims:
            raise DimensionError(f"Points need {self.dims} coordinates, got {points.shape[-1]}")
        flat = points.reshape(-1, self.dims)
        blocks = [flat[i:i + DENSITY_CHUNK] for i in range(0, len(flat), DENSITY_CHUNK)]
        if Config.WORKERS > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=Config.WORKERS) as pool:
                values = list(pool.map(self._evaluate, blocks))
        else:
            values = [self._evaluate(block) for block in blocks]
        result = np.concatenate(values) if values else np.zeros(0)
        return result.reshape(points.shape[:-1])


def density_grid(spec: EightPortSpec, u_g: Any, pattern: Sequence[int], q: Any, p: Any) -> np.ndarray:
    """Outcome density at arrays of points; q and p share shape (..., L)"""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise DimensionError(f"q has shape {q.shape}, p has shape {p.shape}")
    return HomodyneDensity(spec, u_g, pattern)(np.concatenate([q, p], axis=-1))


def outcome_density(spec: EightPortSpec, u_g: Any, pattern: Sequence[int], outcome: HomodyneOutcome,
                    n_max: Optional[int] = None) -> float:
    """Outcome density at a single point

    Args:
        spec: Detector configuration
        u_g: Interferometer in front of the detectors
        pattern: Input occupation pattern
        outcome: Measured quadratures
        n_max: Per-detector Fock cutoff of the bra; it must keep c_0..c_{total}

    Returns:
        float: Density per unit prod dq_i dp_i
    """
    total = sum(as_pattern(pattern))
    if n_max is not None and n_max < total:
        raise TailMassError(f"n_max={n_max} drops bra components up to {total} photons")
    if outcome.q.size != spec.modes:
        raise DimensionError(f"Outcome has {outcome.q.size} modes, detectors cover {spec.modes}")
    u_g = as_square(u_g, "U_G")
    if u_g.shape[0] != spec.modes:
        raise DimensionError(f"U_G acts on {u_g.shape[0]} modes, detectors cover {spec.modes}")
    bra = displaced_squeezed_product_sector(outcome.alpha, spec.xi, total)
    state = apply_interferometer(SectorState.basis(pattern), u_g)
    return density_constant(spec.modes) * abs(sector_overlap(bra, state)) ** 2


def _require_alternating(spec: EightPortSpec) -> float:
    if not is_alternating(spec.xi, tol=1e-9):
        raise ClosedFormInapplicableError(f"Detectors are not alternating +/-xi: {spec.xi.tolist()}")
    return float(spec.xi[0])


def origin_density(spec: EightPortSpec, u_g: Any, k: Sequence[int], m: Sequence[int]) -> float:
    """Density at q = p = 0 for input (k, m) on sides A and B"""
    _require_alternating(spec)
    pattern = tuple(k) + tuple(m)
    return outcome_density(spec, u_g, pattern, HomodyneOutcome.origin(spec.modes))


def origin_reference(u_g: Any, xi: float, k: Sequence[int], m: Sequence[int]) -> float:
    """(1 - t^2)^M t^(2N) |Perm U_{k,m}|^2 / (prod k! prod m!) with U = U_A U_B^T

    U_A and U_B are recovered from U_G^dagger; for binary patterns the factorials are 1.
    """
    u_a, u_b = split_tsbs_unitary(as_square(u_g, "U_G").conj().T)
    k = as_pattern(k, u_a.shape[0], "k")
    m = as_pattern(m, u_a.shape[0], "m")
    if sum(k) != sum(m):
        return 0.0
    u = time_unfolded_unitary(u_a, u_b)
    perm = permanent_ryser(reduced_matrix(u, k, m))
    norm = float(prod(factorial(v) for v in k + m))
    return herald_weight(u_a.shape[0], sum(k), abs(np.tanh(xi))) * abs(perm) ** 2 / norm


def origin_ratio(spec: EightPortSpec, u_g: Any, k: Sequence[int], m: Sequence[int]) -> float:
    """origin_density / origin_reference, expected to equal density_constant(2M)"""
    xi = _require_alternating(spec)
    reference = origin_reference(u_g, xi, k, m)
    if reference == 0.0:
        raise DegenerateNormError(f"Reference vanishes for k={tuple(k)}, m={tuple(m)}")
    return origin_density(spec, u_g, k, m) / reference


def _gauss_axes(lower: Sequence[float], upper: Sequence[float], order: int):
    nodes, weights = leggauss(order)
    axes, axis_weights = [], []
    for lo, hi in zip(lower, upper):
        half, mid = (hi - lo) / 2.0, (hi + lo) / 2.0
        axes.append(mid + half * nodes)
        axis_weights.append(half * weights)
    return axes, axis_weights


def integrate_box(density: HomodyneDensity, lower: Sequence[float], upper: Sequence[float],
                  order: int) -> float:
    """Tensor-product Gauss-Legendre integral of the density over a box"""
    if len(lower) != density.dims or len(upper) != density.dims:
        raise DimensionError(f"Box needs {density.dims} bounds per corner")
    axes, axis_weights = _gauss_axes(lower, upper, order)
    total = 0.0
    # one slab per node of the first axis keeps the point array small
    rest_weights = reduce(np.multiply.outer, axis_weights[1:]) if len(axes) > 1 else np.ones(())
    for x0, w0 in zip(axes[0], axis_weights[0]):
        grid = np.stack(np.meshgrid(np.array([x0]), *axes[1:], indexing='ij'), axis=-1)[0]
        total += w0 * float(np.sum(density(grid) * rest_weights))
    return total


def _check_box_model(spec: EightPortSpec) -> None:
    if spec.modes != BOX_MODES:
        raise FeasibilityError(f"Box integration is limited to {BOX_MODES} detectors "
                               f"(one mode pair), got {spec.modes}")


@traced('homodyne.box_probability')
def box_probability(spec: EightPortSpec, u_g: Any, pattern: Sequence[int], box: BoxIndex,
                    order: Optional[int] = None) -> float:
    """Probability that the outcome lands in `box`

    Integrates at `order` and 2 * order nodes per axis; a change above
    Config.QUADRATURE_TOLERANCE raises AccuracyError.
    """
    _check_box_model(spec)
    order = Config.QUADRATURE_ORDER if order is None else order
    if order < Config.MIN_QUADRATURE_ORDER:
        raise ParameterError(f"Quadrature order must be >= {Config.MIN_QUADRATURE_ORDER}, got {order}")
    density = HomodyneDensity(spec, u_g, pattern)
    lower, upper = box.bounds()
    coarse = integrate_box(density, lower, upper, order)
    fine = integrate_box(density, lower, upper, 2 * order)
    if abs(fine - coarse) > Config.QUADRATURE_TOLERANCE:
        raise AccuracyError(f"Quadrature not converged for box {box}: |{fine} - {coarse}| "
                            f"> {Config.QUADRATURE_TOLERANCE}")
    logger.debug(f"Box {box}: {fine:.6e} (order {order} -> {2 * order})")
    return fine


@traced('homodyne.box_grid_table')
def box_grid_table(spec: EightPortSpec, u_g: Any, pattern: Sequence[int], eta: float,
                   segments: int, order: Optional[int] = None) -> DistributionTable:
    """Probabilities of every box with segment indices below `segments` on each axis

    The missing mass outside the grid goes into the table's residual.
    """
    _check_box_model(spec)
    order = Config.QUADRATURE_ORDER if order is None else order
    density = HomodyneDensity(spec, u_g, pattern)
    dims = density.dims
    intervals = [segment(j, eta) for j in range(segments)]
    axis_nodes, axis_weights = _gauss_axes([lo for lo, _ in intervals], [hi for _, hi in intervals], order)
    nodes = np.concatenate(axis_nodes)
    weights = np.concatenate(axis_weights)
    rest_weights = reduce(np.multiply.outer, [weights] * (dims - 1))
    slab_shape = sum(((segments, order) for _ in range(dims - 1)), ())
    boxes = np.zeros((segments,) * dims)
    for i, x0 in enumerate(nodes):
        grid = np.stack(np.meshgrid(np.array([x0]), *[nodes] * (dims - 1), indexing='ij'), axis=-1)[0]
        slab = (density(grid) * rest_weights * weights[i]).reshape(slab_shape)
        boxes[i // order] += slab.sum(axis=tuple(range(1, 2 * (dims - 1), 2)))
    support, probs = [], []
    half = dims // 2
    for index in np.ndindex(*boxes.shape):
        # axis order is (q..., p...) = (s..., r...); support keys are (r..., s...)
        support.append(tuple(index[half:]) + tuple(index[:half]))
        probs.append(boxes[index])
    table = DistributionTable(support, probs, {'model': 'homodyne', 'eta': eta, 'segments': segments,
                                               'quadratureOrder': order})
    table.residual = max(0.0, 1.0 - table.total)
    return table


def origin_curvature(density: HomodyneDensity, step: float = CURVATURE_STEP) -> float:
    """Laplacian of the density at the origin over every quadrature axis

    Central second differences at h and h/2, combined by Richardson extrapolation.
    """
    dims = density.dims

    def laplacian(h: float) -> float:
        offsets = np.vstack([np.zeros(dims), h * np.eye(dims), -h * np.eye(dims)])
        values = density(offsets)
        return float((values[1:].sum() - 2 * dims * values[0]) / (h * h))

    coarse, fine = laplacian(step), laplacian(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def origin_box_expansion(eta: float, density0: float, curvature: float, mode_pairs: int) -> float:
    """eta^(2M) p0 + eta^(2M+1)/24 * Laplacian, the origin box to second order

    Over a centred cube of side sqrt(eta) in 4M dimensions only the pure
    second derivatives survive; the remainder is O(eta^(2M+2)).
    """
    return eta ** (2 * mode_pairs) * density0 + eta ** (2 * mode_pairs + 1) / 24.0 * curvature


@traced('homodyne.box_expansion_sweep')
def box_expansion_sweep(spec: EightPortSpec, u_g: Any, pattern: Sequence[int], etas: Sequence[float],
                        order: Optional[int] = None) -> List[Dict[str, Any]]:
    """Origin-box probability against its second-order expansion for each eta

    Each row after the first carries the empirical order of the residual
    beyond the leading eta^(2M) term.
    """
    _check_box_model(spec)
    mode_pairs = spec.modes // 2
    density = HomodyneDensity(spec, u_g, pattern)
    density0 = float(density(np.zeros(density.dims)))
    curvature = origin_curvature(density)
    rows = []
    for eta in etas:
        box = box_probability(spec, u_g, pattern, BoxIndex.origin(spec.modes, eta), order)
        expansion = origin_box_expansion(eta, density0, curvature, mode_pairs)
        row = {'eta': float(eta), 'box': box, 'expansion': expansion,
               'residual': abs(box - expansion), 'order': None}
        if rows and rows[-1]['residual'] > 0 and row['residual'] > 0:
            ratio = rows[-1]['residual'] / row['residual']
            row['order'] = log2(ratio) / log2(rows[-1]['eta'] / eta) - 2 * mode_pairs
        rows.append(row)
        logger.info(f"eta={eta}: box={box:.6e}, expansion={expansion:.6e}, order={row['order']}")
    return rows


def density_normalization(spec: EightPortSpec, u_g: Any, pattern: Sequence[int],
                          limit: float = NORMALIZATION_LIMIT) -> float:
    """Integral of a single-detector density over [-limit, limit]^2 by adaptive quadrature"""
    if spec.modes != 1:
        raise FeasibilityError(f"Adaptive normalization is limited to one detector, got {spec.modes}")
    density = HomodyneDensity(spec, u_g, pattern)
    value, error = dblquad(lambda p, q: float(density(np.array([q, p]))), -limit, limit,
                           -limit, limit, epsabs=1e-10, epsrel=1e-10)
    logger.debug(f"Normalization {value:.12f} (quadrature error {error:.1e})")
    return value


@dataclass(frozen=True)
class EmbeddingCheck:
    """Origin density of an embedded matrix next to its permanent prediction"""
    p0: float
    reference: float
    constant: float
    epsilon: float

    @property
    def predicted(self) -> float:
        return self.constant * self.reference

    @property
    def deviation(self) -> float:
        return abs(self.p0 - self.predicted) / abs(self.predicted) if self.predicted else abs(self.p0)


@traced('homodyne.embedded_origin_check')
def embedded_origin_check(x: Any, xi: float = 0.3) -> EmbeddingCheck:
    """Origin density for U_A = embed(X), U_B = I and k = m = (1,..,1,0,..,0)

    Args:
        x: Real N x N matrix, N <= 3
        xi: Detector squeezing

    Returns:
        EmbeddingCheck: p0, eps^(2N) Perm(X)^2 and the constant linking them
    """
    x = as_square(x, "X")
    size = x.shape[0]
    if size > EMBED_MAX_SIZE:
        raise FeasibilityError(f"Embedding check is limited to N <= {EMBED_MAX_SIZE}, got {size}")
    embedding = embed_matrix(x)
    modes = 2 * size
    u_g = build_tsbs_unitary(embedding.unitary, np.eye(modes)).conj().T
    spec = EightPortSpec.alternating(modes, xi)
    pattern = (1,) * size + (0,) * size
    p0 = origin_density(spec, u_g, pattern, pattern)
    reference = embedding.epsilon ** (2 * size) * abs(permanent_ryser(x)) ** 2
    constant = density_constant(2 * modes) * herald_weight(modes, size, abs(np.tanh(xi)))
    return EmbeddingCheck(p0=p0, reference=reference, constant=constant, epsilon=embedding.epsilon)
