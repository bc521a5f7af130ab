"""
Function-space metrics on normalized solutions and the ideal boundary.

Fields are compared on the balls of a compact exhaustion K_1 ⊂ ... ⊂ K_N:

    ρ(u, v)  = Σ_n min(2^-n, sup_{K_n} |u - v|)
    ρ~(u, v) = inf_t ρ(u + t, v)

with the series truncated at N; the neglected tail is at most 2^-N.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.cluster import AgglomerativeClustering
from tqdm import tqdm

from src.errors import ExhaustionError
from src.eikonal import ScalarField
from src.checks.min_combine import min_combine
from src.manifold import DiscreteManifold
from src.utils.reporting import matrix_frame, write_frame


logger = logging.getLogger(__name__)

GRID_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class CompactExhaustion:
    """Nested closed metric balls around a base node."""
    x0: int
    radii: Tuple[float, ...]
    sets: Tuple[np.ndarray, ...]  # boolean node masks

    @classmethod
    def build(cls, M: DiscreteManifold, x0: int, radii: Sequence[float]) -> "CompactExhaustion":
        """
        Closed graph balls of the given radii around x0.

        Raises:
            ValueError: If the radii are not positive and strictly increasing
        """
        radii = tuple(float(r) for r in radii)
        if not radii or radii[0] <= 0 or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
            raise ValueError(f"Exhaustion radii must be positive and increasing, got {radii}")
        dist = M.distances_from(int(x0))
        return cls(x0=int(x0), radii=radii, sets=tuple(dist <= r for r in radii))

    @classmethod
    def inside(cls, M: DiscreteManifold, x0: int, radius: float, count: int = 4) -> "CompactExhaustion":
        """count balls with radii radius * k / count."""
        return cls.build(M, x0, [radius * k / count for k in range(1, count + 1)])

    @classmethod
    def common(cls, M: DiscreteManifold, x0: int, fields: Sequence[ScalarField],
               count: int = 4) -> "CompactExhaustion":
        """
        Balls inside the reliable region shared by all fields.

        Raises:
            ExhaustionError: If x0 is not reliable for every field
        """
        reliable = np.logical_and.reduce([f.reliable for f in fields])
        if not reliable[x0]:
            raise ExhaustionError("Base node lies outside the common reliable region")
        dist = M.distances_from(int(x0))
        radius = min(f.reliable_radius for f in fields)
        outside = dist[~reliable]
        if outside.size:
            radius = min(radius, float(outside.min()) * (1.0 - 1e-9))
        if not np.isfinite(radius):
            radius = float(dist.max())
        return cls.inside(M, x0, radius, count)

    @property
    def depth(self) -> int:
        return len(self.radii)

    @property
    def tail_bound(self) -> float:
        """Upper bound 2^-N on the neglected part of the series."""
        return 2.0 ** (-self.depth)

    @property
    def weights(self) -> np.ndarray:
        return 2.0 ** -np.arange(1, self.depth + 1)

    @property
    def largest(self) -> np.ndarray:
        return self.sets[-1]


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A normalized solution standing for a point of the ideal boundary."""
    rep: ScalarField
    provenance: str
    label: str = ""

    def __post_init__(self):
        if self.rep.base_node is None or self.rep.values[self.rep.base_node] != 0.0:
            raise ValueError("Boundary point representative must vanish at its base node")

    def bounded_by_distance(self, M: DiscreteManifold, slack: float = 1e-9) -> bool:
        """|rep(x)| <= d(x0, x) on the reliable region (a consequence of 1-Lipschitz)."""
        dist = M.distances_from(self.rep.base_node)
        mask = self.rep.reliable
        return bool(np.all(np.abs(self.rep.values[mask]) <= dist[mask] * (1.0 + M.stencil_bound) + slack))


def _ball_extremes(u: ScalarField, v: ScalarField, E: CompactExhaustion) -> Tuple[np.ndarray, np.ndarray]:
    common = u.reliable & v.reliable
    if np.any(E.largest & ~common):
        raise ExhaustionError("Exhaustion exceeds the common reliable region of the fields")
    w = u.values - v.values
    highs = np.array([w[s].max() for s in E.sets])
    lows = np.array([w[s].min() for s in E.sets])
    return highs, lows


def _series(highs: np.ndarray, lows: np.ndarray, weights: np.ndarray, t: float) -> float:
    sup = np.maximum(highs + t, -(lows + t))
    return float(np.sum(np.minimum(weights, sup)))


def rho(u: ScalarField, v: ScalarField, E: CompactExhaustion) -> float:
    """
    Truncated series metric between two fields.

    Args:
        u: Field
        v: Field
        E: Compact exhaustion inside both reliable regions

    Returns:
        Σ_{n <= N} min(2^-n, sup_{K_n} |u - v|); the tail is at most E.tail_bound

    Raises:
        ExhaustionError: If E reaches outside a reliable region
    """
    highs, lows = _ball_extremes(u, v, E)
    return _series(highs, lows, E.weights, 0.0)


def _shift_search(highs: np.ndarray, lows: np.ndarray, weights: np.ndarray, shift_tol: float) -> float:
    span = float(max(np.max(np.abs(highs)), np.max(np.abs(lows))))
    if span == 0.0:
        return 0.0
    grid = span * (2.0 * np.arange(GRID_SAMPLES + 1) / GRID_SAMPLES - 1.0)
    values = np.array([_series(highs, lows, weights, t) for t in grid])
    k = int(np.argmin(values))
    best = float(values[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, GRID_SAMPLES)]
    if hi > lo:
        result = minimize_scalar(lambda t: _series(highs, lows, weights, t), bounds=(lo, hi),
                                 method="bounded", options={"xatol": shift_tol / len(weights)})
        best = min(best, float(result.fun))
    # The objective is piecewise linear; its minimum sits on one of these kinks.
    kinks = np.concatenate([-(highs + lows) / 2.0, weights - highs, -lows - weights])
    kinks = kinks[np.abs(kinks) <= span]
    if kinks.size:
        best = min(best, min(_series(highs, lows, weights, t) for t in kinks))
    return best


def rho_quotient(u: ScalarField, v: ScalarField, E: CompactExhaustion,
                 shift_tol: float = 1e-4) -> float:
    """
    Quotient metric inf_t ρ(u + t, v).

    A 65-point grid on t in [-D, D] (D = sup |u - v| on the largest ball)
    brackets the minimum, which is then refined to shift_tol. Both argument
    orders are searched so the result is symmetric.

    Returns:
        Value at most rho(u, v, E)
    """
    highs, lows = _ball_extremes(u, v, E)
    weights = E.weights
    forward = _shift_search(highs, lows, weights, shift_tol)
    backward = _shift_search(-lows, -highs, weights, shift_tol)
    return min(forward, backward)


def path_endpoints(u: ScalarField, v: ScalarField, E: CompactExhaustion) -> Tuple[float, float]:
    """
    (t_lo, t_hi) with min(u + t, v) = u + t on the largest ball for t <= t_lo
    and = v for t >= t_hi.
    """
    diff = (v.values - u.values)[E.largest]
    return float(diff.min()), float(diff.max())


def connect_path(u: ScalarField, v: ScalarField, t_grid: Sequence[float]) -> List[ScalarField]:
    """
    The path t -> min(u + t, v) of solutions joining u (t -> -inf) to v (t -> +inf).

    Args:
        u: Field
        v: Field
        t_grid: Shifts

    Returns:
        One field per shift
    """
    return [min_combine(u.shifted(float(t)), v) for t in t_grid]


def distance_matrix(points: Sequence[BoundaryPoint], E: CompactExhaustion,
                    shift_tol: float = 1e-4, progress: bool = False) -> np.ndarray:
    """Symmetric matrix of pairwise ρ~ with a zero diagonal."""
    n = len(points)
    matrix = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in tqdm(pairs, desc="rho~ matrix", disable=not progress):
        matrix[i, j] = matrix[j, i] = rho_quotient(points[i].rep, points[j].rep, E, shift_tol)
    return matrix


def cluster_boundary(points: Sequence[BoundaryPoint], E: CompactExhaustion, eps: float,
                     matrix: Optional[np.ndarray] = None) -> List[List[int]]:
    """
    Single-linkage clusters of boundary points under ρ~ at threshold eps.

    Args:
        points: Boundary points sharing a reliable region that covers E
        E: Compact exhaustion
        eps: Linkage threshold
        matrix: Precomputed distance_matrix (computed when omitted)

    Returns:
        Clusters as lists of point indices, ordered by their first member
    """
    if len(points) == 0:
        return []
    if len(points) == 1:
        return [[0]]
    if matrix is None:
        matrix = distance_matrix(points, E)
    model = AgglomerativeClustering(n_clusters=None, metric="precomputed", linkage="single",
                                    distance_threshold=eps)
    labels = model.fit_predict(matrix)
    clusters: dict = {}
    for index, label in enumerate(labels.tolist()):
        clusters.setdefault(label, []).append(index)
    result = sorted(clusters.values(), key=lambda members: members[0])
    logger.info("cluster_boundary: %d points -> %d clusters at eps=%.4g", len(points), len(result), eps)
    return result


def export_distance_matrix(matrix: np.ndarray, labels: Sequence[str], path: Union[str, Path]) -> Path:
    """Write the labelled ρ~ matrix as CSV."""
    return write_frame(Path(path), matrix_frame(matrix, labels))
