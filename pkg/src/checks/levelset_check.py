"""
Level-set reconstruction and level-set distance identity for horolab.

A viscosity solution f is recovered above each sublevel set from the distance
to that set: f(x) = t + d(x, {f <= t}) whenever f(x) >= t.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import Tolerances
from src.eikonal import ScalarField, distance_to_set
from src.errors import EmptySetError
from src.manifold import DiscreteManifold
from src.utils.reporting import CheckResult


logger = logging.getLogger(__name__)


def _foot_inside(M: DiscreteManifold, f: ScalarField, x0: int, drop: np.ndarray) -> np.ndarray:
    """Nodes whose nearest point on the sublevel set lies inside the reliable ball."""
    if not np.isfinite(f.reliable_radius):
        return np.ones(M.n_nodes, dtype=bool)
    return M.distances_from(int(x0)) + drop <= f.reliable_radius


def _sublevel(f: ScalarField, level: float) -> np.ndarray:
    return np.flatnonzero(f.reliable & (f.values <= level))


def levelset_reconstruct(M: DiscreteManifold, f: ScalarField, x0: int, n: float,
                         backend: Optional[str] = None) -> ScalarField:
    """
    Rebuild a field from one of its sublevel sets.

    Args:
        M: Manifold
        f: Field
        x0: Base node
        n: Depth of the sublevel set K_n = {f <= f(x0) - n}
        backend: Distance backend (the field's own backend by default)

    Returns:
        d(., K_n) - d(x0, K_n) as a field whose reliable region is where the
        comparison with f - f(x0) is meaningful; metadata["deviation"] holds
        the sup deviation there

    Raises:
        ValueError: If n <= 0
        EmptySetError: If K_n has no reliable node
    """
    if not n > 0:
        raise ValueError(f"Reconstruction depth must be positive, got {n}")
    level = f.values[x0] - n
    K = _sublevel(f, level)
    if K.size == 0:
        raise EmptySetError(f"Sublevel set f <= {level:.6g} is empty; increase window or decrease n")

    dist = distance_to_set(M, K, backend=backend or f.backend)
    g = dist.values - dist.values[x0]
    above = f.values >= level
    compare = f.reliable & dist.reliable & above & _foot_inside(M, f, x0, f.values - level)
    compare[x0] = True
    deviation = float(np.max(np.abs(g[compare] - (f.values[compare] - f.values[x0]))))
    logger.debug("reconstruction at n=%.4g: |K_n|=%d, compared %d nodes, deviation %.4g",
                 n, K.size, int(compare.sum()), deviation)
    return ScalarField(values=g, source="reconstruction", reliable=compare, base_node=int(x0),
                       reliable_radius=f.reliable_radius, backend=dist.backend,
                       metadata={"deviation": deviation, "n": float(n), "sublevel_size": int(K.size)})


def levelset_distance_check(M: DiscreteManifold, f: ScalarField, a1: float, a2: float,
                            backend: Optional[str] = None, x0: Optional[int] = None) -> float:
    """
    Largest |d(x, {f <= a2}) - (a1 - a2)| over the band f(x) in [a1 - h, a1 + h].

    Args:
        M: Manifold
        f: Field
        a1: Upper level
        a2: Lower level, a2 < a1
        backend: Distance backend (the field's own backend by default)
        x0: Centre of the field's reliable ball (its base node by default)

    Returns:
        Max deviation over the band

    Raises:
        ValueError: If a1 <= a2
        EmptySetError: If the band or the sublevel set is empty
    """
    if not a1 > a2:
        raise ValueError(f"Need a1 > a2, got a1={a1}, a2={a2}")
    K = _sublevel(f, a2)
    if K.size == 0:
        raise EmptySetError(f"Sublevel set f <= {a2:.6g} is empty")
    dist = distance_to_set(M, K, backend=backend or f.backend)
    h = M.spacing
    band = f.reliable & dist.reliable & (np.abs(f.values - a1) <= h)
    center = x0 if x0 is not None else f.base_node
    if center is not None:
        band &= _foot_inside(M, f, center, np.full(M.n_nodes, a1 - a2 + h))
    if not band.any():
        raise EmptySetError(f"Level band around {a1:.6g} is empty in the reliable region")
    return float(np.max(np.abs(dist.values[band] - (a1 - a2))))


def default_depths(f: ScalarField, M: DiscreteManifold) -> List[float]:
    """Doubling depths inside the reliable ball: r/8, r/4, r/2 (or R/8.. for global fields)."""
    r = f.reliable_radius if np.isfinite(f.reliable_radius) else M.window_radius / 2.0
    return [r / 8.0, r / 4.0, r / 2.0]


def default_level_pairs(f: ScalarField, M: DiscreteManifold, x0: int) -> List[Tuple[float, float]]:
    """Three (a1, a2) pairs around the base value."""
    r = f.reliable_radius if np.isfinite(f.reliable_radius) else M.window_radius / 2.0
    c = float(f.values[x0])
    return [(c, c - 0.25 * r), (c, c - 0.5 * r), (c + 0.125 * r, c - 0.25 * r)]


class LevelSetEvaluator:
    """Evaluates the backward direction: reconstruction and the distance identity."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def _tol(self, M: DiscreteManifold) -> Tolerances:
        return self.tolerances if self.tolerances is not None else Tolerances.for_manifold(M)

    def evaluate_reconstruction(self, M: DiscreteManifold, f: ScalarField, x0: int,
                                depths: Optional[Sequence[float]] = None,
                                label: str = "") -> CheckResult:
        """
        Pass iff every deviation is within reconstruction_tol and the deviations
        do not increase along the schedule by more than h.
        """
        tol = self._tol(M)
        depths = list(depths) if depths is not None else default_depths(f, M)
        limit = tol.reconstruction_tol(f.backend)
        name = f"levelset_reconstruct[{label}]" if label else "levelset_reconstruct"
        deviations: List[float] = []
        try:
            for n in depths:
                deviations.append(levelset_reconstruct(M, f, x0, n).metadata["deviation"])
        except EmptySetError as e:
            return CheckResult(check=name, passed=False, metric=float("inf"), tolerance=limit,
                               details={"error": str(e), "depths": depths})
        increases = [b - a for a, b in zip(deviations[:-1], deviations[1:])]
        monotone = all(step <= M.spacing for step in increases)
        worst = max(deviations)
        return CheckResult(
            check=name,
            passed=worst <= limit and monotone,
            metric=worst,
            tolerance=limit,
            details={"depths": depths, "deviations": deviations, "non_increasing": monotone},
        )

    def evaluate_distance_identity(self, M: DiscreteManifold, f: ScalarField, x0: int,
                                   pairs: Optional[Sequence[Tuple[float, float]]] = None,
                                   label: str = "") -> CheckResult:
        """Pass iff every pair's deviation is within check_tol(a1, a2)."""
        tol = self._tol(M)
        pairs = list(pairs) if pairs is not None else default_level_pairs(f, M, x0)
        name = f"levelset_distance[{label}]" if label else "levelset_distance"
        worst_ratio, worst, worst_tol = 0.0, 0.0, 0.0
        details: Dict[str, object] = {}
        for a1, a2 in pairs:
            limit = tol.check_tol(a1, a2, f.backend)
            try:
                dev = levelset_distance_check(M, f, a1, a2, x0=x0)
            except EmptySetError as e:
                return CheckResult(check=name, passed=False, metric=float("inf"), tolerance=limit,
                                   details={"error": str(e), "a1": a1, "a2": a2})
            details[f"dev({a1:.4g},{a2:.4g})"] = dev
            if dev / limit >= worst_ratio:
                worst_ratio, worst, worst_tol = dev / limit, dev, limit
        return CheckResult(check=name, passed=worst_ratio <= 1.0, metric=worst,
                           tolerance=worst_tol, details=details)

