"""
Minimal segments, rays, corays and lines on the manifold graph.

Segments descend the exact graph distance field of their endpoint. Among the
neighbours that continue a shortest path the lowest node index is taken, so
every path is reproducible.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.config import Tolerances
from src.eikonal import ScalarField
from src.errors import SequenceError, StabilizationError
from src.manifold import DiscreteManifold
from src.utils.reporting import write_frame


logger = logging.getLogger(__name__)

TIE_RTOL = 1e-9
AUDIT_SAMPLES = 12
CORAY_FRACTIONS = (0.25, 0.5, 0.75, 0.9, 1.0)


@dataclass(frozen=True, eq=False)
class Path:
    """Node polyline with cumulative arclength."""
    nodes: np.ndarray
    cumlen: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != len(self.cumlen) or len(self.nodes) == 0:
            raise ValueError("Path needs matching, nonempty nodes and cumlen")
        if self.cumlen[0] != 0.0 or np.any(np.diff(self.cumlen) <= 0):
            raise ValueError("cumlen must start at 0 and increase strictly")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def length(self) -> float:
        return float(self.cumlen[-1])

    @property
    def start(self) -> int:
        return int(self.nodes[0])

    @property
    def end(self) -> int:
        return int(self.nodes[-1])

    def node_at(self, t: float) -> int:
        """Last vertex with arclength at most t."""
        k = int(np.searchsorted(self.cumlen, t, side="right")) - 1
        return int(self.nodes[max(k, 0)])

    def prefix(self, count: int) -> "Path":
        return Path(self.nodes[:count].copy(), self.cumlen[:count].copy())

    def tail(self, t: float) -> "Path":
        """Sub-path from arclength t on, re-parameterized from 0."""
        k = max(int(np.searchsorted(self.cumlen, t, side="left")), 0)
        k = min(k, len(self) - 1)
        return Path(self.nodes[k:].copy(), self.cumlen[k:] - self.cumlen[k])


@dataclass(frozen=True, eq=False)
class Ray(Path):
    """A path certified to realize distances between its points up to ray_tol."""
    certified_span: float = 0.0
    audit_max_dev: float = 0.0
    ray_tol: float = 0.0
    multiplicity: int = 1
    alternates: Tuple[Path, ...] = field(default_factory=tuple)

    @classmethod
    def from_path(cls, path: Path, audit_max_dev: float, ray_tol: float,
                  multiplicity: int = 1, alternates: Tuple[Path, ...] = ()) -> "Ray":
        return cls(nodes=path.nodes, cumlen=path.cumlen, certified_span=path.length,
                   audit_max_dev=audit_max_dev, ray_tol=ray_tol,
                   multiplicity=multiplicity, alternates=tuple(alternates))


def _tolerances(M: DiscreteManifold, tolerances: Optional[Tolerances]) -> Tolerances:
    return tolerances if tolerances is not None else Tolerances.for_manifold(M)


def descend(M: DiscreteManifold, x: int, dist: np.ndarray) -> Path:
    """
    Follow a distance field from x down to its zero set.

    Args:
        M: Manifold
        x: Start node
        dist: Exact graph distance to some target set

    Returns:
        Path from x to the nearest target node
    """
    nodes = [int(x)]
    cumlen = [0.0]
    p = int(x)
    while dist[p] > 0.0:
        nbrs, lengths, _ = M.neighbors(p)
        slack = dist[nbrs] + lengths - dist[p]
        tight = (np.abs(slack) <= TIE_RTOL * max(1.0, dist[p])) & (dist[nbrs] < dist[p])
        if not tight.any():
            raise RuntimeError(f"No shortest-path continuation at node {p}")
        k = int(np.argmin(np.where(tight, nbrs, np.iinfo(np.int64).max)))
        p = int(nbrs[k])
        nodes.append(p)
        cumlen.append(cumlen[-1] + float(lengths[k]))
    return Path(np.array(nodes, dtype=np.int64), np.array(cumlen))


def minimal_segment(M: DiscreteManifold, x: int, y: int) -> Path:
    """
    Shortest graph path from x to y.

    Its length equals pairwise_distance(M, x, y) exactly.

    Args:
        M: Manifold
        x: Start node
        y: End node

    Returns:
        Path starting at x and ending at y
    """
    return descend(M, x, M.distances_from(int(y)))


def _sample_indices(n: int, count: int = AUDIT_SAMPLES) -> np.ndarray:
    return np.unique(np.linspace(0, n - 1, min(count, n)).round().astype(int))


def audit_ray(M: DiscreteManifold, path: Path, samples: int = AUDIT_SAMPLES) -> float:
    """
    Largest |d(γ(t1), γ(t2)) - |t2 - t1|| over sampled vertex pairs.

    Distances are recomputed from the manifold, independent of how the path
    was built.
    """
    idx = _sample_indices(len(path), samples)
    worst = 0.0
    for a in idx:
        dist = M.distances_from(int(path.nodes[a]))
        for b in idx:
            if b <= a:
                continue
            dev = abs(float(dist[path.nodes[b]]) - (path.cumlen[b] - path.cumlen[a]))
            worst = max(worst, dev)
    return worst


def _common_prefix(paths: Sequence[Path]) -> int:
    count = min(len(p) for p in paths)
    first = paths[0].nodes[:count]
    for other in paths[1:]:
        same = first == other.nodes[:count]
        if not same.all():
            count = int(np.argmin(same))
            first = first[:count]
    return count


def _certify(M: DiscreteManifold, path: Path, tol: Tolerances) -> Ray:
    # Shrink until the audit passes; on the graph backend the first audit passes.
    while len(path) >= 2:
        dev = audit_ray(M, path)
        ray_tol = tol.ray_tol(path.length)
        if dev <= ray_tol:
            return Ray.from_path(path, dev, ray_tol)
        if len(path) == 2:
            break
        path = path.prefix(max(2, len(path) // 2))
    raise StabilizationError("Ray audit failed on every prefix; increase window")


def _stabilized(M: DiscreteManifold, segments: Sequence[Path]) -> Path:
    count = _common_prefix(segments[-2:])
    prefix = segments[-1].prefix(count)
    # The certified part must not touch the truncation boundary.
    inside = ~M.boundary[prefix.nodes]
    if not inside.all():
        count = int(np.argmin(inside))
    if count < 2:
        raise StabilizationError(
            "Minimal segments did not stabilize before window exhaustion; increase window"
        )
    return prefix.prefix(count)


def trace_ray(M: DiscreteManifold, x: int, target_seq: Sequence[int],
              tolerances: Optional[Tolerances] = None) -> Ray:
    """
    Ray from x as the stabilized limit of minimal segments to escaping targets.

    Args:
        M: Manifold
        x: Start node
        target_seq: Targets with strictly increasing distance from x
        tolerances: Tolerances (derived from M by default)

    Returns:
        Ray whose certified span is the prefix shared by the last two segments

    Raises:
        SequenceError: If the targets do not move away from x
        StabilizationError: If no prefix stabilizes inside the window
    """
    tol = _tolerances(M, tolerances)
    targets = [int(t) for t in target_seq]
    if len(targets) < 2:
        raise SequenceError("trace_ray needs at least two targets")
    dist = M.distances_from(int(x))
    radii = dist[targets]
    if np.any(np.diff(radii) <= 0):
        raise SequenceError(f"Targets do not escape: distances {np.round(radii, 6).tolist()}")

    segments = [minimal_segment(M, x, t) for t in targets]
    ray = _certify(M, _stabilized(M, segments), tol)
    logger.debug("trace_ray from %d: span %.4g, audit %.3g", x, ray.certified_span, ray.audit_max_dev)
    return ray


def coray(M: DiscreteManifold, gamma: Ray, x: int,
          tolerances: Optional[Tolerances] = None,
          fractions: Sequence[float] = CORAY_FRACTIONS) -> Ray:
    """
    Coray from x to a certified ray.

    Minimal segments from x to γ(t_k), t_k increasing within γ's certified
    span, are grouped by their first edge. Groups that include one of the last
    two segments persist; each yields a candidate and the multiplicity is the
    number of persistent groups.

    Args:
        M: Manifold
        gamma: Certified ray
        x: Start node
        tolerances: Tolerances (derived from M by default)
        fractions: Target positions as fractions of the certified span

    Returns:
        Ray holding the candidate of the group of the farthest target, with
        the other candidates as alternates

    Raises:
        StabilizationError: If γ is too short for the segments to stabilize
    """
    tol = _tolerances(M, tolerances)
    if gamma.certified_span < 2.0 * M.spacing:
        raise StabilizationError("Ray span too short to trace a coray; increase window")
    targets = []
    for frac in fractions:
        t = gamma.node_at(frac * gamma.certified_span)
        if t != x and (not targets or t != targets[-1]):
            targets.append(t)
    segments = [minimal_segment(M, x, t) for t in targets]
    if len(segments) == 0:
        raise StabilizationError("No coray targets distinct from the start node")
    if len(segments) == 1:
        segments = segments * 2

    groups: Dict[int, List[Path]] = {}
    for seg in segments:
        key = int(seg.nodes[1]) if len(seg) > 1 else int(seg.nodes[0])
        groups.setdefault(key, []).append(seg)
    persistent = []
    for seg in segments[-2:]:
        key = int(seg.nodes[1]) if len(seg) > 1 else int(seg.nodes[0])
        if key not in persistent:
            persistent.append(key)

    candidates = []
    for key in persistent:
        members = groups[key]
        members = members if len(members) >= 2 else members * 2
        candidates.append(_certify(M, _stabilized(M, members), tol))

    primary = candidates[-1]
    if len(candidates) > 1:
        logger.info("coray from %d has %d initial-edge clusters", x, len(candidates))
    return Ray.from_path(primary, primary.audit_max_dev, primary.ray_tol,
                         multiplicity=len(candidates), alternates=tuple(candidates[:-1]))


def is_line(M: DiscreteManifold, p: Path, tolerances: Optional[Tolerances] = None,
            samples: int = 16) -> bool:
    """
    Whether a path realizes distances between all sampled pairs of its points.

    Args:
        M: Manifold
        p: Path through the window
        tolerances: Tolerances (derived from M by default)
        samples: Number of sampled vertices

    Returns:
        True iff every sampled pair deviates by at most ray_tol(length)
    """
    tol = _tolerances(M, tolerances)
    if not (M.boundary[p.start] and M.boundary[p.end]):
        logger.debug("is_line: path endpoints are not both on the truncation boundary")
    return audit_ray(M, p, samples) <= tol.ray_tol(p.length)


def concatenate(first: Path, second: Path) -> Path:
    """Join two paths that share an endpoint (first.end == second.start)."""
    if first.end != second.start:
        raise ValueError("Paths do not share an endpoint")
    nodes = np.concatenate([first.nodes, second.nodes[1:]])
    cumlen = np.concatenate([first.cumlen, first.length + second.cumlen[1:]])
    return Path(nodes, cumlen)


def reverse(path: Path) -> Path:
    return Path(path.nodes[::-1].copy(), path.length - path.cumlen[::-1])


def calibrated_curve(M: DiscreteManifold, f: ScalarField, x: int,
                     max_steps: Optional[int] = None) -> Tuple[Path, float]:
    """
    Steepest-descent curve of a field from x.

    Each step moves to the reliable neighbour of largest descent quotient
    until f stops decreasing or the curve would leave the reliable region.
    For a viscosity solution f decreases at unit rate along the curve.

    Args:
        M: Manifold
        f: Field
        x: Start node
        max_steps: Step limit (defaults to the node count)

    Returns:
        (curve, calibration defect) where the defect is the largest
        |f(x) - f(γ(t)) - t| along the curve
    """
    steps = max_steps if max_steps is not None else M.n_nodes
    nodes, cumlen = [int(x)], [0.0]
    p = int(x)
    for _ in range(steps):
        nbrs, lengths, _ = M.neighbors(p)
        ok = f.reliable[nbrs]
        if not ok.any():
            break
        quotient = np.where(ok, (f.values[p] - f.values[nbrs]) / lengths, -np.inf)
        k = int(np.argmax(quotient))
        if quotient[k] <= 0.0:
            break
        p = int(nbrs[k])
        nodes.append(p)
        cumlen.append(cumlen[-1] + float(lengths[k]))
    path = Path(np.array(nodes, dtype=np.int64), np.array(cumlen))
    drop = f.values[x] - f.values[path.nodes]
    defect = float(np.max(np.abs(drop - path.cumlen)))
    return path, defect


def path_frame(M: DiscreteManifold, path: Path) -> pd.DataFrame:
    return pd.DataFrame({
        "node_id": path.nodes,
        "u": M.coords[path.nodes, 0],
        "v": M.coords[path.nodes, 1],
        "cumlen": path.cumlen,
    })


def export_path_csv(M: DiscreteManifold, path: Path, file: Union[str, FilePath]) -> FilePath:
    """Write node_id,u,v,cumlen rows in path order."""
    return write_frame(FilePath(file), path_frame(M, path))

