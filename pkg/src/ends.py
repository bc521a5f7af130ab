"""
Ends of a discrete manifold.

The complement of each closed ball around a base node splits into connected
components; those that reach the truncation boundary stand for unbounded
components. Their count stabilizes once the ball contains the compact core.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from src.config import Tolerances
from src.errors import SequenceError
from src.geodesics import Path, Ray, coray
from src.ideal_boundary import BoundaryPoint, CompactExhaustion, cluster_boundary
from src.manifold import DiscreteManifold
from src.utils.reporting import CheckResult, format_value


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EndPartition:
    """Unbounded complement components of an exhaustion by balls."""
    x0: int
    radii: Tuple[float, ...]
    labels: Tuple[np.ndarray, ...]        # per radius, component label per node or -1
    counts: Tuple[int, ...]
    refinements: Tuple[Dict[int, int], ...]  # radius k+1 label -> radius k label
    consistent: bool
    stabilized: bool
    tail_map: Dict[str, int] = field(default_factory=dict)

    @property
    def stabilized_count(self) -> int:
        return self.counts[-1]

    def label_of(self, node: int, level: int = -1) -> int:
        return int(self.labels[level][node])

    def to_text(self) -> str:
        """Structured text: per radius count and refinement map, then ray tail labels."""
        lines = [f"x0 = {self.x0}", f"stabilized = {format_value(self.stabilized)}",
                 f"end_count = {self.stabilized_count}"]
        for k, (r, count) in enumerate(zip(self.radii, self.counts)):
            lines.append(f"radius[{k}] = {format_value(r)}")
            lines.append(f"components[{k}] = {count}")
            if k > 0:
                mapping = ",".join(f"{a}->{b}" for a, b in sorted(self.refinements[k - 1].items()))
                lines.append(f"refinement[{k}] = {mapping}")
        for name in sorted(self.tail_map):
            lines.append(f"tail[{name}] = {self.tail_map[name]}")
        return "\n".join(lines)


def _components(M: DiscreteManifold, outside: np.ndarray) -> np.ndarray:
    labels = np.full(M.n_nodes, -1, dtype=np.int64)
    idx = np.flatnonzero(outside)
    if idx.size == 0:
        return labels
    sub = M.graph[idx][:, idx]
    _, comp = connected_components(sub, directed=False)
    unbounded = np.unique(comp[M.boundary[idx]])
    # Relabel by smallest member node id.
    order = sorted(unbounded.tolist(), key=lambda c: int(idx[comp == c].min()))
    for new, c in enumerate(order):
        labels[idx[comp == c]] = new
    return labels


def end_partition(M: DiscreteManifold, x0: int, radii: Sequence[float]) -> EndPartition:
    """
    Label the unbounded components outside nested balls around x0.

    Args:
        M: Manifold
        x0: Base node
        radii: At least three increasing radii inside the window

    Returns:
        EndPartition; stabilized when the last two radii have the same count
        and a bijective refinement map

    Raises:
        ValueError: If fewer than three increasing radii are given
    """
    radii = tuple(float(r) for r in radii)
    if len(radii) < 3 or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise ValueError(f"end_partition needs at least three increasing radii, got {radii}")
    dist = M.distances_from(int(x0))
    labels = tuple(_components(M, dist > r) for r in radii)
    counts = tuple(int(lab.max()) + 1 for lab in labels)

    refinements: List[Dict[int, int]] = []
    consistent = True
    for coarse, fine in zip(labels[:-1], labels[1:]):
        mapping: Dict[int, int] = {}
        for c in range(int(fine.max()) + 1):
            parents = np.unique(coarse[fine == c])
            if parents.size != 1 or parents[0] < 0:
                consistent = False
            mapping[c] = int(parents[0])
        refinements.append(mapping)

    last = refinements[-1]
    stabilized = (consistent and counts[-1] == counts[-2]
                  and sorted(last.values()) == list(range(counts[-2])))
    if not stabilized:
        logger.warning("End partition not stabilized: counts %s", counts)
    return EndPartition(x0=int(x0), radii=radii, labels=labels, counts=counts,
                        refinements=tuple(refinements), consistent=consistent,
                        stabilized=stabilized)


def _tail_label(M: DiscreteManifold, E: EndPartition, path: Path, level: int) -> int:
    dist = M.distances_from(E.x0)[path.nodes]
    r = E.radii[level]
    if dist[-1] <= r:
        raise SequenceError(f"Ray ends inside the ball of radius {r:.4g}; too short for cofinality")
    label = E.label_of(path.end, level)
    if label < 0:
        raise SequenceError(f"Ray tail beyond radius {r:.4g} lies in a bounded component")
    return label


def classify_ray(M: DiscreteManifold, E: EndPartition, ray: Path, name: str = "") -> int:
    """End label of a ray tail at the largest radius; recorded in E.tail_map when named."""
    label = _tail_label(M, E, ray, -1)
    if name:
        E.tail_map[name] = label
    return label


def cofinal(M: DiscreteManifold, gamma1: Path, gamma2: Path, E: EndPartition) -> bool:
    """
    Whether two rays have tails in the same component beyond every tested radius.

    Raises:
        SequenceError: If a ray does not reach beyond the largest radius
    """
    return _first_split(M, gamma1, gamma2, E) is None


def _first_split(M: DiscreteManifold, gamma1: Path, gamma2: Path, E: EndPartition) -> Optional[float]:
    for level, r in enumerate(E.radii):
        if _tail_label(M, E, gamma1, level) != _tail_label(M, E, gamma2, level):
            return r
    return None


def verify_coray_cofinality(M: DiscreteManifold, gamma: Ray, starts: Sequence[int],
                            E: EndPartition, tolerances: Optional[Tolerances] = None,
                            label: str = "") -> CheckResult:
    """
    Check that corays to γ from every start node are cofinal with γ.

    Returns:
        CheckResult whose metric is the number of violations; details carry
        the witness radius of each violation
    """
    violations: Dict[str, float] = {}
    offending = []
    for x in starts:
        c = coray(M, gamma, int(x), tolerances)
        split = _first_split(M, gamma, c, E)
        if split is not None:
            violations[f"start_{int(x)}"] = split
            offending.append(int(x))
    logger.info("coray cofinality: %d starts, %d violations", len(starts), len(violations))
    return CheckResult(
        check=f"coray_cofinality[{label}]" if label else "coray_cofinality",
        passed=not violations,
        metric=float(len(violations)),
        tolerance=0.0,
        details={"starts": len(starts), **violations},
        offending_nodes=offending,
    )


def verify_ends_inequality(M: DiscreteManifold, E: EndPartition,
                           boundary_sample: Sequence[BoundaryPoint], eps: float,
                           exhaustion: Optional[CompactExhaustion] = None,
                           matrix: Optional[np.ndarray] = None, label: str = "") -> CheckResult:
    """
    Check #ends <= number of ρ~ clusters of a Busemann sample.

    Args:
        M: Manifold
        E: End partition
        boundary_sample: Boundary points, at least one per end
        eps: Clustering threshold
        exhaustion: Exhaustion for ρ~ (balls inside the common reliable region by default)
        matrix: Precomputed ρ~ matrix of the sample

    Returns:
        CheckResult with metric = end count and tolerance = cluster count
    """
    if exhaustion is None:
        exhaustion = CompactExhaustion.common(M, boundary_sample[0].rep.base_node,
                                              [p.rep for p in boundary_sample])
    clusters = cluster_boundary(boundary_sample, exhaustion, eps, matrix)
    return CheckResult(
        check=f"ends_inequality[{label}]" if label else "ends_inequality",
        passed=E.stabilized and E.stabilized_count <= len(clusters),
        metric=float(E.stabilized_count),
        tolerance=float(len(clusters)),
        details={"clusters": [",".join(str(i) for i in c) for c in clusters],
                 "stabilized": E.stabilized},
    )
