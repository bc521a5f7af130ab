"""
Singular-set detection for horolab.

A node is singular when two of its edges both descend at nearly unit rate
while pointing in directions further apart than a differentiable field allows.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.config import Tolerances
from src.eikonal import ScalarField, edge_quotients, interior_mask
from src.manifold import DiscreteManifold, seam_nodes
from src.utils.reporting import CheckResult

from .semiconcavity_check import SemiconcavityEvaluator


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingularSet:
    """Non-differentiability locus of a field with one witness pair per node."""
    nodes: np.ndarray
    witnesses: Dict[int, Tuple[int, int, float]] = field(default_factory=dict)  # node -> (q1, q2, degrees)

    def __len__(self) -> int:
        return int(self.nodes.size)

    def __contains__(self, node: int) -> bool:
        return int(node) in self.witnesses


def _angle(M: DiscreteManifold, p: int, k1: int, k2: int) -> float:
    """Angle at p between adjacency entries k1 and k2 (radians)."""
    e1, e2 = M.adj_edge[k1], M.adj_edge[k2]
    if M.edge_chart[e1] == M.edge_chart[e2] and not seam_nodes(M)[p]:
        d1 = M.edge_disp[e1] * M.adj_sign[k1]
        d2 = M.edge_disp[e2] * M.adj_sign[k2]
        G = 0.5 * (M.edge_metric[e1] + M.edge_metric[e2])
        dot = G[0] * d1[0] * d2[0] + G[1] * (d1[0] * d2[1] + d1[1] * d2[0]) + G[2] * d1[1] * d2[1]
        n1 = math.sqrt(G[0] * d1[0] ** 2 + 2 * G[1] * d1[0] * d1[1] + G[2] * d1[1] ** 2)
        n2 = math.sqrt(G[0] * d2[0] ** 2 + 2 * G[1] * d2[0] * d2[1] + G[2] * d2[1] ** 2)
        cos = dot / (n1 * n2)
    else:
        # Seams and collapsed chart rows have no single chart frame; use the triangle the edges span.
        l1, l2 = M.weights[k1], M.weights[k2]
        d12 = float(M.distances_from(int(M.indices[k1]))[M.indices[k2]])
        cos = (l1 ** 2 + l2 ** 2 - d12 ** 2) / (2.0 * l1 * l2)
    return math.acos(min(1.0, max(-1.0, cos)))


def singular_set(M: DiscreteManifold, f: ScalarField,
                 tolerances: Optional[Tolerances] = None) -> SingularSet:
    """
    Nodes with two near-steepest descent directions at a wide angle.

    Args:
        M: Manifold
        f: Field
        tolerances: Tolerances (derived from M by default)

    Returns:
        SingularSet over the interior of the reliable region
    """
    tol = tolerances if tolerances is not None else Tolerances.for_manifold(M)
    threshold = tol.singular_angle()
    quotient = edge_quotients(M, f)
    qualifies = quotient >= 1.0 - tol.grad_tol
    counts = np.add.reduceat(qualifies.astype(int), M.indptr[:-1])
    candidates = np.flatnonzero(interior_mask(M, f.reliable) & (counts >= 2))

    nodes, witnesses = [], {}
    for p in candidates.tolist():
        entries = M.indptr[p] + np.flatnonzero(qualifies[M.indptr[p]:M.indptr[p + 1]])
        best = (0.0, -1, -1)
        for a in range(len(entries)):
            for b in range(a + 1, len(entries)):
                angle = _angle(M, p, entries[a], entries[b])
                if angle > best[0]:
                    best = (angle, int(M.indices[entries[a]]), int(M.indices[entries[b]]))
        if best[0] > threshold:
            nodes.append(p)
            witnesses[p] = (best[1], best[2], math.degrees(best[0]))
    logger.debug("singular_set: %d of %d candidates (threshold %.1f deg)",
                 len(nodes), candidates.size, math.degrees(threshold))
    return SingularSet(nodes=np.array(nodes, dtype=np.int64), witnesses=witnesses)


def c1_candidate(M: DiscreteManifold, f: ScalarField,
                 tolerances: Optional[Tolerances] = None) -> bool:
    """
    Whether a field looks like a C^1 solution at grid resolution.

    Both f and -f must be semiconcave with a moderate constant and the
    singular set must be empty.
    """
    evaluator = SemiconcavityEvaluator(tolerances)
    return (evaluator.evaluate(M, f).passed
            and evaluator.evaluate(M, f, negate=True).passed
            and len(singular_set(M, f, tolerances)) == 0)


class SingularEvaluator:
    """Evaluates whether a field has (or lacks) a singular set in a region."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def evaluate(self, M: DiscreteManifold, f: ScalarField, region: Optional[np.ndarray] = None,
                 expect_nonempty: bool = True, label: str = "") -> CheckResult:
        """
        Pass iff the singular set meets the region (or misses it when
        expect_nonempty is False).

        Args:
            M: Manifold
            f: Field
            region: Node mask (whole manifold by default)
            expect_nonempty: Expected outcome
            label: Field name for the report

        Returns:
            CheckResult whose metric is the number of singular nodes in the region
        """
        sing = singular_set(M, f, self.tolerances)
        if region is None:
            region = np.ones(M.n_nodes, dtype=bool)
        inside = sing.nodes[region[sing.nodes]] if len(sing) else sing.nodes
        found = inside.size > 0
        name = "singular_set" if expect_nonempty else "no_singular_set"
        return CheckResult(
            check=f"{name}[{label}]" if label else name,
            passed=found == expect_nonempty,
            metric=float(inside.size),
            tolerance=0.0,
            details={"singular_total": len(sing),
                     "max_angle_deg": max((w[2] for w in sing.witnesses.values()), default=0.0)},
            offending_nodes=inside.tolist() if not expect_nonempty else [],
        )
