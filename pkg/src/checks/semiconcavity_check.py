"""
Semiconcavity check for horolab.

Checks the midpoint inequality

    f(m) >= (f(a) + f(b)) / 2 - (C / 4) d(a, b)^2

on short straight chart segments a, m, b and reports the smallest constant C
that makes every sampled segment pass. Near cone points of excess angle the
admissible constant grows like 1/(2r) with the clearance r between the
segment and the cone point.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.config import HALF_STENCIL_16, Tolerances
from src.eikonal import ScalarField
from src.manifold import DiscreteManifold, cone_distance
from src.utils.reporting import CheckResult


@dataclass(frozen=True)
class SegmentSample:
    """Collinear node triples a, m, b with their lengths d(a, m) + d(m, b)."""
    a: np.ndarray
    m: np.ndarray
    b: np.ndarray
    length: np.ndarray

    def __len__(self) -> int:
        return int(self.a.shape[0])

    def clearance(self, M: DiscreteManifold) -> np.ndarray:
        """Lower bound on the distance from each segment to the nearest cone point."""
        return cone_distance(M)[self.m] - 0.5 * self.length


def _metric_length(M: DiscreteManifold, p: np.ndarray, q: np.ndarray, disp: np.ndarray) -> np.ndarray:
    G = 0.5 * (M.node_metric[p] + M.node_metric[q])
    return np.sqrt(G[:, 0] * disp[0] ** 2 + 2 * G[:, 1] * disp[0] * disp[1] + G[:, 2] * disp[1] ** 2)


def sample_segments(M: DiscreteManifold, mask: Optional[np.ndarray] = None) -> SegmentSample:
    """
    All straight triples a, a + o, a + 2o of chart nodes for king and knight offsets o.

    Args:
        M: Manifold
        mask: Nodes allowed as triple vertices (all nodes by default)

    Returns:
        SegmentSample with segment lengths between 2h and 2√5 h on flat charts
    """
    if mask is None:
        mask = np.ones(M.n_nodes, dtype=bool)
    parts = {key: [] for key in ("a", "m", "b", "length")}
    for grid in M.charts:
        spec = grid.spec
        nv, nu = grid.nodes.shape
        du, dv = spec.steps()
        J, I = np.mgrid[0:nv, 0:nu]
        for oa, ob in HALF_STENCIL_16:
            idx = []
            ok = np.ones(I.shape, dtype=bool)
            for k in range(3):
                Ik, Jk = I + k * oa, J + k * ob
                if spec.periodic_u:
                    Ik = Ik % nu
                else:
                    ok &= (Ik >= 0) & (Ik < nu)
                if spec.periodic_v:
                    Jk = Jk % nv
                else:
                    ok &= (Jk >= 0) & (Jk < nv)
                idx.append((np.clip(Ik, 0, nu - 1), np.clip(Jk, 0, nv - 1)))
            a, m, b = (grid.nodes[Jk, Ik][ok] for Ik, Jk in idx)
            keep = mask[a] & mask[m] & mask[b] & (a != m) & (m != b) & (a != b)
            a, m, b = a[keep], m[keep], b[keep]
            disp = np.array([oa * du, ob * dv])
            parts["a"].append(a)
            parts["m"].append(m)
            parts["b"].append(b)
            parts["length"].append(_metric_length(M, a, m, disp) + _metric_length(M, m, b, disp))
    return SegmentSample(**{key: np.concatenate(values) for key, values in parts.items()})


def semiconcavity_probe(M: DiscreteManifold, f: ScalarField,
                        segments: Optional[SegmentSample] = None) -> float:
    """
    Smallest C for which the midpoint inequality holds on every sampled segment.

    Args:
        M: Manifold
        f: Field
        segments: Triples to test (all reliable chart triples by default)

    Returns:
        Worst constant C, never below 0
    """
    C, _ = _constants(M, f, segments)
    return float(C.max()) if C.size else 0.0


def _constants(M: DiscreteManifold, f: ScalarField, segments: Optional[SegmentSample]):
    if segments is None:
        segments = sample_segments(M, f.reliable)
    v = f.values
    excess = 0.5 * (v[segments.a] + v[segments.b]) - v[segments.m]
    C = np.maximum(4.0 * excess / segments.length ** 2, 0.0)
    return C, segments


class SemiconcavityEvaluator:
    """Evaluates local semiconcavity with linear modulus."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def evaluate(self, M: DiscreteManifold, f: ScalarField, label: str = "",
                 negate: bool = False) -> CheckResult:
        """
        Pass iff every sampled segment meets its semiconcavity limit.

        Segments that may pass through a cone point of excess angle are
        skipped; the others near such a point get the 1/(2r) allowance.

        Args:
            M: Manifold
            f: Field
            label: Field name for the report
            negate: Check -f instead of f

        Returns:
            CheckResult with the C and limit of the segment that comes closest
            to (or furthest past) its limit
        """
        tol = self.tolerances if self.tolerances is not None else Tolerances.for_manifold(M)
        if negate:
            f = replace(f, values=-f.values)
        C, segments = _constants(M, f, None)
        limit = tol.semiconcavity_limit(segments.clearance(M))
        checked = np.isfinite(limit)
        ratio = np.where(checked, C / np.where(checked, limit, 1.0), 0.0)
        k = int(np.argmax(ratio)) if len(segments) else -1
        worst = float(C[k]) if k >= 0 else 0.0
        bound = float(limit[k]) if k >= 0 and checked[k] else float(tol.semiconcavity_limit())
        offending = np.unique(segments.m[ratio > 1.0]).tolist()
        name = "semiconcavity" + ("_neg" if negate else "")
        return CheckResult(
            check=f"{name}[{label}]" if label else name,
            passed=worst <= bound and bool(checked.any()),
            metric=worst,
            tolerance=bound,
            details={"segments": int(checked.sum()), "skipped_near_cones": int((~checked).sum()),
                     "C_times_h": worst * tol.spacing},
            offending_nodes=offending,
        )
