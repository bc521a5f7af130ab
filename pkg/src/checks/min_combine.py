"""
Min-stability of viscosity solutions for horolab.
"""

from typing import Optional

import numpy as np

from src.config import Tolerances
from src.eikonal import ScalarField
from src.errors import EmptySetError
from src.manifold import DiscreteManifold
from src.utils.reporting import CheckResult

from .residual_check import eikonal_residual


def min_combine(f1: ScalarField, f2: ScalarField) -> ScalarField:
    """
    Pointwise minimum of two fields on their common reliable region.

    Raises:
        EmptySetError: If the reliable regions are disjoint
    """
    reliable = f1.reliable & f2.reliable
    if not reliable.any():
        raise EmptySetError("min_combine: the fields have disjoint reliable regions")
    return ScalarField(
        values=np.minimum(f1.values, f2.values),
        source="min-combination",
        reliable=reliable,
        reliable_radius=min(f1.reliable_radius, f2.reliable_radius),
        backend=f1.backend if f1.backend == f2.backend else "graph",
    )


def min_laws_hold(f: ScalarField, g: ScalarField, k: ScalarField) -> bool:
    """Idempotence, commutativity and associativity of min, exactly."""
    fg = min_combine(f, g).values
    return (np.array_equal(min_combine(f, f).values, f.values)
            and np.array_equal(fg, min_combine(g, f).values)
            and np.array_equal(min_combine(min_combine(f, g), k).values,
                               min_combine(f, min_combine(g, k)).values))


class MinStabilityEvaluator:
    """Evaluates that the min of two solutions is again a solution."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def evaluate(self, M: DiscreteManifold, f1: ScalarField, f2: ScalarField,
                 label: str = "") -> CheckResult:
        """
        Pass iff the min passes the residual check with max_abs_dev no larger
        than the worse input (up to residual_tol) and min obeys its algebraic laws.
        """
        tol = self.tolerances if self.tolerances is not None else Tolerances.for_manifold(M)
        combined = min_combine(f1, f2)
        report = eikonal_residual(M, combined, tol)
        inputs = max(eikonal_residual(M, f.restricted(combined.reliable), tol).max_abs_dev
                     for f in (f1, f2))
        laws = min_laws_hold(f1, f2, combined)
        passed = (report.max_abs_dev <= max(inputs, tol.residual_tol)
                  and not report.violations and laws)
        return CheckResult(
            check=f"min_stability[{label}]" if label else "min_stability",
            passed=passed,
            metric=report.max_abs_dev,
            tolerance=max(inputs, tol.residual_tol),
            details={"inputs_max_abs_dev": inputs, "laws_exact": laws,
                     "violations": len(report.violations)},
            offending_nodes=report.offending_nodes,
        )
