"""
Eikonal residual evaluator for horolab.

Classifies each interior reliable node by comparing its steepest descent and
ascent quotients, then measures how far the descent rate of regular nodes is
from 1.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.config import Tolerances
from src.eikonal import (DistanceField, ScalarField, ascent_quotient, interior_mask,
                         upwind_gradient_norm)
from src.manifold import DiscreteManifold
from src.utils.reporting import CheckResult


class ResidualReport(BaseModel):
    """Outcome of the residual classification."""
    max_abs_dev: float
    frac_regular: float
    checked_nodes: int
    offending_nodes: List[int] = Field(default_factory=list)
    singular_nodes: List[int] = Field(default_factory=list)
    violations: List[int] = Field(default_factory=list)


def checked_nodes(M: DiscreteManifold, f: ScalarField) -> np.ndarray:
    """Reliable nodes with reliable neighbours, excluding the sources of a distance field."""
    mask = interior_mask(M, f.reliable)
    if isinstance(f, DistanceField) and f.source_set.size:
        mask[f.source_set] = False
    return mask


def eikonal_residual(M: DiscreteManifold, f: ScalarField,
                     tolerances: Optional[Tolerances] = None) -> ResidualReport:
    """
    Residual of |∇f| = 1 over the regular nodes of a field.

    A checked node is regular when its best ascent and descent quotients
    agree within grad_tol. A node whose descent quotient falls below
    1 - grad_tol cannot be touched from below by a unit-slope cone and is
    recorded as a violation.

    Args:
        M: Manifold
        f: Field to check
        tolerances: Tolerances (derived from M by default)

    Returns:
        ResidualReport
    """
    tol = tolerances if tolerances is not None else Tolerances.for_manifold(M)
    mask = checked_nodes(M, f)
    descent = upwind_gradient_norm(M, f)
    ascent = ascent_quotient(M, f)

    regular = mask & (np.abs(ascent - descent) <= tol.grad_tol)
    deviation = np.abs(descent - 1.0)
    max_abs_dev = float(deviation[regular].max()) if regular.any() else 0.0
    violations = mask & (descent < 1.0 - tol.grad_tol)
    offending = (regular & (deviation > tol.residual_tol)) | violations

    checked = int(mask.sum())
    return ResidualReport(
        max_abs_dev=max_abs_dev,
        frac_regular=float(regular.sum()) / checked if checked else 0.0,
        checked_nodes=checked,
        offending_nodes=np.flatnonzero(offending).tolist(),
        singular_nodes=np.flatnonzero(mask & ~regular).tolist(),
        violations=np.flatnonzero(violations).tolist(),
    )


class ResidualEvaluator:
    """Evaluates the eikonal residual of a field."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def evaluate(self, M: DiscreteManifold, f: ScalarField, label: str = "") -> CheckResult:
        """
        Pass iff max_abs_dev <= residual_tol and there are no violations.

        Args:
            M: Manifold
            f: Field to check
            label: Field name for the report

        Returns:
            CheckResult
        """
        tol = self.tolerances if self.tolerances is not None else Tolerances.for_manifold(M)
        report = eikonal_residual(M, f, tol)
        passed = (report.max_abs_dev <= tol.residual_tol and not report.violations
                  and report.checked_nodes > 0)
        return CheckResult(
            check=f"eikonal_residual[{label}]" if label else "eikonal_residual",
            passed=passed,
            metric=report.max_abs_dev,
            tolerance=tol.residual_tol,
            details={
                "frac_regular": report.frac_regular,
                "checked_nodes": report.checked_nodes,
                "singular_nodes": len(report.singular_nodes),
                "violations": len(report.violations),
            },
            offending_nodes=report.offending_nodes,
        )
