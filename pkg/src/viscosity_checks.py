"""
Viscosity-solution checks: both directions of the dl-function characterization.

The operations live in src.checks, one evaluator module per check; this
module collects them under one name.
"""

from src.checks import (
    LevelSetEvaluator,
    MinStabilityEvaluator,
    ResidualEvaluator,
    ResidualReport,
    SegmentSample,
    SemiconcavityEvaluator,
    SingularEvaluator,
    SingularSet,
    c1_candidate,
    eikonal_residual,
    levelset_distance_check,
    levelset_reconstruct,
    min_combine,
    min_laws_hold,
    sample_segments,
    semiconcavity_probe,
    singular_set,
)

__all__ = [
    "LevelSetEvaluator",
    "MinStabilityEvaluator",
    "ResidualEvaluator",
    "ResidualReport",
    "SegmentSample",
    "SemiconcavityEvaluator",
    "SingularEvaluator",
    "SingularSet",
    "c1_candidate",
    "eikonal_residual",
    "levelset_distance_check",
    "levelset_reconstruct",
    "min_combine",
    "min_laws_hold",
    "sample_segments",
    "semiconcavity_probe",
    "singular_set",
]
