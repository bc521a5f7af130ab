from .residual_check import ResidualEvaluator, ResidualReport, eikonal_residual
from .semiconcavity_check import SegmentSample, SemiconcavityEvaluator, sample_segments, semiconcavity_probe
from .levelset_check import LevelSetEvaluator, levelset_distance_check, levelset_reconstruct
from .singular_check import SingularEvaluator, SingularSet, c1_candidate, singular_set
from .min_combine import MinStabilityEvaluator, min_combine, min_laws_hold

__all__ = [
    "ResidualEvaluator",
    "ResidualReport",
    "eikonal_residual",
    "SegmentSample",
    "SemiconcavityEvaluator",
    "sample_segments",
    "semiconcavity_probe",
    "LevelSetEvaluator",
    "levelset_distance_check",
    "levelset_reconstruct",
    "SingularEvaluator",
    "SingularSet",
    "c1_candidate",
    "singular_set",
    "MinStabilityEvaluator",
    "min_combine",
    "min_laws_hold",
]
