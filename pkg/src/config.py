"""
Tolerance ledger and run configuration for horolab.

All numerical thresholds used by the checks are derived here from three
properties of the manifold: the stencil bound, the grid spacing and the
window radius.
"""

import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


HALF_STENCIL_16: Tuple[Tuple[int, int], ...] = (
    (1, 0), (0, 1), (1, 1), (1, -1),
    (1, 2), (2, 1), (1, -2), (2, -1),
)


def _extended_half_stencil(radius: int = 4) -> Tuple[Tuple[int, int], ...]:
    offsets = []
    for a in range(0, radius + 1):
        for b in range(-radius, radius + 1):
            if a == 0 and b <= 0:
                continue
            if math.gcd(a, abs(b)) != 1:
                continue
            offsets.append((a, b))
    return tuple(offsets)


STENCILS: Dict[str, Tuple[Tuple[int, int], ...]] = {
    "16": HALF_STENCIL_16,
    "extended": _extended_half_stencil(4),
}


def half_stencil(name: str) -> Tuple[Tuple[int, int], ...]:
    """
    Look up the half stencil (one offset per +/- pair) by name.

    Args:
        name: "16" for kings plus knights moves, "extended" for all primitive
            offsets with components up to 4

    Returns:
        Tuple of integer offsets
    """
    if name not in STENCILS:
        raise ValueError(f"Unknown stencil: {name}")
    return STENCILS[name]


def stencil_bound(offsets: Tuple[Tuple[int, int], ...]) -> float:
    """
    Worst relative excess of graph distance over Euclidean distance.

    A path built from the stencil directions on a unit square grid overshoots
    the straight segment most in the middle of the widest angular gap Δ
    between two directions, by the factor 1/cos(Δ/2).

    Args:
        offsets: Half stencil

    Returns:
        The stencil bound ε = 1/cos(Δ/2) - 1
    """
    full = list(offsets) + [(-a, -b) for a, b in offsets]
    angles = np.sort(np.array([math.atan2(b, a) for a, b in full]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))
    widest = float(gaps.max())
    return 1.0 / math.cos(widest / 2.0) - 1.0


class Tolerances(BaseModel):
    """Numerical tolerances for one manifold."""

    stencil_bound: float = Field(gt=0)
    spacing: float = Field(gt=0)
    window_radius: float = Field(gt=0)
    grad_tol: float = Field(gt=0)
    residual_tol: float = Field(gt=0)
    ray_rate: float = Field(gt=0)  # ray_tol per unit of span
    limit_tol: float = Field(gt=0)
    shift_tol: float = Field(default=1e-4, gt=0)
    path_tol: float = Field(default=0.05, gt=0)
    semiconcavity_tol: float = Field(gt=0)
    eps: Optional[float] = Field(default=None, gt=0)

    @classmethod
    def for_manifold(cls, manifold, **overrides) -> "Tolerances":
        """
        Derive the default tolerances of a manifold.

        Args:
            manifold: DiscreteManifold
            **overrides: Values replacing the derived defaults

        Returns:
            Tolerances instance
        """
        eps = manifold.stencil_bound
        values = {
            "stencil_bound": eps,
            "spacing": manifold.spacing,
            "window_radius": manifold.window_radius,
            "grad_tol": 3.0 * eps,
            "residual_tol": 3.0 * eps,
            "ray_rate": 2.0 * eps,
            "limit_tol": 0.02 * manifold.window_radius,
            "semiconcavity_tol": 10.0 * eps,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def ray_tol(self, span: float) -> float:
        """Ray audit tolerance for a ray of the given span (never below 1e-9)."""
        return max(self.ray_rate * span, 1e-9)

    def backend_slack(self, backend: str) -> float:
        """Extra allowance for the first-order fast-march discretization."""
        return 2.0 * self.spacing if backend == "fast_march" else 0.0

    def reconstruction_tol(self, backend: str = "graph") -> float:
        return self.stencil_bound * self.window_radius + 2.0 * self.spacing + self.backend_slack(backend)

    def check_tol(self, a1: float, a2: float, backend: str = "graph") -> float:
        return self.stencil_bound * (a1 - a2) + 2.0 * self.spacing + self.backend_slack(backend)

    def semiconcavity_limit(self, clearance=math.inf):
        """
        Largest admissible semiconcavity constant C on a segment.

        The bound is the constant semiconcavity_tol away from cone points of
        excess angle. At clearance r from such a point every distance field
        may bend like the distance from the vertex itself, which adds 1/(2r);
        a segment with no clearance is not checked (infinite limit).

        Args:
            clearance: Scalar or array of clearances

        Returns:
            Limit of the same shape
        """
        r = np.asarray(clearance, dtype=float)
        safe = np.where(r > 0.0, r, 1.0)
        limit = np.where(r > 0.0, self.semiconcavity_tol + 0.5 / safe, np.inf)
        return float(limit) if limit.ndim == 0 else limit

    def singular_angle(self) -> float:
        """
        Widest spread of near-steepest descent directions of a differentiable field.

        A direction at angle a from the gradient of a linear field descends at
        rate cos(a), so every direction passing the 1 - grad_tol test lies within
        acos(1 - grad_tol) of the gradient and any two of them within twice that.
        """
        return 2.0 * math.acos(max(-1.0, 1.0 - self.grad_tol))

    def table(self) -> List[Tuple[str, str, str]]:
        """Rows (name, value, rule) for --help-tolerances."""
        return [
            ("stencil_bound", f"{self.stencil_bound:.6g}", "1/cos(widest gap/2) - 1"),
            ("spacing", f"{self.spacing:.6g}", "largest axis edge length h"),
            ("window_radius", f"{self.window_radius:.6g}", "largest boundary margin R"),
            ("grad_tol", f"{self.grad_tol:.6g}", "3 x stencil bound"),
            ("residual_tol", f"{self.residual_tol:.6g}", "3 x stencil bound"),
            ("ray_tol", f"{self.ray_rate:.6g} x span", "2 x stencil bound x span"),
            ("limit_tol", f"{self.limit_tol:.6g}", "0.02 x R"),
            ("shift_tol", f"{self.shift_tol:.6g}", "golden-section shift resolution"),
            ("path_tol", f"{self.path_tol:.6g}", "connect_path endpoint tolerance"),
            ("semiconcavity_tol", f"{self.semiconcavity_tol:.6g}", "10 x stencil bound (+1/(2r) near cone points)"),
            ("singular_angle", f"{self.singular_angle():.6g}", "2 x acos(1 - grad_tol)"),
            ("reconstruction_tol", f"{self.reconstruction_tol():.6g}", "eps x R + 2h (+2h fast_march)"),
            ("check_tol", "eps x (a1-a2) + 2h", "(+2h fast_march)"),
            ("eps", "per scenario" if self.eps is None else f"{self.eps:.6g}", "cluster threshold"),
        ]


TOLERANCE_NAMES = ("limit_tol", "grad_tol", "ray_rate", "shift_tol", "eps",
                   "residual_tol", "path_tol", "semiconcavity_tol")


class RunConfig(BaseModel):
    """Validated command-line configuration."""

    command: Literal["dist", "busemann", "horo", "dl", "verify", "describe"]
    scenario: Optional[str] = None
    spec: Optional[Path] = None
    window: Optional[float] = Field(default=None, gt=0)
    resolution: Optional[int] = Field(default=None, ge=2)
    out: Path = Path("results")
    seed: int = 0
    backend: Literal["graph", "fast_march"] = "fast_march"
    tolerances: Dict[str, float] = Field(default_factory=dict)
    which: Optional[str] = None

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, tol in value.items():
            if name not in TOLERANCE_NAMES:
                raise ValueError(f"Unknown tolerance: {name}")
            if not tol > 0:
                raise ValueError(f"Tolerance {name} must be positive, got {tol}")
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfig":
        if self.scenario is None and self.spec is None:
            raise ValueError("Either --scenario or --spec is required")
        if self.scenario is not None and self.spec is not None:
            raise ValueError("--scenario and --spec are mutually exclusive")
        if self.command == "verify" and self.resolution is not None and self.resolution < 16:
            raise ValueError(
                f"Verification needs resolution >= 16 per axis, got {self.resolution}"
            )
        return self
