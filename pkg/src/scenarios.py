"""
Curated scenario manifolds.

Scenario parameters live in data/scenarios/*.json; builders turn them into
glued chart manifolds together with a base node, named rays toward each end
and escaping set sequences for dl-functions.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.config import Tolerances
from src.errors import ScenarioError
from src.geodesics import Ray, trace_ray
from src.manifold import (
    ChartSpec,
    DiscreteManifold,
    MetricTensor,
    Seam,
    build_chart_manifold,
    glue,
)


logger = logging.getLogger(__name__)

SCENARIO_NAMES = ("plane", "cylinder", "capped_half_cylinder", "pants")
RAY_FRACTIONS = (0.25, 0.5, 0.75, 0.9, 1.0)
SET_FRACTIONS = (0.25, 0.5, 0.75, 0.9)
VERIFICATIONS = ("theorem1", "theorem3", "theorem4", "ends", "metric", "lines", "path")


class Scenario(BaseModel):
    """Parameters and known facts of a scenario manifold."""
    name: str
    description: str = ""
    builder: Literal["plane", "cylinder", "capped_half_cylinder", "pants"]
    window: float = Field(gt=0)              # extent of every cut direction
    reference_length: float = Field(gt=0)    # length resolved by `resolution` grid steps
    resolution: int = Field(default=16, ge=4)
    end_radii: List[float]
    known_ends: int
    known_minfty_lower_bound: int
    expected_c1_solution_exists: bool
    eps: float = Field(gt=0)
    eval_fraction: float = Field(default=0.3, gt=0, lt=1)
    supports: List[str] = Field(default_factory=list)

    @field_validator("supports")
    @classmethod
    def _known_verifications(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in VERIFICATIONS]
        if unknown:
            raise ValueError(f"Unknown verifications: {unknown}")
        return value

    @property
    def spacing(self) -> float:
        return self.reference_length / self.resolution

    def supports_verification(self, which: str) -> bool:
        return which in self.supports


class ScenarioLoader:
    """Loads scenario parameter files."""

    def __init__(self, data_dir: Optional[Path] = None):
        """
        Initialize scenario loader.

        Args:
            data_dir: Path to data directory (default: ../data relative to this file)
        """
        if data_dir is None:
            self.data_dir = Path(__file__).parent.parent / "data"
        else:
            self.data_dir = Path(data_dir)

        self.scenarios_dir = self.data_dir / "scenarios"

    def load_scenario(self, name: str) -> Scenario:
        """
        Load a single scenario by name.

        Raises:
            ScenarioError: If the name is unknown or the file is invalid
        """
        path = self.scenarios_dir / f"{name}.json"
        if name not in SCENARIO_NAMES or not path.exists():
            raise ScenarioError(f"Unknown scenario: {name} (choose from {', '.join(SCENARIO_NAMES)})")
        try:
            with open(path, "r") as f:
                return Scenario(**json.load(f))
        except (json.JSONDecodeError, ValidationError) as e:
            raise ScenarioError(f"Invalid scenario file {path}: {e}") from e

    def load_all_scenarios(self) -> List[Scenario]:
        return [self.load_scenario(name) for name in SCENARIO_NAMES
                if (self.scenarios_dir / f"{name}.json").exists()]


@dataclass(frozen=True, eq=False)
class ScenarioInstance:
    """A built scenario: base node, named rays, set sequences and regions."""
    spec: Scenario
    x0: int
    ray_starts: Dict[str, int]
    ray_targets: Dict[str, List[int]]
    end_of_ray: Dict[str, str]
    set_sequences: Dict[str, List[np.ndarray]]
    regions: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def end_names(self) -> List[str]:
        return sorted(set(self.end_of_ray.values()))

    def rays_into(self, end: str) -> List[str]:
        return [name for name in self.ray_targets if self.end_of_ray[name] == end]

    def ray(self, M: DiscreteManifold, name: str, tolerances: Optional[Tolerances] = None) -> Ray:
        """Trace a named ray of the scenario."""
        if name not in self.ray_targets:
            raise ScenarioError(f"Scenario {self.name} has no ray {name!r}; "
                                f"choose from {', '.join(self.ray_targets)}")
        return trace_ray(M, self.ray_starts[name], self.ray_targets[name], tolerances)

    def region(self, name: str) -> np.ndarray:
        if name not in self.regions:
            raise ScenarioError(f"Scenario {self.name} has no region {name!r}")
        return self.regions[name]


def _steps(length: float, h: float) -> int:
    return max(int(round(length / h)), 2)


def _chart_mask(M: DiscreteManifold, *names: str) -> np.ndarray:
    mask = np.zeros(M.n_nodes, dtype=bool)
    for name in names:
        mask[M.chart(name).nodes.ravel()] = True
    return mask


def _row_index(M: DiscreteManifold, chart: str, v: float) -> int:
    spec = M.chart(chart).spec
    _, dv = spec.steps()
    nv = spec.resolution[1]
    return min(max(int(round((v - spec.v_range[0]) / dv)), 0), nv - 1)


def _row(M: DiscreteManifold, chart: str, v: float) -> np.ndarray:
    return np.array(M.chart(chart).nodes[_row_index(M, chart, v)], dtype=np.int64)


def _build_plane(spec: Scenario) -> Tuple[DiscreteManifold, ScenarioInstance]:
    h = spec.spacing
    n = _steps(spec.window, h)
    w = n * h
    M = build_chart_manifold(ChartSpec(
        name="plane", u_range=(-w, w), v_range=(-w, w), resolution=(2 * n + 1, 2 * n + 1),
        cut_sides=("u0", "u1", "v0", "v1"),
    ))
    x0 = M.node_at("plane", n, n)
    targets, ends = {}, {}
    for degrees in (0, 90, 180, 270, 45):
        targets[f"dir{degrees}"] = direction_targets(M, x0, float(degrees), w)
        ends[f"dir{degrees}"] = "infinity"
    sets = {
        "right": [np.array([M.nearest_node("plane", f * w, v)
                            for v in np.linspace(-w / 2, w / 2, n + 1)]) for f in SET_FRACTIONS],
    }
    inst = ScenarioInstance(spec=spec, x0=x0, ray_starts={k: x0 for k in targets},
                            ray_targets=targets, end_of_ray=ends, set_sequences=sets)
    return M, inst


def direction_targets(M: DiscreteManifold, x0: int, degrees: float,
                      length: Optional[float] = None) -> List[int]:
    """Plane-chart targets at growing distances from x0 along a direction given in degrees."""
    chart = M.charts[int(M.node_chart[x0])].name
    length = float(M.margin[x0]) if length is None else length
    theta = np.deg2rad(degrees)
    u0, v0 = M.coords[x0]
    targets = []
    for f in RAY_FRACTIONS:
        node = M.nearest_node(chart, u0 + f * length * np.cos(theta), v0 + f * length * np.sin(theta))
        if node != x0 and node not in targets:
            targets.append(node)
    return targets


def _tube(name: str, nu: int, h: float, v_range: Tuple[float, float],
          cut: Tuple[str, ...]) -> ChartSpec:
    return ChartSpec(
        name=name, u_range=(0.0, nu * h), v_range=v_range,
        resolution=(nu, _steps(v_range[1] - v_range[0], h) + 1),
        identification="periodic-u", cut_sides=cut,
    )


def _build_cylinder(spec: Scenario) -> Tuple[DiscreteManifold, ScenarioInstance]:
    h = spec.spacing
    w = _steps(spec.window, h) * h
    M = build_chart_manifold(_tube("tube", spec.resolution, h, (-w, w), ("v0", "v1")))
    x0 = M.node_at("tube", 0, _row_index(M, "tube", 0.0))
    targets = {
        "up": [M.node_at("tube", 0, _row_index(M, "tube", f * w)) for f in RAY_FRACTIONS],
        "down": [M.node_at("tube", 0, _row_index(M, "tube", -f * w)) for f in RAY_FRACTIONS],
    }
    sets = {
        "up": [_row(M, "tube", f * w) for f in SET_FRACTIONS],
        "down": [_row(M, "tube", -f * w) for f in SET_FRACTIONS],
    }
    inst = ScenarioInstance(spec=spec, x0=x0, ray_starts={"up": x0, "down": x0},
                            ray_targets=targets, end_of_ray={"up": "up", "down": "down"},
                            set_sequences=sets)
    return M, inst


def _build_capped(spec: Scenario) -> Tuple[DiscreteManifold, ScenarioInstance]:
    if spec.resolution % 4:
        raise ScenarioError("capped_half_cylinder needs a resolution divisible by 4")
    h = spec.spacing
    nu = spec.resolution
    w = _steps(spec.window, h) * h
    tube = build_chart_manifold(_tube("tube", nu, h, (0.0, w), ("v1",)))

    # Round hemisphere of the tube's radius in geodesic polar coordinates:
    # u is arclength along the equator, s the distance from the pole.
    radius = nu * h / (2.0 * np.pi)
    rings = nu // 4
    pole_floor = 1e-3 * h

    def ring_scale(V):
        return np.sin(np.maximum(V, pole_floor) / radius)

    cap = build_chart_manifold(ChartSpec(
        name="cap", u_range=(0.0, nu * h), v_range=(0.0, rings * h), resolution=(nu, rings + 1),
        metric=MetricTensor.revolution(ring_scale), identification="periodic-u",
    ))
    seams = [Seam(0, tuple(range(nu)), 1, tuple(rings * nu + i for i in range(nu)))]
    seams += [Seam(1, (i,), 1, (0,)) for i in range(1, nu)]
    M = glue([tube, cap], seams)

    x0 = M.node_at("tube", 0, _row_index(M, "tube", 0.5))
    targets, starts, ends = {}, {}, {}
    for i in range(0, nu, nu // 4):
        name = f"col{i}"
        starts[name] = M.node_at("tube", i, _row_index(M, "tube", 0.5))
        targets[name] = [M.node_at("tube", i, _row_index(M, "tube", f * w)) for f in RAY_FRACTIONS]
        ends[name] = "up"
    sets = {"up": [_row(M, "tube", f * w) for f in SET_FRACTIONS]}
    regions = {"cap": _chart_mask(M, "cap"), "tube": _chart_mask(M, "tube")}
    inst = ScenarioInstance(spec=spec, x0=x0, ray_starts=starts, ray_targets=targets,
                            end_of_ray=ends, set_sequences=sets, regions=regions)
    return M, inst


def cap_pole(M: DiscreteManifold) -> int:
    """The pole of the hemispherical cap, where the whole first cap row is collapsed."""
    return int(M.chart("cap").nodes[0, 0])


PANTS_LEGS = {"left": "u0", "right": "u1", "top": "v1"}


def _side_ids(n: int, side: str, indices: Sequence[int]) -> List[int]:
    if side == "u0":
        return [j * n for j in indices]
    if side == "u1":
        return [j * n + n - 1 for j in indices]
    if side == "v1":
        return [(n - 1) * n + i for i in indices]
    return list(indices)


def _build_pants(spec: Scenario) -> Tuple[DiscreteManifold, ScenarioInstance]:
    if spec.resolution % 2 or spec.resolution < 8:
        raise ScenarioError("pants needs an even resolution of at least 8")
    h = spec.spacing
    nu = spec.resolution
    n = (nu + 6) // 2                 # core nodes per side; each opening circle has 2n - 6 nodes
    side = (n - 1) * h
    w = _steps(spec.window, h) * h

    parts = [
        build_chart_manifold(ChartSpec(name=name, u_range=(0.0, side), v_range=(0.0, side),
                                       resolution=(n, n)))
        for name in ("core_a", "core_b")
    ]
    parts += [build_chart_manifold(_tube(f"leg_{leg}", nu, h, (0.0, w), ("v1",)))
              for leg in PANTS_LEGS]

    closed = [0, 1, n - 2, n - 1]
    sheet_seam = list(range(n))
    for s in PANTS_LEGS.values():
        sheet_seam += _side_ids(n, s, closed)
    sheet_seam = list(dict.fromkeys(sheet_seam))
    seams = [Seam(0, tuple(sheet_seam), 1, tuple(sheet_seam))]
    for k, s in enumerate(PANTS_LEGS.values()):
        circle = ([(0, node) for node in _side_ids(n, s, range(1, n - 1))]
                  + [(1, node) for node in _side_ids(n, s, range(n - 3, 1, -1))])
        for pos, (sheet, node) in enumerate(circle):
            seams.append(Seam(sheet, (node,), 2 + k, (pos,)))
    M = glue(parts, seams)

    c = (n - 1) // 2
    x0 = M.node_at("core_a", c, c)
    column = c - 1
    targets, ends, sets = {}, {}, {}
    for leg in PANTS_LEGS:
        chart = f"leg_{leg}"
        targets[leg] = [M.node_at(chart, column, _row_index(M, chart, f * w)) for f in RAY_FRACTIONS]
        ends[leg] = leg
        sets[leg] = [_row(M, chart, f * w) for f in SET_FRACTIONS]
    regions = {"core": _chart_mask(M, "core_a", "core_b")}
    for leg in PANTS_LEGS:
        regions[leg] = _chart_mask(M, f"leg_{leg}") & ~regions["core"]
    inst = ScenarioInstance(spec=spec, x0=x0, ray_starts={k: x0 for k in targets},
                            ray_targets=targets, end_of_ray=ends, set_sequences=sets,
                            regions=regions)
    return M, inst


BUILDERS = {
    "plane": _build_plane,
    "cylinder": _build_cylinder,
    "capped_half_cylinder": _build_capped,
    "pants": _build_pants,
}


def scenario(name: str, window: Optional[float] = None, resolution: Optional[int] = None,
             loader: Optional[ScenarioLoader] = None) -> Tuple[DiscreteManifold, ScenarioInstance]:
    """
    Build a named scenario manifold.

    Args:
        name: One of plane, cylinder, capped_half_cylinder, pants
        window: Override for the extent of the cut directions
        resolution: Override for the grid steps per reference length

    Returns:
        (manifold, scenario instance)

    Raises:
        ScenarioError: If the name is unknown or the overrides do not fit the builder
    """
    spec = (loader or ScenarioLoader()).load_scenario(name)
    overrides = {}
    if window is not None:
        overrides["window"] = float(window)
    if resolution is not None:
        overrides["resolution"] = int(resolution)
    if overrides:
        try:
            spec = Scenario(**{**spec.model_dump(), **overrides})
        except ValidationError as e:
            raise ScenarioError(f"Invalid override for scenario {name}: {e}") from e
    M, inst = BUILDERS[spec.builder](spec)
    logger.info("Scenario %s: %d nodes, %d edges, R=%.4g, h=%.4g",
                name, M.n_nodes, M.n_edges, M.window_radius, spec.spacing)
    return M, inst
