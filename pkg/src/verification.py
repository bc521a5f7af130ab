"""
Verification runs for horolab.

HoroLab builds a scenario, computes its battery of boundary functions and
runs one named verification over them. Failures are reported as failed
checks, never raised.
"""

import itertools
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.boundary_functions import LimitReport, busemann, dl_function, horofunction
from src.checks import (
    LevelSetEvaluator,
    MinStabilityEvaluator,
    ResidualEvaluator,
    SemiconcavityEvaluator,
    SingularEvaluator,
    min_combine,
    singular_set,
)
from src.config import Tolerances
from src.eikonal import ScalarField, as_field, interior_mask
from src.ends import (
    EndPartition,
    classify_ray,
    end_partition,
    verify_coray_cofinality,
    verify_ends_inequality,
)
from src.errors import ScenarioError
from src.geodesics import calibrated_curve, concatenate, is_line, minimal_segment
from src.ideal_boundary import (
    BoundaryPoint,
    CompactExhaustion,
    cluster_boundary,
    connect_path,
    distance_matrix,
    path_endpoints,
    rho,
    rho_quotient,
)
from src.manifold import DiscreteManifold
from src.scenarios import VERIFICATIONS, ScenarioInstance, ScenarioLoader, cap_pole, scenario
from src.utils.reporting import (
    CheckResult,
    ReportAggregator,
    matrix_frame,
    write_frame,
    write_offending_nodes,
    write_text,
)


logger = logging.getLogger(__name__)

MIN_PAIRS = 5
CORAY_STARTS = 8
METRIC_TRIPLES = 20
PATH_STEPS = 21
PATH_PAIRS = 10
RIDGE_QUANTILES = (0.15, 0.35, 0.5, 0.65, 0.85)
FAMILY_SHIFTS = (-0.5, -0.25, 0.0, 0.25, 0.5)
KINK_DEPTHS = (1.0, 2.0, 4.0)
# Checks each control must fail.
CONTROL_FAILURES = {
    "control_abs_x": ("eikonal_residual", "semiconcavity", "levelset_reconstruct"),
    "control_cone": ("eikonal_residual", "semiconcavity", "levelset_reconstruct"),
    "control_kink": ("eikonal_residual", "semiconcavity", "levelset_reconstruct"),
}
EXACT = 1e-12

Battery = List[Tuple[str, ScalarField, LimitReport]]


def _result(check: str, passed: bool, metric: float, tolerance: float, **details) -> CheckResult:
    return CheckResult(check=check, passed=bool(passed), metric=float(metric),
                       tolerance=float(tolerance), details=details)


def _monotonicity(label: str, report: LimitReport, tol: Tolerances) -> CheckResult:
    """Busemann iterates b_t = d(., γ(t)) - t may only decrease along the schedule."""
    limit = tol.ray_tol(max(report.schedule)) + tol.backend_slack(report.backend)
    excess = report.monotonicity_excess if report.monotonicity_excess is not None else 0.0
    return _result(f"monotonicity[{label}]", excess <= limit, excess, limit,
                   iterates=report.iterates_used)


class HoroLab:
    """Runs named verifications on scenario manifolds."""

    VERIFICATIONS = VERIFICATIONS

    def __init__(
        self,
        backend: str = "fast_march",
        tolerance_overrides: Optional[Dict[str, float]] = None,
        seed: int = 0,
        data_dir: Optional[Path] = None,
        progress: bool = False,
    ):
        """
        Initialize HoroLab.

        Args:
            backend: Distance backend for limit fields
            tolerance_overrides: Values replacing derived tolerance defaults
            seed: Seed for sampled start nodes, pairs and triples
            data_dir: Path to data directory (default: auto-detect)
            progress: Show tqdm progress bars
        """
        self.backend = backend
        self.overrides = dict(tolerance_overrides or {})
        self.seed = seed
        self.progress = progress
        self.loader = ScenarioLoader(data_dir)
        self.aggregator = ReportAggregator()
        self._batteries: Dict[str, Tuple[DiscreteManifold, Battery]] = {}

    def tolerances(self, M: DiscreteManifold) -> Tolerances:
        return Tolerances.for_manifold(M, **self.overrides)

    def build(self, name: str, window: Optional[float] = None,
              resolution: Optional[int] = None) -> Tuple[DiscreteManifold, ScenarioInstance]:
        return scenario(name, window=window, resolution=resolution, loader=self.loader)

    def _eps(self, inst: ScenarioInstance, tol: Tolerances) -> float:
        return tol.eps if tol.eps is not None else inst.spec.eps

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    # ------------------------------------------------------------------ fields

    def battery(self, M: DiscreteManifold, inst: ScenarioInstance) -> Battery:
        """
        Busemann fields of every named ray, dl-fields of every set sequence
        and the horofunction of the first ray's targets, all normalized at x0.
        """
        cached = self._batteries.get(inst.name)
        if cached is not None and cached[0] is M:
            return cached[1]
        tol = self.tolerances(M)
        fraction = inst.spec.eval_fraction
        jobs: List[Tuple[str, Callable[[], Tuple[ScalarField, LimitReport]]]] = []
        for name in inst.ray_targets:
            jobs.append((f"busemann_{name}", lambda name=name: busemann(
                M, inst.ray(M, name, tol), inst.x0, self.backend, tol, fraction)))
        for name, sets in inst.set_sequences.items():
            jobs.append((f"dl_{name}", lambda sets=sets: dl_function(
                M, sets, inst.x0, self.backend, tol, fraction)))
        first = next(iter(inst.ray_targets))
        jobs.append((f"horo_{first}", lambda: horofunction(
            M, inst.ray_targets[first], inst.x0, self.backend, tol, fraction)))

        battery: Battery = []
        for label, job in tqdm(jobs, desc=f"{inst.name} fields", disable=not self.progress):
            field, report = job()
            battery.append((label, field, report))
        self._batteries[inst.name] = (M, battery)
        return battery

    def busemann_points(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[BoundaryPoint]:
        return [BoundaryPoint(rep=f, provenance=f.source, label=label)
                for label, f, _ in self.battery(M, inst) if label.startswith("busemann_")]

    def boundary_points(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[BoundaryPoint]:
        return [BoundaryPoint(rep=f, provenance=f.source, label=label)
                for label, f, _ in self.battery(M, inst)]

    def controls(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[Tuple[str, ScalarField]]:
        """Fields that are not viscosity solutions: a convex valley, plus a tilted kink on flat charts."""
        x0 = inst.x0
        if inst.spec.builder == "plane":
            u = M.coords[:, 0] - M.coords[x0, 0]
            v = M.coords[:, 1] - M.coords[x0, 1]
            return [("control_abs_x", as_field(M, np.abs(u), base_node=x0)),
                    ("control_kink", as_field(M, np.maximum(-u, -v), base_node=x0))]
        cone = np.array(M.distances_from(x0))
        return [("control_cone", as_field(M, cone, base_node=x0))]

    # ----------------------------------------------------------------- drivers

    def verify_theorem1(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """Forward and backward viscosity checks on the battery, its min pairs and the controls."""
        tol = self.tolerances(M)
        residual = ResidualEvaluator(tol)
        semiconcavity = SemiconcavityEvaluator(tol)
        levelsets = LevelSetEvaluator(tol)
        results: List[CheckResult] = []

        battery = self.battery(M, inst)
        for label, f, report in tqdm(battery, desc="theorem1", disable=not self.progress):
            results.append(_result(f"limit_converged[{label}]", report.converged,
                                   report.sup_change_last, report.limit_tol,
                                   iterates=report.iterates_used))
            if label.startswith("busemann_"):
                results.append(_monotonicity(label, report, tol))
            results.append(residual.evaluate(M, f, label))
            results.append(semiconcavity.evaluate(M, f, label))
            results.append(levelsets.evaluate_reconstruction(M, f, inst.x0, label=label))
            results.append(levelsets.evaluate_distance_identity(M, f, inst.x0, label=label))
            curve, defect = calibrated_curve(M, f, inst.x0)
            limit = tol.check_tol(curve.length, 0.0, f.backend)
            results.append(_result(f"calibration[{label}]", defect <= limit, defect, limit,
                                   curve_length=curve.length))

        pairs = list(itertools.combinations(range(len(battery)), 2))
        rng = self._rng()
        chosen = rng.choice(len(pairs), size=min(MIN_PAIRS, len(pairs)), replace=False)
        stability = MinStabilityEvaluator(tol)
        for k in sorted(int(c) for c in chosen):
            i, j = pairs[k]
            (a, fa, _), (b, fb, _) = battery[i], battery[j]
            label = f"{a}|{b}"
            results.append(stability.evaluate(M, fa, fb, label))
            results.append(semiconcavity.evaluate(M, min_combine(fa, fb), f"min({label})"))

        for label, control in self.controls(M, inst):
            results.append(self._negative_control(M, inst, label, control, tol))
        return results

    def _negative_control(self, M: DiscreteManifold, inst: ScenarioInstance, label: str,
                          f: ScalarField, tol: Tolerances) -> CheckResult:
        residual = ResidualEvaluator(tol).evaluate(M, f, label)
        semiconcavity = SemiconcavityEvaluator(tol).evaluate(M, f, label)
        depths = KINK_DEPTHS if label == "control_kink" else None
        reconstruction = LevelSetEvaluator(tol).evaluate_reconstruction(M, f, inst.x0, depths, label)
        failed = [r.check.split("[")[0] for r in (residual, semiconcavity, reconstruction)
                  if not r.passed]
        expected = CONTROL_FAILURES[label]
        missing = [name for name in expected if name not in failed]
        return _result(f"negative_control[{label}]", not missing, float(len(missing)), 0.0,
                       failed_checks=failed, semiconcavity_C=semiconcavity.metric,
                       reconstruction_deviation=reconstruction.metric)

    def verify_theorem3(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """Single cluster, maxima inside the cap and singular there, and no line through the cap."""
        self._require(inst, "theorem3")
        tol = self.tolerances(M)
        points = self.boundary_points(M, inst)
        E = CompactExhaustion.common(M, inst.x0, [p.rep for p in points])
        matrix = distance_matrix(points, E, tol.shift_tol, self.progress)
        clusters = cluster_boundary(points, E, self._eps(inst, tol), matrix)
        results = [_result("single_cluster", len(clusters) == 1, len(clusters), 1.0,
                           max_rho_quotient=float(matrix.max()))]

        cap = inst.region("cap")
        singular = SingularEvaluator(tol)
        for p in points:
            f = p.rep
            values = np.where(f.reliable, f.values, -np.inf)
            top = int(np.argmax(values))
            margin = float(M.margin[top])
            inside = bool(cap[top]) and margin >= M.window_radius / 2.0
            results.append(_result(f"argmax_in_cap[{p.label}]", inside, margin, M.window_radius / 2.0,
                                   argmax=top))
            near = M.distances_from(top) <= 3.0 * M.spacing
            results.append(singular.evaluate(M, f, near, True, p.label))

        tube = M.chart("tube").nodes
        nu = tube.shape[1]
        pole = cap_pole(M)
        through = concatenate(minimal_segment(M, int(tube[-1, 0]), pole),
                              minimal_segment(M, pole, int(tube[-1, nu // 2])))
        line = is_line(M, through, tol)
        results.append(_result("no_line_through_cap", not line, through.length, 0.0))
        return results

    def _coray_starts(self, M: DiscreteManifold, inst: ScenarioInstance, E: EndPartition,
                      rng: np.random.Generator) -> List[int]:
        """Seeded starts from the first ball and from every end component around it."""
        dist = M.distances_from(inst.x0)
        groups = [np.flatnonzero(dist <= E.radii[0])]
        for c in range(E.counts[0]):
            groups.append(np.flatnonzero((E.labels[0] == c) & (dist <= E.radii[-1])))
        per = max(2, -(-CORAY_STARTS // len(groups)))
        starts = set()
        for candidates in groups:
            count = min(per, candidates.size)
            starts.update(int(x) for x in rng.choice(candidates, size=count, replace=False))
        return sorted(starts)

    def _cofinality(self, M: DiscreteManifold, inst: ScenarioInstance, E: EndPartition,
                    tol: Tolerances) -> List[CheckResult]:
        rng = self._rng()
        results = []
        for end in inst.end_names:
            name = inst.rays_into(end)[0]
            gamma = inst.ray(M, name, tol)
            results.append(verify_coray_cofinality(M, gamma, self._coray_starts(M, inst, E, rng),
                                                   E, tol, name))
        return results

    def verify_theorem4(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """Coray cofinality per end, singular min-closure family in the core, ends vs clusters."""
        self._require(inst, "theorem4")
        tol = self.tolerances(M)
        E = end_partition(M, inst.x0, inst.spec.end_radii)
        results = self._cofinality(M, inst, E, tol)

        points = self.busemann_points(M, inst)
        singles = [(p.label, p.rep) for p in points]
        family = list(singles)
        for (a, fa), (b, fb) in itertools.combinations(singles, 2):
            for s in FAMILY_SHIFTS:
                family.append((f"min({a},{b}{s:+g})", min_combine(fa, fb.shifted(s))))
        triple = singles[0][1]
        for _, f in singles[1:]:
            triple = min_combine(triple, f)
        family.append(("min(" + ",".join(a for a, _ in singles) + ")", triple))

        core = inst.region("core")
        singular = SingularEvaluator(tol)
        members = [singular.evaluate(M, f, core, True, label)
                   for label, f in tqdm(family, desc="theorem4 family", disable=not self.progress)]
        missing = [r.check for r in members if not r.passed]
        results.append(_result("family_singular_in_core", not missing, len(missing), 0.0,
                               family_size=len(family), missing=missing))
        results.append(verify_ends_inequality(M, E, points, self._eps(inst, tol)))
        return results

    def verify_ends(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """End count, ray classification, coray cofinality per end and the ends inequality."""
        tol = self.tolerances(M)
        E = end_partition(M, inst.x0, inst.spec.end_radii)
        results = [_result("end_count", E.stabilized and E.stabilized_count == inst.spec.known_ends,
                           E.stabilized_count, inst.spec.known_ends, counts=list(E.counts))]
        labels = {name: classify_ray(M, E, inst.ray(M, name, tol), name) for name in inst.ray_targets}
        by_end: Dict[str, set] = {}
        for name, label in labels.items():
            by_end.setdefault(inst.end_of_ray[name], set()).add(label)
        distinct = [next(iter(s)) for s in by_end.values() if len(s) == 1]
        consistent = len(distinct) == len(by_end) and len(set(distinct)) == len(by_end)
        results.append(_result("ray_ends", consistent, len(set(labels.values())), len(by_end),
                               **{f"tail_{k}": v for k, v in labels.items()}))
        if inst.spec.known_ends > 1:
            results.extend(self._cofinality(M, inst, E, tol))
        results.append(verify_ends_inequality(M, E, self.busemann_points(M, inst),
                                              self._eps(inst, tol)))
        return results

    def verify_metric(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """Pseudometric laws of ρ and ρ~ on seeded triples of boundary points."""
        tol = self.tolerances(M)
        points = self.boundary_points(M, inst)
        E = CompactExhaustion.common(M, inst.x0, [p.rep for p in points])
        rng = self._rng()
        n = len(points)
        worst = {"symmetry": 0.0, "triangle": 0.0, "quotient_below": 0.0, "shift": 0.0}
        for _ in tqdm(range(METRIC_TRIPLES), desc="metric", disable=not self.progress):
            i, j, k = (int(x) for x in rng.choice(n, size=3, replace=n < 3))
            u, v, w = points[i].rep, points[j].rep, points[k].rep
            for metric in (rho, rho_quotient):
                uv, vu = metric(u, v, E), metric(v, u, E)
                worst["symmetry"] = max(worst["symmetry"], abs(uv - vu))
                excess = metric(u, w, E) - uv - metric(v, w, E)
                worst["triangle"] = max(worst["triangle"], excess)
            worst["quotient_below"] = max(worst["quotient_below"], rho_quotient(u, v, E) - rho(u, v, E))
            c = float(rng.uniform(-1.0, 1.0))
            shifted = rho_quotient(u.shifted(c), v, E, tol.shift_tol)
            worst["shift"] = max(worst["shift"], abs(shifted - rho_quotient(u, v, E, tol.shift_tol)))

        results = [
            _result("rho_symmetry", worst["symmetry"] <= EXACT, worst["symmetry"], EXACT),
            _result("rho_triangle", worst["triangle"] <= EXACT, worst["triangle"], EXACT),
            _result("rho_quotient_below_rho", worst["quotient_below"] <= EXACT,
                    worst["quotient_below"], EXACT),
            _result("rho_quotient_shift_invariance", worst["shift"] <= tol.shift_tol,
                    worst["shift"], tol.shift_tol),
        ]
        unbounded = [p.label for p in points if not p.bounded_by_distance(M)]
        results.append(_result("bounded_by_distance", not unbounded, len(unbounded), 0.0,
                               fields=unbounded))
        return results

    def verify_lines(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """A line crosses the window and the boundary sample has at least two clusters."""
        self._require(inst, "lines")
        tol = self.tolerances(M)
        tube = M.chart("tube").nodes
        line = minimal_segment(M, int(tube[0, 0]), int(tube[-1, 0]))
        results = [_result("line_exists", is_line(M, line, tol), line.length, 0.0)]
        for label, _, report in self.battery(M, inst):
            if label.startswith("busemann_"):
                results.append(_monotonicity(label, report, tol))
        points = self.busemann_points(M, inst)
        E = CompactExhaustion.common(M, inst.x0, [p.rep for p in points])
        clusters = cluster_boundary(points, E, self._eps(inst, tol))
        results.append(_result("at_least_two_clusters", len(clusters) >= 2, len(clusters), 2.0))
        return results

    def verify_path(self, M: DiscreteManifold, inst: ScenarioInstance) -> List[CheckResult]:
        """
        The min-path f_t = min(u + t, v) between two Busemann fields: its
        endpoints, ρ~-monotone approach to v, ρ~-continuity in t, solutions
        at every step and a ridge that sweeps across the ball as t grows.
        """
        self._require(inst, "path")
        tol = self.tolerances(M)
        points = self.busemann_points(M, inst)
        u, v = points[0].rep, points[1].rep
        E = CompactExhaustion.common(M, inst.x0, [u, v])
        t_lo, t_hi = path_endpoints(u, v, E)
        t_grid = np.linspace(t_lo - 0.5, t_hi + 0.5, PATH_STEPS)
        path = connect_path(u, v, t_grid)
        slack = tol.shift_tol * E.depth + EXACT

        start = rho_quotient(path[0], u, E, tol.shift_tol)
        end = rho(path[-1], v, E)
        results = [
            _result("path_starts_at_u", start <= tol.path_tol, start, tol.path_tol),
            _result("path_ends_at_v", end <= tol.path_tol, end, tol.path_tol),
        ]

        to_v = np.array([rho_quotient(f, v, E, tol.shift_tol) for f in path])
        rise = float(np.max(np.diff(to_v)))
        results.append(_result("path_monotone_to_v", rise <= slack, rise, slack,
                               start_distance=float(to_v[0])))

        rng = self._rng()
        pairs = [(i, i + 1) for i in range(len(t_grid) - 1)]
        pairs += [tuple(sorted(int(k) for k in rng.choice(len(t_grid), size=2, replace=False)))
                  for _ in range(PATH_PAIRS)]
        excess = 0.0
        for i, j in pairs:
            step = abs(float(t_grid[j] - t_grid[i]))
            bound = float(np.sum(np.minimum(E.weights, step / 2.0)))
            excess = max(excess, rho_quotient(path[i], path[j], E, tol.shift_tol) - bound)
        results.append(_result("path_lipschitz", excess <= slack, excess, slack, pairs=len(pairs)))

        residual = ResidualEvaluator(tol)
        reports = [residual.evaluate(M, f.restricted(E.largest)) for f in path]
        failing = [i for i, r in enumerate(reports) if not r.passed]
        results.append(_result("path_solutions", not failing, max(r.metric for r in reports),
                               tol.residual_tol, failing_steps=failing))
        results.append(self._ridge_sweep(M, u, v, E, tol))
        return results

    def _ridge_sweep(self, M: DiscreteManifold, u: ScalarField, v: ScalarField,
                     E: CompactExhaustion, tol: Tolerances) -> CheckResult:
        # Shifts are read off nodes so each ridge passes through a grid node.
        ball = np.flatnonzero(interior_mask(M, E.largest & u.reliable & v.reliable))
        gap = (v.values - u.values)[ball]
        order = np.argsort(gap, kind="stable")
        anchors = ball[order[(np.array(RIDGE_QUANTILES) * (ball.size - 1)).astype(int)]]
        shifts = np.unique(v.values[anchors] - u.values[anchors])
        locations = []
        for t in shifts:
            f = min_combine(u.shifted(float(t)), v).restricted(E.largest)
            ridge = singular_set(M, f, tol).nodes
            locations.append(float(np.median(u.values[ridge])) if ridge.size else np.nan)
        locations = np.array(locations)
        steps = np.diff(locations)
        moved = bool(shifts.size >= 2 and np.all(np.isfinite(locations)) and np.all(steps < 0.0))
        worst = float(np.max(steps)) if steps.size and np.all(np.isfinite(steps)) else np.inf
        return _result("ridge_moves_with_t", moved, worst, 0.0,
                       shifts=[round(float(t), 6) for t in shifts],
                       ridge_u=[round(float(x), 6) for x in locations])

    # ------------------------------------------------------------------ runner

    def _require(self, inst: ScenarioInstance, which: str) -> None:
        if not inst.spec.supports_verification(which):
            raise ScenarioError(f"Verification {which} is not supported on scenario {inst.name}")

    def run(self, which: str, name: str, window: Optional[float] = None,
            resolution: Optional[int] = None) -> Dict:
        """
        Build a scenario and run one verification on it.

        Returns:
            Aggregated run dictionary (see ReportAggregator.aggregate)

        Raises:
            ScenarioError: If the scenario is unknown or does not support the verification
        """
        if which not in self.VERIFICATIONS:
            raise ScenarioError(f"Unknown verification: {which}")
        M, inst = self.build(name, window, resolution)
        self._require(inst, which)
        results = getattr(self, f"verify_{which}")(M, inst)
        run = self.aggregator.aggregate(f"{which}/{name}", results)
        run["manifold"] = M
        if which == "metric":
            points = self.boundary_points(M, inst)
            E = CompactExhaustion.common(M, inst.x0, [p.rep for p in points])
            matrix = distance_matrix(points, E, self.tolerances(M).shift_tol)
            run["artifacts"] = {"rho_quotient_matrix.csv": matrix_frame(matrix, [p.label for p in points])}
        logger.info("%s: %d checks, %d failed", run["name"], run["checks_run"], run["checks_failed"])
        return run

    def save_results(self, run: Dict, output_dir: Path) -> Path:
        """
        Save a run's report, offending nodes and artifacts.

        Args:
            run: Aggregated run dictionary
            output_dir: Directory to save results

        Returns:
            Path of the report file
        """
        output_dir = Path(output_dir)
        stem = run["name"].replace("/", "_")
        report = write_text(output_dir / f"{stem}.txt", self.aggregator.format_report(run))
        M = run.get("manifold")
        for result in run["results"]:
            if not result.passed and M is not None:
                safe = "".join(c if c.isalnum() or c in "_-" else "_" for c in result.check)
                write_offending_nodes(output_dir / f"{stem}_{safe}_nodes.csv", M, result.offending_nodes)
        for filename, frame in run.get("artifacts", {}).items():
            write_frame(output_dir / f"{stem}_{filename}", frame)
        return report


def _run(which: str, name: str, **kwargs) -> Dict:
    lab_kwargs = {k: kwargs.pop(k) for k in ("backend", "tolerance_overrides", "seed") if k in kwargs}
    return HoroLab(**lab_kwargs).run(which, name, **kwargs)


def verify_theorem1(name: str, **kwargs) -> Dict:
    return _run("theorem1", name, **kwargs)


def verify_theorem3(name: str = "capped_half_cylinder", **kwargs) -> Dict:
    return _run("theorem3", name, **kwargs)


def verify_theorem4(name: str = "pants", **kwargs) -> Dict:
    return _run("theorem4", name, **kwargs)
