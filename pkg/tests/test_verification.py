import numpy as np
import pandas as pd
import pytest

from src.boundary_functions import LimitReport
from src.checks import SingularEvaluator
from src.config import Tolerances
from src.eikonal import as_field
from src.ends import end_partition
from src.errors import ScenarioError
from src.ideal_boundary import CompactExhaustion
from src.utils.reporting import CheckResult
from src.verification import CONTROL_FAILURES, CORAY_STARTS, HoroLab, _monotonicity, verify_theorem4


@pytest.fixture(scope="module")
def lab():
    return HoroLab(backend="graph")


def test_unknown_verification(lab):
    with pytest.raises(ScenarioError, match="Unknown verification"):
        lab.run("theorem2", "plane")


def test_unsupported_verification():
    with pytest.raises(ScenarioError, match="not supported"):
        verify_theorem4("plane", window=2.0)


@pytest.mark.parametrize("name", ["plane", "cylinder"])
def test_controls_fail_their_checks(lab, name):
    M, inst = lab.build(name, window=2.0)
    controls = lab.controls(M, inst)
    assert controls
    for label, f in controls:
        assert label in CONTROL_FAILURES
        result = lab._negative_control(M, inst, label, f, lab.tolerances(M))
        assert result.passed, result.to_text()


def test_save_results(tmp_path, lab, flat):
    results = [
        CheckResult(check="end_count", passed=True, metric=2.0, tolerance=2.0),
        CheckResult(check="eikonal_residual[control]", passed=False, metric=0.4, tolerance=0.08,
                    offending_nodes=[5, 3, 5]),
    ]
    run = lab.aggregator.aggregate("ends/plane", results)
    run["manifold"] = flat
    run["artifacts"] = {"rho_quotient_matrix.csv": pd.DataFrame({"label": ["a"], "a": [0.0]})}
    report = lab.save_results(run, tmp_path)

    assert report == tmp_path / "ends_plane.txt"
    text = report.read_text()
    assert "status = fail" in text
    assert "checks_failed = 1" in text
    nodes = pd.read_csv(tmp_path / "ends_plane_eikonal_residual_control__nodes.csv")
    assert nodes["node_id"].tolist() == [3, 5]
    assert (tmp_path / "ends_plane_rho_quotient_matrix.csv").exists()


@pytest.mark.slow
def test_ends_on_cylinder(lab):
    run = lab.run("ends", "cylinder")
    assert run["passed"], run["failed_checks"]
    checks = [r.check for r in run["results"]]
    assert checks == ["end_count", "ray_ends", "coray_cofinality[down]", "coray_cofinality[up]",
                      "ends_inequality"]
    assert run["results"][0].metric == 2.0


@pytest.mark.slow
def test_metric_run_writes_matrix(tmp_path, lab):
    run = lab.run("metric", "cylinder")
    by_name = {r.check: r for r in run["results"]}
    for check in ("rho_symmetry", "rho_quotient_below_rho", "bounded_by_distance"):
        assert by_name[check].passed, by_name[check].to_text()
    matrix = run["artifacts"]["rho_quotient_matrix.csv"]
    assert list(matrix.columns)[0] == "label"
    assert len(matrix) == len(matrix.columns) - 1

    lab.save_results(run, tmp_path)
    saved = pd.read_csv(tmp_path / "metric_cylinder_rho_quotient_matrix.csv")
    assert saved.shape == matrix.shape


@pytest.mark.slow
def test_lines_on_cylinder(lab):
    run = lab.run("lines", "cylinder")
    assert run["passed"], run["failed_checks"]
    checks = [r.check for r in run["results"]]
    assert "monotonicity[busemann_up]" in checks
    assert "monotonicity[busemann_down]" in checks


def test_monotonicity_check(flat):
    tol = Tolerances.for_manifold(flat)
    report = LimitReport(construction="busemann", iterates_used=3, sup_change_last=0.0,
                         reliable_radius=1.0, converged=True, limit_tol=tol.limit_tol,
                         backend="graph", schedule=[0.5, 1.0, 2.0], reliable_nodes=10,
                         monotonicity_excess=0.0)
    result = _monotonicity("busemann_east", report, tol)
    assert result.passed
    assert result.check == "monotonicity[busemann_east]"
    assert result.tolerance == pytest.approx(tol.ray_tol(2.0))

    report.monotonicity_excess = 2.0 * tol.ray_tol(2.0)
    assert not _monotonicity("busemann_east", report, tol).passed


def test_battery_cache_tracks_the_manifold():
    lab = HoroLab(backend="graph")
    M1, inst1 = lab.build("cylinder", window=4.0)
    first = lab.battery(M1, inst1)
    assert lab.battery(M1, inst1) is first

    M2, inst2 = lab.build("cylinder", window=3.0)
    second = lab.battery(M2, inst2)
    assert second is not first
    assert all(f.values.shape == (M2.n_nodes,) for _, f, _ in second)


def test_coray_starts_cover_every_end(lab):
    M, inst = lab.build("pants", window=4.0)
    E = end_partition(M, inst.x0, inst.spec.end_radii)
    starts = lab._coray_starts(M, inst, E, lab._rng())
    assert len(starts) >= CORAY_STARTS
    assert starts == lab._coray_starts(M, inst, E, lab._rng())
    dist = M.distances_from(inst.x0)
    assert np.any(dist[starts] <= E.radii[0])
    for c in range(E.counts[0]):
        assert np.any(E.labels[0][starts] == c)


def test_ridge_moves_across_the_ball(lab, flat, flat_center, coords):
    inside = ~flat.boundary
    u = as_field(flat, -coords[:, 0], reliable=inside, base_node=flat_center)
    v = as_field(flat, -coords[:, 1], reliable=inside, base_node=flat_center)
    E = CompactExhaustion.inside(flat, flat_center, 1.6)
    result = lab._ridge_sweep(flat, u, v, E, Tolerances.for_manifold(flat))
    assert result.passed, result.to_text()
    shifts, ridge_u = result.details["shifts"], result.details["ridge_u"]
    assert len(shifts) >= 2
    # The ridge x - y = t is centred on the ball, where u = -t / 2.
    np.testing.assert_allclose(ridge_u, -np.array(shifts) / 2.0, atol=1e-9)


def test_fixed_ridge_fails_the_sweep(lab, flat, flat_center, coords):
    u = as_field(flat, -coords[:, 0], reliable=~flat.boundary, base_node=flat_center)
    E = CompactExhaustion.inside(flat, flat_center, 1.6)
    result = lab._ridge_sweep(flat, u, u, E, Tolerances.for_manifold(flat))
    assert not result.passed
    assert result.details["shifts"] == [0.0]


@pytest.fixture(scope="module")
def marching_lab():
    return HoroLab()


@pytest.mark.slow
@pytest.mark.parametrize("name", ["plane", "cylinder", "capped_half_cylinder", "pants"])
def test_theorem1_on_every_scenario(marching_lab, name):
    run = marching_lab.run("theorem1", name)
    assert run["passed"], run["failed_checks"]
    checks = [r.check for r in run["results"]]
    assert any(c.startswith("monotonicity[busemann_") for c in checks)
    assert any(c.startswith("negative_control[") for c in checks)


@pytest.fixture(scope="module")
def plane_fields(marching_lab):
    M, inst = marching_lab.build("plane")
    return M, inst, {name: f for name, f, _ in marching_lab.battery(M, inst)}


@pytest.mark.slow
@pytest.mark.parametrize("label, degrees", [("busemann_dir0", 0.0), ("busemann_dir45", 45.0),
                                            ("busemann_dir90", 90.0)])
def test_plane_busemann_is_linear(plane_fields, label, degrees):
    M, inst, fields = plane_fields
    f = fields[label]
    theta = np.deg2rad(degrees)
    x = M.coords - M.coords[inst.x0]
    exact = -(x[:, 0] * np.cos(theta) + x[:, 1] * np.sin(theta))
    error = float(np.max(np.abs(f.values - exact)[f.reliable]))
    assert error <= 0.01 * M.window_radius


@pytest.mark.slow
def test_plane_linear_field_has_no_singular_set(marching_lab, plane_fields):
    M, _, fields = plane_fields
    result = SingularEvaluator(marching_lab.tolerances(M)).evaluate(M, fields["busemann_dir0"],
                                                                    expect_nonempty=False)
    assert result.passed, result.to_text()


@pytest.mark.slow
def test_theorem3_on_capped(marching_lab):
    run = marching_lab.run("theorem3", "capped_half_cylinder")
    assert run["passed"], run["failed_checks"]
    by_name = {r.check: r for r in run["results"]}
    assert by_name["single_cluster"].metric == 1.0
    assert by_name["singular_set[dl_up]"].metric > 0
    assert any(c.startswith("argmax_in_cap[") for c in by_name)
    assert by_name["no_line_through_cap"].passed


@pytest.mark.slow
def test_theorem4_on_pants(marching_lab):
    run = marching_lab.run("theorem4", "pants")
    assert run["passed"], run["failed_checks"]
    checks = [r.check for r in run["results"]]
    assert checks[:3] == ["coray_cofinality[left]", "coray_cofinality[right]", "coray_cofinality[top]"]
    assert "family_singular_in_core" in checks


@pytest.mark.slow
@pytest.mark.parametrize("name", ["cylinder", "plane"])
def test_path(marching_lab, name):
    run = marching_lab.run("path", name)
    assert run["passed"], run["failed_checks"]
    by_name = {r.check: r for r in run["results"]}
    for check in ("path_monotone_to_v", "path_lipschitz", "path_solutions", "ridge_moves_with_t"):
        assert check in by_name
    shifts = by_name["ridge_moves_with_t"].details["shifts"]
    assert shifts == sorted(shifts)


@pytest.mark.slow
def test_reports_are_reproducible():
    texts = []
    for _ in range(2):
        lab = HoroLab(backend="graph", seed=3)
        texts.append(lab.aggregator.format_report(lab.run("ends", "pants")))
    assert texts[0] == texts[1]
