import json

import numpy as np
import pytest

from src.errors import ScenarioError
from src.scenarios import (
    SCENARIO_NAMES,
    Scenario,
    ScenarioLoader,
    cap_pole,
    direction_targets,
    scenario,
)


def test_loader_reads_every_scenario():
    specs = ScenarioLoader().load_all_scenarios()
    assert [s.name for s in specs] == list(SCENARIO_NAMES)
    for spec in specs:
        assert spec.builder == spec.name
        assert spec.known_ends >= 1
        assert len(spec.end_radii) >= 3


def test_unknown_scenario():
    with pytest.raises(ScenarioError, match="Unknown scenario"):
        ScenarioLoader().load_scenario("torus")


def test_invalid_scenario_file(tmp_path):
    (tmp_path / "scenarios").mkdir()
    (tmp_path / "scenarios" / "plane.json").write_text(json.dumps({"name": "plane"}))
    with pytest.raises(ScenarioError, match="Invalid scenario file"):
        ScenarioLoader(tmp_path).load_scenario("plane")


def test_unknown_verification_is_rejected():
    spec = ScenarioLoader().load_scenario("plane").model_dump()
    spec["supports"] = ["theorem1", "theorem9"]
    with pytest.raises(ValueError, match="theorem9"):
        Scenario(**spec)


def test_supports_verification():
    assert ScenarioLoader().load_scenario("pants").supports_verification("theorem4")
    assert not ScenarioLoader().load_scenario("plane").supports_verification("theorem4")
    assert ScenarioLoader().load_scenario("cylinder").supports_verification("lines")


def test_cylinder_geometry(loop_length):
    M, inst = scenario("cylinder", window=2.0)
    assert inst.spec.spacing == pytest.approx(0.1)
    assert M.chart("tube").nodes.shape == (41, 16)
    assert loop_length(M, M.chart("tube").nodes[20]) == pytest.approx(1.6, abs=1e-12)
    assert M.coords[inst.x0, 1] == pytest.approx(0.0, abs=1e-12)
    assert inst.end_names == ["down", "up"]
    assert inst.rays_into("up") == ["up"]
    assert not M.boundary[inst.x0]


def test_plane_geometry():
    M, inst = scenario("plane", window=2.0)
    assert inst.spec.spacing == pytest.approx(0.2)
    assert M.n_nodes == 21 * 21
    np.testing.assert_allclose(M.coords[inst.x0], [0.0, 0.0], atol=1e-12)
    assert inst.end_names == ["infinity"]
    assert set(inst.ray_targets) == {"dir0", "dir90", "dir180", "dir270", "dir45"}
    assert len(inst.set_sequences["right"]) == 4


def test_named_ray():
    M, inst = scenario("cylinder", window=4.0)
    ray = inst.ray(M, "up")
    assert ray.start == inst.x0
    assert ray.certified_span == pytest.approx(3.6, abs=1e-9)
    np.testing.assert_allclose(M.coords[ray.nodes, 0], 0.0, atol=1e-12)
    with pytest.raises(ScenarioError, match="no ray"):
        inst.ray(M, "sideways")


def test_capped_regions():
    M, inst = scenario("capped_half_cylinder", window=3.0)
    cap, tube = inst.region("cap"), inst.region("tube")
    # Pole plus four rings; the last ring is the equator shared with the tube.
    assert cap.sum() == 1 + 16 * 4
    assert np.sum(cap & tube) == 16
    assert inst.end_names == ["up"]
    assert len(inst.ray_targets) == 4
    with pytest.raises(ScenarioError, match="no region"):
        inst.region("core")


def test_capped_hemisphere_geometry(loop_length):
    M, inst = scenario("capped_half_cylinder", window=3.0)
    cap = M.chart("cap").nodes
    pole = cap_pole(M)
    assert set(cap[0].tolist()) == {pole}
    equator = cap[-1]
    np.testing.assert_array_equal(equator, M.chart("tube").nodes[0])
    assert loop_length(M, equator) == pytest.approx(1.6, abs=1e-9)
    # Every meridian is a quarter of the equator.
    np.testing.assert_allclose(M.distances_from(pole)[equator], 0.4, atol=1e-9)
    assert inst.region("cap")[pole]


def test_pants_regions():
    M, inst = scenario("pants", window=3.0)
    assert inst.end_names == ["left", "right", "top"]
    core = inst.region("core")
    legs = [inst.region(leg) for leg in ("left", "right", "top")]
    assert core.sum() == 2 * 11 * 11 - 19
    for leg in legs:
        assert not np.any(leg & core)
    assert np.logical_or.reduce([core] + legs).all()


@pytest.mark.parametrize("name, resolution", [("capped_half_cylinder", 18), ("pants", 17)])
def test_resolution_must_fit_the_builder(name, resolution):
    with pytest.raises(ScenarioError):
        scenario(name, window=2.0, resolution=resolution)


@pytest.mark.parametrize("window, resolution", [(-1.0, None), (0.0, None), (None, 2)])
def test_invalid_overrides(window, resolution):
    with pytest.raises(ScenarioError, match="Invalid override"):
        scenario("plane", window=window, resolution=resolution)


def test_direction_targets(flat, flat_center):
    targets = direction_targets(flat, flat_center, 90.0, 1.6)
    np.testing.assert_allclose(flat.coords[targets, 0], 0.0, atol=1e-12)
    np.testing.assert_allclose(flat.coords[targets, 1], [0.4, 0.8, 1.2, 1.4, 1.6], atol=1e-12)
    diagonal = direction_targets(flat, flat_center, 45.0)
    assert flat_center not in diagonal
    assert len(diagonal) == len(set(diagonal))
