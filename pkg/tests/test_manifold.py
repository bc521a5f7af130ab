import math

import numpy as np
import pytest

from src.errors import ManifoldError
from src.manifold import (
    ChartSpec,
    MetricTensor,
    Seam,
    boundary_margin,
    build_chart_manifold,
    cone_distance,
    cone_points,
    describe,
    glue,
    load_spec_file,
    node_angles,
    seam_nodes,
)
from src.scenarios import cap_pole, scenario


def edge_length(M, p, q):
    return float(M.graph[p, q])


def test_unit_square_edges():
    M = build_chart_manifold(ChartSpec(u_range=(0, 1), v_range=(0, 1), resolution=(2, 2)))
    assert M.n_nodes == 4
    assert M.n_edges == 6
    assert edge_length(M, 0, 1) == pytest.approx(1.0, abs=1e-15)
    assert edge_length(M, 0, 2) == pytest.approx(1.0, abs=1e-15)
    assert edge_length(M, 0, 3) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_edge_symmetry(flat, tube):
    for M in (flat, tube):
        G = M.graph
        assert abs(G - G.T).max() == 0.0


def test_periodic_seam_neighbours(tube):
    for j in (0, 15, 30):
        a, b = tube.node_at("tube", 0, j), tube.node_at("tube", 7, j)
        assert edge_length(tube, a, b) == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_revolution_circumferential_edges(j, loop_length):
    nu = 16
    M = build_chart_manifold(ChartSpec(
        u_range=(0.0, 2 * math.pi), v_range=(0.0, 1.0), resolution=(nu, 3),
        metric=MetricTensor.revolution(lambda v: 1.0 + 0.5 * v), identification="periodic-u",
    ))
    r = 1.0 + 0.5 * (0.5 * j)
    p, q = M.node_at("chart", 0, j), M.node_at("chart", 1, j)
    assert edge_length(M, p, q) == pytest.approx(2 * math.pi / nu * r, abs=1e-12)
    ring = M.chart("chart").nodes[j]
    assert loop_length(M, ring) == pytest.approx(2 * math.pi * r, abs=1e-12)


def test_non_spd_metric_names_node():
    spec = ChartSpec(u_range=(0, 1), v_range=(0, 1), resolution=(3, 3),
                     metric=MetricTensor.constant(1.0, 2.0, 1.0))
    with pytest.raises(ManifoldError, match="not positive definite at node 0"):
        build_chart_manifold(spec)


@pytest.mark.parametrize("kwargs", [
    {"resolution": (1, 4)},
    {"u_range": (1.0, 1.0)},
    {"cut_sides": ("w0",)},
    {"identification": "periodic-u", "cut_sides": ("u0",)},
])
def test_invalid_chart_spec(kwargs):
    params = {"u_range": (0, 1), "v_range": (0, 1), "resolution": (3, 3), **kwargs}
    with pytest.raises(ValueError):
        ChartSpec(**params)


def _square(name):
    return build_chart_manifold(ChartSpec(name=name, u_range=(0, 2), v_range=(0, 2), resolution=(3, 3)))


def test_glue_two_squares_counts():
    a, b = _square("a"), _square("b")
    assert a.n_nodes == 9 and a.n_edges == 28
    seam = Seam(0, tuple(a.side_nodes("a", "u1")), 1, tuple(b.side_nodes("b", "u0")))
    M = glue([a, b], [seam])
    # Three seam nodes and the two vertical edges between them coincide.
    assert M.n_nodes == 15
    assert M.n_edges == 54
    left, right = M.node_at("a", 0, 1), M.node_at("b", 2, 1)
    assert M.distances_from(left)[right] == pytest.approx(4.0, abs=1e-12)


def test_glue_rejects_mismatched_seam():
    a, b = _square("a"), _square("b")
    seam = Seam(0, tuple(a.side_nodes("a", "u1")), 1, tuple(b.side_nodes("b", "u0")[:2]))
    with pytest.raises(ManifoldError, match="mismatch"):
        glue([a, b], [seam])


def test_glue_rejects_duplicate_chart_names():
    a, b = _square("a"), _square("a")
    seam = Seam(0, tuple(a.side_nodes("a", "u1")), 1, tuple(b.side_nodes("a", "u0")))
    with pytest.raises(ManifoldError, match="Duplicate"):
        glue([a, b], [seam])


def test_boundary_margin(flat, flat_center):
    margin = boundary_margin(flat)
    assert np.all(margin[flat.boundary] == 0.0)
    assert margin[flat_center] == pytest.approx(2.0, abs=1e-12)
    assert flat.window_radius == pytest.approx(2.0, abs=1e-12)


def test_uncut_chart_has_infinite_margin():
    M = build_chart_manifold(ChartSpec(u_range=(0, 1.6), v_range=(0, 1), resolution=(8, 6),
                                       identification="periodic-u"))
    assert np.all(np.isinf(boundary_margin(M)))


def test_axis_lengths_exact_under_refinement():
    lengths = []
    for res in (3, 5, 9):
        M = build_chart_manifold(ChartSpec(u_range=(0, 1), v_range=(0, 1), resolution=(res, res),
                                           metric=MetricTensor.constant(2.0, 0.0, 3.0)))
        a, b = M.nearest_node("chart", 0, 0), M.nearest_node("chart", 1, 0)
        lengths.append(M.distances_from(a)[b])
    np.testing.assert_allclose(lengths, math.sqrt(2.0), atol=1e-9)


TUBE_SPEC = """
# flat tube cut at both ends
[chart]
name = tube
u = 0, 1.6
v = -4, 4
resolution = 16, 81
cut = v0, v1

[identify]
chart = tube
periodic = u
"""


def test_load_spec_file(tmp_path, loop_length):
    path = tmp_path / "tube.txt"
    path.write_text(TUBE_SPEC)
    M = load_spec_file(path)
    assert M.n_nodes == 16 * 81
    assert int(M.boundary.sum()) == 32
    assert M.window_radius == pytest.approx(4.0, abs=1e-9)
    assert loop_length(M, M.chart("tube").nodes[40]) == pytest.approx(1.6, abs=1e-12)
    text = describe(M, M.node_at("tube", 0, 40), [1.0, 1.5, 2.0])
    assert "nodes = 1296" in text
    assert "end_count = 2" in text


def test_load_spec_file_with_seam(tmp_path):
    path = tmp_path / "strip.txt"
    path.write_text(
        "[chart]\nname = a\nu = 0, 2\nv = 0, 2\nresolution = 3, 3\n\n"
        "[chart]\nname = b\nu = 0, 2\nv = 0, 2\nresolution = 3, 3\n\n"
        "[metric]\nchart = b\ng11 = 4\n\n"
        "[seam]\na = a\na_side = u1\nb = b\nb_side = u0\n"
    )
    M = load_spec_file(path)
    assert M.n_nodes == 15
    left, right = M.node_at("a", 0, 1), M.node_at("b", 2, 1)
    assert M.distances_from(left)[right] == pytest.approx(2.0 + 4.0, abs=1e-12)


@pytest.mark.parametrize("text, match", [
    ("[chart]\nname = a\nu = 0, 1\nv = 0, 1\n", "Invalid \\[chart\\]"),
    ("[surface]\nname = a\n", "Unknown spec section"),
    ("name = a\n", "expected 'key = value'"),
    ("[metric]\nchart = nowhere\n", "unknown chart"),
    ("", "no chart"),
])
def test_load_spec_file_errors(tmp_path, text, match):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ManifoldError, match=match):
        load_spec_file(path)


def test_flat_node_angles(flat, tube):
    angles = node_angles(flat)
    np.testing.assert_allclose(angles[~flat.boundary], 2.0 * math.pi, atol=1e-9)
    np.testing.assert_allclose(node_angles(tube)[~tube.boundary], 2.0 * math.pi, atol=1e-9)
    assert cone_points(flat).size == 0
    assert cone_points(tube).size == 0
    assert np.all(np.isinf(cone_distance(tube)))


def test_pants_cone_points():
    M, inst = scenario("pants", window=3.0)
    cones = cone_points(M)
    assert cones.size == 6
    np.testing.assert_allclose(node_angles(M)[cones], 3.0 * math.pi, atol=1e-9)
    assert np.all(inst.region("core")[cones])
    assert np.all(cone_distance(M)[cones] == 0.0)


def test_seam_nodes(flat, tube):
    assert not seam_nodes(flat).any()
    assert not seam_nodes(tube).any()
    M, _ = scenario("capped_half_cylinder", window=3.0)
    # The collapsed pole and the equator shared by cap and tube.
    assert seam_nodes(M).sum() == 1 + 16
    assert seam_nodes(M)[cap_pole(M)]
