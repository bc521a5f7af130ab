import numpy as np
import pandas as pd
import pytest

from src.eikonal import (
    DistanceField,
    as_field,
    distance_to_set,
    export_field_csv,
    fast_march,
    interior_mask,
    lipschitz_excess,
    pairwise_distance,
    upwind_gradient_norm,
)
from src.errors import SourceError
from src.manifold import ChartSpec, build_chart_manifold


def test_point_distance_within_stencil_bound(flat, flat_center, coords):
    d = distance_to_set(flat, [flat_center])
    euclid = np.hypot(coords[:, 0], coords[:, 1])
    assert isinstance(d, DistanceField)
    assert d.values[flat_center] == 0.0
    assert np.all(d.values >= euclid - 1e-12)
    assert np.all(d.values <= euclid * (1.0 + flat.stencil_bound) + 1e-12)


def test_all_nodes_as_sources(flat):
    d = distance_to_set(flat, np.arange(flat.n_nodes))
    assert np.all(d.values == 0.0)


def test_source_monotonicity(flat, flat_center):
    K = [flat_center]
    K2 = K + [flat.node_at("plane", 3, 15), flat.node_at("plane", 18, 2)]
    assert np.all(distance_to_set(flat, K2).values <= distance_to_set(flat, K).values)


@pytest.mark.parametrize("K", [[], [-1], [10 ** 6]])
def test_invalid_sources(flat, K):
    with pytest.raises(SourceError):
        distance_to_set(flat, K)


def test_triangle_inequality_on_samples(flat):
    rng = np.random.default_rng(0)
    K = rng.choice(flat.n_nodes, size=5, replace=False)
    dK = distance_to_set(flat, K).values
    for y in rng.choice(flat.n_nodes, size=10, replace=False):
        dy = flat.distances_from(int(y))
        assert np.all(dK <= dy + dK[y] + 1e-12)


def test_pairwise_distance(flat, flat_center, tube):
    assert pairwise_distance(flat, flat_center, flat_center) == 0.0
    right = flat.node_at("plane", 11, 10)
    assert pairwise_distance(flat, flat_center, right) == pytest.approx(0.2, abs=1e-12)
    assert pairwise_distance(flat, right, flat_center) == pairwise_distance(flat, flat_center, right)
    # Antipodal nodes on a circle of length 1.6.
    a, b = tube.node_at("tube", 0, 15), tube.node_at("tube", 4, 15)
    assert pairwise_distance(tube, a, b) == pytest.approx(0.8, abs=1e-12)


def test_reliable_region_is_window_independent(flat, flat_center):
    big = build_chart_manifold(ChartSpec(
        name="plane", u_range=(-3.0, 3.0), v_range=(-3.0, 3.0), resolution=(31, 31),
        cut_sides=("u0", "u1", "v0", "v1"),
    ))
    small = distance_to_set(flat, [flat_center])
    large = distance_to_set(big, [big.node_at("plane", 15, 15)])
    assert small.reliable[flat_center] and not small.reliable.all()
    for p in np.flatnonzero(small.reliable):
        j, i = divmod(int(p), 21)
        assert large.values[big.node_at("plane", i + 5, j + 5)] == pytest.approx(small.values[p], abs=1e-12)


def test_fast_march_against_graph_and_closed_form(flat, flat_center, coords):
    fm = fast_march(flat, [flat_center])
    graph = distance_to_set(flat, [flat_center])
    euclid = np.hypot(coords[:, 0], coords[:, 1])
    assert fm.values[flat_center] == 0.0
    assert fm.backend == "fast_march"
    # Every edge offers its candidate, so the march never exceeds the graph distance.
    assert np.all(fm.values <= graph.values + 1e-12)
    assert np.max(np.abs(fm.values - euclid)) <= 2 * flat.spacing


def test_gradient_norm_of_distance(flat, flat_center):
    d = distance_to_set(flat, [flat_center])
    norm = upwind_gradient_norm(flat, d)
    off_source = np.arange(flat.n_nodes) != flat_center
    np.testing.assert_allclose(norm[off_source], 1.0, atol=1e-9)
    assert norm[flat_center] == 0.0
    assert lipschitz_excess(flat, d) <= 1e-12


def test_gradient_norm_of_simple_fields(flat, coords):
    assert np.all(upwind_gradient_norm(flat, np.full(flat.n_nodes, 3.0)) == 0.0)
    norm = upwind_gradient_norm(flat, -coords[:, 0])
    has_right = coords[:, 0] < coords[:, 0].max() - 1e-9
    np.testing.assert_allclose(norm[has_right], 1.0, atol=1e-9)


def test_interior_mask(flat):
    mask = interior_mask(flat, ~flat.boundary)
    # The cut ring is unreliable and knight moves reach two rows past it.
    assert mask.sum() == 15 * 15


def test_scalar_field_normalization(flat, flat_center, coords):
    f = as_field(flat, coords[:, 0] + 5.0)
    g = f.normalized(flat_center)
    assert g.base_node == flat_center and g[flat_center] == 0.0
    assert g.shifted(1.0).base_node is None
    with pytest.raises(ValueError):
        as_field(flat, np.zeros(3))


def test_export_field_csv(tmp_path, flat, flat_center):
    d = distance_to_set(flat, [flat_center])
    path = export_field_csv(flat, d, tmp_path / "out" / "dist.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["node_id", "u", "v", "value", "reliable"]
    assert len(frame) == flat.n_nodes
    assert frame["node_id"].tolist() == list(range(flat.n_nodes))
    assert frame["value"][flat_center] == 0.0
