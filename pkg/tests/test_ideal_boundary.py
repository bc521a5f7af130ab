import numpy as np
import pandas as pd
import pytest

from src.eikonal import as_field
from src.errors import ExhaustionError
from src.ideal_boundary import (
    BoundaryPoint,
    CompactExhaustion,
    cluster_boundary,
    connect_path,
    distance_matrix,
    export_distance_matrix,
    path_endpoints,
    rho,
    rho_quotient,
)


@pytest.fixture
def linear(flat, flat_center, coords):
    """Normalized linear solutions -<e, x> for a few unit directions e."""
    x, y = coords[:, 0], coords[:, 1]

    def make(values):
        return as_field(flat, values, base_node=flat_center)

    return {
        "east": make(-x),
        "east_tilted": make(-x + 0.001 * y),
        "north": make(-y),
        "diagonal": make(-(x + y) / np.sqrt(2.0)),
    }


@pytest.fixture
def exhaustion(flat, flat_center):
    return CompactExhaustion.build(flat, flat_center, [0.5, 1.0, 1.5])


def test_exhaustion_geometry(flat, flat_center, exhaustion):
    assert exhaustion.depth == 3
    assert exhaustion.tail_bound == 0.125
    np.testing.assert_allclose(exhaustion.weights, [0.5, 0.25, 0.125])
    for smaller, larger in zip(exhaustion.sets[:-1], exhaustion.sets[1:]):
        assert np.all(smaller <= larger)
    assert exhaustion.sets[0][flat_center]


@pytest.mark.parametrize("radii", [[], [0.0, 1.0], [1.0, 1.0], [1.0, 0.5]])
def test_exhaustion_rejects_bad_radii(flat, flat_center, radii):
    with pytest.raises(ValueError):
        CompactExhaustion.build(flat, flat_center, radii)


def test_common_exhaustion(flat, flat_center):
    d = np.array(flat.distances_from(flat_center))
    f = as_field(flat, -d, reliable=d <= 1.2, base_node=flat_center, reliable_radius=1.2)
    E = CompactExhaustion.common(flat, flat_center, [f])
    assert E.radii[-1] <= 1.2
    assert np.all(E.largest <= f.reliable)
    outside = as_field(flat, -d, reliable=d > 0.5)
    with pytest.raises(ExhaustionError):
        CompactExhaustion.common(flat, flat_center, [outside])


def test_rho_basic_laws(linear, exhaustion):
    u, v, w = linear["east"], linear["north"], linear["diagonal"]
    assert rho(u, u, exhaustion) == 0.0
    assert rho(u, v, exhaustion) == rho(v, u, exhaustion)
    assert rho(u, w, exhaustion) <= rho(u, v, exhaustion) + rho(v, w, exhaustion) + 1e-12
    assert rho(u, v, exhaustion) <= 1.0 - exhaustion.tail_bound + 1e-12


def test_rho_of_constant_shift(linear, exhaustion):
    u = linear["east"]
    shifted = u.shifted(7.0)
    assert rho(u, shifted, exhaustion) == pytest.approx(0.875, abs=1e-12)
    assert rho_quotient(u, shifted, exhaustion) <= 1e-12
    assert rho_quotient(shifted, u, exhaustion) <= 1e-12


def test_rho_quotient_properties(linear, exhaustion):
    u, v, w = linear["east"], linear["north"], linear["diagonal"]
    uv = rho_quotient(u, v, exhaustion)
    assert uv == rho_quotient(v, u, exhaustion)
    assert uv <= rho(u, v, exhaustion) + 1e-12
    assert rho_quotient(u, w, exhaustion) <= uv + rho_quotient(v, w, exhaustion) + 1e-9
    for c in (-0.73, 0.2, 3.0):
        assert rho_quotient(u.shifted(c), v, exhaustion) == pytest.approx(uv, abs=1e-4)


def test_rho_rejects_unreliable_balls(flat, flat_center, linear, exhaustion):
    d = np.array(flat.distances_from(flat_center))
    small = as_field(flat, linear["north"].values, reliable=d <= 0.6, base_node=flat_center)
    with pytest.raises(ExhaustionError):
        rho(linear["east"], small, exhaustion)


def test_boundary_point(flat, linear):
    point = BoundaryPoint(rep=linear["east"], provenance="busemann", label="east")
    assert point.bounded_by_distance(flat)
    with pytest.raises(ValueError):
        BoundaryPoint(rep=linear["east"].shifted(1.0), provenance="busemann")


def test_connect_path_endpoints(linear, exhaustion):
    u, v = linear["east"], linear["north"]
    t_lo, t_hi = path_endpoints(u, v, exhaustion)
    assert t_lo < 0.0 < t_hi
    first, last = connect_path(u, v, [t_lo - 1.0, t_hi + 1.0])
    ball = exhaustion.largest
    np.testing.assert_allclose(first.values[ball], u.values[ball] + t_lo - 1.0)
    np.testing.assert_array_equal(last.values[ball], v.values[ball])
    assert first.source == "min-combination"


def test_clustering(linear, exhaustion):
    names = ["east", "east_tilted", "north"]
    points = [BoundaryPoint(rep=linear[n], provenance="external", label=n) for n in names]
    matrix = distance_matrix(points, exhaustion)
    np.testing.assert_array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0.0)
    assert matrix[0, 1] < 0.01 < matrix[0, 2]
    assert cluster_boundary(points, exhaustion, 0.2, matrix) == [[0, 1], [2]]
    assert cluster_boundary(points, exhaustion, 2.0) == [[0, 1, 2]]
    assert cluster_boundary(points[:1], exhaustion, 0.2) == [[0]]
    assert cluster_boundary([], exhaustion, 0.2) == []


def test_export_distance_matrix(tmp_path):
    matrix = np.array([[0.0, 0.25], [0.25, 0.0]])
    path = export_distance_matrix(matrix, ["a", "b"], tmp_path / "rho.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["label", "a", "b"]
    assert frame["b"].tolist() == [0.25, 0.0]
