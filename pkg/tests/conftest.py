"""
Shared fixtures: small flat and cylindrical charts with h = 0.2.
"""

import pytest

from src.manifold import ChartSpec, build_chart_manifold


@pytest.fixture(scope="session")
def flat():
    """Flat square [-2, 2]^2 with every side cut; the centre node is (10, 10)."""
    return build_chart_manifold(ChartSpec(
        name="plane", u_range=(-2.0, 2.0), v_range=(-2.0, 2.0), resolution=(21, 21),
        cut_sides=("u0", "u1", "v0", "v1"),
    ))


@pytest.fixture(scope="session")
def flat_center(flat):
    return flat.node_at("plane", 10, 10)


@pytest.fixture(scope="session")
def tube():
    """Flat cylinder of circumference 1.6 (8 nodes around), v in [-3, 3], cut at both ends."""
    return build_chart_manifold(ChartSpec(
        name="tube", u_range=(0.0, 1.6), v_range=(-3.0, 3.0), resolution=(8, 31),
        identification="periodic-u", cut_sides=("v0", "v1"),
    ))


@pytest.fixture(scope="session")
def tube_center(tube):
    return tube.node_at("tube", 0, 15)


@pytest.fixture
def coords(flat, flat_center):
    """Chart coordinates relative to the centre node."""
    return flat.coords - flat.coords[flat_center]


@pytest.fixture
def loop_length():
    """Sum of graph edge lengths around a closed node loop."""
    def measure(M, nodes):
        loop = list(nodes) + [nodes[0]]
        return float(sum(M.graph[int(p), int(q)] for p, q in zip(loop[:-1], loop[1:])))
    return measure
