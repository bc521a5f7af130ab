"""
Distance fields and eikonal diagnostics on discrete manifolds.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

from src.backends import get_backend
from src.errors import SourceError
from src.manifold import DiscreteManifold
from src.utils.reporting import write_frame


logger = logging.getLogger(__name__)

SOURCES = ("distance-to-set", "busemann", "horofunction", "dl", "min-combination",
           "reconstruction", "external")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values on the nodes of a manifold with a declared reliable region."""
    values: np.ndarray
    source: str
    reliable: np.ndarray
    base_node: Optional[int] = None
    reliable_radius: float = np.inf
    backend: str = "graph"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"Unknown field source: {self.source}")
        if self.values.shape != self.reliable.shape:
            raise ValueError("values and reliable must have the same shape")

    def __getitem__(self, node: int) -> float:
        return float(self.values[node])

    def normalized(self, x0: int) -> "ScalarField":
        """The same field shifted to vanish exactly at x0."""
        return replace(self, values=self.values - self.values[x0], base_node=int(x0))

    def shifted(self, c: float) -> "ScalarField":
        return replace(self, values=self.values + c, base_node=None if c else self.base_node)

    def restricted(self, mask: np.ndarray) -> "ScalarField":
        return replace(self, reliable=self.reliable & mask)


@dataclass(frozen=True, eq=False)
class DistanceField(ScalarField):
    """Distance to a node set; exactly 0 on the set."""
    source_set: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def as_field(M: DiscreteManifold, values: np.ndarray, source: str = "external",
             reliable: Optional[np.ndarray] = None, base_node: Optional[int] = None,
             **kwargs) -> ScalarField:
    """Wrap per-node values as a ScalarField (reliable everywhere by default)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (M.n_nodes,):
        raise ValueError(f"Expected {M.n_nodes} values, got shape {values.shape}")
    if reliable is None:
        reliable = np.ones(M.n_nodes, dtype=bool)
    return ScalarField(values=values, source=source, reliable=np.asarray(reliable, dtype=bool),
                       base_node=base_node, **kwargs)


def _check_sources(M: DiscreteManifold, K: Iterable[int]) -> np.ndarray:
    K = np.unique(np.asarray(list(K) if not isinstance(K, np.ndarray) else K, dtype=np.int64))
    if K.size == 0:
        raise SourceError("Source set is empty")
    if K.min() < 0 or K.max() >= M.n_nodes:
        raise SourceError(f"Source nodes outside the window (0..{M.n_nodes - 1})")
    return K


def distance_to_set(M: DiscreteManifold, K: Iterable[int], backend: str = "graph") -> DistanceField:
    """
    Distance from every node to a node set.

    Args:
        M: Manifold
        K: Nonempty source node ids
        backend: "graph" (exact shortest paths) or "fast_march" (first-order
            continuum solver)

    Returns:
        DistanceField, 0 exactly on K, with its reliable region

    Raises:
        SourceError: If K is empty or references unknown nodes
        BackendError: If the backend cannot run on M
    """
    K = _check_sources(M, K)
    solver = get_backend(backend)
    result = solver.solve_with_metadata(M, K)
    values = result["values"]
    values[K] = 0.0
    logger.debug("distance_to_set: %d sources, %d/%d reliable (%s)",
                 K.size, int(result["reliable"].sum()), M.n_nodes, backend)
    return DistanceField(values=values, source="distance-to-set", reliable=result["reliable"],
                         backend=backend, metadata=result["metadata"], source_set=K)


def fast_march(M: DiscreteManifold, K: Iterable[int]) -> DistanceField:
    """First-order upwind solution of |∇u|_g = 1 with u = 0 on K."""
    return distance_to_set(M, K, backend="fast_march")


def pairwise_distance(M: DiscreteManifold, x: int, y: int) -> float:
    """Exact graph distance between two nodes."""
    if x == y:
        return 0.0
    return float(M.distances_from(int(x))[int(y)])


def _rows(M: DiscreteManifold) -> np.ndarray:
    if "rows" not in M._cache:
        M._cache["rows"] = np.repeat(np.arange(M.n_nodes), np.diff(M.indptr))
    return M._cache["rows"]


def edge_quotients(M: DiscreteManifold, f: Union[ScalarField, np.ndarray]) -> np.ndarray:
    """(f(p) - f(q)) / length(p, q) for every adjacency entry p -> q."""
    values = f.values if isinstance(f, ScalarField) else np.asarray(f)
    return (values[_rows(M)] - values[M.indices]) / M.weights


def _row_max(M: DiscreteManifold, entries: np.ndarray) -> np.ndarray:
    out = np.zeros(M.n_nodes)
    np.maximum.at(out, _rows(M), entries)
    return out


def upwind_gradient_norm(M: DiscreteManifold, f: Union[ScalarField, np.ndarray]) -> np.ndarray:
    """
    Steepest local decrease rate of a field.

    Args:
        M: Manifold
        f: Field or per-node values

    Returns:
        Per node, the largest (f(p) - f(q)) / length(p, q) over neighbours q,
        clipped below at 0
    """
    return _row_max(M, edge_quotients(M, f))


def ascent_quotient(M: DiscreteManifold, f: Union[ScalarField, np.ndarray]) -> np.ndarray:
    """Steepest local increase rate, the mirror of upwind_gradient_norm."""
    return _row_max(M, -edge_quotients(M, f))


def interior_mask(M: DiscreteManifold, reliable: np.ndarray) -> np.ndarray:
    """Reliable nodes whose neighbours are all reliable."""
    bad = np.zeros(M.n_nodes, dtype=bool)
    np.logical_or.at(bad, _rows(M), ~reliable[M.indices])
    return reliable & ~bad


def lipschitz_excess(M: DiscreteManifold, f: ScalarField) -> float:
    """Largest |f(p) - f(q)| - length(p, q) over edges inside the reliable region."""
    both = f.reliable[M.edge_u] & f.reliable[M.edge_v]
    if not both.any():
        return 0.0
    diff = np.abs(f.values[M.edge_u] - f.values[M.edge_v]) - M.edge_len
    return float(diff[both].max())


def field_frame(M: DiscreteManifold, f: ScalarField) -> pd.DataFrame:
    return pd.DataFrame({
        "node_id": np.arange(M.n_nodes),
        "u": M.coords[:, 0],
        "v": M.coords[:, 1],
        "value": f.values,
        "reliable": f.reliable.astype(int),
    })


def export_field_csv(M: DiscreteManifold, f: ScalarField, path: Union[str, Path]) -> Path:
    """Write node_id,u,v,value,reliable rows ordered by node id."""
    return write_frame(Path(path), field_frame(M, f))
