"""
Discrete surfaces as metric-weighted graphs.

A manifold is assembled from rectangular charts. Every chart node is joined to
its stencil neighbours by edges whose length is the Riemannian length of the
straight chart segment under the endpoint-averaged metric. Charts may be
periodic in one coordinate and are glued to each other along node seams.
Sides of a chart that stand for an infinite direction are marked as cut; the
graph distance to the cut nodes is the boundary margin used to certify
truncated computations.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from src.config import half_stencil, stencil_bound
from src.errors import ManifoldError


logger = logging.getLogger(__name__)

SIDES = ("u0", "u1", "v0", "v1")

Component = Union[float, np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]

# Each grid cell is covered by four triangles so that every node sees all
# eight axis and diagonal neighbours as triangle vertices.
_CELL_TRIANGLES = (
    ((0, 0), (1, 0), (1, 1)),
    ((0, 0), (1, 1), (0, 1)),
    ((0, 0), (1, 0), (0, 1)),
    ((1, 0), (1, 1), (0, 1)),
)


@dataclass(frozen=True)
class MetricTensor:
    """Riemannian metric components in chart coordinates.

    Each component is a constant, an array sampled on the chart grid with
    shape (nv, nu), or a callable of the coordinate grids (U, V).
    """
    g11: Component = 1.0
    g12: Component = 0.0
    g22: Component = 1.0

    @classmethod
    def constant(cls, g11: float = 1.0, g12: float = 0.0, g22: float = 1.0) -> "MetricTensor":
        return cls(float(g11), float(g12), float(g22))

    @classmethod
    def conformal(cls, factor: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "MetricTensor":
        """Metric factor(u, v)^2 times the flat metric."""
        return cls(
            lambda U, V: factor(U, V) ** 2,
            0.0,
            lambda U, V: factor(U, V) ** 2,
        )

    @classmethod
    def revolution(cls, radius: Callable[[np.ndarray], np.ndarray]) -> "MetricTensor":
        """Surface of revolution: g11 = r(v)^2, g22 = 1."""
        return cls(lambda U, V: radius(V) ** 2, 0.0, 1.0)

    def sample(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """
        Sample the metric on coordinate grids.

        Args:
            U: u coordinates, shape (nv, nu)
            V: v coordinates, shape (nv, nu)

        Returns:
            Array of shape (nv, nu, 3) holding (g11, g12, g22)
        """
        parts = []
        for component in (self.g11, self.g12, self.g22):
            value = component(U, V) if callable(component) else component
            parts.append(np.broadcast_to(np.asarray(value, dtype=float), U.shape))
        return np.stack(parts, axis=-1)


class ChartSpec(BaseModel):
    """A rectangular chart with its grid, metric and boundary behaviour."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "chart"
    u_range: Tuple[float, float]
    v_range: Tuple[float, float]
    resolution: Tuple[int, int]  # (nu, nv)
    metric: MetricTensor = Field(default_factory=MetricTensor)
    identification: Literal["none", "periodic-u", "periodic-v"] = "none"
    cut_sides: Tuple[str, ...] = ()
    stencil: Literal["16", "extended"] = "16"

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] < 2 or value[1] < 2:
            raise ValueError(f"Chart resolution must be at least 2x2, got {value}")
        return value

    @field_validator("cut_sides")
    @classmethod
    def _check_sides(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [side for side in value if side not in SIDES]
        if unknown:
            raise ValueError(f"Unknown chart sides: {unknown}")
        return tuple(value)

    @model_validator(mode="after")
    def _check_ranges(self) -> "ChartSpec":
        if not self.u_range[1] > self.u_range[0] or not self.v_range[1] > self.v_range[0]:
            raise ValueError(f"Chart {self.name}: empty parameter rectangle")
        periodic_axis = {"periodic-u": "u", "periodic-v": "v"}.get(self.identification)
        if periodic_axis and any(side.startswith(periodic_axis) for side in self.cut_sides):
            raise ValueError(f"Chart {self.name}: cannot cut a periodic side")
        return self

    @property
    def periodic_u(self) -> bool:
        return self.identification == "periodic-u"

    @property
    def periodic_v(self) -> bool:
        return self.identification == "periodic-v"

    def steps(self) -> Tuple[float, float]:
        """Grid steps (du, dv); a periodic axis closes up after nu (or nv) steps."""
        nu, nv = self.resolution
        du = (self.u_range[1] - self.u_range[0]) / (nu if self.periodic_u else nu - 1)
        dv = (self.v_range[1] - self.v_range[0]) / (nv if self.periodic_v else nv - 1)
        return du, dv


@dataclass(frozen=True)
class ChartGrid:
    """A chart inside an assembled manifold: its spec and global node ids."""
    spec: ChartSpec
    nodes: np.ndarray  # (nv, nu) global node ids

    @property
    def name(self) -> str:
        return self.spec.name


@dataclass(frozen=True)
class Seam:
    """Identify a_nodes of manifold a with b_nodes of manifold b, in order."""
    a: int
    a_nodes: Tuple[int, ...]
    b: int
    b_nodes: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class DiscreteManifold:
    """Immutable metric graph approximating a complete surface."""
    coords: np.ndarray         # (N, 2) chart coordinates of each node
    node_metric: np.ndarray    # (N, 3)
    node_chart: np.ndarray     # (N,)
    charts: Tuple[ChartGrid, ...]
    edge_u: np.ndarray         # (E,)
    edge_v: np.ndarray         # (E,)
    edge_len: np.ndarray       # (E,)
    edge_disp: np.ndarray      # (E, 2) chart displacement from edge_u to edge_v
    edge_chart: np.ndarray     # (E,)
    edge_metric: np.ndarray    # (E, 3)
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    adj_edge: np.ndarray       # edge id of each adjacency entry
    adj_sign: np.ndarray       # +1 when the entry runs from edge_u to edge_v
    wedges: Dict[str, np.ndarray]
    boundary: np.ndarray       # (N,) bool, nodes on the truncation boundary
    margin: np.ndarray         # (N,) graph distance to the truncation boundary
    stencil_bound: float
    spacing: float
    window_radius: float
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return int(self.coords.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edge_u.shape[0])

    @property
    def graph(self) -> csr_matrix:
        if "graph" not in self._cache:
            self._cache["graph"] = csr_matrix(
                (self.weights, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes)
            )
        return self._cache["graph"]

    def chart(self, name: str) -> ChartGrid:
        for grid in self.charts:
            if grid.name == name:
                return grid
        raise ManifoldError(f"Unknown chart: {name}")

    def node_at(self, chart: str, i: int, j: int) -> int:
        """Global node id of grid index (i, j) in a chart."""
        grid = self.chart(chart)
        nv, nu = grid.nodes.shape
        if not (0 <= i < nu and 0 <= j < nv):
            raise ManifoldError(f"Index ({i}, {j}) outside chart {chart} of size {nu}x{nv}")
        return int(grid.nodes[j, i])

    def nearest_node(self, chart: str, u: float, v: float) -> int:
        """Node of a chart closest (in chart coordinates) to (u, v)."""
        grid = self.chart(chart)
        du, dv = grid.spec.steps()
        nv, nu = grid.nodes.shape
        i = int(round((u - grid.spec.u_range[0]) / du))
        j = int(round((v - grid.spec.v_range[0]) / dv))
        i = i % nu if grid.spec.periodic_u else min(max(i, 0), nu - 1)
        j = j % nv if grid.spec.periodic_v else min(max(j, 0), nv - 1)
        return int(grid.nodes[j, i])

    def side_nodes(self, chart: str, side: str) -> np.ndarray:
        """Global node ids along one side of a chart, in increasing index order."""
        grid = self.chart(chart)
        selectors = {
            "u0": grid.nodes[:, 0],
            "u1": grid.nodes[:, -1],
            "v0": grid.nodes[0, :],
            "v1": grid.nodes[-1, :],
        }
        if side not in selectors:
            raise ManifoldError(f"Unknown side: {side}")
        return np.array(selectors[side], dtype=np.int64)

    def neighbors(self, p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(neighbour ids, edge lengths, edge ids) of node p."""
        lo, hi = self.indptr[p], self.indptr[p + 1]
        return self.indices[lo:hi], self.weights[lo:hi], self.adj_edge[lo:hi]

    def distances_from(self, sources: Union[int, Sequence[int]]) -> np.ndarray:
        """
        Exact multi-source graph distance.

        Single-source results are cached on the manifold.

        Args:
            sources: Node id or collection of node ids

        Returns:
            Array of length N
        """
        if np.isscalar(sources):
            key = ("dist", int(sources))
            if key not in self._cache:
                values = dijkstra(self.graph, directed=False, indices=int(sources))
                values.setflags(write=False)
                self._cache[key] = values
            return self._cache[key]
        indices = np.unique(np.asarray(sources, dtype=np.int64))
        return dijkstra(self.graph, directed=False, indices=indices, min_only=True)

    def edge_vectors(self, p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Chart displacements leaving p along its edges, with neighbours, lengths and edge ids."""
        lo, hi = self.indptr[p], self.indptr[p + 1]
        edges = self.adj_edge[lo:hi]
        disp = self.edge_disp[edges] * self.adj_sign[lo:hi, None]
        return disp, self.indices[lo:hi], self.weights[lo:hi], edges


def _wrap(index: np.ndarray, size: int, periodic: bool) -> Tuple[np.ndarray, np.ndarray]:
    if periodic:
        return index % size, np.ones(index.shape, dtype=bool)
    return index, (index >= 0) & (index < size)


def _quadratic(G: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x^T G y for stacked (g11, g12, g22) and vectors."""
    return (G[..., 0] * x[..., 0] * y[..., 0]
            + G[..., 1] * (x[..., 0] * y[..., 1] + x[..., 1] * y[..., 0])
            + G[..., 2] * x[..., 1] * y[..., 1])


def _chart_edges(spec: ChartSpec, ids: np.ndarray, metric: np.ndarray):
    nu, nv = spec.resolution
    du, dv = spec.steps()
    J, I = np.mgrid[0:nv, 0:nu]
    p_all, q_all, disp_all, metric_all, axis_all = [], [], [], [], []
    for a, b in half_stencil(spec.stencil):
        I2, ok_u = _wrap(I + a, nu, spec.periodic_u)
        J2, ok_v = _wrap(J + b, nv, spec.periodic_v)
        ok = ok_u & ok_v
        p = ids[J[ok], I[ok]]
        q = ids[J2[ok], I2[ok]]
        keep = p != q
        G = 0.5 * (metric[J[ok], I[ok]] + metric[J2[ok], I2[ok]])
        p_all.append(p[keep])
        q_all.append(q[keep])
        disp_all.append(np.tile([a * du, b * dv], (int(keep.sum()), 1)))
        metric_all.append(G[keep])
        axis_all.append(np.full(int(keep.sum()), abs(a) + abs(b) == 1))
    return (np.concatenate(p_all), np.concatenate(q_all), np.concatenate(disp_all),
            np.concatenate(metric_all), np.concatenate(axis_all))


def _chart_wedges(spec: ChartSpec, ids: np.ndarray, metric: np.ndarray) -> Dict[str, np.ndarray]:
    nu, nv = spec.resolution
    du, dv = spec.steps()
    cu = nu if spec.periodic_u else nu - 1
    cv = nv if spec.periodic_v else nv - 1
    J, I = np.mgrid[0:cv, 0:cu]
    J, I = J.ravel(), I.ravel()
    out = {key: [] for key in ("p", "q1", "q2", "a", "b", "c", "e1", "e2")}
    for triangle in _CELL_TRIANGLES:
        verts = [(I + di, J + dj) for di, dj in triangle]
        node = [ids[vj % nv, vi % nu] for vi, vj in verts]
        G = sum(metric[vj % nv, vi % nu] for vi, vj in verts) / 3.0
        pos = [np.stack([vi * du, vj * dv], axis=-1) for vi, vj in verts]
        for k in range(3):
            k1, k2 = (k + 1) % 3, (k + 2) % 3
            e1 = pos[k1] - pos[k]
            e2 = pos[k2] - pos[k]
            diff = e1 - e2
            out["p"].append(node[k])
            out["q1"].append(node[k1])
            out["q2"].append(node[k2])
            out["a"].append(_quadratic(G, diff, diff))
            out["b"].append(_quadratic(G, diff, e2))
            out["c"].append(_quadratic(G, e2, e2))
            out["e1"].append(e1)
            out["e2"].append(e2)
    wedges = {key: np.concatenate(values) for key, values in out.items()}
    wedges["chart"] = np.zeros(len(wedges["p"]), dtype=np.int64)
    return wedges


def _finish_wedges(raw: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    keep = (raw["p"] != raw["q1"]) & (raw["p"] != raw["q2"]) & (raw["q1"] != raw["q2"])
    order = np.argsort(raw["p"][keep], kind="stable")
    return {key: value[keep][order] for key, value in raw.items()}


def _assemble(coords, node_metric, node_chart, charts, p, q, disp, metric, axis,
              edge_chart, boundary, raw_wedges, bound) -> DiscreteManifold:
    n = coords.shape[0]
    lengths = np.sqrt(_quadratic(metric, disp, disp))

    # Duplicate edges (seams, collapsed chart rows, short periodic charts)
    # keep the shortest length.
    lo, hi = np.minimum(p, q), np.maximum(p, q)
    pair = lo * n + hi
    by_length = np.lexsort((lengths, pair))
    keys, start = np.unique(pair[by_length], return_index=True)
    first = by_length[start]
    lengths = lengths[first]
    inverse = np.searchsorted(keys, pair)
    axis_len = np.bincount(inverse, weights=axis.astype(float)) > 0
    edge_u, edge_v = p[first], q[first]
    edge_disp, edge_metric, edge_chart = disp[first], metric[first], edge_chart[first]
    if np.any(lengths <= 0):
        raise ManifoldError("Non-positive edge length")

    rows = np.concatenate([edge_u, edge_v])
    cols = np.concatenate([edge_v, edge_u])
    eid = np.concatenate([np.arange(len(keys)), np.arange(len(keys))])
    sign = np.concatenate([np.ones(len(keys)), -np.ones(len(keys))])
    order = np.lexsort((cols, rows))
    rows, cols, eid, sign = rows[order], cols[order], eid[order], sign[order]
    indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))])
    weights = lengths[eid]

    graph = csr_matrix((weights, cols, indptr), shape=(n, n))
    n_components, _ = connected_components(graph, directed=False)
    if n_components != 1:
        raise ManifoldError(f"Manifold graph is disconnected ({n_components} components)")

    if boundary.any():
        margin = dijkstra(graph, directed=False, indices=np.flatnonzero(boundary), min_only=True)
        window_radius = float(margin.max())
    else:
        margin = np.full(n, np.inf)
        window_radius = float(dijkstra(graph, directed=False, indices=0).max())
    margin.setflags(write=False)

    spacing = float(lengths[axis_len].max()) if axis_len.any() else float(lengths.max())
    manifold = DiscreteManifold(
        coords=coords, node_metric=node_metric, node_chart=node_chart, charts=tuple(charts),
        edge_u=edge_u, edge_v=edge_v, edge_len=lengths, edge_disp=edge_disp,
        edge_chart=edge_chart, edge_metric=edge_metric,
        indptr=indptr, indices=cols, weights=weights, adj_edge=eid, adj_sign=sign,
        wedges=_finish_wedges(raw_wedges), boundary=boundary, margin=margin,
        stencil_bound=bound, spacing=spacing, window_radius=window_radius,
    )
    manifold._cache["graph"] = graph
    manifold._cache["axis"] = axis_len
    logger.debug("Assembled manifold with %d nodes, %d edges, R=%.4g",
                 n, len(keys), window_radius)
    return manifold


def build_chart_manifold(spec: ChartSpec) -> DiscreteManifold:
    """
    Build the metric graph of a single chart.

    Args:
        spec: Chart specification

    Returns:
        DiscreteManifold

    Raises:
        ManifoldError: If the metric is not positive definite at some node or
            the resulting graph is disconnected
    """
    nu, nv = spec.resolution
    du, dv = spec.steps()
    us = spec.u_range[0] + du * np.arange(nu)
    vs = spec.v_range[0] + dv * np.arange(nv)
    U, V = np.meshgrid(us, vs)
    metric = spec.metric.sample(U, V)

    g11, g12, g22 = metric[..., 0], metric[..., 1], metric[..., 2]
    bad = ~((g11 > 0) & (g11 * g22 - g12 ** 2 > 0))
    if bad.any():
        j, i = (int(k) for k in np.argwhere(bad)[0])
        raise ManifoldError(
            f"Metric not positive definite at node {j * nu + i} "
            f"(chart {spec.name}, i={i}, j={j}): g11={g11[j, i]}, g12={g12[j, i]}, g22={g22[j, i]}"
        )

    ids = np.arange(nu * nv).reshape(nv, nu)
    p, q, disp, edge_metric, axis = _chart_edges(spec, ids, metric)

    boundary = np.zeros((nv, nu), dtype=bool)
    for side in spec.cut_sides:
        if side == "u0":
            boundary[:, 0] = True
        elif side == "u1":
            boundary[:, -1] = True
        elif side == "v0":
            boundary[0, :] = True
        else:
            boundary[-1, :] = True

    return _assemble(
        coords=np.stack([U.ravel(), V.ravel()], axis=-1),
        node_metric=metric.reshape(-1, 3),
        node_chart=np.zeros(nu * nv, dtype=np.int64),
        charts=[ChartGrid(spec=spec, nodes=ids)],
        p=p, q=q, disp=disp, metric=edge_metric, axis=axis,
        edge_chart=np.zeros(len(p), dtype=np.int64),
        boundary=boundary.ravel(),
        raw_wedges=_chart_wedges(spec, ids, metric),
        bound=stencil_bound(half_stencil(spec.stencil)),
    )


def glue(manifolds: Sequence[DiscreteManifold], seams: Sequence[Seam]) -> DiscreteManifold:
    """
    Glue manifolds along node seams into one connected manifold.

    Seam nodes are identified pairwise; edges that coincide after the
    identification keep the shortest of their lengths.

    Args:
        manifolds: Parts to glue
        seams: Node correspondences between parts

    Returns:
        DiscreteManifold

    Raises:
        ManifoldError: On mismatched seams, duplicate chart names or a
            disconnected result
    """
    offsets = np.concatenate([[0], np.cumsum([m.n_nodes for m in manifolds])]).astype(np.int64)
    total = int(offsets[-1])
    names = [grid.name for m in manifolds for grid in m.charts]
    if len(set(names)) != len(names):
        raise ManifoldError(f"Duplicate chart names: {names}")

    parent = np.arange(total)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for seam in seams:
        if len(seam.a_nodes) != len(seam.b_nodes):
            raise ManifoldError(
                f"Seam length mismatch: {len(seam.a_nodes)} vs {len(seam.b_nodes)} nodes"
            )
        if len(set(seam.a_nodes)) != len(seam.a_nodes) or len(set(seam.b_nodes)) != len(seam.b_nodes):
            raise ManifoldError("Seam correspondence is not a bijection")
        for x, y in zip(seam.a_nodes, seam.b_nodes):
            rx, ry = find(int(offsets[seam.a] + x)), find(int(offsets[seam.b] + y))
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)

    roots = np.array([find(g) for g in range(total)])
    _, first, mapping = np.unique(roots, return_index=True, return_inverse=True)

    def stack(attr):
        return np.concatenate([getattr(m, attr) for m in manifolds])

    coords = stack("coords")[first]
    node_metric = stack("node_metric")[first]
    chart_offsets = np.concatenate([[0], np.cumsum([len(m.charts) for m in manifolds])])
    node_chart = np.concatenate(
        [m.node_chart + chart_offsets[k] for k, m in enumerate(manifolds)])[first]
    boundary = np.zeros(len(first), dtype=bool)
    np.logical_or.at(boundary, mapping, stack("boundary"))

    charts = []
    for k, m in enumerate(manifolds):
        for grid in m.charts:
            charts.append(ChartGrid(spec=grid.spec, nodes=mapping[offsets[k] + grid.nodes]))

    edge_p = np.concatenate([mapping[offsets[k] + m.edge_u] for k, m in enumerate(manifolds)])
    edge_q = np.concatenate([mapping[offsets[k] + m.edge_v] for k, m in enumerate(manifolds)])
    keep = edge_p != edge_q
    edge_chart = np.concatenate(
        [m.edge_chart + chart_offsets[k] for k, m in enumerate(manifolds)])
    axis = np.concatenate([m._cache["axis"] for m in manifolds])

    raw_wedges = {key: [] for key in manifolds[0].wedges}
    for k, m in enumerate(manifolds):
        for key in ("p", "q1", "q2"):
            raw_wedges[key].append(mapping[offsets[k] + m.wedges[key]])
        for key in ("a", "b", "c", "e1", "e2"):
            raw_wedges[key].append(m.wedges[key])
        raw_wedges["chart"].append(m.wedges["chart"] + chart_offsets[k])
    raw_wedges = {key: np.concatenate(values) for key, values in raw_wedges.items()}

    logger.info("Glued %d parts along %d seams into %d nodes", len(manifolds), len(seams), len(first))
    return _assemble(
        coords=coords, node_metric=node_metric, node_chart=node_chart, charts=charts,
        p=edge_p[keep], q=edge_q[keep], disp=stack("edge_disp")[keep],
        metric=stack("edge_metric")[keep], axis=axis[keep],
        edge_chart=edge_chart[keep], boundary=boundary, raw_wedges=raw_wedges,
        bound=max(m.stencil_bound for m in manifolds),
    )


def boundary_margin(M: DiscreteManifold) -> np.ndarray:
    """
    Graph distance from every node to the truncation boundary.

    Args:
        M: Manifold

    Returns:
        Per-node margin; +inf everywhere when nothing was cut
    """
    return M.margin


def _parse_sections(text: str) -> List[Tuple[str, Dict[str, str]]]:
    sections: List[Tuple[str, Dict[str, str]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append((line[1:-1].strip().lower(), {}))
            continue
        if "=" not in line or not sections:
            raise ManifoldError(f"Spec file line {number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        sections[-1][1][key.lower()] = value
    return sections


def _floats(value: str, count: int, what: str) -> Tuple[float, ...]:
    try:
        numbers = tuple(float(part) for part in value.split(","))
    except ValueError as e:
        raise ManifoldError(f"Invalid {what}: {value!r}") from e
    if len(numbers) != count:
        raise ManifoldError(f"{what} needs {count} values, got {value!r}")
    return numbers


def load_spec_file(path: Union[str, Path]) -> DiscreteManifold:
    """
    Build a manifold from a plain-text spec file.

    The file has `[chart]`, `[metric]`, `[identify]` and `[seam]` sections of
    `key = value` lines, e.g.:

        [chart]
        name = tube
        u = 0, 1.6
        v = 0, 8
        resolution = 16, 81
        cut = v1

        [metric]
        chart = tube
        g11 = 1
        g12 = 0
        g22 = 1

        [identify]
        chart = tube
        periodic = u

    Seams join two chart sides: `a = core`, `a_side = v1`, `b = tube`,
    `b_side = v0`, optional `reverse = true`.

    Args:
        path: Spec file path

    Returns:
        DiscreteManifold

    Raises:
        ManifoldError: If the file is malformed
    """
    sections = _parse_sections(Path(path).read_text())
    charts: Dict[str, Dict] = {}
    seams: List[Dict[str, str]] = []

    for kind, values in sections:
        if kind == "chart":
            name = values.get("name", f"chart{len(charts)}")
            try:
                nu, nv = (int(part) for part in values["resolution"].split(","))
                charts[name] = {
                    "name": name,
                    "u_range": _floats(values["u"], 2, "u range"),
                    "v_range": _floats(values["v"], 2, "v range"),
                    "resolution": (nu, nv),
                    "cut_sides": tuple(s.strip() for s in values.get("cut", "").split(",") if s.strip()),
                    "stencil": values.get("stencil", "16"),
                }
            except (KeyError, ValueError) as e:
                raise ManifoldError(f"Invalid [chart] section {values}: {e}") from e
        elif kind in ("metric", "identify"):
            name = values.get("chart")
            if name not in charts:
                raise ManifoldError(f"[{kind}] refers to unknown chart {name!r}")
            if kind == "metric":
                components = {key: _floats(values.get(key, default), 1, key)[0]
                              for key, default in (("g11", "1"), ("g12", "0"), ("g22", "1"))}
                charts[name]["metric"] = MetricTensor.constant(**components)
            else:
                axis = values.get("periodic", "none").strip()
                if axis not in ("u", "v", "none"):
                    raise ManifoldError(f"Unknown identification: periodic = {axis}")
                charts[name]["identification"] = "none" if axis == "none" else f"periodic-{axis}"
        elif kind == "seam":
            seams.append(values)
        else:
            raise ManifoldError(f"Unknown spec section: [{kind}]")

    if not charts:
        raise ManifoldError("Spec file defines no chart")

    try:
        parts = [build_chart_manifold(ChartSpec(**params)) for params in charts.values()]
    except ValueError as e:
        if isinstance(e, ManifoldError):
            raise
        raise ManifoldError(str(e)) from e
    if not seams:
        if len(parts) > 1:
            raise ManifoldError("Several charts but no seam joining them")
        return parts[0]

    position = {name: k for k, name in enumerate(charts)}
    seam_list = []
    for values in seams:
        try:
            a, b = values["a"], values["b"]
            a_nodes = parts[position[a]].side_nodes(a, values["a_side"])
            b_nodes = parts[position[b]].side_nodes(b, values["b_side"])
        except KeyError as e:
            raise ManifoldError(f"Invalid [seam] section {values}: missing {e}") from e
        if values.get("reverse", "false").lower() == "true":
            b_nodes = b_nodes[::-1]
        seam_list.append(Seam(position[a], tuple(a_nodes), position[b], tuple(b_nodes)))
    return glue(parts, seam_list)


def describe(M: DiscreteManifold, x0: Optional[int] = None,
             radii: Optional[Sequence[float]] = None) -> str:
    """
    Structured-text summary of a manifold.

    Args:
        M: Manifold
        x0: Base node for the end partition (defaults to the node of largest margin)
        radii: Exhaustion radii; when given the end labels are included

    Returns:
        key = value text
    """
    lines = [
        f"nodes = {M.n_nodes}",
        f"edges = {M.n_edges}",
        f"charts = {','.join(grid.name for grid in M.charts)}",
        f"window_radius = {M.window_radius:.12g}",
        f"spacing = {M.spacing:.12g}",
        f"stencil_bound = {M.stencil_bound:.12g}",
        f"boundary_nodes = {int(M.boundary.sum())}",
    ]
    if radii is not None:
        from src.ends import end_partition

        if x0 is None:
            x0 = int(np.argmax(np.where(np.isfinite(M.margin), M.margin, -1.0)))
        partition = end_partition(M, x0, radii)
        lines.append(partition.to_text())
    return "\n".join(lines)


def node_angles(M: DiscreteManifold) -> np.ndarray:
    """
    Total angle around every node, summed over the triangles that meet there.

    Each cell carries both of its diagonal triangulations, so the wedge sum
    counts every angle twice.
    """
    if "angles" not in M._cache:
        w = M.wedges
        a, b, c = w["a"], w["b"], w["c"]
        cos = (b + c) / np.sqrt((a + 2.0 * b + c) * c)
        angles = np.bincount(w["p"], weights=np.arccos(np.clip(cos, -1.0, 1.0)),
                             minlength=M.n_nodes) / 2.0
        angles.setflags(write=False)
        M._cache["angles"] = angles
    return M._cache["angles"]


def cone_points(M: DiscreteManifold, slack: float = 0.25) -> np.ndarray:
    """Nodes off the truncation boundary whose total angle exceeds 2π by more than slack."""
    return np.flatnonzero(~M.boundary & (node_angles(M) > 2.0 * np.pi + slack))


def cone_distance(M: DiscreteManifold) -> np.ndarray:
    """Graph distance to the nearest cone point of excess angle (+inf without any)."""
    if "cone_distance" not in M._cache:
        cones = cone_points(M)
        if cones.size:
            values = M.distances_from(cones)
        else:
            values = np.full(M.n_nodes, np.inf)
        values.setflags(write=False)
        M._cache["cone_distance"] = values
    return M._cache["cone_distance"]


def seam_nodes(M: DiscreteManifold) -> np.ndarray:
    """Mask of nodes that occur at more than one chart grid position."""
    if "seam_nodes" not in M._cache:
        counts = np.bincount(np.concatenate([grid.nodes.ravel() for grid in M.charts]),
                             minlength=M.n_nodes)
        M._cache["seam_nodes"] = counts > 1
    return M._cache["seam_nodes"]
