"""
First-order fast marching on the chart triangulation.

Every grid cell carries four triangles, so each node sees its eight axis and
diagonal neighbours as triangle vertices. A node is updated from an accepted
neighbour along the straight edge and across every triangle whose other
vertex is also accepted, using the metric averaged over the triangle.

Each node remembers the chart direction of the characteristic that reached
it. A triangle whose two known vertices carry directions more than
MERGE_ANGLE apart straddles a shock; interpolating across it would blend the
colliding fronts, so such triangles are skipped and the edge updates decide.
"""

import heapq
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import BackendError

from .base import DistanceBackend


logger = logging.getLogger(__name__)

MERGE_ANGLE = math.radians(30.0)
_UNKNOWN = -1


def triangle_solution(u1: float, u2: float, a: float, b: float, c: float) -> Tuple[float, float]:
    """
    Arrival time at a triangle vertex from the opposite edge, with its foot.

    With e1, e2 the edges from the updated vertex to the two known vertices,
    a = |e1 - e2|^2, b = <e1 - e2, e2> and c = |e2|^2 in the triangle metric.
    The minimizer λ of u2 + λ(u1 - u2) + |e2 + λ(e1 - e2)| over the interior of
    the opposite edge is used when it is causal (not below either known value).

    Returns:
        (value, λ), or (+inf, nan) when there is no interior causal candidate
    """
    delta = u1 - u2
    if a <= delta * delta:
        return math.inf, math.nan
    disc = a * c - b * b
    if disc <= 0.0:
        return math.inf, math.nan
    y = -delta * math.sqrt(disc / (a - delta * delta))
    lam = (y - b) / a
    if not 0.0 < lam < 1.0:
        return math.inf, math.nan
    value = u2 + lam * delta + math.sqrt((y * y + disc) / a)
    if value < max(u1, u2):
        return math.inf, math.nan
    return value, lam


def triangle_update(u1: float, u2: float, a: float, b: float, c: float) -> float:
    """
    Arrival time at a triangle vertex from the opposite edge.

    Returns:
        The interior causal candidate of triangle_solution, or +inf
    """
    return triangle_solution(u1, u2, a, b, c)[0]


def _unit(x: float, y: float) -> Tuple[float, float]:
    norm = math.hypot(x, y)
    return (x / norm, y / norm) if norm > 0.0 else (0.0, 0.0)


def _march_tables(manifold) -> Tuple[List[List[Tuple]], List[List[Tuple]]]:
    cache = manifold._cache
    if "march_tables" not in cache:
        n = manifold.n_nodes
        indptr = manifold.indptr.tolist()
        indices = manifold.indices.tolist()
        weights = manifold.weights.tolist()
        disp = (manifold.edge_disp[manifold.adj_edge] * manifold.adj_sign[:, None]).tolist()
        chart = manifold.edge_chart[manifold.adj_edge].tolist()
        neighbours = []
        for p in range(n):
            entries = []
            for k in range(indptr[p], indptr[p + 1]):
                # Leaving p along this edge is the direction of arrival at the neighbour.
                dx, dy = _unit(*disp[k])
                entries.append((indices[k], weights[k], dx, dy, chart[k]))
            neighbours.append(entries)
        wedges: List[List[Tuple]] = [[] for _ in range(n)]
        w = manifold.wedges
        for p, q1, q2, a, b, c, e1, e2, ch in zip(
                w["p"].tolist(), w["q1"].tolist(), w["q2"].tolist(), w["a"].tolist(),
                w["b"].tolist(), w["c"].tolist(), w["e1"].tolist(), w["e2"].tolist(),
                w["chart"].tolist()):
            wedges[p].append((q1, q2, a, b, c, e1[0], e1[1], e2[0], e2[1], ch))
        cache["march_tables"] = (neighbours, wedges)
    return cache["march_tables"]


class FastMarchBackend(DistanceBackend):
    """Continuum-consistent first-order eikonal solver."""

    name = "fast_march"

    def __init__(self, merge_angle: float = MERGE_ANGLE):
        self.merge_cos = math.cos(merge_angle)

    def error_factor(self, manifold) -> float:
        return 1.0 + manifold.stencil_bound

    def _consistent(self, direction, chart, q1: int, q2: int, ch: int) -> bool:
        if chart[q1] != ch or chart[q2] != ch:
            return True
        d1, d2 = direction[q1], direction[q2]
        return d1[0] * d2[0] + d1[1] * d2[1] >= self.merge_cos

    def solve(self, manifold, sources: Sequence[int]) -> np.ndarray:
        if manifold.wedges["p"].size == 0:
            raise BackendError(
                "fast_march needs a chart triangulation; use backend='graph' for this manifold"
            )
        neighbours, wedges = _march_tables(manifold)
        n = manifold.n_nodes
        u = [math.inf] * n
        direction = [(0.0, 0.0)] * n
        chart = [_UNKNOWN] * n
        accepted = [False] * n
        live: List[Tuple[float, int]] = []
        for s in np.unique(np.asarray(sources, dtype=np.int64)).tolist():
            u[s] = 0.0
            live.append((0.0, s))
        heapq.heapify(live)

        skipped = 0
        while live:
            value, p = heapq.heappop(live)
            if accepted[p] or value > u[p]:
                continue
            accepted[p] = True
            for q, length, dx, dy, edge_chart in neighbours[p]:
                if accepted[q]:
                    continue
                best, best_dir, best_chart = value + length, (dx, dy), edge_chart
                for q1, q2, a, b, c, e1x, e1y, e2x, e2y, ch in wedges[q]:
                    if not ((q1 == p and accepted[q2]) or (q2 == p and accepted[q1])):
                        continue
                    candidate, lam = triangle_solution(u[q1], u[q2], a, b, c)
                    if candidate >= best:
                        continue
                    if not self._consistent(direction, chart, q1, q2, ch):
                        skipped += 1
                        continue
                    best = candidate
                    best_dir = _unit(-(e2x + lam * (e1x - e2x)), -(e2y + lam * (e1y - e2y)))
                    best_chart = ch
                if best < u[q]:
                    u[q] = best
                    direction[q] = best_dir
                    chart[q] = best_chart
                    heapq.heappush(live, (best, q))

        values = np.array(u)
        logger.debug("Fast march from %d sources, max %.4g, %d shock triangles skipped",
                     len(sources), values.max(), skipped)
        return values
