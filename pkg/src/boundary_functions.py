"""
Busemann functions, horofunctions and dl-functions as certified limits.

Each construction evaluates normalized distance functions d(., S_k) - c_k for
an escaping sequence of source sets S_k. Iterates are compared on a ball
around the base node intersected with every iterate's reliable region; the
limit is the last iterate, normalized to vanish at the base node.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.config import Tolerances
from src.eikonal import ScalarField, distance_to_set
from src.errors import SequenceError, SourceError, StabilizationError
from src.geodesics import Ray
from src.manifold import DiscreteManifold
from src.utils.reporting import format_value


logger = logging.getLogger(__name__)

DEFAULT_EVAL_FRACTION = 0.125


class LimitReport(BaseModel):
    """Convergence certificate of a limit construction."""
    construction: str
    iterates_used: int
    sup_change_last: float
    reliable_radius: float
    converged: bool
    limit_tol: float
    backend: str
    schedule: List[float] = Field(default_factory=list)
    reliable_nodes: int = 0
    monotonicity_excess: Optional[float] = None

    def to_text(self) -> str:
        """key = value rendering."""
        lines = [
            f"construction = {self.construction}",
            f"iterates_used = {self.iterates_used}",
            f"sup_change_last = {format_value(self.sup_change_last)}",
            f"limit_tol = {format_value(self.limit_tol)}",
            f"reliable_radius = {format_value(self.reliable_radius)}",
            f"reliable_nodes = {self.reliable_nodes}",
            f"converged = {format_value(self.converged)}",
            f"backend = {self.backend}",
            f"schedule = {','.join(format_value(float(t)) for t in self.schedule)}",
        ]
        if self.monotonicity_excess is not None:
            lines.append(f"monotonicity_excess = {format_value(self.monotonicity_excess)}")
        return "\n".join(lines)


def _eval_ball(M: DiscreteManifold, x0: int, eval_fraction: float) -> Tuple[np.ndarray, float]:
    r_eval = eval_fraction * M.window_radius
    return M.distances_from(int(x0)) <= r_eval, r_eval


def _limit(M: DiscreteManifold, construction: str, sources: Sequence[np.ndarray],
           offsets: Sequence[Optional[float]], schedule: Sequence[float], x0: int,
           backend: str, tolerances: Optional[Tolerances], eval_fraction: float
           ) -> Tuple[ScalarField, LimitReport, List[np.ndarray]]:
    tol = tolerances if tolerances is not None else Tolerances.for_manifold(M)
    ball, r_eval = _eval_ball(M, x0, eval_fraction)
    mask = ball.copy()
    iterates: List[np.ndarray] = []
    raw: List[np.ndarray] = []
    used_schedule: List[float] = []

    for S, offset, t in zip(sources, offsets, schedule):
        dist = distance_to_set(M, S, backend=backend)
        joint = mask & dist.reliable
        if not joint[x0]:
            logger.info("%s: base node unreliable at iterate %.4g, stopping", construction, t)
            break
        mask = joint
        shift = dist.values[x0] if offset is None else offset
        raw.append(dist.values - shift)
        iterates.append(dist.values - dist.values[x0])
        used_schedule.append(float(t))

    if not iterates:
        raise StabilizationError(f"{construction}: no iterate is reliable at the base node; increase window")

    sup_change = np.inf
    if len(iterates) >= 2:
        sup_change = float(np.max(np.abs(iterates[-1][mask] - iterates[-2][mask])))
    converged = bool(len(iterates) >= 2 and sup_change <= tol.limit_tol)

    values = iterates[-1].copy()
    values[x0] = 0.0
    field = ScalarField(values=values, source=construction, reliable=mask, base_node=int(x0),
                        reliable_radius=r_eval, backend=backend)
    report = LimitReport(
        construction=construction,
        iterates_used=len(iterates),
        sup_change_last=sup_change,
        reliable_radius=r_eval,
        converged=converged,
        limit_tol=tol.limit_tol,
        backend=backend,
        schedule=used_schedule,
        reliable_nodes=int(mask.sum()),
    )
    logger.info("%s limit: %d iterates, sup change %.4g (tol %.4g), %d reliable nodes",
                construction, len(iterates), sup_change, tol.limit_tol, int(mask.sum()))
    return field, report, [r[mask] for r in raw]


def busemann_schedule(M: DiscreteManifold, gamma: Ray, x0: int,
                      eval_fraction: float = DEFAULT_EVAL_FRACTION) -> List[float]:
    """Doubling arclengths t_k = 2 r_eval 2^k capped by the ray span and the base margin."""
    r_eval = eval_fraction * M.window_radius
    t_max = min(gamma.certified_span, float(M.margin[x0]) - r_eval)
    if t_max <= 0:
        raise StabilizationError("Ray span shorter than the evaluation radius; increase window")
    schedule = []
    t = 2.0 * r_eval
    while t < t_max:
        schedule.append(t)
        t *= 2.0
    schedule.append(t_max)
    return schedule


def busemann(M: DiscreteManifold, gamma: Ray, x0: int, backend: str = "fast_march",
             tolerances: Optional[Tolerances] = None,
             eval_fraction: float = DEFAULT_EVAL_FRACTION,
             schedule: Optional[Sequence[float]] = None) -> Tuple[ScalarField, LimitReport]:
    """
    Busemann function of a ray: the limit of d(x, γ(t)) - t.

    Args:
        M: Manifold
        gamma: Certified ray
        x0: Base node (the field vanishes there)
        backend: Distance backend for the iterates
        tolerances: Tolerances (derived from M by default)
        eval_fraction: Evaluation ball radius as a fraction of the window radius
        schedule: Arclengths t_k (doubling schedule by default)

    Returns:
        (field normalized at x0, LimitReport)
    """
    tol = tolerances if tolerances is not None else Tolerances.for_manifold(M)
    schedule = list(schedule) if schedule is not None else busemann_schedule(M, gamma, x0, eval_fraction)
    nodes = [gamma.node_at(t) for t in schedule]
    offsets = [float(gamma.cumlen[np.flatnonzero(gamma.nodes == n)[0]]) for n in nodes]
    field, report, raw = _limit(M, "busemann", [np.array([n]) for n in nodes], offsets,
                                offsets, x0, backend, tol, eval_fraction)
    if len(raw) >= 2:
        report.monotonicity_excess = float(max(np.max(b - a) for a, b in zip(raw[:-1], raw[1:])))
    return field, report


def _check_escaping(M: DiscreteManifold, x0: int, sets: Sequence[np.ndarray]) -> List[float]:
    if len(sets) < 2:
        raise SequenceError("An escaping sequence needs at least two elements")
    dist = M.distances_from(int(x0))
    radii = [float(dist[s].min()) for s in sets]
    if any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise SequenceError(f"Sequence does not escape: distances from base {np.round(radii, 6).tolist()}")
    return radii


def horofunction(M: DiscreteManifold, x_seq: Iterable[int], x0: int, backend: str = "fast_march",
                 tolerances: Optional[Tolerances] = None,
                 eval_fraction: float = DEFAULT_EVAL_FRACTION) -> Tuple[ScalarField, LimitReport]:
    """
    Horofunction of a point sequence: the limit of d(., x_k) - d(x0, x_k).

    Raises:
        SequenceError: If d(x0, x_k) is not strictly increasing
    """
    sets = [np.array([int(x)]) for x in x_seq]
    radii = _check_escaping(M, x0, sets)
    field, report, _ = _limit(M, "horofunction", sets, [None] * len(sets), radii, x0,
                              backend, tolerances, eval_fraction)
    return field, report


def dl_function(M: DiscreteManifold, K_seq: Iterable[Iterable[int]], x0: int,
                backend: str = "fast_march", tolerances: Optional[Tolerances] = None,
                eval_fraction: float = DEFAULT_EVAL_FRACTION) -> Tuple[ScalarField, LimitReport]:
    """
    dl-function of a set sequence: the limit of d(., K_n) - d(x0, K_n).

    Raises:
        SequenceError: If d(x0, K_n) is not strictly increasing
    """
    sets = [np.unique(np.asarray(list(K), dtype=np.int64)) for K in K_seq]
    if any(s.size == 0 for s in sets):
        raise SourceError("dl_function: empty set in the sequence")
    radii = _check_escaping(M, x0, sets)
    field, report, _ = _limit(M, "dl", sets, [None] * len(sets), radii, x0,
                              backend, tolerances, eval_fraction)
    return field, report
