"""Pseudorandomness measurements on process snapshots.

Everything here is read-only over a :class:`~girthforge.process.ProcessState`.
Counts are exact: one BFS to depth ``g - 2`` from every unsaturated vertex.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import AtLeast, Graph, bfs_ball, bidir_distance
from .process import ProcessState
from .schedule import Schedule, make_schedule

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("GIRTHFORGE_BUDGET")
    return int(float(raw)) if raw else default


@njit(cache=True)
def _w_path_counts(adj, deg, W, wpos, wsize, depth, mark, dist, queue, epoch):
    out = np.zeros((wsize, depth + 1), np.int64)
    for i in range(wsize):
        cnt = bfs_ball(adj, deg, W[i], depth, mark, dist, queue, epoch)
        for q in range(1, cnt):
            y = queue[q]
            if wpos[y] >= 0:
                out[i, dist[y]] += 1
    return out


@dataclass
class PathStats:
    """``P[l]`` counts unsaturated pairs at distance ``l`` (``1 <= l <= g-2``).

    ``per_vertex[i, l]`` is the number of unsaturated vertices at distance
    ``l`` from ``vertices[i]``; column 0 is unused.
    """

    g: int
    vertices: np.ndarray
    per_vertex: np.ndarray
    P: np.ndarray
    forbidden_count: int
    available_count: int
    w_size: int

    def Pv(self, v: int) -> np.ndarray:
        idx = np.flatnonzero(self.vertices == v)
        if not len(idx):
            raise KeyError(f"vertex {v} is not unsaturated")
        return self.per_vertex[idx[0]]


def path_stats(state: ProcessState) -> PathStats:
    g = state.g
    depth = max(g - 2, 0)
    wsize = state.w_size
    gr = state.graph
    ws = gr.workspace
    per = _w_path_counts(gr.adj, gr.deg, state.W, state.wpos, wsize, depth,
                         ws.mark, ws.dist, ws.queue, ws.epoch)
    order = np.argsort(state.W[:wsize], kind="stable")
    verts = state.W[:wsize][order].astype(np.int64)
    per = per[order]
    P = per.sum(axis=0) // 2
    P[0] = 0
    forbidden = int(P.sum())
    total = wsize * (wsize - 1) // 2
    return PathStats(g=g, vertices=verts, per_vertex=per, P=P, forbidden_count=forbidden,
                     available_count=total - forbidden, w_size=wsize)


@dataclass
class SafetyReport:
    """``safe`` means every degree is ``k-1`` or ``k`` and no two unsaturated
    vertices are within ``g-2``.  ``level_safe`` drops the degree
    requirement and only asks that the current level has no forbidden pair.
    """

    safe: bool
    level_safe: bool
    violating_pair: tuple[int, int] | None
    min_distance: int | AtLeast | None
    forbidden_count: int


def is_safe(state: ProcessState) -> SafetyReport:
    g = state.g
    gr = state.graph
    w = sorted(int(x) for x in state.unsaturated)
    if len(w) < 2:
        level_safe, pair, dmin, forbidden = True, None, None, 0
    else:
        stats = path_stats(state)
        forbidden = stats.forbidden_count
        level_safe = forbidden == 0
        pair = None
        ws = gr.workspace
        if not level_safe:
            ell = int(np.flatnonzero(stats.P)[0])
            i = int(np.flatnonzero(stats.per_vertex[:, ell])[0])
            u = int(stats.vertices[i])
            for v in w:
                if v != u and bidir_distance(gr.adj, gr.deg, u, v, ell + 1, ws.mark, ws.mark2,
                                             ws.queue, ws.queue2, ws.epoch) == ell:
                    pair = (u, v)
                    break
            dmin = ell
        elif len(w) <= 64:
            cap = max(gr.n, 1)
            best = cap
            for i, u in enumerate(w):
                for v in w[i + 1:]:
                    best = min(best, int(bidir_distance(gr.adj, gr.deg, u, v, cap, ws.mark,
                                                        ws.mark2, ws.queue, ws.queue2, ws.epoch)))
            dmin = best if best < cap else AtLeast(cap)
        else:
            dmin = AtLeast(g - 1)
    k = state.k
    degrees_ok = gr.n == 0 or gr.min_degree() >= k - 1
    return SafetyReport(safe=bool(level_safe and degrees_ok), level_safe=level_safe,
                        violating_pair=pair, min_distance=dmin, forbidden_count=forbidden)


@dataclass
class PathBoundReport:
    bounded: bool
    local_ratio: np.ndarray
    global_ratio: np.ndarray
    C: float
    eps: float

    @property
    def worst(self) -> float:
        """Largest observed/ceiling ratio; ``<= 1`` means path-bounded."""
        vals = np.concatenate([self.local_ratio[1:], self.global_ratio[1:]])
        return float(vals.max()) if len(vals) else 0.0


def is_path_bounded(state: ProcessState, C: float, eps: float | None = None,
                    n_reference: int | None = None, stats: PathStats | None = None) -> PathBoundReport:
    """Compare per-vertex and global path counts with their polylog ceilings.

    ``n - 2t`` in the local ceiling is taken as ``|W_t|``, which is what it
    equals before a freeze; this keeps the check meaningful at every
    degree level.  ``eps`` defaults to the schedule value for the run's ``c``.
    """
    cfg = state.config
    n = n_reference or cfg.n
    c = cfg.effective_c
    if eps is None:
        eps = make_schedule(n, cfg.k, c).eps if c < 1 else 0.0
    stats = stats or path_stats(state)
    k = state.k
    logC = math.log(n) ** C
    depth = len(stats.P)
    local = np.zeros(depth)
    glob = np.zeros(depth)
    w = stats.w_size
    for ell in range(1, depth):
        L = max(1.0, (k - 1) ** ell * w / n ** (c + eps))
        if w:
            local[ell] = stats.per_vertex[:, ell].max() / (L * logC)
        ceiling = w * w * (k - 1) ** ell / n * logC
        glob[ell] = stats.P[ell] / ceiling if ceiling > 0 else (0.0 if stats.P[ell] == 0 else math.inf)
    bounded = bool((local <= 1.0).all() and (glob <= 1.0).all())
    return PathBoundReport(bounded=bounded, local_ratio=local, global_ratio=glob, C=C, eps=eps)


def threatening_bound(n: int, k: int, ell: int, a: int) -> int:
    return n ** (a + 1) * (k - 1) ** ell


def count_threatening_paths(base: Graph, ell: int, a: int, k: int | None = None,
                            budget: int | None = None) -> int:
    """Directed length-``ell`` paths in ``K_n`` with exactly ``a`` chords.

    A chord is a pair that is not an edge of ``base``.  The first and last
    edges must be base edges and no two chords may be consecutive.  Paths
    are counted once per direction, as in the counting bound
    ``n^(a+1) (k-1)^ell``; halve for undirected paths.  ``k`` defaults to
    one more than the base's maximum degree.
    """
    n = base.n
    if k is None:
        k = base.max_degree() + 1
    if ell < 1 or a < 0:
        raise ValueError("need ell >= 1 and a >= 0")
    if 2 * a + 1 > ell:
        return 0
    budget = budget_from_env() if budget is None else budget
    if threatening_bound(n, k, ell, a) > budget:
        raise BudgetExceeded(f"n^(a+1)(k-1)^ell = {threatening_bound(n, k, ell, a)} exceeds budget {budget}")
    nbrs = [set(int(x) for x in base.neighbors(v)) for v in range(n)]
    on_path = [False] * n
    count = 0

    def extend(x: int, length: int, chords: int, last_chord: bool) -> None:
        nonlocal count
        if length == ell:
            if chords == a and not last_chord:
                count += 1
            return
        remaining = ell - length
        for y in range(n):
            if on_path[y] or y == x:
                continue
            is_chord = y not in nbrs[x]
            if is_chord:
                # first edge, last edge and back-to-back chords are excluded
                if length == 0 or remaining == 1 or last_chord or chords == a:
                    continue
            elif (a - chords) * 2 > remaining:
                # every remaining chord needs a base edge after it
                continue
            on_path[y] = True
            extend(y, length + 1, chords + is_chord, is_chord)
            on_path[y] = False

    for v in range(n):
        on_path[v] = True
        extend(v, 0, 0, False)
        on_path[v] = False
    return count


def default_checkpoints(state: ProcessState) -> list[int]:
    """Level-relative steps for snapshots: level start, ``T``, ``T_safe`` and every
    ``ceil(n/20)`` steps."""
    cfg = state.config
    n = cfg.n
    w0 = state.level_start_size
    half = w0 // 2
    marks = set(range(0, half + 1, max(1, math.ceil(n / 20))))
    c = cfg.effective_c
    if 0 < c < 1:
        sch = make_schedule(n, cfg.k, c)
        for t in (sch.T, sch.T_safe):
            if 0 <= t <= half:
                marks.add(int(math.floor(t)))
    marks.add(half)
    return sorted(marks)


@dataclass
class SnapshotLog:
    """Collects safety flags at checkpoints of an instrumented run."""

    reports: list = field(default_factory=list)

    def __call__(self, state: ProcessState) -> None:
        rep = is_safe(state)
        self.reports.append((state.t, state.degree_floor, state.w_size, rep.safe, rep.forbidden_count))

    @property
    def ever_safe(self) -> bool:
        return any(r[3] for r in self.reports)
