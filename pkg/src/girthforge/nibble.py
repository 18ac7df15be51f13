"""Two-stage "nibble" instrumentation of the late process.

Stage one keeps each available pair independently with probability ``p``,
giving a random graph ``H`` on the unsaturated set.  Stage two runs the
high-girth process from the same snapshot but only along ``H``-edges, while
tracking ``N(v, s)``: how many ``H``-neighbours of ``v`` are still
unsaturated after ``s`` inner steps.  The production generator never does
this; the harness exists to measure trajectory concentration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .diagnostics import BudgetExceeded
from .graph import Graph, bfs_ball, bidir_distance
from .process import ProcessConfig, ProcessState
from .schedule import Schedule, make_schedule

WITNESS_BUDGET = 10**8


def _pair_from_index(idx: int, w: int) -> tuple[int, int]:
    # rows i = 0..w-2 hold pairs (i, j>i); row i starts at i*(2w-i-1)/2
    b = 2 * w - 1
    i = int((b - math.sqrt(b * b - 8.0 * idx)) // 2)
    while i > 0 and i * (2 * w - i - 1) // 2 > idx:
        i -= 1
    while (i + 1) * (2 * w - i - 2) // 2 <= idx:
        i += 1
    j = idx - i * (2 * w - i - 1) // 2 + i + 1
    return i, j


def sample_H(state: ProcessState, p: float, rng: _rng.Xoshiro256) -> Graph:
    """Keep every available pair independently with probability ``p``.

    Walks the unsaturated pairs with geometric skips, so only the kept
    candidates are ever distance-tested.  The result is a graph on all
    ``n`` vertex ids whose edges lie inside ``W_t``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    w = sorted(int(x) for x in state.unsaturated)
    size = len(w)
    total = size * (size - 1) // 2
    gr = state.graph
    ws = gr.workspace
    g = state.g
    edges = []

    def keep(i: int, j: int) -> None:
        u, v = w[i], w[j]
        if bidir_distance(gr.adj, gr.deg, u, v, g - 1, ws.mark, ws.mark2,
                          ws.queue, ws.queue2, ws.epoch) >= g - 1:
            edges.append((u, v))

    if p >= 1.0:
        for i in range(size):
            for j in range(i + 1, size):
                keep(i, j)
    elif p > 0.0 and total:
        log_q = math.log1p(-p)
        idx = -1
        while True:
            u01 = rng.uniform()
            idx += 1 + int(math.log1p(-u01) / log_q)
            if idx >= total:
                break
            keep(*_pair_from_index(idx, size))
    return Graph.from_edges(gr.n, edges)


@dataclass
class TrajectoryRecord:
    """``N(v, s)`` samples against the band ``n(s) +/- eps(s)``."""

    n: int
    w0: int
    beta: float
    beta_exact: float
    steps: int
    inner_frozen: bool
    s: np.ndarray
    v: np.ndarray
    N: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    u_sizes: list[int]
    h_degrees: np.ndarray
    seed: int = 0

    @property
    def violated(self) -> np.ndarray:
        return (self.N < self.band_lo) | (self.N > self.band_hi)

    @property
    def violation_fraction(self) -> float:
        return float(self.violated.mean()) if len(self.N) else 0.0

    @property
    def tau(self) -> int | None:
        """First inner step with a band violation, if any."""
        bad = self.s[self.violated]
        return int(bad.min()) if len(bad) else None

    @property
    def max_abs_deviation(self) -> float:
        if not len(self.N):
            return 0.0
        center = 0.5 * (self.band_lo + self.band_hi)
        return float(np.abs(self.N - center).max())

    @property
    def u_identity_holds(self) -> bool:
        return all(u == self.w0 - 2 * s for s, u in enumerate(self.u_sizes))


def band(n: int, beta: float, w0: int, s: int) -> tuple[float, float]:
    p = 1.0 - 2.0 * s / w0
    center = n ** beta * p
    radius = n ** (0.6 * beta) / p ** 8 if p > 0 else math.inf
    return center - radius, center + radius


def run_constrained_matching(state: ProcessState, H: Graph, target_steps: int,
                             rng: _rng.Xoshiro256, sample_vertices=None,
                             beta: float | None = None, beta_exact: float | None = None,
                             max_rejections: int = 64) -> TrajectoryRecord:
    """Run the process from ``state`` restricted to ``H``-edges, on a copy.

    Each step picks uniformly among ``H``-edges whose endpoints are both
    still unsaturated and at distance ``>= g-1`` in the evolving graph.
    Stops after ``target_steps`` steps or when no such edge is left.
    ``beta`` sets the band centre ``n^beta p(s)``; by default it is read off
    the mean ``H``-degree.
    """
    w_list = sorted(int(x) for x in state.unsaturated)
    w0 = len(w_list)
    if target_steps > w0 // 2:
        raise ValueError(f"target_steps={target_steps} exceeds |W_t|/2 = {w0 // 2}")
    n = state.config.n
    g = state.g
    graph = state.graph.copy()
    ws = graph.workspace
    unsat = np.zeros(n, bool)
    unsat[w_list] = True
    hdeg = H.deg.astype(np.int64)
    if w0 and any(hdeg[v] and not unsat[v] for v in range(n)):
        raise ValueError("H has edges outside the unsaturated set")
    if beta is None:
        mean_deg = hdeg[w_list].mean() if w0 else 1.0
        beta = math.log(max(mean_deg, 1.0)) / math.log(n)
    beta_exact = beta if beta_exact is None else beta_exact

    live = H.edges()
    where = {e: i for i, e in enumerate(live)}
    N = hdeg.copy()
    samples = w_list if sample_vertices is None else [int(v) for v in sample_vertices]
    rec_s, rec_v, rec_N, rec_lo, rec_hi = [], [], [], [], []
    u_sizes = [w0]
    u_count = w0

    def record(s: int) -> None:
        lo, hi = band(n, beta, w0, s)
        for v in samples:
            if not unsat[v]:
                continue
            rec_s.append(s)
            rec_v.append(v)
            rec_N.append(N[v])
            rec_lo.append(lo)
            rec_hi.append(hi)

    def drop(e) -> None:
        i = where.pop(e)
        last = live.pop()
        if i < len(live):
            live[i] = last
            where[last] = i

    def available(e) -> bool:
        u, v = e
        return bidir_distance(graph.adj, graph.deg, u, v, g - 1, ws.mark, ws.mark2,
                              ws.queue, ws.queue2, ws.epoch) >= g - 1

    record(0)
    s = 0
    frozen = False
    while s < target_steps:
        chosen = None
        for _ in range(max_rejections):
            if not live:
                break
            e = live[rng.below(len(live))]
            if available(e):
                chosen = e
                break
        if chosen is None and live:
            ok = [e for e in live if available(e)]
            if ok:
                chosen = ok[rng.below(len(ok))]
        if chosen is None:
            frozen = True
            break
        u, v = chosen
        graph.add_edge(u, v)
        for x in (u, v):
            unsat[x] = False
            for y in H.neighbors(x):
                y = int(y)
                N[y] -= 1
                key = (x, y) if x < y else (y, x)
                if key in where:
                    drop(key)
        u_count -= 2
        s += 1
        u_sizes.append(u_count)
        record(s)
    return TrajectoryRecord(
        n=n, w0=w0, beta=beta, beta_exact=beta_exact, steps=s, inner_frozen=frozen,
        s=np.asarray(rec_s, np.int64), v=np.asarray(rec_v, np.int64),
        N=np.asarray(rec_N, np.int64), band_lo=np.asarray(rec_lo), band_hi=np.asarray(rec_hi),
        u_sizes=u_sizes, h_degrees=hdeg[w_list], seed=rng.seed,
    )


def _w_distances(state: ProcessState, ell: int) -> dict[int, dict[int, int]]:
    """For each unsaturated u, the unsaturated w != u with ``1 <= dist <= ell``."""
    gr = state.graph
    ws = gr.workspace
    w_set = set(int(x) for x in state.unsaturated)
    out = {}
    for u in sorted(w_set):
        cnt = bfs_ball(gr.adj, gr.deg, u, ell, ws.mark, ws.dist, ws.queue, ws.epoch)
        near = {}
        for q in range(1, cnt):
            y = int(ws.queue[q])
            if y in w_set:
                near[y] = int(ws.dist[y])
        out[u] = near
    return out


def threatened_pairs_bruteforce(state: ProcessState, H: Graph, ell: int,
                                budget: int = WITNESS_BUDGET) -> tuple[int, dict[int, int]]:
    """Exact ``T_ell`` and per-vertex ``T_ell(v)`` by depth-first witness search.

    A witness for ``u, v`` alternates distance segments inside ``G_t`` (each
    of length at least one, between unsaturated vertices) and ``H``-edges,
    with total weight ``ell`` where every ``H``-edge weighs one.
    """
    near = _w_distances(state, ell)
    w_set = set(near)
    hn = {u: [int(x) for x in H.neighbors(u) if int(x) in w_set] for u in w_set}
    pairs = set()
    visited = 0

    def walk(src: int, a: int, used: int) -> None:
        nonlocal visited
        for b, d in near[a].items():
            r = used + d
            if r > ell:
                continue
            visited += 1
            if visited > budget:
                raise BudgetExceeded(f"witness search passed {budget} states")
            if r == ell:
                if b != src:
                    pairs.add((src, b) if src < b else (b, src))
            elif r + 2 <= ell:
                for c in hn[b]:
                    walk(src, c, r + 1)

    for u in sorted(w_set):
        walk(u, u, 0)
    per = {v: 0 for v in w_set}
    for a, b in pairs:
        per[a] += 1
        per[b] += 1
    return len(pairs), per


def threatened_pairs_dp(state: ProcessState, H: Graph, ell: int) -> tuple[int, dict[int, int]]:
    """Independent oracle for :func:`threatened_pairs_bruteforce`.

    ``R[r]`` is the boolean matrix of pairs joined by a witness prefix of
    weight ``r`` ending after a ``G_t`` segment; it obeys
    ``R[r] = D[r] | OR_{r1 + 1 + d = r} R[r1] @ Hm @ D[d]``.
    """
    w = sorted(int(x) for x in state.unsaturated)
    idx = {v: i for i, v in enumerate(w)}
    m = len(w)
    near = _w_distances(state, ell)
    D = np.zeros((ell + 1, m, m), bool)
    for u, row in near.items():
        for v, d in row.items():
            D[d, idx[u], idx[v]] = True
    Hm = np.zeros((m, m), bool)
    for u, v in H.edges():
        if u in idx and v in idx:
            Hm[idx[u], idx[v]] = Hm[idx[v], idx[u]] = True
    R = np.zeros((ell + 1, m, m), bool)
    for r in range(1, ell + 1):
        acc = D[r].copy()
        for r1 in range(1, r - 1):
            d = r - r1 - 1
            if d >= 1 and R[r1].any():
                step = (R[r1].astype(np.int64) @ Hm.astype(np.int64)) > 0
                acc |= (step.astype(np.int64) @ D[d].astype(np.int64)) > 0
        R[r] = acc
    final = R[ell].copy()
    np.fill_diagonal(final, False)
    final |= final.T
    total = int(np.triu(final, 1).sum())
    per = {v: int(final[idx[v]].sum()) for v in w}
    return total, per


def state_at_T(n: int, k: int, c: float, seed: int) -> tuple[ProcessState, Schedule]:
    """Run the process to step ``T`` of its final degree level."""
    cfg = ProcessConfig(n=n, k=k, c=c, seed=seed)
    state = ProcessState(cfg)
    sched = make_schedule(n, k, c)
    rng = _rng.Xoshiro256(seed)
    state.advance_to_level_step(rng, k - 1, int(math.floor(sched.T)))
    return state, sched


def nibble_trial(n: int, k: int, c: float, seed: int, beta: float | None = None,
                 alpha: float | None = None, sample_size: int | None = None) -> TrajectoryRecord:
    """One trajectory trial: process to ``T``, sample ``H``, run the restricted matching.

    Inner steps: ``|W_t| (1 - n^-alpha) / 2``, the gap between consecutive
    stage times.
    """
    state, _ = state_at_T(n, k, c, seed)
    sched = make_schedule(n, k, c, beta=beta, alpha=alpha)
    if state.frozen or state.saturated:
        raise RuntimeError(f"process stopped before T (seed {seed})")
    rng = _rng.Xoshiro256(seed).spawn(0x4E4942)
    w0 = state.w_size
    p = min(1.0, sched.p_of(w0))
    H = sample_H(state, p, rng)
    steps = min(w0 // 2, int(w0 * (1.0 - n ** (-sched.alpha)) / 2))
    verts = sorted(int(x) for x in state.unsaturated)
    if sample_size is not None and sample_size < len(verts):
        picks = set()
        while len(picks) < sample_size:
            picks.add(verts[rng.below(len(verts))])
        verts = sorted(picks)
    rec = run_constrained_matching(state, H, steps, rng, verts, beta=sched.beta,
                                   beta_exact=sched.beta_exact)
    rec.seed = seed
    return rec
