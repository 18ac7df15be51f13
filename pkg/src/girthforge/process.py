"""The random greedy high-girth process.

Starting from a graph with maximum degree at most ``k`` (normally the
Hamilton cycle), repeatedly join a uniformly random pair of minimum-degree
vertices whose current distance is at least ``g - 1``.  The run ends
*saturated* (k-regular) or *frozen* (no such pair left).

Sampling is by rejection: draw an unordered pair from the unsaturated set
``W`` and accept it if a truncated bidirectional BFS cannot connect the two
within ``g - 2`` hops.  Once ``|W|`` drops to ``exact_threshold``, or after
too many consecutive rejections, the available pairs are counted exactly
and one is drawn by rank.  Both routes are exactly uniform on the available
set, and the exact route is what declares a freeze.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from numba import njit

from . import rng as _rng
from .graph import (
    Graph,
    GraphError,
    bfs_ball,
    bidir_distance,
    girth,
    hamilton_cycle,
    layer_counts,
    link,
)


class ConfigError(ValueError):
    pass


class StepResult(enum.Enum):
    STEPPED = "stepped"
    FROZEN = "frozen"
    SATURATED = "saturated"


FROZEN = StepResult.FROZEN

# meta slots
T, LEVEL, WSIZE, STATUS, LEVEL_W0, LEVEL_STEPS = 0, 1, 2, 3, 4, 5
W_VIOLATIONS, MOORE_CHECKS, MOORE_VIOLATIONS = 6, 7, 8
BLOCK_STEPS, BLOCK_TRIALS, EXACT_STEPS, FALLBACKS, TRIALS = 9, 10, 11, 12, 13
_META_SIZE = 14

RUNNING, ST_FROZEN, ST_SATURATED = 0, 1, 2

# rejection steps are pooled in blocks of this many steps to estimate the
# acceptance rate entering the log-choice count
LOG_BLOCK = 32
DEFAULT_EXACT_THRESHOLD = 64


def derive_girth_target(n: int, k: int, c: float) -> int:
    """``max(3, floor(c * log_{k-1} n))``.

    >>> derive_girth_target(1024, 3, 0.5)
    5
    """
    if not 0.0 < c < 1.0:
        raise ConfigError(f"c must lie in the open interval (0, 1), got {c}")
    if k < 3:
        raise ConfigError(f"k must be >= 3, got {k}")
    if n < 4:
        raise ConfigError(f"n must be >= 4, got {n}")
    # small epsilon keeps exact powers (1024 = 2**10) from flooring down
    return max(3, math.floor(c * math.log(n) / math.log(k - 1) + 1e-9))


@dataclass(frozen=True)
class ProcessConfig:
    n: int
    k: int
    g: int | None = None
    c: float | None = None
    seed: int = 0
    rejection_cap: int | None = None
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD
    start: Graph | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.k < 3:
            raise ConfigError(f"k must be >= 3, got {self.k}")
        if self.n < 4 or self.n % 2:
            raise ConfigError(f"n must be even and >= 4, got {self.n}")
        if (self.g is None) == (self.c is None):
            raise ConfigError("give exactly one of g or c")
        g = self.girth_target
        if not 3 <= g <= self.n:
            raise ConfigError(f"girth target must satisfy 3 <= g <= n, got g={g}, n={self.n}")
        if self.start is None and self.n < 2 * (g - 1):
            raise ConfigError(f"n={self.n} too small for g={g}: need n >= 2(g-1) = {2 * (g - 1)}")
        if self.start is not None:
            if self.start.n != self.n:
                raise ConfigError(f"start graph has {self.start.n} vertices, config says {self.n}")
            if self.start.max_degree() > self.k:
                raise ConfigError(f"start graph has a vertex of degree > k={self.k}")

    @property
    def girth_target(self) -> int:
        if self.g is not None:
            return int(self.g)
        return derive_girth_target(self.n, self.k, self.c)

    @property
    def effective_c(self) -> float:
        """``c`` if given, else the exponent with ``g = c log_{k-1} n``."""
        if self.c is not None:
            return float(self.c)
        return self.girth_target * math.log(self.k - 1) / math.log(self.n)

    @property
    def ball_scale(self) -> float:
        """``n^c``, the order of a radius ``g-2`` ball."""
        return float(self.n) ** self.effective_c

    def with_seed(self, seed: int) -> "ProcessConfig":
        return replace(self, seed=int(seed))


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _refresh_level(deg, degree_count, W, wpos, meta, k):
    n = deg.shape[0]
    d = 0
    while d < k and degree_count[d] == 0:
        d += 1
    meta[LEVEL] = d
    meta[LEVEL_STEPS] = 0
    if d >= k:
        meta[WSIZE] = 0
        meta[LEVEL_W0] = 0
        meta[STATUS] = ST_SATURATED
        return
    size = 0
    for v in range(n):
        if deg[v] == d:
            W[size] = v
            wpos[v] = size
            size += 1
        else:
            wpos[v] = -1
    meta[WSIZE] = size
    meta[LEVEL_W0] = size


@njit(cache=True)
def _remove_from_w(W, wpos, meta, v):
    size = meta[WSIZE]
    i = wpos[v]
    last = W[size - 1]
    W[i] = last
    wpos[last] = i
    wpos[v] = -1
    meta[WSIZE] = size - 1


@njit(cache=True)
def rejection_cap(wsize, ball_scale):
    w2 = float(wsize) * float(wsize)
    denom = max(1.0, w2 - 2.0 * wsize * ball_scale)
    cap = 200.0 * math.ceil(w2 / denom)
    return int(max(1000.0, cap))


@njit(cache=True)
def _forbidden_rows(adj, deg, W, wpos, wsize, g, rowcnt, mark, dist, queue, epoch):
    """rowcnt[i] = available partners W[j] with j > i; returns their sum."""
    total = 0
    for i in range(wsize):
        cnt = bfs_ball(adj, deg, W[i], g - 2, mark, dist, queue, epoch)
        close = 0
        for q in range(1, cnt):
            p = wpos[queue[q]]
            if p > i:
                close += 1
        rowcnt[i] = (wsize - 1 - i) - close
        total += rowcnt[i]
    return total


@njit(cache=True)
def count_available_kernel(adj, deg, W, wpos, wsize, g, rowcnt, mark, dist, queue, epoch):
    if wsize < 2:
        return 0
    return _forbidden_rows(adj, deg, W, wpos, wsize, g, rowcnt, mark, dist, queue, epoch)


@njit(cache=True)
def _pick_ranked(adj, deg, W, wsize, g, rowcnt, r, mark, dist, queue, epoch):
    i = 0
    while r >= rowcnt[i]:
        r -= rowcnt[i]
        i += 1
    bfs_ball(adj, deg, W[i], g - 2, mark, dist, queue, epoch)
    e = epoch[0]
    for j in range(i + 1, wsize):
        if mark[W[j]] != e:
            if r == 0:
                return W[i], W[j]
            r -= 1
    return -1, -1


@njit(cache=True)
def sample_pair_kernel(adj, deg, W, wpos, wsize, g, ball_scale, cap_override, exact_threshold,
                       state, rowcnt, mark, mark2, dist, queue, queue2, epoch):
    """Returns ``(u, v, trials, exact_count)``; ``u == -1`` means frozen.

    ``exact_count`` is ``-1`` when the pair came from rejection sampling.
    """
    if wsize < 2:
        return -1, -1, 0, 0
    trials = 0
    if wsize > exact_threshold:
        cap = cap_override if cap_override > 0 else rejection_cap(wsize, ball_scale)
        while trials < cap:
            i = _rng.below(state, wsize)
            j = _rng.below(state, wsize - 1)
            if j >= i:
                j += 1
            trials += 1
            u = W[i]
            v = W[j]
            if bidir_distance(adj, deg, u, v, g - 1, mark, mark2, queue, queue2, epoch) >= g - 1:
                return u, v, trials, -1
    total = _forbidden_rows(adj, deg, W, wpos, wsize, g, rowcnt, mark, dist, queue, epoch)
    if total == 0:
        return -1, -1, trials, 0
    r = _rng.below(state, total)
    u, v = _pick_ranked(adj, deg, W, wsize, g, rowcnt, r, mark, dist, queue, epoch)
    return u, v, trials, total


@njit(cache=True)
def _flush_block(meta, loglev):
    bs = meta[BLOCK_STEPS]
    if bs > 0:
        loglev[meta[LEVEL] + 1] += bs * math.log(bs / meta[BLOCK_TRIALS])
    meta[BLOCK_STEPS] = 0
    meta[BLOCK_TRIALS] = 0


@njit(cache=True)
def _moore_check(adj, deg, k, g, aux, meta, mark, dist, queue, epoch):
    n = deg.shape[0]
    v = _rng.below(aux, n)
    layers = layer_counts(adj, deg, v, g, mark, dist, queue, epoch)
    cum = 0
    for ell in range(1, g + 1):
        cum += layers[ell]
        meta[MOORE_CHECKS] += 1
        if layers[ell] > k * (k - 1) ** (ell - 1) or cum > 2 * k * (k - 1) ** ell:
            meta[MOORE_VIOLATIONS] += 1


@njit(cache=True)
def advance_kernel(adj, deg, degree_count, W, wpos, meta, loglev, k, g, ball_scale,
                   cap_override, exact_threshold, state, aux, debug, max_steps, stop_level,
                   trace, rowcnt, mark, mark2, dist, queue, queue2, epoch):
    """Run up to ``max_steps`` steps; returns the number of edges added.

    With ``stop_level`` set, also return right after a degree level completes.
    """
    added = 0
    while added < max_steps:
        if meta[STATUS] != RUNNING:
            break
        wsize = meta[WSIZE]
        u, v, trials, exact = sample_pair_kernel(
            adj, deg, W, wpos, wsize, g, ball_scale, cap_override, exact_threshold,
            state, rowcnt, mark, mark2, dist, queue, queue2, epoch)
        meta[TRIALS] += trials
        if u < 0:
            _flush_block(meta, loglev)
            meta[STATUS] = ST_FROZEN
            break
        d = meta[LEVEL]
        if exact >= 0:
            _flush_block(meta, loglev)
            loglev[d + 1] += math.log(exact)
            meta[EXACT_STEPS] += 1
            if wsize > exact_threshold:
                meta[FALLBACKS] += 1
        else:
            loglev[d + 1] += math.log(0.5 * wsize * (wsize - 1))
            meta[BLOCK_STEPS] += 1
            meta[BLOCK_TRIALS] += trials
            if meta[BLOCK_STEPS] >= LOG_BLOCK:
                _flush_block(meta, loglev)
        link(adj, deg, degree_count, u, v)
        _remove_from_w(W, wpos, meta, u)
        _remove_from_w(W, wpos, meta, v)
        t = meta[T]
        if t < trace.shape[0]:
            trace[t, 0] = meta[WSIZE]
            trace[t, 1] = u
            trace[t, 2] = v
        meta[T] = t + 1
        meta[LEVEL_STEPS] += 1
        added += 1
        # |W| must drop by exactly two and agree with the degree histogram
        if meta[WSIZE] != wsize - 2 or degree_count[d] != meta[WSIZE]:
            meta[W_VIOLATIONS] += 1
        if debug:
            _moore_check(adj, deg, k, g, aux, meta, mark, dist, queue, epoch)
        if meta[WSIZE] == 0:
            _flush_block(meta, loglev)
            _refresh_level(deg, degree_count, W, wpos, meta, k)
            if stop_level:
                break
    return added


# ---------------------------------------------------------------------------


class ProcessState:
    """Evolving graph plus the unsaturated set ``W`` at the current degree level."""

    def __init__(self, config: ProcessConfig, debug: bool = False, trace: bool = False):
        self.config = config
        self.k = config.k
        self.g = config.girth_target
        if config.start is None:
            self.graph = hamilton_cycle(config.n, config.k)
            self.start_girth = config.n
        else:
            self.graph = config.start.with_capacity(config.k)
            self.start_girth = girth(self.graph)
        n = config.n
        self.W = np.zeros(n, np.int32)
        self.wpos = np.full(n, -1, np.int32)
        self.meta = np.zeros(_META_SIZE, np.int64)
        self.loglev = np.zeros(config.k + 2, np.float64)
        self.rowcnt = np.zeros(n, np.int64)
        self.debug = debug
        self.aux = _rng.Xoshiro256(config.seed).spawn(0x4D4F4F5245)
        # per step: |W| after the step, then the edge added
        self.trace = np.full((n * config.k // 2 + 1 if trace else 0, 3), -1, np.int32)
        _refresh_level(self.graph.deg, self.graph.degree_count, self.W, self.wpos, self.meta, config.k)

    # views ------------------------------------------------------------
    @property
    def t(self) -> int:
        return int(self.meta[T])

    @property
    def degree_floor(self) -> int:
        return int(self.meta[LEVEL])

    @property
    def level_steps(self) -> int:
        return int(self.meta[LEVEL_STEPS])

    @property
    def level_start_size(self) -> int:
        return int(self.meta[LEVEL_W0])

    @property
    def unsaturated(self) -> np.ndarray:
        return self.W[: self.meta[WSIZE]]

    @property
    def w_size(self) -> int:
        return int(self.meta[WSIZE])

    @property
    def frozen(self) -> bool:
        return self.meta[STATUS] == ST_FROZEN

    @property
    def saturated(self) -> bool:
        return self.meta[STATUS] == ST_SATURATED

    def in_w(self, v: int) -> bool:
        return bool(self.wpos[v] >= 0)

    @property
    def log_choices(self) -> float:
        return float(self.level_log_choices().sum())

    def level_log_choices(self) -> np.ndarray:
        """Entry ``d`` sums ``ln|A_t|`` over steps raising degrees to ``d``."""
        out = self.loglev.copy()
        bs = self.meta[BLOCK_STEPS]
        if bs:
            out[self.meta[LEVEL] + 1] += bs * math.log(bs / self.meta[BLOCK_TRIALS])
        return out

    @property
    def w_violations(self) -> int:
        return int(self.meta[W_VIOLATIONS])

    @property
    def moore_checks(self) -> int:
        return int(self.meta[MOORE_CHECKS])

    @property
    def moore_violations(self) -> int:
        return int(self.meta[MOORE_VIOLATIONS])

    def edge_log(self) -> list[tuple[int, int]]:
        """Edges in insertion order (needs ``trace=True``)."""
        rows = self.trace[: min(self.t, len(self.trace))]
        return [(int(u), int(v)) for _, u, v in rows]

    def apply_edge(self, u: int, v: int) -> None:
        """Add a chosen available pair as the next step, bypassing the sampler."""
        if self.saturated or self.frozen:
            raise GraphError("process already stopped")
        if not is_available(self, u, v):
            raise GraphError(f"pair ({u}, {v}) is not available")
        self.graph.add_edge(u, v)
        _remove_from_w(self.W, self.wpos, self.meta, u)
        _remove_from_w(self.W, self.wpos, self.meta, v)
        self.meta[T] += 1
        self.meta[LEVEL_STEPS] += 1
        if self.meta[WSIZE] == 0:
            _flush_block(self.meta, self.loglev)
            _refresh_level(self.graph.deg, self.graph.degree_count, self.W, self.wpos, self.meta, self.k)

    def set_unsaturated(self, vertices: Iterable[int]) -> None:
        """Override ``W`` (test and diagnostic hook; bypasses the level logic)."""
        self.wpos[:] = -1
        vs = list(vertices)
        for i, v in enumerate(vs):
            self.W[i] = v
            self.wpos[v] = i
        self.meta[WSIZE] = len(vs)
        self.meta[LEVEL_W0] = len(vs)
        self.meta[LEVEL_STEPS] = 0

    def advance(self, rng: _rng.Xoshiro256, max_steps: int, stop_level: bool = False) -> int:
        """Take up to ``max_steps`` steps; returns how many edges were added."""
        ws = self.graph.workspace
        cap = self.config.rejection_cap or 0
        added = int(advance_kernel(
            self.graph.adj, self.graph.deg, self.graph.degree_count, self.W, self.wpos,
            self.meta, self.loglev, self.k, self.g, self.config.ball_scale, cap,
            self.config.exact_threshold, rng.state, self.aux.state, self.debug, max_steps,
            stop_level, self.trace, self.rowcnt, ws.mark, ws.mark2, ws.dist, ws.queue,
            ws.queue2, ws.epoch))
        self.graph.edge_count += added
        return added

    def advance_to_level_step(self, rng: _rng.Xoshiro256, level: int, steps: int) -> None:
        """Advance until ``steps`` edges have been added within degree level ``level``."""
        while not (self.saturated or self.frozen):
            if self.degree_floor > level:
                return
            if self.degree_floor == level:
                if self.level_steps >= steps:
                    return
                self.advance(rng, steps - self.level_steps, stop_level=True)
            else:
                self.advance(rng, self.config.n * self.k, stop_level=True)


def is_available(state: ProcessState, u: int, v: int) -> bool:
    if u == v:
        return False
    if not (state.in_w(u) and state.in_w(v)):
        return False
    g = state.g
    ws = state.graph.workspace
    d = bidir_distance(state.graph.adj, state.graph.deg, u, v, g - 1,
                       ws.mark, ws.mark2, ws.queue, ws.queue2, ws.epoch)
    return bool(d >= g - 1)


def count_available(state: ProcessState) -> int:
    ws = state.graph.workspace
    return int(count_available_kernel(
        state.graph.adj, state.graph.deg, state.W, state.wpos, state.w_size, state.g,
        state.rowcnt, ws.mark, ws.dist, ws.queue, ws.epoch))


def sample_available_pair(state: ProcessState, rng: _rng.Xoshiro256):
    """Uniform pair from the available set, or ``FROZEN`` if there is none.

    Consumes randomness but leaves the graph untouched.
    """
    ws = state.graph.workspace
    cap = state.config.rejection_cap or 0
    u, v, _, _ = sample_pair_kernel(
        state.graph.adj, state.graph.deg, state.W, state.wpos, state.w_size, state.g,
        state.config.ball_scale, cap, state.config.exact_threshold, rng.state, state.rowcnt,
        ws.mark, ws.mark2, ws.dist, ws.queue, ws.queue2, ws.epoch)
    if u < 0:
        return FROZEN
    return (int(u), int(v)) if u < v else (int(v), int(u))


@njit(cache=True)
def _sample_many(adj, deg, W, wpos, wsize, g, ball_scale, cap, exact_threshold, state,
                 rowcnt, mark, mark2, dist, queue, queue2, epoch, count):
    out = np.empty((count, 2), np.int32)
    for s in range(count):
        u, v, _, _ = sample_pair_kernel(adj, deg, W, wpos, wsize, g, ball_scale, cap,
                                        exact_threshold, state, rowcnt, mark, mark2, dist,
                                        queue, queue2, epoch)
        if u > v:
            u, v = v, u
        out[s, 0] = u
        out[s, 1] = v
    return out


def sample_available_pairs(state: ProcessState, rng: _rng.Xoshiro256, count: int) -> np.ndarray:
    """``count`` independent draws of :func:`sample_available_pair` as an array."""
    if count_available(state) == 0:
        raise ValueError("no available pairs to sample")
    ws = state.graph.workspace
    return _sample_many(state.graph.adj, state.graph.deg, state.W, state.wpos, state.w_size,
                        state.g, state.config.ball_scale, state.config.rejection_cap or 0,
                        state.config.exact_threshold, rng.state, state.rowcnt, ws.mark,
                        ws.mark2, ws.dist, ws.queue, ws.queue2, ws.epoch, count)


def available_pairs(state: ProcessState) -> list[tuple[int, int]]:
    """Explicit list of available pairs (small instances only)."""
    out = []
    w = sorted(int(x) for x in state.unsaturated)
    for i, u in enumerate(w):
        for v in w[i + 1:]:
            if is_available(state, u, v):
                out.append((u, v))
    return out


def step(state: ProcessState, rng: _rng.Xoshiro256) -> StepResult:
    if state.saturated:
        return StepResult.SATURATED
    if state.frozen:
        return StepResult.FROZEN
    if state.advance(rng, 1):
        return StepResult.STEPPED
    return StepResult.SATURATED if state.saturated else StepResult.FROZEN


@dataclass
class RunRecord:
    seed: int
    n: int
    k: int
    g: int
    saturated: bool
    t_freeze: int
    girth_achieved: float
    log_choices: float
    level_log_choices: dict[int, float]
    wall_ms: float
    w_violations: int = 0
    moore_checks: int = 0
    moore_violations: int = 0
    fallbacks: int = 0
    graph: Graph | None = field(default=None, repr=False, compare=False)


SnapshotHook = Callable[[ProcessState], None]


def run(config: ProcessConfig, debug: bool = False, hook: SnapshotHook | None = None,
        checkpoints: Sequence[int] | Callable[[ProcessState], Sequence[int]] | None = None,
        keep_graph: bool = True, trace: bool = False, state_out: list | None = None) -> RunRecord:
    """Run the process to saturation or freeze.

    ``hook`` is called on the live state at every level step listed in
    ``checkpoints`` (or returned by it, when it is a callable of the state)
    and once more at the end.  Hooks must not mutate the state; the random
    stream, and hence the output, does not depend on them.
    """
    t0 = time.perf_counter()
    state = ProcessState(config, debug=debug, trace=trace)
    rng = _rng.Xoshiro256(config.seed)
    total = config.n * config.k  # generous bound on edges to add
    if hook is None:
        state.advance(rng, total)
    else:
        while not (state.saturated or state.frozen):
            marks = checkpoints(state) if callable(checkpoints) else (checkpoints or ())
            if state.level_steps in marks:
                hook(state)
            later = [m for m in marks if m > state.level_steps]
            budget = min(later) - state.level_steps if later else total
            state.advance(rng, budget, stop_level=True)
        hook(state)
    wall = (time.perf_counter() - t0) * 1000.0
    if state_out is not None:
        state_out.append(state)
    g_final = girth(state.graph)
    lev = state.level_log_choices()
    return RunRecord(
        seed=config.seed, n=config.n, k=config.k, g=state.g,
        saturated=state.saturated, t_freeze=state.t, girth_achieved=g_final,
        log_choices=float(lev.sum()),
        level_log_choices={d: float(lev[d]) for d in range(len(lev)) if lev[d] != 0.0},
        wall_ms=wall, w_violations=state.w_violations, moore_checks=state.moore_checks,
        moore_violations=state.moore_violations, fallbacks=int(state.meta[FALLBACKS]),
        graph=state.graph if keep_graph else None,
    )


def _run_one(args):
    config, debug, keep_graph = args
    return run(config, debug=debug, keep_graph=keep_graph)


def batch_run(template: ProcessConfig, seeds: Sequence[int], workers: int = 1,
              debug: bool = False, keep_graph: bool = False) -> list[RunRecord]:
    """One run per seed, returned in seed order whatever ``workers`` is."""
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    jobs = [(template.with_seed(s), debug, keep_graph) for s in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
