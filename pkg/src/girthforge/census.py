"""Counting labeled high-girth regular graphs.

Two independent routes: a lower bound assembled from the log-choice sums of
process runs, and an exhaustive enumerator for tiny ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .diagnostics import BudgetExceeded, budget_from_env
from .graph import Graph
from .process import ProcessConfig, ProcessState, RunRecord, count_available
from .rng import Xoshiro256


def log_factorial(m: int) -> float:
    return math.lgamma(m + 1)


@dataclass
class CountEstimate:
    """Natural-log lower-bound pieces for one run.

    ``total = log_hamilton + sum(level sums) - ln(((k-2)n/2)!) - n ln k``.
    """

    n: int
    k: int
    level_log_choices: dict[int, float] = field(default_factory=dict)

    @property
    def log_hamilton(self) -> float:
        # distinct Hamilton cycles on n labeled vertices
        return log_factorial(self.n) - math.log(2 * self.n)

    @property
    def chord_order_correction(self) -> float:
        return -log_factorial((self.k - 2) * self.n // 2)

    @property
    def hamilton_multiplicity_correction(self) -> float:
        # a k-regular graph has < k^n Hamilton cycles; a 2-regular one has one
        return 0.0 if self.k <= 2 else -self.n * math.log(self.k)

    @property
    def log_choices(self) -> float:
        return sum(self.level_log_choices.values())

    @property
    def total(self) -> float:
        return (self.log_hamilton + self.log_choices + self.chord_order_correction
                + self.hamilton_multiplicity_correction)

    @classmethod
    def from_run(cls, record: RunRecord) -> "CountEstimate":
        return cls(n=record.n, k=record.k, level_log_choices=dict(record.level_log_choices))


def accumulate_log_choices(source) -> dict[int, float]:
    """Per-level sums of ``ln|A_t|`` from a finished run or a live state.

    Levels are keyed by the degree the step raises vertices to (3..k for a
    Hamilton-cycle start).  Counts are exact while ``|W|`` is at most the
    run's ``exact_threshold``; above it each step contributes
    ``ln C(|W|, 2)`` plus the log acceptance rate of its block of
    rejection draws.
    """
    if isinstance(source, RunRecord):
        return dict(source.level_log_choices)
    if isinstance(source, ProcessState):
        lev = source.level_log_choices()
        return {d: float(lev[d]) for d in range(len(lev)) if lev[d] != 0.0}
    raise TypeError(f"expected RunRecord or ProcessState, got {type(source).__name__}")


def replay_log_choices(config: ProcessConfig, edges: Iterable[tuple[int, int]]) -> dict[int, float]:
    """Recompute exact per-level ``ln|A_t|`` by replaying an insertion log."""
    state = ProcessState(config)
    out: dict[int, float] = {}
    for u, v in edges:
        level = state.degree_floor + 1
        out[level] = out.get(level, 0.0) + math.log(count_available(state))
        state.apply_edge(u, v)
    return out


def analytic_reference(n: int, k: int) -> float:
    """``(kn/2) ln n``: the first-order growth of the log count."""
    return k * n / 2.0 * math.log(n)


def assemble_lower_bound(estimates: Iterable[CountEstimate], success_rate: float) -> float:
    """Average the per-run totals and add ``ln(success_rate)``.

    Averaging logs (rather than logging an average) can only lower the
    estimate, so the result stays on the conservative side.
    """
    estimates = list(estimates)
    if success_rate <= 0 or not estimates:
        raise ValueError("need at least one successful run")
    if success_rate > 1:
        raise ValueError(f"success_rate must be <= 1, got {success_rate}")
    mean_total = sum(e.total for e in estimates) / len(estimates)
    return mean_total + math.log(success_rate)


def census_estimate(n: int, k: int, seeds: Iterable[int], c: float | None = None,
                    g: int | None = None, exact_threshold: int | None = None):
    """Run the process per seed and assemble the lower bound.

    Returns ``(log_bound, records)``.
    """
    kwargs = {} if exact_threshold is None else {"exact_threshold": exact_threshold}
    records = []
    for s in seeds:
        from .process import run
        records.append(run(ProcessConfig(n=n, k=k, c=c, g=g, seed=s, **kwargs), keep_graph=False))
    ok = [r for r in records if r.saturated]
    if not ok:
        raise ValueError("no run saturated; cannot assemble a bound")
    bound = assemble_lower_bound([CountEstimate.from_run(r) for r in ok], len(ok) / len(records))
    return bound, records


def enumerate_census(n: int, k: int, g: int, budget: int | None = None) -> Iterator[frozenset]:
    """Yield every labeled k-regular graph on ``n`` vertices with girth ``>= g``.

    Vertices are completed in index order; vertex ``u`` receives its missing
    edges to higher vertices as an increasing combination, so each edge set
    appears exactly once.  An edge is only added when its endpoints are at
    distance ``>= g-1``, which prunes every branch that would close a short
    cycle.
    """
    if n > 10:
        raise ValueError("exhaustive census is limited to n <= 10")
    if (k * n) % 2 or k >= n:
        return
    budget = budget_from_env() if budget is None else budget
    adj: list[set[int]] = [set() for _ in range(n)]
    edges: list[tuple[int, int]] = []
    nodes = 0

    def far_enough(u: int, v: int) -> bool:
        if g <= 3:
            return v not in adj[u]
        # BFS from u to depth g-2; v must not be reached
        seen = {u}
        frontier = [u]
        for _ in range(g - 2):
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y == v:
                        return False
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return True

    def fill(u: int, lo: int) -> Iterator[frozenset]:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"census search passed {budget} nodes")
        if u == n:
            yield frozenset(edges)
            return
        need = k - len(adj[u])
        if need == 0:
            yield from fill(u + 1, u + 2)
            return
        # not enough higher vertices left to satisfy u
        if n - lo < need:
            return
        for w in range(lo, n):
            if len(adj[w]) >= k or not far_enough(u, w):
                continue
            adj[u].add(w)
            adj[w].add(u)
            edges.append((u, w))
            yield from fill(u, w + 1)
            edges.pop()
            adj[u].discard(w)
            adj[w].discard(u)

    yield from fill(0, 1)


def brute_force_census(n: int, k: int, g: int, budget: int | None = None) -> int:
    return sum(1 for _ in enumerate_census(n, k, g, budget))


def graph_key(graph: Graph) -> frozenset:
    return frozenset(graph.edges())
