import itertools
import math

import networkx as nx
import numpy as np
import pytest

from girthforge.diagnostics import (BudgetExceeded, SnapshotLog, count_threatening_paths,
                                    default_checkpoints, is_path_bounded, is_safe, path_stats,
                                    threatening_bound)
from girthforge.graph import AtLeast, Graph, hamilton_cycle
from girthforge.process import ProcessConfig, ProcessState, run
from girthforge.rng import Xoshiro256

from conftest import from_nx, to_nx


def c12_state(g):
    return ProcessState(ProcessConfig(n=12, k=3, g=g))


def test_path_stats_on_c12():
    ps = path_stats(c12_state(5))
    assert list(ps.P[1:]) == [12, 12, 12]
    assert ps.forbidden_count == 36 and ps.available_count == 30
    assert list(ps.Pv(0)[1:]) == [2, 2, 2]
    assert ps.forbidden_count + ps.available_count == math.comb(ps.w_size, 2)


def test_path_stats_zero_when_saturated():
    states = []
    rec = run(ProcessConfig(n=40, k=3, g=4, seed=1), state_out=states)
    assert rec.saturated
    ps = path_stats(states[0])
    assert ps.w_size == 0 and not ps.P.any()


def test_path_stats_match_networkx_distances():
    for seed in range(5):
        s = ProcessState(ProcessConfig(n=200, k=4, g=6, seed=seed))
        s.advance(Xoshiro256(seed), 180)
        ps = path_stats(s)
        G = to_nx(s.graph)
        w = sorted(int(x) for x in s.unsaturated)
        want = np.zeros(s.g - 1, np.int64)
        for u, v in itertools.combinations(w, 2):
            try:
                d = nx.shortest_path_length(G, u, v)
            except nx.NetworkXNoPath:
                continue
            if d <= s.g - 2:
                want[d] += 1
        assert list(ps.P) == list(want)
        assert ps.P.sum() * 2 == ps.per_vertex.sum()


def test_is_safe_examples():
    rep = is_safe(c12_state(5))
    assert not rep.safe and not rep.level_safe
    assert rep.min_distance == 1 and rep.violating_pair is not None
    u, v = rep.violating_pair
    assert min(abs(u - v), 12 - abs(u - v)) == 1
    s = c12_state(5)
    s.set_unsaturated([0, 6])
    rep = is_safe(s)
    assert rep.safe and rep.min_distance == 6
    states = []
    run(ProcessConfig(n=40, k=3, g=4, seed=1), state_out=states)
    assert is_safe(states[0]).safe


def test_is_safe_needs_degrees_near_k():
    # C12 with k=4: degrees are 2 = k-2, so never safe even with a far-apart W
    s = ProcessState(ProcessConfig(n=12, k=4, g=5))
    s.set_unsaturated([0, 6])
    rep = is_safe(s)
    assert rep.level_safe and not rep.safe


def test_is_safe_large_w_reports_lower_bound():
    s = ProcessState(ProcessConfig(n=400, k=3, g=3))
    s.set_unsaturated(list(range(0, 400, 4)))
    rep = is_safe(s)
    assert rep.safe and rep.min_distance == AtLeast(2)


def test_path_bounded_examples():
    states = []
    run(ProcessConfig(n=40, k=3, g=4, seed=1), state_out=states)
    assert is_path_bounded(states[0], 1.0).bounded
    assert is_path_bounded(c12_state(5), 10.0).bounded


def test_path_bounded_fails_for_clustered_w():
    # W packed into one ball of a long cycle: each vertex sees the maximum 2 per distance
    n = 4000
    s = ProcessState(ProcessConfig(n=n, k=3, g=12))
    s.set_unsaturated(list(range(40)))
    rep = is_path_bounded(s, 0.1)
    assert not rep.bounded and rep.worst > 1


def _threatening_oracle(base: Graph, ell: int, a: int) -> int:
    # enumerate vertex sequences directly
    E = set(base.edges())
    n = base.n
    count = 0
    for seq in itertools.permutations(range(n), ell + 1):
        chords = [(min(x, y), max(x, y)) not in E for x, y in zip(seq, seq[1:])]
        if chords[0] or chords[-1] or sum(chords) != a:
            continue
        if any(c1 and c2 for c1, c2 in zip(chords, chords[1:])):
            continue
        count += 1
    return count


def _bases():
    out = []
    for n in range(4, 9):
        out.append(("cycle", hamilton_cycle(n, 3) if n % 2 == 0 else from_nx(nx.cycle_graph(n))))
    for n in (4, 6, 8):
        out.append(("cubic", from_nx(nx.random_regular_graph(3, n, seed=n))))
    for seed in range(3):
        out.append(("gnm", from_nx(nx.gnm_random_graph(7, 9, seed=seed))))
    return out


def test_threatening_examples():
    c6 = hamilton_cycle(6, 3)
    assert count_threatening_paths(c6, 1, 0) == 12
    assert count_threatening_paths(c6, 3, 2) == 0
    assert count_threatening_paths(c6, 3, 1) <= 6**2 * 2**3


@pytest.mark.parametrize("name,base", _bases(), ids=lambda x: x if isinstance(x, str) else "")
def test_threatening_counts_match_oracle(name, base):
    for ell in range(1, 6):
        for a in range(0, 3):
            got = count_threatening_paths(base, ell, a)
            assert got == _threatening_oracle(base, ell, a)
            assert got <= threatening_bound(base.n, base.max_degree() + 1, ell, a)


def test_threatening_budget():
    with pytest.raises(BudgetExceeded):
        count_threatening_paths(hamilton_cycle(8, 3), 5, 2, budget=100)
    with pytest.raises(ValueError):
        count_threatening_paths(hamilton_cycle(8, 3), 0, 0)


def test_default_checkpoints_and_snapshot_log():
    s = ProcessState(ProcessConfig(n=200, k=3, c=0.5))
    marks = default_checkpoints(s)
    assert marks[0] == 0 and marks[-1] == 100 and marks == sorted(set(marks))
    log = SnapshotLog()
    rec = run(ProcessConfig(n=200, k=3, c=0.5, seed=2), hook=log, checkpoints=default_checkpoints)
    assert len(log.reports) >= len(marks)
    assert log.ever_safe == any(r[3] for r in log.reports)
    if log.ever_safe:
        assert rec.saturated
