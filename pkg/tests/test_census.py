import math
from collections import defaultdict

import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from girthforge.census import (CountEstimate, accumulate_log_choices, analytic_reference,
                               assemble_lower_bound, brute_force_census, enumerate_census,
                               replay_log_choices)
from girthforge.diagnostics import BudgetExceeded
from girthforge.process import ProcessConfig, ProcessState, run
from girthforge.rng import Xoshiro256


@pytest.mark.parametrize("n,k,g,count", [
    (6, 3, 4, 10), (6, 3, 3, 70), (6, 3, 5, 0), (4, 3, 3, 1), (8, 3, 5, 0),
    (8, 3, 3, 19355), (8, 3, 4, 3360), (10, 3, 5, 30240), (5, 4, 3, 1), (7, 3, 3, 0),
])
def test_census_values(n, k, g, count):
    assert brute_force_census(n, k, g) == count


def _orbit_sum(n, graphs):
    # independent route: group by isomorphism class, each class has n!/|Aut| labelings
    classes = []
    sizes = defaultdict(int)
    for edges in graphs:
        G = nx.Graph(list(edges))
        # spectrum as a bucket key (WL hashing cannot split regular graphs)
        h = tuple(np.round(np.linalg.eigvalsh(nx.to_numpy_array(G, nodelist=range(n))), 6))
        for i, (rh, rep) in enumerate(classes):
            if rh == h and nx.is_isomorphic(G, rep):
                sizes[i] += 1
                break
        else:
            classes.append((h, G))
            sizes[len(classes) - 1] += 1
    total = 0
    for i, (_, rep) in enumerate(classes):
        aut = sum(1 for _ in GraphMatcher(rep, rep).isomorphisms_iter())
        assert sizes[i] == math.factorial(n) // aut
        total += math.factorial(n) // aut
    return total, len(classes)


@pytest.mark.parametrize("n,k,g,classes", [(6, 3, 4, 1), (6, 3, 3, 2), (8, 3, 4, 2)])
def test_census_automorphism_cross_check(n, k, g, classes):
    graphs = list(enumerate_census(n, k, g))
    total, found = _orbit_sum(n, graphs)
    assert total == len(graphs) and found == classes
    assert len(set(graphs)) == len(graphs)


def test_enumerated_graphs_are_valid():
    from girthforge.graph import Graph, girth
    for edges in enumerate_census(8, 3, 4):
        g = Graph.from_edges(8, sorted(edges))
        assert g.is_regular(3) and girth(g) >= 4


def test_census_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_census(10, 3, 3, budget=1000)
    with pytest.raises(ValueError):
        brute_force_census(12, 3, 5)


def test_saturated_outputs_are_census_members():
    members = set(enumerate_census(8, 3, 4))
    seen = 0
    for seed in range(200):
        rec = run(ProcessConfig(n=8, k=3, g=4, seed=seed))
        if rec.saturated:
            seen += 1
            assert frozenset(rec.graph.edges()) in members
    assert seen > 100


# (10, 3, 5) is left out: its only member, the Petersen graph, has no Hamilton cycle,
# so a Hamilton-cycle start can never saturate there
@pytest.mark.parametrize("n,k,g", [(8, 3, 3), (8, 3, 4), (6, 3, 3), (6, 3, 4)])
def test_assembled_bound_below_exact(n, k, g):
    recs = [run(ProcessConfig(n=n, k=k, g=g, seed=s), keep_graph=False) for s in range(300)]
    ok = [r for r in recs if r.saturated]
    bound = assemble_lower_bound([CountEstimate.from_run(r) for r in ok], len(ok) / len(recs))
    assert bound <= math.log(brute_force_census(n, k, g))


def test_count_estimate_pieces():
    e = CountEstimate(n=10, k=2)
    assert e.total == pytest.approx(math.lgamma(11) - math.log(20))
    assert assemble_lower_bound([e], 1.0) == pytest.approx(e.log_hamilton)
    e3 = CountEstimate(n=10, k=3, level_log_choices={3: 7.0})
    want = math.lgamma(11) - math.log(20) + 7.0 - math.lgamma(6) - 10 * math.log(3)
    assert e3.total == pytest.approx(want)
    with pytest.raises(ValueError):
        assemble_lower_bound([], 0.0)
    with pytest.raises(ValueError):
        assemble_lower_bound([e3], 0.0)


def test_accumulate_examples():
    s = ProcessState(ProcessConfig(n=4, k=3, g=4, start=None if False else __import__(
        "girthforge.graph", fromlist=["hamilton_cycle"]).hamilton_cycle(4, 3)))
    s.advance(Xoshiro256(0), 10)
    assert s.frozen and accumulate_log_choices(s) == {}
    rec = run(ProcessConfig(n=4, k=3, g=3, seed=1))
    assert sum(accumulate_log_choices(rec).values()) == pytest.approx(math.log(2))
    with pytest.raises(TypeError):
        accumulate_log_choices(3)


@pytest.mark.parametrize("n,k,c,seed", [(60, 3, 0.5, 1), (80, 4, 0.5, 2)])
def test_replay_matches_accumulated_exact(n, k, c, seed):
    cfg = ProcessConfig(n=n, k=k, c=c, seed=seed, exact_threshold=n)
    states = []
    rec = run(cfg, trace=True, state_out=states)
    replay = replay_log_choices(cfg, states[0].edge_log())
    assert replay.keys() == rec.level_log_choices.keys()
    for d in replay:
        assert replay[d] == pytest.approx(rec.level_log_choices[d], rel=1e-12)


def test_estimator_close_to_exact_sum():
    # rejection-based block estimate vs the exact replay on the same run
    cfg = ProcessConfig(n=2000, k=3, c=0.5, seed=4)
    states = []
    rec = run(cfg, trace=True, state_out=states)
    exact = sum(replay_log_choices(cfg, states[0].edge_log()).values())
    assert abs(rec.log_choices - exact) / exact < 2e-3


def test_growth_tracks_reference():
    # bound minus (kn/2) ln n should be linear in n: equal per-vertex offsets
    offsets = []
    for n in (64, 128, 256, 512):
        recs = [run(ProcessConfig(n=n, k=3, c=0.5, seed=s), keep_graph=False) for s in range(20)]
        ok = [r for r in recs if r.saturated]
        b = assemble_lower_bound([CountEstimate.from_run(r) for r in ok], len(ok) / len(recs))
        offsets.append((b - analytic_reference(n, 3)) / n)
    assert max(offsets) - min(offsets) < 0.2
    assert all(-4 < o < 0 for o in offsets)
