import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from girthforge.formats import format_run_csv
from girthforge.graph import Graph, girth, hamilton_cycle
from girthforge.process import (FROZEN, ConfigError, ProcessConfig, ProcessState, StepResult,
                                available_pairs, batch_run, count_available, derive_girth_target,
                                is_available, rejection_cap, run, sample_available_pair,
                                sample_available_pairs, step)
from girthforge.rng import Xoshiro256


def c12_state(g, **kw):
    return ProcessState(ProcessConfig(n=12, k=3, g=g, **kw))


def test_derive_girth_target():
    assert derive_girth_target(1024, 3, 0.5) == 5
    assert derive_girth_target(16, 3, 0.3) == 3
    with pytest.raises(ConfigError):
        derive_girth_target(3**10, 4, 1.0)


@pytest.mark.parametrize("kw", [
    dict(n=101, k=3, c=0.5), dict(n=2, k=3, g=3), dict(n=10, k=2, g=3),
    dict(n=10, k=3), dict(n=10, k=3, g=4, c=0.5), dict(n=10, k=3, g=11),
    dict(n=10, k=3, g=7),  # Hamilton start needs n >= 2(g-1)
])
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        ProcessConfig(**kw)


def test_config_start_checks():
    with pytest.raises(ConfigError):
        ProcessConfig(n=8, k=3, g=3, start=hamilton_cycle(6, 3))
    ProcessConfig(n=4, k=3, g=3)  # C4 start at n = 2(g-1)


def test_is_available_on_c12():
    s = c12_state(4)
    assert is_available(s, 0, 6)
    assert not is_available(s, 0, 1)
    assert not is_available(s, 0, 2)
    assert not is_available(s, 3, 3)


def test_count_available_examples():
    assert count_available(c12_state(4)) == 42
    assert count_available(c12_state(3)) == 54
    s = c12_state(4)
    s.set_unsaturated([5])
    assert count_available(s) == 0
    assert len(available_pairs(c12_state(4))) == 42


def test_sample_never_returns_forbidden_pair():
    s = c12_state(4)
    draws = sample_available_pairs(s, Xoshiro256(1), 2000)
    for u, v in draws:
        d = min(abs(u - v), 12 - abs(u - v))
        assert d >= 3


@pytest.mark.parametrize("exact_threshold", [64, 0])
def test_sampler_uniform_on_c12(exact_threshold):
    # exact_threshold=0 forces the rejection route
    s = c12_state(4, exact_threshold=exact_threshold)
    pairs = available_pairs(s)
    index = {p: i for i, p in enumerate(pairs)}
    draws = sample_available_pairs(s, Xoshiro256(2024 + exact_threshold), 10**6)
    counts = np.bincount([index[(int(u), int(v))] for u, v in draws], minlength=len(pairs))
    assert counts.sum() == 10**6
    assert chisquare(counts).pvalue > 1e-3


def test_frozen_is_exact_and_sticky():
    start = hamilton_cycle(4, 3)  # C4 with g=4: every pair within distance 2
    s = ProcessState(ProcessConfig(n=4, k=3, g=4, start=start))
    assert count_available(s) == 0
    assert sample_available_pair(s, Xoshiro256(0)) is FROZEN
    rng = Xoshiro256(0)
    assert step(s, rng) is StepResult.FROZEN
    assert step(s, rng) is StepResult.FROZEN
    assert s.graph.edge_count == 4


def test_c4_becomes_k4():
    s = ProcessState(ProcessConfig(n=4, k=3, g=3, seed=5))
    rng = Xoshiro256(5)
    assert step(s, rng) is StepResult.STEPPED
    assert step(s, rng) is StepResult.STEPPED
    assert s.graph.edges() == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert step(s, rng) is StepResult.SATURATED
    assert s.graph.edge_count == 6
    assert s.log_choices == pytest.approx(math.log(2))


def test_first_step_on_c12_logs_ln42():
    s = c12_state(4)
    s.advance(Xoshiro256(0), 1)
    assert s.log_choices == pytest.approx(math.log(42))


def test_rejection_cap_floor_and_growth():
    assert rejection_cap(10, 1.0) >= 1000
    assert rejection_cap(10**6, 10.0) >= 200


def _level_sizes_from_trace(n, k, edges):
    # independent replay: min-degree class sizes after each step
    deg = [2] * n
    sizes = []
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
        d = min(deg)
        sizes.append((d, sum(1 for x in deg if x == d)))
    return sizes


@pytest.mark.parametrize("n,k,c,seed", [(400, 3, 0.5, 1), (400, 4, 0.5, 2), (1000, 5, 0.4, 3)])
def test_w_shrinks_by_two_per_step(n, k, c, seed):
    states = []
    rec = run(ProcessConfig(n=n, k=k, c=c, seed=seed), debug=True, trace=True, state_out=states)
    assert rec.w_violations == 0 and rec.moore_violations == 0 and rec.moore_checks > 0
    st = states[0]
    sizes = _level_sizes_from_trace(n, k, st.edge_log())
    prev_d, prev = 2, n
    for t, (d, size) in enumerate(sizes):
        if d == prev_d:
            assert size == prev - 2
            assert st.trace[t, 0] == size
        else:
            # level completed: the previous class emptied
            assert prev == 2 and d == prev_d + 1
        prev_d, prev = d, size


def test_saturated_runs_are_regular_with_girth():
    for seed in range(30):
        rec = run(ProcessConfig(n=300, k=3, c=0.5, seed=seed))
        if rec.saturated:
            assert rec.graph.is_regular(3)
            assert girth(rec.graph) >= rec.g == rec.girth_achieved or girth(rec.graph) >= rec.g
            assert rec.t_freeze == 300 * 3 // 2 - 300


def test_external_start_keeps_min_girth():
    base = run(ProcessConfig(n=60, k=3, g=5, seed=4)).graph
    rec = run(ProcessConfig(n=60, k=4, g=5, seed=9, start=base))
    if rec.saturated:
        assert rec.graph.is_regular(4)
        assert girth(rec.graph) >= min(5, girth(base))


def test_run_is_deterministic():
    cfg = ProcessConfig(n=500, k=3, c=0.5, seed=77)
    a, b = run(cfg), run(cfg)
    assert a.graph.edges() == b.graph.edges()
    assert (a.saturated, a.t_freeze, a.log_choices) == (b.saturated, b.t_freeze, b.log_choices)


def test_hook_does_not_change_output():
    from girthforge.diagnostics import SnapshotLog, default_checkpoints
    cfg = ProcessConfig(n=300, k=4, c=0.5, seed=3)
    log = SnapshotLog()
    a = run(cfg, hook=log, checkpoints=default_checkpoints)
    b = run(cfg)
    assert a.graph.edges() == b.graph.edges()
    assert len(log.reports) > 5


def test_batch_matches_standalone_and_workers():
    template = ProcessConfig(n=100, k=3, c=0.5)
    assert batch_run(template, []) == []
    two = batch_run(template, [5, 6], keep_graph=True)
    for rec, s in zip(two, [5, 6]):
        alone = run(template.with_seed(s))
        assert rec.graph.edges() == alone.graph.edges()
        assert rec.log_choices == alone.log_choices
    seeds = list(range(100))
    strip = lambda rs: [r.__class__(**{**r.__dict__, "wall_ms": 0.0}) for r in rs]
    one = format_run_csv(strip(batch_run(template, seeds, workers=1)))
    many = format_run_csv(strip(batch_run(template, seeds, workers=3)))
    assert one == many
    with pytest.raises(ConfigError):
        batch_run(template, [1, 1])


def test_saturation_probability_matches_game_tree():
    # exact P(saturate) for C8, k=3, g=3 from a rational game-tree oracle: 613/825
    p = float(Fraction(613, 825))
    runs = 6000
    hits = sum(run(ProcessConfig(n=8, k=3, g=3, seed=s), keep_graph=False).saturated
               for s in range(runs))
    sd = math.sqrt(p * (1 - p) / runs)
    assert abs(hits / runs - p) < 4 * sd


def test_saturation_probability_n6():
    p = 2 / 3
    runs = 6000
    hits = sum(run(ProcessConfig(n=6, k=3, g=3, seed=s), keep_graph=False).saturated
               for s in range(runs))
    assert abs(hits / runs - p) < 4 * math.sqrt(p * (1 - p) / runs)
