import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from girthforge.formats import (RUN_CSV_HEADER, fmt_float, format_edgelist, format_run_csv,
                                parse_edgelist, read_edgelist, write_edgelist, write_run_csv)
from girthforge.graph import Graph, GraphError, hamilton_cycle
from girthforge.process import ProcessConfig, run


def test_edgelist_text_is_canonical():
    g = Graph.from_edges(4, [(2, 3), (0, 1), (1, 2), (0, 3)])
    assert format_edgelist(g) == "4 4\n0 1\n0 3\n1 2\n2 3\n"


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.data())
def test_edgelist_round_trip(n, data):
    pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                              .filter(lambda e: e[0] < e[1]), max_size=40))
    g = Graph.from_edges(n, sorted(pairs))
    text = format_edgelist(g)
    h = parse_edgelist(text)
    assert h.edges() == g.edges() and h.n == g.n
    assert format_edgelist(h) == text


def test_file_round_trip(tmp_path):
    g = run(ProcessConfig(n=64, k=3, g=4, seed=1)).graph
    p = tmp_path / "g.txt"
    write_edgelist(g, p)
    assert read_edgelist(p).edges() == g.edges()
    assert b"\r" not in p.read_bytes()


@pytest.mark.parametrize("text", ["", "3 2\n0 1\n", "x y\n", "3 1\n0 1 2\n"])
def test_parse_errors(text):
    with pytest.raises(GraphError):
        parse_edgelist(text)


def test_read_missing_file_names_path(tmp_path):
    with pytest.raises(OSError, match="nope.txt"):
        read_edgelist(tmp_path / "nope.txt")


def test_run_csv_shapes(tmp_path):
    assert format_run_csv([]) == ",".join(RUN_CSV_HEADER) + "\n"
    recs = [run(ProcessConfig(n=20, k=3, g=4, seed=s), keep_graph=False) for s in (1, 2)]
    text = format_run_csv(recs)
    assert len(text.splitlines()) == 3
    assert text.splitlines()[0] == "seed,n,k,g,saturated,t_freeze,girth,log_choices,wall_ms"
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_run_csv(recs, p1)
    write_run_csv(recs, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_fmt_float_nine_digits():
    assert fmt_float(1 / 3) == "0.333333333"
    assert fmt_float(2.0) == "2"
