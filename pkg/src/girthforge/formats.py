"""Text formats: canonical edge lists and the per-run CSV."""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable, Sequence

from .graph import Graph, GraphError

RUN_CSV_HEADER = ("seed", "n", "k", "g", "saturated", "t_freeze", "girth", "log_choices", "wall_ms")


def fmt_float(x: float) -> str:
    """Floats go out with 9 significant digits so golden files stay stable."""
    return format(float(x), ".9g")


def format_edgelist(g: Graph) -> str:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(lines) + "\n"


def write_edgelist(g: Graph, path: str | os.PathLike) -> None:
    write_text(path, format_edgelist(g))


def parse_edgelist(text: str, k_max: int | None = None) -> Graph:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise GraphError("empty edge list")
    try:
        n, m = (int(x) for x in lines[0].split())
        edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    if len(edges) != m or any(len(e) != 2 for e in edges):
        raise GraphError(f"header announces {m} edges, found {len(edges)} lines")
    return Graph.from_edges(n, edges, k_max=k_max)


def read_edgelist(path: str | os.PathLike, k_max: int | None = None) -> Graph:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {os.fspath(path)}: {exc.strerror}") from exc
    return parse_edgelist(text, k_max=k_max)


def run_rows(records: Iterable) -> list[list[str]]:
    rows = []
    for r in records:
        rows.append([
            str(r.seed), str(r.n), str(r.k), str(r.g),
            "1" if r.saturated else "0",
            str(r.t_freeze),
            "inf" if r.girth_achieved == float("inf") else str(int(r.girth_achieved)),
            fmt_float(r.log_choices),
            fmt_float(r.wall_ms),
        ])
    return rows


def format_run_csv(records: Iterable) -> str:
    return format_csv(RUN_CSV_HEADER, run_rows(records))


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_text(path: str | os.PathLike, text: str) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror}") from exc


def write_run_csv(records: Iterable, path: str | os.PathLike) -> None:
    write_text(path, format_run_csv(records))
