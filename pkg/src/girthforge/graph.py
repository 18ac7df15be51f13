"""Bounded-degree simple graphs with truncated BFS queries.

Adjacency is a fixed ``(n, k_max)`` int32 array padded with ``-1``; degrees
never exceed ``k_max``, so nothing is reallocated while the process runs.
BFS scratch space is epoch-stamped: a query bumps a counter instead of
clearing ``O(n)`` visited marks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from numba import njit


class GraphError(ValueError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class DegreeOverflowError(GraphError):
    pass


class InvalidVertexError(GraphError, IndexError):
    pass


@dataclass(frozen=True)
class AtLeast:
    """Distance marker for pairs whose distance is ``>= cap``."""

    cap: int

    def __int__(self) -> int:
        return self.cap


class Workspace(NamedTuple):
    mark: np.ndarray
    mark2: np.ndarray
    dist: np.ndarray
    parent: np.ndarray
    queue: np.ndarray
    queue2: np.ndarray
    epoch: np.ndarray


def make_workspace(n: int) -> Workspace:
    return Workspace(
        mark=np.zeros(n, np.int64),
        mark2=np.zeros(n, np.int64),
        dist=np.zeros(n, np.int32),
        parent=np.zeros(n, np.int32),
        queue=np.zeros(max(n, 1), np.int32),
        queue2=np.zeros(max(n, 1), np.int32),
        epoch=np.zeros(1, np.int64),
    )


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def link(adj, deg, degree_count, u, v):
    """Append edge ``uv``; callers have already validated it."""
    du = deg[u]
    dv = deg[v]
    adj[u, du] = v
    adj[v, dv] = u
    deg[u] = du + 1
    deg[v] = dv + 1
    degree_count[du] -= 1
    degree_count[du + 1] += 1
    degree_count[dv] -= 1
    degree_count[dv + 1] += 1


@njit(cache=True)
def adjacent(adj, deg, u, v):
    for j in range(deg[u]):
        if adj[u, j] == v:
            return True
    return False


@njit(cache=True)
def bidir_distance(adj, deg, u, v, cap, mark, mark2, queue, queue2, epoch):
    """Exact ``dist(u, v)`` if it is below ``cap``, otherwise ``cap``.

    Grows two BFS balls, always the one with the smaller frontier.  The
    first vertex reached from both sides closes a path of length
    ``ra + rb + 1``, which is then the exact distance.
    """
    if u == v:
        return 0
    epoch[0] += 1
    e = epoch[0]
    mark[u] = e
    mark2[v] = e
    queue[0] = u
    queue2[0] = v
    a_lo, a_hi, ra = 0, 1, 0
    b_lo, b_hi, rb = 0, 1, 0
    while ra + rb < cap - 1:
        if a_hi == a_lo or b_hi == b_lo:
            return cap
        if a_hi - a_lo <= b_hi - b_lo:
            end = a_hi
            for i in range(a_lo, end):
                x = queue[i]
                for j in range(deg[x]):
                    y = adj[x, j]
                    if mark2[y] == e:
                        return ra + rb + 1
                    if mark[y] != e:
                        mark[y] = e
                        queue[a_hi] = y
                        a_hi += 1
            a_lo = end
            ra += 1
        else:
            end = b_hi
            for i in range(b_lo, end):
                x = queue2[i]
                for j in range(deg[x]):
                    y = adj[x, j]
                    if mark[y] == e:
                        return ra + rb + 1
                    if mark2[y] != e:
                        mark2[y] = e
                        queue2[b_hi] = y
                        b_hi += 1
            b_lo = end
            rb += 1
    return cap


@njit(cache=True)
def bfs_ball(adj, deg, src, depth, mark, dist, queue, epoch):
    """BFS from ``src`` to ``depth`` hops.

    Returns the number of reached vertices; they sit in ``queue[:count]`` in
    BFS order with ``dist`` filled and ``mark == epoch[0]``.
    """
    epoch[0] += 1
    e = epoch[0]
    mark[src] = e
    dist[src] = 0
    queue[0] = src
    lo, hi = 0, 1
    while lo < hi:
        x = queue[lo]
        lo += 1
        dx = dist[x]
        if dx >= depth:
            continue
        for j in range(deg[x]):
            y = adj[x, j]
            if mark[y] != e:
                mark[y] = e
                dist[y] = dx + 1
                queue[hi] = y
                hi += 1
    return hi


@njit(cache=True)
def layer_counts(adj, deg, src, depth, mark, dist, queue, epoch):
    out = np.zeros(depth + 1, np.int64)
    cnt = bfs_ball(adj, deg, src, depth, mark, dist, queue, epoch)
    for i in range(cnt):
        out[dist[queue[i]]] += 1
    return out


_NO_CYCLE = np.iinfo(np.int64).max


@njit(cache=True)
def girth_kernel(adj, deg, n, mark, dist, parent, queue, epoch):
    best = _NO_CYCLE
    for r in range(n):
        epoch[0] += 1
        e = epoch[0]
        mark[r] = e
        dist[r] = 0
        parent[r] = -1
        queue[0] = r
        lo, hi = 0, 1
        while lo < hi:
            x = queue[lo]
            lo += 1
            dx = dist[x]
            # a cycle closed from depth dx has length >= 2*dx
            if 2 * dx >= best:
                break
            for j in range(deg[x]):
                y = adj[x, j]
                if mark[y] != e:
                    mark[y] = e
                    dist[y] = dx + 1
                    parent[y] = x
                    queue[hi] = y
                    hi += 1
                elif y != parent[x]:
                    c = dx + dist[y] + 1
                    if c < best:
                        best = c
        if best == 3:
            break
    return best


@njit(cache=True)
def eccentricity_kernel(adj, deg, n, mark, dist, queue, epoch):
    """Per-vertex eccentricity; ``-1`` marks a vertex that misses part of the graph."""
    ecc = np.empty(n, np.int64)
    for r in range(n):
        cnt = bfs_ball(adj, deg, r, n, mark, dist, queue, epoch)
        if cnt < n:
            ecc[r] = -1
        else:
            ecc[r] = dist[queue[cnt - 1]]
    return ecc


# ---------------------------------------------------------------------------


class Graph:
    """Simple undirected graph on ``0..n-1`` with every degree ``<= k_max``.

    >>> g = hamilton_cycle(6, 3)
    >>> g.add_edge(0, 3)
    >>> g.degree(0), g.edge_count
    (3, 7)
    """

    def __init__(self, n: int, k_max: int):
        if n < 0 or k_max < 0:
            raise GraphError(f"need n >= 0 and k_max >= 0, got n={n}, k_max={k_max}")
        self.n = int(n)
        self.k_max = int(k_max)
        self.adj = np.full((self.n, self.k_max), -1, dtype=np.int32)
        self.deg = np.zeros(self.n, dtype=np.int32)
        # number of vertices at each degree
        self.degree_count = np.zeros(self.k_max + 1, dtype=np.int64)
        self.degree_count[0] = self.n
        self.edge_count = 0
        self._ws: Workspace | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], k_max: int | None = None) -> "Graph":
        edges = [(int(u), int(v)) for u, v in edges]
        if k_max is None:
            counts = np.zeros(n, np.int64)
            for u, v in edges:
                if 0 <= u < n:
                    counts[u] += 1
                if 0 <= v < n:
                    counts[v] += 1
            k_max = int(counts.max()) if n else 0
        g = cls(n, k_max)
        for u, v in edges:
            g.add_edge(u, v)
        return g

    @property
    def workspace(self) -> Workspace:
        if self._ws is None:
            self._ws = make_workspace(self.n)
        return self._ws

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise InvalidVertexError(f"vertex {v} out of range for n={self.n}")

    def add_edge(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise SelfLoopError(f"self-loop at {u}")
        if self.has_edge(u, v):
            raise DuplicateEdgeError(f"edge ({u}, {v}) already present")
        for w in (u, v):
            if self.deg[w] >= self.k_max:
                raise DegreeOverflowError(f"vertex {w} already has degree {self.k_max}")
        link(self.adj, self.deg, self.degree_count, u, v)
        self.edge_count += 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(adjacent(self.adj, self.deg, u, v))

    def degree(self, v: int) -> int:
        return int(self.deg[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj[v, : self.deg[v]]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, sorted lexicographically."""
        out = []
        for u in range(self.n):
            for v in sorted(int(x) for x in self.neighbors(u) if x > u):
                out.append((u, v))
        return out

    def min_degree(self) -> int:
        return int(self.deg.min()) if self.n else 0

    def max_degree(self) -> int:
        return int(self.deg.max()) if self.n else 0

    def is_regular(self, k: int) -> bool:
        return bool(self.n and self.degree_count[k] == self.n) if k <= self.k_max else False

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.n, g.k_max = self.n, self.k_max
        g.adj = self.adj.copy()
        g.deg = self.deg.copy()
        g.degree_count = self.degree_count.copy()
        g.edge_count = self.edge_count
        g._ws = None
        return g

    def with_capacity(self, k_max: int) -> "Graph":
        """Copy with a different degree cap (must fit the current degrees)."""
        if self.n and self.max_degree() > k_max:
            raise DegreeOverflowError(f"max degree {self.max_degree()} exceeds k_max={k_max}")
        return Graph.from_edges(self.n, self.edges(), k_max=k_max)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges() == other.edges()

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count}, k_max={self.k_max})"


def hamilton_cycle(n: int, k_max: int) -> Graph:
    """The cycle ``0-1-...-(n-1)-0`` with room for degree ``k_max``."""
    if n < 4 or n % 2:
        raise GraphError(f"Hamilton cycle start needs even n >= 4, got {n}")
    if k_max < 3:
        raise GraphError(f"k_max must be >= 3, got {k_max}")
    g = Graph(n, k_max)
    for v in range(n):
        g.add_edge(v, (v + 1) % n)
    return g


def cycle_graph(n: int) -> Graph:
    """The plain ``n``-cycle, any ``n >= 3``, with no spare degree."""
    if n < 3:
        raise GraphError(f"a cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def truncated_distance(g: Graph, u: int, v: int, cap: int) -> int | AtLeast:
    g._check_vertex(u)
    g._check_vertex(v)
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    ws = g.workspace
    d = bidir_distance(g.adj, g.deg, u, v, cap, ws.mark, ws.mark2, ws.queue, ws.queue2, ws.epoch)
    return AtLeast(cap) if d >= cap else int(d)


def distance(g: Graph, u: int, v: int) -> float:
    """Plain BFS distance, ``inf`` when disconnected."""
    d = truncated_distance(g, u, v, max(g.n, 1))
    return math.inf if isinstance(d, AtLeast) else d


def distance_layers(g: Graph, v: int, depth: int) -> np.ndarray:
    """``out[l]`` = number of vertices at distance exactly ``l`` from ``v``."""
    g._check_vertex(v)
    ws = g.workspace
    return layer_counts(g.adj, g.deg, v, depth, ws.mark, ws.dist, ws.queue, ws.epoch)


def ball_size(g: Graph, v: int, ell: int) -> int:
    """Vertices other than ``v`` within distance ``ell``."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    return int(distance_layers(g, v, ell).sum() - 1)


def girth(g: Graph) -> float:
    """Length of a shortest cycle; ``math.inf`` for forests."""
    if g.n == 0:
        return math.inf
    ws = g.workspace
    best = girth_kernel(g.adj, g.deg, g.n, ws.mark, ws.dist, ws.parent, ws.queue, ws.epoch)
    return math.inf if best == _NO_CYCLE else int(best)
