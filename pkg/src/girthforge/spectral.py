"""Large-scale geometry of generated graphs: short cycles, diameter, spectrum."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .diagnostics import BudgetExceeded, budget_from_env
from .graph import Graph, GraphError, bfs_ball, eccentricity_kernel, girth


class ConvergenceError(RuntimeError):
    """Power iteration hit ``max_iters``; ``estimate`` and ``vector`` hold the last iterate."""

    def __init__(self, msg: str, estimate: float, vector: np.ndarray):
        super().__init__(msg)
        self.estimate = estimate
        self.vector = vector


@njit(cache=True)
def _bfs_counts(adj, deg, src, skip, depth, mark, dist, sigma, queue, e):
    # BFS from src to ``depth`` ignoring the edge src-skip, counting shortest paths
    mark[src] = e
    dist[src] = 0
    sigma[src] = 1
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
            if x == src and y == skip:
                continue
            if mark[y] != e:
                mark[y] = e
                dist[y] = dx + 1
                sigma[y] = sigma[x]
                queue[hi] = y
                hi += 1
            elif dist[y] == dx + 1:
                sigma[y] += sigma[x]
    return hi


@njit(cache=True)
def _edge_path_counts(adj, deg, length, mark, dist, sigma, queue,
                      mark2, dist2, sigma2, queue2, epoch):
    # per edge (u, v), u < v: number of u-v paths of ``length`` avoiding the edge.
    # Both are shortest paths in G - uv, so each crosses exactly one vertex at
    # distance ``a`` from u and ``length - a`` from v.
    n = adj.shape[0]
    a = (length + 1) // 2
    b = length - a
    total = np.zeros(n, np.int64)
    for u in range(n):
        for jj in range(deg[u]):
            v = adj[u, jj]
            if v < u:
                continue
            epoch[0] += 1
            e = epoch[0]
            cnt = _bfs_counts(adj, deg, u, v, a, mark, dist, sigma, queue, e)
            _bfs_counts(adj, deg, v, u, b, mark2, dist2, sigma2, queue2, e)
            acc = 0
            for q in range(cnt):
                x = queue[q]
                if dist[x] == a and mark2[x] == e and dist2[x] == b:
                    acc += sigma[x] * sigma2[x]
            total[u] += acc
    return total


def count_girth_cycles(g: Graph, budget: int | None = None) -> int:
    """Number of distinct cycles whose length equals the girth.

    For each edge ``uv`` the shortest ``u``-``v`` paths in ``G - uv`` of
    length ``girth - 1`` close a shortest cycle; every such cycle is seen
    once per edge, so the sum is divided by the girth.  Paths are counted by
    meeting half-depth BFS trees from both endpoints.
    """
    gam = girth(g)
    if gam == math.inf:
        raise GraphError("graph is acyclic")
    gam = int(gam)
    budget = budget_from_env() if budget is None else budget
    kmax = max(g.max_degree(), 2)
    # work per edge is bounded by two half-depth balls
    ball = min(g.n, 2 * (1 + kmax * (kmax - 1) ** (gam // 2)))
    if g.edge_count * ball > budget * 100:
        raise BudgetExceeded(f"cycle count needs about {g.edge_count * ball} steps")
    if (kmax - 1) ** (gam - 1) >= 2**62:
        raise BudgetExceeded("per-edge path counts could overflow 64 bits")
    n = g.n
    bufs = [np.zeros(n, np.int64) for _ in range(8)]
    epoch = np.zeros(1, np.int64)
    per = _edge_path_counts(g.adj, g.deg, gam - 1, *bufs, epoch)
    s = sum(int(x) for x in per)
    if s % gam:
        raise AssertionError(f"closed-path total {s} not divisible by girth {gam}")
    return s // gam


def components(g: Graph) -> int:
    seen = np.zeros(g.n, bool)
    count = 0
    for r in range(g.n):
        if seen[r]:
            continue
        count += 1
        stack = [r]
        seen[r] = True
        while stack:
            x = stack.pop()
            for y in g.neighbors(x):
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
    return count


def _ecc(g: Graph, v: int) -> tuple[int, int, int]:
    # (eccentricity, a farthest vertex, vertices reached)
    ws = g.workspace
    cnt = bfs_ball(g.adj, g.deg, v, g.n, ws.mark, ws.dist, ws.queue, ws.epoch)
    far = int(ws.queue[cnt - 1])
    return int(ws.dist[far]), far, int(cnt)


def diameter(g: Graph) -> float:
    """Largest eccentricity, or ``math.inf`` when the graph is disconnected.

    Exact, via the iFUB bound: after a BFS from a central vertex ``u``, once
    every vertex deeper than level ``i`` has been scanned and the best
    eccentricity found is at least ``2i``, nothing closer to ``u`` can beat it.
    """
    n = g.n
    if n <= 1:
        return 0
    e0, a, reached = _ecc(g, 0)
    if reached < n:
        return math.inf
    # double sweep for a lower bound and a central start vertex
    ea, b, _ = _ecc(g, a)
    lb = max(e0, ea)
    ws = g.workspace
    bfs_ball(g.adj, g.deg, a, n, ws.mark, ws.dist, ws.queue, ws.epoch)
    da = ws.dist.copy()
    bfs_ball(g.adj, g.deg, b, n, ws.mark, ws.dist, ws.queue, ws.epoch)
    db = ws.dist[:n]
    half = ea // 2
    cand = np.flatnonzero((da[:n] == half) & (db == ea - half))
    u = int(cand[0]) if len(cand) else a
    cnt = bfs_ball(g.adj, g.deg, u, n, ws.mark, ws.dist, ws.queue, ws.epoch)
    order = ws.queue[:cnt].copy()
    du = ws.dist[order].copy()
    eu = int(du[-1])
    lb = max(lb, eu)
    i = eu
    hi = cnt
    while i > 0:
        # levels above i are done; any pair left has both ends within i of u
        if lb >= 2 * i:
            return lb
        lo = int(np.searchsorted(du, i, side="left"))
        for x in order[lo:hi]:
            lb = max(lb, _ecc(g, int(x))[0])
        hi = lo
        i -= 1
    return lb


def diameter_bruteforce(g: Graph) -> float:
    """All-sources eccentricity scan; quadratic, kept as the reference route."""
    if g.n <= 1:
        return 0
    ws = g.workspace
    ecc = eccentricity_kernel(g.adj, g.deg, g.n, ws.mark, ws.dist, ws.queue, ws.epoch)
    if (ecc < 0).any():
        return math.inf
    return int(ecc.max())


def bipartition(g: Graph) -> np.ndarray | None:
    """``+1/-1`` two-colouring of a connected bipartite graph, else ``None``."""
    if g.n == 0:
        return None
    side = np.zeros(g.n, np.int8)
    side[0] = 1
    stack = [0]
    seen = 1
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if side[y] == 0:
                side[y] = -side[x]
                seen += 1
                stack.append(int(y))
            elif side[y] == side[x]:
                return None
    if seen < g.n:
        return None
    return side.astype(float)


def _apply(adj, x):
    # adjacency times x; padded slots (-1) read the trailing zero
    ext = np.append(x, 0.0)
    return ext[adj].sum(axis=1)


def _top_deflated(adj, k, sign, basis, tol, max_iters, rng):
    # power iteration on k*I + sign*A restricted to the complement of ``basis``
    n = adj.shape[0]
    x = rng.standard_normal(n)

    def project(y):
        for b in basis:
            y = y - (y @ b) * b
        return y

    x = project(x)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return 0.0, x
    x /= nrm
    mu_prev = None
    delta_prev = None
    mu = 0.0
    for _ in range(max_iters):
        y = project(k * x + sign * _apply(adj, x))
        mu = float(x @ y)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0, x
        resid = np.linalg.norm(y - mu * x)
        x = y / nrm
        if resid <= tol * max(1.0, abs(mu)):
            return mu, x
        if mu_prev is not None:
            delta = mu - mu_prev
            if delta_prev is not None and delta_prev > 0 and delta >= 0:
                # remaining error of a linearly converging monotone sequence
                rate = min(delta / delta_prev, 1.0 - 1e-12)
                if delta * rate / (1.0 - rate) <= tol * 1e-2 * max(1.0, abs(mu)):
                    return mu, x
            delta_prev = delta
        mu_prev = mu
    raise ConvergenceError(f"power iteration did not converge in {max_iters} steps", mu, x)


@dataclass
class SpectrumEstimate:
    """``lambda2``/``lambda_min`` are the largest and smallest nontrivial eigenvalues;
    ``lambda_abs`` is the largest nontrivial magnitude.  The trivial ones are ``k``
    and, for a connected bipartite graph, ``-k``."""

    k: int
    lambda2: float
    lambda_min: float
    lambda_abs: float
    bipartite: bool


def spectrum_extremes(g: Graph, tol: float = 1e-10, max_iters: int = 200_000,
                      seed: int = 0) -> SpectrumEstimate:
    k = g.max_degree()
    if g.n < 2 or not g.is_regular(k):
        raise GraphError("spectral estimate needs a regular graph (top eigenvector all-ones)")
    rng = np.random.default_rng(seed)
    adj = g.adj
    ones = np.full(g.n, 1.0 / math.sqrt(g.n))
    side = bipartition(g)
    top_basis = [ones]
    low_basis = [ones]
    if side is not None:
        side = side / math.sqrt(g.n)
        top_basis.append(side)
        low_basis.append(side)
    if g.n - len(top_basis) <= 0:
        raise GraphError("no nontrivial eigenvalues")
    # A + kI is positive semidefinite, so the top of the deflated operator is lambda2 + k
    mu, _ = _top_deflated(adj, k, 1.0, top_basis, tol, max_iters, rng)
    lam2 = mu - k
    nu, _ = _top_deflated(adj, k, -1.0, low_basis, tol, max_iters, rng)
    lam_min = k - nu
    return SpectrumEstimate(k=k, lambda2=lam2, lambda_min=lam_min,
                            lambda_abs=max(abs(lam2), abs(lam_min)),
                            bipartite=side is not None)


def second_eigenvalue(g: Graph, tol: float = 1e-10, max_iters: int = 200_000) -> float:
    """Largest magnitude among the nontrivial adjacency eigenvalues.

    >>> from girthforge.graph import cycle_graph
    >>> round(second_eigenvalue(cycle_graph(12)), 7)
    1.7320508
    """
    return spectrum_extremes(g, tol, max_iters).lambda_abs


@dataclass
class GeometryReport:
    n: int
    k: int
    girth: float
    diameter: float | None
    components: int
    girth_cycle_count: int | None
    cycle_bound: float | None
    lambda2: float | None = None
    lambda_min: float | None = None
    lambda_abs: float | None = None
    ramanujan_threshold: float | None = None
    near_ramanujan: bool | None = None
    slack: float = 0.0

    @property
    def cycle_bound_ok(self) -> bool:
        if self.girth_cycle_count is None or self.cycle_bound is None:
            return True
        return self.girth_cycle_count <= self.cycle_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("girth", "diameter"):
            if out[key] == math.inf:
                out[key] = "inf"
        out["cycle_bound_ok"] = self.cycle_bound_ok
        return out


def cycle_bound(n: int, k: int, gam: int) -> float:
    return n * k / gam * (k - 1) ** (gam / 2)


def geometry_report(g: Graph, with_lambda: bool = False, slack: float = 0.0,
                    tol: float = 1e-10, with_diameter: bool = True) -> GeometryReport:
    """Collect the geometry fields; the exact diameter costs one BFS per vertex
    on expander-like graphs, so it can be skipped (reported as ``None``)."""
    k = g.max_degree()
    gam = girth(g)
    cnt = bound = None
    if gam != math.inf:
        cnt = count_girth_cycles(g)
        bound = cycle_bound(g.n, k, int(gam))
    rep = GeometryReport(n=g.n, k=k, girth=gam if gam == math.inf else int(gam),
                         diameter=diameter(g) if with_diameter else None, components=components(g),
                         girth_cycle_count=cnt, cycle_bound=bound, slack=slack)
    if with_lambda and g.is_regular(k) and k > 0:
        est = spectrum_extremes(g, tol=tol)
        rep.lambda2 = est.lambda2
        rep.lambda_min = est.lambda_min
        rep.lambda_abs = est.lambda_abs
        rep.ramanujan_threshold = 2.0 * math.sqrt(k - 1)
        rep.near_ramanujan = est.lambda_abs <= rep.ramanujan_threshold + slack
    return rep
