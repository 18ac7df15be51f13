"""Constants and stage times governing the late phase of the process."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Schedule:
    """Times and exponents for a run with ``n`` vertices and exponent ``c``.

    ``beta``/``alpha`` may be overridden to make desk-scale trajectories
    non-trivial; ``beta_exact``/``alpha_exact`` always hold the derived values.
    """

    n: int
    k: int
    c: float
    eps: float
    beta: float
    alpha: float
    beta_exact: float
    alpha_exact: float
    T: float
    T_safe: float
    m: int

    @property
    def overridden(self) -> bool:
        return self.beta != self.beta_exact or self.alpha != self.alpha_exact

    def next_time(self, t: float, alpha: float | None = None) -> float:
        """``t' = (n - (n - 2t) n^-alpha) / 2``."""
        a = self.alpha if alpha is None else alpha
        return (self.n - (self.n - 2.0 * t) * self.n ** (-a)) / 2.0

    def stage_times(self, count: int | None = None) -> list[float]:
        """``t_0 = T`` followed by ``count`` (default ``m``) recursion steps."""
        count = self.m if count is None else count
        out = [self.T]
        for _ in range(count):
            out.append(self.next_time(out[-1]))
        return out

    def p_of(self, w_size: int) -> float:
        """Edge probability ``n^beta / |W_t|`` for the random subgraph."""
        return self.n ** self.beta / w_size

    def L(self, ell: int, t: float) -> float:
        return max(1.0, (self.k - 1) ** ell * (self.n - 2.0 * t) / self.n ** (self.c + self.eps))


def make_schedule(n: int, k: int, c: float, beta: float | None = None,
                  alpha: float | None = None) -> Schedule:
    """Derive ``eps = c(1-c)/3``, ``beta = eps/10``, ``alpha = beta/100`` and the times.

    >>> s = make_schedule(10**6, 3, 0.5)
    >>> round(s.eps * 12, 12), round(s.beta * 120, 12), round(s.alpha * 12000, 12)
    (1.0, 1.0, 1.0)
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    eps = c * (1.0 - c) / 3.0
    beta_exact = eps / 10.0
    alpha_exact = beta_exact / 100.0
    b = beta_exact if beta is None else float(beta)
    # an overridden beta carries its own alpha unless one is given explicitly
    a = (b / 100.0) if alpha is None else float(alpha)
    if not (b > 0 and a > 0):
        raise ValueError("beta and alpha must be positive")
    T = 0.5 * (n - n ** (c + eps))
    T_safe = 0.5 * (n - n ** eps)
    m = math.ceil((c + eps) / a)
    return Schedule(n=n, k=k, c=c, eps=eps, beta=b, alpha=a, beta_exact=beta_exact,
                    alpha_exact=alpha_exact, T=T, T_safe=T_safe, m=m)
