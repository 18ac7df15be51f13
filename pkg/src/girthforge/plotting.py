"""Figures for the CLI report paths.  Everything renders off-screen to files."""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 110,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.frameon": False,
}


def _save(fig, path: str | os.PathLike) -> None:
    fig.tight_layout()
    try:
        fig.savefig(path)
    except OSError as exc:
        raise OSError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)


def trajectory_figure(records, path: str | os.PathLike, max_lines: int = 40) -> None:
    """``N(v, s)`` paths for a few vertices over the band, one panel per trial (first 4)."""
    records = list(records)[:4]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(len(records), 1), squeeze=False,
                                 figsize=(3.2 * max(len(records), 1), 3.2))
        for ax, rec in zip(axes[0], records):
            steps = np.unique(rec.s)
            lo = np.array([rec.band_lo[rec.s == s][0] for s in steps])
            hi = np.array([rec.band_hi[rec.s == s][0] for s in steps])
            ax.fill_between(steps, lo, hi, color="tab:blue", alpha=0.15, lw=0, label="band")
            verts = np.unique(rec.v)[:max_lines]
            for v in verts:
                sel = rec.v == v
                ax.plot(rec.s[sel], rec.N[sel], lw=0.5, color="0.3", alpha=0.6)
            bad = rec.violated
            if bad.any():
                ax.scatter(rec.s[bad], rec.N[bad], s=4, color="tab:red", label="outside")
            ax.set_title(f"seed {rec.seed}")
            ax.set_xlabel("inner step s")
        axes[0][0].set_ylabel("N(v, s)")
        axes[0][0].legend(loc="upper right")
        _save(fig, path)


def path_counts_figure(stats, path: str | os.PathLike, ceilings=None) -> None:
    """Bar chart of the unsaturated-pair distance counts ``P[l]``."""
    ell = np.arange(1, len(stats.P))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(ell, stats.P[1:], color="tab:blue", label="P[l]")
        if ceilings is not None:
            ax.plot(ell, ceilings[1:], "k--", lw=1, label="ceiling")
        ax.set_yscale("symlog")
        ax.set_xlabel("distance l")
        ax.set_ylabel("unsaturated pairs")
        ax.set_title(f"|W| = {stats.w_size}, forbidden = {stats.forbidden_count}")
        ax.legend()
        _save(fig, path)


def batch_figure(records, path: str | os.PathLike) -> None:
    """Histogram of per-run log choices, with the saturation rate in the title."""
    records = list(records)
    vals = np.array([r.log_choices for r in records], float)
    rate = np.mean([r.saturated for r in records]) if records else math.nan
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if len(vals):
            ax.hist(vals, bins=min(30, max(5, len(vals) // 5)), color="tab:green", alpha=0.8)
        ax.set_xlabel("sum of ln|A_t|")
        ax.set_ylabel("runs")
        ax.set_title(f"{len(records)} runs, saturated {rate:.1%}")
        _save(fig, path)


def census_figure(totals, bound: float, path: str | os.PathLike, exact: float | None = None) -> None:
    """Spread of per-run log totals against the assembled bound (natural log)."""
    totals = np.asarray(list(totals), float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if len(totals):
            ax.hist(totals, bins=min(30, max(5, len(totals) // 5)), color="0.6")
        ax.axvline(bound, color="tab:blue", lw=1.5, label="assembled bound")
        if exact is not None:
            ax.axvline(exact, color="tab:red", lw=1.5, ls="--", label="exact count")
        ax.set_xlabel("ln(count)")
        ax.set_ylabel("runs")
        ax.legend()
        _save(fig, path)
