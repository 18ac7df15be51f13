"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 bad usage or unreadable input.
Batch seeds are ``seed_base + i`` for trial ``i``.  ``wall_ms`` is written as
0 unless ``--timing`` is given, so CSV bytes depend only on the seeds.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from typing import Sequence

from . import formats
from .graph import GraphError, girth
from .process import ConfigError, ProcessConfig, ProcessState, batch_run, run

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_process_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="vertex count (even)")
    p.add_argument("--k", type=int, required=True, help="target degree")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--c", type=float, help="girth exponent, g = floor(c log_{k-1} n)")
    grp.add_argument("--g", type=int, help="explicit girth target")
    p.add_argument("--exact-threshold", type=int, default=None,
                   help="enumerate available pairs exactly once |W| is this small")


def _config(args, seed: int, start=None) -> ProcessConfig:
    kw = {}
    if args.exact_threshold is not None:
        kw["exact_threshold"] = args.exact_threshold
    try:
        return ProcessConfig(n=args.n, k=args.k, c=args.c, g=args.g, seed=seed, start=start, **kw)
    except (ConfigError, GraphError) as exc:
        raise UsageError(str(exc)) from None


def _girth_str(x: float) -> str:
    return "inf" if x == math.inf else str(int(x))


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        formats.write_text(path, text)


def cmd_generate(args) -> int:
    start = formats.read_edgelist(args.start, k_max=args.k) if args.start else None
    rec = run(_config(args, args.seed, start), debug=args.debug)
    if args.out:
        formats.write_edgelist(rec.graph, args.out)
    print(f"saturated={int(rec.saturated)} girth={_girth_str(rec.girth_achieved)} "
          f"g={rec.g} t_freeze={rec.t_freeze} log_choices={formats.fmt_float(rec.log_choices)}")
    if args.debug:
        print(f"w_violations={rec.w_violations} moore_checks={rec.moore_checks} "
              f"moore_violations={rec.moore_violations}")
        if rec.w_violations or rec.moore_violations:
            return EXIT_CHECK
    return EXIT_OK if rec.saturated else EXIT_CHECK


def cmd_batch(args) -> int:
    if args.trials < 0 or args.workers < 1:
        raise UsageError("--trials must be >= 0 and --workers >= 1")
    template = _config(args, args.seed_base)
    seeds = [args.seed_base + i for i in range(args.trials)]
    records = batch_run(template, seeds, workers=args.workers, debug=args.debug,
                        keep_graph=args.verify)
    if not args.timing:
        records = [replace(r, wall_ms=0.0) for r in records]
    _emit(formats.format_run_csv(records), args.csv)
    sat = sum(r.saturated for r in records)
    bad = 0
    if args.verify:
        for r in records:
            if r.saturated and not (r.graph.is_regular(r.k) and girth(r.graph) >= r.g):
                bad += 1
    bad += sum(1 for r in records if r.w_violations or r.moore_violations)
    print(f"trials={len(records)} saturated={sat} failed_checks={bad}", file=sys.stderr)
    if args.figure:
        from .plotting import batch_figure
        batch_figure(records, args.figure)
    return EXIT_CHECK if bad else EXIT_OK


def _state_for(graph, g: int, k: int) -> ProcessState:
    if graph.n < 4 or graph.n % 2:
        raise UsageError("safety check needs an even vertex count >= 4")
    if graph.max_degree() > k:
        raise UsageError(f"max degree {graph.max_degree()} exceeds k={k}")
    try:
        cfg = ProcessConfig(n=graph.n, k=k, g=g, start=graph.with_capacity(k))
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    return ProcessState(cfg)


def cmd_verify(args) -> int:
    from .diagnostics import is_safe

    graph = formats.read_edgelist(args.input)
    k = args.k if args.k is not None else graph.max_degree()
    gam = girth(graph)
    lo, hi = graph.min_degree(), graph.max_degree()
    ok = gam >= args.g and hi <= k
    print(f"n={graph.n} m={graph.edge_count} girth={_girth_str(gam)} min_degree={lo} max_degree={hi}")
    if lo < k:
        rep = is_safe(_state_for(graph, args.g, k))
        print(f"safe={int(rep.safe)} forbidden_pairs={rep.forbidden_count}")
        ok = ok and rep.safe
    else:
        print(f"regular={int(graph.is_regular(k))}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_stats(args) -> int:
    from .diagnostics import is_path_bounded, path_stats

    graph = formats.read_edgelist(args.input)
    k = args.k if args.k is not None else max(graph.max_degree(), 3)
    state = _state_for(graph, args.g, k)
    stats = path_stats(state)
    rep = is_path_bounded(state, args.C, stats=stats)
    rows = [[ell, int(stats.P[ell]), formats.fmt_float(rep.local_ratio[ell]),
             formats.fmt_float(rep.global_ratio[ell])] for ell in range(1, len(stats.P))]
    text = formats.format_csv(("ell", "P", "local_ratio", "global_ratio"), rows)
    _emit(text, args.csv)
    print(f"w_size={stats.w_size} forbidden={stats.forbidden_count} "
          f"path_bounded={int(rep.bounded)}", file=sys.stderr)
    if args.figure:
        from .plotting import path_counts_figure
        path_counts_figure(stats, args.figure)
    return EXIT_OK


NIBBLE_HEADER = ("seed", "s", "v", "N", "band_lo", "band_hi", "violated")


def cmd_nibble(args) -> int:
    from .nibble import nibble_trial

    if not 0 < args.c < 1:
        raise UsageError("--c must lie in (0, 1)")
    recs = []
    rows = []
    for i in range(args.trials):
        seed = args.seed_base + i
        try:
            rec = nibble_trial(args.n, args.k, args.c, seed, beta=args.beta, alpha=args.alpha,
                               sample_size=args.sample_size)
        except (ConfigError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        recs.append(rec)
        bad = rec.violated
        for j in range(len(rec.s)):
            rows.append([seed, int(rec.s[j]), int(rec.v[j]), int(rec.N[j]),
                         formats.fmt_float(rec.band_lo[j]), formats.fmt_float(rec.band_hi[j]),
                         int(bad[j])])
    _emit(formats.format_csv(NIBBLE_HEADER, rows), args.csv)
    total = sum(len(r.N) for r in recs)
    viol = sum(int(r.violated.sum()) for r in recs)
    ident = all(r.u_identity_holds for r in recs)
    frac = viol / total if total else 0.0
    print(f"trials={len(recs)} samples={total} violated={viol} "
          f"fraction={formats.fmt_float(frac)} u_identity={int(ident)}", file=sys.stderr)
    if args.figure:
        from .plotting import trajectory_figure
        trajectory_figure(recs, args.figure)
    return EXIT_OK if ident else EXIT_CHECK


def cmd_census(args) -> int:
    from . import census

    if args.exact:
        if args.g is None:
            raise UsageError("--exact needs --g")
        if args.n > 10:
            raise UsageError("--exact is limited to n <= 10")
        count = census.brute_force_census(args.n, args.k, args.g)
        value = math.log10(count) if count else -math.inf
        print(f"log10_count_lower_bound={formats.fmt_float(value)}")
        detail = formats.format_csv(("n", "k", "g", "count"), [[args.n, args.k, args.g, count]])
        if args.csv:
            _emit(detail, args.csv)
        return EXIT_OK
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    seeds = [args.seed_base + i for i in range(args.trials)]
    template = _config(args, args.seed_base)
    records = batch_run(template, seeds, workers=args.workers)
    ok = [r for r in records if r.saturated]
    if not ok:
        print("no saturated runs; no bound", file=sys.stderr)
        return EXIT_CHECK
    ests = [census.CountEstimate.from_run(r) for r in ok]
    bound = census.assemble_lower_bound(ests, len(ok) / len(records))
    print(f"log10_count_lower_bound={formats.fmt_float(bound / math.log(10))}")
    print(f"analytic_reference_log10={formats.fmt_float(census.analytic_reference(args.n, args.k) / math.log(10))}",
          file=sys.stderr)
    if args.csv:
        by_seed = {r.seed: e for r, e in zip(ok, ests)}
        rows = [[r.seed, int(r.saturated), formats.fmt_float(r.log_choices),
                 formats.fmt_float(by_seed[r.seed].total) if r.seed in by_seed else ""]
                for r in records]
        _emit(formats.format_csv(("seed", "saturated", "log_choices", "log_total"), rows), args.csv)
    if args.figure:
        from .plotting import census_figure
        census_figure([e.total for e in ests], bound, args.figure)
    return EXIT_OK


def cmd_geometry(args) -> int:
    from .spectral import geometry_report

    graph = formats.read_edgelist(args.input)
    try:
        rep = geometry_report(graph, with_lambda=args.with_lambda, slack=args.slack,
                              with_diameter=not args.skip_diameter)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    d = rep.to_dict()
    if args.json:
        print(json.dumps(d, sort_keys=True))
    else:
        for key, val in d.items():
            print(f"{key}={val}")
    return EXIT_OK if rep.cycle_bound_ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="girthforge", description="High-girth regular graph generator and checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="run the process once and write the edge list")
    _add_process_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", help="start graph edge list (default: Hamilton cycle)")
    p.add_argument("--out", help="edge list output path")
    p.add_argument("--debug", action="store_true", help="check level sizes and Moore bounds while running")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("batch", help="many seeded runs, one CSV row each")
    _add_process_args(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--csv", default="-", help="CSV path (default stdout)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record wall_ms instead of 0")
    p.add_argument("--verify", action="store_true", help="check girth and regularity of saturated outputs")
    p.add_argument("--debug", action="store_true")
    p.add_argument("--figure", help="histogram of log choices")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("verify", help="check girth, degrees and safety of an edge list")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="distance counts between unsaturated vertices")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--C", type=float, default=2.0, help="polylog exponent for the ceilings")
    p.add_argument("--csv", nargs="?", const="-", default="-", help="CSV path (default stdout)")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("nibble-sim", help="trajectory trials of the restricted matching")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--beta", type=float, help="override the subgraph density exponent")
    p.add_argument("--alpha", type=float, help="override the stage length exponent")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--sample-size", type=int, help="track this many vertices per trial")
    p.add_argument("--csv", default="-")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_nibble)

    p = sub.add_parser("census", help="exact count or sampled lower bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--c", type=float)
    grp.add_argument("--g", type=int)
    p.add_argument("--exact", action="store_true", help="exhaustive enumeration (n <= 10)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--exact-threshold", type=int, default=None)
    p.add_argument("--csv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("geometry", help="girth, diameter, short-cycle count, spectrum")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lambda", dest="with_lambda", action="store_true")
    p.add_argument("--slack", type=float, default=0.0)
    p.add_argument("--skip-diameter", action="store_true", help="omit the all-pairs diameter")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_geometry)
    return ap


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, GraphError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
