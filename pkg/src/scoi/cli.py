"""Command-line interface.

Subcommands: ``analyze`` (index report for a system file), ``bench`` (the
ER tightness experiment), ``search-gap`` (hunt for instances where the
cactus bound overshoots), ``oracle`` (rank profile of a random
realization). Exit codes: 0 success, 2 validation error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys

from .bench import ExperimentConfig, emit_csv, emit_summary_csv, run_experiment
from .dyngraph import build_dynamic_graph, build_flow_network, dynamic_graph_dot, flow_network_dot
from .errors import InvariantViolation, ValidationError
from .indices import analyze, search_gap_instances
from .oracle import (
    controllability_index_field,
    controllability_index_real,
    structural_index_symbolic,
)
from .pattern import parse_system, sample_realization

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3


def _load_system(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return parse_system(text)


def _parse_range(text: str) -> tuple[int, ...]:
    """'5..30' or '4,7,12' -> tuple of ints."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in text.split(",") if tok)


def _cmd_analyze(args) -> int:
    system = _load_system(args.file)
    report = analyze(
        system,
        upper_restarts=args.upper_restarts,
        seed=args.seed,
        compute_upper=not args.skip_upper,
    )
    if args.dot_dir:
        import os

        os.makedirs(args.dot_dir, exist_ok=True)
        dg = build_dynamic_graph(system, system.n)
        with open(os.path.join(args.dot_dir, "dynamic_graph.dot"), "w") as fh:
            fh.write(dynamic_graph_dot(dg))
        with open(os.path.join(args.dot_dir, "flow_network.dot"), "w") as fh:
            fh.write(flow_network_dot(build_flow_network(system)))
    text = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = ExperimentConfig(
        n_values=_parse_range(args.n),
        m_values=_parse_range(args.m),
        graphs_per_n=args.trials,
        seed=args.seed,
        oracle_mode=args.oracle,
        workers=args.workers,
    ).validate()
    rows, summary = run_experiment(cfg)
    if args.csv:
        emit_csv(rows, args.csv, zero_timings=args.zero_timings)
    if args.summary:
        emit_summary_csv(summary, args.summary)
    agree = sum(r.agree for r in rows)
    print(
        f"{len(rows)} rows; agreement {agree}/{len(rows)}"
        f" = {agree / max(1, len(rows)):.4f}"
    )
    for s in summary if args.print_summary else ():
        print(
            f"n={s.n} m={s.m} [{s.oracle_mode}] mean_low={s.mean_mu_low:.3f} "
            f"mean_oracle={s.mean_mu_oracle:.3f} agree={s.agreement_rate:.3f}"
        )
    return EXIT_OK


def _cmd_search_gap(args) -> int:
    witnesses = search_gap_instances(
        n_max=args.n_max,
        m_max=args.m_max,
        trials=args.trials,
        seed=args.seed,
        max_witnesses=args.max_witnesses,
    )
    lines = [json.dumps(w.to_dict(), separators=(",", ":")) for w in witnesses]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    for line in lines:
        print(line)
    print(f"found {len(witnesses)} witness(es)", file=_sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    system = _load_system(args.file)
    if args.mode == "linking":
        index = structural_index_symbolic(system)
        print(json.dumps({"mode": "linking", "index": index}))
        return EXIT_OK
    best = None
    draws = args.draws if args.mode == "field" else 1
    for d in range(draws):
        realization = sample_realization(system, args.mode, args.seed + d)
        if args.mode == "field":
            profile = controllability_index_field(realization)
        else:
            profile = controllability_index_real(realization)
        if best is None or profile.index > best.index:
            best = profile
    doc = {
        "mode": best.mode,
        "index": best.index,
        "ranks": list(best.ranks),
        "ill_conditioned": best.ill_conditioned,
    }
    if best.failure_bound is not None:
        doc["failure_bound"] = best.failure_bound
    print(json.dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoi",
        description="Index bounds for structured linear systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="index report for a system JSON file")
    p.add_argument("file")
    p.add_argument("--report", help="write the JSON report here as well")
    p.add_argument("--upper-restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-upper", action="store_true", help="skip the cactus bound")
    p.add_argument("--dot-dir", help="dump GraphViz debug renderings into this directory")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("bench", help="random-graph tightness experiment")
    p.add_argument("--n", default="5..30", help="state counts, e.g. 5..30 or 5,10,20")
    p.add_argument("--m", default="2,5", help="input counts, e.g. 2,5")
    p.add_argument("--trials", type=int, default=20, help="graphs per n")
    p.add_argument("--oracle", default="field", choices=["field", "real", "both"])
    p.add_argument("--csv", help="write per-trial rows here")
    p.add_argument("--summary", help="write per-(n,m) summary here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--zero-timings", action="store_true",
                   help="zero the wall-time columns for byte-reproducible output")
    p.add_argument("--print-summary", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("search-gap", help="hunt for bound-vs-oracle gap witnesses")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--m-max", type=int, default=2)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-witnesses", type=int, default=None)
    p.add_argument("--out", help="write witnesses (JSON lines) here")
    p.set_defaults(func=_cmd_search_gap)

    p = sub.add_parser("oracle", help="rank profile of a random realization")
    p.add_argument("file")
    p.add_argument("--mode", default="field", choices=["field", "real", "linking"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=3, help="independent field draws")
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=_sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
