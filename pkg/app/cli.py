# app/cli.py
"""
Command-line front end.

    python -m app.cli --input edges.txt --strategy omst-d --alpha 1000 --beta 50
    python -m app.cli --synthetic 100000:2000000 --strategy vanilla-d \
        --edges-per-window 100000 --edges-per-slide 5000 --out run.csv
    python -m app.cli --sweep plan.json --out sweep.csv --summary sweep.gp

Exit codes: 0 ok, 1 usage, 2 data, 3 correctness.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from app.core.constants import (
    EXIT_CORRECTNESS, EXIT_DATA, EXIT_OK, EXIT_USAGE, STRATEGIES,
)
from app.core.errors import (
    CorrectnessError, DataError, PreconditionError, StreamOrderError, SwconnError,
)
from app.core.logs import configure_logging
from app.services.bench import (
    TIMESTAMP_MODES, RunSpec, SweepPlan, check_agreement, render_summary, run_spec, sweep, write_csv,
)

log = logging.getLogger("app.cli")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 means a data error here
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swconn", description="Sliding-window connectivity benchmarks")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="edge list: 'u v' or 'u v t' per line")
    src.add_argument("--synthetic", metavar="N:M[:EXP]", help="power-law stream with N vertices and M edges")
    src.add_argument("--sweep", metavar="FILE", help="JSON sweep plan (base, strategies, vary, values)")
    p.add_argument("--strategy", choices=STRATEGIES, default="omst-d")
    p.add_argument("--alpha", type=int, help="window size in time units")
    p.add_argument("--beta", type=int, help="slide in time units")
    p.add_argument("--edges-per-window", type=int, help="size the window by expected edge count")
    p.add_argument("--edges-per-slide", type=int, help="size the slide by expected edge count")
    p.add_argument("--workload", type=int, default=1000, help="query pairs per window")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timestamp-mode", choices=TIMESTAMP_MODES, default="explicit")
    p.add_argument("--t-max", type=int, help="uniform timestamps are drawn over [0, T)")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--summary", help="gnuplot summary script (sweep mode)")
    p.add_argument("--verify", action="store_true", help="check every window against the oracle")
    p.add_argument("--resample", action="store_true", help="draw fresh query pairs per window")
    p.add_argument("--compact-every", type=int, default=0, help="drop isolated vertices every N windows")
    p.add_argument("--no-agreement-check", action="store_true",
                   help="sweep: do not fail when strategies disagree")
    p.add_argument("--store", action="store_true", help="also persist rows to DATABASE_URL")
    p.add_argument("--log-level", help="overrides SWCONN_LOG_LEVEL")
    return p


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    return RunSpec(
        input=args.input, synthetic=args.synthetic, strategy=args.strategy,
        alpha=args.alpha, beta=args.beta,
        edges_per_window=args.edges_per_window, edges_per_slide=args.edges_per_slide,
        workload=args.workload, seed=args.seed, timestamp_mode=args.timestamp_mode,
        t_max=args.t_max, out=args.out, verify=args.verify, resample=args.resample,
        compact_every=args.compact_every,
    )


def load_plan(path: str) -> SweepPlan:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"no such sweep plan: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"sweep plan is not JSON: {exc.msg}", exc.lineno) from None
    return SweepPlan.model_validate(raw)


def _emit(rows: List[Dict[str, object]], out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        write_csv(rows, sys.stdout)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.sweep:
            plan = load_plan(args.sweep)
            specs = plan.specs()
            rows = sweep(specs)
            source = args.sweep
        else:
            if not (args.input or args.synthetic):
                parser.error("one of --input, --synthetic or --sweep is required")
            spec = spec_from_args(args)
            specs = [spec]
            rows = [run_spec(spec)]
            source = args.input or f"synthetic:{args.synthetic}"
        _emit(rows, args.out)
        if args.sweep and args.summary:
            prefix = Path(args.summary).with_suffix("").name
            Path(args.summary).write_text(render_summary(rows, plan.vary, prefix), encoding="utf-8")
        if args.store:
            from app.core.db import bootstrap_schema
            from app.services.results import store_rows
            bootstrap_schema()
            store_rows(rows, source=source)
        if args.sweep and not args.no_agreement_check:
            check_agreement(specs, rows)
    except (ValidationError, PreconditionError) as exc:
        log.error("usage: %s", exc)
        return EXIT_USAGE
    except (DataError, StreamOrderError) as exc:
        log.error("data: %s", exc)
        return EXIT_DATA
    except CorrectnessError as exc:
        log.error("correctness: %s", exc)
        return EXIT_CORRECTNESS
    except SwconnError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
