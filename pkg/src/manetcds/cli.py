"""Command line entry point: ``manetcds run|oracle|trace|summarize``."""

from __future__ import annotations

import argparse
import logging
import os
import statistics
import sys

from .backbone import Algorithm
from .config import MODES, ConfigError, ScenarioConfig, parse_config
from .scenarios import (csv_row, emit_csv, emit_summary_csv, oracle_comparison, read_csv,
                        run_matrix, summarize)
from .simkernel import run_simulation

EXIT_OK, EXIT_RUN_FAILED, EXIT_CONFIG = 0, 1, 2


def _load_config(args) -> ScenarioConfig:
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    cfg = parse_config(text)
    changes = {}
    if getattr(args, "algorithms", None):
        changes["algorithms"] = tuple(Algorithm.parse(a.strip()).value
                                      for a in args.algorithms.split(",") if a.strip())
    if getattr(args, "mode", None):
        changes["modes"] = MODES if args.mode == "both" else (args.mode,)
    if getattr(args, "seed_base", None) is not None:
        changes["seeds"] = tuple(args.seed_base + i for i in range(len(cfg.seeds)))
    return cfg.with_(**changes) if changes else cfg


def _stderr_trace(line: str) -> None:
    print(line, file=sys.stderr)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if os.environ.get("SIM_TRACE") == "1":
        logging.getLogger("manetcds").info("SIM_TRACE set; event logs go to stderr (jobs forced to 1)")
        records = []
        for n in cfg.nodes:
            for v in cfg.v_max:
                for alg in cfg.algorithms:
                    for seed in cfg.seeds:
                        for mode in cfg.modes:
                            records.append(run_simulation(cfg, alg, seed, n=n, v_max=v, mode=mode,
                                                          trace=_stderr_trace))
        records.sort(key=lambda r: r.sort_key)
    else:
        records = run_matrix(cfg, jobs=args.jobs,
                             on_record=lambda r: logging.info("done %s", ",".join(csv_row(r)[:5])))
    emit_csv(records, args.out if args.out else sys.stdout)
    failed = sum(1 for r in records if r.error)
    if failed:
        print(f"{failed} run(s) failed", file=sys.stderr)
        return EXIT_RUN_FAILED
    return EXIT_OK


def cmd_oracle(args) -> int:
    algs = [a.value for a in Algorithm]
    rows = oracle_comparison(args.count, args.max_n, args.seed_base or 0, algs)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print("algorithm mean_ratio max_ratio below_optimum", file=out)
        for alg in algs:
            ratios = [r[alg] / r["optimum"] for r in rows]
            below = sum(r[alg] < r["optimum"] for r in rows)
            print(f"{alg} {statistics.fmean(ratios):.4f} {max(ratios):.4f} {below}", file=out)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _load_config(args)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        rec = run_simulation(cfg, args.algorithm, args.seed, n=args.n, v_max=args.vmax,
                             mode=args.mode if args.mode != "both" else None,
                             trace=lambda line: print(line, file=out))
    finally:
        if args.out:
            out.close()
    print(",".join(csv_row(rec)), file=sys.stderr)
    return EXIT_OK


def cmd_summarize(args) -> int:
    rows = summarize(read_csv(args.input), baseline=args.baseline)
    emit_summary_csv(rows, args.out if args.out else sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetcds", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--seed-base", type=int, metavar="N")
        sp.add_argument("--algorithms", metavar="LIST")
        sp.add_argument("--mode", choices=["cds", "flooding", "both"])

    run = sub.add_parser("run", help="run the scenario matrix and write CSV")
    common(run)
    run.add_argument("--jobs", type=int, default=1, metavar="N")
    run.set_defaults(func=cmd_run)

    orc = sub.add_parser("oracle", help="compare backbone sizes with the exact minimum CDS")
    orc.add_argument("--count", type=int, default=200)
    orc.add_argument("--max-n", type=int, default=10)
    orc.add_argument("--seed-base", type=int, default=0)
    orc.add_argument("--out", metavar="PATH")
    orc.set_defaults(func=cmd_oracle)

    tr = sub.add_parser("trace", help="single seeded run with an event log")
    common(tr)
    tr.add_argument("--algorithm", default="EAS_CDS")
    tr.add_argument("--seed", type=int, default=1)
    tr.add_argument("--n", type=int)
    tr.add_argument("--vmax", type=float)
    tr.set_defaults(func=cmd_trace)

    sm = sub.add_parser("summarize", help="aggregate a run CSV per group")
    sm.add_argument("input", metavar="CSV")
    sm.add_argument("--out", metavar="PATH")
    sm.add_argument("--baseline", default="WU_EMPR")
    sm.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if "algorithm" in str(exc) or "mode" in str(exc):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
