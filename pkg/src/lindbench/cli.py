"""Command-line entry point: ``lindbench list-models | run | freeze-regressions | explain``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigError, LindbenchError
from .lattice import CATALOG, CATALOG_DOCS
from . import runner

OUT_DIR_ENV = "LINDBENCH_OUT_DIR"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lindbench", description="Exact dense numerics for dissipative spin lattices.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list-models", help="print the model catalog")
    for name, hlp in (("run", "run the analyses of a config file"),
                      ("freeze-regressions", "run a config and store its scalars as regression targets")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("config", type=Path)
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out-dir", type=Path, default=None, help="report directory")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads")
        sp.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    sp = sub.add_parser("explain", help="describe one analyzer")
    sp.add_argument("analysis_id")
    return p


def _out_dir(args, cfg) -> Path:
    if args.out_dir is not None:
        return args.out_dir
    if os.environ.get(OUT_DIR_ENV):
        return Path(os.environ[OUT_DIR_ENV])
    return Path(cfg.output_dir)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-models":
            for name in sorted(CATALOG):
                print(f"{name}: {CATALOG_DOCS.get(name, '')}")
            return 0
        if args.command == "explain":
            sys.stdout.write(runner.explain(args.analysis_id))
            return 0
        if args.tol_scale <= 0:
            raise ConfigError("--tol-scale must be positive")
        cfg = runner.load_config(args.config)
        if args.command == "freeze-regressions":
            target = Path(cfg.regressions) if cfg.regressions else _out_dir(args, cfg) / "regressions.json"
            cfg.regressions = None
            path = runner.freeze(cfg, target, args.seed, args.tol_scale, args.jobs)
            print(f"wrote {path}")
            return 0
        report = runner.run_config(cfg, args.seed, args.tol_scale, args.jobs)
        path = report.write(_out_dir(args, cfg))
        for aid, res in report.analyses.items():
            line = f"{aid}: {res['status']}"
            if res.get("reason"):
                line += f" ({res['reason']})"
            print(line)
        print(f"wrote {path}")
        return report.exit_status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LindbenchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
