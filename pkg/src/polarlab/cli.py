"""Command line entry point: ``polarlab {sweep,latency,compare,census}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .list_decoder import Scheme
from .polar_code import CodeSpec, default_spec_path
from .sim_harness import (
    REFERENCE_CENSUS,
    REFERENCE_LATENCY,
    SweepConfig,
    census_report,
    compare_schemes,
    format_census,
    latency_report,
    results_csv,
    run_sweep,
    write_results,
)


def _load_spec(path):
    return CodeSpec.load(default_spec_path() if path in (None, "default") else path)


def _config(args) -> SweepConfig:
    cfg = SweepConfig.load(args.config) if args.config else SweepConfig()
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    if getattr(args, "frames", None) is not None:
        cfg.max_frames = args.frames
    return cfg


def _report(name: str, ok: bool) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return ok


def cmd_sweep(args) -> int:
    cfg = _config(args)
    points = run_sweep(cfg)
    if not cfg.out:
        sys.stdout.write(results_csv(points))
    if args.check:
        ok = all(p.frames >= p.block_errors and p.bler == p.block_errors / p.frames
                 for p in points)
        return 0 if _report("sweep rows consistent", ok) else 1
    return 0


def _write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1) + "\n")


def cmd_compare(args) -> int:
    cfg = _config(args)
    reports = compare_schemes(cfg)
    for r in reports:
        print(r.line())
    if cfg.out:
        _write_json(f"{cfg.out}.compare.json", [r.__dict__ for r in reports])
    if args.check:
        ok = all(r.overlap for r in reports)
        return 0 if _report("all compared schemes within overlapping 95% intervals", ok) else 1
    return 0


def cmd_latency(args) -> int:
    spec = _load_spec(args.spec)
    Ms = [int(m) for m in args.M.split(",")]
    rep = latency_report(spec, Ms, args.L, args.fclk, args.P)
    print(rep["table"])
    for r in rep["reports"]:
        if "throughput_mbps" in r:
            print(f"throughput M={r['M']}: {r['throughput_mbps']:.1f} Mb/s at {args.fclk:g} MHz")
    if args.out:
        _write_json(args.out, rep)
    if args.check:
        ok = True
        for r in rep["reports"]:
            want = REFERENCE_LATENCY.get(r["M"])
            if want is not None:
                ok &= _report(f"latency M={r['M']}",
                              all(r[k] == v for k, v in want.items()))
        return 0 if ok else 1
    return 0


def cmd_census(args) -> int:
    spec = _load_spec(args.spec)
    Ms = [int(m) for m in args.M.split(",")]
    rep = census_report(spec, Ms)
    print(format_census(rep))
    if args.out:
        _write_json(args.out, rep)
    if args.check:
        ok = True
        for M, rows in rep.items():
            if M in REFERENCE_CENSUS:
                ok &= _report(f"census M={M}", rows == REFERENCE_CENSUS[M])
        return 0 if ok else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarlab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output file")
        p.add_argument("--check", action="store_true",
                       help="exit nonzero if a built-in acceptance check fails")

    for name, fn, helptext in (("sweep", cmd_sweep, "BLER sweep from a config file"),
                               ("compare", cmd_compare, "paired scheme comparison")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", nargs="?", help="INI file with a [sweep] section")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--frames", type=int, help="override max_frames")
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("latency", help="cycle-count table")
    p.add_argument("--spec", default="default")
    p.add_argument("--M", default="2,4,8")
    p.add_argument("--L", type=int, default=32)
    p.add_argument("--P", type=int, default=64)
    p.add_argument("--fclk", type=float, help="clock in MHz for throughput")
    common(p)
    p.set_defaults(func=cmd_latency)

    p = sub.add_parser("census", help="SUBT counts per tuple length")
    p.add_argument("--spec", default="default")
    p.add_argument("--M", default="2,4,8")
    common(p)
    p.set_defaults(func=cmd_census)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
