"""Command line: gen / run / report / replay."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .errors import InsufficientData
from .graph_model import FAMILIES, GeneratorSpec, generate, save
from .harness import (ALGORITHMS, VARIANTS, ExperimentConfig, complexity_report, read_records,
                      replay, run_experiment)


def parse_seeds(text: str) -> list[int]:
    """'0-9', '1,4,7' or a mix such as '0-2,10'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1) if not part.startswith("-") else part.rsplit("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("no seeds given")
    return out


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(args.family, args.n, args.lam, args.seed, args.symmetric,
                         tuple(args.sources))
    inst = generate(spec)
    save(inst, args.out)
    print(f"wrote {args.out}: n={inst.n} m={inst.topology.m} lam={inst.lam}")
    return 0


def _cmd_run(args) -> int:
    if args.round_cap_multiplier is not None:
        os.environ["ROUND_CAP_MULTIPLIER"] = str(args.round_cap_multiplier)
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        data = asdict(cfg)
    else:
        if not args.family and not args.instance:
            print("run: give a config file, --family/--n or --instance", file=sys.stderr)
            return 2
        instances = [str(p) for p in args.instance or []]
        for fam in args.family or []:
            for n in args.n or [64]:
                instances.append({"family": fam, "n": n, "lam": args.lam,
                                  "seed": args.instance_seed, "symmetric": args.symmetric})
        data = {"instances": instances, "algorithms": args.algorithm or ["main"]}
    # command-line flags win over the config file
    for key, val in (("seeds", args.seeds), ("variant", args.variant), ("kappa", args.kappa),
                     ("out", args.out), ("workers", args.workers)):
        if val is not None:
            data[key] = val
    if args.algorithm:
        data["algorithms"] = args.algorithm
    if args.oracle_check is not None:
        data["oracle_check"] = args.oracle_check
    cfg = ExperimentConfig(**data)
    records = run_experiment(cfg)
    errors = sum(1 for r in records if r.error)
    mism = sum(1 for r in records if r.exact_match is False)
    print(f"{len(records)} records, {mism} mismatches, {errors} errors -> {cfg.out}")
    return 0


def _cmd_report(args) -> int:
    records = []
    for path in args.records:
        records.extend(read_records(path))
    try:
        fits = complexity_report(records, by_diameter_class=not args.ignore_diameter,
                                 threshold=args.threshold)
    except InsufficientData as exc:
        print(f"report: {exc}", file=sys.stderr)
        return 3
    rows = [asdict(f) for f in fits]
    for f in fits:
        flag = "  REGRESSION (no better than linear)" if f.regression_failure else ""
        print(f"{f.variant:32s} {f.family:24s} D-class={f.d_class}  slope={f.slope:.3f} "
              f"R2={f.r2:.3f} points={f.points}{flag}")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2))
    return 1 if any(f.regression_failure for f in fits) and args.fail_on_regression else 0


def _cmd_replay(args) -> int:
    res = replay(args.artifact)
    print(json.dumps(res, indent=2))
    return 0 if res["identical"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="congest-sssp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--family", required=True, choices=sorted(FAMILIES))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--lam", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--symmetric", action="store_true")
    g.add_argument("--sources", type=int, nargs="+", default=[0])
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run an experiment matrix")
    r.add_argument("config", nargs="?", help="JSON experiment config")
    r.add_argument("--family", nargs="+")
    r.add_argument("--n", type=int, nargs="+")
    r.add_argument("--lam", type=int, default=1)
    r.add_argument("--instance-seed", type=int, default=0)
    r.add_argument("--symmetric", action="store_true")
    r.add_argument("--instance", nargs="+", help="instance files")
    r.add_argument("--algorithm", nargs="+", choices=ALGORITHMS)
    r.add_argument("--seeds", type=parse_seeds)
    r.add_argument("--variant", choices=VARIANTS)
    r.add_argument("--kappa", type=int)
    r.add_argument("--oracle-check", dest="oracle_check", action="store_true", default=None)
    r.add_argument("--no-oracle-check", dest="oracle_check", action="store_false")
    r.add_argument("--round-cap-multiplier", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out")
    r.set_defaults(func=_cmd_run)

    rp = sub.add_parser("report", help="fit round-count exponents from report files")
    rp.add_argument("records", nargs="+", help=".csv or .jsonl report files")
    rp.add_argument("--threshold", type=float, default=0.95)
    rp.add_argument("--ignore-diameter", action="store_true",
                    help="fit across diameter classes instead of per class")
    rp.add_argument("--fail-on-regression", action="store_true")
    rp.add_argument("--out")
    rp.set_defaults(func=_cmd_report)

    rr = sub.add_parser("replay", help="re-run a stored failure artifact")
    rr.add_argument("artifact")
    rr.set_defaults(func=_cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
