"""Command line entry point: ``ngeo {gen,run,verify,counterexample,scaling}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path

from ..errors import NoisyGeomError
from .counterexample import DEFAULT_K, counterexample_walk
from .experiment import ALGORITHMS, ExperimentConfig, run_experiment
from .instances import KINDS, dumps, generate_instance, read_instance, validate_instance


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            lo, hi = int(lo.removeprefix("2^")), int(hi.removeprefix("2^"))
            out.extend(1 << e for e in range(lo, hi + 1))
        elif part.startswith("2^"):
            out.append(1 << int(part[2:]))
        else:
            out.append(int(part))
    return out


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser, n_help="input size") -> None:
    p.add_argument("--algo", choices=sorted(ALGORITHMS), required=True)
    p.add_argument("--n", required=True, help=n_help)
    p.add_argument("--p", type=float, default=0.1, help="error probability of each primitive")
    p.add_argument("--c", type=float, default=2.0, help="failure target epsilon = n^-c")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--emit-trapezoids", action="store_true")
    p.add_argument("--instrumented", action="store_true", help="run exact structural checks during the build")
    p.add_argument("--queries", type=int, default=0, help="point-location queries per finished map")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ngeo", description="Noisy-primitive geometry experiments")
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    r = sub.add_parser("run", help="run seeded trials and verify each against an exact oracle")
    _common(r)
    r.add_argument("--in", dest="infile", help="instance file (default: generate one per trial)")
    r.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")
    r.add_argument("--timing", action="store_true", help="add wall time to the CSV (not reproducible)")
    r.add_argument("--min-success", type=float, default=0.99)

    v = sub.add_parser("verify", help="check an instance's exact preconditions and a noise-free run")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--algo", choices=sorted(ALGORITHMS))

    ce = sub.add_parser("counterexample", help="generalized walk on the alternating-goal tree")
    ce.add_argument("--n", default="2^10..2^20", help="powers of two, e.g. 2^10..2^20 or 1024,4096")
    ce.add_argument("--trials", type=int, default=200)
    ce.add_argument("--seed", type=int, default=0)
    ce.add_argument("--c", type=float, default=2.0)
    ce.add_argument("--k", type=float, default=DEFAULT_K, help="constant K in q = K log log n / log n")
    ce.add_argument("--band", type=float, default=2.0, help="allowed max/min ratio of normalised means")
    ce.add_argument("--out")

    sc = sub.add_parser("scaling", help="primitive calls per (n log n) across several n")
    _common(sc, n_help="comma-separated sizes, e.g. 512,2048,8192 or 2^9..2^13")
    sc.add_argument("--tolerance", type=float, default=0.25, help="allowed relative deviation from the mean ratio")
    sc.add_argument("--out")
    return ap


def _config(args, n: int, instance=None) -> ExperimentConfig:
    return ExperimentConfig(
        algo=args.algo, n=n, p=args.p, c=args.c, seed=args.seed, trials=args.trials,
        instance=instance, emit_trapezoids=args.emit_trapezoids, instrumented=args.instrumented,
        queries=args.queries, workers=args.workers,
    )


def cmd_gen(args) -> int:
    _emit(dumps(generate_instance(args.kind, args.n, args.seed)), args.out)
    return 0


def cmd_run(args) -> int:
    inst = read_instance(args.infile) if args.infile else None
    n = inst.n if inst is not None else int(args.n)
    rep = run_experiment(_config(args, n, inst), timing=args.timing)
    if args.out:
        Path(f"{args.out}.csv").write_text(rep.to_csv(args.timing))
        Path(f"{args.out}.json").write_text(rep.to_json())
    else:
        sys.stdout.write(rep.to_json())
    return 0 if rep.success_rate >= args.min_success else 1


def cmd_verify(args) -> int:
    inst = read_instance(args.infile)
    try:
        validate_instance(inst)
    except NoisyGeomError as e:
        print(f"invalid: {type(e).__name__}: {e}")
        return 1
    print(f"valid {inst.kind} instance with {inst.n} records")
    if args.algo:
        cfg = ExperimentConfig(algo=args.algo, n=inst.n, p=0.0, trials=1, instance=inst)
        rep = run_experiment(cfg, timing=False)
        ok = rep.trials[0].success
        print(f"{args.algo} without noise: {'matches' if ok else 'DIFFERS FROM'} the exact oracle")
        return 0 if ok else 1
    return 0


def cmd_counterexample(args) -> int:
    rows = counterexample_walk(_int_list(args.n), args.trials, args.seed, args.k, args.c)
    buf = io.StringIO()
    fields = list(asdict(rows[0]).keys()) + ["exceeds_budget"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**asdict(r), "exceeds_budget": int(r.exceeds_budget)})
    _emit(buf.getvalue(), args.out)
    norm = [r.normalized for r in rows]
    in_band = max(norm) <= args.band * min(norm)
    return 0 if in_band and rows[-1].exceeds_budget else 1


def cmd_scaling(args) -> int:
    out = []
    for n in _int_list(args.n):
        s = run_experiment(_config(args, n), timing=False).summary()
        out.append({"n": n, "success_rate": s["success_rate"], "calls_per_size_log": s["calls_per_size_log"],
                    "mean_calls": s["mean_calls"]})
    ratios = [o["calls_per_size_log"] for o in out]
    mean = sum(ratios) / len(ratios)
    spread = max(abs(r - mean) / mean for r in ratios)
    summary = {"algo": args.algo, "p": args.p, "c": args.c, "rows": out, "max_relative_deviation": spread,
               "tolerance": args.tolerance}
    _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if spread <= args.tolerance else 1


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "verify": cmd_verify,
    "counterexample": cmd_counterexample,
    "scaling": cmd_scaling,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.verb](args)


if __name__ == "__main__":
    sys.exit(main())
