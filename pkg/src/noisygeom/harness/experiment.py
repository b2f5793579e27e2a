"""Seeded trials, exact verification and CSV/JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..bst import noisy_sort, repetition_sort
from ..delaunay import build_delaunay, emst, exact_mst, non_delaunay_edges
from ..errors import NoisyGeomError
from ..hull import contains_all, convex_hull_2d, gift_wrap, is_convex_ccw
from ..noise import NoisyContext, check_noise_level, derive_seed
from ..predicates import COORD_BOUND, compare_lex
from ..sweep import brute_force_closest_pair, brute_force_crossings, closest_pair, intersect_segments
from ..trapmap import build_trap_map
from ..walk import WalkConfig
from .instances import Instance, generate_instance


@dataclass(frozen=True)
class ExperimentConfig:
    algo: str
    n: int
    p: float = 0.1
    c: float = 2.0
    seed: int = 0
    trials: int = 1
    instance: Instance | None = None
    emit_trapezoids: bool = False
    instrumented: bool = False
    queries: int = 0
    workers: int = 1

    def __post_init__(self):
        check_noise_level(self.p)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {sorted(ALGORITHMS)}")


@dataclass
class TrialRecord:
    trial: int
    success: bool
    calls: int
    consultations: int
    walks: int
    retries: int
    size: int = 0
    error: str = ""
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


CSV_COLUMNS = ("trial", "success", "calls", "consultations", "walks", "retries", "size", "error")


@dataclass
class ExperimentReport:
    config: dict
    trials: list

    @property
    def successes(self) -> int:
        return sum(t.success for t in self.trials)

    @property
    def success_rate(self) -> float:
        return self.successes / len(self.trials)

    def summary(self) -> dict:
        calls = np.array([t.calls for t in self.trials], dtype=float)
        cons = np.array([t.consultations for t in self.trials], dtype=float)
        sizes = np.array([t.size for t in self.trials], dtype=float)
        n = self.config["n"]
        scale = n * math.log2(n) if n > 1 else 1.0
        size_scale = np.where(sizes > 1, sizes * np.log2(np.maximum(sizes, 2)), scale)
        return {
            **{k: v for k, v in self.config.items() if k != "instance"},
            "success_rate": self.success_rate,
            "successes": self.successes,
            "mean_calls": float(calls.mean()),
            "p95_calls": float(np.percentile(calls, 95)),
            "mean_consultations": float(cons.mean()),
            "p95_consultations": float(np.percentile(cons, 95)),
            "calls_per_nlogn": float(calls.mean() / scale),
            "calls_per_size_log": float((calls / size_scale).mean()),
            "retries": int(sum(t.retries for t in self.trials)),
            "errors": sorted({t.error for t in self.trials if t.error}),
        }

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = CSV_COLUMNS + (("wall_time",) if timing else ())
        w.writerow(cols)
        for t in self.trials:
            row = [t.trial, int(t.success), t.calls, t.consultations, t.walks, t.retries, t.size, t.error]
            if timing:
                row.append(f"{t.wall_time:.6f}")
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


# -- per-algorithm trial functions ---------------------------------------------
# Each takes (instance, ctx, cfg, options) and returns (success, size, extra).
# ``size`` is the natural input size for scaling ratios (n, or n + k for sweeps).


def _sort_trial(inst, ctx, cfg, opt):
    pts = inst.points
    out = noisy_sort(pts, compare_lex, ctx, cfg)
    return out == sorted(pts), len(pts), {}


def _repsort_trial(inst, ctx, cfg, opt):
    pts = inst.points
    out = repetition_sort(pts, compare_lex, ctx, opt["c"])
    return out == sorted(pts), len(pts), {}


def _trapmap_trial(inst, ctx, cfg, opt):
    segs = inst.segments
    tm = build_trap_map(segs, ctx, cfg)
    exact = build_trap_map(segs, None, permutation=tm.permutation, validate=False)
    ok = tm.canonical_leaves() == exact.canonical_leaves()
    n = len(segs)
    extra = {"leaves": len(tm.leaves()), "nodes": len(tm.nodes), "leaf_bound_ok": len(tm.leaves()) <= 3 * n + 1}
    ok = ok and extra["leaf_bound_ok"]
    if opt["instrumented"]:
        tm.check()
    q = opt["queries"]
    if q and ok:
        pts = _query_points(inst, q, ctx)
        calls0 = ctx.calls
        got = tm.query_batch(pts, ctx, cfg)
        ref = exact.locate_exact_batch(pts)
        wrong = sum(a.canonical() != b.canonical() for a, b in zip(got, ref))
        extra.update(queries=q, query_wrong=wrong, query_calls=ctx.calls - calls0)
    return ok, n, extra


def _query_points(inst, q, ctx):
    """Uniform query points off every wall and every segment."""
    rng = np.random.default_rng(ctx.rng().getrandbits(64))
    seg = np.asarray(inst.records, dtype=np.int64).reshape(-1, 4)
    lo = np.minimum(seg[:, 0], seg[:, 2])
    hi = np.maximum(seg[:, 0], seg[:, 2])
    walls = np.concatenate([seg[:, 0], seg[:, 2]])
    out = np.zeros((0, 2), dtype=np.int64)
    while len(out) < q:
        cand = rng.integers(-COORD_BOUND, COORD_BOUND + 1, size=(q, 2))
        x, y = cand[:, :1], cand[:, 1:]
        on_line = (seg[:, 2] - seg[:, 0]) * (y - seg[:, 1]) - (seg[:, 3] - seg[:, 1]) * (x - seg[:, 0]) == 0
        on_seg = (on_line & (lo <= x) & (x <= hi)).any(axis=1)
        ok = ~on_seg & ~np.isin(cand[:, 0], walls)
        out = np.vstack([out, cand[ok]])
    return [tuple(r) for r in out[:q].tolist()]


def _sweep_trial(inst, ctx, cfg, opt):
    segs = inst.segments
    res = intersect_segments(segs, ctx, cfg, emit_trapezoids=opt["emit_trapezoids"], instrumented=opt["instrumented"])
    ref = brute_force_crossings(segs)
    ok = [(i, j, x, y) for i, j, x, y in res.crossings] == ref
    extra = {"k": len(ref)}
    if res.trapezoids is not None:
        extra["trapezoids"] = len(res.trapezoids)
        ok = ok and len(res.trapezoids) == 3 * len(segs) + 3 * len(ref) + 1
    return ok, len(segs) + len(ref), extra


def _closest_trial(inst, ctx, cfg, opt):
    pts = inst.points
    return closest_pair(pts, ctx, cfg) == brute_force_closest_pair(pts), len(pts), {}


def _hull_trial(inst, ctx, cfg, opt):
    pts = inst.points
    h = convex_hull_2d(pts, ctx, cfg)
    ok = h == gift_wrap(pts)
    checks = is_convex_ccw(h) and contains_all(h, pts)
    return ok, len(pts), {"post_checks": checks, "hull_size": len(h)}


def _delaunay_trial(inst, ctx, cfg, opt):
    pts = inst.points
    dag = build_delaunay(pts, ctx, cfg)
    bad = non_delaunay_edges(dag)
    ok = not bad and len(dag.leaves()) == 2 * len(pts) + 1
    if opt["instrumented"]:
        exact = build_delaunay(pts, None, permutation=dag.permutation, validate=False)
        ok = ok and dag.triangles() == exact.triangles()
    extra = {"nodes": len(dag.nodes), "flips": dag.flips, "depth": dag.max_depth}
    return ok, len(pts), extra


def _emst_trial(inst, ctx, cfg, opt):
    pts = inst.points
    dag = build_delaunay(pts, ctx, cfg)
    tree = emst(pts, ctx, cfg, dag=dag)
    return tree == exact_mst(pts), len(pts), {"delaunay_ok": not non_delaunay_edges(dag)}


ALGORITHMS: dict[str, tuple[str, Callable]] = {
    "sort": ("sorted-adversarial", _sort_trial),
    "repetition-sort": ("sorted-adversarial", _repsort_trial),
    "trapmap": ("segments-noncrossing", _trapmap_trial),
    "sweep": ("segments-crossing", _sweep_trial),
    "closest-pair": ("points-uniform", _closest_trial),
    "hull": ("points-uniform", _hull_trial),
    "delaunay": ("points-uniform", _delaunay_trial),
    "emst": ("points-uniform", _emst_trial),
}


def run_trial(cfg: ExperimentConfig, t: int, timing: bool = True) -> TrialRecord:
    kind, fn = ALGORITHMS[cfg.algo]
    inst = cfg.instance if cfg.instance is not None else generate_instance(kind, cfg.n, derive_seed(cfg.seed, "trial", t))
    ctx = NoisyContext(cfg.p, cfg.seed, f"{cfg.algo}/{t}")
    wcfg = WalkConfig.for_size(max(inst.n, 2), cfg.c)
    opt = {
        "c": cfg.c,
        "instrumented": cfg.instrumented,
        "emit_trapezoids": cfg.emit_trapezoids,
        "queries": cfg.queries,
    }
    start = time.perf_counter()
    err = ""
    extra: dict = {}
    size = inst.n
    try:
        ok, size, extra = fn(inst, ctx, wcfg, opt)
    except (NoisyGeomError, AssertionError) as e:
        ok, err = False, type(e).__name__
    wall = time.perf_counter() - start if timing else 0.0
    s = ctx.stats
    return TrialRecord(t, bool(ok), ctx.calls, s.consultations, s.walks, s.retries, size, err, wall, extra)


def _run_trial_star(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, timing: bool = True) -> ExperimentReport:
    """Run all trials; records come back ordered by trial index whatever the worker count."""
    jobs = [(cfg, t, timing) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            records = list(ex.map(_run_trial_star, jobs))
    else:
        records = [run_trial(*j) for j in jobs]
    records.sort(key=lambda r: r.trial)
    conf = asdict(cfg)
    conf.pop("instance")
    conf.pop("workers")
    conf["instance"] = "file" if cfg.instance is not None else "generated"
    return ExperimentReport(conf, records)
