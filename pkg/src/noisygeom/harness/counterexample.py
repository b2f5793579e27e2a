"""Stress scenario: a walk with many acceptable stopping points.

A complete binary tree of height log2 n has one marked root-to-leaf path
whose nodes alternate between "keep going" and "may stop here" (goal), with
the leaf always a goal.  The oracle at a path node answers correctly with
probability 14/15, says "go to the marked child" regardless of goal status
with probability q = K log log n / log n, and names the unmarked child with
the remaining probability.  The walk stops at whatever vertex accumulates the
threshold number of consecutive stays.  Because every goal node is a place
where the walk sits until a q-event moves it on, the expected number of steps
grows like log^2 n / log log n rather than log n.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..noise import derive_seed
from ..walk import WalkConfig

CORRECT = 14.0 / 15.0
DEFAULT_K = 0.2


def escape_probability(n: int, k: float = DEFAULT_K) -> float:
    """q = K log log n / log n (logs base 2)."""
    h = math.log2(n)
    return k * math.log2(h) / h


def stall_probability(q: float, threshold: int, correct: float = CORRECT) -> float:
    """Chance that the walk stops at a given intermediate goal rather than moving on.

    At a goal each productive consultation is a stay (prob. ``correct``) or a
    move down the marked path (prob. ``q``); detours to the unmarked child
    return without resetting the count.
    """
    if q <= 0:
        return 1.0
    return (correct / (correct + q)) ** threshold


@dataclass
class WalkTrace:
    steps: int
    steps_to_leaf: int | None
    final_depth: int
    on_path: bool
    is_goal: bool


class _Scenario:
    def __init__(self, height: int, q: float, correct: float, rnd: random.Random):
        if correct + q > 1.0 + 1e-12:
            raise ValueError(f"q={q} too large: 14/15 + q exceeds 1")
        self.h = height
        self.q = q
        self.correct = correct
        self.rnd = rnd

    def is_goal(self, depth: int) -> bool:
        return depth % 2 == 1 or depth == self.h

    def oracle(self, v):
        """v = (depth, on_path).  Returns (claims_valid, next) with next in {v, 'marked', 'other', random child}."""
        depth, on_path = v
        u = self.rnd.random()
        if not on_path:
            if u < self.correct:
                return False, None
            # a lie at an unmarked node: claim validity and step to a random child
            if depth == self.h:
                return True, v
            return True, (depth + 1, False)
        if depth == self.h:
            if u < self.correct + self.q:
                return True, v
            return False, None
        if u < self.correct:
            return True, (v if self.is_goal(depth) else (depth + 1, True))
        if u < self.correct + self.q:
            return True, (depth + 1, True)
        return True, (depth + 1, False)


def run_generalized_walk(n: int, threshold: int, k: float = DEFAULT_K, seed: int = 0, trial: int = 0,
                         correct: float = CORRECT, q: float | None = None, max_steps: int = 10**7) -> WalkTrace:
    """One walk with the repetition-count stopping rule and no stay-undo.

    A "move" answer at a vertex that is also on top of the stack advances
    instead of popping the repetition, so goal nodes can be left.
    """
    h = int(round(math.log2(n)))
    if q is None:
        q = escape_probability(n, k)
    sc = _Scenario(h, q, correct, random.Random(derive_seed(seed, "counterexample", n, trial)))
    stack: list = []
    counts: list = []
    v = (0, True)
    steps = 0
    to_leaf = None
    while steps < max_steps:
        steps += 1
        ok, w = sc.oracle(v)
        if not ok:
            if stack:
                v = stack.pop()
                counts.pop()
            continue
        if w == v:
            c = counts[-1] + 1 if stack and stack[-1] == v else 1
            stack.append(v)
            counts.append(c)
            if c >= threshold:
                return WalkTrace(steps, to_leaf, v[0], v[1], v[1] and sc.is_goal(v[0]))
            continue
        stack.append(v)
        counts.append(1)
        v = w
        if to_leaf is None and v == (h, True):
            to_leaf = steps
    raise RuntimeError("generalized walk did not stop")


@dataclass
class CounterexampleRow:
    n: int
    log_n: int
    q: float
    threshold: int
    trials: int
    mean_steps: float
    mean_steps_to_leaf: float
    reached_leaf: float
    normalized: float
    walk_budget: float
    stall_per_goal: float

    @property
    def exceeds_budget(self) -> bool:
        return self.mean_steps > self.walk_budget


def counterexample_walk(ns, trials: int, seed: int = 0, k: float = DEFAULT_K, c: float = 2.0,
                        correct: float = CORRECT, q: float | None = None) -> list[CounterexampleRow]:
    """Mean step counts over a sweep of n; the threshold is the engine's for epsilon = n^-c."""
    rows = []
    for n in ns:
        if n < 2 or n & (n - 1):
            raise ValueError(f"n must be a power of two, got {n}")
        cfg = WalkConfig.for_size(n, c)
        thr = cfg.threshold
        h = int(round(math.log2(n)))
        qq = escape_probability(n, k) if q is None else q
        traces = [run_generalized_walk(n, thr, k, seed, t, correct, qq) for t in range(trials)]
        mean = sum(t.steps for t in traces) / trials
        reached = [t for t in traces if t.steps_to_leaf is not None]
        leaf_rate = sum(t.final_depth == h and t.on_path for t in traces) / trials
        mean_leaf = sum(t.steps_to_leaf for t in reached) / len(reached) if reached else float("nan")
        scale = h * h / math.log2(h)
        rows.append(
            CounterexampleRow(
                n=n, log_n=h, q=qq, threshold=thr, trials=trials,
                mean_steps=mean, mean_steps_to_leaf=mean_leaf, reached_leaf=leaf_rate,
                normalized=mean_leaf / scale,
                walk_budget=3 * (h + cfg.log_inv_eps),
                stall_per_goal=stall_probability(qq, thr, correct),
            )
        )
    return rows
