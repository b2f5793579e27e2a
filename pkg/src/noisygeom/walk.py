"""Path-guided pushdown random walks.

The engine walks a DAG with a stack, consulting a transition oracle that
may lie.  An oracle is a callable ``oracle(v) -> (on_path, next)``; when
``on_path`` is true, ``next`` is either ``v`` itself (stay) or an outgoing
neighbour of ``v``.  The engine never looks at geometry.

Each stack entry carries a repetition count: 1 if the vertex differs from
the entry below it, one more than that entry's count otherwise.  The walk
stops when some count reaches ``ceil(threshold_factor * log2(1/epsilon))``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import BudgetExhausted, StructuralError
from .noise import WalkStats, repetitions_for

Vertex = Hashable
Oracle = Callable[[Vertex], tuple]

DEFAULT_P_E_MAX = 1.0 / 16.0


@dataclass(frozen=True)
class WalkConfig:
    epsilon: float
    p_e_max: float = DEFAULT_P_E_MAX
    path_hint: int = 0
    budget_factor: float = 12.0
    threshold_factor: float = 4.0
    max_retries: int = 3

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.p_e_max < 1.0 / 15.0:
            raise ValueError(f"p_e_max must lie in (0, 1/15), got {self.p_e_max}")

    @classmethod
    def for_size(cls, n: int, c: float = 2.0, **kw) -> "WalkConfig":
        """Configuration with epsilon = n^-c."""
        return cls(epsilon=float(max(n, 2)) ** -c, **kw)

    @property
    def log_inv_eps(self) -> float:
        return math.log2(1.0 / self.epsilon)

    @property
    def threshold(self) -> int:
        return math.ceil(self.threshold_factor * self.log_inv_eps)

    @property
    def budget(self) -> int:
        return math.ceil(self.budget_factor * (self.path_hint + self.log_inv_eps))

    def with_hint(self, path_hint: int) -> "WalkConfig":
        return replace(self, path_hint=int(path_hint))


@dataclass
class WalkOutcome:
    vertex: Vertex
    stack: list
    counts: list
    steps: int
    forward_moves: int
    terminal_pushes: int
    rejected: int

    @property
    def path(self) -> list:
        """Stack vertices with consecutive repetitions collapsed."""
        out = []
        for v in self.stack:
            if not out or out[-1] != v:
                out.append(v)
        return out


def amplify_oracle(oracle: Oracle, error_bound: float, p_e_max: float) -> Oracle:
    """Wrap an oracle so that a plurality of r consultations errs with prob. <= p_e_max."""
    plan = repetitions_for(error_bound, p_e_max)

    def wrapped(v):
        answers = Counter(oracle(v) for _ in range(plan.r))
        return answers.most_common(1)[0][0]

    wrapped.error_bound = plan.error
    return wrapped


def _prepare(oracle, cfg):
    bound = getattr(oracle, "error_bound", 0.0)
    if bound > cfg.p_e_max:
        oracle = amplify_oracle(oracle, bound, cfg.p_e_max)
    return oracle


def walk_once(successors, oracle: Oracle, start: Vertex, cfg: WalkConfig) -> WalkOutcome:
    """One walk attempt; raises BudgetExhausted when the step budget runs out."""
    threshold = cfg.threshold
    budget = cfg.budget
    stack: list = []
    counts: list = []
    v = start
    steps = forward = rejected = 0
    while steps < budget:
        steps += 1
        on_path, w = oracle(v)
        if not on_path:
            # backtrack; at the bottom of the stack we simply stay at start
            if stack:
                v = stack.pop()
                counts.pop()
            continue
        if w is v or w == v:
            c = counts[-1] + 1 if stack and stack[-1] == v else 1
            stack.append(v)
            counts.append(c)
            if c >= threshold:
                return WalkOutcome(v, stack, counts, steps, forward, c, rejected)
            continue
        if w not in successors(v):
            rejected += 1
            continue
        if stack and stack[-1] == v:
            stack.pop()
            counts.pop()
            continue
        stack.append(v)
        counts.append(1)
        forward += 1
        v = w
    raise BudgetExhausted(f"walk from {start!r} exceeded {budget} steps")


def run_walk_outcome(
    successors,
    oracle: Oracle,
    start: Vertex,
    cfg: WalkConfig,
    stats: WalkStats | None = None,
    contains: Callable[[Vertex], bool] | None = None,
) -> WalkOutcome:
    """Walk with up to ``cfg.max_retries`` fresh restarts after budget exhaustion."""
    if contains is not None and not contains(start):
        raise StructuralError(f"start vertex {start!r} is not in the DAG")
    oracle = _prepare(oracle, cfg)
    for attempt in range(cfg.max_retries + 1):
        try:
            out = walk_once(successors, oracle, start, cfg)
        except BudgetExhausted:
            if stats is not None:
                stats.retries += 1
                stats.consultations += cfg.budget
            if attempt == cfg.max_retries:
                raise
            continue
        if stats is not None:
            stats.walks += 1
            stats.consultations += out.steps
            stats.terminal_pushes += out.terminal_pushes
            stats.forward_moves += out.forward_moves
            stats.rejected += out.rejected
        return out
    raise AssertionError("unreachable")


def run_walk(successors, oracle: Oracle, start: Vertex, cfg: WalkConfig, stats=None, contains=None):
    """Return the vertex at which the walk terminates."""
    return run_walk_outcome(successors, oracle, start, cfg, stats, contains).vertex


def run_walk_on_tree(children, oracle: Oracle, root: Vertex, cfg: WalkConfig, stats=None):
    """Walk a rooted tree; returns (vertex, root-to-vertex path read off the stack)."""
    if not children(root):
        raise StructuralError("tree walk needs a target distinct from the root")
    out = run_walk_outcome(children, oracle, root, cfg, stats)
    return out.vertex, out.path


# ---------------------------------------------------------------------------
# Batched walks: many independent queries over one static DAG, stepped in
# lock-step with numpy.  Same four-case step and termination rule as
# ``walk_once``.


def run_walks_batch(
    children: np.ndarray,
    oracle_batch: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
    starts: np.ndarray,
    cfg: WalkConfig,
    stats: WalkStats | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one walk per query.

    ``children`` is a (V, D) integer array of successor ids padded with -1.
    ``oracle_batch(qids, verts)`` returns (on_path, next) arrays for the
    given query ids at the given vertices.  Returns (terminal vertex,
    consultations) per query; raises BudgetExhausted if some query fails
    all retries.
    """
    starts = np.asarray(starts, dtype=np.int64)
    q = len(starts)
    result = np.full(q, -1, dtype=np.int64)
    used = np.zeros(q, dtype=np.int64)
    pending = np.arange(q)
    for attempt in range(cfg.max_retries + 1):
        if len(pending) == 0:
            break
        res, steps, ok = _batch_attempt(children, oracle_batch, starts[pending], pending, cfg)
        result[pending[ok]] = res[ok]
        used[pending] += steps
        if stats is not None:
            stats.walks += int(ok.sum())
            stats.consultations += int(steps.sum())
            stats.terminal_pushes += int(ok.sum()) * cfg.threshold
            stats.retries += int((~ok).sum())
        pending = pending[~ok]
    if len(pending):
        raise BudgetExhausted(f"{len(pending)} batched walks exceeded their budget")
    return result, used


def _batch_attempt(children, oracle_batch, starts, qids, cfg):
    threshold = cfg.threshold
    budget = cfg.budget
    m = len(starts)
    depth = budget + 1
    stack = np.zeros((m, depth), dtype=np.int64)
    counts = np.zeros((m, depth), dtype=np.int64)
    sp = np.zeros(m, dtype=np.int64)
    cur = starts.copy()
    steps = np.zeros(m, dtype=np.int64)
    result = np.full(m, -1, dtype=np.int64)
    done = np.zeros(m, dtype=bool)
    active = np.arange(m)
    while len(active):
        v = cur[active]
        on, w = oracle_batch(qids[active], v)
        steps[active] += 1
        s = sp[active]
        has = s > 0
        top = np.where(has, stack[active, np.maximum(s - 1, 0)], -1)
        topc = np.where(has, counts[active, np.maximum(s - 1, 0)], 0)

        back = ~on
        stay = on & (w == v)
        move = on & (w != v)
        if move.any():
            legal = (children[v] == w[:, None]).any(axis=1)
            move &= legal
        undo = move & (top == v)
        adv = move & (top != v)

        i = active[back & has]
        if len(i):
            sp[i] -= 1
            cur[i] = stack[i, sp[i]]
        i = active[undo]
        if len(i):
            sp[i] -= 1
        i = active[stay]
        if len(i):
            c = np.where(top[stay] == v[stay], topc[stay] + 1, 1)
            stack[i, sp[i]] = v[stay]
            counts[i, sp[i]] = c
            sp[i] += 1
            fin = c >= threshold
            result[i[fin]] = v[stay][fin]
            done[i[fin]] = True
        i = active[adv]
        if len(i):
            stack[i, sp[i]] = v[adv]
            counts[i, sp[i]] = 1
            sp[i] += 1
            cur[i] = w[adv]
        active = active[~done[active] & (steps[active] < budget)]
    return result, steps, done
