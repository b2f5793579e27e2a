"""Noisy Boolean primitives.

A :class:`NoisyContext` is the only way the algorithms read geometry.  It
wraps the exact kernels of :mod:`noisygeom.predicates`, flips each Boolean
answer independently with probability ``p`` and counts every noisy
evaluation.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from . import predicates as pr
from .errors import GeneralPositionViolation, InvalidNoiseLevel

__all__ = [
    "NoisyContext",
    "RepetitionPlan",
    "WalkStats",
    "binomial_tail",
    "derive_seed",
    "majority_vote",
    "noisy_eval",
    "repetitions_for",
]


def check_noise_level(p: float) -> float:
    p = float(p)
    if not (0.0 <= p < 0.5) or math.isnan(p):
        raise InvalidNoiseLevel(f"error probability must lie in [0, 1/2), got {p}")
    return p


def derive_seed(seed: int, *stream: int | str) -> int:
    """64-bit seed for an independent stream, by hashing (seed, *stream)."""
    text = ":".join(str(s) for s in (seed, *stream)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


@lru_cache(maxsize=4096)
def binomial_tail(r: int, p: float) -> float:
    """Exact Pr[Bin(r, p) > r/2], i.e. the error of an r-fold majority vote."""
    if p == 0.0:
        return 0.0
    q = 1.0 - p
    return math.fsum(math.comb(r, k) * p**k * q ** (r - k) for k in range(r // 2 + 1, r + 1))


@dataclass(frozen=True)
class RepetitionPlan:
    """Odd repetition count ``r`` whose majority error at ``p`` is ``error <= target``."""

    r: int
    target: float
    p: float
    error: float


@lru_cache(maxsize=1024)
def repetitions_for(p: float, target: float) -> RepetitionPlan:
    p = check_noise_level(p)
    if not 0.0 < target < 1.0:
        raise ValueError(f"target failure probability must lie in (0, 1), got {target}")
    r = 1
    err = binomial_tail(1, p)
    while err > target:
        r += 2
        err = binomial_tail(r, p)
    return RepetitionPlan(r, target, p, err)


@dataclass
class WalkStats:
    walks: int = 0
    consultations: int = 0
    terminal_pushes: int = 0
    forward_moves: int = 0
    rejected: int = 0
    retries: int = 0


class NoisyContext:
    """Error probability, seeded random stream and call counter of one trial.

    ``calls`` counts noisy evaluations: a majority vote of ``r`` repetitions
    adds ``r``.  Two contexts built from the same (p, seed, stream) and fed
    the same call sequence produce the same answers.
    """

    def __init__(self, p: float, seed: int = 0, stream: int | str = 0):
        self.p = check_noise_level(p)
        self.seed = int(seed)
        self.stream = stream
        self._rng = random.Random(derive_seed(self.seed, stream))
        self._random = self._rng.random
        self.calls = 0
        self.stats = WalkStats()

    def __repr__(self):
        return f"NoisyContext(p={self.p}, seed={self.seed}, stream={self.stream!r}, calls={self.calls})"

    def spawn(self, stream: int | str) -> "NoisyContext":
        """Independent child stream; counters are not shared."""
        return NoisyContext(self.p, self.seed, f"{self.stream}/{stream}")

    def rng(self) -> random.Random:
        """The underlying generator, for structural randomness (permutations)."""
        return self._rng

    def plan(self, target: float) -> RepetitionPlan:
        return repetitions_for(self.p, target)

    def eval(self, answer: bool) -> bool:
        self.calls += 1
        if self.p and self._random() < self.p:
            return not answer
        return answer

    def vote(self, answer: bool, plan: RepetitionPlan | None = None) -> bool:
        """Majority of ``plan.r`` noisy evaluations of the same exact answer.

        The r flips are independent Bernoulli(p), so the majority is wrong
        exactly with probability ``plan.error``; that single event is drawn
        directly and the counter still advances by r.
        """
        if plan is None or plan.r == 1:
            self.calls += 1
            if self.p and self._random() < self.p:
                return not answer
            return answer
        self.calls += plan.r
        if self.p and self._random() < plan.error:
            return not answer
        return answer

    # Boolean views of the exact kernels.  A zero sign violates general
    # position and is reported before any noise is drawn.

    def ccw(self, a, b, c, plan=None) -> bool:
        s = pr.orient2d(a, b, c)
        if not s:
            raise GeneralPositionViolation(f"collinear points {a}, {b}, {c}")
        return self.vote(s > 0, plan)

    def above(self, q, seg, plan=None) -> bool:
        s = pr.above_segment(q, seg)
        if not s:
            raise GeneralPositionViolation(f"point {q} on the line of {seg}")
        return self.vote(s > 0, plan)

    def above_span(self, q, seg, plan=None) -> bool:
        """Like :meth:`above`, but q on the line outside the segment's x-span reads as below.

        A walk misled by an earlier wrong answer may test a point against the
        extension of a segment it is nowhere near; that is not a degenerate input.
        """
        s = pr.above_segment(q, seg)
        if not s:
            lo, hi = sorted((seg[0][0], seg[1][0]))
            if lo < q[0] < hi:
                raise GeneralPositionViolation(f"point {q} on segment {seg}")
            return self.vote(False, plan)
        return self.vote(s > 0, plan)

    def left_of(self, a, b, plan=None) -> bool:
        """Is a.x < b.x?"""
        if a[0] == b[0]:
            raise GeneralPositionViolation(f"equal x-coordinates {a}, {b}")
        return self.vote(a[0] < b[0], plan)

    def below_y(self, a, b, plan=None) -> bool:
        if a[1] == b[1]:
            raise GeneralPositionViolation(f"equal y-coordinates {a}, {b}")
        return self.vote(a[1] < b[1], plan)

    def inside_circle(self, a, b, c, d, plan=None) -> bool:
        s = pr.in_circle(a, b, c, d)
        if not s:
            raise GeneralPositionViolation(f"cocircular points {a}, {b}, {c}, {d}")
        return self.vote(s > 0, plan)

    def closer(self, a, b, c, d, plan=None) -> bool:
        """Is |a-b| < |c-d|?"""
        s = pr.compare_dist(a, b, c, d)
        if not s:
            raise GeneralPositionViolation(f"equal distances {a}-{b}, {c}-{d}")
        return self.vote(s < 0, plan)


def noisy_eval(ctx: NoisyContext, exact_answer: bool) -> bool:
    return ctx.eval(exact_answer)


def majority_vote(ctx: NoisyContext, predicate, plan: RepetitionPlan) -> bool:
    """Evaluate ``predicate()`` exactly once and return its r-fold noisy majority."""
    if plan.p != ctx.p:
        raise ValueError(f"plan built for p={plan.p}, context has p={ctx.p}")
    return ctx.vote(bool(predicate()), plan)
