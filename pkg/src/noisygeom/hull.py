"""Static convex hull: noisy sort, then a monotone-chain Graham scan."""

from __future__ import annotations

import math

import numpy as np

from .bst import noisy_sort
from .errors import GeneralPositionViolation, TooFewPoints
from .noise import NoisyContext
from .predicates import COORD_BOUND, Point, compare_lex, in_bounds, orient2d
from .walk import WalkConfig


def find_collinear_triple(points, rows: int | None = None) -> tuple | None:
    """Some collinear triple of distinct points, or None (exact, O(n^2 log n)).

    For each point, directions to all later points are reduced by their gcd
    and sign-normalised; a repeated direction means three points on a line.
    ``rows`` limits the scan to triples whose first point is among the first
    ``rows`` points.
    """
    arr = np.asarray([tuple(p) for p in points], dtype=np.int64)
    n = len(arr)
    for i in range(min(n - 2, n if rows is None else rows)):
        d = arr[i + 1:] - arr[i]
        g = np.gcd(d[:, 0], d[:, 1])
        g[g == 0] = 1
        d = d // g[:, None]
        flip = (d[:, 0] < 0) | ((d[:, 0] == 0) & (d[:, 1] < 0))
        d[flip] *= -1
        key = d[:, 0] * (1 << 26) + d[:, 1]  # |d[:, 1]| < 2^25 for all inputs used here
        srt = np.sort(key)
        dup = srt[1:][srt[1:] == srt[:-1]]
        if len(dup):
            same = np.nonzero(key == dup[0])[0][:2]
            return tuple(Point(*map(int, arr[k])) for k in (i, i + 1 + same[0], i + 1 + same[1]))
    return None


def validate_hull_input(points) -> list[Point]:
    pts = [Point(*p) for p in points]
    if len(pts) < 3:
        raise TooFewPoints(f"a hull needs at least 3 points, got {len(pts)}")
    for p in pts:
        if not in_bounds(p, COORD_BOUND):
            raise GeneralPositionViolation(f"point {p} outside the coordinate bound")
    if len(set(pts)) != len(pts):
        raise GeneralPositionViolation("duplicate points")
    triple = find_collinear_triple(pts)
    if triple is not None:
        raise GeneralPositionViolation(f"collinear points {triple}")
    return pts


def convex_hull_2d(points, ctx: NoisyContext, cfg: WalkConfig | None = None, c: float = 2.0, validate: bool = True):
    """Counterclockwise hull vertices starting at the lexicographically smallest point."""
    pts = validate_hull_input(points) if validate else [Point(*p) for p in points]
    n = len(pts)
    if n < 3:
        raise TooFewPoints(f"a hull needs at least 3 points, got {n}")
    if cfg is None:
        cfg = WalkConfig.for_size(n, c)
    plan = ctx.plan(float(n) ** -(c + 1))
    order = noisy_sort(pts, compare_lex, ctx, cfg)

    def chain(seq):
        h: list = []
        for p in seq:
            while len(h) >= 2 and not ctx.ccw(h[-2], h[-1], p, plan):
                h.pop()
            h.append(p)
        return h

    lower = chain(order)
    upper = chain(reversed(order))
    return lower[:-1] + upper[:-1]


def gift_wrap(points) -> list[Point]:
    """Exact Jarvis march, same output convention as :func:`convex_hull_2d`."""
    pts = [Point(*p) for p in points]
    start = min(pts)
    hull = [start]
    cur = start
    while True:
        cand = pts[0] if pts[0] != cur else pts[1]
        for p in pts:
            if p != cur and orient2d(cur, cand, p) < 0:
                cand = p
        if cand == start:
            return hull
        hull.append(cand)
        cur = cand
        if len(hull) > len(pts):
            raise AssertionError("gift wrapping did not close")


def is_convex_ccw(hull) -> bool:
    m = len(hull)
    return m >= 3 and all(orient2d(hull[i], hull[(i + 1) % m], hull[(i + 2) % m]) > 0 for i in range(m))


def contains_all(hull, points) -> bool:
    """Every point inside or on the polygon (exact, vectorised)."""
    h = np.asarray(hull, dtype=np.int64)
    p = np.asarray([tuple(q) for q in points], dtype=np.int64)
    a, b = h, np.roll(h, -1, axis=0)
    cross = (b[:, 0] - a[:, 0])[None, :] * (p[:, 1:2] - a[:, 1][None, :]) - (b[:, 1] - a[:, 1])[None, :] * (
        p[:, 0:1] - a[:, 0][None, :]
    )
    return bool((cross >= 0).all())
