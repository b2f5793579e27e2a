"""Plane sweeps over noisy comparisons.

``intersect_segments`` is a Bentley–Ottmann sweep whose event queue and
status structure are both noisy red-black trees searched by random walks.
``closest_pair`` sweeps points left to right keeping the active ones in a
y-ordered tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bst import OrderedTree, predecessor, successor, noisy_sort
from .errors import GeneralPositionViolation, InconsistentStructure, TooFewPoints
from .noise import NoisyContext
from .predicates import COORD_BOUND, Point, Segment, above_segment, compare_lex, dist2, in_bounds
from .walk import WalkConfig

LEFT, CROSS, RIGHT = 0, 1, 2


def _cmp(a, b) -> int:
    return (a > b) - (a < b)


def crossing_point(s: Segment, t: Segment) -> tuple[Fraction, Fraction]:
    """Exact intersection of the supporting lines of two non-parallel segments."""
    (ax, ay), (bx, by) = s
    (cx, cy), (dx, dy) = t
    ux, uy = bx - ax, by - ay
    vx, vy = dx - cx, dy - cy
    den = ux * vy - uy * vx
    if den == 0:
        raise GeneralPositionViolation(f"parallel segments {s}, {t}")
    num = (cx - ax) * vy - (cy - ay) * vx
    return Fraction(ax * den + ux * num, den), Fraction(ay * den + uy * num, den)


def _pair_signs(arr: np.ndarray, i: int):
    ax, ay, bx, by = arr.T
    o1 = np.sign((bx[i] - ax[i]) * (ay - ay[i]) - (by[i] - ay[i]) * (ax - ax[i]))
    o2 = np.sign((bx[i] - ax[i]) * (by - ay[i]) - (by[i] - ay[i]) * (bx - ax[i]))
    o3 = np.sign((bx - ax) * (ay[i] - ay) - (by - ay) * (ax[i] - ax))
    o4 = np.sign((bx - ax) * (by[i] - ay) - (by - ay) * (bx[i] - ax))
    return o1, o2, o3, o4


def brute_force_crossings(segments: Sequence[Segment]) -> list[tuple[int, int, Fraction, Fraction]]:
    """All proper crossings (i < j, x, y) by exact all-pairs tests, sorted by x."""
    segs = list(segments)
    if len(segs) < 2:
        return []
    arr = np.asarray([(*s.a, *s.b) for s in segs], dtype=np.int64)
    out = []
    for i in range(len(segs) - 1):
        o1, o2, o3, o4 = (o[i + 1:] for o in _pair_signs(arr, i))
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        for k in np.nonzero(hit)[0]:
            j = i + 1 + int(k)
            x, y = crossing_point(segs[i], segs[j])
            out.append((i, j, x, y))
    out.sort(key=lambda c: (c[2], c[3]))
    return out


def validate_sweep_input(segments) -> tuple[list[Segment], list]:
    """Exact general-position check; returns the segments and their crossings."""
    segs = [s if isinstance(s, Segment) else Segment.of(*s) for s in segments]
    xs: set = set()
    for s in segs:
        if s.a[0] == s.b[0]:
            raise GeneralPositionViolation(f"vertical segment {s}")
        for e in s:
            if not in_bounds(e, COORD_BOUND):
                raise GeneralPositionViolation(f"endpoint {e} outside the coordinate bound")
            if e[0] in xs:
                raise GeneralPositionViolation(f"duplicate event x-coordinate {e[0]}")
            xs.add(e[0])
    if len(segs) >= 2:
        arr = np.asarray([(*s.a, *s.b) for s in segs], dtype=np.int64)
        for i in range(len(segs) - 1):
            o1, o2, o3, o4 = (o[i + 1:] for o in _pair_signs(arr, i))
            # an endpoint on (the line of) another segment within its span
            touch = ((o1 == 0) | (o2 == 0)) & (o3 * o4 <= 0) | ((o3 == 0) | (o4 == 0)) & (o1 * o2 <= 0)
            if touch.any():
                j = i + 1 + int(np.nonzero(touch)[0][0])
                raise GeneralPositionViolation(f"segments {segs[i]} and {segs[j]} touch")
    crossings = brute_force_crossings(segs)
    seen = set(xs)
    for i, j, x, _ in crossings:
        if x in seen:
            raise GeneralPositionViolation(f"crossing of {i} and {j} shares its x-coordinate with another event")
        seen.add(x)
    return segs, crossings


@dataclass
class SweepResult:
    crossings: list  # (i, j, x, y) with i < j, in sweep order
    trapezoids: list | None = None  # (bottom, top, x_left, x_right); None is the box
    events: int = 0
    calls: int = 0
    status_checks: int = 0


def intersect_segments(
    segments,
    ctx: NoisyContext,
    cfg: WalkConfig | None = None,
    c: float = 2.0,
    emit_trapezoids: bool = False,
    instrumented: bool = False,
    validate: bool = True,
) -> SweepResult:
    """Report all pairwise crossings in sweep order."""
    if validate:
        segs, _ = validate_sweep_input(segments)
    else:
        segs = [s if isinstance(s, Segment) else Segment.of(*s) for s in segments]
    n = len(segs)
    if cfg is None:
        cfg = WalkConfig.for_size(n, c)
    plan = ctx.plan(min(0.25, float(max(n, 2)) ** -(c + 1)))
    calls0 = ctx.calls

    events = OrderedTree(_cmp)
    status = OrderedTree(lambda i, j: above_segment(segs[i].a, segs[j]))
    where: dict[int, object] = {}
    scheduled: set = set()
    crossings: list = []
    gaps: dict = {}
    traps: list | None = [] if emit_trapezoids else None
    result = SweepResult(crossings, traps)

    for i, s in enumerate(segs):
        events.insert((Fraction(s.a[0]), Fraction(s.a[1]), LEFT, i, -1), ctx, cfg)
        events.insert((Fraction(s.b[0]), Fraction(s.b[1]), RIGHT, i, -1), ctx, cfg)

    def schedule(lo, hi, x_now):
        """lo directly below hi at x_now; queue their crossing if it lies ahead."""
        if lo is None or hi is None:
            return
        i, j = lo.key, hi.key
        pair = (min(i, j), max(i, j))
        if pair in scheduled:
            return
        s, t = segs[i], segs[j]
        # the segment ending first decides: its right endpoint must be on the far side
        if ctx.left_of(s.b, t.b, plan):
            cross = ctx.above_span(s.b, t, plan)
        else:
            cross = not ctx.above_span(t.b, s, plan)
        if cross:
            x, y = crossing_point(s, t)
            scheduled.add(pair)
            events.insert((x, y, CROSS, pair[0], pair[1]), ctx, cfg)

    def close(lo, hi, x):
        key = (lo, hi)
        if traps is not None:
            traps.append((lo, hi, gaps.pop(key), x))

    def open_(lo, hi, x):
        if traps is not None:
            gaps[(lo, hi)] = x

    def key_of(node):
        return None if node is None else node.key

    open_(None, None, None)
    while events.size:
        x, y, kind, i, j = events.extract_min()
        result.events += 1
        if kind == LEFT:
            node = status.insert(i, ctx, cfg)
            where[i] = node
            lo, hi = predecessor(node), successor(node)
            close(key_of(lo), key_of(hi), x)
            open_(key_of(lo), i, x)
            open_(i, key_of(hi), x)
            schedule(lo, node, x)
            schedule(node, hi, x)
        elif kind == RIGHT:
            node = where.pop(i)
            lo, hi = predecessor(node), successor(node)
            close(key_of(lo), i, x)
            close(i, key_of(hi), x)
            open_(key_of(lo), key_of(hi), x)
            status.delete(node)
            schedule(lo, hi, x)
        else:
            a, b = where.get(i), where.get(j)
            if a is None or b is None:
                raise InconsistentStructure(f"crossing of {i}, {j} after one of them ended")
            if successor(a) is b:
                low, high = a, b
            elif successor(b) is a:
                low, high = b, a
            else:
                raise InconsistentStructure(f"crossing segments {i}, {j} are not adjacent in the status")
            below, above = predecessor(low), successor(high)
            u, v = low.key, high.key
            close(key_of(below), u, x)
            close(u, v, x)
            close(v, key_of(above), x)
            low.key, high.key = v, u
            where[v], where[u] = low, high
            open_(key_of(below), v, x)
            open_(v, u, x)
            open_(u, key_of(above), x)
            crossings.append((i, j, x, y))
            schedule(below, low, x)
            schedule(high, above, x)
        if instrumented:
            _check_status(status, segs, x)
            result.status_checks += 1
    if traps is not None:
        close(None, None, None)
    result.calls = ctx.calls - calls0
    return result


def _height(s: Segment, x: Fraction) -> Fraction:
    (ax, ay), (bx, by) = s
    return ay + Fraction(by - ay, bx - ax) * (x - ax)


def _check_status(status: OrderedTree, segs, x) -> None:
    """Exact check that the status order is the vertical order just right of x."""
    keys = status.keys()
    for i, j in zip(keys, keys[1:]):
        s, t = segs[i], segs[j]
        hs, ht = _height(s, x), _height(t, x)
        if hs == ht:
            slope = lambda g: Fraction(g.b[1] - g.a[1], g.b[0] - g.a[0])
            ok = slope(s) < slope(t)
        else:
            ok = hs < ht
        if not ok:
            raise InconsistentStructure(f"status order wrong at x={x}: {i} above {j}")


# -- closest pair -------------------------------------------------------------

NEIGHBOURS = 7


def _pair_key(a, b):
    lo, hi = (a, b) if a < b else (b, a)
    return (dist2(a, b), lo, hi)


def brute_force_closest_pair(points) -> tuple[Point, Point]:
    pts = np.asarray([tuple(p) for p in points], dtype=np.int64)
    n = len(pts)
    if n < 2:
        raise TooFewPoints("closest pair needs two points")
    best = None
    for i in range(n - 1):
        d = ((pts[i + 1:] - pts[i]) ** 2).sum(axis=1)
        k = int(np.argmin(d))
        cand = (int(d[k]), i, i + 1 + k)
        if best is None or cand[0] < best[0]:
            best = cand
    _, i, j = best
    a, b = Point(*map(int, pts[i])), Point(*map(int, pts[j]))
    return (a, b) if a < b else (b, a)


def validate_points_for_pair(points) -> list[Point]:
    pts = [Point(*p) for p in points]
    if len(pts) < 2:
        raise TooFewPoints("closest pair needs two points")
    if len(set(pts)) != len(pts):
        raise GeneralPositionViolation("duplicate points")
    for p in pts:
        if not in_bounds(p):
            raise GeneralPositionViolation(f"point {p} outside the coordinate bound")
    arr = np.asarray(pts, dtype=np.int64)
    dmin, count = None, 0
    for i in range(len(pts) - 1):
        d = ((arr[i + 1:] - arr[i]) ** 2).sum(axis=1)
        m = int(d.min())
        if dmin is None or m < dmin:
            dmin, count = m, int((d == m).sum())
        elif m == dmin:
            count += int((d == m).sum())
    if count != 1:
        raise GeneralPositionViolation("minimum distance is attained by more than one pair")
    return pts


def closest_pair(points, ctx: NoisyContext, cfg: WalkConfig | None = None, c: float = 2.0, validate: bool = True):
    """Closest pair by a left-to-right sweep; returns the pair in lexicographic order."""
    pts = validate_points_for_pair(points) if validate else [Point(*p) for p in points]
    n = len(pts)
    if n < 2:
        raise TooFewPoints("closest pair needs two points")
    if cfg is None:
        cfg = WalkConfig.for_size(n, c)
    plan = ctx.plan(min(0.25, float(max(n, 2)) ** -(c + 1)))

    order = noisy_sort(pts, compare_lex, ctx, cfg)
    ytable = OrderedTree(lambda a, b: compare_lex((a[1], a[0]), (b[1], b[0])))
    handles = []
    best = _pair_key(order[0], order[1])
    oldest = 0
    for k, q in enumerate(order):
        # retire points at horizontal distance at least delta, oldest first
        while oldest < k:
            r = order[oldest]
            dx = q[0] - r[0]
            if ctx.vote(dx * dx < best[0], plan):
                break
            ytable.delete(handles[oldest])
            handles[oldest] = None
            oldest += 1
        node = ytable.insert(q, ctx, cfg)
        handles.append(node)
        cands = []
        u = node
        for _ in range(NEIGHBOURS):
            u = predecessor(u)
            if u is None:
                break
            cands.append(u.key)
        u = node
        for _ in range(NEIGHBOURS):
            u = successor(u)
            if u is None:
                break
            cands.append(u.key)
        for r in cands:
            key = _pair_key(q, r)
            if key != best and ctx.vote(key < best, plan):
                best = key
    return best[1], best[2]
