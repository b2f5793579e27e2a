"""Exact integer geometric kernels.

Every function here returns an exact sign in {-1, 0, +1}.  Python integers
are unbounded, so the determinants never overflow; the coordinate bound
below only keeps the intermediates within 192 bits, which is what a
fixed-width implementation would need.
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import GeneralPositionViolation

COORD_BOUND = 1 << 20


class Point(NamedTuple):
    x: int
    y: int


class Segment(NamedTuple):
    """Straight segment; ``a`` is the lexicographically smaller endpoint."""

    a: Point
    b: Point

    @classmethod
    def of(cls, p, q) -> "Segment":
        p, q = Point(*p), Point(*q)
        if p == q:
            raise ValueError("degenerate segment")
        return cls(p, q) if p < q else cls(q, p)

    @property
    def left(self) -> Point:
        return self.a

    @property
    def right(self) -> Point:
        return self.b


def sign(v: int) -> int:
    return (v > 0) - (v < 0)


def in_bounds(p, bound: int = COORD_BOUND) -> bool:
    return -bound <= p[0] <= bound and -bound <= p[1] <= bound


def orient2d(a, b, c) -> int:
    """+1 if a, b, c turn counterclockwise, -1 if clockwise, 0 if collinear."""
    d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (d > 0) - (d < 0)


def in_circle(a, b, c, d) -> int:
    """+1 if d is strictly inside the circle through a, b, c; -1 outside; 0 on it.

    The triangle may be given in either orientation; the lifted determinant
    is normalised by its orientation.  Collinear a, b, c raise.
    """
    o = orient2d(a, b, c)
    if o == 0:
        raise GeneralPositionViolation(f"in_circle on collinear triple {a}, {b}, {c}")
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return o * ((det > 0) - (det < 0))


def above_segment(q, s) -> int:
    """+1 if q is strictly above the line through segment s (left to right)."""
    a, b = s
    if b < a:
        a, b = b, a
    return orient2d(a, b, q)


def compare_x(a, b) -> int:
    return (a[0] > b[0]) - (a[0] < b[0])


def compare_y(a, b) -> int:
    return (a[1] > b[1]) - (a[1] < b[1])


def compare_lex(a, b) -> int:
    """Lexicographic (x, then y) comparison."""
    if a[0] != b[0]:
        return 1 if a[0] > b[0] else -1
    return (a[1] > b[1]) - (a[1] < b[1])


def dist2(a, b) -> int:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy


def compare_dist(a, b, c, d) -> int:
    """Sign of |a-b|^2 - |c-d|^2."""
    v = dist2(a, b) - dist2(c, d)
    return (v > 0) - (v < 0)


def segments_cross(s, t) -> bool:
    """Exact test for a proper crossing of two segments (interiors meet in one point)."""
    a, b = s
    c, d = t
    o1 = orient2d(a, b, c)
    o2 = orient2d(a, b, d)
    o3 = orient2d(c, d, a)
    o4 = orient2d(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def segments_touch(s, t) -> bool:
    """Exact test for any common point, including endpoints and overlaps."""
    a, b = s
    c, d = t
    o1 = orient2d(a, b, c)
    o2 = orient2d(a, b, d)
    o3 = orient2d(c, d, a)
    o4 = orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on(p, q, r):
        return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])

    return (
        (o1 == 0 and on(a, b, c))
        or (o2 == 0 and on(a, b, d))
        or (o3 == 0 and on(c, d, a))
        or (o4 == 0 and on(c, d, b))
    )
