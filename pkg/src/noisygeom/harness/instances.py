"""Seeded instance generation and the line-oriented instance file format.

Files start with a header ``ngeo v1 <kind> <n>`` followed by one record per
line: ``x y`` for points, ``x1 y1 x2 y2`` for segments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..delaunay import super_vertices
from ..errors import GeneralPositionViolation, GenerationBudgetExceeded
from ..hull import find_collinear_triple
from ..noise import derive_seed
from ..predicates import COORD_BOUND, Point, Segment
from ..sweep import _pair_signs, crossing_point, validate_sweep_input
from ..trapmap import validate_segments

KINDS = ("points-uniform", "segments-noncrossing", "segments-crossing", "sorted-adversarial")
POINT_KINDS = ("points-uniform", "sorted-adversarial")
MAX_REJECTIONS = 10_000


@dataclass(frozen=True)
class Instance:
    kind: str
    records: tuple

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def points(self) -> list[Point]:
        return [Point(*r) for r in self.records]

    @property
    def segments(self) -> list[Segment]:
        return [Segment.of((r[0], r[1]), (r[2], r[3])) for r in self.records]


def dumps(inst: Instance) -> str:
    lines = [f"ngeo v1 {inst.kind} {inst.n}"]
    lines += [" ".join(str(v) for v in r) for r in inst.records]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Instance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty instance file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "ngeo" or head[1] != "v1":
        raise ValueError(f"bad header {lines[0]!r}")
    kind, n = head[2], int(head[3])
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    width = 2 if kind in POINT_KINDS else 4
    records = []
    for ln in lines[1:]:
        vals = tuple(int(v) for v in ln.split())
        if len(vals) != width:
            raise ValueError(f"record {ln!r} should have {width} integers")
        records.append(vals)
    if len(records) != n:
        raise ValueError(f"header says {n} records, found {len(records)}")
    return Instance(kind, tuple(records))


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst))


def read_instance(path) -> Instance:
    return loads(Path(path).read_text())


# -- generators ---------------------------------------------------------------


class _Rejections:
    def __init__(self):
        self.count = 0

    def bump(self):
        self.count += 1
        if self.count > MAX_REJECTIONS:
            raise GenerationBudgetExceeded(f"more than {MAX_REJECTIONS} rejected samples")


def _point_set(rnd: random.Random, n: int, scale: int, sorted_x: bool) -> list[Point]:
    rej = _Rejections()
    pts: list[Point] = []
    seen = set()
    xs = set()
    while len(pts) < n:
        p = Point(rnd.randint(-scale, scale), rnd.randint(-scale, scale))
        if p in seen or (sorted_x and p[0] in xs):
            rej.bump()
            continue
        pts.append(p)
        seen.add(p)
        xs.add(p[0])
    # resample members of collinear triples (with each other or a super-vertex)
    # and of tied closest pairs until none remain; sorting only needs distinct x
    while not sorted_x:
        bad = _bad_point(pts)
        if bad is None:
            break
        rej.bump()
        while True:
            p = Point(rnd.randint(-scale, scale), rnd.randint(-scale, scale))
            if p not in seen and not (sorted_x and p[0] in xs):
                break
            rej.bump()
        seen.discard(pts[bad])
        xs.discard(pts[bad][0])
        pts[bad] = p
        seen.add(p)
        xs.add(p[0])
    if sorted_x:
        pts.sort()
    return pts


def _bad_point(pts: list[Point]) -> int | None:
    """Index of a point to resample, or None when the set is in general position."""
    if len(pts) >= 3:
        triple = find_collinear_triple(pts)
        if triple is not None:
            return pts.index(triple[-1])
        for sv in super_vertices():
            triple = find_collinear_triple([sv] + pts, rows=1)
            if triple is not None:
                return pts.index(triple[-1])
    if len(pts) >= 2:
        arr = np.asarray(pts, dtype=np.int64)
        best, count, last = None, 0, None
        for i in range(len(pts) - 1):
            d = ((arr[i + 1:] - arr[i]) ** 2).sum(axis=1)
            m = int(d.min())
            if best is None or m < best:
                best, count, last = m, int((d == m).sum()), i
            elif m == best:
                count += int((d == m).sum())
                last = i
        if count > 1:
            return last
    return None


def _segments_noncrossing(rnd: random.Random, n: int, scale: int) -> list[Segment]:
    rej = _Rejections()
    length = max(4, int(2 * scale / math.sqrt(max(n, 1))))
    segs: list[Segment] = []
    arr = np.zeros((0, 4), dtype=np.int64)
    xs: set = set()
    while len(segs) < n:
        s = _random_segment(rnd, scale, length)
        if s is None or s.a[0] in xs or s.b[0] in xs:
            rej.bump()
            continue
        if len(segs):
            cand = np.vstack([arr, np.asarray([(*s.a, *s.b)], dtype=np.int64)])
            o1, o2, o3, o4 = (o[:-1] for o in _pair_signs(cand, len(segs)))
            if ((o1 * o2 <= 0) & (o3 * o4 <= 0)).any():
                rej.bump()
                continue
            arr = cand
        else:
            arr = np.asarray([(*s.a, *s.b)], dtype=np.int64)
        segs.append(s)
        xs.update((s.a[0], s.b[0]))
    return segs


def _random_segment(rnd: random.Random, scale: int, length: int) -> Segment | None:
    x = rnd.randint(-scale, scale)
    y = rnd.randint(-scale, scale)
    ang = rnd.uniform(0, math.pi)
    ln = rnd.uniform(0.5, 1.5) * length
    x2 = x + int(round(ln * math.cos(ang)))
    y2 = y + int(round(ln * math.sin(ang)))
    if not (-scale <= x2 <= scale and -scale <= y2 <= scale) or x2 == x:
        return None
    return Segment.of((x, y), (x2, y2))


# crossing density: k is about CROSSING_RATIO * n for uniform random segments
CROSSING_RATIO = 2.5


def _segments_crossing(rnd: random.Random, n: int, scale: int) -> list[Segment]:
    rej = _Rejections()
    side = 2 * scale
    # Buffon-style estimate; the constant is calibrated so that k ~ 2.5 n at n = 200
    length = int(0.95 * side * math.sqrt(CROSSING_RATIO * math.pi / max(n, 2)))
    segs: list[Segment] = []
    events: set = set()
    arr = np.zeros((0, 4), dtype=np.int64)
    while len(segs) < n:
        s = _random_segment(rnd, scale, length)
        if s is None or s.a[0] in events or s.b[0] in events:
            rej.bump()
            continue
        new_x = []
        ok = True
        if len(segs):
            cand = np.vstack([arr, np.asarray([(*s.a, *s.b)], dtype=np.int64)])
            o1, o2, o3, o4 = (o[:-1] for o in _pair_signs(cand, len(segs)))
            touch = ((o1 == 0) | (o2 == 0)) & (o3 * o4 <= 0) | ((o3 == 0) | (o4 == 0)) & (o1 * o2 <= 0)
            if touch.any():
                ok = False
            else:
                for j in np.nonzero((o1 * o2 < 0) & (o3 * o4 < 0))[0]:
                    x, _ = crossing_point(segs[int(j)], s)
                    if x in events or x in new_x:
                        ok = False
                        break
                    new_x.append(x)
        if not ok:
            rej.bump()
            continue
        arr = np.vstack([arr, np.asarray([(*s.a, *s.b)], dtype=np.int64)])
        segs.append(s)
        events.update((s.a[0], s.b[0], *new_x))
    return segs


def generate_instance(kind: str, n: int, seed: int, scale: int = COORD_BOUND) -> Instance:
    """Instance of the given kind satisfying its exact general-position checks.

    Samples are drawn with rejection; after too many rejections at a small
    scale the coordinate range is doubled and generation restarts.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    s = min(scale, COORD_BOUND)
    while True:
        rnd = random.Random(derive_seed(seed, "instance", kind, n, s))
        try:
            if kind in POINT_KINDS:
                # _point_set already resamples until the exact checks pass
                recs = tuple(tuple(p) for p in _point_set(rnd, n, s, kind == "sorted-adversarial"))
                return Instance(kind, recs)
            if kind == "segments-noncrossing":
                recs = tuple((*g.a, *g.b) for g in _segments_noncrossing(rnd, n, s))
            else:
                recs = tuple((*g.a, *g.b) for g in _segments_crossing(rnd, n, s))
            inst = Instance(kind, recs)
            validate_instance(inst)
            return inst
        except (GenerationBudgetExceeded, GeneralPositionViolation):
            if s >= COORD_BOUND:
                raise GenerationBudgetExceeded(f"could not generate {kind} with n={n}")
            s = min(2 * s, COORD_BOUND)


def validate_instance(inst: Instance) -> None:
    """Exact precondition check for the instance's kind."""
    if inst.kind == "sorted-adversarial":
        if len({p[0] for p in inst.records}) != inst.n or list(inst.records) != sorted(inst.records):
            raise GeneralPositionViolation("sorted-adversarial points need distinct x, in increasing order")
    elif inst.kind in POINT_KINDS:
        pts = inst.points
        if len(set(pts)) != len(pts):
            raise GeneralPositionViolation("duplicate points")
        if _bad_point(pts) is not None:
            raise GeneralPositionViolation("points not in general position")
    elif inst.kind == "segments-noncrossing":
        validate_segments(inst.segments)
    else:
        validate_sweep_input(inst.segments)
