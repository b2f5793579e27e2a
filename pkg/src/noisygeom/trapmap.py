"""Randomized incremental trapezoidal map with a trapezoid history DAG.

Each DAG node is a trapezoid; a trapezoid destroyed by a segment points to
the (at most four) new trapezoids that cover it.  Endpoints of a new segment
are located by pushdown random walks down the DAG; the trapezoids crossed by
the segment are then found by walking right through neighbour links, with
each above/below decision amplified by repetition.

Neighbour convention: a trapezoid has an upper and a lower neighbour on each
side.  When the wall through ``leftp`` has a single neighbour (because
``leftp`` starts the top or the bottom segment) it is stored in ``ll`` when
the top starts there and in ``ul`` when the bottom starts there; the right
side is symmetric (``lr`` when the top ends at ``rightp``, ``ur`` when the
bottom does).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CrossingSegments,
    GeneralPositionViolation,
    InconsistentStructure,
)
from .noise import NoisyContext
from .predicates import COORD_BOUND, Point, Segment, above_segment, in_bounds
from .walk import WalkConfig, run_walk, run_walks_batch

BOX = 1 << 21
BOX_LEFT = Point(-BOX, -BOX)
BOX_RIGHT = Point(BOX, BOX)
BOX_BOTTOM = Segment(Point(-BOX, -BOX), Point(BOX, -BOX))
BOX_TOP = Segment(Point(-BOX, BOX), Point(BOX, BOX))

# four containment tests plus up to three routing tests per consultation
TESTS_PER_CONSULTATION = 7


class Trapezoid:
    __slots__ = (
        "top", "bottom", "leftp", "rightp",
        "ul", "ll", "ur", "lr",
        "seg", "c_left", "c_right", "c_up", "c_down", "children",
        "depth", "index",
    )

    def __init__(self, top, bottom, leftp, rightp, depth=0):
        self.top = top
        self.bottom = bottom
        self.leftp = leftp
        self.rightp = rightp
        self.ul = self.ll = self.ur = self.lr = None
        self.seg = None
        self.c_left = self.c_right = self.c_up = self.c_down = None
        self.children = ()
        self.depth = depth
        self.index = -1

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def canonical(self) -> tuple:
        return (tuple(map(tuple, self.top)), tuple(map(tuple, self.bottom)), tuple(self.leftp), tuple(self.rightp))

    def __repr__(self):
        return f"Trapezoid(top={self.top}, bottom={self.bottom}, leftp={self.leftp}, rightp={self.rightp})"


def _relink(nb, old, new):
    if nb is None:
        return
    if nb.ul is old:
        nb.ul = new
    if nb.ll is old:
        nb.ll = new
    if nb.ur is old:
        nb.ur = new
    if nb.lr is old:
        nb.lr = new


def _contains_exact(t: Trapezoid, q) -> bool:
    return (
        t.leftp[0] < q[0] < t.rightp[0]
        and above_segment(q, t.bottom) > 0
        and above_segment(q, t.top) < 0
    )


def _route_exact(t: Trapezoid, q) -> Trapezoid:
    s = t.seg
    if t.c_left is not None and q[0] < s.a[0]:
        return t.c_left
    if t.c_right is not None and q[0] > s.b[0]:
        return t.c_right
    return t.c_up if above_segment(q, s) > 0 else t.c_down


class TrapezoidMap:
    """History DAG plus current decomposition."""

    def __init__(self):
        self.root = Trapezoid(BOX_TOP, BOX_BOTTOM, BOX_LEFT, BOX_RIGHT)
        self.root.index = 0
        self.nodes: list[Trapezoid] = [self.root]
        self.max_depth = 0
        self.segments: list[Segment] = []
        self.permutation: list[int] = []
        self.walk_lengths: list[int] = []
        self.crossed: list[int] = []

    def __len__(self):
        return len(self.nodes)

    def leaves(self) -> list[Trapezoid]:
        return [t for t in self.nodes if not t.children]

    def canonical_leaves(self) -> list[tuple]:
        return sorted(t.canonical() for t in self.leaves())

    # -- point location ---------------------------------------------------

    def _oracle(self, q, ctx: NoisyContext, plan):
        vote = ctx.vote
        qx = q[0]

        def oracle(t):
            lp, rp = t.leftp, t.rightp
            if lp is not BOX_LEFT:
                if lp[0] == qx:
                    raise GeneralPositionViolation(f"query {q} on a vertical wall")
                if not vote(lp[0] < qx, plan):
                    return False, None
            if rp is not BOX_RIGHT:
                if rp[0] == qx:
                    raise GeneralPositionViolation(f"query {q} on a vertical wall")
                if not vote(qx < rp[0], plan):
                    return False, None
            if t.bottom is not BOX_BOTTOM and not ctx.above_span(q, t.bottom, plan):
                return False, None
            if t.top is not BOX_TOP and ctx.above_span(q, t.top, plan):
                return False, None
            if not t.children:
                return True, t
            s = t.seg
            if t.c_left is not None and ctx.left_of(q, s.a, plan):
                return True, t.c_left
            if t.c_right is not None and ctx.left_of(s.b, q, plan):
                return True, t.c_right
            return True, (t.c_up if ctx.above_span(q, s, plan) else t.c_down)

        return oracle

    def locate(self, q, ctx: NoisyContext, cfg: WalkConfig) -> Trapezoid:
        """Leaf containing q, found by a pushdown random walk down the DAG."""
        q = Point(*q)
        plan = ctx.plan(cfg.p_e_max / TESTS_PER_CONSULTATION)
        length_before = ctx.stats.forward_moves
        leaf = run_walk(
            _successors,
            self._oracle(q, ctx, plan),
            self.root,
            cfg.with_hint(self.max_depth),
            ctx.stats,
        )
        self.walk_lengths.append(ctx.stats.forward_moves - length_before)
        return leaf

    def locate_exact(self, q) -> Trapezoid:
        t = self.root
        if not _contains_exact(t, q):
            raise GeneralPositionViolation(f"{q} is not strictly inside the box")
        while t.children:
            t = _route_exact(t, q)
        return t

    # -- incremental construction -----------------------------------------

    def insert(self, s: Segment, ctx: NoisyContext | None, cfg: WalkConfig | None, chain_plan=None):
        """Add one segment; with ``ctx`` None every decision is exact."""
        p, q = s.a, s.b
        if ctx is None:
            d0 = self.locate_exact(p)
            dq = self.locate_exact(q)
        else:
            d0 = self.locate(p, ctx, cfg)
            dq = self.locate(q, ctx, cfg)

        chain = [d0]
        above_flags = []
        cur = d0
        limit = len(self.nodes)
        while cur is not dq:
            r = cur.rightp
            if r is BOX_RIGHT or len(chain) > limit:
                raise InconsistentStructure("segment walk left the map")
            if cur.ur is not None and cur.lr is not None:
                if ctx is None:
                    sg = above_segment(r, s)
                    if not sg:
                        raise GeneralPositionViolation(f"endpoint {r} on segment {s}")
                    up = sg > 0
                else:
                    up = ctx.above(r, s, chain_plan)
                nxt = cur.lr if up else cur.ur
            elif cur.lr is not None:
                up, nxt = True, cur.lr
            elif cur.ur is not None:
                up, nxt = False, cur.ur
            else:
                raise InconsistentStructure("trapezoid without right neighbour inside the box")
            above_flags.append(up)
            chain.append(nxt)
            cur = nxt
        self._split(s, chain, above_flags)
        self.crossed.append(len(chain))

    def _new(self, top, bottom, leftp, rightp, depth):
        t = Trapezoid(top, bottom, leftp, rightp, depth)
        t.index = len(self.nodes)
        self.nodes.append(t)
        if depth > self.max_depth:
            self.max_depth = depth
        return t

    def _split(self, s: Segment, chain: Sequence[Trapezoid], above_flags: Sequence[bool]):
        p, q = s.a, s.b
        d0, dk = chain[0], chain[-1]
        depth = max(t.depth for t in chain) + 1

        a = self._new(d0.top, d0.bottom, d0.leftp, p, depth)
        b = self._new(dk.top, dk.bottom, q, dk.rightp, depth)

        # upper and lower chains of new trapezoids; ups[j]/lows[j] cover chain[j]
        ups = [self._new(d0.top, s, p, None, depth)]
        lows = [self._new(s, d0.bottom, p, None, depth)]
        up_of = [ups[0]]
        low_of = [lows[0]]
        for j, up in enumerate(above_flags):
            dj, dn = chain[j], chain[j + 1]
            r = dj.rightp
            if up:
                u = ups[-1]
                u.rightp = r
                nu = self._new(dn.top, s, r, None, depth)
                if dj.ur is not None and dj.lr is not None:
                    # r starts a segment t; the part above t survives
                    x = dj.ur
                    u.ur, u.lr = x, nu
                    nu.ll = u
                    _relink(x, dj, u)
                else:
                    # r ends dj's top segment
                    y = dn.ul
                    u.lr = nu
                    nu.ul, nu.ll = y, u
                    _relink(y, dn, nu)
                ups.append(nu)
            else:
                lo = lows[-1]
                lo.rightp = r
                nl = self._new(s, dn.bottom, r, None, depth)
                if dj.ur is not None and dj.lr is not None:
                    x = dj.lr
                    lo.ur, lo.lr = nl, x
                    nl.ul = lo
                    _relink(x, dj, lo)
                else:
                    z = dn.ll
                    lo.ur = nl
                    nl.ul, nl.ll = lo, z
                    _relink(z, dn, nl)
                lows.append(nl)
            up_of.append(ups[-1])
            low_of.append(lows[-1])
        ups[-1].rightp = q
        lows[-1].rightp = q

        a.ul, a.ll = d0.ul, d0.ll
        a.ur, a.lr = ups[0], lows[0]
        _relink(d0.ul, d0, a)
        _relink(d0.ll, d0, a)
        ups[0].ul = a
        lows[0].ll = a

        b.ur, b.lr = dk.ur, dk.lr
        b.ul, b.ll = ups[-1], lows[-1]
        _relink(dk.ur, dk, b)
        _relink(dk.lr, dk, b)
        ups[-1].ur = b
        lows[-1].lr = b

        last = len(chain) - 1
        for j, d in enumerate(chain):
            d.seg = s
            d.c_up = up_of[j]
            d.c_down = low_of[j]
            d.c_left = a if j == 0 else None
            d.c_right = b if j == last else None
            d.children = tuple(c for c in (d.c_left, d.c_up, d.c_down, d.c_right) if c is not None)
            d.ul = d.ll = d.ur = d.lr = None

    # -- queries ----------------------------------------------------------

    def query(self, q, ctx: NoisyContext, cfg: WalkConfig) -> Trapezoid:
        return self.locate(q, ctx, cfg)

    def query_batch(self, points, ctx: NoisyContext, cfg: WalkConfig) -> list[Trapezoid]:
        """Locate many points at once with lock-step walks over the finished DAG."""
        pts = np.asarray([tuple(p) for p in points], dtype=np.int64).reshape(-1, 2)
        arrays = _DagArrays(self)
        plan = ctx.plan(cfg.p_e_max / TESTS_PER_CONSULTATION)
        noise = _BatchNoise(ctx, plan)
        oracle = arrays.oracle(pts, noise)
        starts = np.zeros(len(pts), dtype=np.int64)
        res, _ = run_walks_batch(arrays.children, oracle, starts, cfg.with_hint(self.max_depth), ctx.stats)
        return [self.nodes[i] for i in res]

    def locate_exact_batch(self, points) -> list[Trapezoid]:
        """Exact direct descent for many points at once."""
        pts = np.asarray([tuple(p) for p in points], dtype=np.int64).reshape(-1, 2)
        return [self.nodes[i] for i in _DagArrays(self).descend(pts)]

    # -- checks -----------------------------------------------------------

    def check(self) -> None:
        """Exact structural checks: tiling by area and child coverage."""
        from fractions import Fraction

        def area(t):
            def y_at(seg, x):
                (ax, ay), (bx, by) = seg
                return Fraction(ay) + Fraction((by - ay) * (x - ax), bx - ax)

            x0, x1 = t.leftp[0], t.rightp[0]
            assert x0 < x1, f"empty trapezoid {t}"
            h0 = y_at(t.top, x0) - y_at(t.bottom, x0)
            h1 = y_at(t.top, x1) - y_at(t.bottom, x1)
            assert h0 >= 0 and h1 >= 0 and h0 + h1 > 0, f"inverted trapezoid {t}"
            return (h0 + h1) * (x1 - x0) / 2

        total = sum(area(t) for t in self.leaves())
        assert total == Fraction((2 * BOX) ** 2), "leaves do not tile the box"
        for t in self.nodes:
            if t.children:
                assert sum(area(c_clip) for c_clip in _clipped_children(t)) == area(t)
                assert 1 <= len(t.children) <= 4


def _clipped_children(t: Trapezoid):
    """Children restricted to the parent's x-range (children may extend past it)."""
    out = []
    for c in t.children:
        x0 = max(c.leftp[0], t.leftp[0])
        x1 = min(c.rightp[0], t.rightp[0])
        lp = c.leftp if c.leftp[0] == x0 else t.leftp
        rp = c.rightp if c.rightp[0] == x1 else t.rightp
        out.append(Trapezoid(c.top, c.bottom, lp, rp))
    return out


def _successors(t: Trapezoid):
    return t.children


def validate_segments(segments: Iterable) -> list[Segment]:
    """Exact preconditions: in bounds, distinct endpoint x, pairwise disjoint."""
    segs = [s if isinstance(s, Segment) else Segment.of(*s) for s in segments]
    xs = set()
    for s in segs:
        for e in s:
            if not in_bounds(e, COORD_BOUND):
                raise GeneralPositionViolation(f"endpoint {e} outside the coordinate bound")
            if e[0] in xs:
                raise GeneralPositionViolation(f"duplicate endpoint x-coordinate {e[0]}")
            xs.add(e[0])
    if len(segs) > 1:
        pairs = any_touching_pair(segs)
        if pairs is not None:
            i, j = pairs
            raise CrossingSegments(f"segments {segs[i]} and {segs[j]} intersect")
    return segs


def any_touching_pair(segs: Sequence[Segment]):
    """First pair (i, j) of segments sharing a point, by exact all-pairs orientation."""
    arr = np.asarray([(s.a[0], s.a[1], s.b[0], s.b[1]) for s in segs], dtype=np.int64)
    ax, ay, bx, by = arr.T
    for i in range(len(segs) - 1):
        cx, cy, dx, dy = ax[i + 1:], ay[i + 1:], bx[i + 1:], by[i + 1:]
        o1 = np.sign((bx[i] - ax[i]) * (cy - ay[i]) - (by[i] - ay[i]) * (cx - ax[i]))
        o2 = np.sign((bx[i] - ax[i]) * (dy - ay[i]) - (by[i] - ay[i]) * (dx - ax[i]))
        o3 = np.sign((dx - cx) * (ay[i] - cy) - (dy - cy) * (ax[i] - cx))
        o4 = np.sign((dx - cx) * (by[i] - cy) - (dy - cy) * (bx[i] - cx))
        hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        if hit.any():
            # collinear non-overlapping pairs pass the sign test; confirm exactly
            from .predicates import segments_touch

            for k in np.nonzero(hit)[0]:
                j = i + 1 + int(k)
                if segments_touch(segs[i], segs[j]):
                    return i, j
    return None


def build_trap_map(
    segments,
    ctx: NoisyContext | None,
    cfg: WalkConfig | None = None,
    c: float = 2.0,
    permutation: Sequence[int] | None = None,
    validate: bool = True,
) -> TrapezoidMap:
    """Randomized incremental construction.

    With ``ctx`` None every decision is exact (the reference construction);
    ``permutation`` fixes the insertion order, otherwise it is drawn from the
    context's generator and recorded on the result.
    """
    segs = validate_segments(segments) if validate else list(segments)
    n = len(segs)
    if permutation is None:
        permutation = list(range(n))
        if ctx is None:
            raise ValueError("exact construction needs an explicit permutation")
        ctx.rng().shuffle(permutation)
    tm = TrapezoidMap()
    tm.segments = segs
    tm.permutation = list(permutation)
    chain_plan = None
    if ctx is not None:
        if cfg is None:
            cfg = WalkConfig.for_size(n, c)
        chain_plan = ctx.plan(min(0.5, float(max(n, 2)) ** -(c + 1)))
    for i in permutation:
        tm.insert(segs[i], ctx, cfg, chain_plan)
    return tm


def locate_endpoint(tm: TrapezoidMap, q, ctx: NoisyContext, cfg: WalkConfig) -> Trapezoid:
    return tm.locate(q, ctx, cfg)


def query(tm: TrapezoidMap, q, ctx: NoisyContext, cfg: WalkConfig) -> Trapezoid:
    return tm.locate(q, ctx, cfg)


def serialize_leaves(tm: TrapezoidMap) -> str:
    lines = []
    for top, bottom, lp, rp in tm.canonical_leaves():
        nums = [*top[0], *top[1], *bottom[0], *bottom[1], *lp, *rp]
        lines.append(" ".join(map(str, nums)))
    return "\n".join(lines) + ("\n" if lines else "")


# -- batched point location ---------------------------------------------------


class _BatchNoise:
    """Vectorised majority votes drawing from a generator seeded by the context."""

    def __init__(self, ctx: NoisyContext, plan):
        self.ctx = ctx
        self.plan = plan
        self.gen = np.random.default_rng(ctx.rng().getrandbits(64))

    def vote(self, exact: np.ndarray, mask: np.ndarray) -> np.ndarray:
        m = int(mask.sum())
        self.ctx.calls += m * self.plan.r
        out = exact.copy()
        if self.ctx.p and m:
            flip = np.zeros(len(exact), dtype=bool)
            flip[mask] = self.gen.random(m) < self.plan.error
            out ^= flip
        return out


def _orient_arr(ax, ay, bx, by, cx, cy):
    return np.sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


class _DagArrays:
    def __init__(self, tm: TrapezoidMap):
        nodes = tm.nodes
        n = len(nodes)
        self.lp = np.array([t.leftp for t in nodes], dtype=np.int64)
        self.rp = np.array([t.rightp for t in nodes], dtype=np.int64)
        self.top = np.array([(*t.top[0], *t.top[1]) for t in nodes], dtype=np.int64)
        self.bot = np.array([(*t.bottom[0], *t.bottom[1]) for t in nodes], dtype=np.int64)
        self.lp_box = np.array([t.leftp is BOX_LEFT for t in nodes])
        self.rp_box = np.array([t.rightp is BOX_RIGHT for t in nodes])
        self.top_box = np.array([t.top is BOX_TOP for t in nodes])
        self.bot_box = np.array([t.bottom is BOX_BOTTOM for t in nodes])
        seg = np.zeros((n, 4), dtype=np.int64)
        kids = np.full((n, 4), -1, dtype=np.int64)
        for t in nodes:
            if t.children:
                seg[t.index] = (*t.seg.a, *t.seg.b)
                for k, ch in enumerate((t.c_left, t.c_right, t.c_up, t.c_down)):
                    if ch is not None:
                        kids[t.index, k] = ch.index
        self.seg = seg
        self.kids = kids
        self.children = kids
        self.leaf = (kids < 0).all(axis=1)

    def descend(self, pts: np.ndarray) -> np.ndarray:
        cur = np.zeros(len(pts), dtype=np.int64)
        qx, qy = pts[:, 0], pts[:, 1]
        while True:
            act = np.nonzero(~self.leaf[cur])[0]
            if len(act) == 0:
                return cur
            v = cur[act]
            s = self.seg[v]
            k = self.kids[v]
            x, y = qx[act], qy[act]
            choice = np.where(_orient_arr(s[:, 0], s[:, 1], s[:, 2], s[:, 3], x, y) > 0, k[:, 2], k[:, 3])
            choice = np.where((k[:, 1] >= 0) & (x > s[:, 2]), k[:, 1], choice)
            choice = np.where((k[:, 0] >= 0) & (x < s[:, 0]), k[:, 0], choice)
            cur[act] = choice

    def oracle(self, pts: np.ndarray, noise: _BatchNoise):
        def oracle(qids, v):
            qx, qy = pts[qids, 0], pts[qids, 1]
            m = len(v)
            ok = np.ones(m, dtype=bool)

            def test(exact, applicable):
                nonlocal ok
                mask = ok & applicable
                res = noise.vote(exact, mask)
                ok &= ~mask | res

            lpx, rpx = self.lp[v, 0], self.rp[v, 0]
            if ((lpx == qx) & ~self.lp_box[v]).any() or ((rpx == qx) & ~self.rp_box[v]).any():
                raise GeneralPositionViolation("query on a vertical wall")
            test(lpx < qx, ~self.lp_box[v])
            test(qx < rpx, ~self.rp_box[v])
            b = self.bot[v]
            test(_orient_arr(b[:, 0], b[:, 1], b[:, 2], b[:, 3], qx, qy) > 0, ~self.bot_box[v])
            t = self.top[v]
            test(_orient_arr(t[:, 0], t[:, 1], t[:, 2], t[:, 3], qx, qy) < 0, ~self.top_box[v])

            nxt = v.copy()
            route = ok & ~self.leaf[v]
            kids = self.kids[v]
            s = self.seg[v]
            decided = ~route
            has_l = route & (kids[:, 0] >= 0)
            go_l = noise.vote(qx < s[:, 0], has_l) & has_l
            nxt[go_l] = kids[go_l, 0]
            decided |= go_l
            has_r = ~decided & (kids[:, 1] >= 0)
            go_r = noise.vote(qx > s[:, 2], has_r) & has_r
            nxt[go_r] = kids[go_r, 1]
            decided |= go_r
            rest = ~decided
            up = noise.vote(_orient_arr(s[:, 0], s[:, 1], s[:, 2], s[:, 3], qx, qy) > 0, rest)
            nxt[rest & up] = kids[rest & up, 2]
            nxt[rest & ~up] = kids[rest & ~up, 3]
            return ok, nxt

        return oracle
