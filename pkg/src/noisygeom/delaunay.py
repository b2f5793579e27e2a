"""Randomized incremental Delaunay triangulation on noisy primitives.

Points are inserted in random order into a large super-triangle.  The
triangle containing each new point is found by a pushdown random walk down
the history DAG; the point splits it into three and illegal edges are
flipped, each in-circle test amplified by repetition.  Split nodes get
three children, flip nodes two.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .bst import noisy_sort
from .errors import GeneralPositionViolation, TooFewPoints
from .hull import find_collinear_triple
from .noise import NoisyContext
from .predicates import COORD_BOUND, Point, dist2, in_bounds, in_circle, orient2d
from .walk import WalkConfig, run_walk

# three containment tests plus at most two routing tests per consultation
TESTS_PER_CONSULTATION = 5


# Corners of the enclosing triangle, about 8 times the coordinate bound out.
# The offsets from the symmetric (+-8M, -8M), (0, 8M) layout keep them off
# every line through two lattice points of [-128, 128]^2, so small hand-made
# inputs never meet a super vertex in a collinear triple.
SUPER_VERTICES = (Point(-8_022_709, -8_070_497), Point(8_669_762, -8_820_684), Point(-238_283, 8_012_028))


def super_vertices() -> tuple[Point, Point, Point]:
    return SUPER_VERTICES


class Tri:
    __slots__ = ("v", "nbr", "children", "split_at", "diag", "depth", "index", "step")

    def __init__(self, v, depth, index, step):
        self.v = v
        self.nbr = [None, None, None]
        self.children = ()
        self.split_at = None  # inserted point index for a split node
        self.diag = None  # (d, p) for a flip node: first child lies left of d->p
        self.depth = depth
        self.index = index
        self.step = step

    def __repr__(self):
        return f"Tri{self.v}"

    def opposite(self, other) -> int:
        for k in range(3):
            if self.nbr[k] is other:
                return k
        raise ValueError("not a neighbour")


class DelaunayDag:
    def __init__(self, points: Sequence[Point]):
        self.n = len(points)
        self.points: list[Point] = list(points) + list(super_vertices())
        n = self.n
        self.root = Tri((n, n + 1, n + 2), 0, 0, -1)
        self.nodes: list[Tri] = [self.root]
        self.max_depth = 0
        self.permutation: list[int] = []
        self.created: list[list[Tri]] = []  # per insertion, in creation order
        self.fans: list[list[Tri]] = []  # per insertion, final triangles around the point, CCW
        self.flips = 0
        self.walk_lengths: list[int] = []

    def _new(self, v, parents, step):
        depth = max(t.depth for t in parents) + 1
        t = Tri(v, depth, len(self.nodes), step)
        self.nodes.append(t)
        if depth > self.max_depth:
            self.max_depth = depth
        self.created[-1].append(t)
        return t

    def leaves(self) -> list[Tri]:
        return [t for t in self.nodes if not t.children]

    def triangles(self) -> list[tuple[int, int, int]]:
        """Triangles among input points, as sorted index triples, sorted."""
        n = self.n
        return sorted(tuple(sorted(t.v)) for t in self.leaves() if max(t.v) < n)

    def edges(self) -> list[tuple[int, int]]:
        n = self.n
        out = set()
        for t in self.leaves():
            for k in range(3):
                a, b = t.v[k], t.v[(k + 1) % 3]
                if a < n and b < n:
                    out.add((min(a, b), max(a, b)))
        return sorted(out)

    # -- location ---------------------------------------------------------

    def _ccw(self, ctx, a, b, q, plan) -> bool:
        pts = self.points
        pa, pb = pts[a], pts[b]
        s = orient2d(pa, pb, q)
        if not s:
            if min(pa, pb) <= tuple(q) <= max(pa, pb):
                raise GeneralPositionViolation(f"point {q} on edge {pa}-{pb}")
            return ctx.vote(False, plan) if ctx is not None else False
        return ctx.vote(s > 0, plan) if ctx is not None else s > 0

    def _route(self, t: Tri, q, ctx, plan) -> Tri:
        if t.split_at is not None:
            p = t.split_at
            a, b, c = t.v
            if self._ccw(ctx, p, b, q, plan):
                return t.children[2] if self._ccw(ctx, p, c, q, plan) else t.children[1]
            return t.children[0] if self._ccw(ctx, p, a, q, plan) else t.children[2]
        d, p = t.diag
        return t.children[0] if self._ccw(ctx, d, p, q, plan) else t.children[1]

    def _oracle(self, q, ctx, plan):
        def oracle(t):
            a, b, c = t.v
            if not (
                self._ccw(ctx, a, b, q, plan)
                and self._ccw(ctx, b, c, q, plan)
                and self._ccw(ctx, c, a, q, plan)
            ):
                return False, None
            if not t.children:
                return True, t
            return True, self._route(t, q, ctx, plan)

        return oracle

    def locate(self, q, ctx: NoisyContext, cfg: WalkConfig) -> Tri:
        q = Point(*q)
        plan = ctx.plan(cfg.p_e_max / TESTS_PER_CONSULTATION)
        before = ctx.stats.forward_moves
        t = run_walk(
            lambda t: t.children,
            self._oracle(q, ctx, plan),
            self.root,
            cfg.with_hint(self.max_depth),
            ctx.stats,
        )
        self.walk_lengths.append(ctx.stats.forward_moves - before)
        return t

    def locate_exact(self, q) -> Tri:
        q = Point(*q)
        t = self.root
        a, b, c = (self.points[i] for i in t.v)
        if not (orient2d(a, b, q) > 0 and orient2d(b, c, q) > 0 and orient2d(c, a, q) > 0):
            raise GeneralPositionViolation(f"{q} is not inside the super-triangle")
        while t.children:
            t = self._route(t, q, None, None)
        return t

    # -- insertion --------------------------------------------------------

    def insert(self, i: int, ctx: NoisyContext | None, cfg: WalkConfig | None, circle_plan=None):
        q = self.points[i]
        t = self.locate(q, ctx, cfg) if ctx is not None else self.locate_exact(q)
        self.created.append([])
        a, b, c = t.v
        na, nb, nc = t.nbr
        step = len(self.created) - 1
        t0 = self._new((a, b, i), [t], step)
        t1 = self._new((b, c, i), [t], step)
        t2 = self._new((c, a, i), [t], step)
        t0.nbr = [t1, t2, nc]
        t1.nbr = [t2, t0, na]
        t2.nbr = [t0, t1, nb]
        for outer, new in ((na, t1), (nb, t2), (nc, t0)):
            if outer is not None:
                outer.nbr[outer.opposite(t)] = new
        t.children = (t0, t1, t2)
        t.split_at = i
        for new in (t0, t1, t2):
            self._legalize(new, i, ctx, circle_plan, step)
        self.fans.append(self._fan(i))

    def _legalize(self, t: Tri, p: int, ctx, plan, step):
        stack = [t]
        while stack:
            t = stack.pop()
            if t.children:
                continue
            k = t.v.index(p)
            x, y = t.v[(k + 1) % 3], t.v[(k + 2) % 3]
            nb = t.nbr[k]
            if nb is None:
                continue
            j = nb.opposite(t)
            d = nb.v[j]
            pts = self.points
            s = in_circle(pts[x], pts[y], pts[p], pts[d])
            if not s:
                raise GeneralPositionViolation(f"cocircular points {x}, {y}, {p}, {d}")
            inside = ctx.vote(s > 0, plan) if ctx is not None else s > 0
            if not inside:
                continue
            # flip edge xy to dp
            t_opp_x = t.nbr[(k + 1) % 3]  # across y-p
            t_opp_y = t.nbr[(k + 2) % 3]  # across p-x
            n_opp_x = nb.nbr[nb.v.index(x)]  # across d-y
            n_opp_y = nb.nbr[nb.v.index(y)]  # across x-d
            A = self._new((x, d, p), [t, nb], step)
            B = self._new((d, y, p), [t, nb], step)
            A.nbr = [B, t_opp_y, n_opp_y]
            B.nbr = [t_opp_x, A, n_opp_x]
            for outer, old, new in ((t_opp_y, t, A), (n_opp_y, nb, A), (t_opp_x, t, B), (n_opp_x, nb, B)):
                if outer is not None:
                    outer.nbr[outer.opposite(old)] = new
            t.children = nb.children = (A, B)
            t.diag = nb.diag = (d, p)
            self.flips += 1
            stack.append(B)
            stack.append(A)

    def _fan(self, p: int) -> list[Tri]:
        """Leaves around p in counterclockwise order (the radial record)."""
        start = next(t for t in reversed(self.created[-1]) if not t.children)
        fan = [start]
        t = start
        while True:
            k = t.v.index(p)
            # next triangle counterclockwise shares edge p - v[k+2]
            nxt = t.nbr[(k + 1) % 3]
            if nxt is None or nxt is start:
                break
            fan.append(nxt)
            t = nxt
            if len(fan) > len(self.nodes):
                break
        return fan

    # -- checks -----------------------------------------------------------

    def check(self) -> None:
        """Exact checks: orientation, neighbour symmetry, tiling by area, local Delaunay."""
        pts = self.points
        leaves = self.leaves()
        area2 = 0
        for t in leaves:
            a, b, c = (pts[i] for i in t.v)
            assert orient2d(a, b, c) > 0, f"{t} not counterclockwise"
            area2 += (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            for k, nb in enumerate(t.nbr):
                if nb is not None:
                    assert not nb.children and nb.nbr[nb.opposite(t)] is t
        s0, s1, s2 = super_vertices()
        assert area2 == (s1[0] - s0[0]) * (s2[1] - s0[1]) - (s1[1] - s0[1]) * (s2[0] - s0[0])
        assert len(leaves) == 2 * self.n + 1
        assert not non_delaunay_edges(self)


def non_delaunay_edges(dag: DelaunayDag) -> list[tuple[int, int]]:
    """Interior edges failing the exact empty-circle test."""
    pts = dag.points
    bad = []
    for t in dag.leaves():
        for k, nb in enumerate(t.nbr):
            if nb is None:
                continue
            d = nb.v[nb.opposite(t)]
            if in_circle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], pts[d]) >= 0:
                bad.append((t.v[(k + 1) % 3], t.v[(k + 2) % 3]))
    return bad


def validate_delaunay_input(points) -> list[Point]:
    pts = [Point(*p) for p in points]
    if len(pts) < 3:
        raise TooFewPoints(f"a triangulation needs at least 3 points, got {len(pts)}")
    for p in pts:
        if not in_bounds(p, COORD_BOUND):
            raise GeneralPositionViolation(f"point {p} outside the coordinate bound")
    if len(set(pts)) != len(pts):
        raise GeneralPositionViolation("duplicate points")
    triple = find_collinear_triple(pts)
    for sv in super_vertices():
        if triple is None:
            triple = find_collinear_triple([sv] + pts, rows=1)
    if triple is not None:
        raise GeneralPositionViolation(f"collinear points {triple}")
    return pts


def build_delaunay(
    points,
    ctx: NoisyContext | None,
    cfg: WalkConfig | None = None,
    c: float = 2.0,
    permutation: Sequence[int] | None = None,
    validate: bool = True,
) -> DelaunayDag:
    """Delaunay triangulation of points plus the super-triangle.

    With ``ctx`` None every test is exact and ``permutation`` is required.
    Cocircular quadruples are reported when an in-circle test meets one.
    """
    pts = validate_delaunay_input(points) if validate else [Point(*p) for p in points]
    n = len(pts)
    if permutation is None:
        if ctx is None:
            raise ValueError("exact construction needs an explicit permutation")
        permutation = list(range(n))
        ctx.rng().shuffle(permutation)
    dag = DelaunayDag(pts)
    dag.permutation = list(permutation)
    plan = None
    if ctx is not None:
        if cfg is None:
            cfg = WalkConfig.for_size(n, c)
        plan = ctx.plan(min(0.25, float(max(n, 2)) ** -(c + 1)))
    for i in permutation:
        dag.insert(i, ctx, cfg, plan)
    return dag


def locate_triangle(dag: DelaunayDag, q, ctx: NoisyContext, cfg: WalkConfig) -> Tri:
    return dag.locate(q, ctx, cfg)


# -- Euclidean minimum spanning tree ------------------------------------------


def _edge_key(pts, e):
    i, j = e
    return (dist2(pts[i], pts[j]), i, j)


def emst(points, ctx: NoisyContext, cfg: WalkConfig | None = None, c: float = 2.0, dag: DelaunayDag | None = None):
    """Kruskal over the Delaunay edges sorted by a noisy length comparison.

    Ties in length are broken by vertex indices, so the tree is unique.
    """
    pts = [Point(*p) for p in points]
    if dag is None:
        dag = build_delaunay(pts, ctx, cfg, c)
    edges = dag.edges()
    keyed = [_edge_key(pts, e) for e in edges]
    order = noisy_sort(keyed, lambda a, b: (a > b) - (a < b), ctx, cfg, c)
    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for _, i, j in order:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((i, j))
    return sorted(tree)


def exact_mst(points) -> list[tuple[int, int]]:
    """Prim over the complete graph with the same (length, i, j) edge order."""
    pts = np.asarray([tuple(p) for p in points], dtype=np.int64)
    n = len(pts)
    if n < 2:
        return []
    in_tree = np.zeros(n, dtype=bool)
    best_d = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    best_lo = np.full(n, n, dtype=np.int64)
    best_hi = np.full(n, n, dtype=np.int64)
    best_from = np.full(n, -1, dtype=np.int64)
    idx = np.arange(n)
    cur = 0
    tree = []
    for _ in range(n - 1):
        in_tree[cur] = True
        d = ((pts - pts[cur]) ** 2).sum(axis=1)
        lo, hi = np.minimum(idx, cur), np.maximum(idx, cur)
        better = ~in_tree & (
            (d < best_d)
            | ((d == best_d) & ((lo < best_lo) | ((lo == best_lo) & (hi < best_hi))))
        )
        best_d[better], best_lo[better], best_hi[better], best_from[better] = d[better], lo[better], hi[better], cur
        cand = np.nonzero(~in_tree)[0]
        m = best_d[cand].min()
        cand = cand[best_d[cand] == m]
        if len(cand) > 1:
            order = np.lexsort((best_hi[cand], best_lo[cand]))
            cand = cand[order]
        nxt = int(cand[0])
        f = int(best_from[nxt])
        tree.append((min(f, nxt), max(f, nxt)))
        cur = nxt
    return sorted(tree)


def brute_force_delaunay(points) -> list[tuple[int, int, int]]:
    """Triangles of real points with empty circumcircles, by exhaustive search (small n)."""
    pts = [Point(*p) for p in points]
    n = len(pts)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = pts[i], pts[j], pts[k]
                o = orient2d(a, b, c)
                if o == 0:
                    continue
                if all(m in (i, j, k) or in_circle(a, b, c, pts[m]) < 0 for m in range(n)):
                    out.append((i, j, k))
    return out
