"""Trapezoidal maps: small cases, brute-force decomposition and point location."""

import random
from fractions import Fraction

import pytest

from noisygeom.errors import CrossingSegments, GeneralPositionViolation
from noisygeom.harness.instances import generate_instance
from noisygeom.noise import NoisyContext
from noisygeom.predicates import Segment, above_segment
from noisygeom.trapmap import (
    BOX,
    BOX_BOTTOM,
    BOX_LEFT,
    BOX_RIGHT,
    BOX_TOP,
    build_trap_map,
    locate_endpoint,
    serialize_leaves,
    validate_segments,
)
from noisygeom.walk import WalkConfig


def brute_force_decomposition(segs):
    """Canonical leaves from slabs between consecutive endpoint x, merged across open walls."""
    segs = [Segment.of(*s) for s in segs]
    ends = {e[0]: e for s in segs for e in s}
    xs = [-BOX] + sorted(ends) + [BOX]
    slabs = []
    for x0, x1 in zip(xs, xs[1:]):
        mid = Fraction(x0 + x1, 2)
        live = [s for s in segs if s.a[0] <= x0 and x1 <= s.b[0]]
        live.sort(key=lambda s: s.a[1] + Fraction(s.b[1] - s.a[1], s.b[0] - s.a[0]) * (mid - s.a[0]))
        stack = [BOX_BOTTOM] + live + [BOX_TOP]
        slabs.append({(top, bot) for bot, top in zip(stack, stack[1:])})
    leaves = []
    open_ = {pair: BOX_LEFT for pair in slabs[0]}
    for k in range(1, len(slabs)):
        p = ends[xs[k]]
        nxt = {}
        for (top, bot), lp in open_.items():
            wall_inside = above_segment(p, bot) > 0 and above_segment(p, top) < 0
            if (top, bot) in slabs[k] and not wall_inside:
                nxt[(top, bot)] = lp
            else:
                leaves.append((top, bot, lp, p))
        for pair in slabs[k]:
            nxt.setdefault(pair, p)
        open_ = nxt
    leaves += [(top, bot, lp, BOX_RIGHT) for (top, bot), lp in open_.items()]
    canon = lambda s: tuple(map(tuple, s))
    return sorted((canon(t), canon(b), tuple(l), tuple(r)) for t, b, l, r in leaves)


def test_empty_map_is_the_box():
    tm = build_trap_map([], NoisyContext(0.1))
    assert len(tm.leaves()) == 1
    assert locate_endpoint(tm, (5, 5), NoisyContext(0.1), WalkConfig(epsilon=0.01)) is tm.root


def test_one_segment_four_leaves():
    tm = build_trap_map([((0, 0), (10, 2))], NoisyContext(0.1, 1))
    assert len(tm.leaves()) == 4
    tm.check()


def test_query_left_of_single_segment():
    s = Segment.of((0, 0), (10, 2))
    tm = build_trap_map([s], NoisyContext(0.0))
    t = locate_endpoint(tm, (-5, 100), NoisyContext(0.1, 2), WalkConfig(epsilon=1e-3))
    assert t.rightp == s.a and t.leftp == BOX_LEFT
    assert t.top == BOX_TOP and t.bottom == BOX_BOTTOM


@pytest.mark.parametrize("seed", range(20))
def test_matches_brute_force_decomposition(seed):
    segs = generate_instance("segments-noncrossing", 8, seed, scale=1000).segments
    tm = build_trap_map(segs, NoisyContext(0.1, seed))
    assert tm.canonical_leaves() == brute_force_decomposition(segs)
    assert len(tm.leaves()) == 3 * len(segs) + 1


def test_noisy_build_matches_exact_replay_and_tiles():
    segs = generate_instance("segments-noncrossing", 150, 3).segments
    tm = build_trap_map(segs, NoisyContext(0.1, 3))
    exact = build_trap_map(segs, None, permutation=tm.permutation)
    assert tm.canonical_leaves() == exact.canonical_leaves()
    assert serialize_leaves(tm) == serialize_leaves(exact)
    tm.check()


def test_batch_queries_match_exact():
    segs = generate_instance("segments-noncrossing", 100, 4).segments
    ctx = NoisyContext(0.1, 4)
    tm = build_trap_map(segs, ctx)
    rnd = random.Random(4)
    walls = {e[0] for s in segs for e in s}
    pts = []
    while len(pts) < 2000:
        q = (rnd.randint(-BOX + 1, BOX - 1), rnd.randint(-BOX + 1, BOX - 1))
        if q[0] not in walls and all(above_segment(q, s) != 0 for s in segs):
            pts.append(q)
    got = tm.query_batch(pts, ctx, WalkConfig.for_size(100))
    assert got == tm.locate_exact_batch(pts) == [tm.locate_exact(q) for q in pts]


def test_rejects_crossing_and_shared_x():
    with pytest.raises(CrossingSegments):
        validate_segments([((0, 0), (4, 4)), ((1, 4), (5, 0))])
    with pytest.raises(GeneralPositionViolation):
        validate_segments([((0, 0), (4, 4)), ((0, 9), (5, 9))])


def test_exact_build_needs_permutation():
    with pytest.raises(ValueError):
        build_trap_map([((0, 0), (1, 1))], None)


def test_size_and_walk_length_scale_linearly():
    import math

    nodes, walks = [], []
    for e in range(6, 13):
        n = 1 << e
        segs = generate_instance("segments-noncrossing", n, e).segments
        tm = build_trap_map(segs, NoisyContext(0.1, e))
        nodes.append(len(tm.nodes) / n)
        walks.append(sum(tm.walk_lengths) / (n * math.log2(n)))
    assert max(nodes) / min(nodes) <= 1.5
    assert max(walks) / min(walks) <= 1.5
