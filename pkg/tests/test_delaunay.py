"""Delaunay history DAG, point location and the spanning tree built on it."""

import itertools
import random

import pytest

from noisygeom.delaunay import (
    brute_force_delaunay,
    build_delaunay,
    emst,
    exact_mst,
    locate_triangle,
    non_delaunay_edges,
)
from noisygeom.errors import GeneralPositionViolation, TooFewPoints
from noisygeom.harness.instances import generate_instance
from noisygeom.noise import NoisyContext
from noisygeom.predicates import orient2d
from noisygeom.walk import WalkConfig


def test_three_points_one_triangle():
    dag = build_delaunay([(0, 0), (10, 1), (3, 8)], NoisyContext(0.1, 1))
    assert dag.triangles() == [(0, 1, 2)]
    dag.check()


def test_point_inside_triangle_gives_three():
    dag = build_delaunay([(0, 0), (100, 3), (40, 90), (45, 30)], NoisyContext(0.1, 2))
    assert dag.triangles() == [(0, 1, 3), (0, 2, 3), (1, 2, 3)]


def test_too_few_and_degenerate():
    with pytest.raises(TooFewPoints):
        build_delaunay([(0, 0), (1, 5)], NoisyContext(0.0))
    with pytest.raises(GeneralPositionViolation):
        build_delaunay([(0, 0), (1, 1), (2, 2), (5, 0)], NoisyContext(0.0))


def test_cocircular_input_detected():
    square = [(0, 0), (10, 0), (10, 10), (0, 10), (3, 4)]
    with pytest.raises(GeneralPositionViolation):
        for seed in range(10):
            build_delaunay(square, NoisyContext(0.0, seed))


@pytest.mark.parametrize("seed", range(15))
def test_small_sets_match_exhaustive(seed):
    pts = generate_instance("points-uniform", 9, seed, scale=500).points
    # at n = 9 the default n^-2 failure target is loose, so ask for n^-6
    dag = build_delaunay(pts, NoisyContext(0.1, seed), c=6)
    got = set(dag.triangles())
    want = set(brute_force_delaunay(pts))
    # triangles next to the hull may use a far vertex instead of the super-triangle
    assert got <= want
    dag.check()


def test_noisy_build_matches_exact_replay():
    pts = generate_instance("points-uniform", 200, 6).points
    dag = build_delaunay(pts, NoisyContext(0.1, 6))
    exact = build_delaunay(pts, None, permutation=dag.permutation)
    assert dag.triangles() == exact.triangles()
    assert not non_delaunay_edges(dag)
    dag.check()


def test_locate_single_triangle():
    dag = build_delaunay([(0, 0), (10, 1), (3, 8)], None, permutation=[])
    t = locate_triangle(dag, (5, 5), NoisyContext(0.1, 3), WalkConfig(epsilon=1e-3))
    assert t is dag.root


def test_locate_first_child_at_depth_one():
    dag = build_delaunay([(0, 0), (10, 1), (3, 8)], None, permutation=[0])
    child = dag.root.children[0]
    a, b, c = (dag.points[i] for i in child.v)
    q = ((a[0] + b[0] + c[0]) // 3, (a[1] + b[1] + c[1]) // 3)
    assert orient2d(a, b, q) > 0 and orient2d(b, c, q) > 0 and orient2d(c, a, q) > 0
    t = locate_triangle(dag, q, NoisyContext(0.1, 4), WalkConfig(epsilon=1e-3))
    assert t is child and t.depth == 1


def test_locate_queries_agree_with_exact():
    pts = generate_instance("points-uniform", 512, 7).points
    ctx = NoisyContext(0.1, 7)
    dag = build_delaunay(pts, ctx)
    rnd = random.Random(7)
    cfg = WalkConfig.for_size(512)
    wrong = 0
    for _ in range(2000):
        q = (rnd.randint(-10**6, 10**6), rnd.randint(-10**6, 10**6))
        wrong += locate_triangle(dag, q, ctx, cfg) is not dag.locate_exact(q)
    assert wrong == 0


def test_emst_three_points():
    pts = [(0, 0), (3, 0), (0, 4)]
    assert emst(pts, NoisyContext(0.1, 5)) == [(0, 1), (0, 2)]


def test_emst_four_points_exhaustive():
    pts = [(0, 0), (7, 1), (8, 9), (-1, 6)]

    def weight(tree):
        return sum((pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2 for i, j in tree)

    def spans(tree):
        seen = {0}
        for _ in range(3):
            for i, j in tree:
                if i in seen or j in seen:
                    seen |= {i, j}
        return len(seen) == 4

    # with distinct squared lengths the minimum of sum of squares is a tree of the MST too
    trees = [t for t in itertools.combinations(itertools.combinations(range(4), 2), 3) if spans(t)]
    lengths = lambda t: sorted((pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2 for i, j in t)
    best = min(trees, key=lengths)
    assert emst(pts, NoisyContext(0.1, 6)) == sorted(best) == exact_mst(pts)


@pytest.mark.parametrize("seed", range(3))
def test_emst_matches_prim(seed):
    pts = generate_instance("points-uniform", 300, seed).points
    assert emst(pts, NoisyContext(0.1, seed)) == exact_mst(pts)


def test_tiling_after_every_insertion():
    from noisygeom.delaunay import DelaunayDag, super_vertices

    pts = generate_instance("points-uniform", 60, 11).points
    ctx = NoisyContext(0.1, 11)
    dag = DelaunayDag(pts)
    cfg = WalkConfig.for_size(60)
    plan = ctx.plan(60.0 ** -3)
    s0, s1, s2 = super_vertices()
    whole = orient2d_area(s0, s1, s2)
    for k, i in enumerate(range(60), start=1):
        dag.insert(i, ctx, cfg, plan)
        leaves = dag.leaves()
        assert len(leaves) == 2 * k + 1
        assert sum(orient2d_area(*(dag.points[v] for v in t.v)) for t in leaves) == whole
        for t in leaves:
            assert orient2d(*(dag.points[v] for v in t.v)) > 0
            for nb in t.nbr:
                assert nb is None or nb.nbr[nb.opposite(t)] is t
        assert len(dag.fans[-1]) >= 3


def orient2d_area(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def test_flips_per_insertion_bounded():
    for n in (64, 256, 1024):
        dag = build_delaunay(generate_instance("points-uniform", n, n).points, NoisyContext(0.1, n))
        assert dag.flips / n <= 3.5
