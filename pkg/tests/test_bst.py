"""Noisy red-black tree: structure, searches, deletions and sorting."""

import random

import pytest

from noisygeom.bst import (
    NotFound,
    OrderedTree,
    delete,
    frontier_neighbors,
    insert,
    noisy_sort,
    pq_extract_min,
    pq_min,
    predecessor,
    repetition_sort,
    search,
    successor,
)
from noisygeom.errors import EmptyStructure, InvalidHandle
from noisygeom.noise import NoisyContext
from noisygeom.walk import WalkConfig


def cmp(a, b):
    return (a > b) - (a < b)


def build(keys, p=0.0, seed=0):
    ctx = NoisyContext(p, seed)
    cfg = WalkConfig.for_size(max(len(keys), 2))
    tree = OrderedTree(cmp)
    handles = {k: insert(tree, k, ctx, cfg) for k in keys}
    return tree, handles, ctx, cfg


def test_empty_search_is_root_position():
    tree = OrderedTree(cmp)
    assert search(tree, 5, NoisyContext(0.1), WalkConfig(epsilon=0.01)) == NotFound(None, 0)


def test_single_insert_has_infinite_bounds():
    tree, h, _, _ = build([4])
    node = h[4]
    assert tree.root is node and node.lo is None and node.hi is None


def test_search_balanced_exact():
    tree, h, ctx, cfg = build([4, 2, 6, 1, 3, 5, 7])
    before = ctx.stats.consultations
    assert search(tree, 5, ctx, cfg) is h[5]
    # root 4 -> 6 -> 5, then the terminal pushes
    assert ctx.stats.consultations - before == 2 + cfg.threshold


def test_search_missing_key_gives_frontier():
    tree, h, ctx, cfg = build([10, 20, 30])
    pos = search(tree, 25, ctx, cfg)
    assert isinstance(pos, NotFound)
    assert frontier_neighbors(pos) == (h[20], h[30])


def test_ascending_inserts_stay_balanced():
    n = 1000
    tree, _, _, _ = build(list(range(1, n + 1)))
    assert tree.keys() == list(range(1, n + 1))
    assert tree.height() <= 2 * (n + 1).bit_length()
    tree.check(cmp)


def test_noisy_search_accuracy():
    rnd = random.Random(3)
    keys = rnd.sample(range(10**6), 1024)
    tree, h, _, _ = build(keys)
    ctx = NoisyContext(0.1, 4)
    cfg = WalkConfig.for_size(1024)
    wrong = sum(search(tree, k, ctx, cfg) is not h[k] for k in (rnd.choice(keys) for _ in range(10_000)))
    assert wrong / 10_000 <= 1024 ** -2


def test_noisy_insertions_sorted():
    ok = 0
    for t in range(100):
        keys = random.Random(t).sample(range(10**6), 1000)
        tree, _, _, _ = build(keys, p=0.1, seed=t)
        ok += tree.keys() == sorted(keys)
    assert ok >= 99


def test_rotation_changes_two_bound_pairs():
    tree, h, _, _ = build(list(range(1, 16)))
    x = next(n for n in tree if n.right is not None and n.parent is not None)
    y = x.right
    before = {n.key: (n.lo, n.hi) for n in tree}
    tree._rotate_left(x)
    after = {n.key: (n.lo, n.hi) for n in tree}
    changed = {k for k in before if before[k] != after[k]}
    assert changed <= {x.key, y.key}
    assert tree.keys() == list(range(1, 16))


def test_delete_only_node():
    tree, h, _, _ = build([1])
    delete(tree, h[1])
    assert tree.root is None and len(tree) == 0
    tree.check()


def test_delete_all_random_order():
    tree, h, _, _ = build([4, 2, 6, 1, 3, 5, 7])
    order = list(h)
    random.Random(1).shuffle(order)
    for k in order:
        delete(tree, h[k])
        tree.check(cmp)
    assert tree.root is None


def test_delete_foreign_handle():
    t1, h1, _, _ = build([1, 2])
    t2, _, _, _ = build([3])
    with pytest.raises(InvalidHandle):
        delete(t2, h1[1])
    delete(t1, h1[1])
    with pytest.raises(InvalidHandle):
        delete(t1, h1[1])


def test_neighbour_links():
    tree, h, _, _ = build([5, 1, 9, 3, 7])
    assert successor(h[3]) is h[5] and predecessor(h[3]) is h[1]
    assert successor(h[9]) is None and predecessor(h[1]) is None


def test_pq_examples():
    tree, _, _, _ = build([3, 1, 2])
    assert pq_min(tree).key == 1
    assert [pq_extract_min(tree) for _ in range(3)] == [1, 2, 3]
    with pytest.raises(EmptyStructure):
        pq_min(tree)


def test_pq_noisy_extraction():
    ok = 0
    for t in range(100):
        keys = random.Random(t).sample(range(10**6), 300)
        tree, _, _, _ = build(keys, p=0.1, seed=t)
        ok += [pq_extract_min(tree) for _ in keys] == sorted(keys)
    assert ok >= 99


def _interleaved(trial, ops, p):
    """Random insert/delete sequence; returns (noisy keys, exact replay keys)."""
    rnd = random.Random(trial)
    ctx = NoisyContext(p, trial)
    cfg = WalkConfig.for_size(ops)
    tree = OrderedTree(cmp)
    live = {}
    model = set()
    for _ in range(ops):
        if live and rnd.random() < 0.4:
            k = rnd.choice(sorted(live))
            delete(tree, live.pop(k))
            model.discard(k)
        else:
            k = rnd.randrange(10**9)
            if k in model:
                continue
            live[k] = insert(tree, k, ctx, cfg)
            model.add(k)
    tree.check()
    return tree.keys(), sorted(model)


def test_interleaved_small_exact():
    got, want = _interleaved(0, 2000, 0.0)
    assert got == want


@pytest.mark.slow
def test_interleaved_noisy_replay():
    ok = sum(a == b for a, b in (_interleaved(t, 10_000, 0.1) for t in range(100)))
    assert ok >= 99


def test_noisy_sort_examples():
    ctx = NoisyContext(0.0)
    assert noisy_sort([], cmp, ctx) == []
    assert noisy_sort([5, 1, 4, 2, 3], cmp, ctx) == [1, 2, 3, 4, 5]


def test_repetition_sort_sorts():
    keys = random.Random(5).sample(range(10**6), 500)
    assert repetition_sort(keys, cmp, NoisyContext(0.1, 5)) == sorted(keys)


def test_invariants_after_every_operation():
    rnd = random.Random(9)
    ctx = NoisyContext(0.1, 9)
    cfg = WalkConfig.for_size(400)
    tree = OrderedTree(cmp)
    live = {}
    for _ in range(400):
        if live and rnd.random() < 0.45:
            delete(tree, live.pop(rnd.choice(sorted(live))))
        else:
            k = rnd.randrange(10**6)
            if k not in live:
                live[k] = insert(tree, k, ctx, cfg)
        tree.check(cmp)
        assert tree.keys() == sorted(live)
