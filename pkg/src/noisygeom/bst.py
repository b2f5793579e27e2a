"""Red-black tree searched by pushdown random walks.

Every node keeps two extra links, ``lo`` and ``hi``: the nearest ancestor
whose right (resp. left) subtree contains the node, or ``None`` for the
-inf / +inf sentinel.  A query belongs in a node's subtree exactly when it
lies strictly between ``lo.key`` and ``hi.key``, which gives the transition
oracle a two-comparison on-path test.

Keys are compared through an exact three-way function ``compare(query,
key)``; the tree turns each comparison into one noisy Boolean primitive.
Structural work (rotations, deletion by handle, neighbours, min link) reads
no geometry and is never noisy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterator

from .errors import EmptyStructure, InconsistentStructure, InvalidHandle
from .noise import NoisyContext
from .walk import WalkConfig, run_walk_outcome

Compare = Callable[[Any, Any], int]

# tests per oracle consultation: two bound checks plus at most two for the
# three-way step; each gets an equal share of the per-consultation budget
TESTS_PER_CONSULTATION = 4


class TreeNode:
    __slots__ = ("key", "left", "right", "parent", "red", "lo", "hi", "tree")

    def __init__(self, key, tree):
        self.key = key
        self.left = None
        self.right = None
        self.parent = None
        self.red = True
        self.lo = None
        self.hi = None
        self.tree = tree

    def __repr__(self):
        return f"TreeNode({self.key!r})"


@dataclass(frozen=True)
class NotFound:
    """Frontier position where a missing key would hang: child ``side`` of ``parent``.

    ``side`` is 0 for left, 1 for right; ``parent`` is None for an empty tree.
    """

    parent: TreeNode | None
    side: int


def _bounds_from_parent(node: TreeNode):
    p = node.parent
    if p is None:
        return None, None
    if p.left is node:
        return p.lo, p
    return p, p.hi


class OrderedTree:
    def __init__(self, compare: Compare):
        self.compare = compare
        self.root: TreeNode | None = None
        self.min: TreeNode | None = None
        self.size = 0
        self._rotated: list | None = None

    def __len__(self):
        return self.size

    def __iter__(self) -> Iterator[TreeNode]:
        node = self.min
        while node is not None:
            yield node
            node = successor(node)

    def keys(self) -> list:
        return [n.key for n in self]

    def height(self) -> int:
        def h(n):
            return 0 if n is None else 1 + max(h(n.left), h(n.right))

        return h(self.root)

    def height_bound(self) -> int:
        return int(2 * math.log2(self.size + 1)) + 2

    # -- noisy search -----------------------------------------------------

    def _oracle(self, q, ctx: NoisyContext, plan):
        cmp = self.compare
        vote = ctx.vote

        def inside(lo, hi):
            if lo is not None and not vote(cmp(q, lo.key) > 0, plan):
                return False
            return hi is None or vote(cmp(q, hi.key) < 0, plan)

        def oracle(v):
            if type(v) is tuple:
                u, side = v
                if u is None:
                    return True, v
                ok = inside(u.lo, u) if side == 0 else inside(u, u.hi)
                return (True, v) if ok else (False, None)
            if not inside(v.lo, v.hi):
                return False, None
            c = cmp(q, v.key)
            if vote(c < 0, plan):
                return True, v.left if v.left is not None else (v, 0)
            if vote(c > 0, plan):
                return True, v.right if v.right is not None else (v, 1)
            return True, v

        return oracle

    @staticmethod
    def _successors(v):
        if type(v) is tuple:
            return ()
        return (
            v.left if v.left is not None else (v, 0),
            v.right if v.right is not None else (v, 1),
        )

    def search(self, q, ctx: NoisyContext, cfg: WalkConfig):
        """Node with key equal to ``q``, or :class:`NotFound` with the frontier position."""
        if self.root is None:
            return NotFound(None, 0)
        plan = ctx.plan(cfg.p_e_max / TESTS_PER_CONSULTATION)
        out = run_walk_outcome(
            self._successors,
            self._oracle(q, ctx, plan),
            self.root,
            cfg.with_hint(self.height_bound()),
            ctx.stats,
        )
        v = out.vertex
        if type(v) is tuple:
            return NotFound(*v)
        return v

    def insert(self, key, ctx: NoisyContext, cfg: WalkConfig) -> TreeNode:
        """Insert a key that is not yet present; returns its node handle."""
        if self.root is None:
            return self._attach(key, None, 0)
        for _ in range(cfg.max_retries + 1):
            pos = self.search(key, ctx, cfg)
            if isinstance(pos, NotFound):
                return self._attach(key, pos.parent, pos.side)
            # a walk that claims the key is present has erred; keys are distinct
            ctx.stats.retries += 1
        raise InconsistentStructure(f"search kept reporting {key!r} as present")

    def insert_by_descent(self, key, ctx: NoisyContext, plan) -> TreeNode:
        """Plain root-to-leaf insertion with every comparison amplified by ``plan``.

        This is the repetition-strategy baseline: O(log n) repetitions at each
        of O(log n) levels.
        """
        if self.root is None:
            return self._attach(key, None, 0)
        node = self.root
        cmp = self.compare
        while True:
            if ctx.vote(cmp(key, node.key) < 0, plan):
                if node.left is None:
                    return self._attach(key, node, 0)
                node = node.left
            else:
                if node.right is None:
                    return self._attach(key, node, 1)
                node = node.right

    # -- structural operations --------------------------------------------

    def _attach(self, key, parent: TreeNode | None, side: int) -> TreeNode:
        node = TreeNode(key, self)
        node.parent = parent
        if parent is None:
            if self.root is not None:
                raise InvalidHandle("root position is occupied")
            self.root = node
            self.min = node
        elif side == 0:
            if parent.left is not None:
                raise InvalidHandle("left position is occupied")
            parent.left = node
            if parent is self.min:
                self.min = node
        else:
            if parent.right is not None:
                raise InvalidHandle("right position is occupied")
            parent.right = node
        node.lo, node.hi = _bounds_from_parent(node)
        self.size += 1
        self._insert_fixup(node)
        return node

    def _rotate_left(self, x: TreeNode):
        y = x.right
        x.right = y.left
        if y.left is not None:
            y.left.parent = x
        self._replace_child(x, y)
        y.left = x
        x.parent = y
        y.lo, y.hi = x.lo, x.hi
        x.hi = y
        if self._rotated is not None:
            self._rotated.extend((x, y))

    def _rotate_right(self, x: TreeNode):
        y = x.left
        x.left = y.right
        if y.right is not None:
            y.right.parent = x
        self._replace_child(x, y)
        y.right = x
        x.parent = y
        y.lo, y.hi = x.lo, x.hi
        x.lo = y
        if self._rotated is not None:
            self._rotated.extend((x, y))

    def _replace_child(self, old: TreeNode, new: TreeNode | None):
        p = old.parent
        if new is not None:
            new.parent = p
        if p is None:
            self.root = new
        elif p.left is old:
            p.left = new
        else:
            p.right = new

    def _insert_fixup(self, z: TreeNode):
        while z.parent is not None and z.parent.red:
            p = z.parent
            g = p.parent
            if p is g.left:
                u = g.right
                if u is not None and u.red:
                    p.red = u.red = False
                    g.red = True
                    z = g
                    continue
                if z is p.right:
                    self._rotate_left(p)
                    z, p = p, z
                p.red = False
                g.red = True
                self._rotate_right(g)
            else:
                u = g.left
                if u is not None and u.red:
                    p.red = u.red = False
                    g.red = True
                    z = g
                    continue
                if z is p.left:
                    self._rotate_right(p)
                    z, p = p, z
                p.red = False
                g.red = True
                self._rotate_left(g)
        self.root.red = False

    def delete(self, z: TreeNode) -> None:
        """Remove a node by handle; no comparisons are made."""
        if not isinstance(z, TreeNode) or z.tree is not self:
            raise InvalidHandle(f"{z!r} is not a node of this tree")
        if z is self.min:
            self.min = successor(z)
        touched = []
        if z.left is None or z.right is None:
            y_red = z.red
            x = z.left if z.left is not None else z.right
            x_parent = z.parent
            self._replace_child(z, x)
            if x is not None:
                touched.append(x)
        else:
            y = z.right
            while y.left is not None:
                y = y.left
            y_red = y.red
            x = y.right
            if y.parent is z:
                x_parent = y
            else:
                x_parent = y.parent
                self._replace_child(y, x)
                if x is not None:
                    touched.append(x)
                y.right = z.right
                y.right.parent = y
                touched.append(y.right)
            self._replace_child(z, y)
            y.left = z.left
            y.left.parent = y
            y.red = z.red
            touched.extend((y, y.left))
        if not y_red:
            self._rotated = touched
            try:
                self._delete_fixup(x, x_parent)
            finally:
                self._rotated = None
        z.tree = z.parent = z.left = z.right = z.lo = z.hi = None
        self.size -= 1
        self._repair_bounds(touched)

    def _delete_fixup(self, x, parent):
        while x is not self.root and (x is None or not x.red):
            if x is parent.left:
                w = parent.right
                if w.red:
                    w.red = False
                    parent.red = True
                    self._rotate_left(parent)
                    w = parent.right
                if (w.left is None or not w.left.red) and (w.right is None or not w.right.red):
                    w.red = True
                    x = parent
                    parent = x.parent
                else:
                    if w.right is None or not w.right.red:
                        w.left.red = False
                        w.red = True
                        self._rotate_right(w)
                        w = parent.right
                    w.red = parent.red
                    parent.red = False
                    w.right.red = False
                    self._rotate_left(parent)
                    x = self.root
            else:
                w = parent.left
                if w.red:
                    w.red = False
                    parent.red = True
                    self._rotate_right(parent)
                    w = parent.left
                if (w.left is None or not w.left.red) and (w.right is None or not w.right.red):
                    w.red = True
                    x = parent
                    parent = x.parent
                else:
                    if w.left is None or not w.left.red:
                        w.right.red = False
                        w.red = True
                        self._rotate_left(w)
                        w = parent.left
                    w.red = parent.red
                    parent.red = False
                    w.left.red = False
                    self._rotate_right(parent)
                    x = self.root
        if x is not None:
            x.red = False

    def _repair_bounds(self, touched):
        """Recompute bounds of moved nodes top-down.

        A node's lo link is inherited by its whole left spine and its hi link
        by its right spine, so each repair pushes the value down both spines.
        """
        live = {}
        for n in touched:
            if n is not None and n.tree is self:
                # a rotation re-hangs one child subtree of its pair
                for m in (n, n.left, n.right):
                    if m is not None:
                        live[id(m)] = m
        order = sorted(live.values(), key=depth)
        for node in order:
            node.lo, node.hi = _bounds_from_parent(node)
            c = node.left
            while c is not None:
                c.lo = node.lo
                c = c.left
            c = node.right
            while c is not None:
                c.hi = node.hi
                c = c.right

    # -- priority-queue view ----------------------------------------------

    def pq_min(self) -> TreeNode:
        if self.min is None:
            raise EmptyStructure("priority queue is empty")
        return self.min

    def extract_min(self):
        node = self.pq_min()
        key = node.key
        self.delete(node)
        return key

    # -- checks ------------------------------------------------------------

    def check(self, exact: Compare | None = None) -> None:
        """Raise AssertionError if any structural invariant fails."""
        if self.root is None:
            assert self.size == 0 and self.min is None
            return
        assert self.root.parent is None and not self.root.red
        count = 0

        def walk(n, lo, hi):
            nonlocal count
            if n is None:
                return 1
            count += 1
            assert n.tree is self
            assert n.lo is lo and n.hi is hi, f"bad bounds at {n!r}"
            if n.parent is not None:
                assert (n.lo is n.parent) != (n.hi is n.parent)
            if exact is not None:
                assert lo is None or exact(n.key, lo.key) > 0
                assert hi is None or exact(n.key, hi.key) < 0
            for c in (n.left, n.right):
                if c is not None:
                    assert c.parent is n
                    assert not (n.red and c.red), "red node with red child"
            bl = walk(n.left, lo, n)
            br = walk(n.right, n, hi)
            assert bl == br, "unequal black heights"
            return bl + (0 if n.red else 1)

        walk(self.root, None, None)
        assert count == self.size
        m = self.root
        while m.left is not None:
            m = m.left
        assert self.min is m


def depth(node: TreeNode) -> int:
    d = 0
    while node.parent is not None:
        node = node.parent
        d += 1
    return d


def successor(node: TreeNode) -> TreeNode | None:
    if node.right is not None:
        node = node.right
        while node.left is not None:
            node = node.left
        return node
    while node.parent is not None and node.parent.right is node:
        node = node.parent
    return node.parent


def predecessor(node: TreeNode) -> TreeNode | None:
    if node.left is not None:
        node = node.left
        while node.right is not None:
            node = node.right
        return node
    while node.parent is not None and node.parent.left is node:
        node = node.parent
    return node.parent


def frontier_neighbors(pos: NotFound) -> tuple[TreeNode | None, TreeNode | None]:
    """In-order predecessor and successor of a frontier position."""
    u = pos.parent
    if u is None:
        return None, None
    if pos.side == 0:
        return predecessor(u), u
    return u, successor(u)


# -- module-level API ---------------------------------------------------------


def search(tree: OrderedTree, q, ctx, cfg):
    return tree.search(q, ctx, cfg)


def insert(tree: OrderedTree, key, ctx, cfg) -> TreeNode:
    return tree.insert(key, ctx, cfg)


def delete(tree: OrderedTree, node: TreeNode) -> None:
    tree.delete(node)


def pq_min(tree: OrderedTree) -> TreeNode:
    return tree.pq_min()


def pq_extract_min(tree: OrderedTree):
    return tree.extract_min()


def noisy_sort(items, compare: Compare, ctx: NoisyContext, cfg: WalkConfig | None = None, c: float = 2.0) -> list:
    """Sort distinct items by n noisy-tree insertions; O(n log n) comparisons w.h.p."""
    items = list(items)
    if cfg is None:
        cfg = WalkConfig.for_size(len(items), c)
    tree = OrderedTree(compare)
    for it in items:
        tree.insert(it, ctx, cfg)
    return tree.keys()


def repetition_sort(items, compare: Compare, ctx: NoisyContext, c: float = 2.0) -> list:
    """Baseline: tree insertion with each comparison repeated to error n^-(c+1)."""
    items = list(items)
    n = max(len(items), 2)
    plan = ctx.plan(float(n) ** -(c + 1))
    tree = OrderedTree(compare)
    for it in items:
        tree.insert_by_descent(it, ctx, plan)
    return tree.keys()
