"""Shared transition oracles for walk tests."""

import random

import numpy as np


class Comb:
    """Path 0..L with a dead-end decoy hanging off every non-target path vertex.

    Vertex L is the target; decoy of path vertex i is L + 1 + i.  A lying
    oracle is adversarial rather than random: on the path it claims "stay"
    or steers into the decoy, at the target it claims "off path", and at a
    decoy it claims the walk is fine where it is.
    """

    def __init__(self, length: int):
        self.L = length
        self.children = np.full((2 * length + 1, 2), -1, dtype=np.int64)
        for i in range(length):
            self.children[i] = (i + 1, length + 1 + i)

    def successors(self, v):
        return tuple(int(w) for w in self.children[v] if w >= 0)

    def oracle(self, p_e: float, rnd: random.Random):
        L = self.L

        def ask(v):
            lie = rnd.random() < p_e
            if v > L:
                return (True, v) if lie else (False, None)
            if v == L:
                return (False, None) if lie else (True, v)
            if not lie:
                return True, v + 1
            return (True, v) if rnd.random() < 0.5 else (True, L + 1 + v)

        ask.error_bound = p_e
        return ask

    def oracle_batch(self, p_e: float, gen: np.random.Generator):
        L = self.L

        def ask(qids, v):
            m = len(v)
            lie = gen.random(m) < p_e
            coin = gen.random(m) < 0.5
            decoy = v > L
            target = v == L
            on = np.where(decoy, lie, np.where(target, ~lie, True))
            truth = np.where(target | decoy, v, v + 1)
            lied = np.where(coin, v, L + 1 + v)
            nxt = np.where(lie & ~decoy & ~target, lied, truth)
            return on, nxt

        return ask


class BinaryTree:
    """Complete binary tree in heap numbering (root 1) with one target node."""

    def __init__(self, height: int, target: int):
        self.size = (1 << (height + 1)) - 1
        self.target = target
        path = []
        v = target
        while v >= 1:
            path.append(v)
            v //= 2
        self.path = path[::-1]
        self.on_path = set(self.path)

    def children(self, v):
        return tuple(w for w in (2 * v, 2 * v + 1) if w <= self.size)

    def oracle(self, p_e: float, rnd: random.Random):
        def truth(v):
            if v not in self.on_path:
                return False, None
            if v == self.target:
                return True, v
            return True, self.path[self.path.index(v) + 1]

        def ask(v):
            right = truth(v)
            if rnd.random() >= p_e:
                return right
            options = [(False, None), (True, v)] + [(True, w) for w in self.children(v)]
            return rnd.choice([o for o in options if o != right])

        ask.error_bound = p_e
        return ask
