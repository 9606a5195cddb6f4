"""Random forest built from scratch on numpy.

Axis-aligned CART trees with Gini impurity, grown until leaves are pure (or
down to single samples), combined by majority vote over bootstrap resamples.
Determinism contract: each tree's generator is seeded by (forest seed, tree
index), and the caller canonicalizes row order before training, so the same
data yields the same forest regardless of input row order.

Split search per node: a seeded permutation of all features is walked until
sqrt(d) features offering at least one valid split have been evaluated; the
best (impurity, earliest-in-permutation) split wins.  Walking past constant
features keeps nodes splittable whenever any feature separates them, so trees
reach purity except on identical rows with conflicting labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    """Flat array representation; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = self.feature[node] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.leaf_class[node]


class _TreeBuilder:
    def __init__(self, x: np.ndarray, y: np.ndarray, n_classes: int, mtry: int):
        self.x = x
        self.y = y
        self.n_classes = n_classes
        self.mtry = mtry
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_class: list[int] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_class.append(-1)
        return len(self.feature) - 1

    def _best_split_on(self, idx: np.ndarray, f: int) -> tuple[float, float] | None:
        v = self.x[idx, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        cut = np.flatnonzero(sv[:-1] < sv[1:])
        if cut.size == 0:
            return None
        sy = self.y[idx][order]
        m = sv.shape[0]
        onehot = np.zeros((m, self.n_classes))
        onehot[np.arange(m), sy] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left_counts = cum[cut]
        total = cum[-1]
        right_counts = total - left_counts
        nl = cut + 1.0
        nr = m - nl
        # Weighted Gini impurity of the two children; minimizing it is
        # equivalent to maximizing the sum of squared counts over sizes.
        gini = m - (left_counts**2).sum(axis=1) / nl - (right_counts**2).sum(axis=1) / nr
        best = int(np.argmin(gini))
        i = int(cut[best])
        thr = (sv[i] + sv[i + 1]) / 2.0
        return float(gini[best]) / m, thr

    def build(self, idx: np.ndarray, rng: np.random.Generator) -> int:
        node = self._new_node()
        counts = np.bincount(self.y[idx], minlength=self.n_classes)
        if np.count_nonzero(counts) == 1 or idx.shape[0] < 2:
            self.leaf_class[node] = int(np.argmax(counts))
            return node
        best: tuple[float, int, float] | None = None
        evaluated = 0
        for f in rng.permutation(self.x.shape[1]):
            found = self._best_split_on(idx, int(f))
            if found is None:
                continue
            impurity, thr = found
            if best is None or impurity < best[0]:
                best = (impurity, int(f), thr)
            evaluated += 1
            if evaluated >= self.mtry:
                break
        if best is None:
            self.leaf_class[node] = int(np.argmax(counts))
            return node
        _, f, thr = best
        go_left = self.x[idx, f] <= thr
        left_node = self.build(idx[go_left], rng)
        right_node = self.build(idx[~go_left], rng)
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = left_node
        self.right[node] = right_node
        return node

    def to_tree(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=float),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            leaf_class=np.asarray(self.leaf_class, dtype=np.int32),
        )


def grow_forest(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int,
    seed: int,
) -> list[Tree]:
    """Grow n_trees bootstrap CART trees; tree t is seeded by (seed, t)."""
    n, d = x.shape
    mtry = max(1, int(np.floor(np.sqrt(d))))
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        sample = rng.integers(0, n, size=n)
        builder = _TreeBuilder(x, y, n_classes, mtry)
        builder.build(np.sort(sample), rng)
        trees.append(builder.to_tree())
    return trees


def forest_votes(trees: list[Tree], x: np.ndarray, n_classes: int) -> np.ndarray:
    """Fraction of trees voting for each class; shape (n, n_classes)."""
    counts = np.zeros((x.shape[0], n_classes))
    for tree in trees:
        pred = tree.predict(x)
        counts[np.arange(x.shape[0]), pred] += 1.0
    return counts / len(trees)
