"""Random forest regressor over similarity records.

Trees are grown CART style: at every node a random subset of ``mtry``
features is searched for the midpoint threshold that minimizes the summed
squared error of the labels in the two children. Leaves hold the mean label,
so with 0/1 labels every prediction is a score in [0, 1] that
:func:`classify` turns into a same-author decision.

Each tree draws its randomness from its own generator seeded with
``mix(seed, tree_index)``; training in parallel therefore cannot change the
result.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (EmptyDataset, EmptySamples, FormatError, InvalidParams,
                     SchemaMismatch, VersionError)

log = logging.getLogger(__name__)

MAGIC = "STYLOMECH-FOREST"
# columns below this variance should have been removed by the variance filter
LOW_VARIANCE = 0.05
FORMAT_VERSION = 1
U64 = (1 << 64) - 1


def mix(seed: int, index: int) -> int:
    """SplitMix64 finalizer applied to ``seed XOR index``."""
    z = ((seed ^ index) + 0x9E3779B97F4A7C15) & U64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & U64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    max_depth: int = 12
    min_samples_leaf: int = 2
    mtry: Optional[int] = None  # None: ceil(sqrt(n_features))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "min_samples_leaf"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {value!r}")
        if self.mtry is not None and self.mtry < 1:
            raise InvalidParams(f"mtry must be a positive integer, got {self.mtry!r}")
        object.__setattr__(self, "seed", int(self.seed) & U64)

    def resolve(self, n_features: int) -> "ForestParams":
        if n_features < 1:
            raise InvalidParams("need at least one feature")
        mtry = self.mtry if self.mtry is not None else math.ceil(math.sqrt(n_features))
        if mtry > n_features:
            raise InvalidParams(f"mtry={mtry} exceeds the {n_features} available features")
        return replace(self, mtry=mtry)


@dataclass
class DecisionTree:
    """Array-backed binary tree; ``feature[i] == -1`` marks a leaf.

    ``gain`` holds the squared-error reduction of each split (0 for leaves).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def depth(self) -> int:
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = np.nonzero(feat >= 0)[0]
            if active.size == 0:
                return self.value[node]
            cur = node[active]
            go_left = X[active, feat[active]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])

    def __eq__(self, other):
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return (np.array_equal(self.feature, other.feature)
                and np.array_equal(self.threshold, other.threshold)
                and np.array_equal(self.left, other.left)
                and np.array_equal(self.right, other.right)
                and np.array_equal(self.value, other.value))


class _Builder:
    def __init__(self, X, y, params: ForestParams, rng: np.random.Generator):
        self.X = X
        self.y = y
        self.params = params
        self.rng = rng
        self.n_features = X.shape[1]
        self.nodes: List[list] = []

    def grow(self, idx: np.ndarray, depth: int = 0) -> int:
        node_id = len(self.nodes)
        ys = self.y[idx]
        mean = float(ys.mean())
        self.nodes.append([-1, 0.0, -1, -1, mean, 0.0])
        sse = float(((ys - mean) ** 2).sum())
        n = len(idx)
        tol = 1e-10 * max(1.0, sse)
        if depth >= self.params.max_depth or n < 2 * self.params.min_samples_leaf or sse <= tol:
            return node_id
        features = np.sort(self.rng.choice(self.n_features, size=self.params.mtry, replace=False))
        split = best_split(self.X[idx], ys, features, self.params.min_samples_leaf, tol)
        if split is None:
            return node_id
        split_sse, f, thr = split
        if sse - split_sse <= tol:
            return node_id
        go_left = self.X[idx, f] <= thr
        left = self.grow(idx[go_left], depth + 1)
        right = self.grow(idx[~go_left], depth + 1)
        self.nodes[node_id][:4] = [int(f), float(thr), left, right]
        self.nodes[node_id][5] = sse - split_sse
        return node_id

    def tree(self) -> DecisionTree:
        cols = list(zip(*self.nodes))
        return DecisionTree(
            feature=np.array(cols[0], dtype=np.int64),
            threshold=np.array(cols[1], dtype=float),
            left=np.array(cols[2], dtype=np.int64),
            right=np.array(cols[3], dtype=np.int64),
            value=np.array(cols[4], dtype=float),
            gain=np.array(cols[5], dtype=float),
        )


def best_split(Xn: np.ndarray, ys: np.ndarray, features: Sequence[int], min_leaf: int,
               tol: float = 1e-12) -> Optional[Tuple[float, int, float]]:
    """Lowest-SSE ``(sse, feature, threshold)`` over ``features``, or None.

    Thresholds are midpoints between adjacent distinct values and both sides
    keep at least ``min_leaf`` samples. Ties within ``tol`` go to the lowest
    feature index, then the lowest threshold.
    """
    n = len(ys)
    lo, hi = min_leaf - 1, n - min_leaf  # left side = sorted[0..k]
    if hi <= lo:
        return None
    best = None
    total = ys.sum()
    total_sq = (ys * ys).sum()
    k = np.arange(lo, hi)
    n_left = k + 1.0
    n_right = n - n_left
    for f in sorted(int(f) for f in features):
        x = Xn[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ysorted = ys[order]
        valid = xs[k] < xs[k + 1]
        if not valid.any():
            continue
        csum = np.cumsum(ysorted)[k]
        csq = np.cumsum(ysorted * ysorted)[k]
        sse = (csq - csum * csum / n_left) + ((total_sq - csq) - (total - csum) ** 2 / n_right)
        sse = np.where(valid, sse, np.inf)
        m = sse.min()
        pos = int(np.nonzero(sse <= m + tol)[0][0])
        if best is None or m < best[0] - tol:
            a, b = xs[k[pos]], xs[k[pos] + 1]
            thr = a + (b - a) / 2.0
            if not a <= thr < b:
                thr = a
            best = (float(max(m, 0.0)), f, float(thr))
    return best


def _as_arrays(samples) -> Tuple[np.ndarray, np.ndarray]:
    samples = list(samples)
    if not samples:
        raise EmptySamples("cannot grow a tree without samples")
    X = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    if X.ndim != 2:
        X = X.reshape(len(samples), -1)
    return X, y


def train_tree(samples, params: ForestParams, tree_seed: int) -> DecisionTree:
    """Grow one tree on all ``(values, label)`` samples (no resampling)."""
    X, y = _as_arrays(samples)
    params = params.resolve(X.shape[1])
    rng = np.random.default_rng(tree_seed & U64)
    builder = _Builder(X, y, params, rng)
    builder.grow(np.arange(len(y)))
    return builder.tree()


@dataclass
class Forest:
    params: ForestParams
    trees: List[DecisionTree]
    feature_names: Tuple[str, ...]
    oob_error: Optional[float] = None

    def predict_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, len(self.feature_names))
        total = np.zeros(len(X))
        for t in self.trees:
            total += t.predict(X)
        return np.clip(total / len(self.trees), 0.0, 1.0)

    def feature_importance(self) -> Dict[str, float]:
        return feature_importance(self)


def _fit_one(X, y, params: ForestParams, index: int):
    rng = np.random.default_rng(mix(params.seed, index))
    if params.bootstrap:
        idx = rng.integers(0, len(y), size=len(y))
    else:
        idx = np.arange(len(y))
    builder = _Builder(X, y, params, rng)
    builder.grow(idx)
    return builder.tree(), idx


def train_forest(ds, params: ForestParams = ForestParams(), n_jobs: int = 1) -> Forest:
    """Train ``params.n_trees`` trees on bootstrap resamples of ``ds``.

    ``ds`` is a :class:`~stylopair.dataset.PairDataset`. Output is identical
    for any ``n_jobs``.
    """
    if len(ds) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    X = ds.matrix()
    y = ds.labels()
    params = params.resolve(X.shape[1])
    low = [n for n, v in zip(ds.feature_names, X.var(axis=0)) if v < LOW_VARIANCE]
    if low and len(y) > 1:
        log.warning("training on low-variance features (variance filter not applied?): %s", ", ".join(low))
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            fitted = list(pool.map(lambda i: _fit_one(X, y, params, i), range(params.n_trees)))
    else:
        fitted = [_fit_one(X, y, params, i) for i in range(params.n_trees)]
    trees = [t for t, _ in fitted]
    oob = None
    if params.bootstrap:
        score_sum = np.zeros(len(y))
        votes = np.zeros(len(y))
        for tree, idx in fitted:
            out = np.ones(len(y), dtype=bool)
            out[idx] = False
            if out.any():
                score_sum[out] += tree.predict(X[out])
                votes[out] += 1
        seen = votes > 0
        if seen.any():
            pred = (score_sum[seen] / votes[seen]) >= 0.5
            oob = float(np.mean(pred != (y[seen] >= 0.5)))
    return Forest(params, trees, tuple(ds.feature_names), oob)


def predict(forest: Forest, record) -> float:
    """Mean leaf value over all trees for one similarity record."""
    if tuple(record.feature_names) != tuple(forest.feature_names):
        raise SchemaMismatch("record features do not match the model's features")
    return float(forest.predict_matrix([record.values])[0])


def classify(score: float, threshold: float = 0.5) -> int:
    return int(score >= threshold)


def feature_importance(forest: Forest) -> Dict[str, float]:
    """Total squared-error reduction per feature, normalized to sum to 1."""
    totals = np.zeros(len(forest.feature_names))
    for t in forest.trees:
        splits = t.feature >= 0
        np.add.at(totals, t.feature[splits], t.gain[splits])
    grand = math.fsum(totals)
    if grand <= 0:
        return {name: 0.0 for name in forest.feature_names}
    return {name: float(v / grand) for name, v in zip(forest.feature_names, totals)}


# --- model file ---------------------------------------------------------------

def dumps_model(forest: Forest) -> str:
    p = forest.params
    oob = "none" if forest.oob_error is None else repr(forest.oob_error)
    lines = [
        f"{MAGIC} {FORMAT_VERSION}",
        f"params n_trees={p.n_trees} max_depth={p.max_depth} min_samples_leaf={p.min_samples_leaf} "
        f"mtry={'none' if p.mtry is None else p.mtry} bootstrap={int(p.bootstrap)} seed={p.seed} oob_error={oob}",
        "features " + ",".join(forest.feature_names),
    ]
    for i, t in enumerate(forest.trees):
        lines.append(f"tree {i} {t.n_nodes}")
        for node in range(t.n_nodes):
            if t.feature[node] < 0:
                lines.append(f"{node} L {float(t.value[node])!r}")
            else:
                lines.append(f"{node} S {int(t.feature[node])} {float(t.threshold[node])!r} "
                             f"{int(t.left[node])} {int(t.right[node])} {float(t.gain[node])!r}")
    return "\n".join(lines) + "\n"


def save_model(forest: Forest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(forest))


def _check_tree(tree: DecisionTree, n_features: int, line: int) -> None:
    n = tree.n_nodes
    referenced = np.zeros(n, dtype=int)
    for node in range(n):
        if tree.feature[node] >= 0:
            if tree.feature[node] >= n_features:
                raise FormatError(f"feature index {tree.feature[node]} out of range", line)
            for child in (tree.left[node], tree.right[node]):
                if not 0 < child < n:
                    raise FormatError(f"child id {child} out of range", line)
                referenced[child] += 1
    if n and (referenced[0] != 0 or np.any(referenced[1:] != 1)):
        raise FormatError("nodes do not form a tree rooted at node 0", line)


def loads_model(text: str) -> Forest:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty model file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC:
        raise VersionError(f"not a {MAGIC} file (line 1: {lines[0][:40]!r})")
    if head[1] != str(FORMAT_VERSION):
        raise VersionError(f"unsupported model version {head[1]!r}")

    def need(i, prefix):
        if i >= len(lines):
            raise FormatError(f"unexpected end of file, expected '{prefix}'", i + 1)
        if not lines[i].startswith(prefix):
            raise FormatError(f"expected '{prefix}'", i + 1)
        return lines[i][len(prefix):]

    try:
        kv = dict(item.split("=", 1) for item in need(1, "params ").split())
        oob = None if kv.get("oob_error", "none") == "none" else float(kv["oob_error"])
        params = ForestParams(int(kv["n_trees"]), int(kv["max_depth"]), int(kv["min_samples_leaf"]),
                              None if kv["mtry"] == "none" else int(kv["mtry"]), kv["bootstrap"] == "1", int(kv["seed"]))
    except (KeyError, ValueError, InvalidParams) as exc:
        raise FormatError(f"bad params line ({exc})", 2) from None
    names = tuple(need(2, "features ").split(","))
    i = 3
    trees = []
    for t_index in range(params.n_trees):
        header = need(i, "tree ").split()
        tree_line = i + 1
        try:
            declared, n_nodes = int(header[0]), int(header[1])
        except (IndexError, ValueError):
            raise FormatError("bad tree header", tree_line) from None
        if declared != t_index or n_nodes < 1:
            raise FormatError(f"expected tree {t_index} with at least one node", tree_line)
        cols = [[-1] * n_nodes, [0.0] * n_nodes, [-1] * n_nodes, [-1] * n_nodes,
                [0.0] * n_nodes, [0.0] * n_nodes]
        for node in range(n_nodes):
            i += 1
            if i >= len(lines):
                raise FormatError(f"truncated tree {t_index}", i + 1)
            parts = lines[i].split()
            try:
                if int(parts[0]) != node:
                    raise FormatError(f"expected node {node}", i + 1)
                if parts[1] == "L" and len(parts) == 3:
                    cols[4][node] = float(parts[2])
                elif parts[1] == "S" and len(parts) in (6, 7):
                    cols[0][node] = int(parts[2])
                    cols[1][node] = float(parts[3])
                    cols[2][node] = int(parts[4])
                    cols[3][node] = int(parts[5])
                    cols[5][node] = float(parts[6]) if len(parts) == 7 else 0.0
                else:
                    raise FormatError("malformed node line", i + 1)
            except (IndexError, ValueError):
                raise FormatError("malformed node line", i + 1) from None
        tree = DecisionTree(np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=float),
                            np.array(cols[2], dtype=np.int64), np.array(cols[3], dtype=np.int64),
                            np.array(cols[4], dtype=float), np.array(cols[5], dtype=float))
        _check_tree(tree, len(names), tree_line)
        trees.append(tree)
        i += 1
    if i != len(lines):
        raise FormatError("trailing content after the last tree", i + 1)
    return Forest(params, trees, names, oob)


def load_model(path) -> Forest:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
