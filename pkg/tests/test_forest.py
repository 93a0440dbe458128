import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import best_split_bruteforce
from stylopair.dataset import PairDataset
from stylopair.errors import (EmptyDataset, EmptySamples, FormatError, InvalidParams,
                              SchemaMismatch, VersionError)
from stylopair.forest import (DecisionTree, Forest, ForestParams, classify, dumps_model,
                              feature_importance, load_model, loads_model, mix, predict, save_model,
                              train_forest, train_tree)
from stylopair.pairwise import SimilarityRecord


def make_ds(X, y, names=None):
    X = np.asarray(X, dtype=float)
    names = names or tuple(f"f{k}" for k in range(X.shape[1]))
    return PairDataset(names, [SimilarityRecord(names, tuple(row), int(lab)) for row, lab in zip(X, y)])


def leaf_tree(value):
    return DecisionTree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
                        np.array([float(value)]), np.array([0.0]))


def forest_of(*trees, names=("a",)):
    return Forest(ForestParams(n_trees=len(trees)), list(trees), names)


# --- mix / params ---------------------------------------------------------------

def test_mix_matches_splitmix64_reference():
    # first output of the reference SplitMix64 generator seeded with 0
    assert mix(0, 0) == 0xE220A8397B1DCDAF
    assert mix(5, 3) == mix(6, 0)  # defined on seed XOR index


def test_params_validation():
    with pytest.raises(InvalidParams):
        ForestParams(n_trees=0)
    with pytest.raises(InvalidParams):
        ForestParams(mtry=3).resolve(2)
    assert ForestParams().resolve(10).mtry == 4


# --- train_tree ---------------------------------------------------------------

def test_pure_node_is_single_leaf():
    t = train_tree([((0.0,), 1), ((1.0,), 1), ((2.0,), 1)], ForestParams(min_samples_leaf=1), 0)
    assert t.n_nodes == 1 and t.value[0] == 1.0


def test_separable_pair_splits_at_midpoint():
    t = train_tree([((0.0,), 0), ((1.0,), 1)], ForestParams(min_samples_leaf=1), 0)
    assert t.feature[0] == 0 and t.threshold[0] == 0.5
    assert (t.value[t.left[0]], t.value[t.right[0]]) == (0.0, 1.0)


def test_depth_limit_on_xor():
    samples = [((0.0, 0.0), 0), ((0.0, 1.0), 1), ((1.0, 0.0), 1), ((1.0, 1.0), 0)] * 3
    t = train_tree(samples, ForestParams(max_depth=1, min_samples_leaf=1, mtry=2), 0)
    assert t.depth() <= 1


def test_empty_samples():
    with pytest.raises(EmptySamples):
        train_tree([], ForestParams(), 0)


def test_min_samples_leaf_respected():
    rng = np.random.default_rng(0)
    X = rng.random((40, 3))
    y = (X[:, 0] > 0.5).astype(int)
    t = train_tree(list(zip(map(tuple, X), y)), ForestParams(min_samples_leaf=5, mtry=3), 1)
    counts = np.bincount(np.array([_leaf_of(t, x) for x in X]), minlength=t.n_nodes)
    assert all(counts[n] >= 5 for n in range(t.n_nodes) if t.feature[n] < 0)


def _leaf_of(t, x):
    node = 0
    while t.feature[node] >= 0:
        node = t.left[node] if x[t.feature[node]] <= t.threshold[node] else t.right[node]
    return node


def _oracle_tree(X, y, rows, depth, max_depth, min_leaf, nodes):
    """Greedy CART by exhaustive search; nodes appended in preorder."""
    node = len(nodes)
    mean = float(np.mean(y[rows]))
    nodes.append([-1, 0.0, -1, -1, mean])
    sse = float(np.sum((y[rows] - mean) ** 2))
    if depth >= max_depth or len(rows) < 2 * min_leaf or sse <= 1e-10 * max(1.0, sse):
        return node
    best = best_split_bruteforce(X, y, rows, range(X.shape[1]), min_leaf)
    if best is None:
        return node
    _, f, thr = best
    left = _oracle_tree(X, y, [r for r in rows if X[r, f] <= thr], depth + 1, max_depth, min_leaf, nodes)
    right = _oracle_tree(X, y, [r for r in rows if X[r, f] > thr], depth + 1, max_depth, min_leaf, nodes)
    nodes[node][:4] = [f, thr, left, right]
    return node


small = st.integers(2, 8).flatmap(lambda n: st.tuples(
    st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.integers(1, 2), st.integers(1, 2)))


@given(small)
def test_tree_matches_bruteforce_cart(case):
    rows, labels, max_depth, min_leaf = case
    X = np.array(rows, dtype=float)
    y = np.array(labels, dtype=float)
    params = ForestParams(max_depth=max_depth, min_samples_leaf=min_leaf, mtry=2, bootstrap=False)
    t = train_tree(list(zip(rows, labels)), params, 0)
    nodes = []
    _oracle_tree(X, y, list(range(len(y))), 0, max_depth, min_leaf, nodes)
    assert t.n_nodes == len(nodes)
    for k, (f, thr, left, right, value) in enumerate(nodes):
        assert t.feature[k] == f
        assert t.value[k] == pytest.approx(value)
        if f >= 0:
            assert t.threshold[k] == thr and (t.left[k], t.right[k]) == (left, right)


# --- forest ---------------------------------------------------------------

def separable(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, 3))
    y = (X[:, 1] > 0.5).astype(int)
    return make_ds(X, y)


def test_forest_deterministic_bytes():
    ds = separable()
    p = ForestParams(n_trees=15, seed=42)
    assert dumps_model(train_forest(ds, p)) == dumps_model(train_forest(ds, p))


def test_forest_thread_count_irrelevant():
    ds = separable()
    p = ForestParams(n_trees=20, seed=7)
    assert dumps_model(train_forest(ds, p, n_jobs=1)) == dumps_model(train_forest(ds, p, n_jobs=4))


def test_single_tree_without_bagging_equals_train_tree():
    ds = separable()
    p = ForestParams(n_trees=1, bootstrap=False, seed=3)
    f = train_forest(ds, p)
    samples = [(r.values, r.label) for r in ds.rows]
    assert f.trees[0] == train_tree(samples, p, mix(3, 0))
    assert f.oob_error is None


def test_separable_training_accuracy():
    X = np.arange(20, dtype=float).reshape(-1, 1)
    y = (X[:, 0] >= 10).astype(int)
    ds = make_ds(np.hstack([X, np.zeros_like(X) + (np.arange(20) % 3)[:, None]]), y)
    f = train_forest(ds, ForestParams(n_trees=25, seed=1))
    preds = [classify(s) for s in f.predict_matrix(ds.matrix())]
    assert preds == list(y)


def test_empty_dataset():
    with pytest.raises(EmptyDataset):
        train_forest(make_ds(np.zeros((0, 1)), []), ForestParams())


def test_warns_on_low_variance(caplog):
    ds = make_ds([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]], [0, 1, 1])
    with caplog.at_level(logging.WARNING):
        train_forest(ds, ForestParams(n_trees=2))
    assert "f0" in caplog.text


def test_oob_error_range():
    f = train_forest(separable(), ForestParams(n_trees=30, seed=2))
    assert 0.0 <= f.oob_error <= 1.0


# --- predict / classify ---------------------------------------------------------------

def test_predict_examples():
    rec = SimilarityRecord(("a",), (123.0,))
    assert predict(forest_of(leaf_tree(0.7)), rec) == pytest.approx(0.7)
    assert predict(forest_of(leaf_tree(1.0), leaf_tree(1.0)), rec) == 1.0
    assert predict(forest_of(leaf_tree(0.0), leaf_tree(1.0)), rec) == 0.5


def test_predict_schema_mismatch():
    with pytest.raises(SchemaMismatch):
        predict(forest_of(leaf_tree(0.5)), SimilarityRecord(("b",), (1.0,)))


def test_classify_boundary():
    assert classify(0.7, 0.5) == 1
    assert classify(0.5, 0.5) == 1
    assert classify(0.49) == 0


# --- importance ---------------------------------------------------------------

def test_importance_single_split():
    ds = make_ds([[0.0, 5.0], [1.0, 5.0], [0.0, 5.0], [1.0, 5.0]], [0, 1, 0, 1])
    f = train_forest(ds, ForestParams(n_trees=1, bootstrap=False, mtry=2, min_samples_leaf=1))
    assert feature_importance(f) == {"f0": 1.0, "f1": 0.0}


def test_importance_no_splits():
    assert feature_importance(forest_of(leaf_tree(0.3))) == {"a": 0.0}


def test_importance_symmetric_features():
    # two stumps with equal gain, one per feature
    both = Forest(ForestParams(n_trees=2), [_stump(0), _stump(1)], ("f0", "f1"))
    assert feature_importance(both) == pytest.approx({"f0": 0.5, "f1": 0.5}, abs=1e-9)


def test_importance_duplicate_columns_share_credit():
    # identical copies of one informative column; with mtry=1 each tree splits on whichever it drew
    x = np.repeat([0.0, 1.0], 10)
    ds = make_ds(np.column_stack([x, x]), x.astype(int))
    f = train_forest(ds, ForestParams(n_trees=200, mtry=1, bootstrap=False, seed=4))
    share = sum(t.feature[0] == 0 for t in f.trees) / 200
    imp = feature_importance(f)
    assert imp["f0"] == pytest.approx(share, abs=1e-9)
    assert 0.35 < share < 0.65


def _stump(feature):
    return DecisionTree(np.array([feature, -1, -1]), np.array([0.5, 0, 0]), np.array([1, -1, -1]),
                        np.array([2, -1, -1]), np.array([0.5, 0.0, 1.0]), np.array([5.0, 0, 0]))


def test_importance_sums_to_one():
    imp = feature_importance(train_forest(separable(), ForestParams(n_trees=20, seed=9)))
    assert sum(imp.values()) == pytest.approx(1.0, abs=1e-9)


# --- model file ---------------------------------------------------------------

def test_model_round_trip(tmp_path):
    f = train_forest(separable(), ForestParams(n_trees=10, seed=5))
    path = tmp_path / "m.txt"
    save_model(f, path)
    g = load_model(path)
    X = np.random.default_rng(0).random((100, 3)) * 2 - 0.5
    assert np.array_equal(f.predict_matrix(X), g.predict_matrix(X))
    assert dumps_model(g) == dumps_model(f)
    assert path.read_text().startswith("STYLOMECH-FOREST 1\n")


def test_model_unknown_version():
    text = dumps_model(forest_of(leaf_tree(0.5))).replace("STYLOMECH-FOREST 1", "STYLOMECH-FOREST 9")
    with pytest.raises(VersionError):
        loads_model(text)


def test_model_truncated():
    text = dumps_model(train_forest(separable(), ForestParams(n_trees=3)))
    lines = text.splitlines()
    with pytest.raises(FormatError) as err:
        loads_model("\n".join(lines[:-2]) + "\n")
    assert err.value.line is not None


def test_model_bad_node_line():
    text = dumps_model(forest_of(leaf_tree(0.5))).replace("0 L 0.5", "0 L zero")
    with pytest.raises(FormatError, match="line 5"):
        loads_model(text)


def test_model_reads_six_field_split_lines():
    text = "STYLOMECH-FOREST 1\nparams n_trees=1 max_depth=3 min_samples_leaf=1 mtry=1 bootstrap=0 seed=0\n" \
           "features a\ntree 0 3\n0 S 0 0.5 1 2\n1 L 0.0\n2 L 1.0\n"
    f = loads_model(text)
    assert list(f.predict_matrix([[0.2], [0.9]])) == [0.0, 1.0]


# --- invariants ---------------------------------------------------------------

def test_predictions_in_unit_interval():
    f = train_forest(separable(), ForestParams(n_trees=20, seed=11))
    X = np.random.default_rng(1).normal(0, 10, (1000, 3))
    s = f.predict_matrix(X)
    assert s.min() >= 0.0 and s.max() <= 1.0


def test_scaling_a_column_keeps_decisions():
    ds = separable(80, seed=3)
    test = np.random.default_rng(5).random((200, 3))
    scaled = ds.matrix().copy()
    scaled[:, 1] *= 1000
    test_scaled = test.copy()
    test_scaled[:, 1] *= 1000
    p = ForestParams(n_trees=25, seed=13)
    a = train_forest(ds, p)
    b = train_forest(make_ds(scaled, ds.labels()), p)
    assert [classify(s) for s in a.predict_matrix(test)] == [classify(s) for s in b.predict_matrix(test_scaled)]
