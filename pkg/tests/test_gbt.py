import numpy as np
import pytest

from credo.baselines import softmax
from credo.errors import DataError
from credo.frame import numeric_frame
from credo.gbt import (
    BoostedEnsemble,
    GbtConfig,
    extract_leaf_indices,
    extract_margins,
    fit_gbt,
    predict_gbt,
)


def _frame(X, y, class_names=None):
    return numeric_frame(np.asarray(X, dtype=float), labels=np.asarray(y), class_names=class_names)


FIX_X = np.array([[0.0], [1.0], [2.0], [3.0]])
FIX_Y = np.array([0, 0, 1, 1])
FIX_CFG = GbtConfig(rounds=1, learning_rate=0.5, max_depth=1, lam=1.0, gamma=0.0, min_child_weight=0.0)


def _oracle_depth1(x, g, h, lam):
    """Enumerate every midpoint threshold and apply the gain and leaf-weight
    formulas directly; returns (threshold, left weight, right weight)."""
    order = np.argsort(x)
    xs, gs, hs = x[order], g[order], h[order]
    G, H = gs.sum(), hs.sum()
    best = None
    for k in range(len(xs) - 1):
        if xs[k] == xs[k + 1]:
            continue
        GL, HL = gs[: k + 1].sum(), hs[: k + 1].sum()
        GR, HR = G - GL, H - HL
        gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
        if best is None or gain > best[0]:
            best = (gain, 0.5 * (xs[k] + xs[k + 1]), -GL / (HL + lam), -GR / (HR + lam))
    return best


def test_depth1_fixture_matches_closed_form_oracle():
    m = fit_gbt(_frame(FIX_X, FIX_Y), FIX_CFG)
    # round 0 gradients: uniform softmax of equal log priors
    p = 0.5
    for c in range(2):
        y_ind = (FIX_Y == c).astype(float)
        g = p - y_ind
        h = np.full(4, p * (1 - p))
        gain, thr, wl, wr = _oracle_depth1(FIX_X[:, 0], g, h, lam=1.0)
        tree = m.trees[c]
        assert tree.feature[0] == 0
        assert tree.threshold[0] == pytest.approx(thr, abs=1e-12)
        assert tree.weight[tree.left[0]] == pytest.approx(wl, abs=1e-12)
        assert tree.weight[tree.right[0]] == pytest.approx(wr, abs=1e-12)
        assert tree.gain[0] == pytest.approx(gain, abs=1e-12)
    # hand values: split at 1.5, class-0 leaf weights +-2/3
    assert m.trees[0].threshold[0] == 1.5
    assert m.trees[0].weight[m.trees[0].left[0]] == pytest.approx(2 / 3, abs=1e-12)
    assert m.trees[0].weight[m.trees[0].right[0]] == pytest.approx(-2 / 3, abs=1e-12)


def test_single_class_training_collapses():
    f = _frame(np.arange(8, dtype=float)[:, None], np.zeros(8, dtype=int), class_names=("a", "b"))
    m = fit_gbt(f, GbtConfig(rounds=3, max_depth=3))
    for tree in m.trees:
        assert tree.feature.tolist() == [-1]  # bare root
    proba = predict_gbt(m, f)
    assert (proba.argmax(axis=1) == 0).all()
    assert proba[:, 0] == pytest.approx(np.ones(8), abs=1e-9)


def test_xor_clusters_perfect_training_accuracy():
    rng = np.random.default_rng(5)
    centers = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0])
    sizes = [30, 20, 30, 20]
    X = np.vstack([rng.normal(c, 0.08, size=(s, 2)) for c, s in zip(centers, sizes)])
    y = np.repeat(labels, sizes)
    f = _frame(X, y)
    m = fit_gbt(f, GbtConfig(rounds=50, learning_rate=0.3, max_depth=2))
    assert (predict_gbt(m, f).argmax(axis=1) == y).mean() == 1.0


def test_training_loss_nonincreasing_without_split_penalty():
    rng = np.random.default_rng(7)
    means = rng.normal(scale=2.0, size=(3, 4))
    X = np.vstack([rng.normal(means[c], 1.0, size=(40, 4)) for c in range(3)])
    y = np.repeat(np.arange(3), 40)
    f = _frame(X, y)
    m = fit_gbt(f, GbtConfig(rounds=25, learning_rate=0.3, max_depth=3, gamma=0.0))
    losses = []
    for r in range(m.rounds + 1):
        proba = softmax(extract_margins(m, f, n_rounds=r))
        losses.append(-np.mean(np.log(proba[np.arange(len(y)), y])))
    assert np.all(np.diff(losses) <= 1e-12)


def test_gain_recomputed_from_replayed_gradients():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    y[:2] = [0, 1]
    f = _frame(X, y)
    cfg = GbtConfig(rounds=3, learning_rate=0.4, max_depth=3, lam=1.5, gamma=0.0, min_child_weight=0.5)
    m = fit_gbt(f, cfg)
    for r in range(m.rounds):
        P = softmax(extract_margins(m, f, n_rounds=r))
        for c in range(m.n_classes):
            tree = m.trees[r * m.n_classes + c]
            g = P[:, c] - (y == c)
            h = P[:, c] * (1 - P[:, c])
            # walk every split node with its row set and redo the arithmetic
            stack = [(0, np.arange(len(X)))]
            while stack:
                i, rows = stack.pop()
                if tree.feature[i] < 0:
                    continue
                mask = X[rows, tree.feature[i]] <= tree.threshold[i]
                L, R = rows[mask], rows[~mask]
                GL, HL = g[L].sum(), h[L].sum()
                GR, HR = g[R].sum(), h[R].sum()
                want = 0.5 * (
                    GL**2 / (HL + cfg.lam)
                    + GR**2 / (HR + cfg.lam)
                    - (GL + GR) ** 2 / (HL + HR + cfg.lam)
                ) - cfg.gamma
                assert tree.gain[i] == pytest.approx(want, abs=1e-10)
                assert want > 0
                stack.append((tree.left[i], L))
                stack.append((tree.right[i], R))


def test_large_lambda_shrinks_leaf_weights():
    maxima = []
    for lam in (1.0, 10.0, 100.0, 1e6):
        cfg = GbtConfig(rounds=1, max_depth=1, lam=lam, min_child_weight=0.0)
        m = fit_gbt(_frame(FIX_X, FIX_Y), cfg)
        maxima.append(max(np.abs(t.weight[t.feature < 0]).max() for t in m.trees))
    assert all(a > b for a, b in zip(maxima, maxima[1:]))
    assert maxima[-1] < 1e-3


def test_determinism():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(50, 4))
    y = rng.integers(0, 3, 50)
    y[:3] = [0, 1, 2]
    f = _frame(X, y)
    cfg = GbtConfig(rounds=5, max_depth=3)
    a = fit_gbt(f, cfg)
    b = fit_gbt(f, cfg)
    assert np.array_equal(predict_gbt(a, X), predict_gbt(b, X))


# ----------------------------------------------------------- predictions


def _zero_round_ensemble(base):
    return BoostedEnsemble(
        n_classes=len(base), n_features=2, rounds=0, learning_rate=0.3,
        lam=1.0, gamma=0.0, min_child_weight=1.0,
        base_score=np.asarray(base, dtype=float), trees=(),
    )


def test_zero_rounds_predicts_base_softmax():
    m = _zero_round_ensemble([0.2, -0.1, 0.5])
    X = np.random.default_rng(0).normal(size=(6, 2))
    want = softmax(np.tile(m.base_score, (6, 1)))
    assert predict_gbt(m, X) == pytest.approx(want, abs=1e-15)
    assert extract_margins(m, X) == pytest.approx(np.tile(m.base_score, (6, 1)))


def test_probabilities_row_stochastic():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 4, 40)
    y[:4] = [0, 1, 2, 3]
    m = fit_gbt(_frame(X, y), GbtConfig(rounds=4, max_depth=2))
    proba = predict_gbt(m, rng.normal(size=(25, 3)))
    assert proba.shape == (25, 4)
    assert proba.sum(axis=1) == pytest.approx(np.ones(25), abs=1e-9)
    assert proba.min() >= 0.0


def test_softmax_of_margins_is_predict():
    rng = np.random.default_rng(15)
    X = rng.normal(size=(30, 2))
    y = (X[:, 0] > 0).astype(int)
    y[:2] = [0, 1]
    m = fit_gbt(_frame(X, y), GbtConfig(rounds=3, max_depth=2))
    Q = rng.normal(size=(10, 2))
    assert softmax(extract_margins(m, Q)) == pytest.approx(predict_gbt(m, Q), abs=1e-12)


def test_margins_monotone_on_fitted_class():
    f = _frame(FIX_X, FIX_Y)
    cfg = GbtConfig(rounds=20, learning_rate=0.3, max_depth=1, min_child_weight=0.0)
    m = fit_gbt(f, cfg)
    point = FIX_X[:1]  # class 0, always correctly classified
    trace = [extract_margins(m, point, n_rounds=r)[0, 0] for r in range(m.rounds + 1)]
    assert np.all(np.diff(trace) > 0)


def test_dimension_mismatch():
    m = fit_gbt(_frame(FIX_X, FIX_Y), FIX_CFG)
    with pytest.raises(DataError, match="expects 1 features"):
        predict_gbt(m, np.zeros((3, 2)))


# ---------------------------------------------------------- leaf indices


def test_leaf_indices_depth1_and_identical_rows():
    m = fit_gbt(_frame(FIX_X, FIX_Y), FIX_CFG)
    idx = extract_leaf_indices(m, FIX_X)
    assert idx.shape == (4, 2)
    assert set(np.unique(idx)) <= {0, 1}
    # split at 1.5: rows 0,1 land in the left leaf of every tree
    assert idx[0].tolist() == [0, 0]
    assert idx[1].tolist() == [0, 0]
    assert idx[2].tolist() == [1, 1]
    # identical input rows map to identical index rows
    dup = extract_leaf_indices(m, np.array([[2.5], [2.5]]))
    assert np.array_equal(dup[0], dup[1])


def test_config_validation():
    with pytest.raises(DataError):
        GbtConfig(rounds=0)
    with pytest.raises(DataError):
        GbtConfig(learning_rate=0.0)
    with pytest.raises(DataError):
        GbtConfig(learning_rate=1.5)
    with pytest.raises(DataError):
        GbtConfig(lam=-1.0)
