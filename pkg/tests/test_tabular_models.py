import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragate.tabular import (
    DegenerateData,
    DecisionTreeModel,
    GradientBoostingModel,
    InvalidHyperparameter,
    KNNModel,
    LogisticRegressionModel,
    MLPModel,
    ModelSpec,
    RandomForestModel,
    TabularDataset,
    VotingModel,
    grow_tree,
    logistic_loss,
    mlp_loss_and_grad,
    tree_predict,
)
from ragate.tabular.base import balanced_class_weights, check_two_classes, resolve_sample_weights
from ragate.tabular.linear import loss_and_grad
from ragate.tabular.mlp import layer_shapes, pack_params, unpack_params
from ragate.tabular.neighbors import pairwise_distances
from ragate.tabular.trees import laplace_leaf, resolve_max_features, tree_from_dict, tree_to_dict


def separable(n=80, d=4, seed=0, margin=1.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(np.int64)
    X[y == 1, 0] += margin
    X[y == 0, 0] -= margin
    return X, y


def noisy(n=120, d=5, seed=1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    logits = 1.5 * X[:, 0] - X[:, 2]
    y = (logits + rng.normal(scale=0.8, size=n) > 0).astype(np.int64)
    return X, y


class TestBaseHelpers:
    def test_dataset_validation(self):
        with pytest.raises(ValueError):
            TabularDataset(np.zeros((3, 2)), np.array([0, 1, 2]), ("a", "b"))
        with pytest.raises(ValueError):
            TabularDataset(np.array([[np.inf, 0.0]]), np.array([1]), ("a", "b"))
        with pytest.raises(ValueError):
            TabularDataset(np.zeros((2, 2)), np.array([0, 1]), ("a",))

    def test_dataset_rows(self):
        data = TabularDataset(np.arange(8.0).reshape(4, 2), np.array([0, 1, 0, 1]), ("a", "b"))
        sub = data.rows([2, 0])
        assert sub.X[0, 0] == 4.0 and sub.y.tolist() == [0, 0]

    def test_model_spec_family_checked(self):
        with pytest.raises(InvalidHyperparameter):
            ModelSpec(family="svm")

    def test_balanced_class_weights(self):
        y = np.array([0, 0, 0, 1])
        weights = balanced_class_weights(y)
        # n / (2 * count): {0: 4/6, 1: 4/2}
        assert weights[0] == pytest.approx(4 / 6)
        assert weights[1] == pytest.approx(2.0)

    def test_resolve_sample_weights(self):
        y = np.array([0, 1, 1])
        assert resolve_sample_weights(y, None).tolist() == [1.0, 1.0, 1.0]
        explicit = resolve_sample_weights(y, {0: 2.0, 1: 0.5})
        assert explicit.tolist() == [2.0, 0.5, 0.5]
        # JSON round-trips turn int keys into strings; both must work
        coerced = resolve_sample_weights(y, {"0": 2.0, "1": 0.5})
        assert coerced.tolist() == [2.0, 0.5, 0.5]
        with pytest.raises(InvalidHyperparameter):
            resolve_sample_weights(y, {0: 1.0})

    def test_check_two_classes(self):
        with pytest.raises(DegenerateData):
            check_two_classes(np.array([1, 1, 1]), "logreg")


class TestLogisticRegression:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(15, 4))
        y_pm = np.where(rng.integers(0, 2, 15) == 1, 1.0, -1.0)
        sw = rng.uniform(0.5, 2.0, size=15)
        params = rng.normal(scale=0.5, size=5)
        loss, grad = loss_and_grad(params, X, y_pm, C=0.7, sample_weight=sw)
        eps = 1e-6
        for j in range(5):
            bumped = params.copy()
            bumped[j] += eps
            up, _ = loss_and_grad(bumped, X, y_pm, 0.7, sw)
            bumped[j] -= 2 * eps
            down, _ = loss_and_grad(bumped, X, y_pm, 0.7, sw)
            numeric = (up - down) / (2 * eps)
            assert abs(numeric - grad[j]) <= 1e-4 * max(1.0, abs(numeric))

    def test_fits_separable(self):
        X, y = separable()
        model = LogisticRegressionModel(C=1.0, seed=0).fit(X, y)
        acc = np.mean((model.predict_proba(X) >= 0.5).astype(int) == y)
        assert acc >= 0.95

    def test_regularization_shrinks_weights(self):
        X, y = separable()
        big_c = LogisticRegressionModel(C=10.0, seed=0).fit(X, y)
        small_c = LogisticRegressionModel(C=0.001, seed=0).fit(X, y)
        assert np.linalg.norm(small_c.weights) < np.linalg.norm(big_c.weights)

    def test_invalid_c(self):
        with pytest.raises(InvalidHyperparameter):
            LogisticRegressionModel(C=0.0)

    def test_invalid_solver(self):
        with pytest.raises(InvalidHyperparameter):
            LogisticRegressionModel(solver="newton")

    def test_both_solver_names_accepted(self):
        X, y = separable(n=40)
        a = LogisticRegressionModel(solver="lbfgs", seed=0).fit(X, y)
        b = LogisticRegressionModel(solver="liblinear", seed=0).fit(X, y)
        assert np.allclose(a.weights, b.weights)

    def test_balanced_class_weight_moves_boundary(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(100, 2))
        y = np.zeros(100, dtype=np.int64)
        y[:10] = 1
        X[y == 1] += 1.0
        plain = LogisticRegressionModel(class_weight=None, seed=0).fit(X, y)
        balanced = LogisticRegressionModel(class_weight="balanced", seed=0).fit(X, y)
        # upweighting the minority class raises its predicted probability
        assert balanced.predict_proba(X[y == 1]).mean() > plain.predict_proba(X[y == 1]).mean()

    def test_round_trip(self):
        X, y = separable(n=30)
        model = LogisticRegressionModel(C=0.5, seed=3).fit(X, y)
        clone = LogisticRegressionModel.from_dict(model.to_dict())
        assert np.array_equal(clone.predict_proba(X), model.predict_proba(X))


def knn_reference(train_X, train_y, X, k, metric, weights):
    """Brute-force kNN independent of the library implementation."""
    out = np.empty(X.shape[0])
    for i, x in enumerate(X):
        if metric == "euclidean":
            d = np.sqrt(((train_X - x) ** 2).sum(axis=1))
        else:
            d = np.abs(train_X - x).sum(axis=1)
        order = np.argsort(d, kind="stable")[:k]
        if weights == "uniform":
            out[i] = train_y[order].mean()
        else:
            dk = d[order]
            if np.any(dk == 0.0):
                coincident = order[dk == 0.0]
                out[i] = train_y[coincident].mean()
            else:
                w = 1.0 / dk
                out[i] = (w * train_y[order]).sum() / w.sum()
    return out


class TestKNN:
    @pytest.mark.parametrize("metric", ["euclidean", "manhattan"])
    @pytest.mark.parametrize("weights", ["uniform", "distance"])
    def test_matches_brute_force(self, metric, weights):
        rng = np.random.default_rng(11)
        train_X = rng.normal(size=(60, 5))
        train_y = rng.integers(0, 2, 60).astype(np.int64)
        X = rng.normal(size=(25, 5))
        model = KNNModel(n_neighbors=7, metric=metric, weights=weights, seed=0).fit(train_X, train_y)
        expected = knn_reference(train_X, train_y, X, 7, metric, weights)
        assert np.allclose(model.predict_proba(X), expected, atol=1e-12)

    def test_zero_distance_rule(self):
        train_X = np.array([[0.0], [0.0], [5.0]])
        train_y = np.array([1, 0, 1])
        model = KNNModel(n_neighbors=3, weights="distance", seed=0).fit(train_X, train_y)
        # query coincides with two points (labels 1 and 0): only they count
        assert model.predict_proba(np.array([[0.0]]))[0] == pytest.approx(0.5)

    def test_distance_ties_broken_by_train_index(self):
        train_X = np.array([[1.0], [-1.0], [1.0]])
        train_y = np.array([1, 0, 0])
        model = KNNModel(n_neighbors=1, weights="uniform", seed=0).fit(train_X, train_y)
        # both +1 and -1 are at distance 1 from 0; index 0 wins the tie
        assert model.predict_proba(np.array([[0.0]]))[0] == 1.0

    def test_k_larger_than_train_rejected(self):
        with pytest.raises(InvalidHyperparameter):
            KNNModel(n_neighbors=5, seed=0).fit(np.zeros((3, 1)), np.array([0, 1, 0]))

    def test_single_class_data_allowed(self):
        model = KNNModel(n_neighbors=2, seed=0).fit(np.arange(4.0).reshape(4, 1), np.ones(4, dtype=np.int64))
        assert model.predict_proba(np.array([[2.0]]))[0] == 1.0

    def test_algorithm_names_cosmetic(self):
        X, y = separable(n=30)
        probs = [
            KNNModel(n_neighbors=3, algorithm=algo, seed=0).fit(X, y).predict_proba(X[:5])
            for algo in ("auto", "ball_tree", "kd_tree", "brute")
        ]
        for p in probs[1:]:
            assert np.array_equal(p, probs[0])

    def test_pairwise_distances_oracle(self):
        A = np.array([[0.0, 0.0], [1.0, 1.0]])
        B = np.array([[3.0, 4.0]])
        assert pairwise_distances(A, B, "euclidean")[0, 0] == pytest.approx(5.0)
        assert pairwise_distances(A, B, "manhattan")[1, 0] == pytest.approx(5.0)


class TestDecisionTree:
    def test_resolve_max_features(self):
        assert resolve_max_features(None, 10) == 10
        assert resolve_max_features("sqrt", 10) == 3
        assert resolve_max_features("log2", 10) == 3
        assert resolve_max_features(0.2, 10) == 2
        assert resolve_max_features(0.05, 10) == 1  # floors at 1
        assert resolve_max_features(4, 10) == 4
        with pytest.raises(InvalidHyperparameter):
            resolve_max_features(0.0, 10)
        with pytest.raises(InvalidHyperparameter):
            resolve_max_features(True, 10)
        with pytest.raises(InvalidHyperparameter):
            resolve_max_features("auto", 10)

    def test_perfect_split_found(self):
        X = np.array([[1.0], [2.0], [10.0], [11.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        tree = grow_tree(X, y, criterion="gini")
        assert tree.feature == 0
        assert tree.threshold == pytest.approx(6.0)  # midpoint of 2 and 10

    def test_zero_training_error_on_consistent_data(self):
        X, y = noisy(n=150)
        model = DecisionTreeModel(max_depth=None, seed=0).fit(X, y)
        predictions = (model.predict_proba(X) >= 0.5).astype(int)
        assert np.array_equal(predictions, y)

    def test_entropy_criterion_also_fits(self):
        X, y = noisy(n=100)
        model = DecisionTreeModel(max_depth=None, criterion="entropy", seed=0).fit(X, y)
        assert np.array_equal((model.predict_proba(X) >= 0.5).astype(int), y)

    def test_max_depth_limits_tree(self):
        X, y = noisy(n=200)
        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))
        model = DecisionTreeModel(max_depth=3, seed=0).fit(X, y)
        assert depth(model.tree) <= 3

    def test_laplace_leaf_values(self):
        # weighted positives 2, total 4 -> (2+1)/(4+2)
        targets = np.array([1.0, 1.0, 0.0, 0.0])
        leaf = laplace_leaf(targets, np.ones(4))
        assert leaf(np.arange(4)) == pytest.approx(0.5)
        assert leaf(np.array([0])) == pytest.approx(2 / 3)
        assert leaf(np.array([3])) == pytest.approx(1 / 3)
        weighted = laplace_leaf(targets, np.array([3.0, 1.0, 1.0, 1.0]))
        # w_pos 4, w_total 6 -> 5/8
        assert weighted(np.arange(4)) == pytest.approx(5 / 8)

    def test_leaf_probabilities_never_hit_0_or_1(self):
        X, y = noisy(n=80)
        proba = DecisionTreeModel(max_depth=None, seed=0).fit(X, y).predict_proba(X)
        assert proba.min() > 0.0
        assert proba.max() < 1.0

    def test_single_class_data_allowed(self):
        X = np.arange(10.0).reshape(5, 2)
        model = DecisionTreeModel(seed=0).fit(X, np.zeros(5, dtype=np.int64))
        assert model.predict_proba(X)[0] == pytest.approx(1 / 7)  # (0+1)/(5+2)

    def test_random_splitter_deterministic_per_seed(self):
        X, y = noisy(n=100)
        a = DecisionTreeModel(splitter="random", seed=4).fit(X, y)
        b = DecisionTreeModel(splitter="random", seed=4).fit(X, y)
        assert np.array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_tree_round_trip(self):
        X, y = noisy(n=60)
        model = DecisionTreeModel(max_depth=4, seed=0).fit(X, y)
        rebuilt = tree_from_dict(tree_to_dict(model.tree))
        assert np.array_equal(tree_predict(rebuilt, X), tree_predict(model.tree, X))

    def test_mse_criterion_regression_targets(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        targets = np.array([1.0, 1.0, 5.0, 5.0])
        tree = grow_tree(X, targets, criterion="mse")
        assert tree.threshold == pytest.approx(1.5)
        assert tree_predict(tree, np.array([[0.5]]))[0] == pytest.approx(1.0)
        assert tree_predict(tree, np.array([[9.0]]))[0] == pytest.approx(5.0)


class TestGradientBoosting:
    def test_base_score_is_log_odds(self):
        X = np.zeros((4, 1))
        X[:, 0] = [0, 1, 2, 3]
        y = np.array([1, 1, 1, 0])
        model = GradientBoostingModel(n_estimators=1, learning_rate=0.1, seed=0).fit(X, y)
        assert model.base_score == pytest.approx(math.log(3.0))

    def test_training_loss_non_increasing(self):
        X, y = noisy(n=150)
        model = GradientBoostingModel(n_estimators=40, learning_rate=0.1, max_depth=3, seed=0).fit(X, y)
        history = np.asarray(model.train_loss_history)
        assert len(history) == 41  # base + one per stage
        assert np.all(np.diff(history) <= 1e-12)

    def test_single_stage_newton_leaf(self):
        # One root-level stump on two clusters: leaf = sum(residual)/(sum(hessian)+eps)
        X = np.array([[0.0], [0.0], [10.0], [10.0]])
        y = np.array([0, 0, 1, 1])
        model = GradientBoostingModel(n_estimators=1, learning_rate=1.0, max_depth=1, seed=0).fit(X, y)
        # base p = 0.5 -> residuals ±0.5, hessians 0.25: leaf = ±(1.0 / 0.5)
        raw = model.decision_function(np.array([[0.0], [10.0]]))
        assert raw[0] == pytest.approx(-2.0, abs=1e-9)
        assert raw[1] == pytest.approx(2.0, abs=1e-9)

    def test_improves_over_stages(self):
        X, y = noisy(n=150)
        few = GradientBoostingModel(n_estimators=2, learning_rate=0.1, seed=0).fit(X, y)
        many = GradientBoostingModel(n_estimators=60, learning_rate=0.1, seed=0).fit(X, y)
        assert many.train_loss_history[-1] < few.train_loss_history[-1]

    def test_logistic_loss_oracle(self):
        raw = np.array([0.0, 100.0, -100.0])
        y = np.array([1, 1, 0])
        assert logistic_loss(raw, y) == pytest.approx(math.log(2.0) / 3, rel=1e-9)

    def test_deterministic(self):
        X, y = noisy(n=100)
        a = GradientBoostingModel(n_estimators=10, max_features=0.4, seed=5).fit(X, y)
        b = GradientBoostingModel(n_estimators=10, max_features=0.4, seed=5).fit(X, y)
        assert np.array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_round_trip(self):
        X, y = noisy(n=80)
        model = GradientBoostingModel(n_estimators=5, seed=0).fit(X, y)
        clone = GradientBoostingModel.from_dict(model.to_dict())
        assert np.array_equal(clone.predict_proba(X), model.predict_proba(X))


class TestRandomForest:
    def test_deterministic(self):
        X, y = noisy(n=120)
        a = RandomForestModel(n_estimators=12, seed=9).fit(X, y).predict_proba(X)
        b = RandomForestModel(n_estimators=12, seed=9).fit(X, y).predict_proba(X)
        assert np.array_equal(a, b)

    def test_no_bootstrap_full_features_gives_identical_trees(self):
        X, y = noisy(n=80)
        model = RandomForestModel(
            n_estimators=5, bootstrap=False, max_features=None, max_depth=None, seed=0
        ).fit(X, y)
        first = tree_predict(model.trees[0], X)
        for tree in model.trees[1:]:
            assert np.array_equal(tree_predict(tree, X), first)
        assert np.allclose(model.predict_proba(X), first, atol=1e-15)

    def test_probabilities_bounded(self):
        X, y = noisy(n=100)
        proba = RandomForestModel(n_estimators=15, max_depth=4, seed=1).fit(X, y).predict_proba(X)
        assert proba.min() >= 0.0 and proba.max() <= 1.0

    def test_fits_signal(self):
        X, y = separable(n=120)
        proba = RandomForestModel(n_estimators=20, seed=0).fit(X, y).predict_proba(X)
        assert np.mean((proba >= 0.5).astype(int) == y) >= 0.95

    def test_bootstrap_must_be_bool(self):
        with pytest.raises(InvalidHyperparameter):
            RandomForestModel(bootstrap="yes")

    def test_round_trip_preserves_class_weight(self):
        X, y = noisy(n=60)
        model = RandomForestModel(n_estimators=4, class_weight={0: 1, 1: 2}, seed=0).fit(X, y)
        clone = RandomForestModel.from_dict(model.to_dict())
        assert np.array_equal(clone.predict_proba(X), model.predict_proba(X))


class TestMLP:
    @pytest.mark.parametrize("activation", ["relu", "tanh"])
    def test_gradient_matches_finite_differences(self, activation):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(10, 3))
        y = rng.integers(0, 2, 10).astype(np.float64)
        shapes = layer_shapes(3, (5, 4))
        flat = rng.normal(scale=0.5, size=sum(r * c for r, c in shapes) + sum(c for _, c in shapes))
        loss, grad = mlp_loss_and_grad(flat, shapes, X, y, alpha=0.01, activation=activation)
        eps = 1e-6
        rel_errors = []
        for j in rng.choice(flat.size, size=12, replace=False):
            bumped = flat.copy()
            bumped[j] += eps
            up, _ = mlp_loss_and_grad(bumped, shapes, X, y, 0.01, activation)
            bumped[j] -= 2 * eps
            down, _ = mlp_loss_and_grad(bumped, shapes, X, y, 0.01, activation)
            numeric = (up - down) / (2 * eps)
            rel_errors.append(abs(numeric - grad[j]) / max(1.0, abs(numeric)))
        assert max(rel_errors) <= 1e-4

    def test_pack_unpack_round_trip(self):
        shapes = layer_shapes(4, (3,))
        rng = np.random.default_rng(0)
        layers = [(rng.normal(size=s), rng.normal(size=s[1])) for s in shapes]
        rebuilt = unpack_params(pack_params(layers), shapes)
        for (w_in, b_in), (w_out, b_out) in zip(layers, rebuilt):
            assert np.array_equal(w_in, w_out)
            assert np.array_equal(b_in, b_out)

    def test_layer_shapes_end_in_single_output(self):
        assert layer_shapes(7, (5, 3)) == [(7, 5), (5, 3), (3, 1)]

    def test_fits_separable(self):
        # The net holds out 10% for early stopping, so give it enough rows
        # that the validation slice is informative; standardized inputs keep
        # adam in its comfortable range.
        X, y = separable(n=400, margin=2.0)
        X = (X - X.mean(axis=0)) / X.std(axis=0)
        model = MLPModel(hidden_layer_sizes=(16,), max_iter=200, seed=0).fit(X, y)
        acc = np.mean((model.predict_proba(X) >= 0.5).astype(int) == y)
        assert acc >= 0.9

    def test_deterministic(self):
        X, y = noisy(n=80)
        a = MLPModel(hidden_layer_sizes=(8,), max_iter=30, seed=3).fit(X, y).predict_proba(X)
        b = MLPModel(hidden_layer_sizes=(8,), max_iter=30, seed=3).fit(X, y).predict_proba(X)
        assert np.array_equal(a, b)

    def test_sgd_solver_runs(self):
        X, y = separable(n=80)
        model = MLPModel(hidden_layer_sizes=(8,), solver="sgd", learning_rate="adaptive", max_iter=40, seed=0)
        proba = model.fit(X, y).predict_proba(X)
        assert np.all((proba >= 0) & (proba <= 1))

    def test_hidden_layer_sizes_accepts_lists(self):
        X, y = separable(n=60)
        model = MLPModel(hidden_layer_sizes=[8, 4], max_iter=20, seed=0).fit(X, y)
        assert model.predict_proba(X).shape == (60,)

    def test_round_trip(self):
        X, y = noisy(n=60)
        model = MLPModel(hidden_layer_sizes=(6,), max_iter=25, seed=1).fit(X, y)
        clone = MLPModel.from_dict(model.to_dict())
        assert np.array_equal(clone.predict_proba(X), model.predict_proba(X))


class TestVoting:
    def test_exact_mean(self):
        class Fixed:
            def __init__(self, value):
                self.value = value

            def predict_proba(self, X):
                return np.full(X.shape[0], self.value)

        model = VotingModel(families=("a", "b"), members=(Fixed(0.2), Fixed(0.6)))
        assert np.allclose(model.predict_proba(np.zeros((3, 1))), 0.4)

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            VotingModel(families=("a",), members=(object(),))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=10, deadline=None)
    def test_mean_stays_in_range(self, seed):
        X, y = noisy(n=40, seed=seed % 1000)
        lr = LogisticRegressionModel(seed=0).fit(X, y)
        tree = DecisionTreeModel(max_depth=3, seed=0).fit(X, y)
        proba = VotingModel(families=("logreg", "dtree"), members=(lr, tree)).predict_proba(X)
        assert np.all((proba >= 0.0) & (proba <= 1.0))
