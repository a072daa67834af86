import dataclasses

import numpy as np
import pytest

import qreadout as qr
from qreadout.bench import build_trajectory_dataset
from qreadout.errors import ConfigError, NumericError
from qreadout.gmm import COV_REG, GmmModel, gmm_fit


def two_clusters(rng, n=1000, sigma=0.1):
    a = rng.normal((-5.0, 0.0), sigma, size=(n, 2))
    b = rng.normal((5.0, 0.0), sigma, size=(n, 2))
    return np.concatenate([a, b]), np.array([0] * n + [1] * n)


class TestFit:
    def test_single_component_closed_form(self, rng):
        points = rng.normal(size=(200, 2))
        model = gmm_fit(points, 1, seed=0)
        np.testing.assert_allclose(model.means[0], points.mean(axis=0), atol=1e-12)
        diff = points - points.mean(axis=0)
        cov = diff.T @ diff / len(points) + COV_REG * np.eye(2)
        np.testing.assert_allclose(model.covariances[0], cov, atol=1e-12)
        assert model.weights[0] == 1.0

    def test_recovers_two_well_separated_clusters(self, rng):
        points, _ = two_clusters(rng)
        model = gmm_fit(points, 2, seed=1)
        means = model.means[np.argsort(model.means[:, 0])]
        assert abs(means[0][0] - (-5.0)) < 0.05 and abs(means[0][1]) < 0.05
        assert abs(means[1][0] - 5.0) < 0.05 and abs(means[1][1]) < 0.05
        np.testing.assert_allclose(model.weights, [0.5, 0.5], atol=0.05)

    def test_log_likelihood_is_monotone(self, rng):
        points = np.concatenate(
            [rng.normal((-1, 0), 0.8, size=(300, 2)), rng.normal((1.5, 1), 0.6, size=(300, 2))]
        )
        model = gmm_fit(points, 2, seed=2)
        diffs = np.diff(model.log_likelihood_path)
        assert np.all(diffs >= -1e-9)

    def test_needs_k_distinct_points(self):
        points = np.zeros((10, 2))
        with pytest.raises(ConfigError):
            gmm_fit(points, 2, seed=0)

    def test_deterministic_given_seed(self, rng):
        points, _ = two_clusters(rng, n=200)
        a = gmm_fit(points, 2, seed=3)
        b = gmm_fit(points, 2, seed=3)
        np.testing.assert_array_equal(a.means, b.means)
        np.testing.assert_array_equal(a.covariances, b.covariances)


class TestAssignLabels:
    def test_pure_clusters_get_their_labels(self, rng):
        points, labels = two_clusters(rng, n=300)
        model = gmm_fit(points, 2, seed=0)
        qr.gmm_assign_labels(model, points, labels)
        order = np.argsort(model.means[:, 0])
        assert model.labels[order[0]] == 0
        assert model.labels[order[1]] == 1

    def test_component_with_no_wins_inherits_nearest_majority(self):
        # component 1 sits far from every training point, so it wins none
        model = GmmModel(
            weights=np.array([0.99, 0.01]),
            means=np.array([[0.0, 0.0], [100.0, 100.0]]),
            covariances=np.stack([np.eye(2), np.eye(2)]),
        )
        points = np.random.default_rng(0).normal(size=(50, 2)) * 0.1
        labels = np.ones(50, dtype=int)
        qr.gmm_assign_labels(model, points, labels)
        assert model.labels.tolist() == [1, 1]

    def test_three_state_simulator_covers_all_labels(self):
        sim = dataclasses.replace(qr.SimConfig(), master_seed=11)
        data = build_trajectory_dataset(sim, 150, (0, 1, 2), 3200.0)
        model = gmm_fit(data.iq_points, 3, seed=4)
        qr.gmm_assign_labels(model, data.iq_points, data.labels)
        assert set(model.labels.tolist()) == {0, 1, 2}

    def test_majority_tie_goes_to_lower_label(self):
        model = GmmModel(
            weights=np.array([1.0]),
            means=np.array([[0.0, 0.0]]),
            covariances=np.eye(2)[None],
        )
        points = np.array([[0.1, 0.0], [-0.1, 0.0]])
        qr.gmm_assign_labels(model, points, np.array([2, 1]))
        assert model.labels[0] == 1


class TestPredict:
    @pytest.fixture()
    def labeled_model(self, rng):
        points, labels = two_clusters(rng)
        model = gmm_fit(points, 2, seed=5)
        return qr.gmm_assign_labels(model, points, labels)

    def test_component_mean_gets_component_label(self, labeled_model):
        for k in range(2):
            point = labeled_model.means[k]
            assert qr.gmm_predict(labeled_model, point) == labeled_model.labels[k]

    def test_translation_equivariance(self, labeled_model, rng):
        shift = np.array([3.7, -1.2])
        moved = GmmModel(
            weights=labeled_model.weights.copy(),
            means=labeled_model.means + shift,
            covariances=labeled_model.covariances.copy(),
            labels=labeled_model.labels.copy(),
        )
        for _ in range(50):
            point = rng.normal(scale=6.0, size=2)
            assert qr.gmm_predict(labeled_model, point) == qr.gmm_predict(
                moved, point + shift
            )

    def test_bayes_rate_on_fresh_points(self, labeled_model, rng):
        fresh, labels = two_clusters(rng, n=5000)
        preds = qr.gmm_predict_batch(labeled_model, fresh)
        assert np.mean(preds == labels) >= 0.999

    def test_unlabeled_model_rejected(self, rng):
        points, _ = two_clusters(rng, n=100)
        model = gmm_fit(points, 2, seed=0)
        with pytest.raises(ConfigError):
            qr.gmm_predict(model, np.zeros(2))


def test_collapsed_component_raises():
    # one far-away point cannot keep a whole component alive once EM
    # concentrates the responsibilities
    rng = np.random.default_rng(0)
    points = rng.normal(size=(400, 2))
    model = gmm_fit(points, 2, seed=1)  # fine: overlapping but populated
    assert model.n_components == 2
    with pytest.raises((NumericError, ConfigError)):
        gmm_fit(np.zeros((50, 2)), 2, seed=1)
