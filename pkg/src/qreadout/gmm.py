"""Gaussian mixture classifier for I-Q points.

EM with full covariances, seeded k-means initialization, and a
majority-vote mapping from mixture components to state labels so the
unsupervised fit can report classification accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError

EM_MAX_ITER = 100
EM_TOL = 1e-3  # on the mean per-point log-likelihood
COV_REG = 1e-6
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GmmModel:
    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, D)
    covariances: np.ndarray  # (K, D, D)
    labels: np.ndarray | None = None  # component -> state label
    log_likelihood_path: list[float] = field(default_factory=list)
    converged: bool = False
    n_iter: int = 0

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    peak = a.max(axis=axis, keepdims=True)
    out = peak + np.log(np.exp(a - peak).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _log_gaussian(points: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    d = points.shape[1]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise NumericError("covariance matrix is not positive definite")
    diff = points - mean
    solved = np.linalg.solve(cov, diff.T).T
    quad = np.einsum("nd,nd->n", diff, solved)
    return -0.5 * (d * _LOG_2PI + logdet + quad)


def _log_joint(model: GmmModel, points: np.ndarray) -> np.ndarray:
    """log of weight_k * N(x; mu_k, Sigma_k), shape (n, K)."""
    cols = [
        np.log(model.weights[k]) + _log_gaussian(points, model.means[k], model.covariances[k])
        for k in range(model.n_components)
    ]
    return np.stack(cols, axis=1)


def _kmeans_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded k-means++ centers refined by Lloyd iterations."""
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    for j in range(1, k):
        dist2 = np.min(
            ((points[:, None, :] - centers[None, :j, :]) ** 2).sum(axis=2), axis=1
        )
        total = dist2.sum()
        if total <= 0:
            centers[j] = points[rng.integers(n)]
            continue
        centers[j] = points[rng.choice(n, p=dist2 / total)]
    assign = None
    for _ in range(100):
        dist2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = dist2.argmin(axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            chosen = points[assign == j]
            if len(chosen):
                centers[j] = chosen.mean(axis=0)
    return assign


def _m_step(points: np.ndarray, resp: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = points.shape
    totals = resp.sum(axis=0)
    if np.any(totals < n * np.finfo(float).eps * 10):
        raise NumericError("a mixture component's responsibility collapsed")
    weights = totals / n
    means = (resp.T @ points) / totals[:, None]
    covs = np.empty((resp.shape[1], d, d))
    for k in range(resp.shape[1]):
        diff = points - means[k]
        covs[k] = (resp[:, k][:, None] * diff).T @ diff / totals[k]
        covs[k][np.diag_indices(d)] += COV_REG
    return weights, means, covs


def gmm_fit(points, k: int, seed: int) -> GmmModel:
    """Fit a K-component mixture by EM.

    Starts from hard k-means assignments, then alternates E and M steps
    until the mean log-likelihood improves by less than ``EM_TOL`` or
    ``EM_MAX_ITER`` iterations pass. Covariances get ``COV_REG`` added to
    the diagonal every M-step.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ConfigError("points must be an (n, d) array")
    if len(np.unique(points, axis=0)) < k:
        raise ConfigError(f"need at least {k} distinct points")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x6D6D)))

    assign = _kmeans_init(points, k, rng)
    hard = np.zeros((len(points), k))
    hard[np.arange(len(points)), assign] = 1.0
    weights, means, covs = _m_step(points, hard)
    model = GmmModel(weights=weights, means=means, covariances=covs)

    prev_ll = -np.inf
    for iteration in range(1, EM_MAX_ITER + 1):
        log_joint = _log_joint(model, points)
        log_norm = _logsumexp(log_joint, axis=1)
        mean_ll = float(np.mean(log_norm))
        if not np.isfinite(mean_ll):
            raise NumericError("non-finite log-likelihood during EM")
        model.log_likelihood_path.append(mean_ll)
        model.n_iter = iteration
        if mean_ll - prev_ll < EM_TOL:
            model.converged = True
            break
        prev_ll = mean_ll
        resp = np.exp(log_joint - log_norm[:, None])
        weights, means, covs = _m_step(points, resp)
        model.weights, model.means, model.covariances = weights, means, covs
    return model


def gmm_assign_labels(model: GmmModel, points, labels) -> GmmModel:
    """Map each component to the majority true label among points it wins.

    A component that wins no points inherits the majority label of the
    nearest winning component (by mean distance). Ties always resolve to
    the lower label.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if len(points) != len(labels):
        raise ConfigError("points and labels must align")
    log_joint = _log_joint(model, points)
    winners = log_joint.argmax(axis=1)

    majority: dict[int, int] = {}
    for k in range(model.n_components):
        won = labels[winners == k]
        if len(won):
            values, counts = np.unique(won, return_counts=True)
            majority[k] = int(values[counts == counts.max()].min())
    if not majority:
        raise NumericError("no component won any training point")
    component_labels = np.empty(model.n_components, dtype=np.int64)
    for k in range(model.n_components):
        if k in majority:
            component_labels[k] = majority[k]
        else:
            dist = np.linalg.norm(model.means - model.means[k], axis=1)
            order = np.argsort(dist, kind="stable")
            nearest = next(j for j in order if int(j) in majority)
            component_labels[k] = majority[int(nearest)]
    model.labels = component_labels
    return model


def _predict_components(model: GmmModel, points: np.ndarray) -> np.ndarray:
    log_joint = _log_joint(model, points)
    best = log_joint.max(axis=1, keepdims=True)
    labels = np.empty(len(points), dtype=np.int64)
    for i in range(len(points)):
        tied = np.flatnonzero(log_joint[i] == best[i])
        labels[i] = model.labels[tied].min()
    return labels


def gmm_predict(model: GmmModel, point) -> int:
    """Label of the maximum-posterior component; ties go to the lower label."""
    if model.labels is None:
        raise ConfigError("model has no component-to-label map; fit labels first")
    point = np.asarray(point, dtype=np.float64).reshape(1, -1)
    return int(_predict_components(model, point)[0])


def gmm_predict_batch(model: GmmModel, points) -> np.ndarray:
    if model.labels is None:
        raise ConfigError("model has no component-to-label map; fit labels first")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return _predict_components(model, points)
