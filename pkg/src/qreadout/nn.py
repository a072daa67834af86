"""From-scratch dense feed-forward network engine.

Forward pass, mean-squared-error and softmax cross-entropy losses,
analytic backpropagation, Adam updates, and an early-stopping training
loop. Everything is plain float64 numpy so gradients can be checked
against central finite differences to tight tolerances.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError

ACTIVATIONS = ("sigmoid", "tanh", "softmax", "linear")
LOSS_KINDS = ("mse", "cross_entropy")

DEFAULT_BATCH_SIZE = 32
DEFAULT_PATIENCE = 2
DEFAULT_LEARNING_RATE = 1e-3
MAX_EPOCHS = 500
# ties count as non-improvements
IMPROVEMENT_DELTA = 1e-12


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError("layer dimensions must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")


class DenseNetwork:
    """Fully connected layers; weights are (out_dim, in_dim) matrices."""

    def __init__(self, layer_specs, rng: np.random.Generator | None = None):
        specs = tuple(layer_specs)
        if not specs:
            raise ConfigError("a network needs at least one layer")
        for a, b in zip(specs[:-1], specs[1:]):
            if a.out_dim != b.in_dim:
                raise ConfigError(f"layer dims do not chain: {a.out_dim} -> {b.in_dim}")
        for spec in specs[:-1]:
            if spec.activation == "softmax":
                raise ConfigError("softmax is only allowed on the final layer")
        self.layers = specs
        if rng is None:
            self.weights = [np.zeros((s.out_dim, s.in_dim)) for s in specs]
        else:
            # Glorot-uniform weights, zero biases
            self.weights = []
            for s in specs:
                limit = np.sqrt(6.0 / (s.in_dim + s.out_dim))
                self.weights.append(rng.uniform(-limit, limit, size=(s.out_dim, s.in_dim)))
        self.biases = [np.zeros(s.out_dim) for s in specs]

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Weight and bias arrays interleaved per layer (views, not copies)."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def set_parameters(self, params):
        for own, new in zip(self.parameters(), params):
            own[...] = new

    def copy(self) -> "DenseNetwork":
        dup = DenseNetwork(self.layers)
        dup.set_parameters(self.parameters())
        return dup


def _apply_activation(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "tanh":
        return np.tanh(z)
    if kind == "sigmoid":
        # split by sign to stay overflow-free
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if kind == "softmax":
        shifted = z - z.max(axis=-1, keepdims=True)
        ez = np.exp(shifted)
        return ez / ez.sum(axis=-1, keepdims=True)
    raise ConfigError(f"unknown activation {kind!r}")


def _activation_grad(kind: str, a: np.ndarray) -> np.ndarray:
    """d(activation)/dz expressed through the activation value itself."""
    if kind == "linear":
        return np.ones_like(a)
    if kind == "tanh":
        return 1.0 - a * a
    if kind == "sigmoid":
        return a * (1.0 - a)
    raise ConfigError(f"no elementwise gradient for {kind!r}")


def forward(net: DenseNetwork, x: np.ndarray):
    """Run the network; returns (output, per-layer activations).

    Accepts a single vector or an (n, d) batch; the activations list
    starts with the input itself.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = np.atleast_2d(x)
    if a.shape[1] != net.input_dim:
        raise ConfigError(f"input dim {a.shape[1]} != network input {net.input_dim}")
    activations = [a]
    for spec, w, b in zip(net.layers, net.weights, net.biases):
        z = a @ w.T + b
        a = _apply_activation(spec.activation, z)
        activations.append(a)
    if single:
        return a[0], [layer[0] for layer in activations]
    return a, activations


def mse_loss(x: np.ndarray, x_hat: np.ndarray) -> float:
    """Mean squared error over the vector's dimensions."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ConfigError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    return float(np.mean((x - x_hat) ** 2))


PROB_FLOOR = 1e-12


def cross_entropy_loss(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Cross entropy of a one-hot target against a probability vector."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ConfigError(f"shape mismatch {y.shape} vs {y_hat.shape}")
    if np.any(y_hat <= 0) or np.any(y_hat > 1):
        raise ConfigError("predicted probabilities must lie in (0, 1]")
    if abs(float(y_hat.sum()) - 1.0) > 1e-9:
        raise ConfigError("predicted probabilities must sum to 1")
    return float(-np.sum(y * np.log(np.maximum(y_hat, PROB_FLOOR))))


def batch_loss(net: DenseNetwork, x: np.ndarray, target: np.ndarray, loss_kind: str) -> float:
    """Mean per-sample loss over a batch (the quantity backprop differentiates)."""
    out, _ = forward(net, x)
    out = np.atleast_2d(out)
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if loss_kind == "mse":
        return float(np.mean(np.mean((out - target) ** 2, axis=1)))
    if loss_kind == "cross_entropy":
        probs = np.maximum(out, PROB_FLOOR)
        return float(np.mean(-np.sum(target * np.log(probs), axis=1)))
    raise ConfigError(f"unknown loss kind {loss_kind!r}")


def backprop(net: DenseNetwork, x: np.ndarray, target: np.ndarray, loss_kind: str):
    """Exact gradients of the mean batch loss, matching ``parameters()`` layout."""
    if loss_kind not in LOSS_KINDS:
        raise ConfigError(f"unknown loss kind {loss_kind!r}")
    final_act = net.layers[-1].activation
    if loss_kind == "cross_entropy" and final_act != "softmax":
        raise ConfigError("cross_entropy requires a softmax output layer")
    if loss_kind == "mse" and final_act == "softmax":
        raise ConfigError("mse with a softmax output is not supported")

    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    n = x.shape[0]
    _, activations = forward(net, x)
    out = activations[-1]
    if target.shape != out.shape:
        raise ConfigError(f"target shape {target.shape} != output {out.shape}")

    if loss_kind == "cross_entropy":
        # softmax and cross entropy fuse to (y_hat - y)
        delta = (out - target) / n
    else:
        d = out.shape[1]
        d_out = 2.0 * (out - target) / (d * n)
        delta = d_out * _activation_grad(final_act, out)

    grads: list[np.ndarray] = [None] * (2 * len(net.layers))
    for layer_idx in range(len(net.layers) - 1, -1, -1):
        a_prev = activations[layer_idx]
        grads[2 * layer_idx] = delta.T @ a_prev
        grads[2 * layer_idx + 1] = delta.sum(axis=0)
        if layer_idx > 0:
            da = delta @ net.weights[layer_idx]
            act = net.layers[layer_idx - 1].activation
            delta = da * _activation_grad(act, activations[layer_idx])
    return grads


@dataclass
class AdamState:
    """Adam optimizer state with the standard defaults."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    lr: float = DEFAULT_LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params, lr: float = DEFAULT_LEARNING_RATE) -> "AdamState":
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            lr=lr,
        )


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / c1
        v_hat = v / c2
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params


class EarlyStopper:
    """Patience-based stopping; a tie never counts as an improvement."""

    def __init__(self, patience: int, mode: str = "min", min_delta: float = IMPROVEMENT_DELTA):
        if patience < 1:
            raise ConfigError("patience must be >= 1")
        if mode not in ("min", "max"):
            raise ConfigError("mode must be 'min' or 'max'")
        self.patience = patience
        self.mode = mode
        self.min_delta = min_delta
        self.best: float | None = None
        self.best_epoch = 0
        self.epoch = 0
        self._streak = 0

    def update(self, value: float) -> tuple[bool, bool]:
        """Record one epoch's monitor value; returns (improved, should_stop)."""
        self.epoch += 1
        if self.best is None:
            improved = True
        elif self.mode == "min":
            improved = self.best - value >= self.min_delta
        else:
            improved = value - self.best >= self.min_delta
        if improved:
            self.best = value
            self.best_epoch = self.epoch
            self._streak = 0
        else:
            self._streak += 1
        return improved, self._streak >= self.patience


@dataclass
class TrainLog:
    epoch_loss: list[float] = field(default_factory=list)
    epoch_monitor: list[float] = field(default_factory=list)
    stop_epoch: int = 0
    best_epoch: int = 0
    wall_time_s: float = 0.0


def _accuracy(net: DenseNetwork, x: np.ndarray, target: np.ndarray) -> float:
    out, _ = forward(net, x)
    return float(np.mean(np.argmax(np.atleast_2d(out), axis=1) == np.argmax(target, axis=1)))


def train(
    net: DenseNetwork,
    train_data: tuple[np.ndarray, np.ndarray],
    monitor_data: tuple[np.ndarray, np.ndarray] | None,
    loss_kind: str,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    patience: int = DEFAULT_PATIENCE,
    lr: float = DEFAULT_LEARNING_RATE,
    max_epochs: int = MAX_EPOCHS,
    rng: np.random.Generator,
    monitor_on_train: bool = False,
) -> tuple[DenseNetwork, TrainLog]:
    """Mini-batch Adam training with early stopping.

    Batches are drawn from a seeded shuffle each epoch. After every epoch
    the monitor metric is evaluated: monitor-set loss for mse training
    (lower is better) or monitor-set accuracy for cross-entropy training
    (higher is better). Training stops once the metric fails to improve
    for ``patience`` consecutive epochs, or at ``max_epochs``, and the
    parameters from the best epoch are restored.
    """
    x, target = train_data
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if len(x) == 0:
        raise ConfigError("training set is empty")
    if monitor_on_train or monitor_data is None:
        monitor_x, monitor_t = x, target
    else:
        monitor_x, monitor_t = monitor_data
        if len(monitor_x) == 0:
            raise ConfigError("monitor set is empty")

    mode = "min" if loss_kind == "mse" else "max"
    stopper = EarlyStopper(patience, mode=mode)
    adam = AdamState.for_params(net.parameters(), lr=lr)
    log = TrainLog()
    best_params = [p.copy() for p in net.parameters()]
    t0 = time.perf_counter()

    n = len(x)
    for epoch in range(1, max_epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            loss = batch_loss(net, x[idx], target[idx], loss_kind)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite training loss at epoch {epoch}, batch offset {start}"
                )
            grads = backprop(net, x[idx], target[idx], loss_kind)
            adam_step(adam, net.parameters(), grads)
            batch_losses.append(loss)
        log.epoch_loss.append(float(np.mean(batch_losses)))

        if loss_kind == "mse":
            monitor = batch_loss(net, monitor_x, monitor_t, "mse")
        else:
            monitor = _accuracy(net, monitor_x, monitor_t)
        if not np.isfinite(monitor):
            raise NumericError(f"non-finite monitor metric at epoch {epoch}")
        log.epoch_monitor.append(float(monitor))

        improved, should_stop = stopper.update(monitor)
        if improved:
            best_params = [p.copy() for p in net.parameters()]
        log.stop_epoch = epoch
        if should_stop:
            break

    net.set_parameters(best_params)
    log.best_epoch = stopper.best_epoch
    log.wall_time_s = time.perf_counter() - t0
    return net, log


def grad_check(
    net: DenseNetwork,
    batch: tuple[np.ndarray, np.ndarray],
    loss_kind: str,
    epsilon: float = 1e-5,
) -> float:
    """Worst relative deviation of backprop from central finite differences."""
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    x, target = batch
    analytic = backprop(net, x, target, loss_kind)
    worst = 0.0
    for param, grad in zip(net.parameters(), analytic):
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + epsilon
            plus = batch_loss(net, x, target, loss_kind)
            flat[k] = original - epsilon
            minus = batch_loss(net, x, target, loss_kind)
            flat[k] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            denom = max(abs(numeric), abs(gflat[k]), 1e-8)
            worst = max(worst, abs(numeric - gflat[k]) / denom)
    return worst
