"""Neural classifiers: the autoencoder-pretrained model and the plain FFNN.

The pretrained model trains in two stages. Stage one fits an autoencoder
to the scaled feature vectors and keeps its encoder half; stage two
trains a softmax head on the frozen encoder's latent vectors. The plain
FFNN uses the same head architecture directly on the full feature
vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .demod import Scaler
from .errors import ConfigError

DEFAULT_LATENT_FRACTION = 0.25
MONITOR_FRACTION = 0.15


def _ceil(x: float) -> int:
    # guard against float noise pushing an exact integer over the edge
    return int(math.ceil(x - 1e-9))


@dataclass(frozen=True)
class AutoencoderSpec:
    """Layer sizing for the autoencoder half.

    The latent width is ``ceil(input_dim * latent_fraction)`` and the two
    inner widths interpolate linearly between input and latent, which for
    the default fraction of 1/4 gives the 3/4 and 2/4 ladder.
    """

    input_dim: int
    latent_fraction: float = DEFAULT_LATENT_FRACTION

    def __post_init__(self):
        if self.input_dim < 2:
            raise ConfigError("input_dim must be >= 2")
        if not 0.0 < self.latent_fraction <= 1.0:
            raise ConfigError("latent_fraction must be in (0, 1]")

    def layer_sizes(self) -> tuple[int, int, int, int]:
        # interpolate in real arithmetic, then ceil, so the default 1/4
        # fraction lands exactly on ceil(3d/4) and ceil(d/2) for every d
        d = self.input_dim
        target = d * self.latent_fraction
        step = (d - target) / 3.0
        l1 = _ceil(d - step)
        l2 = _ceil(d - 2.0 * step)
        latent = min(d, max(1, _ceil(target)))
        return d, l1, l2, latent

    @property
    def latent_dim(self) -> int:
        return self.layer_sizes()[3]


@dataclass(frozen=True)
class ClassifierHeadSpec:
    """Two hidden layers at 2x and 1x the input width, softmax output."""

    input_dim: int
    n_classes: int

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigError("input_dim must be >= 1")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")

    def layer_sizes(self) -> tuple[int, int, int, int]:
        d = self.input_dim
        return d, 2 * d, d, self.n_classes


def build_autoencoder(spec: AutoencoderSpec, rng: np.random.Generator) -> nn.DenseNetwork:
    """Mirrored encoder/decoder stack: sigmoid on the first and last layer."""
    d, l1, l2, latent = spec.layer_sizes()
    layers = [
        nn.LayerSpec(d, l1, "sigmoid"),
        nn.LayerSpec(l1, l2, "tanh"),
        nn.LayerSpec(l2, latent, "tanh"),
        nn.LayerSpec(latent, l2, "tanh"),
        nn.LayerSpec(l2, l1, "tanh"),
        nn.LayerSpec(l1, d, "sigmoid"),
    ]
    return nn.DenseNetwork(layers, rng)


def build_head(spec: ClassifierHeadSpec, rng: np.random.Generator) -> nn.DenseNetwork:
    d, h1, h2, c = spec.layer_sizes()
    layers = [
        nn.LayerSpec(d, h1, "tanh"),
        nn.LayerSpec(h1, h2, "tanh"),
        nn.LayerSpec(h2, c, "softmax"),
    ]
    return nn.DenseNetwork(layers, rng)


def split_autoencoder(net: nn.DenseNetwork) -> tuple[nn.DenseNetwork, nn.DenseNetwork]:
    half = len(net.layers) // 2
    encoder = nn.DenseNetwork(net.layers[:half])
    decoder = nn.DenseNetwork(net.layers[half:])
    encoder.set_parameters(net.parameters()[: 2 * half])
    decoder.set_parameters(net.parameters()[2 * half :])
    return encoder, decoder


def _split_monitor(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(n)
    n_monitor = max(1, int(round(MONITOR_FRACTION * n))) if n > 1 else 0
    return order[n_monitor:], order[:n_monitor]


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence((int(seed), 0x71AE)).spawn(count)
    return [np.random.default_rng(c) for c in children]


def pretrain_autoencoder(
    features,
    spec: AutoencoderSpec,
    *,
    seed: int = 0,
    batch_size: int = nn.DEFAULT_BATCH_SIZE,
    patience: int = nn.DEFAULT_PATIENCE,
    lr: float = nn.DEFAULT_LEARNING_RATE,
    max_epochs: int = nn.MAX_EPOCHS,
    monitor_on_train: bool = False,
) -> tuple[nn.DenseNetwork, nn.DenseNetwork, nn.TrainLog]:
    """Train the reconstruction stack and return (encoder, decoder, log).

    Expects features already scaled into [0, 1] (the output layer is a
    sigmoid, so unscaled targets would be unreachable). 15% of the rows
    are held out to monitor the reconstruction loss for early stopping.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ConfigError(f"features must be (n, {spec.input_dim})")
    if x.min() < -1e-9 or x.max() > 1.0 + 1e-9:
        raise ConfigError("autoencoder features must be scaled into [0, 1]")
    rng_init, rng_split, rng_train = _streams(seed, 3)
    net = build_autoencoder(spec, rng_init)
    if monitor_on_train:
        train_idx = np.arange(len(x))
        monitor = None
    else:
        train_idx, monitor_idx = _split_monitor(len(x), rng_split)
        if len(monitor_idx) == 0:
            monitor = None
        else:
            monitor = (x[monitor_idx], x[monitor_idx])
    net, log = nn.train(
        net,
        (x[train_idx], x[train_idx]),
        monitor,
        "mse",
        batch_size=batch_size,
        patience=patience,
        lr=lr,
        max_epochs=max_epochs,
        rng=rng_train,
        monitor_on_train=monitor_on_train or monitor is None,
    )
    encoder, decoder = split_autoencoder(net)
    return encoder, decoder, log


def encode(encoder: nn.DenseNetwork, x) -> np.ndarray:
    """Latent representation; tanh output keeps every entry in (-1, 1)."""
    out, _ = nn.forward(encoder, np.asarray(x, dtype=np.float64))
    return out


def decode(decoder: nn.DenseNetwork, h) -> np.ndarray:
    """Reconstruction from a latent vector; sigmoid output lies in (0, 1)."""
    out, _ = nn.forward(decoder, np.asarray(h, dtype=np.float64))
    return out


def latent_probe(
    encoder: nn.DenseNetwork,
    decoder: nn.DenseNetwork,
    x,
    component_index: int,
    values,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Reconstructions with one latent component swept through ``values``.

    Returns the unmodified reconstruction and one reconstruction per
    probe value.
    """
    h = encode(encoder, x)
    if h.ndim != 1:
        raise ConfigError("latent_probe expects a single feature vector")
    if not 0 <= component_index < len(h):
        raise ConfigError(
            f"component index {component_index} outside latent size {len(h)}"
        )
    for v in values:
        if not -1.0 <= v <= 1.0:
            raise ConfigError("probe values must lie within [-1, 1]")
    base = decode(decoder, h)
    family = []
    for v in values:
        probed = h.copy()
        probed[component_index] = v
        family.append(decode(decoder, probed))
    return base, family


@dataclass
class PreTraNNModel:
    """Frozen encoder plus classifier head, with the scaler they expect."""

    scaler: Scaler
    encoder: nn.DenseNetwork
    head: nn.DenseNetwork
    decoder: nn.DenseNetwork | None
    classes: tuple[int, ...]
    ae_log: nn.TrainLog | None = None
    head_log: nn.TrainLog | None = None


@dataclass
class FfnnModel:
    """Single-stage classifier on the full feature vectors."""

    scaler: Scaler
    head: nn.DenseNetwork
    classes: tuple[int, ...]
    log: nn.TrainLog | None = None


def one_hot(labels, classes) -> np.ndarray:
    classes = list(classes)
    out = np.zeros((len(labels), len(classes)))
    for row, label in enumerate(labels):
        out[row, classes.index(label)] = 1.0
    return out


def train_pretrann(
    features,
    labels,
    *,
    scaler: Scaler,
    latent_fraction: float = DEFAULT_LATENT_FRACTION,
    seed: int = 0,
    batch_size: int = nn.DEFAULT_BATCH_SIZE,
    patience: int = nn.DEFAULT_PATIENCE,
    lr: float = nn.DEFAULT_LEARNING_RATE,
    max_epochs: int = nn.MAX_EPOCHS,
    fine_tune_encoder: bool = False,
) -> PreTraNNModel:
    """Two-stage training on scaled, labeled feature vectors.

    Stage one ignores the labels and pretrains the autoencoder; stage two
    caches the latent vectors of the frozen encoder and trains the head
    on them with cross entropy, monitoring held-out accuracy.
    ``fine_tune_encoder`` instead keeps updating the encoder during stage
    two (off by default).
    """
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if len(x) != len(labels):
        raise ConfigError("features and labels must align")
    classes = tuple(int(c) for c in np.unique(labels))
    spec = AutoencoderSpec(x.shape[1], latent_fraction)
    encoder, decoder, ae_log = pretrain_autoencoder(
        x,
        spec,
        seed=seed,
        batch_size=batch_size,
        patience=patience,
        lr=lr,
        max_epochs=max_epochs,
    )

    targets = one_hot(labels, classes)
    rng_init, rng_split, rng_train = _streams(seed, 3)
    head_spec = ClassifierHeadSpec(spec.latent_dim, len(classes))
    head = build_head(head_spec, rng_init)
    train_idx, monitor_idx = _split_monitor(len(x), rng_split)

    if fine_tune_encoder:
        stacked = nn.DenseNetwork(encoder.layers + head.layers)
        stacked.set_parameters(encoder.parameters() + head.parameters())
        monitor = (
            (x[monitor_idx], targets[monitor_idx]) if len(monitor_idx) else None
        )
        stacked, head_log = nn.train(
            stacked,
            (x[train_idx], targets[train_idx]),
            monitor,
            "cross_entropy",
            batch_size=batch_size,
            patience=patience,
            lr=lr,
            max_epochs=max_epochs,
            rng=rng_train,
        )
        n_enc = len(encoder.layers)
        encoder.set_parameters(stacked.parameters()[: 2 * n_enc])
        head.set_parameters(stacked.parameters()[2 * n_enc :])
    else:
        latent = encode(encoder, x)  # cached once; the encoder is frozen
        monitor = (
            (latent[monitor_idx], targets[monitor_idx]) if len(monitor_idx) else None
        )
        head, head_log = nn.train(
            head,
            (latent[train_idx], targets[train_idx]),
            monitor,
            "cross_entropy",
            batch_size=batch_size,
            patience=patience,
            lr=lr,
            max_epochs=max_epochs,
            rng=rng_train,
        )

    return PreTraNNModel(
        scaler=scaler,
        encoder=encoder,
        head=head,
        decoder=decoder,
        classes=classes,
        ae_log=ae_log,
        head_log=head_log,
    )


def train_ffnn(
    features,
    labels,
    *,
    scaler: Scaler,
    seed: int = 0,
    batch_size: int = nn.DEFAULT_BATCH_SIZE,
    patience: int = nn.DEFAULT_PATIENCE,
    lr: float = nn.DEFAULT_LEARNING_RATE,
    max_epochs: int = nn.MAX_EPOCHS,
) -> FfnnModel:
    """Supervised training of the head architecture on full feature vectors."""
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if len(x) != len(labels):
        raise ConfigError("features and labels must align")
    classes = tuple(int(c) for c in np.unique(labels))
    targets = one_hot(labels, classes)
    rng_init, rng_split, rng_train = _streams(seed, 3)
    head = build_head(ClassifierHeadSpec(x.shape[1], len(classes)), rng_init)
    train_idx, monitor_idx = _split_monitor(len(x), rng_split)
    monitor = (x[monitor_idx], targets[monitor_idx]) if len(monitor_idx) else None
    head, log = nn.train(
        head,
        (x[train_idx], targets[train_idx]),
        monitor,
        "cross_entropy",
        batch_size=batch_size,
        patience=patience,
        lr=lr,
        max_epochs=max_epochs,
        rng=rng_train,
    )
    return FfnnModel(scaler=scaler, head=head, classes=classes, log=log)


def predict(model, x) -> tuple[np.ndarray | int, np.ndarray]:
    """Classify raw (unscaled) feature vectors.

    Applies the model's scaler, runs the network(s), and returns
    (labels, probabilities). The argmax resolves ties toward the lower
    class index.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    scaled = model.scaler.transform(np.atleast_2d(x))
    if isinstance(model, PreTraNNModel):
        latent = encode(model.encoder, scaled)
        probs, _ = nn.forward(model.head, latent)
    elif isinstance(model, FfnnModel):
        probs, _ = nn.forward(model.head, scaled)
    else:
        raise ConfigError(f"cannot predict with {type(model).__name__}")
    probs = np.atleast_2d(probs)
    classes = np.asarray(model.classes)
    labels = classes[np.argmax(probs, axis=1)]
    if single:
        return int(labels[0]), probs[0]
    return labels, probs
