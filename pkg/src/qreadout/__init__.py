"""Qubit-state classification on synthetic dispersive-readout data.

The package simulates raw heterodyne readout records, demodulates them
fully (one I/Q point per shot) or per slice (an I/Q trajectory), and
benchmarks three classifiers on the result: a Gaussian mixture model on
the averaged points, a plain feed-forward network on the flattened
trajectories, and a network whose encoder is pretrained as an
autoencoder before a softmax head is fitted on its latent vectors.
"""

from .bench import (
    DEFAULT_DATASET_SIZES,
    DEFAULT_LATENT_FRACTIONS,
    ExperimentConfig,
    build_trajectory_dataset,
    compare_reports,
    generate_datasets,
    run_benchmark,
    shuffle_split,
    sweep_dataset,
    sweep_latent,
)
from .demod import (
    FeatureVector,
    IQPoint,
    Scaler,
    Trajectory,
    apply_scaler,
    fit_scaler,
    flatten,
    full_demod,
    sliced_demod,
    smooth,
    trajectory_mean,
    unflatten,
)
from .errors import (
    ChecksumError,
    ConfigError,
    DataFormatError,
    NumericError,
    TruncationError,
    VersionError,
)
from .gmm import GmmModel, gmm_assign_labels, gmm_fit, gmm_predict, gmm_predict_batch
from .metrics import EvalReport, confusion_matrix, evaluate, global_accuracy, per_state_accuracy
from .models import (
    AutoencoderSpec,
    ClassifierHeadSpec,
    FfnnModel,
    PreTraNNModel,
    decode,
    encode,
    latent_probe,
    predict,
    pretrain_autoencoder,
    train_ffnn,
    train_pretrann,
)
from .nn import (
    AdamState,
    DenseNetwork,
    EarlyStopper,
    LayerSpec,
    TrainLog,
    adam_step,
    backprop,
    cross_entropy_loss,
    forward,
    grad_check,
    mse_loss,
    train,
)
from .simulate import RawShot, SimConfig, derive_shot_seed, generate_dataset, sample_decay_path, simulate_shot

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
