"""Experiment harness: dataset building, the accuracy-vs-time benchmark,
latent and dataset-size sweeps, latent probing, and report comparison.

Every (measurement time, method, repeat) cell derives its own RNG stream
from the master seed, so results are identical whatever order or thread
pool executes the cells; only the timing columns of a report vary
between runs.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gmm as gmm_mod
from . import models, qrdio
from .demod import (
    FeatureVector,
    fit_scaler,
    flatten,
    sliced_demod,
    smooth,
    trajectory_mean,
    full_demod,
)
from .errors import ConfigError
from .metrics import evaluate
from .simulate import SimConfig, generate_dataset

METHODS = ("gmm", "ffnn", "pretrann")
DEFAULT_TM_LIST = tuple(float(t) for t in range(800, 8001, 800))
DEFAULT_LATENT_FRACTIONS = (1.0, 1.0 / 1.3, 0.5, 0.25, 1.0 / 6.0, 0.125, 0.1)
DEFAULT_DATASET_SIZES = (3000, 6000, 12000, 24000, 48000, 60000)
DEFAULT_SMOOTH_WINDOW = 50
LONG_TM_THRESHOLD_NS = 2400.0

# salts separating derived seed streams
_SALT_SPLIT = 0x51
_SALT_TRAIN = 0x52
_SALT_DATA = 0x53
_SALT_SIZE = 0x54

TIMING_COLUMNS = ("train_s", "classify_single_s", "classify_batch100_s", "classify_batch10000_s")


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    tm_list_ns: tuple[float, ...] = DEFAULT_TM_LIST
    methods: tuple[str, ...] = METHODS
    repeats: int = 10
    split_fraction: float = 0.75
    shots_per_state: int = 8000
    states: tuple[int, ...] = (0, 1)
    smooth_window: int = DEFAULT_SMOOTH_WINDOW
    latent_fraction: float = models.DEFAULT_LATENT_FRACTION

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must be in (0, 1)")
        if self.shots_per_state < 1:
            raise ConfigError("shots_per_state must be >= 1")
        if len(self.states) < 2:
            raise ConfigError("need at least two states")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        for tm in self.tm_list_ns:
            ratio = tm / self.sim.dt_ns
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ConfigError(f"tm {tm} ns is not a multiple of dt {self.sim.dt_ns} ns")

    def as_mapping(self) -> dict[str, str]:
        """Flat key/value view of everything that affects results."""
        sim = self.sim
        out = {
            "sample_rate_hz": repr(sim.sample_rate_hz),
            "f_if_hz": repr(sim.f_if_hz),
            "dt_ns": repr(sim.dt_ns),
            "ring_up_tau_ns": repr(sim.ring_up_tau_ns),
            "noise_sigma": repr(sim.noise_sigma),
            "phase_start": repr(sim.phase_start),
            "master_seed": str(sim.master_seed),
            "tm_list_ns": ",".join(repr(t) for t in self.tm_list_ns),
            "methods": ",".join(self.methods),
            "repeats": str(self.repeats),
            "split_fraction": repr(self.split_fraction),
            "shots_per_state": str(self.shots_per_state),
            "states": ",".join(str(s) for s in self.states),
            "smooth_window": str(self.smooth_window),
            "latent_fraction": repr(self.latent_fraction),
        }
        for s, a in sorted(sim.amplitudes.items()):
            out[f"amp.{s}"] = repr(a)
        for s, p in sorted(sim.phases.items()):
            out[f"phase.{s}"] = repr(p)
        for (frm, to), rate in sorted(sim.decay_rates.items()):
            out[f"decay_rate.{frm}.{to}"] = repr(rate)
        for s, p in sorted(sim.prep_error_prob.items()):
            out[f"prep_error_prob.{s}"] = repr(p)
        for s, targets in sorted(sim.prep_error_target.items()):
            for t, q in sorted(targets.items()):
                out[f"prep_error_target.{s}.{t}"] = repr(q)
        return out

    def hash(self) -> str:
        return qrdio.config_hash(self.as_mapping())


def experiment_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    """Build a config from the flat key-value schema of the config file."""
    sim_defaults = SimConfig()
    amplitudes = dict(sim_defaults.amplitudes)
    phases = dict(sim_defaults.phases)
    decay_rates = dict(sim_defaults.decay_rates)
    prep_error_prob = dict(sim_defaults.prep_error_prob)
    prep_error_target = {s: dict(t) for s, t in sim_defaults.prep_error_target.items()}
    sim_kwargs: dict = {}
    exp_kwargs: dict = {}

    simple_sim = {
        "sample_rate_hz": float,
        "f_if_hz": float,
        "dt_ns": float,
        "ring_up_tau_ns": float,
        "noise_sigma": float,
        "phase_start": float,
        "master_seed": int,
    }
    simple_exp = {
        "repeats": int,
        "split_fraction": float,
        "shots_per_state": int,
        "smooth_window": int,
        "latent_fraction": float,
    }
    for key, value in mapping.items():
        try:
            if key in simple_sim:
                sim_kwargs[key] = simple_sim[key](value)
            elif key in simple_exp:
                exp_kwargs[key] = simple_exp[key](value)
            elif key == "tm_list_ns":
                exp_kwargs["tm_list_ns"] = tuple(float(v) for v in value.split(","))
            elif key == "methods":
                exp_kwargs["methods"] = tuple(v.strip() for v in value.split(","))
            elif key == "states":
                exp_kwargs["states"] = tuple(int(v) for v in value.split(","))
            elif key.startswith("amp."):
                amplitudes[int(key[4:])] = float(value)
            elif key.startswith("phase."):
                phases[int(key[6:])] = float(value)
            elif key.startswith("decay_rate."):
                frm, to = key.split(".")[1:]
                decay_rates[(int(frm), int(to))] = float(value)
            elif key.startswith("prep_error_prob."):
                prep_error_prob[int(key.split(".")[1])] = float(value)
            elif key.startswith("prep_error_target."):
                _, s, t = key.split(".")
                prep_error_target.setdefault(int(s), {})[int(t)] = float(value)
            elif key in ("out_dir", "threads"):
                pass  # runtime options, handled by the CLI
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad value for config key {key!r}: {value!r}") from exc

    sim = SimConfig(
        amplitudes=amplitudes,
        phases=phases,
        decay_rates=decay_rates,
        prep_error_prob=prep_error_prob,
        prep_error_target=prep_error_target,
        **sim_kwargs,
    )
    return ExperimentConfig(sim=sim, **exp_kwargs)


# -------------------------------------------------------- dataset pipeline


@dataclass
class TrajectoryDataset:
    """Everything one measurement time yields: features, IQ means, labels."""

    features: np.ndarray  # (n, 2C) smoothed, flattened
    labels: np.ndarray  # (n,)
    iq_points: np.ndarray  # (n, 2) time averages of the smoothed trajectories
    iq_full: np.ndarray  # (n, 2) full demodulation of the raw records
    tm_ns: float
    dt_ns: float


def build_trajectory_dataset(
    sim: SimConfig,
    shots_per_state: int,
    states,
    tm_ns: float,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
) -> TrajectoryDataset:
    """Simulate, demodulate per slice, smooth, flatten, and average."""
    shots = generate_dataset(sim, shots_per_state, states, tm_ns)
    features = []
    labels = []
    iq_points = []
    iq_full = []
    with warnings.catch_warnings():
        # short windows clamp the smoothing kernel; one warning is enough
        warnings.simplefilter("once")
        for shot in shots:
            traj = smooth(sliced_demod(shot, sim.f_if_hz, sim.dt_ns), smooth_window)
            features.append(flatten(traj).values)
            labels.append(shot.prepared_label)
            iq_points.append(trajectory_mean(traj))
            iq_full.append(full_demod(shot, sim.f_if_hz))
    return TrajectoryDataset(
        features=np.stack(features),
        labels=np.array(labels, dtype=np.int64),
        iq_points=np.array(iq_points, dtype=np.float64),
        iq_full=np.array(iq_full, dtype=np.float64),
        tm_ns=float(tm_ns),
        dt_ns=sim.dt_ns,
    )


def shuffle_split(n: int, train_fraction: float, rng: np.random.Generator):
    """Seeded permutation split; train and test are disjoint and exhaustive."""
    order = rng.permutation(n)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ConfigError("split leaves an empty train or test set")
    return order[:n_train], order[n_train:]


def _cell_seed(master_seed: int, salt: int, *parts) -> int:
    ss = np.random.SeedSequence((int(master_seed), salt, *[int(p) for p in parts]))
    return int(ss.generate_state(1, np.uint64)[0])


# ------------------------------------------------------------- benchmark


def _time_classification(predict_one, predict_batch, test_inputs) -> dict[str, float]:
    n = len(test_inputs)
    repeats_single = min(100, n)
    t0 = time.perf_counter()
    for i in range(repeats_single):
        predict_one(test_inputs[i])
    single = (time.perf_counter() - t0) / repeats_single
    timings = {"classify_single_s": single}
    for size, column in ((100, "classify_batch100_s"), (10000, "classify_batch10000_s")):
        reps = int(np.ceil(size / n))
        batch = np.tile(test_inputs, (reps, 1))[:size]
        t0 = time.perf_counter()
        predict_batch(batch)
        timings[column] = time.perf_counter() - t0
    return timings


def _run_cell(
    cfg: ExperimentConfig,
    data: TrajectoryDataset,
    method: str,
    repeat: int,
) -> dict:
    tm_int = int(round(data.tm_ns))
    master = cfg.sim.master_seed
    split_seed = _cell_seed(master, _SALT_SPLIT, tm_int, repeat)
    train_seed = _cell_seed(master, _SALT_TRAIN, tm_int, repeat, METHODS.index(method))
    split_rng = np.random.default_rng(split_seed)
    train_idx, test_idx = shuffle_split(len(data.labels), cfg.split_fraction, split_rng)
    y_train = data.labels[train_idx]
    y_test = data.labels[test_idx]
    n_states = len(cfg.states)

    t0 = time.perf_counter()
    if method == "gmm":
        points_train = data.iq_points[train_idx]
        points_test = data.iq_points[test_idx]
        model = gmm_mod.gmm_fit(points_train, n_states, seed=train_seed)
        gmm_mod.gmm_assign_labels(model, points_train, y_train)
        train_s = time.perf_counter() - t0
        preds = gmm_mod.gmm_predict_batch(model, points_test)
        timing = _time_classification(
            lambda p: gmm_mod.gmm_predict(model, p),
            lambda batch: gmm_mod.gmm_predict_batch(model, batch),
            points_test,
        )
    else:
        x_train = data.features[train_idx]
        x_test = data.features[test_idx]
        scaler = fit_scaler(x_train)
        x_train_scaled = scaler.transform(x_train)
        if method == "pretrann":
            model = models.train_pretrann(
                x_train_scaled,
                y_train,
                scaler=scaler,
                latent_fraction=cfg.latent_fraction,
                seed=train_seed,
            )
        else:
            model = models.train_ffnn(x_train_scaled, y_train, scaler=scaler, seed=train_seed)
        train_s = time.perf_counter() - t0
        preds, _ = models.predict(model, x_test)
        timing = _time_classification(
            lambda p: models.predict(model, p),
            lambda batch: models.predict(model, batch),
            x_test,
        )
    timing["train_s"] = train_s

    report = evaluate(preds, y_test, n_states, timing=timing)
    row = {
        "method": method,
        "tm_ns": repr(data.tm_ns),
        "repeat": str(repeat),
        "seed": str(split_seed),
        "config_hash": cfg.hash(),
        "n_train": str(len(train_idx)),
        "n_test": str(len(test_idx)),
        "global_accuracy": repr(report.global_accuracy),
    }
    for s in cfg.states:
        row[f"acc_state_{s}"] = repr(report.per_state[s])
    for i in range(n_states):
        for j in range(n_states):
            row[f"conf_{i}_{j}"] = repr(float(report.confusion[i, j]))
    for col in TIMING_COLUMNS:
        row[col] = repr(report.timing[col])
    return row


def benchmark_columns(cfg: ExperimentConfig) -> list[str]:
    n = len(cfg.states)
    cols = [
        "method",
        "tm_ns",
        "repeat",
        "seed",
        "config_hash",
        "n_train",
        "n_test",
        "global_accuracy",
    ]
    cols += [f"acc_state_{s}" for s in cfg.states]
    cols += [f"conf_{i}_{j}" for i in range(n) for j in range(n)]
    cols += list(TIMING_COLUMNS)
    return cols


def _dataset_for_cell(cfg: ExperimentConfig, tm: float, repeat: int, fresh_data: bool):
    sim = cfg.sim
    if fresh_data:
        derived = _cell_seed(sim.master_seed, _SALT_DATA, int(round(tm)), repeat)
        sim = dataclasses.replace(sim, master_seed=derived)
    return build_trajectory_dataset(
        sim, cfg.shots_per_state, cfg.states, tm, cfg.smooth_window
    )


def run_benchmark(
    cfg: ExperimentConfig,
    out_dir,
    *,
    fresh_data: bool = False,
    threads: int = 1,
) -> dict:
    """Run the full (tm, method, repeat) grid and write CSV + JSON reports.

    A failed cell is recorded in the report's failure list, warned about,
    and excluded from the aggregates; it is never silently averaged.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: dict[tuple, dict] = {}
    failures: list[dict] = []

    for tm in cfg.tm_list_ns:
        shared_data = None if fresh_data else _dataset_for_cell(cfg, tm, 0, False)
        cells = [(method, repeat) for method in cfg.methods for repeat in range(cfg.repeats)]

        def run_one(method_repeat, tm=tm, shared=shared_data):
            method, repeat = method_repeat
            data = shared if shared is not None else _dataset_for_cell(cfg, tm, repeat, True)
            return _run_cell(cfg, data, method, repeat)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(lambda c: _guarded(run_one, c), cells))
        else:
            outcomes = [_guarded(run_one, c) for c in cells]
        for (method, repeat), outcome in zip(cells, outcomes):
            if isinstance(outcome, Exception):
                warnings.warn(
                    f"cell (tm={tm}, method={method}, repeat={repeat}) failed: {outcome}",
                    stacklevel=2,
                )
                failures.append(
                    {"tm_ns": tm, "method": method, "repeat": repeat, "error": str(outcome)}
                )
            else:
                rows[(tm, METHODS.index(method), repeat)] = outcome

    ordered = [rows[key] for key in sorted(rows)]
    aggregates = aggregate_rows(ordered, cfg)
    report = {
        "version": 1,
        "config": cfg.as_mapping(),
        "config_hash": cfg.hash(),
        "rows": ordered,
        "aggregates": aggregates,
        "failures": failures,
    }
    qrdio.write_report_csv(out_dir / "benchmark.csv", ordered, benchmark_columns(cfg))
    qrdio.write_report_json(out_dir / "benchmark.json", report)
    return report


def _guarded(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # noqa: BLE001 - the failure policy records everything
        return exc


def aggregate_rows(rows: list[dict], cfg: ExperimentConfig) -> list[dict]:
    """Mean and standard deviation over repeats per (method, tm)."""
    aggregates = []
    for method in cfg.methods:
        for tm in cfg.tm_list_ns:
            chosen = [
                r for r in rows if r["method"] == method and float(r["tm_ns"]) == tm
            ]
            if not chosen:
                continue
            acc = np.array([float(r["global_accuracy"]) for r in chosen])
            entry = {
                "method": method,
                "tm_ns": tm,
                "n_repeats": len(chosen),
                "global_accuracy_mean": float(acc.mean()),
                "global_accuracy_std": float(acc.std(ddof=0)),
            }
            for s in cfg.states:
                vals = np.array([float(r[f"acc_state_{s}"]) for r in chosen])
                entry[f"acc_state_{s}_mean"] = float(vals.mean())
                entry[f"acc_state_{s}_std"] = float(vals.std(ddof=0))
            aggregates.append(entry)
    return aggregates


# -------------------------------------------------------------- generate


def generate_datasets(cfg: ExperimentConfig, out_dir) -> list[Path]:
    """Write QRD-RAW, QRD-TRAJ, and QRD-IQ files for every measurement time."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    base_header = {
        "f_if_hz": repr(cfg.sim.f_if_hz),
        "sample_rate_hz": repr(cfg.sim.sample_rate_hz),
        "dt_ns": repr(cfg.sim.dt_ns),
        "states": ",".join(str(s) for s in cfg.states),
        "shots_per_state": str(cfg.shots_per_state),
        "master_seed": str(cfg.sim.master_seed),
        "config_hash": cfg.hash(),
    }
    for tm in cfg.tm_list_ns:
        tm_int = int(round(tm))
        shots = generate_dataset(cfg.sim, cfg.shots_per_state, cfg.states, tm)
        header = dict(base_header, tm_ns=repr(float(tm)))
        raw_path = out_dir / f"shots_tm{tm_int}.qrdraw"
        qrdio.write_raw_dataset(raw_path, shots, header)

        features = []
        labels = []
        iq_full = []
        with warnings.catch_warnings():
            warnings.simplefilter("once")
            for shot in shots:
                traj = smooth(
                    sliced_demod(shot, cfg.sim.f_if_hz, cfg.sim.dt_ns), cfg.smooth_window
                )
                features.append(flatten(traj).values)
                labels.append(shot.prepared_label)
                iq_full.append(full_demod(shot, cfg.sim.f_if_hz))
        traj_path = out_dir / f"traj_tm{tm_int}.qrdtraj"
        qrdio.write_traj_dataset(
            traj_path,
            np.stack(features),
            labels,
            dict(header, smooth_window=str(cfg.smooth_window)),
        )
        iq_path = out_dir / f"iq_tm{tm_int}.qrdiq"
        qrdio.write_iq_dataset(iq_path, np.array(iq_full), labels, header)
        written += [raw_path, traj_path, iq_path]
    return written


# ----------------------------------------------------------------- sweeps


SWEEP_LATENT_COLUMNS = [
    "fraction",
    "latent_dim",
    "n_repeats",
    "accuracy_mean",
    "accuracy_std",
    "final_loss_mean",
    "train_s_mean",
    "seed",
    "config_hash",
]


def sweep_latent(
    cfg: ExperimentConfig,
    out_dir,
    *,
    fractions=DEFAULT_LATENT_FRACTIONS,
    tm_ns: float = 2400.0,
    repeats: int | None = None,
) -> list[dict]:
    """Accuracy / loss / time of the pretrained model vs. latent size."""
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ConfigError("latent fractions must lie in (0, 1]")
    repeats = cfg.repeats if repeats is None else repeats
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = build_trajectory_dataset(
        cfg.sim, cfg.shots_per_state, cfg.states, tm_ns, cfg.smooth_window
    )
    tm_int = int(round(tm_ns))
    master = cfg.sim.master_seed
    rows = []
    for f_idx, fraction in enumerate(fractions):
        accs, losses, times = [], [], []
        for repeat in range(repeats):
            split_seed = _cell_seed(master, _SALT_SPLIT, tm_int, repeat)
            train_seed = _cell_seed(master, _SALT_TRAIN, tm_int, repeat, f_idx, 1)
            split_rng = np.random.default_rng(split_seed)
            train_idx, test_idx = shuffle_split(
                len(data.labels), cfg.split_fraction, split_rng
            )
            scaler = fit_scaler(data.features[train_idx])
            model = models.train_pretrann(
                scaler.transform(data.features[train_idx]),
                data.labels[train_idx],
                scaler=scaler,
                latent_fraction=fraction,
                seed=train_seed,
            )
            preds, _ = models.predict(model, data.features[test_idx])
            report = evaluate(preds, data.labels[test_idx], len(cfg.states))
            accs.append(report.global_accuracy)
            losses.append(model.ae_log.epoch_loss[-1])
            times.append(model.ae_log.wall_time_s + model.head_log.wall_time_s)
        spec = models.AutoencoderSpec(data.features.shape[1], fraction)
        rows.append(
            {
                "fraction": repr(float(fraction)),
                "latent_dim": str(spec.latent_dim),
                "n_repeats": str(repeats),
                "accuracy_mean": repr(float(np.mean(accs))),
                "accuracy_std": repr(float(np.std(accs))),
                "final_loss_mean": repr(float(np.mean(losses))),
                "train_s_mean": repr(float(np.mean(times))),
                "seed": str(master),
                "config_hash": cfg.hash(),
            }
        )
    qrdio.write_report_csv(out_dir / "sweep_latent.csv", rows, SWEEP_LATENT_COLUMNS)
    return rows


SWEEP_DATASET_COLUMNS = [
    "size",
    "n_repeats",
    "accuracy_mean",
    "accuracy_std",
    "final_loss_mean",
    "loss_curve_id",
    "train_s_mean",
    "seed",
    "config_hash",
]


def sweep_dataset(
    cfg: ExperimentConfig,
    out_dir,
    *,
    sizes=DEFAULT_DATASET_SIZES,
    tm_ns: float = 2400.0,
    repeats: int | None = None,
) -> list[dict]:
    """Accuracy / loss / time of the pretrained model vs. dataset size."""
    n_states = len(cfg.states)
    for size in sizes:
        if size < n_states:
            raise ConfigError(f"dataset size {size} is below the state count")
    repeats = cfg.repeats if repeats is None else repeats
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    master = cfg.sim.master_seed
    tm_int = int(round(tm_ns))
    rows = []
    curve_rows = []
    for size in sizes:
        per_state = max(1, int(round(size / n_states)))
        data_seed = _cell_seed(master, _SALT_SIZE, size)
        sim = dataclasses.replace(cfg.sim, master_seed=data_seed)
        data = build_trajectory_dataset(sim, per_state, cfg.states, tm_ns, cfg.smooth_window)
        accs, losses, times = [], [], []
        for repeat in range(repeats):
            split_seed = _cell_seed(master, _SALT_SPLIT, tm_int, size, repeat)
            train_seed = _cell_seed(master, _SALT_TRAIN, tm_int, size, repeat, 2)
            split_rng = np.random.default_rng(split_seed)
            train_idx, test_idx = shuffle_split(
                len(data.labels), cfg.split_fraction, split_rng
            )
            scaler = fit_scaler(data.features[train_idx])
            model = models.train_pretrann(
                scaler.transform(data.features[train_idx]),
                data.labels[train_idx],
                scaler=scaler,
                latent_fraction=cfg.latent_fraction,
                seed=train_seed,
            )
            preds, _ = models.predict(model, data.features[test_idx])
            report = evaluate(preds, data.labels[test_idx], n_states)
            accs.append(report.global_accuracy)
            losses.append(model.ae_log.epoch_loss[-1])
            times.append(model.ae_log.wall_time_s + model.head_log.wall_time_s)
            for epoch, loss in enumerate(model.ae_log.epoch_loss, start=1):
                curve_rows.append(
                    {
                        "size": str(size),
                        "repeat": str(repeat),
                        "epoch": str(epoch),
                        "loss": repr(float(loss)),
                    }
                )
        rows.append(
            {
                "size": str(size),
                "n_repeats": str(repeats),
                "accuracy_mean": repr(float(np.mean(accs))),
                "accuracy_std": repr(float(np.std(accs))),
                "final_loss_mean": repr(float(np.mean(losses))),
                "loss_curve_id": f"size{size}",
                "train_s_mean": repr(float(np.mean(times))),
                "seed": str(master),
                "config_hash": cfg.hash(),
            }
        )
    qrdio.write_report_csv(out_dir / "sweep_dataset.csv", rows, SWEEP_DATASET_COLUMNS)
    qrdio.write_report_csv(
        out_dir / "sweep_dataset_losses.csv", curve_rows, ["size", "repeat", "epoch", "loss"]
    )
    return rows


# ------------------------------------------------------------ latent probe


PROBE_KIND_INPUT = "input"
PROBE_KIND_RECON = "reconstruction"
PROBE_KIND_PROBE = "probe"


def latent_probe_rows(model: models.PreTraNNModel, feature_values, component: int, values):
    """Rows for the probe CSV: scaled input, base reconstruction, probe family."""
    if model.decoder is None:
        raise ConfigError("model file has no decoder; re-save with the decoder included")
    scaled = model.scaler.transform(np.asarray(feature_values, dtype=np.float64))
    base, family = models.latent_probe(model.encoder, model.decoder, scaled, component, values)
    d = len(scaled)
    half = d // 2

    def to_row(kind, probe_value, vec):
        row = {"kind": kind, "probe_value": probe_value}
        for idx in range(half):
            row[f"i_{idx}"] = repr(float(vec[idx]))
        for idx in range(half):
            row[f"q_{idx}"] = repr(float(vec[half + idx]))
        return row

    rows = [to_row(PROBE_KIND_INPUT, "", scaled), to_row(PROBE_KIND_RECON, "", base)]
    for v, recon in zip(values, family):
        rows.append(to_row(PROBE_KIND_PROBE, repr(float(v)), recon))
    return rows


def probe_columns(feature_dim: int) -> list[str]:
    half = feature_dim // 2
    return (
        ["kind", "probe_value"]
        + [f"i_{k}" for k in range(half)]
        + [f"q_{k}" for k in range(half)]
    )


def run_latent_probe(model_path, traj_path, shot_index: int, component: int, values, out_path):
    model, _ = qrdio.load_model(model_path)
    if not isinstance(model, models.PreTraNNModel):
        raise ConfigError("latent probing needs a pretrann model file")
    features, _labels, _fields = qrdio.read_traj_dataset(traj_path)
    if not 0 <= shot_index < len(features):
        raise ConfigError(f"shot index {shot_index} outside dataset of {len(features)}")
    rows = latent_probe_rows(model, features[shot_index], component, values)
    qrdio.write_report_csv(out_path, rows, probe_columns(features.shape[1]))
    return rows


# ---------------------------------------------------------------- compare


COMPARE_COLUMNS = ["kind", "method", "tm_ns", "value_a", "value_b", "diff_pp"]


def _method_curves(rows: list[dict]) -> dict[str, dict[float, float]]:
    """method -> tm -> mean global accuracy over repeats."""
    curves: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        curves.setdefault(row["method"], {}).setdefault(float(row["tm_ns"]), []).append(
            float(row["global_accuracy"])
        )
    return {
        method: {tm: float(np.mean(vals)) for tm, vals in tms.items()}
        for method, tms in curves.items()
    }


def compare_reports(path_a, path_b, out_path) -> list[dict]:
    """Percentage-point differences between two benchmark CSVs.

    Emits per-tm differences (A minus B) for every shared method, their
    means over all times and over the medium-long range, and, when both
    reports contain the pretrained model and the GMM, each report's mean
    pretrained-vs-GMM advantage plus a flag saying whether report B's
    advantage is at least report A's.
    """
    curves_a = _method_curves(qrdio.read_report_csv(path_a))
    curves_b = _method_curves(qrdio.read_report_csv(path_b))
    shared_methods = sorted(set(curves_a) & set(curves_b))
    if not shared_methods:
        raise ConfigError("reports share no methods")
    rows = []
    for method in shared_methods:
        tms_a = set(curves_a[method])
        tms_b = set(curves_b[method])
        if tms_a != tms_b:
            raise ConfigError(f"method {method!r}: reports have different tm grids")
        diffs = []
        long_diffs = []
        for tm in sorted(tms_a):
            a = curves_a[method][tm]
            b = curves_b[method][tm]
            diff = 100.0 * (a - b)
            rows.append(
                {
                    "kind": "per_tm",
                    "method": method,
                    "tm_ns": repr(tm),
                    "value_a": repr(a),
                    "value_b": repr(b),
                    "diff_pp": repr(diff),
                }
            )
            diffs.append(diff)
            if tm >= LONG_TM_THRESHOLD_NS:
                long_diffs.append(diff)
        rows.append(
            {
                "kind": "mean_all",
                "method": method,
                "tm_ns": "",
                "value_a": "",
                "value_b": "",
                "diff_pp": repr(float(np.mean(diffs))),
            }
        )
        if long_diffs:
            rows.append(
                {
                    "kind": "mean_long",
                    "method": method,
                    "tm_ns": "",
                    "value_a": "",
                    "value_b": "",
                    "diff_pp": repr(float(np.mean(long_diffs))),
                }
            )

    def advantage(curves):
        if "pretrann" in curves and "gmm" in curves:
            tms = sorted(set(curves["pretrann"]) & set(curves["gmm"]))
            return float(
                np.mean([100.0 * (curves["pretrann"][t] - curves["gmm"][t]) for t in tms])
            )
        return None

    adv_a = advantage(curves_a)
    adv_b = advantage(curves_b)
    if adv_a is not None and adv_b is not None:
        rows.append(
            {
                "kind": "pretrann_minus_gmm_mean",
                "method": "a",
                "tm_ns": "",
                "value_a": repr(adv_a),
                "value_b": "",
                "diff_pp": repr(adv_a),
            }
        )
        rows.append(
            {
                "kind": "pretrann_minus_gmm_mean",
                "method": "b",
                "tm_ns": "",
                "value_a": "",
                "value_b": repr(adv_b),
                "diff_pp": repr(adv_b),
            }
        )
        rows.append(
            {
                "kind": "advantage_flag_b_geq_a",
                "method": "pretrann-gmm",
                "tm_ns": "",
                "value_a": repr(adv_a),
                "value_b": repr(adv_b),
                "diff_pp": repr(1.0 if adv_b >= adv_a else 0.0),
            }
        )
    if out_path is not None:
        qrdio.write_report_csv(out_path, rows, COMPARE_COLUMNS)
    return rows
