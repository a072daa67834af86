"""Demodulation and feature preparation.

Turns raw shots into the two representations the classifiers consume:
a single I/Q point per shot (full demodulation) and a time series of
I/Q values per slice (sliced demodulation), followed by Hann smoothing,
flattening and min-max scaling.

All integrals are midpoint Riemann sums on the raw sample grid; raw
samples already live at midpoint times, so demodulating a pure tone over
whole carrier periods is exact up to float roundoff.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .simulate import TWO_PI, RawShot


class IQPoint(NamedTuple):
    i: float
    q: float


@dataclass
class Trajectory:
    """Sliced-demodulation output: one I and one Q value per slice."""

    i_series: np.ndarray
    q_series: np.ndarray
    dt_ns: float
    label: int | None = None

    def __post_init__(self):
        if len(self.i_series) != len(self.q_series):
            raise ConfigError("i_series and q_series must have equal length")

    def __len__(self):
        return len(self.i_series)


@dataclass
class FeatureVector:
    """Flattened trajectory: I values followed by Q values."""

    values: np.ndarray
    label: int | None = None


@dataclass(frozen=True)
class Scaler:
    """Per-dimension min-max scaling fitted on the training split."""

    minimum: np.ndarray
    maximum: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Map to [0, 1]; constant dimensions go to 0.5, the rest clamp."""
        values = np.asarray(values, dtype=np.float64)
        span = self.maximum - self.minimum
        degenerate = span <= 0
        safe = np.where(degenerate, 1.0, span)
        out = (values - self.minimum) / safe
        out = np.clip(out, 0.0, 1.0)
        if degenerate.any():
            out = np.where(degenerate, 0.5, out)
        return out


@lru_cache(maxsize=16)
def _demod_grids(n: int, delta_tau_ns: float, f_if_hz: float):
    tau = (np.arange(n, dtype=np.float64) + 0.5) * delta_tau_ns
    angle = TWO_PI * f_if_hz * tau * 1e-9
    return np.cos(angle), np.sin(angle)


def _check_whole_periods(duration_ns: float, f_if_hz: float, what: str):
    periods = duration_ns * f_if_hz * 1e-9
    if abs(periods - round(periods)) > 1e-6 or round(periods) < 1:
        raise ConfigError(
            f"{what} of {duration_ns} ns spans {periods:.6g} carrier periods; "
            "demodulation requires a whole number"
        )


def full_demod(shot: RawShot, f_if_hz: float) -> IQPoint:
    """Demodulate a whole shot into one I/Q point.

    I integrates the record against cos at the intermediate frequency and
    Q against -sin, both normalized by 2/T.
    """
    _check_whole_periods(shot.duration_ns, f_if_hz, "shot duration")
    n = len(shot.samples)
    delta = shot.duration_ns / n
    cos_g, sin_g = _demod_grids(n, delta, f_if_hz)
    scale = 2.0 * delta / shot.duration_ns
    i = scale * float(np.dot(shot.samples, cos_g))
    q = -scale * float(np.dot(shot.samples, sin_g))
    if not (np.isfinite(i) and np.isfinite(q)):
        raise ConfigError("demodulation produced non-finite values")
    return IQPoint(i, q)


def sliced_demod(shot: RawShot, f_if_hz: float, dt_ns: float) -> Trajectory:
    """Demodulate per slice of length ``dt_ns``, yielding I(t) and Q(t).

    The slice integrals use absolute time, so averaging the slice values
    reproduces the full demodulation of the same record exactly.
    """
    slices = shot.duration_ns / dt_ns
    if abs(slices - round(slices)) > 1e-9 or round(slices) < 1:
        raise ConfigError(f"slice length {dt_ns} ns does not divide the shot duration")
    _check_whole_periods(dt_ns, f_if_hz, "slice length")
    c = int(round(slices))
    n = len(shot.samples)
    if n % c != 0:
        raise ConfigError("samples do not split evenly into slices")
    m = n // c
    delta = shot.duration_ns / n
    cos_g, sin_g = _demod_grids(n, delta, f_if_hz)
    scale = 2.0 * delta / dt_ns
    i_series = scale * (shot.samples * cos_g).reshape(c, m).sum(axis=1)
    q_series = -scale * (shot.samples * sin_g).reshape(c, m).sum(axis=1)
    return Trajectory(i_series=i_series, q_series=q_series, dt_ns=dt_ns, label=shot.prepared_label)


def trajectory_mean(traj: Trajectory) -> IQPoint:
    """Time average of a trajectory: the shot's single point in the I-Q plane."""
    return IQPoint(float(np.mean(traj.i_series)), float(np.mean(traj.q_series)))


def hann_kernel(window_len: int) -> np.ndarray:
    """Unit-sum Hann window (symmetric, zero-endpoint convention)."""
    if window_len < 1:
        raise ConfigError("window_len must be >= 1")
    taps = np.hanning(window_len)
    total = taps.sum()
    if total <= 0:
        # length 1 and 2 have no interior taps
        return np.array([1.0])
    return taps / total


def smooth_series(series: np.ndarray, window_len: int) -> np.ndarray:
    """Same-length Hann smoothing with reflect padding at both ends."""
    series = np.asarray(series, dtype=np.float64)
    n = len(series)
    if window_len > n:
        warnings.warn(
            f"smoothing window {window_len} exceeds series length {n}; clamping",
            stacklevel=2,
        )
        window_len = n
    kernel = hann_kernel(window_len)
    m = len(kernel)
    if m == 1:
        return series.copy()
    pad_left = (m - 1) // 2
    pad_right = m - 1 - pad_left
    padded = np.pad(series, (pad_left, pad_right), mode="reflect")
    return np.convolve(padded, kernel, mode="valid")


def smooth(traj: Trajectory, window_len: int) -> Trajectory:
    """Hann-smooth both quadratures of a trajectory."""
    return replace(
        traj,
        i_series=smooth_series(traj.i_series, window_len),
        q_series=smooth_series(traj.q_series, window_len),
    )


def flatten(traj: Trajectory) -> FeatureVector:
    """Stack I then Q into one feature vector; the label rides along."""
    return FeatureVector(
        values=np.concatenate([traj.i_series, traj.q_series]), label=traj.label
    )


def unflatten(fv: FeatureVector, dt_ns: float = 1.0) -> Trajectory:
    d = len(fv.values)
    if d % 2 != 0:
        raise ConfigError("feature vector length must be even")
    half = d // 2
    return Trajectory(
        i_series=np.asarray(fv.values[:half], dtype=np.float64),
        q_series=np.asarray(fv.values[half:], dtype=np.float64),
        dt_ns=dt_ns,
        label=fv.label,
    )


def fit_scaler(train_features) -> Scaler:
    """Fit per-dimension min/max on the training features only."""
    matrix = as_feature_matrix(train_features)
    if matrix.shape[0] == 0:
        raise ConfigError("cannot fit a scaler on an empty training set")
    return Scaler(minimum=matrix.min(axis=0), maximum=matrix.max(axis=0))


def apply_scaler(scaler: Scaler, fv: FeatureVector) -> FeatureVector:
    return FeatureVector(values=scaler.transform(fv.values), label=fv.label)


def as_feature_matrix(features) -> np.ndarray:
    """Stack FeatureVectors (or pass an array through) as an (n, d) matrix."""
    if isinstance(features, np.ndarray):
        return np.atleast_2d(np.asarray(features, dtype=np.float64))
    return np.stack([np.asarray(fv.values, dtype=np.float64) for fv in features])
