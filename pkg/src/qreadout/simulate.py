"""Synthetic dispersive-readout shot generator.

Produces raw heterodyne voltage records ``r(tau)`` for a qutrit measured
through a readout resonator. The model is deliberately phenomenological:
each qutrit state maps to a steady carrier amplitude and phase, the
resonator response relaxes exponentially toward that target (ring-up),
downward decay events re-target the relaxation mid-shot, and white
Gaussian noise is added per raw sample. This is enough to reproduce the
three regimes a classifier has to cope with: overlapping clouds while the
response is still transient, clean separated clouds at intermediate
windows, and decay-skewed distributions for long windows.

All randomness flows through ``numpy.random.Generator`` streams derived
from ``(master_seed, shot_seed)`` via ``SeedSequence``, so generation is
bit-reproducible and independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

STATES = (0, 1, 2)

TWO_PI = 2.0 * math.pi

_DEF_AMPLITUDES = {0: 1.0, 1: 1.0, 2: 1.0}
_DEF_PHASES = {0: 0.0, 1: TWO_PI / 3.0, 2: -TWO_PI / 3.0}
# Effective in-measurement decay; strong enough that long windows are
# visibly skewed (the device's idle T1 would be far larger).
_DEF_DECAY_RATES = {(1, 0): 1.0 / 18000.0, (2, 1): 1.0 / 18000.0, (2, 0): 1.0 / 36000.0}
_DEF_PREP_ERROR_PROB = {0: 0.0, 1: 0.02, 2: 0.02}
_DEF_PREP_ERROR_TARGET = {1: {0: 1.0}, 2: {0: 0.5, 1: 0.5}}


@dataclass(frozen=True)
class SimConfig:
    """Immutable simulator configuration.

    Defaults give 1 GS/s sampling with a 62.5 MHz intermediate frequency,
    so the default 16 ns slice spans exactly one carrier period and the
    whole-period demodulation requirement holds exactly.
    """

    sample_rate_hz: float = 1.0e9
    f_if_hz: float = 62.5e6
    dt_ns: float = 16.0
    amplitudes: dict[int, float] = field(default_factory=lambda: dict(_DEF_AMPLITUDES))
    phases: dict[int, float] = field(default_factory=lambda: dict(_DEF_PHASES))
    phase_start: float = 0.0
    ring_up_tau_ns: float = 400.0
    noise_sigma: float = 12.0
    decay_rates: dict[tuple[int, int], float] = field(
        default_factory=lambda: dict(_DEF_DECAY_RATES)
    )
    prep_error_prob: dict[int, float] = field(
        default_factory=lambda: dict(_DEF_PREP_ERROR_PROB)
    )
    prep_error_target: dict[int, dict[int, float]] = field(
        default_factory=lambda: {s: dict(t) for s, t in _DEF_PREP_ERROR_TARGET.items()}
    )
    master_seed: int = 20240605

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be positive")
        if self.f_if_hz <= 0:
            raise ConfigError("f_if_hz must be positive")
        if self.ring_up_tau_ns <= 0:
            raise ConfigError("ring_up_tau_ns must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.dt_ns <= 0:
            raise ConfigError("dt_ns must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        periods = self.dt_ns * self.f_if_hz * 1e-9
        if abs(periods - round(periods)) > 1e-9 or round(periods) < 1:
            raise ConfigError(
                f"slice length {self.dt_ns} ns must span a whole number of "
                f"carrier periods at {self.f_if_hz} Hz (got {periods:.6g})"
            )
        samples = self.dt_ns * self.sample_rate_hz * 1e-9
        if abs(samples - round(samples)) > 1e-9 or round(samples) < 1:
            raise ConfigError("slice length must hold a whole number of raw samples")
        for s in STATES:
            if s not in self.amplitudes or s not in self.phases:
                raise ConfigError(f"state {s} missing amplitude or phase")
        for (frm, to), rate in self.decay_rates.items():
            if rate < 0:
                raise ConfigError(f"decay rate {frm}->{to} must be non-negative")
            if to >= frm:
                raise ConfigError(f"decay {frm}->{to} must move to a lower state")
        for s, p in self.prep_error_prob.items():
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"prep_error_prob[{s}] outside [0, 1]")
            if p > 0:
                target = self.prep_error_target.get(s)
                if not target:
                    raise ConfigError(f"state {s} has prep error but no target")
                total = sum(target.values())
                if abs(total - 1.0) > 1e-9:
                    raise ConfigError(f"prep_error_target[{s}] must sum to 1")
                if any(q < 0 for q in target.values()):
                    raise ConfigError(f"prep_error_target[{s}] has negative weight")

    @property
    def delta_tau_ns(self) -> float:
        """Spacing of raw samples in nanoseconds."""
        return 1e9 / self.sample_rate_hz


@dataclass(frozen=True)
class RawShot:
    """One raw readout record plus its hidden ground truth.

    ``samples[k]`` is the voltage at the midpoint time
    ``tau_k = (k + 0.5) * duration_ns / len(samples)``; the midpoint
    convention is shared with the demodulator so whole-period sums cancel
    exactly.
    """

    samples: np.ndarray
    prepared_label: int
    actual_initial_state: int
    decay_events: tuple[tuple[float, int], ...]
    duration_ns: float

    def __post_init__(self):
        last = 0.0
        for t, _state in self.decay_events:
            if not last < t <= self.duration_ns:
                raise ConfigError("decay events must be increasing and inside the shot")
            last = t


def derive_shot_seed(state: int, index: int) -> int:
    """Stable per-shot seed from (state, index).

    Uses SeedSequence hashing so datasets can be generated shot by shot in
    any order (or in parallel) and still come out identical.
    """
    ss = np.random.SeedSequence((int(state), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def shot_rng(config: SimConfig, shot_seed: int) -> np.random.Generator:
    """Generator for one shot, derived from (master_seed, shot_seed)."""
    return np.random.default_rng(np.random.SeedSequence((config.master_seed, int(shot_seed))))


def sample_decay_path(
    config: SimConfig,
    initial_state: int,
    duration_ns: float,
    rng: np.random.Generator,
) -> list[tuple[float, int]]:
    """Sample downward jump times with competing exponential clocks.

    From the current state every allowed transition draws an exponential
    waiting time from its rate; the earliest candidate fires if it lands
    inside the remaining window, and the walk continues from the new
    state. Zero-rate transitions never fire. State 0 is absorbing (no
    upward transitions are modeled).
    """
    if initial_state not in STATES:
        raise ConfigError(f"initial_state {initial_state} not in {STATES}")
    if duration_ns <= 0:
        raise ConfigError("duration_ns must be positive")
    events: list[tuple[float, int]] = []
    state = initial_state
    t = 0.0
    while True:
        channels = [
            (to, rate)
            for (frm, to), rate in sorted(config.decay_rates.items())
            if frm == state and rate > 0
        ]
        if not channels:
            break
        waits = [(rng.exponential(1.0 / rate), to) for to, rate in channels]
        wait, to = min(waits)
        if t + wait >= duration_ns:
            break
        t += wait
        state = to
        events.append((t, state))
    return events


def _midpoint_times(n: int, delta_tau_ns: float) -> np.ndarray:
    return (np.arange(n, dtype=np.float64) + 0.5) * delta_tau_ns


def samples_for_duration(config: SimConfig, duration_ns: float) -> int:
    n = duration_ns * config.sample_rate_hz * 1e-9
    return int(round(n))


def _check_duration(config: SimConfig, duration_ns: float):
    slices = duration_ns / config.dt_ns
    if duration_ns <= 0 or abs(slices - round(slices)) > 1e-9 or round(slices) < 1:
        raise ConfigError(
            f"duration {duration_ns} ns is not a positive multiple of the "
            f"{config.dt_ns} ns slice length"
        )


def simulate_shot(
    config: SimConfig,
    prepared_state: int,
    duration_ns: float,
    shot_seed: int,
) -> RawShot:
    """Generate one raw readout record.

    The draw order inside the shot's RNG stream is fixed: preparation
    error first, then the decay path, then the noise vector, which keeps
    the output deterministic for a given (master_seed, shot_seed).
    """
    if prepared_state not in STATES:
        raise ConfigError(f"prepared_state {prepared_state} not in {STATES}")
    _check_duration(config, duration_ns)
    rng = shot_rng(config, shot_seed)

    actual = prepared_state
    p_err = config.prep_error_prob.get(prepared_state, 0.0)
    if p_err > 0 and rng.random() < p_err:
        targets = sorted(config.prep_error_target[prepared_state].items())
        choices = np.array([s for s, _ in targets], dtype=np.int64)
        probs = np.array([q for _, q in targets], dtype=np.float64)
        actual = int(rng.choice(choices, p=probs / probs.sum()))

    events = sample_decay_path(config, actual, duration_ns, rng)

    n = samples_for_duration(config, duration_ns)
    tau = _midpoint_times(n, config.delta_tau_ns)
    amp = np.empty(n, dtype=np.float64)
    phase = np.empty(n, dtype=np.float64)

    bounds = [0.0] + [t for t, _ in events] + [duration_ns]
    seg_states = [actual] + [s for _, s in events]
    a_cur = 0.0
    p_cur = config.phase_start
    tau_r = config.ring_up_tau_ns
    for (t_a, t_b), state in zip(zip(bounds[:-1], bounds[1:]), seg_states):
        a_target = config.amplitudes[state]
        p_target = config.phases[state]
        mask = (tau >= t_a) & (tau < t_b)
        relax = np.exp(-(tau[mask] - t_a) / tau_r)
        amp[mask] = a_target + (a_cur - a_target) * relax
        phase[mask] = p_target + (p_cur - p_target) * relax
        relax_end = math.exp(-(t_b - t_a) / tau_r)
        a_cur = a_target + (a_cur - a_target) * relax_end
        p_cur = p_target + (p_cur - p_target) * relax_end

    samples = amp * np.cos(TWO_PI * config.f_if_hz * tau * 1e-9 + phase)
    if config.noise_sigma > 0:
        samples = samples + rng.normal(0.0, config.noise_sigma, n)

    return RawShot(
        samples=samples,
        prepared_label=prepared_state,
        actual_initial_state=actual,
        decay_events=tuple(events),
        duration_ns=float(duration_ns),
    )


def generate_dataset(
    config: SimConfig,
    shots_per_state: int,
    states,
    duration_ns: float,
) -> list[RawShot]:
    """Generate ``shots_per_state`` shots for each listed state.

    Shot seeds come from :func:`derive_shot_seed`, so the result does not
    depend on generation order and is safe to parallelize across shots.
    """
    if shots_per_state <= 0:
        raise ConfigError("shots_per_state must be positive")
    shots = []
    for state in states:
        for index in range(shots_per_state):
            seed = derive_shot_seed(state, index)
            shots.append(simulate_shot(config, state, duration_ns, seed))
    return shots
