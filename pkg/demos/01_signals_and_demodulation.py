"""Raw readout records and the two demodulation modes.

Simulates a handful of shots for each qutrit state, demodulates the whole
record into one I/Q point, then slices it into an I(t)/Q(t) trajectory
and smooths it. Saves three figures under demos/out/.

Run from the repository root:  python3 demos/01_signals_and_demodulation.py
"""

import pathlib

import numpy as np

import qreadout as qr

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = qr.SimConfig()
TM_NS = 3200.0

print(f"sample rate {cfg.sample_rate_hz / 1e9:.1f} GS/s, "
      f"intermediate frequency {cfg.f_if_hz / 1e6:.1f} MHz, "
      f"slice length {cfg.dt_ns:.0f} ns")

# One shot per state. The record is a noisy cosine whose amplitude and
# phase ring up toward a state-dependent steady target.
shots = {state: qr.simulate_shot(cfg, state, TM_NS, shot_seed=state) for state in (0, 1, 2)}
for state, shot in shots.items():
    point = qr.full_demod(shot, cfg.f_if_hz)
    print(f"state {state}: full demodulation -> I = {point.i:+.3f}, Q = {point.q:+.3f} "
          f"(decay events: {len(shot.decay_events)})")

# Sliced demodulation keeps the time structure that the single point
# averages away; smoothing suppresses the per-slice noise.
trajectories = {
    s: qr.smooth(qr.sliced_demod(shot, cfg.f_if_hz, cfg.dt_ns), 50)
    for s, shot in shots.items()
}
print(f"trajectory length C = {len(trajectories[0])} points per quadrature")

# A flattened trajectory is the classifier input: I values then Q values.
features = qr.flatten(trajectories[1])
print(f"feature vector dimension d = {len(features.values)} (label {features.label})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping figures")
    raise SystemExit(0)

# Figure 1: a slice of the raw record for state 1.
fig, ax = plt.subplots(figsize=(9, 3))
shot = shots[1]
ax.plot(np.arange(640) * cfg.delta_tau_ns, shot.samples[:640], lw=0.6)
ax.set_xlabel("time (ns)")
ax.set_ylabel("raw voltage (arb.)")
ax.set_title("raw heterodyne record, state 1 (first 640 ns)")
fig.tight_layout()
fig.savefig(OUT / "01_raw_record.png", dpi=120)

# Figure 2: smoothed I(t) and Q(t) per state.
fig, axes = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
time_axis = np.arange(len(trajectories[0])) * cfg.dt_ns
for state, traj in trajectories.items():
    axes[0].plot(time_axis, traj.i_series, label=f"state {state}")
    axes[1].plot(time_axis, traj.q_series, label=f"state {state}")
axes[0].set_ylabel("I(t)")
axes[1].set_ylabel("Q(t)")
axes[1].set_xlabel("time (ns)")
axes[0].legend()
axes[0].set_title("sliced demodulation after Hann smoothing")
fig.tight_layout()
fig.savefig(OUT / "01_trajectories.png", dpi=120)

# Figure 3: the same trajectories drawn as paths in the I-Q plane, with
# the full-demodulation point of each shot marked.
fig, ax = plt.subplots(figsize=(5, 5))
for state, traj in trajectories.items():
    ax.plot(traj.i_series, traj.q_series, lw=0.8, alpha=0.8, label=f"state {state}")
    point = qr.full_demod(shots[state], cfg.f_if_hz)
    ax.plot(point.i, point.q, "o", ms=9, mec="black")
ax.set_xlabel("I")
ax.set_ylabel("Q")
ax.set_title("trajectories and their time averages")
ax.legend()
ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "01_iq_paths.png", dpi=120)
print(f"figures written to {OUT}/")
