"""The three measurement-time regimes in the I-Q plane, and GMM behavior.

Short windows leave the resonator response transient, so the clouds of
time-averaged points overlap. Medium windows separate them cleanly. Long
windows let excited states decay mid-measurement, smearing points toward
the ground-state cloud; a two-Gaussian fit cannot follow that skew, which
is exactly where the trajectory-based classifiers pull ahead.

Run from the repository root:  python3 demos/02_iq_plane_regimes.py
"""

import pathlib

import numpy as np

import qreadout as qr
from qreadout.bench import build_trajectory_dataset, shuffle_split

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = qr.SimConfig()
SHOTS_PER_STATE = 400
datasets = {
    tm: build_trajectory_dataset(cfg, SHOTS_PER_STATE, (0, 1), tm)
    for tm in (800.0, 3200.0, 8000.0)
}

for tm, data in datasets.items():
    rng = np.random.default_rng(1)
    train, test = shuffle_split(len(data.labels), 0.75, rng)
    model = qr.gmm_fit(data.iq_points[train], 2, seed=0)
    qr.gmm_assign_labels(model, data.iq_points[train], data.labels[train])
    preds = qr.gmm_predict_batch(model, data.iq_points[test])
    report = qr.evaluate(preds, data.labels[test], 2)
    print(
        f"T_m = {tm:6.0f} ns: GMM accuracy {report.global_accuracy:.3f} "
        f"(state 0: {report.per_state[0]:.3f}, state 1: {report.per_state[1]:.3f})"
    )

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

fig, axes = plt.subplots(1, 3, figsize=(13, 4.2), sharex=False)
for ax, (tm, data) in zip(axes, datasets.items()):
    for state, color in ((0, "tab:blue"), (1, "tab:orange")):
        mask = data.labels == state
        ax.scatter(
            data.iq_points[mask, 0], data.iq_points[mask, 1],
            s=6, alpha=0.45, color=color, label=f"state {state}",
        )
    ax.set_title(f"T_m = {tm:.0f} ns")
    ax.set_xlabel("mean I")
    ax.set_aspect("equal")
axes[0].set_ylabel("mean Q")
axes[0].legend()
fig.suptitle("time-averaged readout points: transient, separated, decay-skewed")
fig.tight_layout()
fig.savefig(OUT / "02_iq_regimes.png", dpi=120)
print(f"figure written to {OUT}/02_iq_regimes.png")
