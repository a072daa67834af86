"""What the autoencoder learns: reconstructions and the latent space.

Trains the reconstruction stack on 2-state trajectories, then shows
(1) how faithfully a held-out input is regenerated, (2) how the latent
vectors differ by state, and (3) how the reconstruction morphs when one
latent component is swept by hand.

Run from the repository root:  python3 demos/04_latent_space.py
"""

import pathlib

import numpy as np

import qreadout as qr
from qreadout.bench import build_trajectory_dataset
from qreadout.demod import fit_scaler

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = qr.SimConfig()
data = build_trajectory_dataset(cfg, 600, (0, 1), 3200.0)
scaler = fit_scaler(data.features)
scaled = scaler.transform(data.features)

spec = qr.AutoencoderSpec(scaled.shape[1])
print(f"autoencoder widths: {spec.layer_sizes()} (latent {spec.latent_dim})")
encoder, decoder, log = qr.pretrain_autoencoder(scaled[:-1], spec, seed=3)
print(f"trained for {log.stop_epoch} epochs, final loss {log.epoch_loss[-1]:.5f}")

held_out = scaled[-1]
recon = qr.decode(decoder, qr.encode(encoder, held_out))
print(f"held-out reconstruction mse: {qr.mse_loss(held_out, recon):.5f} "
      f"(dataset variance {float(np.mean(np.var(scaled, axis=0))):.5f})")

latent = qr.encode(encoder, scaled)
for state in (0, 1):
    mean_latent = latent[data.labels == state].mean(axis=0)
    print(f"state {state}: latent mean magnitude {np.abs(mean_latent).mean():.3f}")

# sweep one latent component through its tanh range
component = int(np.argmax(latent.std(axis=0)))  # the busiest component
values = [-0.8, -0.4, 0.0, 0.4, 0.8]
base, family = qr.latent_probe(encoder, decoder, held_out, component, values)
print(f"probed latent component {component} at {values}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

half = scaled.shape[1] // 2
fig, axes = plt.subplots(2, 1, figsize=(9, 5.5), sharex=True)
axes[0].plot(held_out[:half], color="black", lw=1.4, label="input I")
axes[0].plot(recon[:half], "--", color="tab:red", label="reconstruction I")
axes[1].plot(held_out[half:], color="black", lw=1.4, label="input Q")
axes[1].plot(recon[half:], "--", color="tab:red", label="reconstruction Q")
for ax in axes:
    ax.legend()
axes[1].set_xlabel("slice index")
axes[0].set_title("held-out input regeneration")
fig.tight_layout()
fig.savefig(OUT / "04_reconstruction.png", dpi=120)

fig, axes = plt.subplots(2, 1, figsize=(9, 5.5), sharex=True)
axes[0].plot(base[:half], color="black", lw=1.6, label="unmodified")
axes[1].plot(base[half:], color="black", lw=1.6)
for v, member in zip(values, family):
    axes[0].plot(member[:half], lw=0.8, alpha=0.8, label=f"h[{component}] = {v:+.1f}")
    axes[1].plot(member[half:], lw=0.8, alpha=0.8)
axes[0].set_title(f"reconstruction family while sweeping latent component {component}")
axes[0].legend(fontsize=8)
axes[1].set_xlabel("slice index")
fig.tight_layout()
fig.savefig(OUT / "04_latent_probe.png", dpi=120)

fig, axes = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
for ax, state in zip(axes, (0, 1)):
    chosen = latent[data.labels == state][:40]
    ax.plot(chosen.T, lw=0.4, alpha=0.4, color="tab:blue" if state == 0 else "tab:orange")
    ax.plot(chosen.mean(axis=0), color="black", lw=1.8)
    ax.set_ylabel(f"state {state}")
axes[1].set_xlabel("latent component")
axes[0].set_title("latent vectors (thin) and their per-state mean (thick)")
fig.tight_layout()
fig.savefig(OUT / "04_latent_vectors.png", dpi=120)
print(f"figures written to {OUT}/")
