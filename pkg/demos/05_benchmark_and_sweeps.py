"""A miniature version of the full benchmark and the two sweeps.

Runs the accuracy-vs-measurement-time grid at reduced scale (fewer shots
and repeats than the defaults, so it finishes in a couple of minutes),
then a small latent-size sweep and dataset-size sweep, writing the same
CSV reports the command-line harness produces.

The identical runs through the CLI would be:

    qreadout benchmark --tm 800,1600,3200 --methods gmm,pretrann --repeats 2
    qreadout sweep-latent --fractions 1,0.25,0.1 --sweep-tm 800
    qreadout sweep-dataset --sizes 200,800 --sweep-tm 800

Run from the repository root:  python3 demos/05_benchmark_and_sweeps.py
"""

import dataclasses
import pathlib

import qreadout as qr
from qreadout.bench import ExperimentConfig, run_benchmark, sweep_dataset, sweep_latent

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = ExperimentConfig(
    sim=dataclasses.replace(qr.SimConfig(), master_seed=2024),
    tm_list_ns=(800.0, 1600.0, 3200.0),
    methods=("gmm", "pretrann"),
    repeats=2,
    shots_per_state=400,
    states=(0, 1),
)

print("running the benchmark grid (3 measurement times x 2 methods x 2 repeats)")
report = run_benchmark(cfg, OUT / "bench")
print(f"\n{'method':>9} {'T_m (ns)':>9} {'accuracy':>9}")
for entry in report["aggregates"]:
    print(
        f"{entry['method']:>9} {entry['tm_ns']:>9.0f} "
        f"{entry['global_accuracy_mean']:>9.4f} ± {entry['global_accuracy_std']:.4f}"
    )

print("\nlatent-size sweep at 800 ns")
rows = sweep_latent(cfg, OUT / "sweep_latent", fractions=(1.0, 0.25, 0.1), tm_ns=800.0, repeats=2)
for row in rows:
    print(
        f"  fraction {float(row['fraction']):.2f} (latent {row['latent_dim']:>3}): "
        f"accuracy {float(row['accuracy_mean']):.4f}, "
        f"final loss {float(row['final_loss_mean']):.5f}, "
        f"train {float(row['train_s_mean']):.2f} s"
    )

print("\ndataset-size sweep at 800 ns")
rows = sweep_dataset(cfg, OUT / "sweep_dataset", sizes=(200, 800), tm_ns=800.0, repeats=2)
for row in rows:
    print(
        f"  size {row['size']:>4}: accuracy {float(row['accuracy_mean']):.4f}, "
        f"train {float(row['train_s_mean']):.2f} s"
    )

print(f"\nCSV reports under {OUT}/bench, {OUT}/sweep_latent, {OUT}/sweep_dataset")
