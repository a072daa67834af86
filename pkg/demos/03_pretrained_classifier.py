"""Training the three classifiers on one measurement time.

Builds a 2-state dataset, splits 75/25, then fits the GMM on the averaged
points and the two neural classifiers on the flattened trajectories. The
pretrained model trains its autoencoder first (unsupervised), then a
softmax head on the frozen encoder's latent vectors. Prints accuracies
and confusion matrices, and saves the pretrained model to disk.

Run from the repository root:  python3 demos/03_pretrained_classifier.py
"""

import pathlib

import numpy as np

import qreadout as qr
from qreadout import qrdio
from qreadout.bench import build_trajectory_dataset, shuffle_split
from qreadout.demod import fit_scaler

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = qr.SimConfig()
TM_NS = 1600.0
data = build_trajectory_dataset(cfg, 800, (0, 1), TM_NS)
print(f"dataset: {len(data.labels)} shots, feature dimension {data.features.shape[1]}")

rng = np.random.default_rng(0)
train, test = shuffle_split(len(data.labels), 0.75, rng)
y_train, y_test = data.labels[train], data.labels[test]

# GMM on the time-averaged points
gmm = qr.gmm_fit(data.iq_points[train], 2, seed=1)
qr.gmm_assign_labels(gmm, data.iq_points[train], y_train)
gmm_report = qr.evaluate(qr.gmm_predict_batch(gmm, data.iq_points[test]), y_test, 2)

# neural classifiers on the scaled feature vectors
scaler = fit_scaler(data.features[train])
x_train = scaler.transform(data.features[train])

ffnn = qr.train_ffnn(x_train, y_train, scaler=scaler, seed=2)
ffnn_preds, _ = qr.predict(ffnn, data.features[test])
ffnn_report = qr.evaluate(ffnn_preds, y_test, 2)

pretrann = qr.train_pretrann(x_train, y_train, scaler=scaler, seed=2)
pre_preds, _ = qr.predict(pretrann, data.features[test])
pre_report = qr.evaluate(pre_preds, y_test, 2)

print(f"\nautoencoder stopped after {pretrann.ae_log.stop_epoch} epochs "
      f"(best epoch {pretrann.ae_log.best_epoch}, "
      f"final loss {pretrann.ae_log.epoch_loss[-1]:.5f})")
print(f"head stopped after {pretrann.head_log.stop_epoch} epochs\n")

for name, report in (("GMM", gmm_report), ("FFNN", ffnn_report), ("PreTraNN", pre_report)):
    print(f"{name:>9}: global accuracy {report.global_accuracy:.4f}")
    print(f"{'':>11}confusion rows {np.round(report.confusion, 3).tolist()}")

model_path = OUT / "pretrann_tm1600.qrdmodel"
qrdio.save_model(model_path, pretrann, meta={"tm_ns": repr(TM_NS), "seed": "2"})
print(f"\npretrained model saved to {model_path}")
loaded, _ = qrdio.load_model(model_path)
again, _ = qr.predict(loaded, data.features[test])
print(f"reload check: predictions identical -> {bool(np.array_equal(again, pre_preds))}")
