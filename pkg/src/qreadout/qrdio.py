"""File formats: datasets, models, reports, and the key-value config.

Every binary-bearing format shares one framing: UTF-8 header lines, a
final ``payload <n_floats> <crc32>`` line, then little-endian float64
bytes. Readers refuse mismatched versions, truncated payloads, and bad
checksums with distinct errors so a broken file never turns into quiet
garbage.
"""

from __future__ import annotations

import csv
import hashlib
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .demod import Scaler
from .errors import ChecksumError, ConfigError, DataFormatError, TruncationError, VersionError
from .gmm import GmmModel
from .models import FfnnModel, PreTraNNModel
from .simulate import RawShot

RAW_MAGIC = "QRD-RAW"
TRAJ_MAGIC = "QRD-TRAJ"
IQ_MAGIC = "QRD-IQ"
MODEL_MAGIC = "QRDMODEL"
FORMAT_VERSION = 1

LABEL_LEGEND = "0=ground;1=first excited;2=second excited"


# ---------------------------------------------------------------- framing


def _format_float(x: float) -> str:
    return repr(float(x))


def _payload_bytes(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f8").tobytes()


def _write_framed(path, magic: str, header_lines: list[str], array: np.ndarray):
    data = _payload_bytes(array)
    crc = zlib.crc32(data) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(f"{magic} {FORMAT_VERSION}\n".encode())
        for line in header_lines:
            f.write((line + "\n").encode())
        f.write(f"payload {array.size} {crc:08x}\n".encode())
        f.write(data)


def _read_framed(path, magic: str) -> tuple[list[str], np.ndarray]:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    newline = blob.find(b"\n")
    if newline < 0:
        raise DataFormatError(f"{path}: empty or not a {magic} file")
    first = blob[:newline].decode("utf-8", "replace").split()
    if len(first) != 2 or first[0] != magic:
        raise DataFormatError(f"{path}: expected a {magic} file")
    if first[1] != str(FORMAT_VERSION):
        raise VersionError(f"{path}: unsupported {magic} version {first[1]}")
    lines: list[str] = []
    pos = newline + 1
    while True:
        newline = blob.find(b"\n", pos)
        if newline < 0:
            raise TruncationError(f"{path}: header ends before the payload line")
        line = blob[pos:newline].decode("utf-8")
        pos = newline + 1
        if line.startswith("payload "):
            parts = line.split()
            if len(parts) != 3:
                raise DataFormatError(f"{path}: malformed payload line")
            count = int(parts[1])
            declared_crc = parts[2]
            break
        lines.append(line)
    data = blob[pos : pos + count * 8]
    if len(data) < count * 8:
        raise TruncationError(
            f"{path}: payload truncated ({len(data)} of {count * 8} bytes)"
        )
    crc = zlib.crc32(data) & 0xFFFFFFFF
    if f"{crc:08x}" != declared_crc:
        raise ChecksumError(f"{path}: payload checksum mismatch")
    return lines, np.frombuffer(data, dtype="<f8").astype(np.float64)


def _header_fields(lines: list[str]) -> dict[str, str]:
    fields = {}
    for line in lines:
        key, _, value = line.partition(" ")
        if key not in fields:
            fields[key] = value
    return fields


def _require(fields: dict[str, str], key: str, path) -> str:
    if key not in fields:
        raise DataFormatError(f"{path}: missing header field {key!r}")
    return fields[key]


# ----------------------------------------------------------- raw datasets


def write_raw_dataset(path, shots: list[RawShot], header: dict):
    """Write raw shots; per-shot metadata rides in the header lines."""
    if not shots:
        raise ConfigError("refusing to write an empty dataset")
    n_samples = len(shots[0].samples)
    lines = [f"{k} {v}" for k, v in header.items()]
    lines += [
        f"labels_legend {LABEL_LEGEND}",
        f"records {len(shots)}",
        f"samples_per_record {n_samples}",
        f"duration_ns {_format_float(shots[0].duration_ns)}",
    ]
    for shot in shots:
        if len(shot.samples) != n_samples:
            raise ConfigError("all shots in one file must share a duration")
        events = (
            ";".join(f"{_format_float(t)}:{s}" for t, s in shot.decay_events) or "-"
        )
        lines.append(
            f"record {shot.prepared_label} {shot.actual_initial_state} {events}"
        )
    payload = np.concatenate([shot.samples for shot in shots])
    _write_framed(path, RAW_MAGIC, lines, payload)


def read_raw_dataset(path) -> tuple[list[RawShot], dict[str, str]]:
    lines, payload = _read_framed(path, RAW_MAGIC)
    fields = _header_fields([l for l in lines if not l.startswith("record ")])
    records = int(_require(fields, "records", path))
    n_samples = int(_require(fields, "samples_per_record", path))
    duration = float(_require(fields, "duration_ns", path))
    record_lines = [l for l in lines if l.startswith("record ")]
    if len(record_lines) != records or payload.size != records * n_samples:
        raise DataFormatError(f"{path}: record count does not match header")
    shots = []
    for idx, line in enumerate(record_lines):
        _, prepared, actual, events_text = line.split(" ", 3)
        events = []
        if events_text != "-":
            for chunk in events_text.split(";"):
                t, s = chunk.split(":")
                events.append((float(t), int(s)))
        shots.append(
            RawShot(
                samples=payload[idx * n_samples : (idx + 1) * n_samples],
                prepared_label=int(prepared),
                actual_initial_state=int(actual),
                decay_events=tuple(events),
                duration_ns=duration,
            )
        )
    return shots, fields


# ---------------------------------------------- trajectory / IQ datasets


def write_traj_dataset(path, features: np.ndarray, labels, header: dict):
    """Flattened trajectories, one record of 2C floats per shot."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    if len(features) != len(labels):
        raise ConfigError("features and labels must align")
    lines = [f"{k} {v}" for k, v in header.items()]
    lines += [
        f"labels_legend {LABEL_LEGEND}",
        f"records {len(features)}",
        f"feature_dim {features.shape[1]}",
        "labels " + ",".join(str(int(l)) for l in labels),
    ]
    _write_framed(path, TRAJ_MAGIC, lines, features.reshape(-1))


def read_traj_dataset(path) -> tuple[np.ndarray, np.ndarray, dict[str, str]]:
    lines, payload = _read_framed(path, TRAJ_MAGIC)
    fields = _header_fields(lines)
    records = int(_require(fields, "records", path))
    dim = int(_require(fields, "feature_dim", path))
    labels = np.array([int(v) for v in _require(fields, "labels", path).split(",")])
    if len(labels) != records or payload.size != records * dim:
        raise DataFormatError(f"{path}: record count does not match header")
    return payload.reshape(records, dim), labels, fields


def write_iq_dataset(path, points: np.ndarray, labels, header: dict):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != 2:
        raise ConfigError("IQ points must be (n, 2)")
    labels = np.asarray(labels, dtype=np.int64)
    lines = [f"{k} {v}" for k, v in header.items()]
    lines += [
        f"records {len(points)}",
        "labels " + ",".join(str(int(l)) for l in labels),
    ]
    _write_framed(path, IQ_MAGIC, lines, points.reshape(-1))


def read_iq_dataset(path) -> tuple[np.ndarray, np.ndarray, dict[str, str]]:
    lines, payload = _read_framed(path, IQ_MAGIC)
    fields = _header_fields(lines)
    records = int(_require(fields, "records", path))
    labels = np.array([int(v) for v in _require(fields, "labels", path).split(",")])
    if len(labels) != records or payload.size != records * 2:
        raise DataFormatError(f"{path}: record count does not match header")
    return payload.reshape(records, 2), labels, fields


# ------------------------------------------------------------- model files


def _network_lines(name: str, net: nn.DenseNetwork) -> list[str]:
    lines = [f"network {name} {len(net.layers)}"]
    for spec in net.layers:
        lines.append(f"layer {spec.in_dim} {spec.out_dim} {spec.activation}")
    return lines


def _network_params(net: nn.DenseNetwork) -> np.ndarray:
    # per layer: weights row-major, then biases
    return np.concatenate([p.reshape(-1) for p in net.parameters()])


def _scaler_lines(scaler: Scaler) -> list[str]:
    return [
        "scaler_min " + ",".join(_format_float(v) for v in scaler.minimum),
        "scaler_max " + ",".join(_format_float(v) for v in scaler.maximum),
    ]


def save_model(path, model, meta: dict | None = None):
    """Serialize a fitted classifier (pretrann, ffnn, or gmm)."""
    lines = [f"{k} {v}" for k, v in (meta or {}).items()]
    if isinstance(model, PreTraNNModel):
        lines.append("kind pretrann")
        lines.append("classes " + ",".join(str(c) for c in model.classes))
        lines += _scaler_lines(model.scaler)
        networks = [("encoder", model.encoder), ("head", model.head)]
        if model.decoder is not None:
            networks.append(("decoder", model.decoder))
        for name, net in networks:
            lines += _network_lines(name, net)
        payload = np.concatenate([_network_params(net) for _, net in networks])
    elif isinstance(model, FfnnModel):
        lines.append("kind ffnn")
        lines.append("classes " + ",".join(str(c) for c in model.classes))
        lines += _scaler_lines(model.scaler)
        lines += _network_lines("head", model.head)
        payload = _network_params(model.head)
    elif isinstance(model, GmmModel):
        lines.append("kind gmm")
        lines.append(f"components {model.n_components}")
        lines.append(f"dim {model.means.shape[1]}")
        for k in range(model.n_components):
            label = "-" if model.labels is None else str(int(model.labels[k]))
            lines.append(
                f"component {k} "
                f"weight {_format_float(model.weights[k])} "
                "mean " + ",".join(_format_float(v) for v in model.means[k]) + " "
                "cov " + ",".join(_format_float(v) for v in model.covariances[k].reshape(-1))
                + f" label {label}"
            )
        payload = np.empty(0)
    else:
        raise ConfigError(f"cannot serialize {type(model).__name__}")
    _write_framed(path, MODEL_MAGIC, lines, payload)


def _parse_networks(lines: list[str], payload: np.ndarray, path):
    networks = {}
    offset = 0
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "network":
            i += 1
            continue
        name, n_layers = parts[1], int(parts[2])
        specs = []
        for j in range(n_layers):
            _, in_dim, out_dim, act = lines[i + 1 + j].split()
            specs.append(nn.LayerSpec(int(in_dim), int(out_dim), act))
        net = nn.DenseNetwork(specs)
        for param in net.parameters():
            end = offset + param.size
            if end > payload.size:
                raise DataFormatError(f"{path}: parameter block too short")
            param[...] = payload[offset:end].reshape(param.shape)
            offset = end
        networks[name] = net
        i += 1 + n_layers
    if offset != payload.size:
        raise DataFormatError(f"{path}: unused bytes in parameter block")
    return networks


def _parse_scaler(fields: dict[str, str], path) -> Scaler:
    minimum = np.array([float(v) for v in _require(fields, "scaler_min", path).split(",")])
    maximum = np.array([float(v) for v in _require(fields, "scaler_max", path).split(",")])
    return Scaler(minimum=minimum, maximum=maximum)


def load_model(path):
    """Load a model saved by :func:`save_model`; returns (model, header)."""
    lines, payload = _read_framed(path, MODEL_MAGIC)
    fields = _header_fields(
        [l for l in lines if not l.startswith(("network ", "layer ", "component "))]
    )
    kind = _require(fields, "kind", path)
    if kind == "gmm":
        k = int(_require(fields, "components", path))
        dim = int(_require(fields, "dim", path))
        weights = np.empty(k)
        means = np.empty((k, dim))
        covs = np.empty((k, dim, dim))
        labels = np.empty(k, dtype=np.int64)
        labeled = True
        comp_lines = [l for l in lines if l.startswith("component ")]
        if len(comp_lines) != k:
            raise DataFormatError(f"{path}: expected {k} component lines")
        for line in comp_lines:
            parts = line.split()
            idx = int(parts[1])
            weights[idx] = float(parts[3])
            means[idx] = [float(v) for v in parts[5].split(",")]
            covs[idx] = np.array([float(v) for v in parts[7].split(",")]).reshape(dim, dim)
            if parts[9] == "-":
                labeled = False
            else:
                labels[idx] = int(parts[9])
        model = GmmModel(
            weights=weights,
            means=means,
            covariances=covs,
            labels=labels if labeled else None,
        )
        return model, fields

    classes = tuple(int(c) for c in _require(fields, "classes", path).split(","))
    scaler = _parse_scaler(fields, path)
    networks = _parse_networks(lines, payload, path)
    if kind == "pretrann":
        if "encoder" not in networks or "head" not in networks:
            raise DataFormatError(f"{path}: pretrann file missing networks")
        return (
            PreTraNNModel(
                scaler=scaler,
                encoder=networks["encoder"],
                head=networks["head"],
                decoder=networks.get("decoder"),
                classes=classes,
            ),
            fields,
        )
    if kind == "ffnn":
        if "head" not in networks:
            raise DataFormatError(f"{path}: ffnn file missing its network")
        return FfnnModel(scaler=scaler, head=networks["head"], classes=classes), fields
    raise DataFormatError(f"{path}: unknown model kind {kind!r}")


# ------------------------------------------------------------ config files


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"config line {lineno}: empty key or value")
        if key in values:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


# ---------------------------------------------------------------- reports


def write_report_csv(path, rows: list[dict], columns: list[str]):
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_report_csv(path) -> list[dict[str, str]]:
    try:
        with open(path, newline="") as f:
            return list(csv.DictReader(f))
    except OSError as exc:
        raise DataFormatError(f"cannot read report {path}: {exc}") from exc


def write_report_json(path, report: dict):
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")


def read_report_json(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise DataFormatError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed JSON report {path}: {exc}") from exc


def config_hash(mapping: dict) -> str:
    """Short stable hash of a resolved configuration."""
    canonical = "\n".join(f"{k} = {mapping[k]}" for k in sorted(mapping))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


# ----------------------------------------------------------------- inspect


@dataclass
class FileSummary:
    path: str
    kind: str
    version: int
    fields: dict[str, str]
    payload_floats: int
    checksum_ok: bool


def describe_file(path) -> FileSummary:
    """Header summary of any framed file (used by the inspect command)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    first = blob.split(b"\n", 1)[0].decode("utf-8", "replace").split()
    if len(first) != 2:
        raise DataFormatError(f"{path}: not a framed dataset/model file")
    magic = first[0]
    if magic not in (RAW_MAGIC, TRAJ_MAGIC, IQ_MAGIC, MODEL_MAGIC):
        raise DataFormatError(f"{path}: unknown file magic {magic!r}")
    lines, payload = _read_framed(path, magic)
    fields = _header_fields(
        [l for l in lines if not l.startswith(("record ", "layer ", "component "))]
    )
    return FileSummary(
        path=str(path),
        kind=magic,
        version=FORMAT_VERSION,
        fields=fields,
        payload_floats=payload.size,
        checksum_ok=True,
    )
