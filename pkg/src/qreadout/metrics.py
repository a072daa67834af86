"""Classification accuracy and confusion matrices.

The global accuracy is the unweighted mean of per-state accuracies
(macro averaging), so class imbalance never hides a weak state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def per_state_accuracy(preds, labels, states=None) -> dict[int, float]:
    """Fraction of correctly classified shots for each prepared state."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if len(preds) != len(labels):
        raise ConfigError("preds and labels must have equal length")
    if states is None:
        states = sorted(int(s) for s in np.unique(labels))
    result = {}
    for state in states:
        mask = labels == state
        if not mask.any():
            raise ConfigError(f"state {state} has no labeled samples")
        result[int(state)] = float(np.mean(preds[mask] == state))
    return result


def global_accuracy(per_state: dict[int, float]) -> float:
    """Unweighted mean of the per-state accuracies."""
    if not per_state:
        raise ConfigError("per-state accuracy map is empty")
    return float(np.mean(list(per_state.values())))


def confusion_matrix(preds, labels, n_states: int) -> np.ndarray:
    """Row-normalized confusion matrix (rows = prepared, columns = predicted).

    Rows for states absent from ``labels`` stay all-zero and raise a warning.
    """
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(preds) != len(labels):
        raise ConfigError("preds and labels must have equal length")
    if labels.size and (labels.min() < 0 or labels.max() >= n_states):
        raise ConfigError("label outside [0, n_states)")
    if preds.size and (preds.min() < 0 or preds.max() >= n_states):
        raise ConfigError("prediction outside [0, n_states)")
    counts = np.zeros((n_states, n_states), dtype=np.float64)
    for true, pred in zip(labels, preds):
        counts[true, pred] += 1.0
    row_totals = counts.sum(axis=1)
    empty = row_totals == 0
    if empty.any():
        warnings.warn(
            f"states {np.flatnonzero(empty).tolist()} have no samples; "
            "their confusion rows stay zero",
            stacklevel=2,
        )
    out = np.zeros_like(counts)
    filled = ~empty
    out[filled] = counts[filled] / row_totals[filled, None]
    return out


@dataclass
class EvalReport:
    """Everything one evaluation produces, ready for CSV/JSON emission."""

    per_state: dict[int, float]
    global_accuracy: float
    confusion: np.ndarray
    n_test: int
    timing: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_state_accuracy": {str(k): v for k, v in self.per_state.items()},
            "global_accuracy": self.global_accuracy,
            "confusion": self.confusion.tolist(),
            "n_test": self.n_test,
            "timing": dict(self.timing),
            "metadata": dict(self.metadata),
        }


def evaluate(preds, labels, n_states: int, timing=None, metadata=None) -> EvalReport:
    per_state = per_state_accuracy(preds, labels, states=range(n_states))
    return EvalReport(
        per_state=per_state,
        global_accuracy=global_accuracy(per_state),
        confusion=confusion_matrix(preds, labels, n_states),
        n_test=len(labels),
        timing=dict(timing or {}),
        metadata=dict(metadata or {}),
    )
