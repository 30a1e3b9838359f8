"""Round metrics: accuracy, per-round records, and CSV persistence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import LabeledDataset
from .errors import DataError


@dataclass(frozen=True)
class RoundRecord:
    """One federation round's observable outcomes."""

    round: int
    global_train_loss: float
    test_accuracy: float
    participants: int
    completed: int
    step_norm: float


@dataclass
class MetricsSink:
    """Ordered round records plus run identity metadata (not serialized)."""

    run_id: str = ""
    config_fingerprint: str = ""
    rows: list = field(default_factory=list)

    def append(self, record: RoundRecord) -> None:
        if self.rows and record.round <= self.rows[-1].round:
            raise DataError(
                f"round {record.round} does not increase on {self.rows[-1].round}"
            )
        self.rows.append(record)


def accuracy(w: np.ndarray, data: LabeledDataset) -> float:
    """Fraction of samples with y * score strictly positive; ties count wrong."""
    if len(data) == 0:
        raise DataError("cannot score an empty dataset")
    scores = _kernels.linear_scores(data.features, np.asarray(w, dtype=np.float64))
    return float(np.count_nonzero(data.labels * scores > 0.0)) / len(data)


def write_metrics_csv(sink: MetricsSink, path) -> None:
    """Deterministic CSV: header plus one row per round, floats at 17 digits."""
    lines = ["round,train_loss,test_accuracy,participants,completed,step_norm"]
    for r in sink.rows:
        lines.append(
            f"{r.round},{r.global_train_loss:.17g},{r.test_accuracy:.17g},"
            f"{r.participants},{r.completed},{r.step_norm:.17g}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
