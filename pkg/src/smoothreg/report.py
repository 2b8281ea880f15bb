"""Run reports shared by the smoothed descent and the baseline solvers."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


class StopReason(str, enum.Enum):
    DISCREPANCY = "Discrepancy"
    MAX_ITER = "MaxIter"
    STALLED = "StalledStep"


@dataclass(frozen=True)
class StoppingRule:
    """Discrepancy principle ``||T psi - g_delta|| <= tau * delta`` plus an iteration cap.

    ``delta = 0`` never triggers for noisy data, which is how runs that
    should go to ``max_iter`` are configured.
    """

    delta: float = 0.0
    tau: float = 1.0
    max_iter: int = 5000

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError("delta must be >= 0")
        if not self.tau >= 1:
            raise ValueError("tau must be >= 1")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")

    @property
    def threshold(self) -> float:
        return self.tau * self.delta

    def satisfied(self, residual: float) -> bool:
        return residual <= self.threshold


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    g_value: float
    residual_norm: float
    rel_error: float | None
    step: float


HISTORY_FIELDS = ("iter", "G", "residual", "rel_error", "step")


def fmt(value: float | None) -> str:
    """17 significant digits: lossless round trip through text."""
    if value is None:
        return ""
    return format(float(value), ".17g")


@dataclass
class RunReport:
    method: str
    stopping: StopReason
    initial: IterationRecord
    history: list[IterationRecord] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    zeros: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def final(self) -> IterationRecord:
        return self.history[-1] if self.history else self.initial

    @property
    def rel_errors(self) -> list[float]:
        """Relative errors including the initial guess, when ground truth was known."""
        return [r.rel_error for r in [self.initial, *self.history] if r.rel_error is not None]

    @property
    def final_rel_error(self) -> float | None:
        return self.final.rel_error

    @property
    def min_rel_error(self) -> float | None:
        errs = self.rel_errors
        return min(errs) if errs else None

    def to_dict(self) -> dict[str, Any]:
        def clean(rec: IterationRecord) -> dict[str, Any]:
            d = asdict(rec)
            return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                    for k, v in d.items()}

        return {
            "method": self.method,
            "config": self.config,
            "stopping": self.stopping.value,
            "iterations": self.iterations,
            "final": clean(self.final),
            "initial": clean(self.initial),
            "zeros": self.zeros,
            "extra": self.extra,
            "history": [clean(r) for r in self.history],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def write_json(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def write_history_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HISTORY_FIELDS)
            for r in [self.initial, *self.history]:
                w.writerow([r.iter, fmt(r.g_value), fmt(r.residual_norm), fmt(r.rel_error), fmt(r.step)])


_RECORD_SCHEMA = {
    "type": "object",
    "required": ["iter", "g_value", "residual_norm", "rel_error", "step"],
    "properties": {
        "iter": {"type": "integer", "minimum": 0},
        "g_value": {"type": ["number", "null"]},
        "residual_norm": {"type": "number", "minimum": 0},
        "rel_error": {"type": ["number", "null"], "minimum": 0},
        "step": {"type": "number"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "smoothreg run report",
    "type": "object",
    "required": ["method", "config", "stopping", "iterations", "final", "initial", "zeros", "history"],
    "properties": {
        "method": {"type": "string"},
        "config": {"type": "object"},
        "stopping": {"enum": [r.value for r in StopReason]},
        "iterations": {"type": "integer", "minimum": 0},
        "final": _RECORD_SCHEMA,
        "initial": _RECORD_SCHEMA,
        "zeros": {"type": "integer", "minimum": 0},
        "extra": {"type": "object"},
        "history": {"type": "array", "items": _RECORD_SCHEMA},
    },
}


def growth_ratio(errors, factor: int = 3) -> float:
    """Post-minimum growth: error at ``factor`` times the argmin iteration over the minimum.

    The index is clipped to the last available entry, so a run that is too
    short reports its final error instead.
    """
    errs = [e for e in errors if e is not None]
    if not errs:
        return math.nan
    k = int(np.argmin(errs))
    lo = errs[k]
    later = errs[min(factor * k, len(errs) - 1)]
    return later / lo if lo > 0 else math.inf
