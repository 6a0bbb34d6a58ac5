"""Metric aggregation and the machine-readable report model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

REPORT_VERSION = 1

METRIC_NAMES = (
    "r_ove",
    "r_und",
    "r_ali",
    "r_occ",
    "r_com",
    "r_shm",
    "r_sub",
    "fid",
    "cfid",
)


def aggregate(values: Iterable[float | None]) -> float | None:
    """Arithmetic mean over present values; None when nothing contributed."""
    present = [v for v in values if v is not None]
    if not present:
        return None
    return sum(present) / len(present)


@dataclass(frozen=True)
class MetricReport:
    """Corpus-level metric values with contributing-sample counts.

    A metric carries a value exactly when at least one sample contributed
    to it; its count says how many did.
    """

    r_ove: float | None = None
    r_und: float | None = None
    r_ali: float | None = None
    r_occ: float | None = None
    r_com: float | None = None
    r_shm: float | None = None
    r_sub: float | None = None
    fid: float | None = None
    cfid: float | None = None
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, count in self.counts.items():
            if name not in METRIC_NAMES:
                raise ValueError(f"unknown metric {name!r} in counts")
            value = getattr(self, name)
            if (value is None) != (count == 0):
                raise ValueError(
                    f"metric {name!r}: value must be present iff its count is positive"
                )
        for name in METRIC_NAMES:
            if getattr(self, name) is not None and name not in self.counts:
                raise ValueError(f"metric {name!r} has a value but no count")

    @classmethod
    def from_samples(cls, per_metric: Mapping[str, list[float | None]]) -> "MetricReport":
        """Aggregate per-sample optional values into corpus means and counts."""
        values: dict[str, float | None] = {}
        counts: dict[str, int] = {}
        for name, samples in per_metric.items():
            if name not in METRIC_NAMES:
                raise ValueError(f"unknown metric {name!r}")
            values[name] = aggregate(samples)
            counts[name] = sum(1 for v in samples if v is not None)
        return cls(**values, counts=counts)

    def to_dict(self) -> dict:
        """JSON-friendly view: {metric: {"value": ..., "count": ...}}."""
        out: dict[str, dict] = {}
        for name in METRIC_NAMES:
            if name in self.counts:
                out[name] = {"value": getattr(self, name), "count": self.counts[name]}
        return out
