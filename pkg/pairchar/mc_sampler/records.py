from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from pairchar.models.errors import InvalidParameter
from pairchar.models.metrics import MetricKind


@dataclass(frozen=True)
class ClickRecord:
    trial_id: int
    clicks: Tuple[bool, ...]

    @property
    def pattern(self) -> int:
        return sum(1 << g for g, clicked in enumerate(self.clicks) if clicked)


@dataclass
class CountTally:
    """Counts per click pattern; bit g of the pattern index is detector g."""

    detector_names: Tuple[str, ...]
    counts: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        size = 1 << len(self.detector_names)
        if self.counts is None:
            self.counts = np.zeros(size, dtype=np.int64)
        elif len(self.counts) != size:
            raise InvalidParameter("one count per click pattern", {"size": len(self.counts)})

    @property
    def trials(self) -> int:
        return int(self.counts.sum())

    def add_patterns(self, patterns: np.ndarray) -> None:
        self.counts += np.bincount(patterns, minlength=len(self.counts)).astype(np.int64)

    def add_record(self, record: ClickRecord) -> None:
        self.counts[record.pattern] += 1

    def merge(self, other: "CountTally") -> "CountTally":
        if other.detector_names != self.detector_names:
            raise InvalidParameter("cannot merge tallies of different setups",
                                   {"left": self.detector_names, "right": other.detector_names})
        return CountTally(self.detector_names, self.counts + other.counts)

    def event_count(self, mask: int) -> int:
        """Trials in which every detector of ``mask`` clicked."""
        patterns = np.arange(len(self.counts))
        return int(self.counts[(patterns & mask) == mask].sum())

    def counts_by_pattern(self) -> Dict[str, int]:
        out = {}
        for pattern, count in enumerate(self.counts):
            label = "+".join(n for g, n in enumerate(self.detector_names) if pattern >> g & 1) or "none"
            out[label] = int(count)
        return out


@dataclass(frozen=True)
class EstimatorResult:
    metric_kind: MetricKind
    value: float
    std_error: float
    trials: int
    counts: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metric": self.metric_kind.value,
            "value": self.value,
            "std_error": self.std_error,
            "trials": self.trials,
            "counts": dict(self.counts),
        }
