"""Metric identifiers and the value objects every engine returns."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping

from pairchar.models.errors import InvalidParameter
from pairchar.models.params import DetectorModel, SourceParams


class MetricKind(str, Enum):
    R_IDEAL = "r_ideal"
    R_TILDE = "r_tilde"
    R_TILDE_FIRST_ORDER = "r_tilde_first_order"
    G2_AUTO = "g2_auto"
    G2_AUTO_TAYLOR = "g2_auto_taylor"
    G2_CONDITIONAL = "g2_conditional"
    G2_CROSS = "g2_cross"
    G2_CROSS_NO_DARK = "g2_cross_no_dark"
    V_HOM = "v_hom"
    V_HOM_FIRST_ORDER = "v_hom_first_order"
    V_ENT = "v_ent"
    V_ENT_NO_DARK = "v_ent_no_dark"

    @property
    def is_visibility(self) -> bool:
        return self in (
            MetricKind.V_HOM,
            MetricKind.V_HOM_FIRST_ORDER,
            MetricKind.V_ENT,
            MetricKind.V_ENT_NO_DARK,
        )

    @property
    def maximize(self) -> bool:
        """Direction in which the metric improves."""
        return self is not MetricKind.G2_CONDITIONAL

    @classmethod
    def parse(cls, name: str) -> "MetricKind":
        try:
            return cls(name)
        except ValueError:
            raise InvalidParameter(f"unknown metric '{name}'", {"metric": name}) from None


# Metrics measured on a physical setup, i.e. available to every engine.
MEASURED_METRICS = (
    MetricKind.R_TILDE,
    MetricKind.G2_AUTO,
    MetricKind.G2_CONDITIONAL,
    MetricKind.G2_CROSS,
    MetricKind.V_HOM,
    MetricKind.V_ENT,
)


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"
    MONTE_CARLO = "monte_carlo"

    @classmethod
    def parse(cls, name: str) -> "Provenance":
        try:
            return cls(name)
        except ValueError:
            raise InvalidParameter(f"unknown engine '{name}'", {"engine": name}) from None


@dataclass(frozen=True)
class MetricRequest:
    source: SourceParams
    det: DetectorModel
    metric_kind: MetricKind


@dataclass(frozen=True)
class MetricValue:
    metric_kind: MetricKind
    value: float
    provenance: Provenance
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # rounding slack only; sampled estimates are left as drawn
        exact = self.provenance is not Provenance.MONTE_CARLO
        if exact and self.metric_kind.is_visibility and not -1.0 - 1e-12 <= self.value <= 1.0 + 1e-12:
            raise InvalidParameter(
                "visibility outside [-1, 1]",
                {"metric": self.metric_kind.value, "value": self.value},
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metric": self.metric_kind.value,
            "value": self.value,
            "engine": self.provenance.value,
            "diagnostics": dict(self.diagnostics),
        }
