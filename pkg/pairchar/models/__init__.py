from pairchar.models.errors import (
    ConfigError,
    CutoffTooSmall,
    DegenerateCounts,
    DivergentMetric,
    IndeterminateRatio,
    InvalidMode,
    InvalidParameter,
    NoExtremum,
    PairCharError,
)
from pairchar.models.metrics import (
    MEASURED_METRICS,
    MetricKind,
    MetricRequest,
    MetricValue,
    Provenance,
)
from pairchar.models.params import DetectorModel, SourceParams, click_prob, halved
