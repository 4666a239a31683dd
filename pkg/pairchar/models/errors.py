"""Error hierarchy shared by every layer.

All errors derive from ``ValueError`` so callers that only guard against bad
input keep working; the CLI turns them into ``{code, message, params}``.
"""
from typing import Any, Dict, Optional


class PairCharError(ValueError):
    code = "pairchar_error"

    def __init__(self, message: str, params: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.params = dict(params or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "params": self.params}


class InvalidParameter(PairCharError):
    code = "invalid_parameter"


class ConfigError(PairCharError):
    code = "config_error"


class DivergentMetric(PairCharError):
    code = "divergent_metric"


class IndeterminateRatio(PairCharError):
    code = "indeterminate_ratio"


class NoExtremum(PairCharError):
    code = "no_extremum"


class CutoffTooSmall(PairCharError):
    code = "cutoff_too_small"


class InvalidMode(PairCharError):
    code = "invalid_mode"


class DegenerateCounts(PairCharError):
    code = "degenerate_counts"
