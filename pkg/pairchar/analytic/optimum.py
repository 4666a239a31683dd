"""Optimal emission probability for metrics with an interior extremum."""
import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from pairchar.analytic.closed_forms import closed_form_value
from pairchar.models.errors import InvalidParameter, NoExtremum, PairCharError
from pairchar.models.metrics import MetricKind
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)

OPTIMIZABLE = {
    MetricKind.R_TILDE: "maximize",
    MetricKind.G2_CONDITIONAL: "minimize",
    MetricKind.G2_CROSS: "maximize",
    MetricKind.V_HOM: "maximize",
    MetricKind.V_ENT: "maximize",
}


class Optimum(NamedTuple):
    p_opt: float
    value: float
    heuristic_ratio: Optional[float] = None


def find_p_opt(
    metric_kind: MetricKind,
    det: DetectorModel,
    n_modes: int = 1,
    objective: Optional[str] = None,
    settings=None,
) -> Optimum:
    """
    Locates the extremum of a closed-form metric over the single-mode-equivalent
    emission probability p. A log-spaced scan brackets it, golden-section
    search in ln p refines it.
    :return: (p_opt, extremal value, p_opt / (p_dc / eta) or None)
    """
    if metric_kind not in OPTIMIZABLE:
        raise InvalidParameter(f"{metric_kind.value} has no optimum search", {"metric": metric_kind.value})
    objective = objective or OPTIMIZABLE[metric_kind]
    if objective not in ("maximize", "minimize"):
        raise InvalidParameter("objective must be 'maximize' or 'minimize'", {"objective": objective})
    if settings is None:
        from pairchar.config.config_loader import load_settings

        settings = load_settings()
    opt = settings.optimum
    sign = -1.0 if objective == "maximize" else 1.0

    def cost(log_p: float) -> float:
        source = SourceParams.from_equivalent_p(math.exp(log_p), n_modes)
        try:
            return sign * closed_form_value(metric_kind, source, det)
        except PairCharError:
            return math.inf

    grid = np.linspace(math.log(opt.p_min), math.log(opt.p_max), opt.grid_points)
    costs = np.array([cost(x) for x in grid])
    if not np.any(np.isfinite(costs)):
        raise NoExtremum(f"{metric_kind.value} is undefined on the search interval",
                         {"metric": metric_kind.value, "eta": det.eta, "p_dc": det.p_dc})
    best = int(np.argmin(costs))
    if best == 0 or best == len(grid) - 1:
        raise NoExtremum(
            f"{metric_kind.value} is monotone on the search interval",
            {"metric": metric_kind.value, "eta": det.eta, "p_dc": det.p_dc, "n_modes": n_modes},
        )

    result = minimize_scalar(
        cost,
        bracket=(grid[best - 1], grid[best], grid[best + 1]),
        method="golden",
        options={"xtol": opt.xtol},
    )
    p_opt = math.exp(float(result.x))
    value = sign * float(result.fun)

    ratio = None
    if det.p_dc > 0 and det.eta > 0:
        ratio = p_opt / (det.p_dc / det.eta)
        if not 1.0 / opt.heuristic_factor <= ratio <= opt.heuristic_factor:
            logger.warning(
                "%s optimum p=%.3g is %.2fx the p_dc/eta estimate", metric_kind.value, p_opt, ratio
            )
    logger.info("%s %s at p=%.6g: %.6g", metric_kind.value, objective, p_opt, value)
    return Optimum(p_opt=p_opt, value=value, heuristic_ratio=ratio)
