"""Evaluates a metric request with one of the three engines."""
import logging
from typing import Optional

from pairchar.analytic.closed_forms import evaluate as closed_form_evaluate
from pairchar.fock_oracle.oracle import CutoffPolicy, oracle_multimode
from pairchar.mc_sampler.estimators import estimate_metric
from pairchar.models.metrics import MetricRequest, MetricValue, Provenance

logger = logging.getLogger(__name__)


def evaluate_request(
    request: MetricRequest,
    engine: Provenance = Provenance.CLOSED_FORM,
    settings=None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> MetricValue:
    if settings is None:
        from pairchar.config.config_loader import load_settings

        settings = load_settings()
    if engine is Provenance.CLOSED_FORM:
        return closed_form_evaluate(request.metric_kind, request.source, request.det)
    if engine is Provenance.ORACLE:
        return oracle_multimode(
            request.metric_kind, request.source, request.det, CutoffPolicy.from_settings(settings)
        )
    mc = settings.monte_carlo
    result = estimate_metric(
        request.metric_kind,
        request.source,
        request.det,
        trials=trials or mc.default_trials,
        seed=mc.default_seed if seed is None else seed,
        settings=settings,
        workers=workers,
        progress=progress,
    )
    return MetricValue(
        metric_kind=request.metric_kind,
        value=result.value,
        provenance=Provenance.MONTE_CARLO,
        diagnostics={"std_error": result.std_error, "trials": result.trials, "counts": dict(result.counts)},
    )
