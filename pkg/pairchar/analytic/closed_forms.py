"""Closed-form metrics for threshold detectors and a multimode pair source.

Each metric takes ``(source, det)`` and is evaluated from per-mode
generating functions raised to ``N = source.n_modes`` with ``p_bar`` in every
factor, so ``N = 1`` is the single-mode case. Numerators that are small
differences of probabilities are rewritten as sums of non-negative
``ClickKernel`` terms, which keeps relative accuracy near machine precision
down to ``p_bar -> 0`` and ``eta -> 0``.
"""
import logging
import math
from typing import Callable, Dict

from pairchar.analytic.kernel import ClickKernel, log_excess
from pairchar.models.errors import DivergentMetric, IndeterminateRatio, InvalidParameter
from pairchar.models.metrics import MetricKind, MetricValue, Provenance
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)

RATIO_FLOOR = 1e-300

# Reference levels plotted next to the curves.
CLASSICAL_R_BOUND = 1.0
THERMAL_G2 = 2.0
COHERENT_G2 = 1.0
BELL_VISIBILITY_THRESHOLD = 1.0 / math.sqrt(2.0)


def _ratio(numerator: float, denominator: float, kind: MetricKind, source, det) -> float:
    if denominator < RATIO_FLOOR:
        raise IndeterminateRatio(
            f"{kind.value}: every count rate vanishes",
            {"metric": kind.value, "p_bar": source.p_bar, "n_modes": source.n_modes,
             "eta": det.eta, "p_dc": det.p_dc},
        )
    return numerator / denominator


# ── Ideal detectors ─────────────────────────────────────────────────────────

def r_ideal(p: float) -> float:
    """R = (1/4)(1 + 1/p)**2 for a two-mode squeezed vacuum and perfect detectors."""
    if p == 0:
        raise DivergentMetric("R diverges as p -> 0", {"p": p})
    if not 0 < p <= 1:
        raise InvalidParameter("p must lie in (0, 1)", {"p": p})
    return 0.25 * (1.0 + 1.0 / p) ** 2


def ideal_moments_metrics(p: float) -> Dict[str, float]:
    """
    Ideal R, g2 and g2_ab, tied together by g2_ab = sqrt(R g2_a g2_b).
    """
    if not 0 < p < 1:
        raise InvalidParameter("p must lie in (0, 1)", {"p": p})
    r = r_ideal(p)
    g2 = THERMAL_G2
    g2_cross = 1.0 + 1.0 / p
    if not math.isclose(math.sqrt(r * g2 * g2), g2_cross, rel_tol=1e-12):
        raise ArithmeticError(f"ideal moment identity broken at p={p}")
    return {"r_ideal": r, "g2_ideal": g2, "g2_cross_ideal": g2_cross}


# ── Exact metrics ───────────────────────────────────────────────────────────

def _r_tilde(source: SourceParams, det: DetectorModel) -> float:
    """Cauchy-Schwarz ratio from twin (a, b) and split (a, a) coincidences."""
    k = ClickKernel.of(source, det)
    eta, half = det.eta, det.eta / 2.0
    twin = k.coincidence(half, half, eta - eta * eta / 4.0, eta * eta / 4.0)
    split = k.coincidence(half, half, eta, 0.0)
    return _ratio(twin, split, MetricKind.R_TILDE, source, det) ** 2


def _g2_auto(source: SourceParams, det: DetectorModel) -> float:
    k = ClickKernel.of(source, det)
    half = det.eta / 2.0
    coincidences = k.coincidence(half, half, det.eta, 0.0)
    return _ratio(coincidences, k.click(half) ** 2, MetricKind.G2_AUTO, source, det)


def _g2_cross(source: SourceParams, det: DetectorModel) -> float:
    k = ClickKernel.of(source, det)
    eta = det.eta
    coincidences = k.coincidence(eta, eta, 2.0 * eta - eta * eta, eta * eta)
    return _ratio(coincidences, k.click(eta) ** 2, MetricKind.G2_CROSS, source, det)


def heralding_probability(source: SourceParams, det: DetectorModel) -> float:
    """Probability that the herald detector on b clicks, tr rho_{a|b}."""
    return ClickKernel.of(source, det).click(det.eta)


def conditional_zeta(source: SourceParams, det: DetectorModel, x: float) -> float:
    """
    <x**n_a> in the heralded state: [G(x)**N - q G(x(1 - eta))**N] / P_herald.
    Equals 1 at x = 1.
    """
    if not 0 <= x <= 1:
        raise InvalidParameter("x must lie in [0, 1]", {"x": x})
    k = ClickKernel.of(source, det)
    herald = heralding_probability(source, det)
    if herald < RATIO_FLOOR:
        raise IndeterminateRatio("heralding probability vanishes", {"p_bar": source.p_bar})
    loss = 1.0 - x
    both = loss + det.eta - loss * det.eta
    return (k.moment(loss) - k.q * k.moment(both)) / herald


def _g2_conditional(source: SourceParams, det: DetectorModel) -> float:
    """
    Heralded autocorrelation of mode a, conditioned on a click on b:
    <D_d D_dbar D_b> <D_b> / <D_a(eta/2) D_b>**2.
    """
    k = ClickKernel.of(source, det)
    eta, half = det.eta, det.eta / 2.0
    herald = k.click(eta)
    if herald < RATIO_FLOOR:
        raise IndeterminateRatio(
            "heralding probability vanishes",
            {"p_bar": source.p_bar, "n_modes": source.n_modes, "eta": eta, "p_dc": det.p_dc},
        )
    # <F(n_a) (1 - q y^n_b)> = <F> - q G(y)^N <F>' with <.>' under p -> p (1 - eta)
    split = k.coincidence(half, half, eta, 0.0)
    split_tilted = k.tilted(1.0 - eta).coincidence(half, half, eta, 0.0)
    triple = split - k.q * k.moment(eta) * split_tilted
    pair = k.coincidence(half, eta, half + eta - half * eta, half * eta)
    return _ratio(triple * herald, pair * pair, MetricKind.G2_CONDITIONAL, source, det)


def hom_coincidences(source: SourceParams, det: DetectorModel):
    """
    (P_delayed, P_delayed - P_dip): coincidence probability of the delayed
    (distinguishable) arm and the depth of the dip.
    """
    k = ClickKernel.of(source, det)
    eta = det.eta
    u = eta - eta * eta / 4.0
    w = 2.0 * eta - eta * eta
    defect = eta * eta / 2.0
    delayed = k.coincidence(u, u, w, defect)
    # P_dip = (1 - q G(1-w)**(N/2))**2; the difference keeps q unsquared
    depth = 2.0 * k.q * k.moment(u) * math.expm1(
        0.5 * k.n_modes * log_excess(k.p, u, u, w, defect)
    )
    return delayed, depth


def _v_hom(source: SourceParams, det: DetectorModel) -> float:
    delayed, depth = hom_coincidences(source, det)
    return _ratio(depth, delayed, MetricKind.V_HOM, source, det)


def _v_ent(source: SourceParams, det: DetectorModel) -> float:
    """Polarization-entanglement visibility (N_hv - N_hh) / (N_hv + N_hh)."""
    k = ClickKernel.of(source, det)
    eta = det.eta
    uncorrelated = k.click(eta) ** 2
    correlated = k.q ** 2 * k.excess(eta, eta, 2.0 * eta - eta * eta, eta * eta)
    return _ratio(correlated, 2.0 * uncorrelated + correlated, MetricKind.V_ENT, source, det)


# ── Approximations and reductions (single mode) ─────────────────────────────

def _single_mode_photons(source: SourceParams, det: DetectorModel, kind: MetricKind) -> float:
    if source.n_modes != 1:
        raise InvalidParameter(f"{kind.value} is a single-mode expansion", {"n_modes": source.n_modes})
    mean_photons = source.mean_photons_per_mode
    if det.eta * mean_photons == 0:
        raise InvalidParameter(
            f"{kind.value} needs eta * n_a > 0", {"eta": det.eta, "p_bar": source.p_bar}
        )
    return mean_photons


def r_tilde_first_order(source: SourceParams, det: DetectorModel) -> float:
    """(1 + (1/(2 n_a) - eta/4)(1 - 2 p_dc / (eta n_a)))**2, first order in eta and p_dc."""
    n_a = _single_mode_photons(source, det, MetricKind.R_TILDE_FIRST_ORDER)
    dark = 1.0 - 2.0 * det.p_dc / (det.eta * n_a)
    return (1.0 + (0.5 / n_a - det.eta / 4.0) * dark) ** 2


def g2_auto_taylor(source: SourceParams, det: DetectorModel) -> float:
    """(2 - eta n_a / (1 + eta n_a))(1 - 2 p_dc / (eta n_a)), first order in p_dc."""
    n_a = _single_mode_photons(source, det, MetricKind.G2_AUTO_TAYLOR)
    x = det.eta * n_a
    return (2.0 - x / (1.0 + x)) * (1.0 - 2.0 * det.p_dc / x)


def _no_dark_p(source: SourceParams, kind: MetricKind) -> float:
    if source.n_modes != 1:
        raise InvalidParameter(f"{kind.value} is a single-mode reduction", {"n_modes": source.n_modes})
    if source.p_bar == 0:
        raise IndeterminateRatio(f"{kind.value} undefined at p = 0", {"p_bar": 0.0})
    return source.p_bar


def g2_cross_no_dark(source: SourceParams, det: DetectorModel) -> float:
    """1 + (1/p)(1 - p)/(1 - p(1 - eta)**2); ignores p_dc."""
    p = _no_dark_p(source, MetricKind.G2_CROSS_NO_DARK)
    return 1.0 + (1.0 - p) / (p * (1.0 - p * (1.0 - det.eta) ** 2))


def v_hom_first_order(source: SourceParams, det: DetectorModel) -> float:
    """(1 + p)/(1 + 3p) + 2 p eta / (1 + 3p)**2; first order in eta, ignores p_dc."""
    if source.n_modes != 1:
        raise InvalidParameter("v_hom_first_order is a single-mode expansion", {"n_modes": source.n_modes})
    p = source.p_bar
    return (1.0 + p) / (1.0 + 3.0 * p) + 2.0 * p * det.eta / (1.0 + 3.0 * p) ** 2


def v_ent_no_dark(source: SourceParams, det: DetectorModel) -> float:
    """(1 - p)/(1 + p - 2 p**2 (1 - eta)**2); ignores p_dc."""
    if source.n_modes != 1:
        raise InvalidParameter("v_ent_no_dark is a single-mode reduction", {"n_modes": source.n_modes})
    p = source.p_bar
    return (1.0 - p) / (1.0 + p - 2.0 * p * p * (1.0 - det.eta) ** 2)


def first_order_nonclassical(source: SourceParams, det: DetectorModel) -> bool:
    """True where the first-order R estimate exceeds the classical bound, i.e. 2 p_dc < eta n_a."""
    n_a = _single_mode_photons(source, det, MetricKind.R_TILDE_FIRST_ORDER)
    return 2.0 * det.p_dc < det.eta * n_a


# ── Dispatch ────────────────────────────────────────────────────────────────

CLOSED_FORMS: Dict[MetricKind, Callable[[SourceParams, DetectorModel], float]] = {
    MetricKind.R_TILDE: _r_tilde,
    MetricKind.R_TILDE_FIRST_ORDER: r_tilde_first_order,
    MetricKind.G2_AUTO: _g2_auto,
    MetricKind.G2_AUTO_TAYLOR: g2_auto_taylor,
    MetricKind.G2_CONDITIONAL: _g2_conditional,
    MetricKind.G2_CROSS: _g2_cross,
    MetricKind.G2_CROSS_NO_DARK: g2_cross_no_dark,
    MetricKind.V_HOM: _v_hom,
    MetricKind.V_HOM_FIRST_ORDER: v_hom_first_order,
    MetricKind.V_ENT: _v_ent,
    MetricKind.V_ENT_NO_DARK: v_ent_no_dark,
}


def closed_form_value(kind: MetricKind, source: SourceParams, det: DetectorModel) -> float:
    if kind is MetricKind.R_IDEAL:
        return r_ideal(source.equivalent_p)
    return CLOSED_FORMS[kind](source, det)


def evaluate(kind: MetricKind, source: SourceParams, det: DetectorModel) -> MetricValue:
    value = closed_form_value(kind, source, det)
    logger.debug("%s(p_bar=%g, N=%d, eta=%g, p_dc=%g) = %.17g",
                 kind.value, source.p_bar, source.n_modes, det.eta, det.p_dc, value)
    return MetricValue(metric_kind=kind, value=value, provenance=Provenance.CLOSED_FORM)


def r_tilde(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.R_TILDE, source, det)


def g2_auto(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.G2_AUTO, source, det)


def g2_conditional(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.G2_CONDITIONAL, source, det)


def g2_cross(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.G2_CROSS, source, det)


def v_hom(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.V_HOM, source, det)


def v_ent(source: SourceParams, det: DetectorModel) -> MetricValue:
    return evaluate(MetricKind.V_ENT, source, det)


_CLASSICAL_BOUNDS = {
    MetricKind.R_IDEAL: CLASSICAL_R_BOUND,
    MetricKind.R_TILDE: CLASSICAL_R_BOUND,
    MetricKind.R_TILDE_FIRST_ORDER: CLASSICAL_R_BOUND,
    MetricKind.G2_AUTO: COHERENT_G2,
    MetricKind.G2_AUTO_TAYLOR: COHERENT_G2,
    MetricKind.G2_CONDITIONAL: COHERENT_G2,
    MetricKind.V_ENT: BELL_VISIBILITY_THRESHOLD,
    MetricKind.V_ENT_NO_DARK: BELL_VISIBILITY_THRESHOLD,
}


def classical_bound(metric_kind: MetricKind) -> float:
    """
    Threshold separating classical from non-classical values: R <= 1 and
    g2 >= 1 for classical fields, visibility above 1/sqrt(2) for a Bell test.
    """
    if metric_kind not in _CLASSICAL_BOUNDS:
        raise InvalidParameter(f"{metric_kind.value} has no classical bound", {"metric": metric_kind.value})
    return _CLASSICAL_BOUNDS[metric_kind]
