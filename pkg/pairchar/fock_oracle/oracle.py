"""Brute-force metric evaluation on truncated Fock states.

Every metric is computed from the states of the physical setup (twin beams,
50:50 splits, the HOM beamsplitter, the polarization Bell state) by summing
click probabilities over basis states. The pair-order cutoff is chosen per
call: start where the geometric tail drops below ``start_tolerance`` and
double until two successive values agree to ``convergence``.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

from pairchar.fock_oracle.detection import coincidence_probability
from pairchar.fock_oracle.state import (
    DetectorAssignment,
    FockState,
    apply_beamsplitter,
    make_pair_exponential_state,
    split_mode,
)
from pairchar.models.errors import CutoffTooSmall, IndeterminateRatio, InvalidParameter
from pairchar.models.metrics import MetricKind, MetricValue, Provenance
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)

RATIO_FLOOR = 1e-300


@dataclass(frozen=True)
class CutoffPolicy:
    start_tolerance: float = 1e-12
    state_tail_tolerance: float = 1e-9
    convergence: float = 1e-10
    min_start_order: int = 8
    max_cutoff_photons: int = 512

    @classmethod
    def from_settings(cls, settings=None) -> "CutoffPolicy":
        if settings is None:
            from pairchar.config.config_loader import load_settings

            settings = load_settings()
        o = settings.oracle
        return cls(
            start_tolerance=o.start_tolerance,
            state_tail_tolerance=o.state_tail_tolerance,
            convergence=o.convergence,
            min_start_order=o.min_start_order,
            max_cutoff_photons=o.max_cutoff_photons,
        )

    @property
    def max_order(self) -> int:
        return self.max_cutoff_photons // 2

    def start_order(self, p_bar: float) -> int:
        """Smallest pair order whose geometric tail p_bar**K is below start_tolerance."""
        if p_bar <= 0:
            return self.min_start_order
        needed = math.ceil(math.log(self.start_tolerance * (1.0 - p_bar)) / math.log(p_bar))
        order = max(self.min_start_order, needed)
        if order > self.max_order:
            raise CutoffTooSmall(
                "required cutoff exceeds the photon-number ceiling",
                {"p_bar": p_bar, "order": order, "max_cutoff_photons": self.max_cutoff_photons},
            )
        return order

    def converge(self, compute: Callable[[int], Tuple[float, float]], p_bar: float) -> Tuple[float, int, float]:
        """Runs ``compute(order) -> (value, tail)`` with doubling orders; returns (value, order, tail)."""
        order = self.start_order(p_bar)
        value, tail = compute(order)
        while True:
            nxt = min(2 * order, self.max_order)
            if nxt == order:
                raise CutoffTooSmall(
                    "oracle did not converge below the photon-number ceiling",
                    {"p_bar": p_bar, "order": order, "max_cutoff_photons": self.max_cutoff_photons},
                )
            refined, tail = compute(nxt)
            if abs(refined - value) <= self.convergence * abs(refined):
                if tail > self.state_tail_tolerance:
                    raise CutoffTooSmall("truncated tail exceeds tolerance",
                                         {"p_bar": p_bar, "order": nxt, "tail_mass": tail})
                logger.debug("converged at order %d (p_bar=%g, tail=%.3g)", nxt, p_bar, tail)
                return refined, nxt, tail
            logger.debug("order %d -> %d changed value by %.3g", order, nxt, refined - value)
            value, order = refined, nxt


# ── Setup states (single pair mode; copies are combined at detection) ──────

@lru_cache(maxsize=64)
def twin_beam_state(p_bar: float, order: int) -> FockState:
    """Two-mode squeezed vacuum sqrt(1-p) exp(sqrt(p) a^dag b^dag)|0>; modes (a, b)."""
    return make_pair_exponential_state(
        [(0, 1, math.sqrt(p_bar))], math.sqrt(1.0 - p_bar), order, mode_count=2, tail_tolerance=None
    )


@lru_cache(maxsize=64)
def split_signal_state(p_bar: float, order: int) -> FockState:
    """a split 50:50; modes (d, b, dbar)."""
    state, _ = split_mode(twin_beam_state(p_bar, order), 0)
    return state


@lru_cache(maxsize=64)
def split_both_state(p_bar: float, order: int) -> FockState:
    """a and b both split 50:50; modes (d_a, d_b, dbar_a, dbar_b)."""
    state, _ = split_mode(split_signal_state(p_bar, order), 1)
    return state


@lru_cache(maxsize=64)
def hom_dip_state(p_bar: float, order: int) -> FockState:
    """a and b recombined on a 50:50 beamsplitter at zero delay; modes (d, dbar)."""
    return apply_beamsplitter(twin_beam_state(p_bar, order), 0, 1, 0.5)


def squeezed_dip_state(p_bar: float, order: int) -> FockState:
    """
    The same output written directly: a^dag b^dag -> (d^dag**2 - dbar^dag**2) / 2,
    i.e. sqrt(1-p) exp((sqrt(p)/2)(d^dag**2 - dbar^dag**2))|0>.
    """
    c = math.sqrt(p_bar) / 2.0
    return make_pair_exponential_state(
        [(0, 0, c), (1, 1, -c)], math.sqrt(1.0 - p_bar), order, mode_count=2, tail_tolerance=None
    )


@lru_cache(maxsize=32)
def hom_delayed_state(p_bar: float, order: int) -> FockState:
    """
    Distinguishable (delayed) inputs on the HOM beamsplitter:
    sqrt(1-p) exp((sqrt(p)/2)(d_l + dbar_l)^dag (d_e - dbar_e)^dag)|0>; modes (d_l, dbar_l, d_e, dbar_e).
    """
    c = math.sqrt(p_bar) / 2.0
    terms = [(0, 2, c), (0, 3, -c), (1, 2, c), (1, 3, -c)]
    return make_pair_exponential_state(terms, math.sqrt(1.0 - p_bar), order, mode_count=4, tail_tolerance=None)


@lru_cache(maxsize=64)
def polarization_bell_state(p_bar: float, order: int) -> FockState:
    """(1-p) exp(sqrt(p)(a_h^dag b_v^dag - a_v^dag b_h^dag))|0>; modes (a_h, a_v, b_h, b_v)."""
    c = math.sqrt(p_bar)
    return make_pair_exponential_state(
        [(0, 3, c), (1, 2, -c)], 1.0 - p_bar, order, mode_count=4, tail_tolerance=None
    )


# ── Per-order metric evaluation ─────────────────────────────────────────────

def _ratio(numerator: float, denominator: float, kind: MetricKind, p_bar: float) -> float:
    if denominator < RATIO_FLOOR:
        raise IndeterminateRatio(f"{kind.value}: every count rate vanishes",
                                 {"metric": kind.value, "p_bar": p_bar})
    return numerator / denominator


def _prob(state: FockState, det: DetectorModel, n_modes: int, *groups) -> float:
    return coincidence_probability(state, DetectorAssignment.of(det, *groups), n_modes)


def _r_tilde(p, order, det, n):
    twin = _prob(twin_beam_state(p, order), det.halved(), n, (0,), (1,))
    both = split_both_state(p, order)
    split_a = _prob(both, det, n, (0,), (2,))
    split_b = _prob(both, det, n, (1,), (3,))
    return _ratio(twin * twin, split_a * split_b, MetricKind.R_TILDE, p), both.tail_mass


def _g2_auto(p, order, det, n):
    split = split_signal_state(p, order)
    coincidences = _prob(split, det, n, (0,), (2,))
    single = _prob(twin_beam_state(p, order), det.halved(), n, (0,))
    return _ratio(coincidences, single * single, MetricKind.G2_AUTO, p), split.tail_mass


def _g2_conditional(p, order, det, n):
    split = split_signal_state(p, order)
    triple = _prob(split, det, n, (0,), (2,), (1,))
    pair = _prob(split, det, n, (0,), (1,))
    herald = _prob(twin_beam_state(p, order), det, n, (1,))
    if herald < RATIO_FLOOR:
        raise IndeterminateRatio("heralding probability vanishes", {"p_bar": p})
    return _ratio(triple * herald, pair * pair, MetricKind.G2_CONDITIONAL, p), split.tail_mass


def _g2_cross(p, order, det, n):
    twin = twin_beam_state(p, order)
    coincidences = _prob(twin, det, n, (0,), (1,))
    singles = _prob(twin, det, n, (0,)) * _prob(twin, det, n, (1,))
    return _ratio(coincidences, singles, MetricKind.G2_CROSS, p), twin.tail_mass


def _v_hom(p, order, det, n):
    delayed_state = hom_delayed_state(p, order)
    delayed = _prob(delayed_state, det, n, (0, 2), (1, 3))
    dip = _prob(hom_dip_state(p, order), det, n, (0,), (1,))
    return _ratio(delayed - dip, delayed, MetricKind.V_HOM, p), delayed_state.tail_mass


def _v_ent(p, order, det, n):
    bell = polarization_bell_state(p, order)
    hv = _prob(bell, det, n, (0,), (3,))
    hh = _prob(bell, det, n, (0,), (2,))
    return _ratio(hv - hh, hv + hh, MetricKind.V_ENT, p), bell.tail_mass


_EVALUATORS: Dict[MetricKind, Callable] = {
    MetricKind.R_TILDE: _r_tilde,
    MetricKind.G2_AUTO: _g2_auto,
    MetricKind.G2_CONDITIONAL: _g2_conditional,
    MetricKind.G2_CROSS: _g2_cross,
    MetricKind.V_HOM: _v_hom,
    MetricKind.V_ENT: _v_ent,
}


def oracle_multimode(
    metric_kind: MetricKind,
    source: SourceParams,
    det: DetectorModel,
    cutoff_policy: Optional[CutoffPolicy] = None,
) -> MetricValue:
    """Oracle value of a measured metric; N independent copies of each pair mode."""
    if metric_kind not in _EVALUATORS:
        raise InvalidParameter(f"no oracle for {metric_kind.value}", {"metric": metric_kind.value})
    policy = cutoff_policy or CutoffPolicy.from_settings()
    evaluator = _EVALUATORS[metric_kind]
    p_bar = float(source.p_bar)
    value, order, tail = policy.converge(
        lambda k: evaluator(p_bar, k, det, source.n_modes), p_bar
    )
    return MetricValue(
        metric_kind=metric_kind,
        value=value,
        provenance=Provenance.ORACLE,
        diagnostics={"cutoff": 2 * order, "tail_mass": tail},
    )


def oracle_r(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.R_TILDE, source, det, cutoff_policy)


def oracle_g2(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.G2_AUTO, source, det, cutoff_policy)


def oracle_g2_conditional(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.G2_CONDITIONAL, source, det, cutoff_policy)


def oracle_g2_cross(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.G2_CROSS, source, det, cutoff_policy)


def oracle_v_hom(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.V_HOM, source, det, cutoff_policy)


def oracle_v_ent(source, det, cutoff_policy=None) -> MetricValue:
    return oracle_multimode(MetricKind.V_ENT, source, det, cutoff_policy)


def ideal_normal_ordered_moments(
    source: SourceParams, cutoff_policy: Optional[CutoffPolicy] = None
) -> Dict[str, float]:
    """
    Perfect-detector moments of the twin beam summed over all modes:
    <a^dag a>, <a^dag^2 a^2>, <a^dag b^dag b a>, and the ratios g2_a, g2_b, g2_ab, R built from them.
    """
    p_bar = float(source.p_bar)
    if p_bar == 0:
        raise InvalidParameter("ideal moments need p_bar > 0", {"p_bar": p_bar})
    policy = cutoff_policy or CutoffPolicy.from_settings()
    # twice the starting order: factorial moments weight the tail by n**2
    state = twin_beam_state(p_bar, min(2 * policy.start_order(p_bar), policy.max_order))
    n_a = state.occupations[:, 0].astype(float)
    n_b = state.occupations[:, 1].astype(float)
    w = state.probabilities
    mean_a, mean_b = float(w @ n_a), float(w @ n_b)
    pairs_a = float(w @ (n_a * (n_a - 1)))
    pairs_b = float(w @ (n_b * (n_b - 1)))
    cross = float(w @ (n_a * n_b))

    # independent copies: N single-mode terms plus N(N-1) products of means
    n = source.n_modes
    extra = n * (n - 1)
    pairs_a, pairs_b = n * pairs_a + extra * mean_a ** 2, n * pairs_b + extra * mean_b ** 2
    cross = n * cross + extra * mean_a * mean_b
    mean_a, mean_b = n * mean_a, n * mean_b
    return {
        "a_dag_a": mean_a,
        "b_dag_b": mean_b,
        "a_dag2_a2": pairs_a,
        "b_dag2_b2": pairs_b,
        "a_dag_b_dag_b_a": cross,
        "g2_a": pairs_a / mean_a ** 2,
        "g2_b": pairs_b / mean_b ** 2,
        "g2_ab": cross / (mean_a * mean_b),
        "r": cross ** 2 / (pairs_a * pairs_b),
        "tail_mass": state.tail_mass,
    }
