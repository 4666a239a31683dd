"""Cross-checks the closed forms against the Fock oracle and the sampler.

The report lists, per metric, the largest relative closed-form/oracle
deviation over the configured grid, the generating-function identities, the
ideal moment identity, HOM coalescence, and the comparison of both readings
of the typeset multimode visibilities.
"""
import itertools
import logging
import math
from typing import Any, Dict, List, Optional

from pairchar.analytic.closed_forms import closed_form_value, r_ideal
from pairchar.analytic.printed_forms import g2_auto_as_printed, v_ent_as_printed, v_hom_as_printed
from pairchar.fock_oracle.detection import generating_moment
from pairchar.fock_oracle.oracle import (
    CutoffPolicy,
    hom_dip_state,
    ideal_normal_ordered_moments,
    oracle_multimode,
    squeezed_dip_state,
)
from pairchar.fock_oracle.state import FockState, apply_beamsplitter, make_pair_exponential_state
from pairchar.mc_sampler.estimators import estimate_metric
from pairchar.models.errors import PairCharError
from pairchar.models.metrics import MEASURED_METRICS, MetricKind
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)


def relative_deviation(value: float, reference: float) -> float:
    if value == reference:
        return 0.0
    return abs(value - reference) / max(abs(reference), 1e-300)


def _progress(iterable, enabled: bool, total: int, desc: str):
    if not enabled:
        return iterable
    from tqdm import tqdm

    return tqdm(iterable, total=total, desc=desc)


def oracle_equivalence(settings, tolerance: float, quick: bool = False, progress: bool = False) -> Dict[str, Any]:
    val = settings.validate
    policy = CutoffPolicy.from_settings(settings)
    n_modes = val.quick_n_modes if quick else val.n_modes
    per_metric: Dict[str, Dict[str, Any]] = {
        k.value: {"max_rel_dev": 0.0, "cells": 0} for k in MEASURED_METRICS
    }
    failures: List[Dict[str, Any]] = []
    cells = list(itertools.product(val.p, n_modes, val.eta, val.p_dc, MEASURED_METRICS))
    for p, n, eta, p_dc, kind in _progress(cells, progress, len(cells), "oracle"):
        source = SourceParams.from_equivalent_p(p, n)
        det = DetectorModel(eta=eta, p_dc=p_dc)
        cell = {"metric": kind.value, "p": p, "p_bar": source.p_bar, "n_modes": n, "eta": eta, "p_dc": p_dc}
        try:
            closed = closed_form_value(kind, source, det)
            oracle = oracle_multimode(kind, source, det, policy)
        except PairCharError as exc:
            failures.append({**cell, "error": exc.to_dict()})
            continue
        dev = relative_deviation(closed, oracle.value)
        summary = per_metric[kind.value]
        summary["cells"] += 1
        summary["max_rel_dev"] = max(summary["max_rel_dev"], dev)
        if not dev < tolerance:
            failures.append({**cell, "closed_form": closed, "oracle": oracle.value, "rel_dev": dev,
                             "cutoff": oracle.diagnostics.get("cutoff")})
    return {"tolerance": tolerance, "metrics": per_metric, "failures": failures,
            "passed": not failures}


def _identity_order(ratio: float, tolerance: float) -> int:
    """Pair order at which a geometric series of the given ratio has relative tail below ``tolerance``."""
    if ratio <= 0:
        return 1
    return max(1, math.ceil(math.log(tolerance) / math.log(ratio)))


def generating_identities(settings, max_order: int) -> Dict[str, Any]:
    """<x^n_a> = (1-p)/(1-px), <x^(n_a+n_b)> = (1-p)/(1-px^2), and 1/sqrt(1-px^2) for one squeezed mode."""
    val = settings.validate
    tolerance = val.identity_tolerance
    checks, failures = [], []
    for p, x in itertools.product(val.identity_p, val.identity_x):
        orders = {
            "signal": _identity_order(p * x, tolerance / 10.0),
            "pair": _identity_order(p * x * x, tolerance / 10.0),
            "squeezed": _identity_order(p * x * x, tolerance / 100.0),
        }
        if max(orders.values()) > max_order:
            failures.append({"p": p, "x": x, "error": "identity needs a cutoff above the ceiling",
                             "orders": orders})
            continue
        twin = make_pair_exponential_state([(0, 1, math.sqrt(p))], math.sqrt(1 - p),
                                           max(orders["signal"], orders["pair"]), tail_tolerance=None)
        squeezed = make_pair_exponential_state([(0, 0, math.sqrt(p) / 2.0)], 1.0, orders["squeezed"],
                                               tail_tolerance=None)
        results = {
            "signal": (generating_moment(twin, {0: x}), (1 - p) / (1 - p * x)),
            "pair": (generating_moment(twin, {0: x, 1: x}), (1 - p) / (1 - p * x * x)),
            "squeezed": (generating_moment(squeezed, {0: x}), 1.0 / math.sqrt(1 - p * x * x)),
        }
        for name, (computed, expected) in results.items():
            dev = relative_deviation(computed, expected)
            entry = {"identity": name, "p": p, "x": x, "computed": computed, "expected": expected,
                     "rel_dev": dev}
            checks.append(entry)
            if not dev < tolerance:
                failures.append(entry)
    return {"tolerance": tolerance, "checks": checks, "failures": failures, "passed": not failures}


def ideal_identity(settings) -> Dict[str, Any]:
    val = settings.validate
    tolerance = val.identity_tolerance
    policy = CutoffPolicy.from_settings(settings)
    checks, failures = [], []
    for p in val.ideal_p:
        m = ideal_normal_ordered_moments(SourceParams(p_bar=p), policy)
        devs = {
            "sqrt_relation": relative_deviation(m["g2_ab"], math.sqrt(m["r"] * m["g2_a"] * m["g2_b"])),
            "r_ideal": relative_deviation(m["r"], r_ideal(p)),
            "g2_thermal": relative_deviation(m["g2_a"], 2.0),
            "g2_ab_ideal": relative_deviation(m["g2_ab"], 1.0 + 1.0 / p),
        }
        entry = {"p": p, **devs}
        checks.append(entry)
        if any(not d < tolerance for d in devs.values()):
            failures.append(entry)
    return {"tolerance": tolerance, "checks": checks, "failures": failures, "passed": not failures}


def hom_coalescence(settings) -> Dict[str, Any]:
    one_one = FockState(mode_count=2, amplitudes={(1, 1): 1.0 + 0j}, cutoff=2)
    out = apply_beamsplitter(one_one, 0, 1, 0.5)
    leftover = abs(out.amplitudes.get((1, 1), 0j))
    policy = CutoffPolicy.from_settings(settings)
    dip_devs = {}
    for p in (0.1, 0.5):
        order = policy.start_order(p)
        from_beamsplitter = hom_dip_state(p, order)
        closed = squeezed_dip_state(p, order)
        keys = set(from_beamsplitter.amplitudes) | set(closed.amplitudes)
        dip_devs[str(p)] = max(
            abs(from_beamsplitter.amplitudes.get(k, 0j) - closed.amplitudes.get(k, 0j)) for k in keys
        )
    passed = leftover <= 1e-14 and all(d <= 1e-10 for d in dip_devs.values())
    return {"one_one_amplitude": leftover, "dip_state_max_abs_dev": dip_devs, "passed": passed}


def reading_arbitration(settings) -> List[Dict[str, Any]]:
    """Both readings of the undecorated p in the multimode visibilities, against the oracle."""
    cell = settings.validate.arbitration
    source = SourceParams.from_equivalent_p(cell["p"], int(cell["n_modes"]))
    det = DetectorModel(eta=cell["eta"], p_dc=cell["p_dc"])
    policy = CutoffPolicy.from_settings(settings)
    rows = []
    readings = [
        ("v_hom", MetricKind.V_HOM, "p_bar", lambda: v_hom_as_printed(source, det, source.p_bar)),
        ("v_hom", MetricKind.V_HOM, "p", lambda: v_hom_as_printed(source, det, source.equivalent_p)),
        ("v_ent", MetricKind.V_ENT, "p_bar", lambda: v_ent_as_printed(source, det, source.p_bar)),
        ("v_ent", MetricKind.V_ENT, "p", lambda: v_ent_as_printed(source, det, source.equivalent_p)),
        ("g2_auto", MetricKind.G2_AUTO, "(1-p_bar)^N", lambda: g2_auto_as_printed(source, det)),
    ]
    oracle_values = {}
    for name, kind, reading, compute in readings:
        if kind not in oracle_values:
            oracle_values[kind] = oracle_multimode(kind, source, det, policy).value
        value = compute()
        rows.append({"metric": name, "reading": reading, "value": value, "oracle": oracle_values[kind],
                     "rel_dev": relative_deviation(value, oracle_values[kind]),
                     "p": source.equivalent_p, "p_bar": source.p_bar, "n_modes": source.n_modes,
                     "eta": det.eta, "p_dc": det.p_dc})
    return rows


def monte_carlo_consistency(settings, progress: bool = False, workers: Optional[int] = None) -> Dict[str, Any]:
    mc = settings.validate.mc
    groups, failures = [], []
    cells = list(itertools.product(mc.p, mc.eta, mc.p_dc, mc.n_modes, MEASURED_METRICS))
    for p, eta, p_dc, n, kind in _progress(cells, progress, len(cells), "monte carlo"):
        source = SourceParams.from_equivalent_p(p, n)
        det = DetectorModel(eta=eta, p_dc=p_dc)
        expected = closed_form_value(kind, source, det)
        inside = 0
        for seed in range(mc.seeds):
            try:
                result = estimate_metric(kind, source, det, mc.trials, seed, settings, workers)
            except PairCharError as exc:
                logger.info("seed %d of %s degenerate: %s", seed, kind.value, exc.message)
                continue
            if abs(result.value - expected) <= mc.sigma * result.std_error:
                inside += 1
        entry = {"metric": kind.value, "p": p, "eta": eta, "p_dc": p_dc, "n_modes": n,
                 "expected": expected, "fraction_inside": inside / mc.seeds}
        groups.append(entry)
        if entry["fraction_inside"] < mc.pass_fraction:
            failures.append(entry)
    return {"sigma": mc.sigma, "pass_fraction": mc.pass_fraction, "cells": groups,
            "failures": failures, "passed": not failures}


def run_validation(
    settings,
    tolerance: Optional[float] = None,
    quick: bool = False,
    include_mc: bool = False,
    progress: bool = False,
    workers: Optional[int] = None,
) -> Dict[str, Any]:
    tolerance = settings.validate.tolerance if tolerance is None else tolerance
    policy = CutoffPolicy.from_settings(settings)
    report: Dict[str, Any] = {
        "closed_form_vs_oracle": oracle_equivalence(settings, tolerance, quick, progress),
        "generating_identities": generating_identities(settings, policy.max_order),
        "ideal_identity": ideal_identity(settings),
        "hom_coalescence": hom_coalescence(settings),
        "reading_arbitration": reading_arbitration(settings),
    }
    if include_mc:
        report["monte_carlo"] = monte_carlo_consistency(settings, progress, workers)
    report["passed"] = all(
        section["passed"] for section in report.values() if isinstance(section, dict) and "passed" in section
    )
    level = logging.INFO if report["passed"] else logging.ERROR
    logger.log(level, "%s validation", "✅ passed" if report["passed"] else "❌ failed")
    return report
