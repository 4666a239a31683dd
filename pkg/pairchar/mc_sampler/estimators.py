"""Monte-Carlo estimators for the measured metrics.

Each metric is a function of coincidence frequencies ("every detector in the
mask clicked") from one or two independent setups. Standard errors come from
the delta method on the multinomial over click patterns.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from pairchar.fock_oracle.oracle import (
    CutoffPolicy,
    hom_delayed_state,
    hom_dip_state,
    polarization_bell_state,
    split_both_state,
    split_signal_state,
    twin_beam_state,
)
from pairchar.fock_oracle.state import DetectorAssignment, FockState
from pairchar.mc_sampler.records import CountTally, EstimatorResult
from pairchar.mc_sampler.sampler import block_rng, detect_many, pattern_indices, sample_occupations
from pairchar.models.errors import CutoffTooSmall, DegenerateCounts, InvalidParameter
from pairchar.models.metrics import MetricKind
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Setup:
    name: str
    build: Callable[[float, int], FockState]
    groups: Tuple[Tuple[int, ...], ...]
    detector_names: Tuple[str, ...]


TWIN = Setup("twin", twin_beam_state, ((0,), (1,)), ("a", "b"))
SPLIT_SIGNAL = Setup("split_signal", split_signal_state, ((0,), (2,), (1,)), ("d", "dbar", "b"))
SPLIT_BOTH = Setup(
    "split_both", split_both_state, ((0,), (2,), (1,), (3,)), ("d_a", "dbar_a", "d_b", "dbar_b")
)
HOM_DIP = Setup("hom_dip", hom_dip_state, ((0,), (1,)), ("d", "dbar"))
HOM_DELAYED = Setup("hom_delayed", hom_delayed_state, ((0, 2), (1, 3)), ("d", "dbar"))
BELL = Setup("bell", polarization_bell_state, ((0,), (3,), (2,)), ("a_h", "b_v", "b_h"))


@dataclass(frozen=True)
class EstimatorPlan:
    """
    :param events: (setup index, detector mask) per coincidence frequency
    :param value: metric from the frequency vector
    :param gradient: d value / d frequency
    :param denominators: event positions that must be non-zero
    """

    setups: Tuple[Setup, ...]
    events: Tuple[Tuple[int, int], ...]
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    denominators: Tuple[int, ...]


def _monomial_plan(setup: Setup, masks: Sequence[int], powers: Sequence[int]) -> EstimatorPlan:
    powers_arr = np.asarray(powers, dtype=float)

    def value(e: np.ndarray) -> float:
        return float(np.prod(e ** powers_arr))

    def gradient(e: np.ndarray) -> np.ndarray:
        return value(e) * powers_arr / e

    return EstimatorPlan(
        setups=(setup,),
        events=tuple((0, m) for m in masks),
        value=value,
        gradient=gradient,
        denominators=tuple(i for i, k in enumerate(powers) if k < 0),
    )


def _hom_plan() -> EstimatorPlan:
    # V = 1 - P_dip / P_delayed from two independent runs
    return EstimatorPlan(
        setups=(HOM_DIP, HOM_DELAYED),
        events=((0, 0b11), (1, 0b11)),
        value=lambda e: float(1.0 - e[0] / e[1]),
        gradient=lambda e: np.array([-1.0 / e[1], e[0] / e[1] ** 2]),
        denominators=(1,),
    )


def _entanglement_plan() -> EstimatorPlan:
    def gradient(e: np.ndarray) -> np.ndarray:
        total = (e[0] + e[1]) ** 2
        return np.array([2.0 * e[1] / total, -2.0 * e[0] / total])

    return EstimatorPlan(
        setups=(BELL,),
        events=((0, 0b011), (0, 0b101)),
        value=lambda e: float((e[0] - e[1]) / (e[0] + e[1])),
        gradient=gradient,
        denominators=(0, 1),
    )


PLANS: Dict[MetricKind, Callable[[], EstimatorPlan]] = {
    # C_ab^2 / (C_aa C_bb) with a and b each split 50:50
    MetricKind.R_TILDE: lambda: _monomial_plan(SPLIT_BOTH, (0b0101, 0b0011, 0b1100), (2, -1, -1)),
    MetricKind.G2_AUTO: lambda: _monomial_plan(SPLIT_SIGNAL, (0b011, 0b001, 0b010), (1, -1, -1)),
    # C(d, dbar, b) C(b) / (C(d, b) C(dbar, b))
    MetricKind.G2_CONDITIONAL: lambda: _monomial_plan(
        SPLIT_SIGNAL, (0b111, 0b100, 0b101, 0b110), (1, 1, -1, -1)
    ),
    MetricKind.G2_CROSS: lambda: _monomial_plan(TWIN, (0b11, 0b01, 0b10), (1, -1, -1)),
    MetricKind.V_HOM: _hom_plan,
    MetricKind.V_ENT: _entanglement_plan,
}


@dataclass
class SimulationRun:
    metric_kind: MetricKind
    plan: EstimatorPlan
    tallies: List[CountTally]
    clicks: List[Optional[np.ndarray]]
    cutoff: int


def _state_for(setup: Setup, source: SourceParams, policy: CutoffPolicy, tail_tolerance: float) -> FockState:
    order = policy.start_order(float(source.p_bar))
    state = setup.build(float(source.p_bar), order)
    if state.tail_mass > tail_tolerance:
        raise CutoffTooSmall("sampling state tail exceeds tolerance",
                             {"p_bar": source.p_bar, "tail_mass": state.tail_mass})
    return state


def _run_block(state, assignment, n_modes, seed, stream, block, size, keep):
    rng = block_rng(seed, stream, block)
    occupations = sample_occupations(state, rng, size, n_modes)
    clicks = detect_many(occupations, assignment, rng)
    patterns = pattern_indices(clicks)
    return np.bincount(patterns, minlength=1 << clicks.shape[1]), (clicks if keep else None)


def simulate(
    metric_kind: MetricKind,
    source: SourceParams,
    det: DetectorModel,
    trials: int,
    seed: int,
    settings=None,
    workers: Optional[int] = None,
    keep_clicks: bool = False,
    progress: bool = False,
) -> SimulationRun:
    """Runs every setup of the metric for ``trials`` trials each."""
    if metric_kind not in PLANS:
        raise InvalidParameter(f"no Monte-Carlo estimator for {metric_kind.value}",
                               {"metric": metric_kind.value})
    if settings is None:
        from pairchar.config.config_loader import load_settings

        settings = load_settings()
    mc = settings.monte_carlo
    if trials < 1:
        raise InvalidParameter("trials must be >= 1", {"trials": trials})
    if trials < mc.min_trials:
        logger.warning("only %d trials; coincidence counts are likely degenerate", trials)
    policy = CutoffPolicy.from_settings(settings)
    plan = PLANS[metric_kind]()
    workers = workers or mc.workers
    block_size = mc.block_size
    sizes = [min(block_size, trials - start) for start in range(0, trials, block_size)]

    tallies, all_clicks, cutoff = [], [], 0
    for stream, setup in enumerate(plan.setups):
        state = _state_for(setup, source, policy, mc.state_tail_tolerance)
        cutoff = max(cutoff, state.cutoff)
        assignment = DetectorAssignment(setup.groups, det, setup.detector_names)
        jobs = [
            (state, assignment, source.n_modes, seed, stream, block, size, keep_clicks)
            for block, size in enumerate(sizes)
        ]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(lambda job: _run_block(*job), jobs)
            if progress:
                from tqdm import tqdm

                results = tqdm(results, total=len(jobs), desc=setup.name)
            results = list(results)
        tally = CountTally(setup.detector_names)
        for counts, _ in results:
            tally.counts += counts.astype(np.int64)
        tallies.append(tally)
        all_clicks.append(np.concatenate([c for _, c in results]) if keep_clicks else None)
        logger.debug("%s: %d trials, counts %s", setup.name, tally.trials, tally.counts_by_pattern())
    return SimulationRun(metric_kind, plan, tallies, all_clicks, cutoff)


def estimate_from_tallies(metric_kind: MetricKind, plan: EstimatorPlan, tallies: Sequence[CountTally]) -> EstimatorResult:
    """
    Point estimate from raw frequencies. The standard error is evaluated with
    frequencies floored at one count, so an empty numerator still reports the
    resolution of the run instead of zero.
    """
    counts = np.array([tallies[s].event_count(m) for s, m in plan.events], dtype=float)
    trials = np.array([tallies[s].trials for s, _ in plan.events], dtype=float)
    for i in plan.denominators:
        if counts[i] == 0:
            setup, mask = plan.events[i]
            raise DegenerateCounts(
                "a denominator coincidence count is zero",
                {"metric": metric_kind.value, "setup": plan.setups[setup].name,
                 "mask": mask, "trials": int(trials[i])},
            )
    freqs = counts / trials
    value = plan.value(freqs)

    floored = np.maximum(counts, 1.0) / trials
    n = len(plan.events)
    cov = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            (si, mi), (sj, mj) = plan.events[i], plan.events[j]
            if si != sj:
                continue
            joint = max(tallies[si].event_count(mi | mj), 1) / trials[i]
            cov[i, j] = (joint - floored[i] * floored[j]) / trials[i]
    grad = plan.gradient(floored)
    variance = float(grad @ cov @ grad)
    summary = {
        f"{plan.setups[s].name}:{'+'.join(name for g, name in enumerate(plan.setups[s].detector_names) if m >> g & 1)}": int(c)
        for (s, m), c in zip(plan.events, counts)
    }
    return EstimatorResult(
        metric_kind=metric_kind,
        value=value,
        std_error=float(np.sqrt(max(variance, 0.0))),
        trials=int(tallies[0].trials),
        counts=summary,
    )


def estimate_metric(
    metric_kind: MetricKind,
    source: SourceParams,
    det: DetectorModel,
    trials: int,
    seed: int,
    settings=None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> EstimatorResult:
    run = simulate(metric_kind, source, det, trials, seed, settings, workers, progress=progress)
    return estimate_from_tallies(metric_kind, run.plan, run.tallies)
