"""Threshold-detector expectations on truncated Fock states.

For ``n_modes`` independent copies of a state the click statistics factorize
over copies once each detector's outcome is reduced to "at least one photon
survived the loss". Copies are combined by OR-convolution of those survival
patterns and dark counts are applied once per detector at the end, so every
step adds or multiplies non-negative numbers.
"""
import math
from typing import Mapping

import numpy as np

from pairchar.fock_oracle.state import DetectorAssignment, FockState
from pairchar.models.errors import InvalidMode, InvalidParameter


def detection_probability(state: FockState, assignment: DetectorAssignment) -> float:
    """
    Probability that every detector of the assignment clicks:
    sum |amp|^2 prod_g click_prob(n_g). Truncation error is bounded by state.tail_mass.
    """
    assignment.check_against(state)
    counts, weights = state.count_marginal(assignment.groups)
    clicks = assignment.det.click_prob(counts)
    return float(np.dot(weights, np.prod(clicks, axis=1)))


def survival_pattern_distribution(state: FockState, assignment: DetectorAssignment) -> np.ndarray:
    """
    P(set of detectors that received at least one surviving photon), indexed by
    bit mask (bit g set means detector g saw a photon). Dark counts excluded.
    """
    assignment.check_against(state)
    counts, weights = state.count_marginal(assignment.groups)
    unseen = np.asarray(assignment.det.survival(counts), dtype=float)
    if assignment.det.eta == 1.0:
        seen = 1.0 - unseen
    else:
        seen = -np.expm1(counts * math.log1p(-assignment.det.eta))
    n_groups = counts.shape[1]
    dist = np.empty(1 << n_groups)
    for mask in range(1 << n_groups):
        factors = np.ones(len(counts))
        for g in range(n_groups):
            factors = factors * (seen[:, g] if mask >> g & 1 else unseen[:, g])
        dist[mask] = float(np.dot(weights, factors))
    return dist


def or_convolve(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Distribution of the union of two independent detector patterns."""
    out = np.zeros_like(first)
    for a, pa in enumerate(first):
        if pa == 0.0:
            continue
        for b, pb in enumerate(second):
            out[a | b] += pa * pb
    return out


def combine_copies(dist: np.ndarray, n_copies: int) -> np.ndarray:
    """Pattern distribution of ``n_copies`` independent copies, by repeated squaring."""
    if n_copies < 1:
        raise InvalidParameter("n_copies must be >= 1", {"n_copies": n_copies})
    result = None
    power = dist
    while n_copies:
        if n_copies & 1:
            result = power if result is None else or_convolve(result, power)
        n_copies >>= 1
        if n_copies:
            power = or_convolve(power, power)
    return result


def apply_dark_counts(dist: np.ndarray, p_dc: float) -> np.ndarray:
    """Adds independent dark counts (probability p_dc per detector) to a survival pattern distribution."""
    n_groups = int(dist.size).bit_length() - 1
    out = np.zeros_like(dist)
    for survived, weight in enumerate(dist):
        if weight == 0.0:
            continue
        idle = [g for g in range(n_groups) if not survived >> g & 1]
        for subset in range(1 << len(idle)):
            dark = 0
            factor = weight
            for position, g in enumerate(idle):
                if subset >> position & 1:
                    dark |= 1 << g
                    factor *= p_dc
                else:
                    factor *= 1.0 - p_dc
            out[survived | dark] += factor
    return out


def click_pattern_distribution(
    state: FockState, assignment: DetectorAssignment, n_modes: int = 1
) -> np.ndarray:
    """Click-pattern distribution for ``n_modes`` independent copies of ``state``."""
    survived = combine_copies(survival_pattern_distribution(state, assignment), n_modes)
    return apply_dark_counts(survived, assignment.det.p_dc)


def coincidence_probability(
    state: FockState, assignment: DetectorAssignment, n_modes: int = 1
) -> float:
    """Probability that all detectors click, for ``n_modes`` independent copies."""
    if n_modes == 1:
        return detection_probability(state, assignment)
    return float(click_pattern_distribution(state, assignment, n_modes)[-1])


def generating_moment(state: FockState, bases: Mapping[int, float], n_modes: int = 1) -> float:
    """<prod_i x_i^{n_i}> over the state, raised to ``n_modes`` for independent copies."""
    for mode in bases:
        state.check_mode(mode)
    if not bases:
        raise InvalidMode("at least one mode base is required", {})
    occupations = state.occupations
    factors = np.ones(len(occupations))
    for mode, base in bases.items():
        factors = factors * np.power(float(base), occupations[:, mode])
    return float(np.dot(state.probabilities, factors)) ** n_modes
