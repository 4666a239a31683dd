"""Photon-number sampling and threshold detection for single trials."""

import numpy as np

from pairchar.fock_oracle.state import DetectorAssignment, FockState
from pairchar.mc_sampler.records import ClickRecord
from pairchar.models.errors import InvalidParameter


def sample_occupations(
    state: FockState, rng: np.random.Generator, trials: int, n_modes: int = 1
) -> np.ndarray:
    """
    Draws occupation vectors from |amp|^2, renormalized over the kept states
    (the same law as rejecting draws that land in the truncated tail).
    For n_modes > 1 the occupations of independent copies are summed.
    :return: array of shape (trials, state.mode_count)
    """
    if trials < 0:
        raise InvalidParameter("trials must be non-negative", {"trials": trials})
    weights = state.probabilities
    total = weights.sum()
    if total <= 0:
        raise InvalidParameter("state has no probability mass", {"cutoff": state.cutoff})
    picks = rng.choice(len(weights), size=(trials, n_modes), p=weights / total)
    return state.occupations[picks].sum(axis=1)


def detect_many(
    occupations: np.ndarray, assignment: DetectorAssignment, rng: np.random.Generator
) -> np.ndarray:
    """
    Binomial loss with efficiency eta on each detector's photons, then an
    independent dark count with probability p_dc.
    :return: boolean click array of shape (trials, detectors)
    """
    counts = assignment.group_counts(np.atleast_2d(occupations))
    det = assignment.det
    survived = rng.binomial(counts, det.eta) > 0
    dark = rng.random(counts.shape) < det.p_dc
    return survived | dark


def detect(
    occupation, assignment: DetectorAssignment, rng: np.random.Generator, trial_id: int = 0
) -> ClickRecord:
    clicks = detect_many(np.asarray(occupation)[None, :], assignment, rng)[0]
    return ClickRecord(trial_id=trial_id, clicks=tuple(bool(c) for c in clicks))


def pattern_indices(clicks: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(clicks.shape[1])
    return clicks.astype(np.int64) @ weights


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    """
    Independent generator for one block of one setup. Streams depend only on
    (seed, stream, block), never on how blocks are spread over workers.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(sequence))
