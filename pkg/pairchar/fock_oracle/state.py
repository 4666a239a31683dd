"""Sparse multimode Fock states.

A state maps occupation tuples to complex amplitudes. States are built in the
normalized Fock basis order by order, so factorials never appear explicitly
and large photon numbers neither overflow nor underflow. Beamsplitter
coefficients are summed in exact integer arithmetic.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from pairchar.models.errors import CutoffTooSmall, InvalidMode, InvalidParameter
from pairchar.models.params import DetectorModel

Occupation = Tuple[int, ...]
PairTerm = Tuple[int, int, float]


@dataclass(frozen=True)
class FockState:
    """
    :param mode_count: number of modes
    :param amplitudes: occupation tuple -> amplitude
    :param cutoff: largest total photon number kept
    :param tail_mass: bound on the probability discarded above the cutoff
    """

    mode_count: int
    amplitudes: Mapping[Occupation, complex]
    cutoff: int
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        if self.mode_count < 1:
            raise InvalidParameter("a state needs at least one mode", {"mode_count": self.mode_count})
        for occupation in self.amplitudes:
            if len(occupation) != self.mode_count:
                raise InvalidParameter("occupation length does not match mode_count",
                                       {"occupation": occupation, "mode_count": self.mode_count})
            if sum(occupation) > self.cutoff:
                raise InvalidParameter("occupation exceeds cutoff",
                                       {"occupation": occupation, "cutoff": self.cutoff})

    @cached_property
    def occupations(self) -> np.ndarray:
        if not self.amplitudes:
            return np.zeros((0, self.mode_count), dtype=np.int64)
        return np.array(list(self.amplitudes.keys()), dtype=np.int64).reshape(-1, self.mode_count)

    @cached_property
    def probabilities(self) -> np.ndarray:
        amps = np.fromiter(self.amplitudes.values(), dtype=complex, count=len(self.amplitudes))
        return np.abs(amps) ** 2

    @cached_property
    def _marginals(self) -> Dict[Tuple[Tuple[int, ...], ...], Tuple[np.ndarray, np.ndarray]]:
        return {}

    def count_marginal(self, groups: Tuple[Tuple[int, ...], ...]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Distinct photon numbers per mode group and their probabilities, cached
        per grouping so detector sweeps reuse one table.
        :return: (counts of shape (rows, groups), probabilities of shape (rows,))
        """
        cached = self._marginals.get(groups)
        if cached is None:
            occupations = self.occupations
            counts = np.stack([occupations[:, list(g)].sum(axis=1) for g in groups], axis=1)
            if len(counts):
                counts, inverse = np.unique(counts, axis=0, return_inverse=True)
                weights = np.bincount(inverse.ravel(), weights=self.probabilities, minlength=len(counts))
            else:
                weights = np.zeros(0)
            cached = self._marginals[groups] = (counts, weights)
        return cached

    @property
    def norm_squared(self) -> float:
        return float(self.probabilities.sum())

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.mode_count:
            raise InvalidMode(f"mode {mode} out of range", {"mode": mode, "mode_count": self.mode_count})

    def with_vacuum_modes(self, count: int = 1) -> "FockState":
        """Appends ``count`` empty modes."""
        pad = (0,) * count
        return FockState(
            mode_count=self.mode_count + count,
            amplitudes={occ + pad: amp for occ, amp in self.amplitudes.items()},
            cutoff=self.cutoff,
            tail_mass=self.tail_mass,
        )


def make_pair_exponential_state(
    terms: Sequence[PairTerm],
    norm: float,
    cutoff: int,
    mode_count: int | None = None,
    tail_tolerance: float | None = 1e-9,
) -> FockState:
    """
    Truncated ``norm * exp(sum_k c_k a_{i_k}^dag a_{j_k}^dag)|0>``.
    :param terms: (i, j, c_k) creation-pair terms, |c_k| < 1; i == j squeezes one mode
    :param norm: prefactor of the vacuum component
    :param cutoff: number of pair orders kept; the state holds up to 2 * cutoff photons
    :param tail_tolerance: raise CutoffTooSmall if the tail bound exceeds it (None disables)
    """
    if cutoff < 1:
        raise InvalidParameter("cutoff must be >= 1", {"cutoff": cutoff})
    for i, j, coefficient in terms:
        if abs(coefficient) >= 1:
            raise InvalidParameter("pair coefficients must satisfy |c| < 1", {"c": coefficient})
        if i < 0 or j < 0:
            raise InvalidMode("negative mode index", {"i": i, "j": j})
    if mode_count is None:
        mode_count = 1 + max((max(i, j) for i, j, _ in terms), default=0)
    if any(max(i, j) >= mode_count for i, j, _ in terms):
        raise InvalidMode("term refers to a mode beyond mode_count", {"mode_count": mode_count})
    ratio = _pair_series_ratio(terms, mode_count)
    if ratio >= 1.0:
        raise InvalidParameter("pair series does not converge", {"ratio": ratio})

    vacuum = (0,) * mode_count
    amplitudes: Dict[Occupation, complex] = {vacuum: complex(norm)}
    order: Dict[Occupation, complex] = {vacuum: complex(norm)}
    weights = [abs(norm) ** 2]
    for m in range(1, cutoff + 1):
        nxt: Dict[Occupation, complex] = defaultdict(complex)
        for occupation, amplitude in order.items():
            for i, j, coefficient in terms:
                raised = list(occupation)
                factor = math.sqrt(raised[i] + 1)
                raised[i] += 1
                factor *= math.sqrt(raised[j] + 1)
                raised[j] += 1
                nxt[tuple(raised)] += coefficient * amplitude * factor / m
        order = dict(nxt)
        for occupation, amplitude in order.items():
            amplitudes[occupation] = amplitudes.get(occupation, 0j) + amplitude
        weights.append(sum(abs(a) ** 2 for a in order.values()))

    tail = _geometric_tail(weights, ratio) if terms else 0.0
    if tail_tolerance is not None and tail > tail_tolerance:
        raise CutoffTooSmall(
            "truncated tail exceeds tolerance",
            {"cutoff": cutoff, "tail_mass": tail, "tolerance": tail_tolerance},
        )
    return FockState(mode_count=mode_count, amplitudes=amplitudes, cutoff=2 * cutoff, tail_mass=tail)


def _pair_series_ratio(terms: Sequence[PairTerm], mode_count: int) -> float:
    """
    Limit of the order-to-order weight ratio: the squared largest singular value
    of the symmetric pair matrix M in exp(a^dag.M.a^dag / 2).
    """
    if not terms:
        return 0.0
    matrix = np.zeros((mode_count, mode_count), dtype=complex)
    for i, j, coefficient in terms:
        matrix[i, j] += coefficient
        matrix[j, i] += coefficient
    return float(np.linalg.norm(matrix, 2)) ** 2


def _geometric_tail(weights: Sequence[float], limit_ratio: float) -> float:
    """
    Bounds the weight beyond the last order by a geometric series. Observed
    ratios either fall toward the limit (several equal squeezers) or rise
    toward it (single-mode squeezing), so the larger of the two dominates
    every later ratio.
    """
    last, previous = weights[-1], weights[-2]
    if last == 0.0:
        return 0.0
    observed = last / previous if previous > 0 else math.inf
    ratio = max(observed, limit_ratio)
    if ratio >= 1.0:
        return math.inf
    return last * ratio / (1.0 - ratio)


def apply_beamsplitter(state: FockState, mode_i: int, mode_j: int, t: float) -> FockState:
    """
    Lossless beamsplitter of transmissivity ``t`` on two modes:
    a^dag -> sqrt(t) d^dag + sqrt(1-t) dbar^dag, b^dag -> sqrt(1-t) d^dag - sqrt(t) dbar^dag,
    with d, dbar taking the slots of a (mode_i) and b (mode_j).

    ``t`` is taken as the exact binary fraction of the float. The signed
    binomial sums are accumulated in integers and only the final square root
    is rounded, so every output coefficient carries a relative error near eps.
    """
    state.check_mode(mode_i)
    state.check_mode(mode_j)
    if mode_i == mode_j:
        raise InvalidMode("beamsplitter needs two distinct modes", {"mode_i": mode_i, "mode_j": mode_j})
    if not 0 <= t <= 1:
        raise InvalidParameter("transmissivity must lie in [0, 1]", {"t": t})
    num, den = float(t).as_integer_ratio()

    out: Dict[Occupation, complex] = defaultdict(complex)
    for occupation, amplitude in state.amplitudes.items():
        base = list(occupation)
        n_i, n_j = occupation[mode_i], occupation[mode_j]
        for to_d, coefficient in _beamsplitter_row(n_i, n_j, num, den):
            base[mode_i], base[mode_j] = to_d, n_i + n_j - to_d
            out[tuple(base)] += amplitude * coefficient
    return FockState(mode_count=state.mode_count, amplitudes=dict(out),
                     cutoff=state.cutoff, tail_mass=state.tail_mass)


@lru_cache(maxsize=65536)
def _beamsplitter_row(n_i: int, n_j: int, num: int, den: int) -> Tuple[Tuple[int, float], ...]:
    """
    Non-zero <to_d, n - to_d| U |n_i, n_j> for t = num / den.

    With r = 1 - t, the k-th path sends k of the a photons and to_d - k of the
    b photons to d and carries sqrt(t)**(2k + n_j - to_d) * sqrt(r)**(n_i + to_d - 2k).
    Pulling out the smallest powers leaves t**(k - k0) * r**(k1 - k), an integer
    sum once scaled by den**(k1 - k0).
    """
    rest = den - num
    n = n_i + n_j
    row = []
    for to_d in range(n + 1):
        k0, k1 = max(0, to_d - n_j), min(n_i, to_d)
        total = 0
        for k in range(k0, k1 + 1):
            term = math.comb(n_i, k) * math.comb(n_j, to_d - k) * num ** (k - k0) * rest ** (k1 - k)
            total += -term if (n_j - to_d + k) % 2 else term
        if total == 0:
            continue
        t_power, r_power = n_j - to_d + 2 * k0, n_i + to_d - 2 * k1
        squared = (
            total * total * num ** t_power * rest ** r_power
            * math.factorial(to_d) * math.factorial(n - to_d)
        ) / (den ** (2 * (k1 - k0) + t_power + r_power) * math.factorial(n_i) * math.factorial(n_j))
        row.append((to_d, math.copysign(math.sqrt(squared), total)))
    return tuple(row)


def split_mode(state: FockState, mode: int, t: float = 0.5) -> Tuple[FockState, int]:
    """Splits ``mode`` against a fresh vacuum; returns the state and the index of the new output."""
    state.check_mode(mode)
    extended = state.with_vacuum_modes(1)
    partner = extended.mode_count - 1
    return apply_beamsplitter(extended, mode, partner, t), partner


@dataclass(frozen=True)
class DetectorAssignment:
    """
    Threshold detectors, each watching the summed occupation of a group of modes.
    :param groups: disjoint, non-empty mode groups; group g feeds detector g
    """

    groups: Tuple[Tuple[int, ...], ...]
    det: DetectorModel
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        seen = set()
        for group in self.groups:
            if not group:
                raise InvalidMode("detector groups must be non-empty", {"groups": self.groups})
            if seen.intersection(group):
                raise InvalidMode("detector groups must be disjoint", {"groups": self.groups})
            seen.update(group)
        if self.names and len(self.names) != len(self.groups):
            raise InvalidParameter("one name per detector group", {"names": self.names})

    @classmethod
    def of(cls, det: DetectorModel, *groups: Iterable[int], names: Sequence[str] = ()) -> "DetectorAssignment":
        return cls(groups=tuple(tuple(g) for g in groups), det=det, names=tuple(names))

    @property
    def detector_names(self) -> Tuple[str, ...]:
        return self.names or tuple(f"det{g}" for g in range(len(self.groups)))

    def check_against(self, state: FockState) -> None:
        for group in self.groups:
            for mode in group:
                state.check_mode(mode)

    def group_counts(self, occupations: np.ndarray) -> np.ndarray:
        """Photon number seen by each detector, shape (rows, groups)."""
        return np.stack([occupations[:, list(g)].sum(axis=1) for g in self.groups], axis=1)
