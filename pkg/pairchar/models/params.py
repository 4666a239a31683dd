"""Detector and source parameters.

A threshold detector clicks with probability ``1 - (1 - p_dc)(1 - eta)**n``
for ``n`` incident photons. A source emits ``n_modes`` independent two-mode
squeezed vacua, each with per-mode emission probability ``p_bar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral, Real
from typing import Union

import numpy as np

from pairchar.models.errors import InvalidParameter

Count = Union[int, np.ndarray]


def _check_probability(name: str, value, upper_open: bool) -> None:
    if not isinstance(value, Real) or math.isnan(value):
        raise InvalidParameter(f"{name} must be a real number", {name: value})
    if value < 0 or value > 1 or (upper_open and value == 1):
        bound = "[0, 1)" if upper_open else "[0, 1]"
        raise InvalidParameter(f"{name} must lie in {bound}", {name: value})


@dataclass(frozen=True)
class DetectorModel:
    """
    Threshold (click / no-click) detector.
    :param eta: total detection efficiency including transmission: float in [0, 1]
    :param p_dc: dark-count probability per detection window: float in [0, 1)
    """

    eta: float
    p_dc: float = 0.0

    def __post_init__(self) -> None:
        _check_probability("eta", self.eta, upper_open=False)
        _check_probability("p_dc", self.p_dc, upper_open=True)

    @classmethod
    def from_channel(
        cls, eta_detector: float, eta_transmission: float = 1.0, p_dc: float = 0.0
    ) -> "DetectorModel":
        """Folds channel transmission into the detector efficiency."""
        _check_probability("eta_detector", eta_detector, upper_open=False)
        _check_probability("eta_transmission", eta_transmission, upper_open=False)
        return cls(eta=eta_detector * eta_transmission, p_dc=p_dc)

    def survival(self, n: Count) -> Union[float, np.ndarray]:
        """Probability that none of ``n`` photons is detected, ``(1 - eta)**n``."""
        counts = _as_counts(n)
        if self.eta == 1.0:
            out = (counts == 0).astype(float)
        else:
            out = np.exp(counts * math.log1p(-self.eta))
        return out if out.ndim else float(out)

    def click_prob(self, n: Count) -> Union[float, np.ndarray]:
        """
        Click probability for ``n`` incident photons (scalar or array).
        Evaluated as ``(1 - s) + p_dc * s`` with ``1 - s`` from ``expm1`` so
        it neither underflows for large ``n`` nor cancels for small ``eta``.
        """
        counts = _as_counts(n)
        if self.eta == 1.0:
            detected = (counts > 0).astype(float)
        else:
            detected = -np.expm1(counts * math.log1p(-self.eta))
        out = detected + self.p_dc * (1.0 - detected)
        return out if out.ndim else float(out)

    def halved(self) -> "DetectorModel":
        """Same detector behind a lossless 50:50 split: efficiency ``eta / 2``."""
        return DetectorModel(eta=self.eta / 2.0, p_dc=self.p_dc)


def _as_counts(n: Count) -> np.ndarray:
    counts = np.asarray(n)
    if counts.dtype.kind not in "iu":
        if counts.dtype.kind != "f" or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise InvalidParameter("photon numbers must be integers", {"n": n})
    if np.any(counts < 0):
        raise InvalidParameter("photon numbers must be non-negative", {"n": n})
    return counts.astype(float)


def click_prob(det: DetectorModel, n: Count) -> Union[float, np.ndarray]:
    return det.click_prob(n)


def halved(det: DetectorModel) -> DetectorModel:
    return det.halved()


@dataclass(frozen=True)
class SourceParams:
    """
    Multimode pair source: ``n_modes`` independent two-mode squeezed vacua.
    :param p_bar: per-mode emission probability, P(n) = (1 - p_bar) p_bar**n
    :param n_modes: number of effective modes, N >= 1
    """

    p_bar: float
    n_modes: int = 1

    def __post_init__(self) -> None:
        _check_probability("p_bar", self.p_bar, upper_open=True)
        if isinstance(self.n_modes, bool) or not isinstance(self.n_modes, Integral):
            raise InvalidParameter("n_modes must be an integer", {"n_modes": self.n_modes})
        if self.n_modes < 1:
            raise InvalidParameter("n_modes must be >= 1", {"n_modes": self.n_modes})

    @classmethod
    def from_equivalent_p(cls, p: float, n_modes: int = 1) -> "SourceParams":
        """
        Per-mode probability with the same mean photon number as a single-mode
        source of emission probability ``p``: p_bar = p / (N - p (N - 1)).
        """
        _check_probability("p", p, upper_open=True)
        if isinstance(n_modes, bool) or not isinstance(n_modes, Integral) or n_modes < 1:
            raise InvalidParameter("n_modes must be an integer >= 1", {"n_modes": n_modes})
        return cls(p_bar=p / (n_modes - p * (n_modes - 1)), n_modes=n_modes)

    @property
    def equivalent_p(self) -> float:
        return self.n_modes * self.p_bar / (1 + (self.n_modes - 1) * self.p_bar)

    @property
    def mean_photons_per_mode(self) -> float:
        return self.p_bar / (1 - self.p_bar)

    @property
    def mean_photons(self) -> float:
        return self.n_modes * self.mean_photons_per_mode
