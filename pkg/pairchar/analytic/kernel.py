"""Stable building blocks for threshold-detector expectations.

Every closed form reduces to generating-function values ``G(x)**N`` with
``G(x) = (1 - p) / (1 - p x)``. Losses ``u = 1 - x`` are passed explicitly so
that ``1 - x`` is never formed by subtraction, and no-click gaps
``1 - q G**N`` (``q = 1 - p_dc``) come from ``expm1``.
"""
import math
from dataclasses import dataclass

from pairchar.models.params import DetectorModel, SourceParams


def log_gen(p: float, loss: float) -> float:
    """log G(1 - loss) for a single mode."""
    return -math.log1p(p * loss / (1.0 - p))


def log_excess(p: float, u: float, v: float, w: float, defect: float) -> float:
    """
    log G(1-w) - log G(1-u) - log G(1-v) for a single mode, where
    ``defect = u + v - w`` is supplied exactly by the caller.
    """
    bracket = p * (1.0 - p) * defect + p * p * u * v
    return math.log1p(bracket / ((1.0 - p) * (1.0 - p + p * w)))


@dataclass(frozen=True)
class ClickKernel:
    """Expectations of no-click products for one source/detector pair."""

    p: float
    n_modes: int
    p_dc: float

    @classmethod
    def of(cls, source: SourceParams, det: DetectorModel) -> "ClickKernel":
        return cls(p=float(source.p_bar), n_modes=source.n_modes, p_dc=det.p_dc)

    @property
    def q(self) -> float:
        return 1.0 - self.p_dc

    def tilted(self, factor: float) -> "ClickKernel":
        """Kernel of the distribution reweighted by ``factor**n``."""
        return ClickKernel(p=self.p * factor, n_modes=self.n_modes, p_dc=self.p_dc)

    def log_moment(self, loss: float) -> float:
        return self.n_modes * log_gen(self.p, loss)

    def moment(self, loss: float) -> float:
        """<(1 - loss)**n> over all modes."""
        return math.exp(self.log_moment(loss))

    def click(self, loss: float, power: float = 1.0) -> float:
        """1 - q <(1 - loss)**n>**power, a single-detector click probability."""
        lg = power * self.log_moment(loss)
        return -math.expm1(lg) + self.p_dc * math.exp(lg)

    def excess(self, u: float, v: float, w: float, defect: float) -> float:
        """<x^n y^n'>-type joint moment minus the product of marginals, >= 0."""
        lg = self.log_moment(u) + self.log_moment(v)
        return math.exp(lg) * math.expm1(self.n_modes * log_excess(self.p, u, v, w, defect))

    def coincidence(self, u: float, v: float, w: float, defect: float) -> float:
        """Two-detector click probability written as a sum of non-negative terms."""
        return self.click(u) * self.click(v) + self.q ** 2 * self.excess(u, v, w, defect)
