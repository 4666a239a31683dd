"""Multimode visibilities evaluated term by term as typeset.

The typeset multimode visibilities carry an undecorated ``p`` in some
denominator factors where every other factor uses ``p_bar``. These direct
evaluations take that symbol as a parameter so both readings can be compared
against the truncated-Fock oracle. They are not cancellation-safe and are only
used for that comparison.
"""
from pairchar.models.params import DetectorModel, SourceParams


def _term(p_bar: float, n: int, p_in_denominator: float, x: float) -> float:
    return ((1.0 - p_bar) / (1.0 - p_in_denominator * x)) ** n


def v_hom_as_printed(source: SourceParams, det: DetectorModel, bare_p: float) -> float:
    p, n, q, eta = source.p_bar, source.n_modes, 1.0 - det.p_dc, det.eta
    numerator = 2.0 * q * (
        _term(p, n, p, (1.0 - eta) ** 2) ** 0.5 - _term(p, n, p, (1.0 - eta / 2.0) ** 2)
    )
    denominator = (
        1.0
        - 2.0 * q * _term(p, n, p, (1.0 - eta / 2.0) ** 2)
        + q * q * _term(p, n, bare_p, (1.0 - eta) ** 2)
    )
    return numerator / denominator


def v_ent_as_printed(source: SourceParams, det: DetectorModel, bare_p: float) -> float:
    p, n, q, eta = source.p_bar, source.n_modes, 1.0 - det.p_dc, det.eta
    numerator = q * q * _term(p, n, p, (1.0 - eta) ** 2) - q * q * _term(p, n, p, 1.0 - eta) ** 2
    denominator = (
        2.0
        - 4.0 * q * _term(p, n, p, 1.0 - eta)
        + q * q * _term(p, n, bare_p, (1.0 - eta) ** 2)
        + q * q * _term(p, n, bare_p, 1.0 - eta) ** 2
    )
    return numerator / denominator


def g2_auto_as_printed(source: SourceParams, det: DetectorModel) -> float:
    """Reads the garbled single-click factor in the denominator as (1 - p_bar)**N."""
    p, n, q, eta = source.p_bar, source.n_modes, 1.0 - det.p_dc, det.eta
    numerator = 1.0 - 2.0 * q * _term(p, n, p, 1.0 - eta / 2.0) + q * q * _term(p, n, p, 1.0 - eta)
    return numerator / (1.0 - q * _term(p, n, p, 1.0 - eta / 2.0)) ** 2
