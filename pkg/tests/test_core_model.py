from fractions import Fraction

import numpy as np
import pytest

from pairchar.models import DetectorModel, InvalidParameter, SourceParams, click_prob, halved


class TestDetectorModel:
    def test_perfect_detector_clicks_on_one_photon(self):
        assert click_prob(DetectorModel(eta=1.0, p_dc=0.0), 1) == 1.0

    def test_no_photons_gives_dark_count_probability(self):
        assert click_prob(DetectorModel(eta=0.3, p_dc=1e-3), 0) == pytest.approx(1e-3, rel=1e-15)

    def test_matches_textbook_law(self):
        det = DetectorModel(eta=0.01, p_dc=1e-6)
        expected = 1 - (1 - 1e-6) * 0.99 ** 3
        assert click_prob(det, 3) == pytest.approx(expected, rel=1e-12)

    def test_small_efficiency_keeps_relative_precision(self):
        det = DetectorModel(eta=1e-12, p_dc=0.0)
        assert det.click_prob(1) == pytest.approx(1e-12, rel=1e-10)

    def test_large_photon_number_saturates(self):
        assert click_prob(DetectorModel(eta=0.5, p_dc=0.0), 5000) == 1.0

    def test_array_input(self):
        det = DetectorModel(eta=0.5, p_dc=0.0)
        np.testing.assert_allclose(det.click_prob(np.array([0, 1, 2])), [0.0, 0.5, 0.75])

    def test_monotone_in_photons_efficiency_and_dark_counts(self):
        rng = np.random.default_rng(7)
        for eta, p_dc, n in zip(rng.uniform(0, 1, 50), rng.uniform(0, 0.5, 50), rng.integers(0, 40, 50)):
            base = DetectorModel(eta=eta, p_dc=p_dc)
            assert base.click_prob(int(n) + 1) >= base.click_prob(int(n))
            assert DetectorModel(eta=min(1.0, eta + 0.01), p_dc=p_dc).click_prob(int(n)) >= base.click_prob(int(n))
            assert DetectorModel(eta=eta, p_dc=p_dc + 0.01).click_prob(int(n)) >= base.click_prob(int(n))

    def test_survival(self):
        assert DetectorModel(eta=0.5).survival(2) == pytest.approx(0.25)
        assert DetectorModel(eta=1.0).survival(0) == 1.0
        assert DetectorModel(eta=1.0).survival(3) == 0.0

    @pytest.mark.parametrize("eta, p_dc", [(1.2, 0.0), (-0.1, 0.0), (0.5, 1.0), (0.5, -1e-3), (float("nan"), 0.0)])
    def test_rejects_out_of_range(self, eta, p_dc):
        with pytest.raises(InvalidParameter):
            DetectorModel(eta=eta, p_dc=p_dc)

    def test_rejects_negative_photon_number(self):
        with pytest.raises(InvalidParameter):
            DetectorModel(eta=0.5).click_prob(-1)

    @pytest.mark.parametrize("eta, p_dc, expected", [(1e-2, 1e-6, (5e-3, 1e-6)), (1.0, 0.0, (0.5, 0.0)), (0.0, 0.1, (0.0, 0.1))])
    def test_halved(self, eta, p_dc, expected):
        h = halved(DetectorModel(eta=eta, p_dc=p_dc))
        assert (h.eta, h.p_dc) == expected

    def test_from_channel(self):
        det = DetectorModel.from_channel(0.8, 0.5, p_dc=1e-5)
        assert det.eta == pytest.approx(0.4)
        assert det.p_dc == 1e-5


class TestSourceParams:
    def test_single_mode_keeps_p(self):
        assert SourceParams.from_equivalent_p(0.1, 1).p_bar == pytest.approx(0.1, rel=1e-15)

    @pytest.mark.parametrize("p", [1e-6, 0.1, 0.5, 0.9])
    @pytest.mark.parametrize("n_modes", [1, 2, 5, 40])
    def test_equivalent_p_round_trip(self, p, n_modes):
        source = SourceParams.from_equivalent_p(p, n_modes)
        assert source.equivalent_p == pytest.approx(p, rel=1e-14)

    @pytest.mark.parametrize("n_modes", range(1, 11))
    def test_mean_photon_number_is_preserved_exactly(self, n_modes):
        source = SourceParams.from_equivalent_p(Fraction(1, 2), n_modes)
        assert source.mean_photons == 1

    def test_mean_photons(self):
        source = SourceParams(p_bar=0.5, n_modes=3)
        assert source.mean_photons_per_mode == pytest.approx(1.0)
        assert source.mean_photons == pytest.approx(3.0)

    @pytest.mark.parametrize("kwargs", [{"p_bar": 1.0}, {"p_bar": -0.1}, {"p_bar": 0.1, "n_modes": 0},
                                        {"p_bar": 0.1, "n_modes": 2.5}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameter):
            SourceParams(**kwargs)
