import csv
import dataclasses
import logging

import numpy as np
import pytest
from scipy import stats

from pairchar.analytic.closed_forms import closed_form_value
from pairchar.fock_oracle import DetectorAssignment, hom_dip_state, twin_beam_state
from pairchar.mc_sampler import (
    PLANS,
    ClickRecord,
    CountTally,
    block_rng,
    detect,
    detect_many,
    estimate_from_tallies,
    estimate_metric,
    export_run,
    pattern_indices,
    sample_occupations,
    simulate,
)
from pairchar.models import (
    MEASURED_METRICS,
    CutoffTooSmall,
    DegenerateCounts,
    DetectorModel,
    InvalidParameter,
    MetricKind,
    SourceParams,
)
from pairchar.validation import monte_carlo_consistency


@pytest.fixture(scope="module")
def small_blocks(settings):
    return dataclasses.replace(settings, monte_carlo=dataclasses.replace(settings.monte_carlo, block_size=1000))


class TestDetection:
    def test_binomial_thinning(self):
        rng = block_rng(3, 0, 0)
        assignment = DetectorAssignment.of(DetectorModel(0.3, 0.0), (0,))
        clicks = detect_many(np.full((20000, 1), 5), assignment, rng)
        result = stats.binomtest(int(clicks.sum()), len(clicks), 1 - 0.7 ** 5)
        assert result.pvalue > 1e-4

    def test_dark_counts_without_photons(self):
        rng = block_rng(3, 0, 1)
        assignment = DetectorAssignment.of(DetectorModel(0.3, 0.1), (0,), (1,))
        clicks = detect_many(np.zeros((20000, 2), dtype=int), assignment, rng)
        for column in clicks.T:
            assert stats.binomtest(int(column.sum()), len(column), 0.1).pvalue > 1e-4

    def test_single_trial_record(self):
        assignment = DetectorAssignment.of(DetectorModel(1.0, 0.0), (0,), (1,))
        record = detect([2, 0], assignment, block_rng(0, 0, 0), trial_id=7)
        assert record == ClickRecord(trial_id=7, clicks=(True, False))
        assert record.pattern == 0b01

    def test_pattern_indices(self):
        clicks = np.array([[True, False, True], [False, False, False], [True, True, True]])
        assert pattern_indices(clicks).tolist() == [0b101, 0, 0b111]

    def test_sampled_photon_numbers_are_thermal(self):
        state = twin_beam_state(0.2, 30)
        occupations = sample_occupations(state, block_rng(5, 0, 0), 50000)
        assert np.array_equal(occupations[:, 0], occupations[:, 1])
        assert occupations[:, 0].mean() == pytest.approx(0.25, abs=0.02)

    def test_copies_add_photons(self):
        state = twin_beam_state(0.2, 30)
        occupations = sample_occupations(state, block_rng(5, 0, 0), 50000, n_modes=3)
        assert occupations[:, 0].mean() == pytest.approx(0.75, abs=0.05)

    def test_dip_photon_numbers_are_even(self, policy):
        state = hom_dip_state(0.4, policy.start_order(0.4))
        occupations = sample_occupations(state, block_rng(9, 0, 0), 100000)
        assert occupations.sum() > 0
        assert not (occupations % 2).any()

    def test_pair_numbers_follow_geometric_law(self, policy):
        p, trials = 0.5, 1000000
        state = twin_beam_state(p, policy.start_order(p))
        occupations = sample_occupations(state, block_rng(13, 0, 0), trials)
        counts = np.bincount(occupations[:, 0], minlength=12)[:12]
        for n, count in enumerate(counts):
            q = (1 - p) * p ** n
            assert abs(count - trials * q) <= 4 * np.sqrt(trials * q * (1 - q))


class TestCountTally:
    def test_event_count_and_merge(self):
        left = CountTally(("a", "b"), np.array([5, 3, 2, 1]))
        right = CountTally(("a", "b"))
        right.add_patterns(np.array([3, 3, 1]))
        right.add_record(ClickRecord(0, (False, True)))
        merged = left.merge(right)
        assert merged.trials == 15
        assert merged.event_count(0b11) == 3
        assert merged.event_count(0b01) == 4 + 3
        assert merged.counts_by_pattern() == {"none": 5, "a": 4, "b": 3, "a+b": 3}

    def test_merge_rejects_other_setup(self):
        with pytest.raises(InvalidParameter):
            CountTally(("a", "b")).merge(CountTally(("d", "dbar")))

    def test_standard_error_floor(self):
        plan = PLANS[MetricKind.G2_CROSS]()
        tally = CountTally(("a", "b"), np.array([90, 5, 5, 0]))
        result = estimate_from_tallies(MetricKind.G2_CROSS, plan, [tally])
        assert result.value == 0.0
        assert result.std_error > 0.0
        assert result.trials == 100

    def test_zero_denominator(self):
        plan = PLANS[MetricKind.G2_CROSS]()
        tally = CountTally(("a", "b"), np.array([95, 5, 0, 0]))
        with pytest.raises(DegenerateCounts):
            estimate_from_tallies(MetricKind.G2_CROSS, plan, [tally])


class TestEstimators:
    def test_same_seed_same_result(self, small_blocks):
        source, det = SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3)
        first = estimate_metric(MetricKind.G2_AUTO, source, det, 5000, 11, small_blocks)
        second = estimate_metric(MetricKind.G2_AUTO, source, det, 5000, 11, small_blocks)
        assert first == second

    def test_workers_do_not_change_result(self, small_blocks):
        source, det = SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3)
        serial = simulate(MetricKind.V_HOM, source, det, 5500, 11, small_blocks, workers=1)
        parallel = simulate(MetricKind.V_HOM, source, det, 5500, 11, small_blocks, workers=4)
        for left, right in zip(serial.tallies, parallel.tallies):
            assert np.array_equal(left.counts, right.counts)
            assert left.trials == 5500

    def test_seed_changes_counts(self, small_blocks):
        source, det = SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3)
        a = simulate(MetricKind.G2_CROSS, source, det, 5000, 1, small_blocks)
        b = simulate(MetricKind.G2_CROSS, source, det, 5000, 2, small_blocks)
        assert not np.array_equal(a.tallies[0].counts, b.tallies[0].counts)

    @pytest.mark.parametrize("kind", MEASURED_METRICS)
    def test_agrees_with_closed_form(self, kind, settings):
        source, det = SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3)
        result = estimate_metric(kind, source, det, 200000, 7, settings)
        expected = closed_form_value(kind, source, det)
        assert abs(result.value - expected) <= 5 * result.std_error
        assert result.trials == 200000

    def test_hom_visibility_at_low_emission(self, settings):
        source, det = SourceParams(p_bar=0.01), DetectorModel(0.1, 0.0)
        result = estimate_metric(MetricKind.V_HOM, source, det, 1000000, 42, settings)
        assert abs(result.value - closed_form_value(MetricKind.V_HOM, source, det)) <= 3 * result.std_error

    def test_state_tail_checked_against_monte_carlo_section(self, settings):
        source, det = SourceParams(p_bar=0.1), DetectorModel(0.5)
        strict = dataclasses.replace(
            settings, monte_carlo=dataclasses.replace(settings.monte_carlo, state_tail_tolerance=1e-30)
        )
        with pytest.raises(CutoffTooSmall):
            simulate(MetricKind.G2_CROSS, source, det, 10, 0, strict)
        strict_oracle = dataclasses.replace(
            settings, oracle=dataclasses.replace(settings.oracle, state_tail_tolerance=1e-30)
        )
        assert simulate(MetricKind.G2_CROSS, source, det, 10, 0, strict_oracle).tallies[0].trials == 10

    def test_multimode_cross_correlation(self, settings):
        source, det = SourceParams.from_equivalent_p(0.1, 2), DetectorModel(0.5, 1e-3)
        result = estimate_metric(MetricKind.G2_CROSS, source, det, 200000, 8, settings)
        assert abs(result.value - closed_form_value(MetricKind.G2_CROSS, source, det)) <= 5 * result.std_error

    def test_too_few_trials(self, settings, caplog):
        source, det = SourceParams(p_bar=1e-4), DetectorModel(0.01, 0.0)
        with caplog.at_level(logging.WARNING, logger="pairchar.mc_sampler.estimators"):
            with pytest.raises(DegenerateCounts):
                estimate_metric(MetricKind.G2_AUTO, source, det, 100, 0, settings)
        assert "only 100 trials" in caplog.text

    def test_rejects_expansions(self, settings):
        with pytest.raises(InvalidParameter):
            simulate(MetricKind.G2_AUTO_TAYLOR, SourceParams(p_bar=0.1), DetectorModel(0.5), 10, 0, settings)

    @pytest.mark.slow
    def test_seed_ensemble_within_four_sigma(self, settings):
        report = monte_carlo_consistency(settings)
        assert report["failures"] == []


class TestExport:
    def test_single_setup_file(self, tmp_path, settings):
        run = simulate(MetricKind.G2_CROSS, SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3), 50, 0,
                       settings, keep_clicks=True)
        written = export_run(run, tmp_path / "clicks.csv")
        assert written == [tmp_path / "clicks.csv"]
        rows = list(csv.reader((tmp_path / "clicks.csv").read_text().splitlines()))
        assert rows[0] == ["trial_id", "a", "b"]
        assert len(rows) == 51
        assert {cell for row in rows[1:] for cell in row[1:]} <= {"0", "1"}

    def test_one_file_per_setup(self, tmp_path, settings):
        run = simulate(MetricKind.V_HOM, SourceParams(p_bar=0.1), DetectorModel(0.5, 1e-3), 20, 0,
                       settings, keep_clicks=True)
        written = export_run(run, tmp_path / "hom.csv")
        assert [p.name for p in written] == ["hom_hom_dip.csv", "hom_hom_delayed.csv"]
