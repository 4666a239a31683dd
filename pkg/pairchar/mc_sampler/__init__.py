from pairchar.mc_sampler.estimators import (
    PLANS,
    SimulationRun,
    estimate_from_tallies,
    estimate_metric,
    simulate,
)
from pairchar.mc_sampler.export import export_run, write_click_records
from pairchar.mc_sampler.records import ClickRecord, CountTally, EstimatorResult
from pairchar.mc_sampler.sampler import block_rng, detect, detect_many, pattern_indices, sample_occupations
