import logging
import sys
from typing import List

logger = logging.getLogger(__name__)


def validate_settings(settings) -> List[str]:
    """Returns the list of problems; empty means the settings are usable."""
    problems: List[str] = []
    oracle = settings.oracle
    if not 0 < oracle.start_tolerance < 1:
        problems.append("oracle.start_tolerance must lie in (0, 1)")
    if not 0 < oracle.state_tail_tolerance < 1:
        problems.append("oracle.state_tail_tolerance must lie in (0, 1)")
    if not oracle.convergence > 0:
        problems.append("oracle.convergence must be positive")
    if oracle.min_start_order < 1:
        problems.append("oracle.min_start_order must be >= 1")
    if oracle.max_cutoff_photons < 2 * oracle.min_start_order:
        problems.append("oracle.max_cutoff_photons must cover at least the starting order")

    opt = settings.optimum
    if not 0 < opt.p_min < opt.p_max < 1:
        problems.append("optimum requires 0 < p_min < p_max < 1")
    if opt.grid_points < 5:
        problems.append("optimum.grid_points must be >= 5")
    if opt.heuristic_factor <= 1:
        problems.append("optimum.heuristic_factor must exceed 1")

    mc = settings.monte_carlo
    if mc.block_size < 1 or mc.workers < 1:
        problems.append("monte_carlo.block_size and monte_carlo.workers must be >= 1")
    if mc.default_trials < 1 or mc.min_trials < 1:
        problems.append("monte_carlo trial counts must be >= 1")
    if not 0 < mc.state_tail_tolerance < 1:
        problems.append("monte_carlo.state_tail_tolerance must lie in (0, 1)")

    fig = settings.figures
    if not 0 < fig.eta <= 1:
        problems.append("figures.eta must lie in (0, 1]")
    if not 0 < fig.p_min < fig.p_max < 1 or fig.points < 2:
        problems.append("figures requires 0 < p_min < p_max < 1 and points >= 2")
    if any(not 0 <= level < 1 for level in fig.p_dc_levels):
        problems.append("figures.p_dc_levels must lie in [0, 1)")

    val = settings.validate
    if any(not 0 < p < 1 for p in val.p):
        problems.append("validate.p values must lie in (0, 1)")
    if any(not 0 <= eta <= 1 for eta in val.eta):
        problems.append("validate.eta values must lie in [0, 1]")
    if any(n < 1 for n in tuple(val.n_modes) + tuple(val.quick_n_modes)):
        problems.append("validate.n_modes values must be >= 1")
    if val.tolerance < 0 or val.identity_tolerance < 0:
        problems.append("validate tolerances must be non-negative")
    if not 0 < val.mc.pass_fraction <= 1:
        problems.append("validate.mc.pass_fraction must lie in (0, 1]")
    return problems


def report(config_path=None) -> bool:
    from pairchar.config.config_loader import load_settings
    from pairchar.models.errors import ConfigError

    try:
        settings = load_settings(config_path)
    except ConfigError as exc:
        for problem in exc.params.get("problems", [exc.message]):
            logger.error("❌ %s", problem)
        return False
    logger.info("✅ Configuration OK (%s)", settings.source)
    return True


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    sys.exit(0 if report(sys.argv[1] if len(sys.argv) > 1 else None) else 1)
