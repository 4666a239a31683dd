import csv
import logging
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


def write_click_records(path, clicks: np.ndarray, detector_names: Sequence[str]) -> Path:
    """One row per trial: trial_id followed by a 0/1 column per detector."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["trial_id", *detector_names])
        for trial_id, row in enumerate(clicks.astype(int)):
            writer.writerow([trial_id, *row.tolist()])
    logger.info("Wrote %d click records to %s", len(clicks), path)
    return path


def export_run(run, out_path) -> list:
    """Writes one click-record file per setup of a simulation run."""
    out_path = Path(out_path)
    written = []
    for setup, clicks in zip(run.plan.setups, run.clicks):
        if clicks is None:
            continue
        target = out_path if len(run.plan.setups) == 1 else out_path.with_name(
            f"{out_path.stem}_{setup.name}{out_path.suffix or '.csv'}"
        )
        written.append(write_click_records(target, clicks, setup.detector_names))
    return written
