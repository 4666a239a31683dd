"""Parameter sweeps and figure-curve bundles written as CSV."""
import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from pairchar.analytic.closed_forms import (
    BELL_VISIBILITY_THRESHOLD,
    COHERENT_G2,
    THERMAL_G2,
    classical_bound,
    r_ideal,
)
from pairchar.engines import evaluate_request
from pairchar.models.errors import InvalidParameter, PairCharError
from pairchar.models.metrics import MetricKind, MetricRequest, Provenance
from pairchar.models.params import DetectorModel, SourceParams

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "metric", "engine", "p", "p_bar", "n_modes", "eta", "p_dc",
    "value", "std_error", "cutoff", "tail_mass", "error",
)
AXES = ("p", "eta", "p_dc", "N")


def format_number(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def logspace(start: float, stop: float, count: int) -> Tuple[float, ...]:
    if not 0 < start < stop or count < 2:
        raise InvalidParameter("logspace needs 0 < start < stop and count >= 2",
                               {"start": start, "stop": stop, "count": count})
    return tuple(float(v) for v in np.geomspace(start, stop, count))


@dataclass(frozen=True)
class SweepSpec:
    """
    One metric swept along one axis; the other parameters stay fixed.
    ``p`` is the single-mode-equivalent emission probability unless ``p_bar`` is given.
    """

    metric_kind: MetricKind
    axis: str
    values: Tuple[float, ...]
    p: float = 0.1
    p_bar: Optional[float] = None
    n_modes: int = 1
    eta: float = 1e-2
    p_dc: float = 1e-6
    engines: Tuple[Provenance, ...] = (Provenance.CLOSED_FORM,)

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise InvalidParameter(f"axis must be one of {AXES}", {"axis": self.axis})
        if not self.values:
            raise InvalidParameter("a sweep needs at least one value", {"axis": self.axis})
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise InvalidParameter("sweep values must be strictly increasing", {"axis": self.axis})
        if not self.engines:
            raise InvalidParameter("a sweep needs at least one engine", {})
        # builds every point once so domain errors surface before any work starts
        self.points()

    def points(self) -> List[Tuple[SourceParams, DetectorModel]]:
        out = []
        for value in self.values:
            p, n_modes, eta, p_dc = self.p, self.n_modes, self.eta, self.p_dc
            if self.axis == "p":
                p = value
            elif self.axis == "eta":
                eta = value
            elif self.axis == "p_dc":
                p_dc = value
            else:
                if float(value) != int(value):
                    raise InvalidParameter("N values must be integers", {"N": value})
                n_modes = int(value)
            if self.p_bar is not None and self.axis != "p":
                source = SourceParams(p_bar=self.p_bar, n_modes=n_modes)
            else:
                source = SourceParams.from_equivalent_p(p, n_modes)
            out.append((source, DetectorModel(eta=eta, p_dc=p_dc)))
        return out


def evaluate_row(
    metric_kind: MetricKind,
    source: SourceParams,
    det: DetectorModel,
    engine: Provenance,
    settings,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "metric": metric_kind.value,
        "engine": engine.value,
        "p": source.equivalent_p,
        "p_bar": source.p_bar,
        "n_modes": source.n_modes,
        "eta": det.eta,
        "p_dc": det.p_dc,
    }
    try:
        result = evaluate_request(
            MetricRequest(source, det, metric_kind), engine, settings, seed=seed, trials=trials
        )
    except PairCharError as exc:
        logger.warning("%s/%s failed at p_bar=%g eta=%g p_dc=%g: %s",
                       metric_kind.value, engine.value, source.p_bar, det.eta, det.p_dc, exc.message)
        row["error"] = f"{exc.code}: {exc.message}"
        return row
    row["value"] = result.value
    for key in ("std_error", "cutoff", "tail_mass"):
        if key in result.diagnostics:
            row[key] = result.diagnostics[key]
    return row


def run_sweep(
    spec: SweepSpec,
    settings,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    workers: int = 1,
    progress: bool = False,
) -> List[Dict[str, Any]]:
    """Rows in axis order, engines in the order given, regardless of completion order."""
    tasks = [(source, det, engine) for source, det in spec.points() for engine in spec.engines]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = pool.map(
            lambda task: evaluate_row(spec.metric_kind, *task, settings, seed=seed, trials=trials), tasks
        )
        if progress:
            from tqdm import tqdm

            rows = tqdm(rows, total=len(tasks), desc=spec.metric_kind.value)
        return list(rows)


def write_rows_csv(rows: Sequence[Dict[str, Any]], out_path=None, columns=CSV_COLUMNS) -> str:
    """Writes rows as CSV to ``out_path`` (or returns the text when no path is given)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [row.get(c, "") if c in ("metric", "engine", "error") else format_number(row.get(c))
             for c in columns]
        )
    text = buffer.getvalue()
    if out_path is not None:
        path = Path(out_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Wrote %d rows to %s", len(rows), path)
    return text


# ── Figures ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FigureSpec:
    metric_kind: MetricKind
    extremum: Optional[str]
    references: Tuple[str, ...]


FIGURES: Dict[int, FigureSpec] = {
    2: FigureSpec(MetricKind.R_TILDE, "max", ("ideal", "classical_bound")),
    4: FigureSpec(MetricKind.G2_CONDITIONAL, "min", ("classical_bound",)),
    5: FigureSpec(MetricKind.G2_AUTO, None, ("thermal", "coherent")),
    7: FigureSpec(MetricKind.G2_CROSS, "max", ("ideal",)),
    9: FigureSpec(MetricKind.V_HOM, "max", ()),
    11: FigureSpec(MetricKind.V_ENT, "max", ("bell_threshold",)),
}


def _reference_curve(figure_id: int, name: str, grid: Sequence[float]) -> List[float]:
    if name == "ideal":
        if figure_id == 2:
            return [r_ideal(p) for p in grid]
        return [1.0 + 1.0 / p for p in grid]
    if name == "classical_bound":
        return [classical_bound(FIGURES[figure_id].metric_kind)] * len(grid)
    constant = {
        "thermal": THERMAL_G2,
        "coherent": COHERENT_G2,
        "bell_threshold": BELL_VISIBILITY_THRESHOLD,
    }[name]
    return [constant] * len(grid)


def _extremum(grid: Sequence[float], values: Sequence[Optional[float]], kind: str) -> Dict[str, Any]:
    finite = [(i, v) for i, v in enumerate(values) if v is not None]
    if not finite:
        return {}
    pick = max if kind == "max" else min
    index, value = pick(finite, key=lambda item: item[1])
    return {"kind": kind, "p": grid[index], "value": value,
            "interior": 0 < index < len(grid) - 1}


def build_figure(figure_id: int, out_dir, settings, workers: int = 1) -> Dict[str, Any]:
    """
    Writes one CSV per dark-count level, one per reference curve, and a
    manifest describing the grid and the located extrema.
    """
    if figure_id not in FIGURES:
        raise InvalidParameter(f"unknown figure {figure_id}", {"figure": figure_id, "known": sorted(FIGURES)})
    spec = FIGURES[figure_id]
    fig = settings.figures
    grid = logspace(fig.p_min, fig.p_max, fig.points)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest: Dict[str, Any] = {
        "figure": figure_id,
        "metric": spec.metric_kind.value,
        "eta": fig.eta,
        "p_dc_levels": list(fig.p_dc_levels),
        "p_grid": {"spacing": "log", "start": fig.p_min, "stop": fig.p_max, "points": fig.points,
                   "values": list(grid)},
        "curves": [],
        "references": [],
    }
    for p_dc in fig.p_dc_levels:
        sweep = SweepSpec(spec.metric_kind, "p", grid, eta=fig.eta, p_dc=p_dc)
        rows = run_sweep(sweep, settings, workers=workers)
        name = f"fig{figure_id}_pdc{p_dc:.0e}.csv"
        write_rows_csv(rows, out_dir / name)
        values = [row.get("value") for row in rows]
        entry = {"file": name, "p_dc": p_dc, "failed_rows": sum(1 for v in values if v is None),
                 "small_p_value": values[0], "large_p_value": values[-1]}
        if spec.extremum:
            entry["extremum"] = _extremum(grid, values, spec.extremum)
            entry["extremum"]["heuristic_p"] = p_dc / fig.eta if fig.eta > 0 else None
        manifest["curves"].append(entry)
    for ref in spec.references:
        name = f"fig{figure_id}_{ref}.csv"
        curve = _reference_curve(figure_id, ref, grid)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("p", "value"))
        writer.writerows((format_number(p), format_number(v)) for p, v in zip(grid, curve))
        (out_dir / name).write_text(buffer.getvalue())
        manifest["references"].append({"file": name, "name": ref})
    (out_dir / f"fig{figure_id}_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    logger.info("Figure %d written to %s", figure_id, out_dir)
    return manifest
