"""Command-line entry point: compute, sweep, figure, optimum, validate, mc."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pairchar.analytic.optimum import find_p_opt
from pairchar.config.config_loader import load_settings
from pairchar.engines import evaluate_request
from pairchar.mc_sampler.estimators import estimate_from_tallies, simulate
from pairchar.mc_sampler.export import export_run
from pairchar.models.errors import ConfigError, InvalidParameter, PairCharError
from pairchar.models.metrics import MEASURED_METRICS, MetricKind, MetricRequest, Provenance
from pairchar.models.params import DetectorModel, SourceParams
from pairchar.sweeps import AXES, FIGURES, SweepSpec, build_figure, logspace, run_sweep, write_rows_csv
from pairchar.validation import run_validation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a config.json overriding the packaged defaults")
    common.add_argument(
        "--verbosity",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level (logs go to stderr)",
    )
    common.add_argument("--out", help="Output file (directory for 'figure')")
    common.add_argument("--progress", action="store_true", help="Show a progress bar")
    return common


def _source_parser() -> argparse.ArgumentParser:
    params = argparse.ArgumentParser(add_help=False)
    group = params.add_mutually_exclusive_group()
    group.add_argument("--p", type=float, help="Single-mode-equivalent emission probability")
    group.add_argument("--p-bar", type=float, help="Per-mode emission probability")
    params.add_argument("--n-modes", type=int, default=1, help="Number of modes N")
    params.add_argument("--eta", type=float, help="Overall detection efficiency")
    params.add_argument("--pdc", type=float, default=0.0, help="Dark-count probability per gate")
    return params


def _mc_parser() -> argparse.ArgumentParser:
    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--seed", type=int, help="Monte-Carlo seed")
    mc.add_argument("--trials", type=int, help="Monte-Carlo trials per setup")
    mc.add_argument("--workers", type=int, default=None, help="Worker threads")
    return mc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairchar",
        description="Photon-pair source metrics with imperfect threshold detectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common, source, mc = _common_parser(), _source_parser(), _mc_parser()
    metrics = [k.value for k in MetricKind]
    measured = [k.value for k in MEASURED_METRICS]
    engines = [e.value for e in Provenance]

    compute = sub.add_parser("compute", parents=[common, source, mc], help="Evaluate one metric")
    compute.add_argument("--metric", required=True, choices=metrics)
    compute.add_argument("--engine", default=Provenance.CLOSED_FORM.value, choices=engines)

    sweep = sub.add_parser("sweep", parents=[common, source, mc], help="Sweep one parameter to CSV")
    sweep.add_argument("--metric", required=True, choices=metrics)
    sweep.add_argument("--axis", required=True, choices=AXES)
    values = sweep.add_mutually_exclusive_group(required=True)
    values.add_argument("--values", type=float, nargs="+", help="Explicit axis values")
    values.add_argument("--logspace", type=float, nargs=3, metavar=("START", "STOP", "COUNT"),
                        help="Log-spaced axis values")
    sweep.add_argument("--engine", dest="engines", nargs="+", default=[Provenance.CLOSED_FORM.value],
                       choices=engines)

    figure = sub.add_parser("figure", parents=[common], help="Write the curves of one figure")
    figure.add_argument("--figure", type=int, required=True, choices=sorted(FIGURES))
    figure.add_argument("--workers", type=int, default=1)

    optimum = sub.add_parser("optimum", parents=[common, source], help="Optimal emission probability")
    optimum.add_argument("--metric", required=True,
                         choices=[k.value for k in MEASURED_METRICS if k is not MetricKind.G2_AUTO])
    optimum.add_argument("--objective", choices=["maximize", "minimize"])

    validate = sub.add_parser("validate", parents=[common, mc], help="Closed forms vs oracle vs sampler")
    validate.add_argument("--quick", action="store_true", help="Single-mode grid only")
    validate.add_argument("--tolerance", type=float, help="Relative closed-form/oracle tolerance")
    validate.add_argument("--mc", action="store_true", help="Include the Monte-Carlo consistency check")

    run_mc = sub.add_parser("mc", parents=[common, source, mc], help="Monte-Carlo estimate")
    run_mc.add_argument("--metric", required=True, choices=measured)
    run_mc.add_argument("--clicks-out", help="CSV file for the raw click records")
    return parser


def _source(args, parser) -> SourceParams:
    if args.p_bar is not None:
        return SourceParams(p_bar=args.p_bar, n_modes=args.n_modes)
    if args.p is None:
        parser.error("one of --p or --p-bar is required")
    return SourceParams.from_equivalent_p(args.p, args.n_modes)


def _detector(args, parser) -> DetectorModel:
    if args.eta is None:
        parser.error("--eta is required")
    return DetectorModel(eta=args.eta, p_dc=args.pdc)


def _params(source: SourceParams, det: DetectorModel) -> Dict[str, Any]:
    return {"p": source.equivalent_p, "p_bar": source.p_bar, "n_modes": source.n_modes,
            "eta": det.eta, "p_dc": det.p_dc}


def _emit(payload: Dict[str, Any], out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        logger.info("Wrote %s", out)
    sys.stdout.write(text)


def cmd_compute(args, parser, settings) -> int:
    source, det = _source(args, parser), _detector(args, parser)
    result = evaluate_request(
        MetricRequest(source, det, MetricKind(args.metric)),
        Provenance(args.engine),
        settings,
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        progress=args.progress,
    )
    payload = result.to_dict()
    payload["params"] = _params(source, det)
    _emit({key: payload[key] for key in ("metric", "params", "value", "engine", "diagnostics")}, args.out)
    return EXIT_OK


def cmd_sweep(args, parser, settings) -> int:
    if args.logspace:
        start, stop, count = args.logspace
        values = logspace(start, stop, int(count))
    else:
        values = tuple(args.values)
    if args.axis != "p" and args.p is None and args.p_bar is None:
        parser.error("one of --p or --p-bar is required unless sweeping p")
    if args.axis != "eta" and args.eta is None:
        parser.error("--eta is required unless sweeping eta")
    spec = SweepSpec(
        metric_kind=MetricKind(args.metric),
        axis=args.axis,
        values=values,
        p=args.p if args.p is not None else 0.1,
        p_bar=args.p_bar,
        n_modes=args.n_modes,
        eta=args.eta if args.eta is not None else 1.0,
        p_dc=args.pdc,
        engines=tuple(Provenance(e) for e in args.engines),
    )
    rows = run_sweep(spec, settings, seed=args.seed, trials=args.trials,
                     workers=args.workers or 1, progress=args.progress)
    text = write_rows_csv(rows, args.out)
    if not args.out:
        sys.stdout.write(text)
    failed = [row for row in rows if row.get("error")]
    if failed:
        logger.error("%d of %d rows failed", len(failed), len(rows))
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_figure(args, parser, settings) -> int:
    manifest = build_figure(args.figure, args.out or "figures", settings, workers=args.workers)
    failed = sum(curve["failed_rows"] for curve in manifest["curves"])
    sys.stdout.write(json.dumps({k: v for k, v in manifest.items() if k != "p_grid"}, indent=2) + "\n")
    return EXIT_DOMAIN if failed else EXIT_OK


def cmd_optimum(args, parser, settings) -> int:
    det = _detector(args, parser)
    optimum = find_p_opt(MetricKind(args.metric), det, args.n_modes, args.objective, settings)
    _emit({"metric": args.metric, "p_opt": optimum.p_opt, "value": optimum.value,
           "heuristic_ratio": optimum.heuristic_ratio,
           "params": {"n_modes": args.n_modes, "eta": det.eta, "p_dc": det.p_dc}}, args.out)
    return EXIT_OK


def cmd_validate(args, parser, settings) -> int:
    report = run_validation(settings, tolerance=args.tolerance, quick=args.quick,
                            include_mc=args.mc, progress=args.progress, workers=args.workers)
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_mc(args, parser, settings) -> int:
    source, det = _source(args, parser), _detector(args, parser)
    mc = settings.monte_carlo
    seed = mc.default_seed if args.seed is None else args.seed
    trials = args.trials or mc.default_trials
    kind = MetricKind(args.metric)
    run = simulate(kind, source, det, trials, seed, settings, args.workers,
                   keep_clicks=bool(args.clicks_out), progress=args.progress)
    if args.clicks_out:
        export_run(run, args.clicks_out)
    result = estimate_from_tallies(kind, run.plan, run.tallies)
    payload = result.to_dict()
    payload.update({"engine": Provenance.MONTE_CARLO.value, "seed": seed,
                    "params": _params(source, det), "cutoff": run.cutoff})
    _emit(payload, args.out)
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "optimum": cmd_optimum,
    "validate": cmd_validate,
    "mc": cmd_mc,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.verbosity, format=LOG_FORMAT, datefmt=LOG_DATEFMT, stream=sys.stderr)
    try:
        settings = load_settings(args.config)
        return COMMANDS[args.command](args, parser, settings)
    except PairCharError as exc:
        sys.stdout.write(json.dumps(exc.to_dict(), indent=2, default=str) + "\n")
        logger.error("%s: %s", exc.code, exc.message)
        return EXIT_USAGE if isinstance(exc, (InvalidParameter, ConfigError)) else EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
