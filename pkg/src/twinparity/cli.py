"""Command-line interface: ``simulate``, ``sweep``, ``sample`` and ``estimate``.

Exit codes: 0 success, 2 invalid parameters, 3 unreadable counts file,
4 statistical failure (no herald events, CAR <= 1, ...).  Errors are written to
stderr as a JSON object.  The worker count defaults to ``$TWINPARITY_WORKERS``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import CLICK, DetectorKind, DetectorModel
from .errors import InvalidParameter, MalformedCounts, StatisticalError, TwinParityError
from .estimate import DEFAULT_LEVEL, DEFAULT_MIN_EVENTS, DEFAULT_RESAMPLES, parity_pipeline
from .fock import PdcSource, Regime, pdc_joint
from .herald import Arm, HeraldSpec, herald_probability, heralded_state, preparation_probability
from .io import dumps_json, format_counts_csv, format_distribution_csv, read_counts_csv
from .moments import car, factorial_moments, mgf_partial_sums, nonclassicality_flags, parity
from .montecarlo import ExperimentConfig, sample_run
from .sweep import Quantity, SweepGrid, run_sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MALFORMED = 3
EXIT_STATISTICS = 4

WORKERS_ENV = "TWINPARITY_WORKERS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit_error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}, sort_keys=True) + "\n")
    return code


def _env_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _herald_condition(kind: DetectorKind, value: str | None):
    if kind is DetectorKind.BUCKET:
        if value not in (None, CLICK):
            raise InvalidParameter("bucket heralding only supports --herald click")
        return CLICK
    if value is None:
        return 1
    try:
        return int(value)
    except ValueError:
        raise InvalidParameter(f"PNR --herald must be an integer, got {value!r}") from None


def cmd_simulate(args) -> int:
    source = PdcSource(args.regime, args.mean_n)
    detector = DetectorModel(args.detector, args.eta)
    spec = HeraldSpec(detector, _herald_condition(detector.kind, args.herald), Arm.IDLER)
    joint = pdc_joint(source, args.n_max)
    state = heralded_state(joint, spec)
    moments = factorial_moments(state, args.max_order)
    params = {
        "regime": source.regime.value,
        "mean_n": source.mean_n,
        "eta": detector.efficiency,
        "detector": detector.kind.value,
        "herald": spec.condition,
        "n_max": joint.k_max,
        "max_order": args.max_order,
    }
    metrics = {
        "schema": 1,
        "parameters": params,
        "herald_probability": herald_probability(joint, spec),
        "preparation_probability": preparation_probability(source, detector.efficiency),
        "source_car": car(joint),
        "mean": moments.mean,
        "g": {f"g{m}": moments.order(m) for m in range(1, moments.max_order + 1)},
        "g2": moments.order(2) if moments.max_order >= 2 else None,
        "parity": parity(state),
        "parity_partial_sums": mgf_partial_sums(moments.mean, moments, 2.0),
        "nonclassicality": nonclassicality_flags(state),
    }
    text = dumps_json(metrics)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "distribution.csv").write_text(format_distribution_csv(state, params), encoding="utf-8")
        (out / "metrics.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _axis(values, lo, hi, steps, spacing) -> tuple:
    if values:
        return tuple(values)
    if steps < 1:
        raise InvalidParameter("axis needs at least one step")
    if spacing == "log":
        if lo <= 0:
            raise InvalidParameter("log-spaced axis needs a positive lower bound")
        return tuple(np.geomspace(lo, hi, steps).tolist())
    return tuple(np.linspace(lo, hi, steps).tolist())


def cmd_sweep(args) -> int:
    grid = SweepGrid(
        eta=_axis(args.eta, args.eta_min, args.eta_max, args.eta_steps, "linear"),
        mean_n=_axis(args.mean_n, args.mean_min, args.mean_max, args.mean_steps, "log"),
        quantity=args.quantity,
        regime=args.regime,
        order=args.order,
        detector=args.detector,
    )
    rows = run_sweep(grid, workers=args.workers or _env_workers())
    header = (
        f"# quantity={grid.quantity.value} regime={grid.regime.value} detector={grid.detector.value} "
        f"order={grid.order} eta_points={len(grid.eta)} mean_n_points={len(grid.mean_n)}"
    )
    lines = [header, "eta,mean_n,value"]
    lines.extend(f"{e!r},{m!r},{v!r}" for e, m, v in rows)
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    eta_s = args.eta_signal if args.eta_signal is not None else args.eta
    eta_i = args.eta_idler if args.eta_idler is not None else args.eta
    if eta_s is None or eta_i is None:
        raise InvalidParameter("give --eta or both --eta-signal and --eta-idler")
    config = ExperimentConfig(
        source=PdcSource(args.regime, args.mean_n),
        eta_signal=eta_s,
        eta_idler=eta_i,
        detector_signal=args.detector_signal,
        detector_idler=args.detector_idler,
        pulses=args.pulses,
        seed=args.seed,
    )
    counts = sample_run(config, workers=args.workers or _env_workers())
    _write(format_counts_csv(counts), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    counts = read_counts_csv(args.counts)
    report = parity_pipeline(
        counts,
        herald_arm=args.herald_arm,
        order=args.order,
        herald_n=args.herald_n,
        resamples=args.resamples,
        level=args.level,
        seed=args.seed,
        min_events=args.min_events,
    )
    out = report.to_dict()
    out["input"] = {"file": str(args.counts), "header": counts.metadata}
    out["min_events"] = args.min_events
    _write(dumps_json(out), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twinparity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    regimes = [r.value for r in Regime]
    kinds = [k.value for k in DetectorKind]

    p = sub.add_parser("simulate", help="exact heralded state and its figures of merit")
    p.add_argument("--regime", choices=regimes, required=True)
    p.add_argument("--mean-n", type=float, required=True, help="mean photon number per PDC beam")
    p.add_argument("--eta", type=float, required=True, help="heralding efficiency")
    p.add_argument("--detector", choices=kinds, default="pnr")
    p.add_argument("--herald", default=None, help="PNR photon number (default 1) or 'click'")
    p.add_argument("--max-order", type=int, default=8)
    p.add_argument("--n-max", type=int, default=None, help="photon-number cutoff (default: automatic)")
    p.add_argument("--out-dir", default=None, help="write distribution.csv and metrics.json here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="figure of merit over the (eta, mean_n) plane as long-format CSV")
    p.add_argument("--quantity", choices=[q.value for q in Quantity], required=True)
    p.add_argument("--regime", choices=regimes, default="mm")
    p.add_argument("--detector", choices=kinds, default="pnr", help="herald detector for parity/mean quantities")
    p.add_argument("--order", type=int, default=2, help="truncation order for parity_truncated")
    p.add_argument("--eta", type=float, nargs="+", default=None, help="explicit eta values")
    p.add_argument("--eta-min", type=float, default=0.01)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.add_argument("--eta-steps", type=int, default=50)
    p.add_argument("--mean-n", type=float, nargs="+", default=None, help="explicit mean photon numbers")
    p.add_argument("--mean-min", type=float, default=0.01)
    p.add_argument("--mean-max", type=float, default=3.0)
    p.add_argument("--mean-steps", type=int, default=50)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="Monte Carlo joint counts as sparse CSV")
    p.add_argument("--regime", choices=regimes, required=True)
    p.add_argument("--mean-n", type=float, required=True)
    p.add_argument("--eta", type=float, default=None, help="efficiency of both arms")
    p.add_argument("--eta-signal", type=float, default=None)
    p.add_argument("--eta-idler", type=float, default=None)
    p.add_argument("--detector-signal", choices=kinds, default="pnr")
    p.add_argument("--detector-idler", choices=kinds, default="pnr")
    p.add_argument("--pulses", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="loss-tolerant parity reconstruction from a counts CSV")
    p.add_argument("counts")
    p.add_argument("--herald-arm", choices=[a.value for a in Arm], default="idler")
    p.add_argument("--herald-n", type=int, default=1)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--level", type=float, default=DEFAULT_LEVEL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-events", type=int, default=DEFAULT_MIN_EVENTS)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        return _emit_error("UsageError", str(exc), EXIT_INVALID)
    except MalformedCounts as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_MALFORMED)
    except InvalidParameter as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_INVALID)
    except StatisticalError as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_STATISTICS)
    except TwinParityError as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_INVALID)


if __name__ == "__main__":
    raise SystemExit(main())
