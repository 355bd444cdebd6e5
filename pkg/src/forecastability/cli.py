"""Command-line entry point.

Subcommands: analyze, synth, benchmark, sweep, report. Exit codes: 0 on
success, 1 on usage or config errors, 2 on data errors, 3 on computation
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path


from . import __version__
from .config import Config, ConfigError, load_config, sweep_from_config
from .errors import DataError, ForecastabilityError
from .experiments import fmt, map_ordered, run_sweep, segment_metrics
from .ingest import HierarchySpec, Schema, aggregate_levels, load_errors, load_long_csv, load_m5_wide
from .lyapunov import moving_lyapunov
from .report import build_report
from .spectral import moving_spectral_predictability
from .synth import (DEFAULT_BENCHMARK_LORENZ, DEFAULT_NOISE_SIGMA, RNG_ALGORITHM, SIGNAL_KINDS,
                    SignalSpec, five_segment_benchmark, generate, sparsify)
from .timeseries import WindowPlan

logger = logging.getLogger("forecastability")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, help="base random seed (default 0)")
    g.add_argument("--config", help="JSON config file (SpectralConfig, EmbeddingConfig, ...)")
    g.add_argument("--out", default=".", help="output directory (default: current directory)")
    g.add_argument("--format", choices=("csv", "json"), default=None,
                   help="write only this format (default: both)")
    g.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _metric_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("metric options (override the config file)")
    g.add_argument("--log-base", type=float)
    g.add_argument("--no-hann", dest="apply_hann", action="store_const", const=False)
    g.add_argument("--no-detrend", dest="apply_detrend", action="store_const", const=False)
    g.add_argument("--include-dc", dest="include_dc", action="store_const", const=True)
    g.add_argument("--embedding-dim", "-m", type=int)
    g.add_argument("--delay", "--tau", type=int)
    g.add_argument("--horizon", type=int)
    g.add_argument("--theiler-window", type=int)
    g.add_argument("--distance-floor", type=float)
    g.add_argument("--search", choices=("exhaustive", "kdtree"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common, metric = _common(), _metric_options()
    parser = _Parser(prog="forecastability", description="Time-series forecastability diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    a = sub.add_parser("analyze", parents=[common, metric], help="metrics for every series in a long CSV")
    _input_options(a)

    s = sub.add_parser("synth", parents=[common], help="emit a synthetic series")
    s.add_argument("--kind", choices=SIGNAL_KINDS)
    s.add_argument("--length", type=int)
    s.add_argument("--frequency", type=float, help="sine frequency in cycles/sample")
    s.add_argument("--amplitude", type=float)
    s.add_argument("--noise-sigma", type=float)
    s.add_argument("--sigma", type=float, help="white-noise standard deviation")
    s.add_argument("--sample-every", type=int, help="Lorenz integration steps per sample")
    s.add_argument("--sparsity", type=float, default=0.0, help="zero out this fraction of values")

    b = sub.add_parser("benchmark", parents=[common, metric],
                       help="five-segment benchmark with moving-window metrics")
    b.add_argument("--segment-length", type=int, default=500)
    b.add_argument("--omega-window", type=int, default=200)
    b.add_argument("--lambda-window", type=int, default=300)
    b.add_argument("--stride", type=int, default=1)
    b.add_argument("--noise-sigma", type=float, default=DEFAULT_NOISE_SIGMA)
    b.add_argument("--lorenz-sample-every", type=int, default=DEFAULT_BENCHMARK_LORENZ.sample_every)

    w = sub.add_parser("sweep", parents=[common, metric], help="length x sparsity sensitivity sweep")
    w.add_argument("--kind", choices=SIGNAL_KINDS)
    w.add_argument("--metric", choices=("spectral_predictability", "largest_lyapunov"))
    w.add_argument("--lengths", type=_ints)
    w.add_argument("--rates", type=_floats, help="comma-separated sparsity rates")
    w.add_argument("--replicates", type=int)

    r = sub.add_parser("report", parents=[common, metric],
                       help="hierarchy-level report with optional error correlation")
    _input_options(r)
    r.add_argument("--m5", help="M5 wide sales file instead of --input")
    r.add_argument("--levels", help="comma-separated dimensions defining levels L1..Lk after L0 total")
    r.add_argument("--errors", help="CSV with series_id,model,wape[,frequency]")
    return parser


def _input_options(p: argparse.ArgumentParser):
    p.add_argument("--input", "-i", help="long CSV: series_id,<level dims...>,t,value")
    p.add_argument("--id-col", default="series_id")
    p.add_argument("--time-col", default="t")
    p.add_argument("--value-col", default="value")
    p.add_argument("--level-cols", help="comma-separated level columns (default: all others)")
    p.add_argument("--frequencies", default="daily,weekly",
                   help="comma-separated subset of daily,weekly (default both)")
    p.add_argument("--no-baseline", action="store_true", help="skip the white-noise baseline")
    p.add_argument("--debug-omega", action="store_true",
                   help="also report Omega normalized by log(2*pi)")


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _configs(args, cfg: Config):
    sp = {k: getattr(args, k) for k in ("apply_hann", "apply_detrend", "include_dc")
          if getattr(args, k, None) is not None}
    if getattr(args, "log_base", None) is not None:
        sp["log_base"] = args.log_base
    em = {k: getattr(args, k) for k in ("embedding_dim", "delay", "horizon", "theiler_window",
                                        "distance_floor", "search") if getattr(args, k, None) is not None}
    return replace(cfg.spectral, **sp), replace(cfg.embedding, **em)


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")
    logger.info("wrote %s", out / name)


def _emit(args, stem: str, csv_text: str, json_text: str):
    out = Path(args.out)
    if args.format in (None, "csv"):
        _write(out, f"{stem}.csv", csv_text)
    if args.format in (None, "json"):
        _write(out, f"{stem}.json", json_text)


def _frequencies(args) -> tuple:
    freqs = tuple(f.strip() for f in args.frequencies.split(",") if f.strip())
    bad = [f for f in freqs if f not in ("daily", "weekly")]
    if bad or not freqs:
        raise UsageError(f"--frequencies accepts daily and/or weekly, got {args.frequencies!r}")
    return freqs


def _load_input(args):
    if not args.input:
        raise UsageError("--input is required")
    levels = tuple(c.strip() for c in args.level_cols.split(",")) if args.level_cols else None
    return load_long_csv(args.input, Schema(args.id_col, args.time_col, args.value_col, levels))


def cmd_analyze(args, cfg: Config) -> int:
    spectral, embedding = _configs(args, cfg)
    freqs = _frequencies(args)
    ds = _load_input(args)
    series = list(ds.series().values())
    rep = build_report({"series": series}, spectral, embedding, frequencies=freqs,
                       baseline=not args.no_baseline, seed=_seed(args), debug=args.debug_omega,
                       jobs=args.jobs)
    _emit(args, "report", rep.to_csv(), rep.to_json())
    return EXIT_OK


def cmd_report(args, cfg: Config) -> int:
    spectral, embedding = _configs(args, cfg)
    freqs = _frequencies(args)
    if args.m5:
        ds = load_m5_wide(args.m5)
        hierarchy = cfg.hierarchy or HierarchySpec.m5()
    else:
        ds = _load_input(args)
        if args.levels:
            hierarchy = HierarchySpec.total_and([d.strip() for d in args.levels.split(",")])
        else:
            hierarchy = cfg.hierarchy or HierarchySpec.total_and(list(ds.dims))
    levels = aggregate_levels(ds, hierarchy)
    errors = load_errors(args.errors) if args.errors else None
    rep = build_report(levels, spectral, embedding, errors=errors, frequencies=freqs,
                       baseline=not args.no_baseline, seed=_seed(args), debug=args.debug_omega,
                       jobs=args.jobs)
    rep.metadata["hierarchy"] = hierarchy.to_dict()
    _emit(args, "report", rep.to_csv(), rep.to_json())
    return EXIT_OK


def cmd_synth(args, cfg: Config) -> int:
    base = cfg.signal or SignalSpec(args.kind or "sine", args.length or 256)
    params = dict(base.params)
    for flag, key in (("frequency", "frequency"), ("amplitude", "amplitude"),
                      ("noise_sigma", "noise_sigma"), ("sigma", "sigma"), ("sample_every", "sample_every")):
        if getattr(args, flag) is not None:
            params[key] = getattr(args, flag)
    seed = base.seed if args.seed is None and cfg.signal else _seed(args)
    spec = SignalSpec(args.kind or base.kind, args.length or base.length, seed, params)
    series = generate(spec)
    if args.sparsity:
        series = sparsify(series, args.sparsity, seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series_id", "t", "value"])
    for t, v in enumerate(series.values):
        w.writerow([spec.kind, t, repr(float(v))])
    doc = {"spec": spec.to_dict(), "sparsity": args.sparsity, "rng": RNG_ALGORITHM,
           "values": [float(v) for v in series.values]}
    _emit(args, f"synth_{spec.kind}", buf.getvalue(), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_benchmark(args, cfg: Config) -> int:
    spectral, embedding = _configs(args, cfg)
    lorenz = replace(DEFAULT_BENCHMARK_LORENZ, sample_every=args.lorenz_sample_every)
    bench = five_segment_benchmark(args.segment_length, _seed(args), args.noise_sigma, lorenz)
    plans = (WindowPlan(args.omega_window, args.stride), WindowPlan(args.lambda_window, args.stride))
    summary = segment_metrics(bench, plans, spectral, embedding, jobs=args.jobs)
    meta = {"seed": _seed(args), "noise_sigma": args.noise_sigma, "lorenz": asdict(lorenz),
            "spectral_config": asdict(spectral),
            "embedding_config": dict(asdict(embedding), theiler_window=embedding.exclusion),
            "boundaries": list(bench.boundaries), "labels": list(bench.labels), "version": __version__}
    _emit(args, "benchmark_segments", summary.to_csv(), summary.to_json(meta))

    # plot-ready per-sample trace: value plus both moving metrics at window ends
    omega, lam = map_ordered(lambda f: f(), [
        lambda: moving_spectral_predictability(bench.series, plans[0], spectral),
        lambda: moving_lyapunov(bench.series, plans[1], embedding)], args.jobs)
    om = dict(zip(omega.end_index.tolist(), omega.values.tolist()))
    la = dict(zip(lam.end_index.tolist(), lam.values.tolist()))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "segment", "value", "omega", "lambda"])
    L = bench.segment_length
    for t, v in enumerate(bench.series.values):
        w.writerow([t, bench.labels[t // L], fmt(v), fmt(om.get(t)), fmt(la.get(t))])
    if args.format in (None, "csv"):
        _write(Path(args.out), "benchmark_series.csv", buf.getvalue())
    return EXIT_OK


def cmd_sweep(args, cfg: Config) -> int:
    spectral, embedding = _configs(args, cfg)
    body = dict(cfg.sweep or {})
    if args.kind:
        body["generator"] = {"kind": args.kind, "length": 300}
    for key, val in (("lengths", args.lengths), ("sparsity_rates", args.rates),
                     ("replicates", args.replicates), ("metric", args.metric), ("base_seed", args.seed)):
        if val is not None:
            body[key] = val
    spec = sweep_from_config(replace(cfg, spectral=spectral, embedding=embedding, sweep=body))
    result = run_sweep(spec, jobs=args.jobs)
    _emit(args, "sweep", result.to_csv(), result.to_json())
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "synth": cmd_synth, "benchmark": cmd_benchmark,
            "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else Config()
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ForecastabilityError, ValueError, FloatingPointError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
