"""Command-line front door.

Subcommands: train, predict, crossval, forecast, cats, bench-time.
Every command honors --seed for full determinism and exits with a stable
code: 0 success, 2 usage/config problems, 3 data problems, 4 numeric
failures.  All outputs are plain CSV/JSON files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import bench, timeseries, trainer
from .errors import (
    ChecksumMismatch,
    DgcnError,
    EmptyDataset,
    FormatVersionMismatch,
    MissingColumn,
    NonFiniteLoss,
    NotPositiveDefinite,
    ParseError,
    SchemaMismatch,
    SeriesTooShort,
    ShapeMismatch,
)
from .trainer import TrainConfig

_DATA_ERRORS = (
    ParseError, MissingColumn, SchemaMismatch, SeriesTooShort, ShapeMismatch,
    EmptyDataset, FormatVersionMismatch, ChecksumMismatch, OSError,
)
_NUMERIC_ERRORS = (NotPositiveDefinite, NonFiniteLoss)


class UsageError(Exception):
    pass


def seed_type(value: str) -> int:
    seed = int(value)
    if seed < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return seed


def load_config(path, seed=None) -> TrainConfig:
    """Defaults merged with a JSON config file; unknown keys are rejected."""
    merged = TrainConfig().to_dict()
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - set(merged)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, value in user.items():
            if isinstance(merged[key], dict) and isinstance(value, dict):
                bad = set(value) - set(merged[key])
                if bad:
                    raise UsageError(f"unknown {key} keys: {sorted(bad)}")
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
    if seed is not None:
        merged["seed"] = seed
    try:
        return TrainConfig.from_dict(merged)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad config: {exc}") from exc


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_prediction_csv(path, pred, index0: int = 0, index_name: str = "row"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([index_name, "mean", "variance", "ci_low", "ci_high"])
        for i in range(pred.mean.size):
            writer.writerow([
                index0 + i,
                repr(float(pred.mean[i])),
                repr(float(pred.variance[i])),
                repr(float(pred.ci_low[i])),
                repr(float(pred.ci_high[i])),
            ])


def cmd_train(args) -> int:
    config = load_config(args.config, args.seed)
    data = bench.load_csv(args.data, args.target)
    started = time.perf_counter()
    model = trainer.fit(data, config)
    elapsed = time.perf_counter() - started
    trainer.save(model, args.out)
    log = {
        "config": config.to_dict(),
        "data": {"path": args.data, "n": data.n, "n_v": data.n_v},
        "epochs_run": model.log.epochs_run,
        "initial_nll": model.log.epoch_nll[0],
        "final_nll": model.log.epoch_nll[-1],
        "jitter_events": model.log.jitter_events,
        "optimizer_steps": model.log.optimizer_steps,
        "stopped_early": model.log.stopped_early,
        "elapsed_seconds": elapsed,
        "model_file": args.out,
    }
    _write_json(args.log or args.out + ".log.json", log)
    print(f"trained on {data.n} points; "
          f"NLL {log['initial_nll']:.4f} -> {log['final_nll']:.4f} "
          f"in {log['epochs_run']} epochs; model: {args.out}")
    return 0


def _load_features(path, model) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise SchemaMismatch("prediction file needs a header and data rows")
    header = [c.strip() for c in rows[0]]
    if model.columns is not None and all(c in header for c in model.columns):
        cols = [header.index(c) for c in model.columns]
    elif len(header) == model.n_v:
        cols = list(range(model.n_v))
    else:
        raise SchemaMismatch(
            f"model expects columns {model.columns or model.n_v}, "
            f"file has {header}"
        )
    out = np.empty((len(rows) - 1, len(cols)))
    for i, row in enumerate(rows[1:], start=2):
        for j, c in enumerate(cols):
            try:
                out[i - 2, j] = float(row[c])
            except (ValueError, IndexError):
                raise ParseError(i, c + 1, "not a number")
    return out


def cmd_predict(args) -> int:
    model = trainer.load(args.model)
    x = _load_features(args.data, model)
    pred = trainer.predict_batched(
        model, x, k=args.k, alpha_level=args.alpha,
        include_noise=args.include_noise, interval=args.interval,
    )
    _write_prediction_csv(args.out, pred)
    print(f"wrote {pred.mean.size} predictions to {args.out}")
    return 0


def cmd_crossval(args) -> int:
    config = load_config(args.config, args.seed)
    data = bench.load_csv(args.data, args.target)
    protocol = bench.PRESETS[args.preset]
    overrides = {}
    if args.folds is not None:
        overrides["folds"] = args.folds
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        protocol = replace(protocol, **overrides)
    if args.baseline:
        report = bench.stationary_baseline(data, protocol)
        stem = "baseline"
    else:
        report = bench.run_protocol(data, protocol, config)
        stem = "crossval"
    runs_path = f"{args.out_dir}/{stem}_runs.csv"
    summary_path = f"{args.out_dir}/{stem}_summary.json"
    report.write_csv(runs_path)
    s = report.summary()
    s["protocol"] = {k: getattr(protocol, k) for k in (
        "kind", "folds", "repeats", "train_size", "test_size",
        "transform", "metric", "seed")}
    if not args.baseline:
        s["train_config"] = config.to_dict()
    _write_json(summary_path, s)
    print(f"{protocol.metric} mean {s['mean']:.4f} +- {s['std']:.4f} "
          f"(min {s['min']:.4f}, max {s['max']:.4f}) over {s['runs']} runs")
    print(f"wrote {runs_path} and {summary_path}")
    return 0


def cmd_forecast(args) -> int:
    config = load_config(args.config, args.seed)
    series = timeseries.read_series_csv(args.series)
    data = timeseries.lag_embed(series, timeseries.LagSpec(args.lags))
    model = trainer.fit(data, config)
    pred = timeseries.forecast_recursive(
        model, series[np.isfinite(series)], args.steps, k=args.k, detailed=True
    )
    timeseries.write_forecast_csv(args.out, pred, start_index=series.size)
    print(f"wrote {args.steps}-step forecast to {args.out}")
    return 0


def cmd_cats(args) -> int:
    config = load_config(args.config, args.seed)
    series = timeseries.read_series_csv(args.series)
    lags = [int(v) for v in args.lags.split(",")]
    specs = [timeseries.LagSpec(v) for v in lags]
    truth = None
    if args.truth:
        truth = timeseries.read_series_csv(args.truth)
    result = timeseries.cats_protocol(series, specs, config, truth=truth,
                                      k=args.k, strategy=args.strategy)
    pred_path = f"{args.out_dir}/cats_predictions.csv"
    with open(pred_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["position", "prediction"])
        pos = 0
        for start, end in timeseries.CATS_BLOCKS.blocks:
            for t in range(start, end + 1):
                writer.writerow([t, repr(float(result.predictions[pos]))])
                pos += 1
    if result.e1 is not None:
        for b, score in enumerate(result.block_scores, start=1):
            print(f"block {b}: {score:.4f}")
        print(f"E1 = {result.e1:.4f}")
        _write_json(f"{args.out_dir}/cats_summary.json", {
            "block_scores": result.block_scores,
            "e1": result.e1,
            "lags": lags,
            "train_config": config.to_dict(),
        })
    else:
        print("no truth file given; wrote predictions only")
    print(f"wrote {pred_path}")
    return 0


def cmd_bench_time(args) -> int:
    sizes = [int(v) for v in args.sizes.split(",")]
    batches = []
    for v in args.batch.split(","):
        v = v.strip().lower()
        batches.append(None if v == "full" else int(v))
    config = load_config(args.config, args.seed)
    report = bench.timing_benchmark(
        sizes, batches, epochs=args.epochs, synthetic_dims=args.dims,
        seed=args.seed or 0, train_config=config,
    )
    report.write_csv(args.out)
    for row in report.rows:
        print(f"N={row.n} N_b={row.batch_size}: {row.seconds:.2f}s "
              f"({row.sec_per_epoch:.4f}s/epoch)")
    for n, batch, reason in report.skipped:
        print(f"skipped N={n} N_b={batch}: {reason}", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgcn",
        description="GP regression with network-predicted per-point "
                    "length-scales and noise variances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="last")
    p.add_argument("--config")
    p.add_argument("--out", default="model.dgcn")
    p.add_argument("--log")
    p.add_argument("--seed", type=seed_type)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--include-noise", action="store_true")
    p.add_argument("--interval", choices=["t", "z"], default="t")
    p.add_argument("--out", default="predictions.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("crossval", help="run a cross-validation protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="last")
    p.add_argument("--preset", choices=sorted(bench.PRESETS), default="table3-raw")
    p.add_argument("--folds", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--baseline", action="store_true",
                   help="run the stationary control model instead")
    p.add_argument("--config")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=seed_type)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("forecast", help="recursive multi-step forecast")
    p.add_argument("--series", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--lags", type=int, default=20)
    p.add_argument("--k", type=int)
    p.add_argument("--config")
    p.add_argument("--out", default="forecast.csv")
    p.add_argument("--seed", type=seed_type)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("cats", help="five-block gap-filling protocol")
    p.add_argument("--series", required=True)
    p.add_argument("--truth")
    p.add_argument("--lags", default="20,20,20,20,20")
    p.add_argument("--strategy", choices=["recursive", "direct"],
                   default="recursive")
    p.add_argument("--k", type=int)
    p.add_argument("--config")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=seed_type)
    p.set_defaults(func=cmd_cats)

    p = sub.add_parser("bench-time", help="training-time scaling study")
    p.add_argument("--sizes", required=True, help="comma-separated N values")
    p.add_argument("--batch", required=True,
                   help="comma-separated batch sizes; 'full' for N_b=N")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--dims", type=int, default=5)
    p.add_argument("--config")
    p.add_argument("--out", default="timing.csv")
    p.add_argument("--seed", type=seed_type)
    p.set_defaults(func=cmd_bench_time)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DgcnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
