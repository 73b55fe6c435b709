"""Benchmark harness: CSV datasets, CV protocols, baseline, timing study.

The harness never bundles benchmark data; point it at user-supplied CSV
files (see scripts/fetch_datasets.py for sources and schemas).  Protocols
mirror the published comparison conventions: the "log" preset trains and
scores on log targets, the "normalized" presets score on the
dataset-standardized scale, and the raw presets score untransformed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit as _sigmoid

from . import gp, trainer
from .errors import MemoryCapExceeded, MissingColumn, ParseError
from .kernels import KernelId, KernelSet
from .mlp import OptimizerConfig, OptimizerState, softplus_inv
from .trainer import Dataset, TrainConfig


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def load_csv(path, target_column="last") -> Dataset:
    """Numeric CSV with a header row; extracts the target column.

    ``target_column`` is a header name or "last".  Non-numeric cells raise
    ParseError with their 1-based position.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ParseError(1, 1, "file needs a header row and at least one data row")
    header = [c.strip() for c in rows[0]]
    if target_column == "last":
        target_idx = len(header) - 1
    else:
        if target_column not in header:
            raise MissingColumn(
                f"column {target_column!r} not in header {header}"
            )
        target_idx = header.index(target_column)
    width = len(header)
    values = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ParseError(i, len(row) + 1, f"expected {width} columns")
        for j, cell in enumerate(row):
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise ParseError(i, j + 1, f"not a number: {cell.strip()!r}")
    feature_cols = [j for j in range(width) if j != target_idx]
    return Dataset(
        x=values[:, feature_cols],
        y=values[:, target_idx],
        columns=[header[j] for j in feature_cols],
    )


# ---------------------------------------------------------------------------
# Protocols and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Protocol:
    """How to resample, transform and score a dataset."""

    kind: str = "kfold"  # kfold | split
    folds: int = 10
    repeats: int = 20
    train_size: int = 455  # split protocols only
    test_size: int = 51
    transform: str = "none"  # none | log | standardize
    metric: str = "rmse"  # rmse | mse
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("kfold", "split"):
            raise ValueError("kind must be 'kfold' or 'split'")
        if self.kind == "kfold" and self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.transform not in ("none", "log", "standardize"):
            raise ValueError("transform must be none, log or standardize")
        if self.metric not in ("rmse", "mse"):
            raise ValueError("metric must be rmse or mse")


PRESETS = {
    # 20 x 10-fold CV on log targets, scored in log space.
    "table3-log": Protocol(kind="kfold", folds=10, repeats=20, transform="log"),
    # 25 repeats of a 455/51 head/tail split on standardized targets.
    "table3-split": Protocol(kind="split", repeats=25, train_size=455,
                             test_size=51, transform="standardize"),
    # 20 x 10-fold CV on standardized targets.
    "table3-normalized": Protocol(kind="kfold", folds=10, repeats=20,
                                  transform="standardize"),
    # 20 x 10-fold CV on raw targets.
    "table3-raw": Protocol(kind="kfold", folds=10, repeats=20, transform="none"),
    "table4": Protocol(kind="kfold", folds=10, repeats=20, transform="none"),
}


@dataclass
class RunRecord:
    run_id: int
    repeat: int
    fold: int
    metric_value: float
    seconds: float


@dataclass
class BenchReport:
    protocol: Protocol
    records: list = field(default_factory=list)
    wall_clock: float = 0.0
    config_fingerprint: str = ""

    def values(self) -> np.ndarray:
        return np.asarray([r.metric_value for r in self.records])

    def summary(self) -> dict:
        v = self.values()
        return {
            "runs": int(v.size),
            "min": float(v.min()),
            "mean": float(v.mean()),
            "max": float(v.max()),
            "std": float(v.std()),
            "metric": self.protocol.metric,
            "wall_clock_seconds": self.wall_clock,
            "config_fingerprint": self.config_fingerprint,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["run_id", "repeat", "fold", "metric_value", "seconds"])
            for r in self.records:
                writer.writerow([r.run_id, r.repeat, r.fold,
                                 repr(r.metric_value), repr(r.seconds)])

    def write_summary_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fingerprint(*dicts) -> str:
    blob = json.dumps(dicts, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _transform_target(y, transform: str) -> np.ndarray:
    if transform == "none":
        return np.asarray(y, dtype=np.float64)
    if transform == "log":
        y = np.asarray(y, dtype=np.float64)
        if np.any(y <= 0.0):
            raise ValueError("log transform needs strictly positive targets")
        return np.log(y)
    y = np.asarray(y, dtype=np.float64)
    return (y - y.mean()) / max(y.std(), 1e-12)


def _score(truth, pred, metric: str) -> float:
    err = np.asarray(truth) - np.asarray(pred)
    mse = float(np.mean(err**2))
    return float(np.sqrt(mse)) if metric == "rmse" else mse


def _splits(n: int, protocol: Protocol):
    """Yield (repeat, fold, train_idx, test_idx) with per-repeat shuffles."""
    if protocol.kind == "kfold" and protocol.folds > n:
        raise ValueError(f"{protocol.folds} folds need at least that many points")
    for r in range(protocol.repeats):
        rng = np.random.default_rng([protocol.seed, r])
        perm = rng.permutation(n)
        if protocol.kind == "kfold":
            folds = np.array_split(perm, protocol.folds)
            for f in range(protocol.folds):
                train = np.concatenate([folds[g] for g in range(protocol.folds)
                                        if g != f])
                yield r, f, train, folds[f]
        else:
            if protocol.train_size + protocol.test_size > n:
                raise ValueError("split sizes exceed the dataset")
            yield (r, 0, perm[: protocol.train_size],
                   perm[n - protocol.test_size :])


def _run(data: Dataset, protocol: Protocol, fit_predict, fingerprint: str) -> BenchReport:
    y = _transform_target(data.y, protocol.transform)
    report = BenchReport(protocol=protocol, config_fingerprint=fingerprint)
    started = time.perf_counter()
    run_id = 0
    for r, f, train_idx, test_idx in _splits(data.n, protocol):
        tick = time.perf_counter()
        pred = fit_predict(
            Dataset(data.x[train_idx], y[train_idx], data.columns),
            data.x[test_idx],
            run_seed=_run_seed(protocol.seed, r, f),
        )
        value = _score(y[test_idx], pred, protocol.metric)
        report.records.append(RunRecord(
            run_id=run_id, repeat=r, fold=f, metric_value=value,
            seconds=time.perf_counter() - tick,
        ))
        run_id += 1
    report.wall_clock = time.perf_counter() - started
    return report


def _run_seed(base: int, repeat: int, fold: int) -> int:
    return int(np.random.SeedSequence([base, repeat, fold]).generate_state(1)[0])


def run_protocol(data: Dataset, protocol: Protocol,
                 train_config: TrainConfig = TrainConfig()) -> BenchReport:
    """Cross-validate the full model under a protocol."""

    def fit_predict(train_data, x_test, run_seed):
        cfg = replace(train_config, seed=run_seed)
        model = trainer.fit(train_data, cfg)
        return trainer.predict_batched(model, x_test).mean

    return _run(data, protocol, fit_predict,
                _fingerprint(protocol.__dict__, train_config.to_dict()))


# ---------------------------------------------------------------------------
# Stationary baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryConfig:
    """Single stationary kernel; one length-scale vector, one noise level."""

    kernel: KernelId = KernelId.SQUARED_EXP
    optimizer: OptimizerConfig = OptimizerConfig()
    batch_size: int = 200
    max_epochs: int = 100
    seed: int = 0
    standardize_y: bool = True
    sigma2_floor: float = 1e-6
    sigma2_init: float = 1e-2


class StationaryGp:
    """Control model: the same likelihood and optimizer, constant field.

    One length-scale vector and one noise variance are shared by every
    point, trained by the identical batched Adam loop the main model uses.
    """

    def __init__(self, config: StationaryConfig = StationaryConfig()):
        self.config = config
        self.kset = KernelSet((config.kernel,))
        self.theta = None
        self.sigma_raw = None
        self.scaler = None
        self.x = None
        self.y = None

    def _sigma2(self) -> float:
        return float(np.logaddexp(0.0, self.sigma_raw[0]) + self.config.sigma2_floor)

    def fit(self, data: Dataset) -> "StationaryGp":
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        self.scaler = trainer.Scaler.fit(data.x, data.y, cfg.standardize_y)
        self.x = self.scaler.transform_x(data.x)
        self.y = self.scaler.transform_y(data.y)
        n, n_v = self.x.shape
        self.theta = np.ones(n_v)
        self.sigma_raw = np.array(
            [softplus_inv(cfg.sigma2_init - cfg.sigma2_floor)]
        )
        opt = OptimizerState([self.theta, self.sigma_raw], cfg.optimizer)
        for _ in range(cfg.max_epochs):
            for idx in trainer.make_batches(n, cfg.batch_size, n_v, rng):
                xb, yb = self.x[idx], self.y[idx]
                hyper = self._field(len(idx))
                grads = gp.nll_hyper_grad(gp.GpBatch(xb, yb, hyper), self.kset)
                grad_theta = grads.theta.sum(axis=0)
                grad_sigma = np.array(
                    [grads.sigma2.sum() * _sigmoid(self.sigma_raw[0])]
                )
                opt.step([self.theta, self.sigma_raw], [grad_theta, grad_sigma])
        return self

    def _field(self, n: int) -> gp.HyperField:
        return gp.HyperField(
            np.tile(self.theta, (n, 1)), np.full(n, self._sigma2())
        )

    def predict(self, x_raw, alpha_level: float = 0.05,
                include_noise: bool = False) -> gp.Prediction:
        xs = self.scaler.transform_x(np.asarray(x_raw, dtype=np.float64))
        train = gp.GpBatch(self.x, self.y, self._field(self.x.shape[0]))
        pred = gp.predict(train, xs, self._field(xs.shape[0]), self.kset,
                          alpha_level=alpha_level, include_noise=include_noise)
        s = self.scaler
        return gp.Prediction(
            mean=s.inverse_y(pred.mean),
            variance=pred.variance * s.y_std**2,
            ci_low=s.inverse_y(pred.ci_low),
            ci_high=s.inverse_y(pred.ci_high),
            alpha_level=pred.alpha_level,
            clamped=pred.clamped,
        )


def stationary_baseline(data: Dataset, protocol: Protocol,
                        config: StationaryConfig = StationaryConfig()) -> BenchReport:
    """Same protocol, stationary control model; report shape matches."""

    def fit_predict(train_data, x_test, run_seed):
        model = StationaryGp(replace(config, seed=run_seed)).fit(train_data)
        return model.predict(x_test).mean

    return _run(data, protocol, fit_predict,
                _fingerprint(protocol.__dict__, {
                    "kernel": config.kernel.value,
                    "optimizer": config.optimizer.to_dict(),
                    "batch_size": config.batch_size,
                    "max_epochs": config.max_epochs,
                }))


# ---------------------------------------------------------------------------
# Training-time scaling study
# ---------------------------------------------------------------------------


@dataclass
class TimingRow:
    n: int
    batch_size: int
    seconds: float
    sec_per_epoch: float


@dataclass
class TimingReport:
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (n, batch, reason)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["N", "N_b", "seconds", "sec_per_epoch"])
            for row in self.rows:
                writer.writerow([row.n, row.batch_size,
                                 repr(row.seconds), repr(row.sec_per_epoch)])


def synthetic_dataset(n: int, n_v: int = 5, seed: int = 0,
                      noise: float = 0.05) -> Dataset:
    """Seeded sum-of-sines regression problem for the timing study."""
    rng = np.random.default_rng([seed, n, n_v])
    x = rng.uniform(0.0, 1.0, size=(n, n_v))
    y = np.zeros(n)
    for v in range(n_v):
        y += np.sin((2.0 + v) * np.pi * x[:, v] + 0.7 * v)
    y += noise * rng.standard_normal(n)
    return Dataset(x, y, columns=[f"x{v}" for v in range(n_v)])


def timing_benchmark(sizes, batch_sizes, epochs: int = 100,
                     synthetic_dims: int = 5, seed: int = 0,
                     memory_cap_bytes: int = 8 << 30,
                     train_config: TrainConfig | None = None) -> TimingReport:
    """Wall-clock training time per (N, N_b) configuration, fixed epochs.

    ``batch_sizes`` entries are ints, or None for full batch (N_b = N);
    full-batch rows whose covariance storage would exceed the memory cap
    are skipped with a recorded reason.  Early stopping is disabled so
    every row runs the same number of epochs.  One small warm-up fit runs
    first and is not timed.
    """
    base = train_config or TrainConfig()
    base = replace(base, max_epochs=epochs,
                   early_stop_patience=epochs + 1, early_stop_tol=0.0)
    report = TimingReport()
    warm = synthetic_dataset(64, synthetic_dims, seed)
    trainer.fit(warm, replace(base, batch_size=64, max_epochs=2, seed=seed))
    for n in sizes:
        data = synthetic_dataset(int(n), synthetic_dims, seed)
        for nb in batch_sizes:
            batch = int(n) if nb is None else int(nb)
            try:
                if nb is None:
                    # ~6 dense N x N float64 intermediates live at peak.
                    needed = 6 * 8 * int(n) ** 2
                    if needed > memory_cap_bytes:
                        raise MemoryCapExceeded(
                            f"full batch at N={n} needs ~{needed >> 20} MiB"
                        )
            except MemoryCapExceeded as exc:
                report.skipped.append((int(n), batch, str(exc)))
                continue
            cfg = replace(base, batch_size=batch, seed=seed)
            tick = time.perf_counter()
            trainer.fit(data, cfg)
            seconds = time.perf_counter() - tick
            report.rows.append(TimingRow(
                n=int(n), batch_size=batch, seconds=seconds,
                sec_per_epoch=seconds / epochs,
            ))
    return report
