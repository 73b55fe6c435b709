"""End-to-end training, batched prediction and model persistence.

Training runs epochs of shuffled batches; each batch forwards both
hypernetworks in training mode, evaluates the GP negative marginal
log-likelihood, backpropagates its exact gradient into both networks and
applies one optimizer step per network.  Early stopping watches the
relative improvement of the per-point epoch NLL.

Prediction standardizes the query points, runs both networks in inference
mode, then solves one GP system per group of test points that share the
same nearest-neighbor set.  With k equal to the training size this
reproduces the full, unbatched prediction bit for bit.

Model files are a small binary container: magic ``DGCN``, a format version
byte, a length-prefixed JSON manifest, the raw float64 arrays in manifest
order, and a trailing CRC32 over everything before it.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gp
from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    FormatVersionMismatch,
    NonFiniteLoss,
    NotPositiveDefinite,
    SchemaMismatch,
)
from .kernels import KernelSet
from .mlp import (
    LayerSpec,
    Mlp,
    OptimizerConfig,
    OptimizerState,
    RegularizerSpec,
    softplus_inv,
)
from .neighbors import NeighborIndex

MODEL_MAGIC = b"DGCN"
MODEL_FORMAT_VERSION = 1


def worker_count() -> int:
    """Worker cap from DGCN_THREADS (default 1 = serial)."""
    try:
        return max(1, int(os.environ.get("DGCN_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Dataset:
    """Input matrix, response vector and optional feature column names.

    The response is a vector for training; multi-horizon lag embeddings
    may carry an (N, n_targets) block, from which one column is selected
    before fitting.
    """

    x: np.ndarray
    y: np.ndarray
    columns: list | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        if self.x.ndim != 2 or self.y.ndim not in (1, 2):
            raise DimensionMismatch("x must be (N, n_v) and y (N,) or (N, h)")
        if self.x.shape[0] != self.y.shape[0]:
            raise DimensionMismatch("x and y row counts differ")
        if self.x.shape[0] < 1:
            raise ValueError("need at least 1 point")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")
        if self.columns is not None and len(self.columns) != self.x.shape[1]:
            raise DimensionMismatch("column names do not match the input width")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def n_v(self) -> int:
        return self.x.shape[1]


_STD_FLOOR = 1e-12


@dataclass
class Scaler:
    """Per-column standardization for inputs and (optionally) the target."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    standardize_y: bool = True

    @classmethod
    def fit(cls, x, y, standardize_y: bool = True) -> "Scaler":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        x_std = np.maximum(x.std(axis=0), _STD_FLOOR)
        if standardize_y:
            y_mean = float(y.mean())
            y_std = float(max(y.std(), _STD_FLOOR))
        else:
            y_mean, y_std = 0.0, 1.0
        return cls(x.mean(axis=0), x_std, y_mean, y_std, standardize_y)

    def transform_x(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.x_mean) / self.x_std

    def inverse_x(self, xs) -> np.ndarray:
        return np.asarray(xs, dtype=np.float64) * self.x_std + self.x_mean

    def transform_y(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.y_mean) / self.y_std

    def inverse_y(self, ys) -> np.ndarray:
        return np.asarray(ys, dtype=np.float64) * self.y_std + self.y_mean

    def to_dict(self) -> dict:
        return {
            "x_mean": self.x_mean.tolist(),
            "x_std": self.x_std.tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "standardize_y": self.standardize_y,
        }

    @classmethod
    def from_dict(cls, d) -> "Scaler":
        return cls(
            x_mean=np.asarray(d["x_mean"], dtype=np.float64),
            x_std=np.asarray(d["x_std"], dtype=np.float64),
            y_mean=float(d["y_mean"]),
            y_std=float(d["y_std"]),
            standardize_y=bool(d["standardize_y"]),
        )


@dataclass(frozen=True)
class TrainConfig:
    """Everything fit() needs; serialized verbatim into the model file."""

    kernels: KernelSet = KernelSet()
    theta_hidden: tuple = (20, 20, 20)
    sigma_hidden: tuple = (20, 20, 20)
    optimizer: OptimizerConfig = OptimizerConfig()
    sigma_optimizer: OptimizerConfig | None = None  # defaults to `optimizer`
    batch_size: int = 200
    max_epochs: int = 100
    early_stop_tol: float = 1e-4
    early_stop_patience: int = 10
    seed: int = 0
    standardize_y: bool = True
    dropout_rate: float = 0.1
    input_noise_std: float = 0.01
    sigma2_floor: float = 1e-6
    sigma2_init: float = 1e-2
    theta_output_bias: float = 1.0
    prediction_k: int | None = None
    neighbor_strategy: str = "brute"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        if self.sigma2_floor <= 0.0 or self.sigma2_init <= self.sigma2_floor:
            raise ValueError("need sigma2_init > sigma2_floor > 0")
        object.__setattr__(self, "theta_hidden", tuple(self.theta_hidden))
        object.__setattr__(self, "sigma_hidden", tuple(self.sigma_hidden))

    def to_dict(self) -> dict:
        return {
            "kernels": self.kernels.names(),
            "theta_hidden": list(self.theta_hidden),
            "sigma_hidden": list(self.sigma_hidden),
            "optimizer": self.optimizer.to_dict(),
            "sigma_optimizer": (
                None if self.sigma_optimizer is None
                else self.sigma_optimizer.to_dict()
            ),
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "early_stop_tol": self.early_stop_tol,
            "early_stop_patience": self.early_stop_patience,
            "seed": self.seed,
            "standardize_y": self.standardize_y,
            "dropout_rate": self.dropout_rate,
            "input_noise_std": self.input_noise_std,
            "sigma2_floor": self.sigma2_floor,
            "sigma2_init": self.sigma2_init,
            "theta_output_bias": self.theta_output_bias,
            "prediction_k": self.prediction_k,
            "neighbor_strategy": self.neighbor_strategy,
        }

    @classmethod
    def from_dict(cls, d) -> "TrainConfig":
        d = dict(d)
        d["kernels"] = KernelSet.from_names(d["kernels"])
        d["theta_hidden"] = tuple(d["theta_hidden"])
        d["sigma_hidden"] = tuple(d["sigma_hidden"])
        d["optimizer"] = OptimizerConfig.from_dict(d["optimizer"])
        if d.get("sigma_optimizer") is not None:
            d["sigma_optimizer"] = OptimizerConfig.from_dict(d["sigma_optimizer"])
        return cls(**d)


@dataclass
class TrainingLog:
    epoch_nll: list = field(default_factory=list)
    jitter_events: int = 0
    optimizer_steps: int = 0
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.epoch_nll)

    def to_dict(self) -> dict:
        return {
            "epoch_nll": self.epoch_nll,
            "jitter_events": self.jitter_events,
            "optimizer_steps": self.optimizer_steps,
            "stopped_early": self.stopped_early,
        }

    @classmethod
    def from_dict(cls, d) -> "TrainingLog":
        return cls(
            epoch_nll=list(d["epoch_nll"]),
            jitter_events=int(d["jitter_events"]),
            optimizer_steps=int(d["optimizer_steps"]),
            stopped_early=bool(d["stopped_early"]),
        )


@dataclass
class TrainedModel:
    """Self-contained regressor: networks, scalers, data, index, config.

    Treat instances as immutable; update() returns a new model.
    """

    theta_net: Mlp
    sigma_net: Mlp
    scaler: Scaler
    config: TrainConfig
    x: np.ndarray  # standardized training inputs
    y: np.ndarray  # standardized responses
    columns: list | None
    hyper: gp.HyperField  # inference-mode hyperparameters over x
    index: NeighborIndex
    log: TrainingLog

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def n_v(self) -> int:
        return self.x.shape[1]

    @property
    def kernel_set(self) -> KernelSet:
        return self.config.kernels

    def predict(self, x_star, **kwargs) -> gp.Prediction:
        return predict_batched(self, x_star, **kwargs)


def _hidden_activations(n_hidden: int) -> list:
    # All-sigmoid hidden stack with a final rectified hidden layer.
    return ["sigmoid"] * (n_hidden - 1) + ["relu"] if n_hidden > 1 else ["relu"]


def _build_specs(n_v: int, hidden, out_units: int, out_activation: str):
    sizes = [n_v, *hidden, out_units]
    acts = _hidden_activations(len(hidden)) + [out_activation]
    return [
        LayerSpec(sizes[i], sizes[i + 1], acts[i]) for i in range(len(sizes) - 1)
    ]


def build_networks(n_v: int, config: TrainConfig, rng) -> tuple:
    """Fresh theta and sigma hypernetworks for a given input width."""
    reg = RegularizerSpec(config.dropout_rate, config.input_noise_std)
    theta_specs = _build_specs(
        n_v, config.theta_hidden, n_v * config.kernels.n_k, "linear"
    )
    sigma_specs = _build_specs(n_v, config.sigma_hidden, 1, "softplus")
    theta_net = Mlp(theta_specs, regularizer=reg, rng=rng,
                    output_bias=config.theta_output_bias)
    sigma_net = Mlp(sigma_specs, regularizer=reg, rng=rng,
                    output_bias=softplus_inv(config.sigma2_init - config.sigma2_floor))
    return theta_net, sigma_net


def make_batches(n: int, batch_size: int, n_v: int, rng) -> list:
    """Shuffled partition into batches; a tiny tail merges into its neighbor.

    Every index appears in exactly one batch.  A final partial batch is
    kept only if it has at least max(8, n_v + 2) points, otherwise it is
    folded into the previous batch (degenerate likelihoods are worse than a
    slightly larger batch).
    """
    perm = rng.permutation(n)
    if batch_size >= n:
        return [perm]
    cuts = list(range(batch_size, n, batch_size))
    parts = np.split(perm, cuts)
    if len(parts) > 1 and len(parts[-1]) < max(8, n_v + 2):
        tail = parts.pop()
        parts[-1] = np.concatenate([parts[-1], tail])
    return parts


def hyper_for(theta_net: Mlp, sigma_net: Mlp, xs, sigma2_floor: float) -> gp.HyperField:
    """Inference-mode hyperparameter field for a standardized point set."""
    theta = theta_net.forward(xs)
    sigma2 = sigma_net.forward(xs)[:, 0] + sigma2_floor
    return gp.HyperField(theta, sigma2)


def _run_epochs(xs, ys, theta_net, sigma_net, opt_theta, opt_sigma, config,
                rng, max_epochs, early_stop, log: TrainingLog) -> None:
    n, n_v = xs.shape
    kset = config.kernels
    streak = 0
    for _ in range(max_epochs):
        total = 0.0
        jitter = 0
        for idx in make_batches(n, config.batch_size, n_v, rng):
            xb, yb = xs[idx], ys[idx]
            theta = theta_net.forward(xb, training=True, rng=rng)
            raw = sigma_net.forward(xb, training=True, rng=rng)
            batch = gp.GpBatch(
                xb, yb, gp.HyperField(theta, raw[:, 0] + config.sigma2_floor)
            )
            try:
                res = gp.nll_grad(batch, kset, theta_net, sigma_net)
            except NotPositiveDefinite as exc:
                raise NotPositiveDefinite(
                    f"{exc} (epoch {log.epochs_run + 1}, batch of "
                    f"{len(idx)} points, indices {idx[:5].tolist()}...)"
                ) from exc
            if not np.isfinite(res.value):
                raise NonFiniteLoss(
                    f"non-finite NLL in epoch {log.epochs_run + 1} "
                    f"on a batch of {len(idx)} points"
                )
            opt_theta.step(theta_net.params.arrays(), res.theta_net.arrays())
            opt_sigma.step(sigma_net.params.arrays(), res.sigma_net.arrays())
            log.optimizer_steps += 1
            total += res.value
            if res.jitter_used > 0.0:
                jitter += 1
        epoch_nll = total / n
        if log.epoch_nll and early_stop:
            prev = log.epoch_nll[-1]
            improvement = (prev - epoch_nll) / max(abs(prev), 1e-12)
            streak = streak + 1 if improvement < config.early_stop_tol else 0
        log.epoch_nll.append(epoch_nll)
        log.jitter_events += jitter
        if early_stop and streak >= config.early_stop_patience:
            log.stopped_early = True
            break
    theta_net.clear_cache()
    sigma_net.clear_cache()


def fit(data: Dataset, config: TrainConfig = TrainConfig()) -> TrainedModel:
    """Train both hypernetworks on the dataset and assemble a model."""
    if data.y.ndim != 1:
        raise DimensionMismatch(
            "fit needs a single response vector; select one target column"
        )
    if data.n < 2:
        raise ValueError("training needs at least 2 points")
    rng = np.random.default_rng(config.seed)
    scaler = Scaler.fit(data.x, data.y, config.standardize_y)
    xs = scaler.transform_x(data.x)
    ys = scaler.transform_y(data.y)
    theta_net, sigma_net = build_networks(data.n_v, config, rng)
    opt_theta = OptimizerState(theta_net.params.arrays(), config.optimizer)
    opt_sigma = OptimizerState(
        sigma_net.params.arrays(), config.sigma_optimizer or config.optimizer
    )
    log = TrainingLog()
    _run_epochs(xs, ys, theta_net, sigma_net, opt_theta, opt_sigma, config,
                rng, config.max_epochs, True, log)
    return _assemble(theta_net, sigma_net, scaler, config, xs, ys,
                     data.columns, log)


def _assemble(theta_net, sigma_net, scaler, config, xs, ys, columns, log):
    hyper = hyper_for(theta_net, sigma_net, xs, config.sigma2_floor)
    index = NeighborIndex(xs, strategy=config.neighbor_strategy)
    return TrainedModel(
        theta_net=theta_net,
        sigma_net=sigma_net,
        scaler=scaler,
        config=config,
        x=xs,
        y=ys,
        columns=list(columns) if columns is not None else None,
        hyper=hyper,
        index=index,
        log=log,
    )


def update(model: TrainedModel, new_data: Dataset, epochs: int) -> TrainedModel:
    """Warm-started continuation on the combined data; returns a new model.

    The scalers are reused (not refit); the neighbor index is rebuilt over
    the enlarged training set.  With epochs=0 the networks are untouched
    and only the stored data and index grow.
    """
    if new_data.n_v != model.n_v:
        raise SchemaMismatch(
            f"model expects {model.n_v} inputs, new data has {new_data.n_v}"
        )
    if (
        model.columns is not None
        and new_data.columns is not None
        and list(new_data.columns) != list(model.columns)
    ):
        raise SchemaMismatch("new data columns differ from the training columns")
    xs = np.vstack([model.x, model.scaler.transform_x(new_data.x)])
    ys = np.concatenate([model.y, model.scaler.transform_y(new_data.y)])
    theta_net = model.theta_net.copy()
    sigma_net = model.sigma_net.copy()
    config = model.config
    log = TrainingLog(
        epoch_nll=list(model.log.epoch_nll),
        jitter_events=model.log.jitter_events,
        optimizer_steps=model.log.optimizer_steps,
        stopped_early=False,
    )
    if epochs > 0:
        rng = np.random.default_rng([config.seed, xs.shape[0], epochs])
        opt_theta = OptimizerState(theta_net.params.arrays(), config.optimizer)
        opt_sigma = OptimizerState(
            sigma_net.params.arrays(), config.sigma_optimizer or config.optimizer
        )
        _run_epochs(xs, ys, theta_net, sigma_net, opt_theta, opt_sigma,
                    config, rng, epochs, False, log)
    return _assemble(theta_net, sigma_net, model.scaler, config, xs, ys,
                     model.columns, log)


def _empty_prediction(alpha_level: float) -> gp.Prediction:
    z = np.empty(0)
    return gp.Prediction(z, z.copy(), z.copy(), z.copy(), alpha_level)


def _check_query(model: TrainedModel, x_star_raw) -> np.ndarray:
    x = np.asarray(x_star_raw, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if model.n_v == 1 else x[None, :]
    if x.ndim != 2 or x.shape[1] != model.n_v:
        raise SchemaMismatch(
            f"model expects {model.n_v} input columns, got shape {x.shape}"
        )
    return x


def _destandardize(model: TrainedModel, pred: gp.Prediction) -> gp.Prediction:
    s = model.scaler
    return gp.Prediction(
        mean=s.inverse_y(pred.mean),
        variance=pred.variance * s.y_std**2,
        ci_low=s.inverse_y(pred.ci_low),
        ci_high=s.inverse_y(pred.ci_high),
        alpha_level=pred.alpha_level,
        clamped=pred.clamped,
    )


def predict_full(model: TrainedModel, x_star_raw, alpha_level: float = 0.05,
                 include_noise: bool = False, interval: str = "t") -> gp.Prediction:
    """Unbatched prediction against the entire stored training set."""
    x_raw = _check_query(model, x_star_raw)
    if x_raw.shape[0] == 0:
        return _empty_prediction(alpha_level)
    xs = model.scaler.transform_x(x_raw)
    hyper_star = hyper_for(model.theta_net, model.sigma_net, xs,
                           model.config.sigma2_floor)
    train = gp.GpBatch(model.x, model.y, model.hyper)
    pred = gp.predict(train, xs, hyper_star, model.kernel_set,
                      alpha_level=alpha_level, include_noise=include_noise,
                      interval=interval)
    return _destandardize(model, pred)


def predict_batched(model: TrainedModel, x_star_raw, k: int | None = None,
                    alpha_level: float = 0.05, include_noise: bool = False,
                    interval: str = "t") -> gp.Prediction:
    """Neighbor-batched prediction (one GP solve per distinct neighbor set)."""
    x_raw = _check_query(model, x_star_raw)
    if x_raw.shape[0] == 0:
        return _empty_prediction(alpha_level)
    xs = model.scaler.transform_x(x_raw)
    hyper_star = hyper_for(model.theta_net, model.sigma_net, xs,
                           model.config.sigma2_floor)
    if k is None:
        k = model.config.prediction_k or model.config.batch_size
    k = min(max(int(k), 1), model.n)

    groups: dict = {}
    for i in range(xs.shape[0]):
        key = tuple(np.sort(model.index.query(xs[i], k)))
        groups.setdefault(key, []).append(i)

    n_star = xs.shape[0]
    mean = np.empty(n_star)
    variance = np.empty(n_star)
    ci_low = np.empty(n_star)
    ci_high = np.empty(n_star)
    clamped = [0]

    def solve_group(item):
        key, ids = item
        sel = np.asarray(key, dtype=np.intp)
        ids = np.asarray(ids, dtype=np.intp)
        sub = gp.GpBatch(model.x[sel], model.y[sel], model.hyper.take(sel))
        pred = gp.predict(sub, xs[ids], hyper_star.take(ids), model.kernel_set,
                          alpha_level=alpha_level, include_noise=include_noise,
                          interval=interval)
        mean[ids] = pred.mean
        variance[ids] = pred.variance
        ci_low[ids] = pred.ci_low
        ci_high[ids] = pred.ci_high
        clamped[0] += pred.clamped

    workers = worker_count()
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(solve_group, groups.items()))
    else:
        for item in groups.items():
            solve_group(item)
    pred = gp.Prediction(mean, variance, ci_low, ci_high, alpha_level, clamped[0])
    return _destandardize(model, pred)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _specs_to_json(specs) -> list:
    return [[s.in_units, s.out_units, s.activation] for s in specs]


def _specs_from_json(rows) -> list:
    return [LayerSpec(int(r[0]), int(r[1]), str(r[2])) for r in rows]


def _model_arrays(model: TrainedModel) -> list:
    entries = []
    for prefix, net in (("theta", model.theta_net), ("sigma", model.sigma_net)):
        for i, (w, b) in enumerate(zip(net.params.weights, net.params.biases)):
            entries.append((f"{prefix}_w{i}", w))
            entries.append((f"{prefix}_b{i}", b))
    entries.append(("train_x", model.x))
    entries.append(("train_y", model.y))
    return entries


def save(model: TrainedModel, path) -> None:
    """Write the versioned binary container (see module docstring)."""
    arrays = _model_arrays(model)
    manifest = {
        "columns": model.columns,
        "config": model.config.to_dict(),
        "scaler": model.scaler.to_dict(),
        "theta_specs": _specs_to_json(model.theta_net.specs),
        "sigma_specs": _specs_to_json(model.sigma_net.specs),
        "log": model.log.to_dict(),
        "arrays": [{"name": name, "shape": list(a.shape)} for name, a in arrays],
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    out = bytearray()
    out += MODEL_MAGIC
    out += struct.pack("<B", MODEL_FORMAT_VERSION)
    out += struct.pack("<I", len(blob))
    out += blob
    for _, a in arrays:
        out += np.ascontiguousarray(a, dtype="<f8").tobytes()
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def load(path) -> TrainedModel:
    """Read a model file; checks magic, version and CRC before decoding."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MODEL_MAGIC) + 1:
        raise ChecksumMismatch("file is truncated")
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise FormatVersionMismatch("not a model file (bad magic)")
    version = data[len(MODEL_MAGIC)]
    if version != MODEL_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"unsupported format version {version} "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    head = len(MODEL_MAGIC) + 1
    if len(data) < head + 4 + 4:
        raise ChecksumMismatch("file is truncated")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != stored_crc:
        raise ChecksumMismatch("CRC32 does not match file contents")
    (manifest_len,) = struct.unpack("<I", data[head : head + 4])
    body = head + 4
    manifest = json.loads(data[body : body + manifest_len].decode())
    offset = body + manifest_len
    arrays = {}
    for entry in manifest["arrays"]:
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        raw = data[offset : offset + 8 * count]
        if len(raw) != 8 * count:
            raise ChecksumMismatch("array section is truncated")
        arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        offset += 8 * count
    if offset != len(data) - 4:
        raise ChecksumMismatch("trailing bytes after declared arrays")

    config = TrainConfig.from_dict(manifest["config"])
    scaler = Scaler.from_dict(manifest["scaler"])
    reg = RegularizerSpec(config.dropout_rate, config.input_noise_std)

    def rebuild(prefix, specs_json):
        specs = _specs_from_json(specs_json)
        from .mlp import MlpParams

        params = MlpParams(
            weights=[arrays[f"{prefix}_w{i}"] for i in range(len(specs))],
            biases=[arrays[f"{prefix}_b{i}"] for i in range(len(specs))],
        )
        return Mlp(specs, params=params, regularizer=reg)

    theta_net = rebuild("theta", manifest["theta_specs"])
    sigma_net = rebuild("sigma", manifest["sigma_specs"])
    return _assemble(
        theta_net,
        sigma_net,
        scaler,
        config,
        arrays["train_x"],
        arrays["train_y"],
        manifest["columns"],
        TrainingLog.from_dict(manifest["log"]),
    )
