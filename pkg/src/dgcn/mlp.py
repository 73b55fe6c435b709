"""Small dense feed-forward networks with hand-rolled backprop.

Two instances act as hypernetworks for the GP layer: one maps each input
point to its length-scale block, the other to its noise variance.  The
implementation is deliberately self-contained (no autodiff framework): the
GP loss hands a per-output upstream gradient to :meth:`Mlp.backward`, which
returns exact parameter gradients for the optimizer.

Training-mode forwards add Gaussian noise to the inputs and apply inverted
dropout to hidden activations; inference forwards are deterministic and
ignore both regularizers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _sigmoid

from .errors import DimensionMismatch, StaleMask

ACTIVATIONS = ("sigmoid", "relu", "linear", "softplus")


def _act(name, a):
    if name == "sigmoid":
        return _sigmoid(a)
    if name == "relu":
        return np.maximum(a, 0.0)
    if name == "linear":
        return a
    if name == "softplus":
        return np.logaddexp(0.0, a)
    raise ValueError(f"unknown activation {name!r}")


def _act_prime(name, a):
    if name == "sigmoid":
        s = _sigmoid(a)
        return s * (1.0 - s)
    if name == "relu":
        return (a > 0.0).astype(np.float64)
    if name == "linear":
        return np.ones_like(a)
    if name == "softplus":
        return _sigmoid(a)
    raise ValueError(f"unknown activation {name!r}")


def softplus_inv(y: float) -> float:
    """Inverse of log(1 + exp(x)); used to seed output biases."""
    return float(np.log(np.expm1(y)))


@dataclass(frozen=True)
class LayerSpec:
    in_units: int
    out_units: int
    activation: str

    def __post_init__(self):
        if self.in_units < 1 or self.out_units < 1:
            raise ValueError("layer units must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")


@dataclass(frozen=True)
class RegularizerSpec:
    """Training-only regularizers: input noise and inverted dropout."""

    dropout_rate: float = 0.1
    input_noise_std: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.input_noise_std < 0.0:
            raise ValueError("input_noise_std must be >= 0")

    @property
    def active(self) -> bool:
        return self.dropout_rate > 0.0 or self.input_noise_std > 0.0


@dataclass
class MlpParams:
    """Per-layer weights (out_units x in_units) and biases (out_units,)."""

    weights: list
    biases: list

    def copy(self) -> "MlpParams":
        return MlpParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def arrays(self) -> list:
        """Flat list view [W_0..W_L, b_0..b_L]; arrays are shared, not copied."""
        return list(self.weights) + list(self.biases)

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())


@dataclass
class MlpGrads:
    weights: list
    biases: list
    inputs: np.ndarray

    def arrays(self) -> list:
        return list(self.weights) + list(self.biases)


def glorot_init(specs, rng, output_bias: float = 0.0) -> MlpParams:
    """Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.

    The final layer's bias is set to ``output_bias`` so a freshly built
    hypernetwork starts near a chosen constant output.
    """
    weights, biases = [], []
    for spec in specs:
        lim = np.sqrt(6.0 / (spec.in_units + spec.out_units))
        weights.append(rng.uniform(-lim, lim, size=(spec.out_units, spec.in_units)))
        biases.append(np.zeros(spec.out_units))
    biases[-1][:] = output_bias
    return MlpParams(weights=weights, biases=biases)


@dataclass
class _ForwardCache:
    x: np.ndarray
    layer_inputs: list
    preacts: list
    masks: list


class Mlp:
    """Feed-forward network: affine layers with elementwise activations.

    A training-mode :meth:`forward` records the values backprop needs
    (including the dropout masks actually drawn); :meth:`backward` replays
    them.  Calling backward without a paired training forward raises
    :class:`StaleMask`.
    """

    def __init__(self, specs, params=None, regularizer=None, rng=None,
                 output_bias: float = 0.0):
        specs = tuple(specs)
        if not specs:
            raise ValueError("need at least one layer")
        for prev, nxt in zip(specs, specs[1:]):
            if prev.out_units != nxt.in_units:
                raise DimensionMismatch(
                    f"layer chain broken: {prev.out_units} -> {nxt.in_units}"
                )
        self.specs = specs
        self.regularizer = regularizer or RegularizerSpec(0.0, 0.0)
        if params is None:
            if rng is None:
                rng = np.random.default_rng(0)
            params = glorot_init(specs, rng, output_bias=output_bias)
        self.params = params
        self._cache = None

    @property
    def in_units(self) -> int:
        return self.specs[0].in_units

    @property
    def out_units(self) -> int:
        return self.specs[-1].out_units

    def forward(self, x, training: bool = False, rng=None) -> np.ndarray:
        """Run the network on a batch of rows.

        Inference mode (default) is deterministic and ignores both the rng
        and the regularizer.  Training mode applies input noise and
        inverted dropout (hidden layers only) and caches everything the
        paired :meth:`backward` call needs.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_units:
            raise DimensionMismatch(
                f"input must be (N, {self.in_units}), got {x.shape}"
            )
        reg = self.regularizer
        if training and reg.active and rng is None:
            raise ValueError("training forward with regularizers needs an rng")
        h = x
        if training and reg.input_noise_std > 0.0:
            h = h + rng.normal(0.0, reg.input_noise_std, size=h.shape)
        layer_inputs, preacts, masks = [], [], []
        last = len(self.specs) - 1
        for i, spec in enumerate(self.specs):
            layer_inputs.append(h)
            a = h @ self.params.weights[i].T + self.params.biases[i]
            preacts.append(a)
            h = _act(spec.activation, a)
            mask = None
            if training and reg.dropout_rate > 0.0 and i < last:
                keep = rng.random(h.shape) >= reg.dropout_rate
                mask = keep / (1.0 - reg.dropout_rate)
                h = h * mask
            masks.append(mask)
        if training:
            self._cache = _ForwardCache(x, layer_inputs, preacts, masks)
        return h

    def backward(self, upstream) -> MlpGrads:
        """Gradients of sum(upstream * output) for the cached forward pass."""
        cache = self._cache
        if cache is None:
            raise StaleMask("backward called without a paired training forward")
        d = np.asarray(upstream, dtype=np.float64)
        if d.shape != cache.preacts[-1].shape:
            raise DimensionMismatch(
                f"upstream gradient must be {cache.preacts[-1].shape}, got {d.shape}"
            )
        grad_w = [None] * len(self.specs)
        grad_b = [None] * len(self.specs)
        for i in range(len(self.specs) - 1, -1, -1):
            if cache.masks[i] is not None:
                d = d * cache.masks[i]
            d = d * _act_prime(self.specs[i].activation, cache.preacts[i])
            grad_w[i] = d.T @ cache.layer_inputs[i]
            grad_b[i] = d.sum(axis=0)
            d = d @ self.params.weights[i]
        return MlpGrads(weights=grad_w, biases=grad_b, inputs=d)

    def clear_cache(self) -> None:
        self._cache = None

    def cached_input(self):
        return None if self._cache is None else self._cache.x

    def loss_sq(self, x, y) -> float:
        """One-half squared error of an inference-mode forward pass."""
        pred = self.forward(x)
        y = np.asarray(y, dtype=np.float64).reshape(pred.shape)
        return float(0.5 * np.sum((pred - y) ** 2))

    def copy(self) -> "Mlp":
        return Mlp(self.specs, params=self.params.copy(),
                   regularizer=self.regularizer)


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "adam"  # sgd | adam | nadam
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.algorithm not in ("sgd", "adam", "nadam"):
            raise ValueError("algorithm must be sgd, adam or nadam")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be > 0")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d) -> "OptimizerConfig":
        return cls(**d)


class OptimizerState:
    """Moment accumulators and step counter for a list of parameter arrays.

    ``step`` updates the arrays in place; callers that need snapshots copy
    the parameters themselves.
    """

    def __init__(self, arrays, config: OptimizerConfig):
        self.config = config
        self.t = 0
        if config.algorithm == "sgd":
            self.m = self.v = None
        else:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]

    def step(self, arrays, grads) -> None:
        cfg = self.config
        if len(arrays) != len(grads):
            raise DimensionMismatch("parameter and gradient lists differ in length")
        self.t += 1
        if cfg.algorithm == "sgd":
            for p, g in zip(arrays, grads):
                p -= cfg.learning_rate * g
            return
        b1, b2 = cfg.beta1, cfg.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for i, (p, g) in enumerate(zip(arrays, grads)):
            m = self.m[i]
            v = self.v[i]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            v_hat = v / bc2
            denom = np.sqrt(v_hat) + cfg.epsilon
            if cfg.algorithm == "adam":
                p -= cfg.learning_rate * (m / bc1) / denom
            else:  # nadam: Nesterov look-ahead on the first moment
                p -= cfg.learning_rate * (
                    b1 * (m / bc1) + (1.0 - b1) * g / bc1
                ) / denom
