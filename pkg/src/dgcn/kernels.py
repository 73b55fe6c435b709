"""Correlation functions with per-point length-scales.

Every correlation here is a function of the Euclidean distance between
*warped* inputs: row p of the input matrix is scaled elementwise by its own
length-scale vector before distances are taken,

    d(p, q) = || theta_p * x_p - theta_q * x_q ||_2.

Because the warp is a deterministic map applied to the points themselves,
each correlation stays a valid (positive semidefinite) kernel for any
length-scale field, including negative entries.  Several kernels are
evaluated on the same points and their matrices summed; every correlation
equals 1 at zero distance, so the summed matrix has diagonal exactly n_k.

Length-scale fields are stored as an (N, n_v * n_k) block matrix: columns
[i*n_v, (i+1)*n_v) hold the per-dimension scales for kernel i.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


class KernelId(enum.Enum):
    """The five supported correlation functions."""

    SQUARED_EXP = "squared_exp"
    ABS_EXP = "abs_exp"
    MATERN32 = "matern32"
    MATERN52 = "matern52"
    RATIONAL_QUADRATIC = "rational_quadratic"


ALL_KERNELS = (
    KernelId.SQUARED_EXP,
    KernelId.ABS_EXP,
    KernelId.MATERN32,
    KernelId.MATERN52,
    KernelId.RATIONAL_QUADRATIC,
)


@dataclass(frozen=True)
class KernelSet:
    """Ordered collection of active correlation functions."""

    kernels: tuple = ALL_KERNELS

    def __post_init__(self):
        if not self.kernels:
            raise ValueError("kernel set must not be empty")
        object.__setattr__(self, "kernels", tuple(self.kernels))

    @property
    def n_k(self) -> int:
        return len(self.kernels)

    def names(self) -> list[str]:
        return [k.value for k in self.kernels]

    @classmethod
    def from_names(cls, names) -> "KernelSet":
        return cls(tuple(KernelId(n) for n in names))


def kernel_value(kernel: KernelId, d):
    """Correlation at distance d >= 0 (scalar or array, vectorized)."""
    d = np.asarray(d, dtype=np.float64)
    if kernel is KernelId.SQUARED_EXP:
        out = np.exp(-0.5 * d * d)
    elif kernel is KernelId.ABS_EXP:
        out = np.exp(-d)
    elif kernel is KernelId.MATERN32:
        out = (1.0 + _SQRT3 * d) * np.exp(-_SQRT3 * d)
    elif kernel is KernelId.MATERN52:
        out = (1.0 + _SQRT5 * d + (5.0 / 3.0) * d * d) * np.exp(-_SQRT5 * d)
    elif kernel is KernelId.RATIONAL_QUADRATIC:
        # Linear distance term by design; see README notes.
        out = (1.0 + 0.25 * d) ** -2.0
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown kernel {kernel!r}")
    return out if out.ndim else float(out)


def kernel_deriv(kernel: KernelId, d):
    """Derivative of kernel_value with respect to the distance.

    Defined as 0 at d == 0 for every kernel: zero distance only occurs on
    the covariance diagonal, whose value is constant 1, so no gradient
    flows through it even for the kernels that are non-smooth there.
    """
    d = np.asarray(d, dtype=np.float64)
    if kernel is KernelId.SQUARED_EXP:
        out = -d * np.exp(-0.5 * d * d)
    elif kernel is KernelId.ABS_EXP:
        out = -np.exp(-d)
    elif kernel is KernelId.MATERN32:
        out = -3.0 * d * np.exp(-_SQRT3 * d)
    elif kernel is KernelId.MATERN52:
        out = -(5.0 / 3.0) * d * (1.0 + _SQRT5 * d) * np.exp(-_SQRT5 * d)
    elif kernel is KernelId.RATIONAL_QUADRATIC:
        out = -0.5 * (1.0 + 0.25 * d) ** -3.0
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown kernel {kernel!r}")
    out = np.where(d == 0.0, 0.0, out)
    return out if out.ndim else float(out)


def scale_points(x, theta) -> np.ndarray:
    """Warp inputs by their per-point length-scales: z[p, v] = theta[p, v] * x[p, v]."""
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if x.shape != theta.shape:
        raise DimensionMismatch(
            f"points {x.shape} and length-scales {theta.shape} differ in shape"
        )
    return x * theta


def theta_block(theta, n_v: int, kernel_index: int) -> np.ndarray:
    """Slice the columns of the block matrix belonging to one kernel."""
    return theta[:, kernel_index * n_v : (kernel_index + 1) * n_v]


def cov_matrix(kset: KernelSet, xa, xb, theta_a, theta_b) -> np.ndarray:
    """Summed covariance between two point sets under their length-scale fields.

    Entry (p, q) is sum_i k_i(||theta_i_p * x_p - theta_i_q * x_q||).
    Distances are computed pairwise and exactly, so identical rows yield a
    distance of exactly 0 and the same-points diagonal is exactly n_k.
    """
    xa = np.asarray(xa, dtype=np.float64)
    xb = np.asarray(xb, dtype=np.float64)
    theta_a = np.asarray(theta_a, dtype=np.float64)
    theta_b = np.asarray(theta_b, dtype=np.float64)
    if xa.ndim != 2 or xb.ndim != 2 or xa.shape[1] != xb.shape[1]:
        raise DimensionMismatch(
            f"point sets {xa.shape} and {xb.shape} are not compatible"
        )
    n_v = xa.shape[1]
    want = n_v * kset.n_k
    if theta_a.shape != (xa.shape[0], want) or theta_b.shape != (xb.shape[0], want):
        raise DimensionMismatch(
            "length-scale blocks must be (N, n_v * n_k) = "
            f"(*, {want}), got {theta_a.shape} and {theta_b.shape}"
        )
    out = np.zeros((xa.shape[0], xb.shape[0]))
    for i, kern in enumerate(kset.kernels):
        za = xa * theta_block(theta_a, n_v, i)
        zb = xb * theta_block(theta_b, n_v, i)
        out += kernel_value(kern, cdist(za, zb))
    return out
