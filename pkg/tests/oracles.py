"""Independent reference implementations used only by the tests.

Everything here is deliberately written the slow, explicit way (dense
inverses, double loops) and never imports the package's own linear-algebra
or covariance code paths, so it can serve as an oracle for them.
"""

import numpy as np

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


def scalar_kernel(name, d):
    """Closed-form correlations, written independently of the package."""
    d = np.asarray(d, dtype=float)
    if name == "squared_exp":
        return np.exp(-0.5 * d**2)
    if name == "abs_exp":
        return np.exp(-d)
    if name == "matern32":
        return (1 + SQRT3 * d) * np.exp(-SQRT3 * d)
    if name == "matern52":
        return (1 + SQRT5 * d + 5.0 * d**2 / 3.0) * np.exp(-SQRT5 * d)
    if name == "rational_quadratic":
        return (1 + d / 4.0) ** -2
    raise KeyError(name)


def warped_cov(names, xa, xb, theta_a, theta_b):
    """Brute-force double-loop covariance for per-point length-scales."""
    n_v = xa.shape[1]
    out = np.zeros((xa.shape[0], xb.shape[0]))
    for ki, name in enumerate(names):
        ta = theta_a[:, ki * n_v : (ki + 1) * n_v]
        tb = theta_b[:, ki * n_v : (ki + 1) * n_v]
        for p in range(xa.shape[0]):
            for q in range(xb.shape[0]):
                d = np.linalg.norm(ta[p] * xa[p] - tb[q] * xb[q])
                out[p, q] += float(scalar_kernel(name, d))
    return out


def stationary_gp(name, x, y, theta, sigma2, x_star):
    """Textbook single-kernel GP with a shared ARD length-scale vector.

    Returns (mean, variance, nll) computed with explicit inverses and
    slogdet; the kernel argument is the distance between theta-scaled
    points.
    """

    def k(a, b):
        d = np.sqrt((((a * theta)[:, None, :] - (b * theta)[None, :, :]) ** 2).sum(-1))
        return scalar_kernel(name, d)

    n = x.shape[0]
    kxx = k(x, x) + sigma2 * np.eye(n)
    k_inv = np.linalg.inv(kxx)
    ks = k(x, x_star)
    mean = ks.T @ k_inv @ y
    variance = 1.0 - np.einsum("ij,ij->j", ks, k_inv @ ks)
    _, logdet = np.linalg.slogdet(kxx)
    nll = 0.5 * y @ k_inv @ y + 0.5 * logdet + 0.5 * n * np.log(2 * np.pi)
    return mean, variance, float(nll)


def stationary_nll(name, x, y, theta, sigma2):
    return stationary_gp(name, x, y, theta, sigma2, x[:1])[2]


# Frozen Student-t quantiles (two-sided), cross-checked against published
# distribution tables to 4+ significant digits.
STUDENT_T_TABLE = {
    # (upper tail probability complement, degrees of freedom): quantile
    (0.975, 100): 1.9839715184496334,
    (0.975, 10): 2.2281388519649385,
    (0.95, 5): 2.0150483733330233,
    (0.995, 29): 2.756385903670335,
}
