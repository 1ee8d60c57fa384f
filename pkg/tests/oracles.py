"""Independent oracles shared by the test modules.

These deliberately avoid the closed forms under test: matrix exponentials go
through scipy's scaling-and-squaring expm, dexp maps through truncated
operator series, derivatives through central finite differences.
"""


import numpy as np
from scipy.linalg import expm

from screwmbs.liealg import Pose, hat3, se3_ad, se3_hat

# Bernoulli numbers B_0..B_12 with the B_1 = -1/2 convention.
BERNOULLI = [1.0, -0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0,
             -1.0 / 30.0, 0.0, 5.0 / 66.0, 0.0, -691.0 / 2730.0]


def expm_so3(xi):
    return expm(hat3(xi))


def expm_se3(x) -> Pose:
    m = expm(se3_hat(x))
    return Pose(m[:3, :3], m[:3, 3])


def dexp_series(ad, nterms=12):
    """Truncated sum ad^i/(i+1)! for a given adjoint matrix."""
    n = ad.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    fact = 1.0
    for i in range(1, nterms):
        term = term @ ad
        fact *= i + 1
        out = out + term / fact
    return out


def dexpinv_series(ad, nterms=12):
    """Truncated Bernoulli series sum B_i/i! ad^i."""
    n = ad.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    fact = 1.0
    for i in range(1, nterms):
        term = term @ ad
        fact *= i
        out = out + (BERNOULLI[i] / fact) * term
    return out


def se3_dexp_series(x, nterms=12):
    return dexp_series(se3_ad(x), nterms)


def so3_dexp_series(xi, nterms=12):
    return dexp_series(hat3(xi), nterms)


def central_diff(f, t, h=1e-6):
    return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2.0 * h)


def random_screw(rng, angle_lo=0.1, angle_hi=3.0, eta_scale=2.0):
    xi = rng.normal(size=3)
    xi *= rng.uniform(angle_lo, angle_hi) / np.linalg.norm(xi)
    eta = rng.uniform(-eta_scale, eta_scale, 3)
    return np.concatenate([xi, eta])


def random_rotation(rng, angle_hi=3.0):
    xi = rng.normal(size=3)
    xi *= rng.uniform(0.05, angle_hi) / np.linalg.norm(xi)
    return expm(hat3(xi))


def random_pose(rng, angle_hi=3.0, r_scale=2.0) -> Pose:
    return Pose(random_rotation(rng, angle_hi), rng.uniform(-r_scale, r_scale, 3))
