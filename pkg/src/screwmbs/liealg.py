"""Closed-form kernels for SO(3), SE(3) and SO(3)xR3.

Conventions used throughout the package:

* A screw coordinate vector is a flat 6-array ``X = (xi, eta)`` with the
  rotation part first.  For SE(3) the pair is a genuine screw; for the
  direct product group ``eta`` is a plain translation vector.
* Poses are ``(R, r)`` pairs.  ``compose(c1, c2)`` is the matrix product
  ``C1 C2`` in both groups: the frame transformation
  ``(R1@R2, r1 + R1@r2)`` on SE(3), componentwise rotation product and
  translation sum on SO(3)xR3.
* All dexp maps are right-translated: the body-fixed velocity of a curve
  ``exp(X(t))`` is ``V = dexp(-X) @ Xdot``, so velocity reconstruction
  always evaluates the maps at the negated argument.

Everything operates on plain float ndarrays and is allocation-light; these
functions sit in the integrator's inner loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi

# Closed forms are used above this rotation angle, truncated series below.
SMALL_ANGLE = 1e-4
# Scalar coefficient functions switch to their Taylor polynomials below this
# angle; the closed-form expressions cancel catastrophically as x -> 0.
_COEF_SERIES_ANGLE = 0.25
_POLE_MARGIN = 1e-6
_BRANCH_MARGIN = 1e-6

_EYE3 = np.eye(3)
_EYE6 = np.eye(6)


class BranchCutError(ValueError):
    """Logarithm evaluated too close to the pi branch cut."""


class PoleError(ValueError):
    """dexp/dexpinv evaluated at or beyond the 2*pi singularity."""


# ---------------------------------------------------------------------------
# scalar coefficient functions (hybrid closed form / Taylor evaluation)
# ---------------------------------------------------------------------------

def _sinc(x: float) -> float:
    """sin(x)/x."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 1.0 + x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 + x2 / 362880.0)))
    return math.sin(x) / x


def _cos1(x: float) -> float:
    """(1 - cos x)/x**2."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 0.5 + x2 * (-1.0 / 24.0 + x2 * (1.0 / 720.0 + x2 * (-1.0 / 40320.0 + x2 / 3628800.0)))
    s = math.sin(0.5 * x)
    return 2.0 * s * s / (x * x)


def _xs3(x: float) -> float:
    """(x - sin x)/x**3."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 1.0 / 6.0 + x2 * (-1.0 / 120.0 + x2 * (1.0 / 5040.0 + x2 * (-1.0 / 362880.0 + x2 / 39916800.0)))
    return (x - math.sin(x)) / (x * x * x)


def _dinv(x: float) -> float:
    """(1 - (x/2) cot(x/2))/x**2, the so(3) dexpinv coefficient."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 1.0 / 12.0 + x2 * (1.0 / 720.0 + x2 * (1.0 / 30240.0 + x2 * (1.0 / 1209600.0 + x2 / 47900160.0)))
    return (1.0 - 0.5 * x / math.tan(0.5 * x)) / (x * x)


def _q2(x: float) -> float:
    """(x**2 + 2 cos x - 2)/(2 x**4)."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 1.0 / 24.0 + x2 * (-1.0 / 720.0 + x2 * (1.0 / 40320.0 + x2 * (-1.0 / 3628800.0 + x2 / 479001600.0)))
    return (x * x + 2.0 * math.cos(x) - 2.0) / (2.0 * x ** 4)


def _q3(x: float) -> float:
    """(2x - 3 sin x + x cos x)/(2 x**5)."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return 1.0 / 120.0 + x2 * (-1.0 / 2520.0 + x2 * (1.0 / 120960.0 + x2 * (-1.0 / 9979200.0 + x2 / 1245404160.0)))
    return (2.0 * x - 3.0 * math.sin(x) + x * math.cos(x)) / (2.0 * x ** 5)


def _adpoly2(x: float) -> float:
    """2/x**2 + (x + 3 sin x)/(4x (cos x - 1))."""
    if x < _COEF_SERIES_ANGLE:
        x4 = x ** 4
        return 1.0 / 12.0 + x4 * (-1.0 / 30240.0 + x * x * (-1.0 / 604800.0 - x * x / 15966720.0))
    return 2.0 / (x * x) + (x + 3.0 * math.sin(x)) / (4.0 * x * (math.cos(x) - 1.0))


def _adpoly4(x: float) -> float:
    """1/x**4 + (x + sin x)/(4 x**3 (cos x - 1))."""
    if x < _COEF_SERIES_ANGLE:
        x2 = x * x
        return -1.0 / 720.0 + x2 * (-1.0 / 15120.0 + x2 * (-1.0 / 403200.0 - x2 / 11975040.0))
    return 1.0 / x ** 4 + (x + math.sin(x)) / (4.0 * x ** 3 * (math.cos(x) - 1.0))


def _check_pole(x: float) -> None:
    if x >= TAU - _POLE_MARGIN:
        raise PoleError(f"rotation angle {x:.6g} at or beyond the 2*pi dexp pole")


# ---------------------------------------------------------------------------
# SO(3)
# ---------------------------------------------------------------------------

def hat3(v) -> np.ndarray:
    """Cross-product matrix: hat3(x) @ y == cross(x, y)."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def cross3(a, b) -> np.ndarray:
    """3-vector cross product; avoids np.cross overhead in hot loops."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def vee3(m) -> np.ndarray:
    """Inverse of hat3 for a skew-symmetric 3x3 matrix."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(xi) -> np.ndarray:
    """Rotation about axis xi/|xi| by angle |xi| (Euler-Rodrigues)."""
    xi = np.asarray(xi, dtype=float)
    x = math.sqrt(xi @ xi)
    h = hat3(xi)
    return _EYE3 + _sinc(x) * h + _cos1(x) * (h @ h)


def so3_log(r) -> np.ndarray:
    """Rotation vector of R; rejects angles within 1e-6 of pi.

    Accuracy degrades like eps/sin(theta) approaching the cut; callers
    (error metrics, exp roundtrips) never legitimately operate there.
    """
    r = np.asarray(r, dtype=float)
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    s = 0.5 * math.sqrt(w @ w)          # sin(theta)
    c = 0.5 * (np.trace(r) - 1.0)       # cos(theta)
    theta = math.atan2(s, min(1.0, max(-1.0, c)))
    if theta >= math.pi - _BRANCH_MARGIN:
        raise BranchCutError(f"rotation angle {theta:.9f} within 1e-6 of the pi branch cut")
    return (0.5 / _sinc(theta)) * w


def so3_dexp(xi) -> np.ndarray:
    """Right-translated tangent of exp on SO(3): body omega = so3_dexp(-xi) @ xidot."""
    xi = np.asarray(xi, dtype=float)
    x = math.sqrt(xi @ xi)
    h = hat3(xi)
    return _EYE3 + _cos1(x) * h + _xs3(x) * (h @ h)


def so3_dexpinv(xi) -> np.ndarray:
    """Matrix inverse of so3_dexp; pole at |xi| = 2*pi."""
    xi = np.asarray(xi, dtype=float)
    x = math.sqrt(xi @ xi)
    _check_pole(x)
    h = hat3(xi)
    return _EYE3 - 0.5 * h + _dinv(x) * (h @ h)


def rotation_error(r_ref, r) -> float:
    """Relative rotation angle |log(R_ref^T R)|."""
    return float(np.linalg.norm(so3_log(np.asarray(r_ref).T @ np.asarray(r))))


def is_rotation(r, tol: float = 1e-12) -> bool:
    r = np.asarray(r, dtype=float)
    return (np.abs(r.T @ r - _EYE3).max() <= tol
            and abs(np.linalg.det(r) - 1.0) <= tol)


# ---------------------------------------------------------------------------
# poses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """Rigid-body configuration: rotation matrix R and position r.

    The same pair is interpreted under either group's composition law; the
    group objects below decide what composition means.
    """

    R: np.ndarray
    r: np.ndarray

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 representative."""
        m = np.eye(4)
        m[:3, :3] = self.R
        m[:3, 3] = self.r
        return m

    def orthonormality_defect(self) -> float:
        return float(np.abs(self.R.T @ self.R - _EYE3).max())

    def renormalize(self) -> "Pose":
        """Project R back onto SO(3) (explicit; never done silently)."""
        u, _, vt = np.linalg.svd(self.R)
        d = np.sign(np.linalg.det(u @ vt))
        return Pose(u @ np.diag([1.0, 1.0, d]) @ vt, self.r.copy())

    def validate(self, tol: float = 1e-12) -> None:
        if not (np.isfinite(self.R).all() and np.isfinite(self.r).all()):
            raise ValueError("pose has non-finite entries")
        if not is_rotation(self.R, tol):
            raise ValueError("R is not a rotation matrix within tolerance")


def se3_hat(x) -> np.ndarray:
    """4x4 matrix representative of a screw coordinate vector."""
    x = np.asarray(x, dtype=float)
    m = np.zeros((4, 4))
    m[:3, :3] = hat3(x[:3])
    m[:3, 3] = x[3:]
    return m


def se3_compose(c1: Pose, c2: Pose) -> Pose:
    """Frame transformation product C1*C2 = (R1 R2, r1 + R1 r2), the
    homogeneous matrix product in argument order (c2 acts first)."""
    return Pose(c1.R @ c2.R, c1.r + c1.R @ c2.r)


def se3_inverse(c: Pose) -> Pose:
    return Pose(c.R.T, -(c.R.T @ c.r))


def se3_exp(x) -> Pose:
    """Finite screw motion exp(X) = (exp(xi), dexp_xi @ eta)."""
    x = np.asarray(x, dtype=float)
    xi, eta = x[:3], x[3:]
    return Pose(so3_exp(xi), so3_dexp(xi) @ eta)


def se3_log(c: Pose) -> np.ndarray:
    """Inverse of se3_exp (same branch restrictions as so3_log)."""
    xi = so3_log(c.R)
    eta = so3_dexpinv(xi) @ c.r
    return np.concatenate([xi, eta])


def se3_bracket(x1, x2) -> np.ndarray:
    """Screw product [X1, X2] = (xi1 x xi2, xi1 x eta2 - xi2 x eta1)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.concatenate([
        np.cross(x1[:3], x2[:3]),
        np.cross(x1[:3], x2[3:]) - np.cross(x2[:3], x1[3:]),
    ])


def se3_ad(x) -> np.ndarray:
    """Matrix of the se(3) bracket: se3_ad(X1) @ X2 == se3_bracket(X1, X2)."""
    x = np.asarray(x, dtype=float)
    m = np.zeros((6, 6))
    hx = hat3(x[:3])
    m[:3, :3] = hx
    m[3:, 3:] = hx
    m[3:, :3] = hat3(x[3:])
    return m


def _se3_q(xi, eta, x: float) -> np.ndarray:
    """Lower-left block of se3_dexp (coefficients validated against the
    ad-power series; the grouping is one of several equivalent forms)."""
    hx = hat3(xi)
    he = hat3(eta)
    hxhe = hx @ he
    hehx = he @ hx
    hxhehx = hxhe @ hx
    return (0.5 * he
            + _xs3(x) * (hxhe + hehx + hxhehx)
            + _q2(x) * (hx @ hxhe + hehx @ hx - 3.0 * hxhehx)
            + _q3(x) * (hxhehx @ hx + hx @ hxhehx))


def _se3_dexp_adseries(x) -> np.ndarray:
    """Truncated dexp = sum ad^i/(i+1)!; exact to roundoff for tiny |xi|."""
    a = se3_ad(x)
    a2 = a @ a
    a3 = a2 @ a
    return _EYE6 + 0.5 * a + a2 / 6.0 + a3 / 24.0 + (a3 @ a) / 120.0


def _se3_dexpinv_adseries(x) -> np.ndarray:
    """Truncated Bernoulli series I - ad/2 + ad^2/12 - ad^4/720."""
    a = se3_ad(x)
    a2 = a @ a
    return _EYE6 - 0.5 * a + a2 / 12.0 - (a2 @ a2) / 720.0


def se3_dexp(x) -> np.ndarray:
    """6x6 right-translated dexp on SE(3): V = se3_dexp(-X) @ Xdot."""
    x = np.asarray(x, dtype=float)
    xi, eta = x[:3], x[3:]
    xn = math.sqrt(xi @ xi)
    if xn < SMALL_ANGLE:
        return _se3_dexp_adseries(x)
    m = np.zeros((6, 6))
    j = so3_dexp(xi)
    m[:3, :3] = j
    m[3:, 3:] = j
    m[3:, :3] = _se3_q(xi, eta, xn)
    return m


def se3_dexpinv(x) -> np.ndarray:
    """Inverse of se3_dexp, block-triangular form with U = -J^-1 Q J^-1."""
    x = np.asarray(x, dtype=float)
    xi, eta = x[:3], x[3:]
    xn = math.sqrt(xi @ xi)
    _check_pole(xn)
    if xn < SMALL_ANGLE:
        return _se3_dexpinv_adseries(x)
    m = np.zeros((6, 6))
    ji = so3_dexpinv(xi)
    m[:3, :3] = ji
    m[3:, 3:] = ji
    m[3:, :3] = -ji @ _se3_q(xi, eta, xn) @ ji
    return m


def se3_dexpinv_adpoly(x) -> np.ndarray:
    """Alternative closed form of se3_dexpinv as a polynomial in ad_X.

    Independent evaluation route kept for cross-checking the block form.
    """
    x = np.asarray(x, dtype=float)
    xn = math.sqrt(x[:3] @ x[:3])
    _check_pole(xn)
    a = se3_ad(x)
    a2 = a @ a
    return _EYE6 - 0.5 * a + _adpoly2(xn) * a2 + _adpoly4(xn) * (a2 @ a2)


# ---------------------------------------------------------------------------
# SO(3) x R3 (direct product)
# ---------------------------------------------------------------------------

def dp_compose(c1: Pose, c2: Pose) -> Pose:
    """Direct product: rotations compose, translations add."""
    return Pose(c1.R @ c2.R, c1.r + c2.r)


def dp_inverse(c: Pose) -> Pose:
    return Pose(c.R.T, -c.r)


def dp_exp(x) -> Pose:
    x = np.asarray(x, dtype=float)
    return Pose(so3_exp(x[:3]), x[3:].copy())


def dp_log(c: Pose) -> np.ndarray:
    return np.concatenate([so3_log(c.R), c.r])


def dp_matrix(c: Pose) -> np.ndarray:
    """7x7 matrix representative of the direct product group."""
    m = np.eye(7)
    m[:3, :3] = c.R
    m[3:6, 6] = c.r
    return m


def dp_bracket(x1, x2) -> np.ndarray:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.concatenate([np.cross(x1[:3], x2[:3]), np.zeros(3)])


def dp_ad(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = np.zeros((6, 6))
    m[:3, :3] = hat3(x[:3])
    return m


def dp_dexp(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = np.zeros((6, 6))
    m[:3, :3] = so3_dexp(x[:3])
    m[3:, 3:] = _EYE3
    return m


def dp_dexpinv(x) -> np.ndarray:
    """Block-diagonal (so3_dexpinv, I): rotation and translation decouple."""
    x = np.asarray(x, dtype=float)
    m = np.zeros((6, 6))
    m[:3, :3] = so3_dexpinv(x[:3])
    m[3:, 3:] = _EYE3
    return m


# ---------------------------------------------------------------------------
# mixed velocity and 3-angle parameterizations
# ---------------------------------------------------------------------------

def mixed_twist_matrix(x) -> np.ndarray:
    """A(X) = blockdiag(I, exp(xi)) @ se3_dexp(-X), mapping screw coordinate
    rates to the mixed velocity (omega, rdot)."""
    x = np.asarray(x, dtype=float)
    a = se3_dexp(-x)
    r = so3_exp(x[:3])
    a[3:, :] = r @ a[3:, :]
    return a


def three_angle_rates_matrix(axes, angles) -> np.ndarray:
    """Kinematic matrix B with omega = B @ thetadot for successive rotations
    about constant body axes (Euler for i=k, Bryant for distinct axes)."""
    e_i, e_j, e_k = (np.asarray(a, dtype=float) for a in axes)
    th = np.asarray(angles, dtype=float)
    rj = so3_exp(e_j * th[1])
    rk = so3_exp(e_k * th[2])
    return np.column_stack([rk.T @ (rj.T @ e_i), rk.T @ e_j, e_k])


# ---------------------------------------------------------------------------
# configuration-space group objects
# ---------------------------------------------------------------------------

class CSpaceGroup:
    """Behavior bundle of one candidate configuration-space Lie group."""

    name: str

    def compose(self, c1: Pose, c2: Pose) -> Pose:
        raise NotImplementedError

    def inverse(self, c: Pose) -> Pose:
        raise NotImplementedError

    def exp(self, x) -> Pose:
        raise NotImplementedError

    def log(self, c: Pose) -> np.ndarray:
        raise NotImplementedError

    def dexp(self, x) -> np.ndarray:
        raise NotImplementedError

    def dexpinv(self, x) -> np.ndarray:
        raise NotImplementedError

    def ad(self, x) -> np.ndarray:
        raise NotImplementedError

    def identity(self) -> Pose:
        return Pose.identity()

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class SE3Group(CSpaceGroup):
    """Semidirect product; elements are proper rigid body motions."""

    name = "se3"
    compose = staticmethod(se3_compose)
    inverse = staticmethod(se3_inverse)
    exp = staticmethod(se3_exp)
    log = staticmethod(se3_log)
    dexp = staticmethod(se3_dexp)
    dexpinv = staticmethod(se3_dexpinv)
    ad = staticmethod(se3_ad)

    @staticmethod
    def advance_parts(pose: Pose, phi) -> tuple[np.ndarray, np.ndarray]:
        """compose(pose, exp(phi)) split as (new rotation, translation
        increment), so long runs can accumulate positions compensated."""
        e = se3_exp(phi)
        return pose.R @ e.R, pose.R @ e.r


class DirectProductGroup(CSpaceGroup):
    """SO(3) x R3; represents configurations but not frame transformations."""

    name = "so3xr3"
    compose = staticmethod(dp_compose)
    inverse = staticmethod(dp_inverse)
    exp = staticmethod(dp_exp)
    log = staticmethod(dp_log)
    dexp = staticmethod(dp_dexp)
    dexpinv = staticmethod(dp_dexpinv)
    ad = staticmethod(dp_ad)

    @staticmethod
    def advance_parts(pose: Pose, phi) -> tuple[np.ndarray, np.ndarray]:
        e = dp_exp(phi)
        return pose.R @ e.R, e.r


SE3 = SE3Group()
SO3R3 = DirectProductGroup()

GROUPS = {SE3.name: SE3, SO3R3.name: SO3R3}
