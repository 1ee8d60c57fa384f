"""Singularity-free global parameterizations of the two c-space groups.

Euler parameters (unit quaternions) cover SO(3)xR3, dual quaternions cover
SE(3).  Quaternions are flat arrays ``(q0, q1, q2, q3)`` with the scalar
first.  A dual quaternion bundles the rotation quaternion Q with a dual part
Qe subject to ``|Q| = 1`` and the Pluecker condition ``Q . Qe = 0``; the
translation enters through ``Qe = 0.5 * (0, r) * Q``.

The H matrices map parameter rates to twists, ``V = H(A) @ Adot``.  Their
"inverse" is the constrained right inverse: the 6x8 map is augmented with
the gradients of the two invariants, which makes the reconstructed rates
tangent to the constraint manifold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liealg import Pose, hat3

_UNIT_TOL = 1e-8


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_mul(q, p) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    qv, pv = q[1:], p[1:]
    return np.concatenate([
        [q[0] * p[0] - qv @ pv],
        q[0] * pv + p[0] * qv + np.cross(qv, pv),
    ])


def quat_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def hamilton_plus(q) -> np.ndarray:
    """Left-multiplication matrix: quat_mul(q, p) == hamilton_plus(q) @ p."""
    q = np.asarray(q, dtype=float)
    m = np.empty((4, 4))
    m[0, 0] = q[0]
    m[0, 1:] = -q[1:]
    m[1:, 0] = q[1:]
    m[1:, 1:] = q[0] * np.eye(3) + hat3(q[1:])
    return m


def hamilton_minus(q) -> np.ndarray:
    """Right-multiplication matrix: quat_mul(p, q) == hamilton_minus(q) @ p."""
    q = np.asarray(q, dtype=float)
    m = np.empty((4, 4))
    m[0, 0] = q[0]
    m[0, 1:] = -q[1:]
    m[1:, 0] = q[1:]
    m[1:, 1:] = q[0] * np.eye(3) - hat3(q[1:])
    return m


def dmat(q) -> np.ndarray:
    """3x4 matrix D(Q) = [-q | q0 I + q^]."""
    q = np.asarray(q, dtype=float)
    m = np.empty((3, 4))
    m[:, 0] = -q[1:]
    m[:, 1:] = q[0] * np.eye(3) + hat3(q[1:])
    return m


def emat(q) -> np.ndarray:
    """3x4 matrix E(Q) = [-q | q0 I - q^]."""
    q = np.asarray(q, dtype=float)
    m = np.empty((3, 4))
    m[:, 0] = -q[1:]
    m[:, 1:] = q[0] * np.eye(3) - hat3(q[1:])
    return m


def rotation_from_quat(q) -> np.ndarray:
    """R = D(Q) E(Q)^T for unit Q; raises if the norm is off by > 1e-8."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if abs(n - 1.0) > _UNIT_TOL:
        raise ValueError(f"quaternion norm {n:.12g} violates the unit invariant")
    return dmat(q) @ emat(q).T


def quat_from_rotation(r) -> np.ndarray:
    """Unit quaternion of a rotation matrix (Shepperd's method)."""
    r = np.asarray(r, dtype=float)
    t = np.trace(r)
    if t > 0:
        s = 2.0 * np.sqrt(t + 1.0)
        q = np.array([0.25 * s,
                      (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s,
                      (r[1, 0] - r[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(1.0 + r[i, i] - r[j, j] - r[k, k])
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class DualQuaternion:
    """Rotation quaternion plus dual part; 8 dependent pose coordinates."""

    q: np.ndarray
    qe: np.ndarray

    @staticmethod
    def identity() -> "DualQuaternion":
        return DualQuaternion(quat_identity(), np.zeros(4))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.qe])

    @staticmethod
    def from_vector(v) -> "DualQuaternion":
        v = np.asarray(v, dtype=float)
        return DualQuaternion(v[:4].copy(), v[4:].copy())

    def norm_defect(self) -> float:
        return abs(float(np.linalg.norm(self.q)) - 1.0)

    def plucker_defect(self) -> float:
        return abs(float(self.q @ self.qe))

    def negated(self) -> "DualQuaternion":
        return DualQuaternion(-self.q, -self.qe)


def dq_mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return DualQuaternion(
        quat_mul(a.q, b.q),
        quat_mul(a.q, b.qe) + quat_mul(a.qe, b.q),
    )


def dq_from_pose(c: Pose) -> DualQuaternion:
    q = quat_from_rotation(c.R)
    t = np.concatenate([[0.0], c.r])
    return DualQuaternion(q, 0.5 * quat_mul(t, q))


def pose_from_dq(a: DualQuaternion) -> Pose:
    r = 2.0 * quat_mul(a.qe, quat_conj(a.q))[1:]
    return Pose(rotation_from_quat(a.q / np.linalg.norm(a.q)), r)


def dq_align(a: DualQuaternion, ref: DualQuaternion) -> DualQuaternion:
    """Pick the sign of the double cover closest to a reference."""
    return a.negated() if float(a.q @ ref.q) < 0.0 else a


# ---------------------------------------------------------------------------
# kinematic reconstruction maps
# ---------------------------------------------------------------------------

def h_body(a: DualQuaternion) -> np.ndarray:
    """6x8 map with V_body = h_body(A) @ d(A)/dt along invariant-preserving
    trajectories."""
    e = emat(a.q)
    h = np.zeros((6, 8))
    h[:3, :4] = 2.0 * e
    h[3:, :4] = -2.0 * (e @ dmat(a.q).T @ dmat(a.qe))
    h[3:, 4:] = 2.0 * e
    return h


def h_mixed(a: DualQuaternion) -> np.ndarray:
    """6x8 map giving the mixed velocity (body omega, spatial rdot)."""
    h = np.zeros((6, 8))
    h[:3, :4] = 2.0 * emat(a.q)
    h[3:, :4] = -2.0 * dmat(a.qe)
    h[3:, 4:] = 2.0 * dmat(a.q)
    return h


def h_euler_params(q, r=None) -> np.ndarray:
    """6x7 map for the Euler-parameter chart of SO(3)xR3; the translation
    block is the identity (decoupled)."""
    h = np.zeros((6, 7))
    h[:3, :4] = 2.0 * emat(q)
    h[3:, 4:] = np.eye(3)
    return h


def reconstruct_rates(a: DualQuaternion, v, mixed: bool = False) -> np.ndarray:
    """Rates dA/dt with H @ rates = V, tangent to both invariants.

    The 6x8 H is augmented with the normalization and Pluecker gradient rows
    (zero right-hand sides) and the square system is solved directly.
    """
    v = np.asarray(v, dtype=float)
    m = np.zeros((8, 8))
    m[:6] = h_mixed(a) if mixed else h_body(a)
    m[6, :4] = a.q
    m[7, :4] = a.qe
    m[7, 4:] = a.q
    rhs = np.zeros(8)
    rhs[:6] = v
    return np.linalg.solve(m, rhs)


def euler_reconstruct_rates(q, r, v_mixed) -> np.ndarray:
    """Rates (Qdot, rdot) for the Euler-parameter chart, norm-tangent."""
    v_mixed = np.asarray(v_mixed, dtype=float)
    m = np.zeros((7, 7))
    m[:6] = h_euler_params(q, r)
    m[6, :4] = q
    rhs = np.zeros(7)
    rhs[:6] = v_mixed
    return np.linalg.solve(m, rhs)
