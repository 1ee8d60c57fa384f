"""Constrained Newton-Euler dynamics in body-fixed and mixed representations.

A model is a list of rigid bodies, lower-pair joints and force elements.
Depending on the configuration-space group the velocities are body-fixed
twists (SE(3), ``representation="body"``) or mixed velocities (SO(3)xR3,
``representation="mixed"``), and the constraint Jacobians are written for
the matching velocity coordinates.

Joint constraints are built from three row types:

* anchor rows: attachment points of the two bodies coincide.  In the
  body-fixed representation the mismatch is expressed in the child body's
  frame, which reproduces the textbook ``(r0^  -I)`` Jacobian of a grounded
  spherical joint; in the mixed representation it stays spatial.
* axis-dot rows: a body-frame direction of body a stays orthogonal to one
  of body b.
* offset-dot rows: the anchor offset stays orthogonal to a transverse
  direction of the prismatic axis.

Every Jacobian is the exact time derivative of its constraint function, so
``d/dt h = J @ V`` holds for arbitrary (also violated) states, and the
acceleration right-hand side is ``eta = -Jdot @ V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liealg import Pose, cross3, hat3

BODY_FIXED = "body"
MIXED = "mixed"

_JOINT_DIMS = {"spherical": 3, "revolute": 5, "prismatic": 5, "universal": 4}


class RedundantConstraintError(RuntimeError):
    """The KKT matrix is singular (redundant or degenerate constraints)."""


class InfeasibleStateError(ValueError):
    """An initial state violates the geometric or velocity constraints."""


def _unit(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-12:
        raise ValueError(f"{what} must be a unit vector (norm {n:.12g})")
    return v / n


def orthonormal_complement(axis) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed completion (axis, n1, n2)."""
    e = np.asarray(axis, dtype=float)
    k = int(np.argmin(np.abs(e)))
    n1 = np.cross(e, np.eye(3)[k])
    n1 /= np.linalg.norm(n1)
    return n1, np.cross(e, n1)


def parallel_axis(theta_com, mass: float, r0) -> np.ndarray:
    """Inertia about a frame parallel-translated by -r0 from the COM."""
    r0 = np.asarray(r0, dtype=float)
    theta_com = np.asarray(theta_com, dtype=float)
    return theta_com + mass * ((r0 @ r0) * np.eye(3) - np.outer(r0, r0))


@dataclass(frozen=True)
class RigidBody:
    """Body described in its reference frame: inertia_ref is taken about
    that frame (equal to the COM inertia when com_offset is zero).

    ``cspace`` optionally pins the body to one configuration-space group
    ("se3" or "so3xr3"); the assembly requires it to agree with the
    model's velocity representation."""

    name: str
    mass: float
    inertia_ref: np.ndarray
    com_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    cspace: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "inertia_ref", np.asarray(self.inertia_ref, dtype=float))
        object.__setattr__(self, "com_offset", np.asarray(self.com_offset, dtype=float))
        if not self.mass > 0:
            raise ValueError(f"body {self.name!r}: mass must be positive")
        theta = self.inertia_ref
        if np.abs(theta - theta.T).max() > 1e-12:
            raise ValueError(f"body {self.name!r}: inertia must be symmetric")
        if np.linalg.eigvalsh(theta).min() <= 0:
            raise ValueError(f"body {self.name!r}: inertia must be positive definite")
        if self.cspace not in (None, "se3", "so3xr3"):
            raise ValueError(f"body {self.name!r}: unknown c-space tag {self.cspace!r}")


@dataclass(frozen=True)
class Joint:
    """Lower kinematic pair between body_a (or ground, None) and body_b."""

    kind: str
    body_a: int | None
    body_b: int
    anchor_a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    anchor_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis_a: np.ndarray | None = None
    axis_b: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in _JOINT_DIMS:
            raise ValueError(f"unknown joint kind {self.kind!r}")
        object.__setattr__(self, "anchor_a", np.asarray(self.anchor_a, dtype=float))
        object.__setattr__(self, "anchor_b", np.asarray(self.anchor_b, dtype=float))
        if self.kind != "spherical":
            if self.axis_a is None or self.axis_b is None:
                raise ValueError(f"{self.kind} joint needs axis_a and axis_b")
            object.__setattr__(self, "axis_a", _unit(self.axis_a, "axis_a"))
            object.__setattr__(self, "axis_b", _unit(self.axis_b, "axis_b"))

    @property
    def dim(self) -> int:
        return _JOINT_DIMS[self.kind]

    @property
    def n_position_rows(self) -> int:
        # anchor rows for point joints, offset rows for the prismatic
        return 2 if self.kind == "prismatic" else 3

    def rows(self):
        """Row descriptors: ('anchor',), ('axisdot', na, mb), ('offsetdot', n)."""
        if self.kind == "spherical":
            return [("anchor",)]
        if self.kind == "universal":
            return [("anchor",), ("axisdot", self.axis_a, self.axis_b)]
        n1, n2 = orthonormal_complement(self.axis_a)
        if self.kind == "revolute":
            return [("anchor",),
                    ("axisdot", n1, self.axis_b),
                    ("axisdot", n2, self.axis_b)]
        # prismatic: full rotation lock (axis alignment + roll) and two
        # transverse-offset rows
        _, m2 = orthonormal_complement(self.axis_b)
        return [("axisdot", n1, self.axis_b),
                ("axisdot", n2, self.axis_b),
                ("axisdot", n1, m2),
                ("offsetdot", n1),
                ("offsetdot", n2)]


@dataclass(frozen=True)
class Gravity:
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))


@dataclass(frozen=True)
class LinearSpring:
    """Zero-natural-length spring from a body-fixed point to a ground point."""

    body: int
    attach: np.ndarray
    ground_point: np.ndarray
    stiffness: float

    def __post_init__(self):
        object.__setattr__(self, "attach", np.asarray(self.attach, dtype=float))
        object.__setattr__(self, "ground_point", np.asarray(self.ground_point, dtype=float))
        if self.stiffness < 0:
            raise ValueError("spring stiffness must be nonnegative")


@dataclass
class MbsModel:
    bodies: list[RigidBody]
    joints: list[Joint]
    forces: list
    representation: str = BODY_FIXED

    def __post_init__(self):
        if self.representation not in (BODY_FIXED, MIXED):
            raise ValueError(f"unknown representation {self.representation!r}")
        for j in self.joints:
            for idx in (j.body_a, j.body_b):
                if idx is not None and not 0 <= idx < len(self.bodies):
                    raise ValueError(f"joint {j.name!r}: body index {idx} out of range")
        wanted = "se3" if self.representation == BODY_FIXED else "so3xr3"
        for b in self.bodies:
            if b.cspace is not None and b.cspace != wanted:
                raise ValueError(
                    f"body {b.name!r} is tagged for c-space {b.cspace!r} but the "
                    f"model uses the {self.representation!r} representation")
        self._spatial_inertias = [spatial_inertia(b) for b in self.bodies]
        g_total = sum((f.g for f in self.forces if isinstance(f, Gravity)),
                      start=np.zeros(3))
        self._gravity_forces = [b.mass * g_total for b in self.bodies]
        self._springs = [f for f in self.forces if isinstance(f, LinearSpring)]
        for f in self.forces:
            if not isinstance(f, (Gravity, LinearSpring)):
                raise TypeError(f"unknown force element {f!r}")

    @property
    def n_bodies(self) -> int:
        return len(self.bodies)

    @property
    def n_constraints(self) -> int:
        return sum(j.dim for j in self.joints)

    def spatial_inertia_blocks(self, rotations=None) -> list[np.ndarray]:
        """Per-body 6x6 mass blocks; configuration-dependent in the mixed
        representation when the reference frame is off the COM."""
        if self.representation == BODY_FIXED:
            return self._spatial_inertias
        blocks = []
        for body, r in zip(self.bodies, rotations):
            r0 = body.com_offset
            if not r0.any():
                blocks.append(spatial_inertia(body))
                continue
            m = np.zeros((6, 6))
            m[:3, :3] = body.inertia_ref
            coup = -body.mass * (r @ hat3(r0))
            m[:3, 3:] = coup.T
            m[3:, :3] = coup
            m[3:, 3:] = body.mass * np.eye(3)
            blocks.append(m)
        return blocks


@dataclass
class MbsState:
    poses: list[Pose]
    velocities: np.ndarray  # (n_bodies, 6)
    t: float = 0.0

    def __post_init__(self):
        self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))

    def copy(self) -> "MbsState":
        return MbsState([Pose(p.R.copy(), p.r.copy()) for p in self.poses],
                        self.velocities.copy(), self.t)


# ---------------------------------------------------------------------------
# body dynamics
# ---------------------------------------------------------------------------

def spatial_inertia(body: RigidBody) -> np.ndarray:
    """6x6 inertia about the reference frame (body-fixed representation)."""
    m = np.zeros((6, 6))
    m[:3, :3] = body.inertia_ref
    m[3:, 3:] = body.mass * np.eye(3)
    r0 = body.com_offset
    if r0.any():
        coup = -body.mass * hat3(r0)
        m[:3, 3:] = coup.T
        m[3:, :3] = coup
    return m


def newton_euler_body(body: RigidBody, v, wrench) -> tuple[np.ndarray, np.ndarray]:
    """Mass matrix and right-hand side of J V' - ad_V^T J V = W."""
    m = spatial_inertia(body)
    return m, np.asarray(wrench, dtype=float) + _gyroscopic_body(m, np.asarray(v, dtype=float))


def _gyroscopic_body(inertia6, v) -> np.ndarray:
    # ad_V^T (J V) written out: (h_ang x omega + h_lin x v, h_lin x omega)
    h = inertia6 @ v
    omega, vel = v[:3], v[3:]
    out = np.empty(6)
    out[:3] = cross3(h[:3], omega) + cross3(h[3:], vel)
    out[3:] = cross3(h[3:], omega)
    return out


def newton_euler_mixed(body: RigidBody, rotation, v, wrench) -> tuple[np.ndarray, np.ndarray]:
    """Mixed-representation Newton-Euler about the reference frame at P."""
    r = np.asarray(rotation, dtype=float)
    v = np.asarray(v, dtype=float)
    omega = v[:3]
    m = np.zeros((6, 6))
    m[:3, :3] = body.inertia_ref
    m[3:, 3:] = body.mass * np.eye(3)
    bias = np.zeros(6)
    bias[:3] = cross3(omega, body.inertia_ref @ omega)
    r0 = body.com_offset
    if r0.any():
        coup = -body.mass * (r @ hat3(r0))
        m[:3, 3:] = coup.T
        m[3:, :3] = coup
        bias[3:] = body.mass * (r @ cross3(omega, cross3(omega, r0)))
    return m, np.asarray(wrench, dtype=float) - bias


def force_assembly(model: MbsModel, poses, t: float = 0.0) -> np.ndarray:
    """Applied wrenches per body in the model's velocity representation."""
    w = np.zeros((model.n_bodies, 6))
    mixed = model.representation == MIXED
    for i, body in enumerate(model.bodies):
        fs = model._gravity_forces[i]
        fb = poses[i].R.T @ fs
        if body.com_offset.any():
            w[i, :3] += cross3(body.com_offset, fb)
        w[i, 3:] += fs if mixed else fb
    for element in model._springs:
        pose = poses[element.body]
        att = pose.r + pose.R @ element.attach
        fs = element.stiffness * (element.ground_point - att)
        fb = pose.R.T @ fs
        if element.attach.any():
            w[element.body, :3] += cross3(element.attach, fb)
        w[element.body, 3:] += fs if mixed else fb
    return w


def kinetic_energy(model: MbsModel, state: MbsState) -> float:
    blocks = model.spatial_inertia_blocks([p.R for p in state.poses])
    return 0.5 * sum(float(v @ (m @ v)) for m, v in zip(blocks, state.velocities))


def potential_energy(model: MbsModel, state: MbsState) -> float:
    u = 0.0
    for element in model.forces:
        if isinstance(element, Gravity):
            for body, pose in zip(model.bodies, state.poses):
                com = pose.r + pose.R @ body.com_offset
                u -= body.mass * float(element.g @ com)
        elif isinstance(element, LinearSpring):
            pose = state.poses[element.body]
            att = pose.r + pose.R @ element.attach
            d = element.ground_point - att
            u += 0.5 * element.stiffness * float(d @ d)
    return u


def total_energy(model: MbsModel, state: MbsState) -> float:
    return kinetic_energy(model, state) + potential_energy(model, state)


# ---------------------------------------------------------------------------
# joint constraint rows
# ---------------------------------------------------------------------------

_GROUND_R = np.eye(3)
_GROUND_0 = np.zeros(3)


def _anchor_velocity(mixed, rot, omega, vel, anchor):
    # time derivative of p = r + R a in the given representation
    if mixed:
        return vel + rot @ cross3(omega, anchor)
    return rot @ (vel + cross3(omega, anchor))


def _anchor_accel_bias(mixed, rot, omega, vel, anchor):
    # acceleration of p with V' = 0
    if mixed:
        return rot @ cross3(omega, cross3(omega, anchor))
    return rot @ cross3(omega, vel + cross3(omega, anchor))


def joint_geometry(joint: Joint, poses, model: MbsModel | None = None) -> np.ndarray:
    """Constraint residual h(g); zero on the constraint manifold."""
    mixed = model is not None and model.representation == MIXED
    if joint.body_a is None:
        ra, pa_r = np.eye(3), np.zeros(3)
    else:
        ra, pa_r = poses[joint.body_a].R, poses[joint.body_a].r
    rb, pb_r = poses[joint.body_b].R, poses[joint.body_b].r
    pa = pa_r + ra @ joint.anchor_a
    pb = pb_r + rb @ joint.anchor_b
    out = []
    for row in joint.rows():
        if row[0] == "anchor":
            w = pa - pb
            out.extend(w if mixed else rb.T @ w)
        elif row[0] == "axisdot":
            out.append(float((ra @ row[1]) @ (rb @ row[2])))
        else:  # offsetdot
            out.append(float((ra @ row[1]) @ (pb - pa)))
    return np.asarray(out)


def joint_rows(joint: Joint, poses, velocities, model: MbsModel):
    """Jacobian blocks per body and eta = -Jdot @ V in one pass.

    The Jacobians are exact differentials of joint_geometry, the biases the
    exact second-derivative remainders, both valid off the manifold.
    """
    mixed = model.representation == MIXED
    ia, ib = joint.body_a, joint.body_b
    if ia is None:
        ra, rra, wa, va = _GROUND_R, _GROUND_0, _GROUND_0, _GROUND_0
    else:
        ra, rra = poses[ia].R, poses[ia].r
        wa, va = velocities[ia][:3], velocities[ia][3:]
    rb, rrb = poses[ib].R, poses[ib].r
    wb, vb = velocities[ib][:3], velocities[ib][3:]
    pa = rra + ra @ joint.anchor_a
    pb = rrb + rb @ joint.anchor_b
    pa_dot = _GROUND_0 if ia is None else _anchor_velocity(mixed, ra, wa, va, joint.anchor_a)
    pb_dot = _anchor_velocity(mixed, rb, wb, vb, joint.anchor_b)
    pa_dd = _GROUND_0 if ia is None else _anchor_accel_bias(mixed, ra, wa, va, joint.anchor_a)
    pb_dd = _anchor_accel_bias(mixed, rb, wb, vb, joint.anchor_b)

    blocks: dict[int, np.ndarray] = {ib: np.zeros((joint.dim, 6))}
    if ia is not None:
        blocks[ia] = np.zeros((joint.dim, 6))
    eta = np.empty(joint.dim)

    k = 0
    for row in joint.rows():
        if row[0] == "anchor":
            if mixed:
                # h = pa - pb, spatial
                if ia is not None:
                    blocks[ia][k:k + 3, :3] = -ra @ hat3(joint.anchor_a)
                    blocks[ia][k:k + 3, 3:] = np.eye(3)
                bb = blocks[ib][k:k + 3]
                bb[:, :3] += rb @ hat3(joint.anchor_b)
                bb[:, 3:] -= np.eye(3)
                eta[k:k + 3] = pb_dd - pa_dd
            else:
                # h = Rb^T (pa - pb), child frame
                u = rb.T @ (pa - pb)
                if ia is not None:
                    rba = rb.T @ ra
                    blocks[ia][k:k + 3, :3] = -rba @ hat3(joint.anchor_a)
                    blocks[ia][k:k + 3, 3:] = rba
                bb = blocks[ib][k:k + 3]
                bb[:, :3] += hat3(u) + hat3(joint.anchor_b)
                bb[:, 3:] -= np.eye(3)
                eta[k:k + 3] = -(cross3(wb, cross3(wb, u))
                                 - 2.0 * cross3(wb, rb.T @ (pa_dot - pb_dot))
                                 + rb.T @ (pa_dd - pb_dd))
            k += 3
        elif row[0] == "axisdot":
            # h = (Ra alpha) . (Rb beta)
            a_s = ra @ row[1]
            b_s = rb @ row[2]
            if ia is not None:
                blocks[ia][k, :3] = cross3(row[1], ra.T @ b_s)
            blocks[ib][k, :3] += cross3(row[2], rb.T @ a_s)
            a_dot = ra @ cross3(wa, row[1])
            b_dot = rb @ cross3(wb, row[2])
            a_dd = ra @ cross3(wa, cross3(wa, row[1]))
            b_dd = rb @ cross3(wb, cross3(wb, row[2]))
            eta[k] = -(a_dd @ b_s + 2.0 * (a_dot @ b_dot) + a_s @ b_dd)
            k += 1
        else:  # offsetdot: h = (Ra n) . (pb - pa)
            n_s = ra @ row[1]
            d = pb - pa
            if ia is not None:
                blocks[ia][k, :3] = (cross3(row[1], ra.T @ d)
                                     - hat3(joint.anchor_a) @ (ra.T @ n_s))
                blocks[ia][k, 3:] = -n_s if mixed else -(ra.T @ n_s)
            blocks[ib][k, :3] += hat3(joint.anchor_b) @ (rb.T @ n_s)
            blocks[ib][k, 3:] += n_s if mixed else rb.T @ n_s
            n_dot = ra @ cross3(wa, row[1])
            n_dd = ra @ cross3(wa, cross3(wa, row[1]))
            eta[k] = -(n_dd @ d + 2.0 * (n_dot @ (pb_dot - pa_dot))
                       + n_s @ (pb_dd - pa_dd))
            k += 1
    return blocks, eta


def joint_jacobian(joint: Joint, poses, model: MbsModel) -> dict[int, np.ndarray]:
    """Exact Jacobian blocks per body index: d/dt h == sum J_i @ V_i."""
    zeros = np.zeros((len(poses), 6))
    blocks, _ = joint_rows(joint, poses, zeros, model)
    return blocks


def joint_acc_rhs(joint: Joint, poses, velocities, model: MbsModel) -> np.ndarray:
    """eta = -Jdot @ V, the acceleration-constraint right-hand side."""
    _, eta = joint_rows(joint, poses, velocities, model)
    return eta


# ---------------------------------------------------------------------------
# index-1 DAE assembly and solution
# ---------------------------------------------------------------------------

def assemble_index1(model: MbsModel, poses, velocities, t: float = 0.0):
    """KKT system [[M, J^T], [J, 0]] (Vdot, lambda) = (Q, eta)."""
    n = model.n_bodies
    nv = 6 * n
    m = model.n_constraints
    kkt = np.zeros((nv + m, nv + m))
    rhs = np.zeros(nv + m)

    wrenches = force_assembly(model, poses, t)
    if model.representation == MIXED:
        for i, body in enumerate(model.bodies):
            mb, f = newton_euler_mixed(body, poses[i].R, velocities[i], wrenches[i])
            kkt[6 * i:6 * i + 6, 6 * i:6 * i + 6] = mb
            rhs[6 * i:6 * i + 6] = f
    else:
        for i, body in enumerate(model.bodies):
            mb = model._spatial_inertias[i]
            kkt[6 * i:6 * i + 6, 6 * i:6 * i + 6] = mb
            rhs[6 * i:6 * i + 6] = wrenches[i] + _gyroscopic_body(mb, velocities[i])

    k = nv
    for joint in model.joints:
        blocks, eta = joint_rows(joint, poses, velocities, model)
        for idx, blk in blocks.items():
            kkt[k:k + joint.dim, 6 * idx:6 * idx + 6] = blk
            kkt[6 * idx:6 * idx + 6, k:k + joint.dim] = blk.T
        rhs[k:k + joint.dim] = eta
        k += joint.dim
    return kkt, rhs


def solve_index1(model: MbsModel, kkt, rhs):
    """Dense direct solve; singularity raises naming the model's joints."""
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError as exc:
        names = ", ".join(j.name or j.kind for j in model.joints)
        raise RedundantConstraintError(
            f"singular KKT matrix; check joints [{names}] for redundancy") from exc
    nv = 6 * model.n_bodies
    return sol[:nv].reshape(-1, 6), sol[nv:]


def accelerations(model: MbsModel, poses, velocities, t: float = 0.0) -> np.ndarray:
    """Explicit ODE right-hand side Vdot = F(g, V) from the index-1 system."""
    kkt, rhs = assemble_index1(model, poses, velocities, t)
    vdot, _ = solve_index1(model, kkt, rhs)
    return vdot


def constraint_jacobian(model: MbsModel, poses) -> np.ndarray:
    """Stacked m x 6n velocity-constraint Jacobian."""
    m = model.n_constraints
    jac = np.zeros((m, 6 * model.n_bodies))
    k = 0
    for joint in model.joints:
        for idx, blk in joint_jacobian(joint, poses, model).items():
            jac[k:k + joint.dim, 6 * idx:6 * idx + 6] = blk
        k += joint.dim
    return jac


def velocity_residual(model: MbsModel, state: MbsState) -> float:
    """Euclidean norm of J @ V."""
    if not model.joints:
        return 0.0
    jac = constraint_jacobian(model, state.poses)
    return float(np.linalg.norm(jac @ state.velocities.reshape(-1)))


def project_velocities(model: MbsModel, state: MbsState) -> MbsState:
    """Minimum-norm (spatial-inertia metric) correction onto J V = 0."""
    if not model.joints:
        return state.copy()
    n = model.n_bodies
    nv = 6 * n
    m = model.n_constraints
    jac = constraint_jacobian(model, state.poses)
    kkt = np.zeros((nv + m, nv + m))
    for i, blk in enumerate(model.spatial_inertia_blocks([p.R for p in state.poses])):
        kkt[6 * i:6 * i + 6, 6 * i:6 * i + 6] = blk
    kkt[nv:, :nv] = jac
    kkt[:nv, nv:] = jac.T
    rhs = np.zeros(nv + m)
    rhs[nv:] = -jac @ state.velocities.reshape(-1)
    sol = np.linalg.solve(kkt, rhs)
    out = state.copy()
    out.velocities = state.velocities + sol[:nv].reshape(-1, 6)
    return out


def geometry_residuals(model: MbsModel, poses) -> list[tuple[float, float]]:
    """Per-joint (position, orientation) residual norms."""
    out = []
    for joint in model.joints:
        h = joint_geometry(joint, poses, model)
        npos = joint.n_position_rows
        if joint.kind == "prismatic":
            ori, pos = h[:3], h[3:]
        else:
            pos, ori = h[:npos], h[npos:]
        out.append((float(np.linalg.norm(pos)), float(np.linalg.norm(ori))))
    return out


def check_initial_state(model: MbsModel, state: MbsState,
                        tol_pos: float = 1e-12, tol_vel: float = 1e-9) -> None:
    """Hard feasibility gate used by model builders and the loader."""
    for joint in model.joints:
        h = joint_geometry(joint, state.poses, model)
        if np.abs(h).max() > tol_pos:
            raise InfeasibleStateError(
                f"joint {joint.name or joint.kind!r}: |h| = {np.abs(h).max():.3e} "
                f"exceeds {tol_pos:.1e} in the initial configuration")
    res = velocity_residual(model, state)
    if res > tol_vel:
        raise InfeasibleStateError(
            f"initial velocity constraint residual {res:.3e} exceeds {tol_vel:.1e}")
