import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from screwmbs.dynamics import (
    Gravity,
    Joint,
    LinearSpring,
    MbsModel,
    MbsState,
    RigidBody,
)
from screwmbs.integrate import (
    ButcherTableau,
    IntegrationError,
    coupled_step,
    integrate,
    mk_step,
    tableau_explicit_trapezoidal,
    tableau_rk4,
)
from screwmbs.liealg import (
    SE3,
    SO3R3,
    Pose,
    se3_compose,
    se3_exp,
    so3_dexpinv,
    so3_exp,
)
from oracles import random_screw

RNG = np.random.default_rng(31337)

BOX = RigidBody("box", 86.4, np.diag([1.224, 4.68, 5.76]))


def free_model(representation):
    return MbsModel([BOX], [], [], representation=representation)


class TestTableaus:
    def test_rk4_weights(self):
        t = tableau_rk4()
        assert_allclose(t.b, [1 / 6, 1 / 3, 1 / 3, 1 / 6])

    def test_trapezoidal_matches_printed_scheme(self):
        t = tableau_explicit_trapezoidal()
        assert t.a[1, 0] == 0.5
        assert_allclose(t.b, [0.0, 1.0])
        assert_allclose(t.c, [0.0, 0.5])

    @pytest.mark.parametrize("t", [tableau_rk4(), tableau_explicit_trapezoidal()],
                             ids=lambda t: t.name)
    def test_consistency(self, t):
        assert abs(t.b.sum() - 1.0) < 1e-15
        assert_allclose(t.a.sum(axis=1), t.c, atol=1e-15)

    def test_rejects_implicit(self):
        with pytest.raises(ValueError):
            ButcherTableau(np.eye(2), np.array([0.5, 0.5]), np.array([1.0, 1.0]))


class TestMkStep:
    @pytest.mark.parametrize("group", [SE3, SO3R3], ids=lambda g: g.name)
    def test_zero_velocity_leaves_pose(self, group):
        poses = [Pose(so3_exp([0.2, 0.1, -0.4]), np.array([1.0, 2.0, 3.0]))]
        out = mk_step(group, poses, lambda t, g: np.zeros((1, 6)), 0.0, 0.5,
                      tableau_rk4())
        assert_allclose(out[0].R, poses[0].R, atol=0)
        assert_allclose(out[0].r, poses[0].r, atol=0)

    @pytest.mark.parametrize("group", [SE3, SO3R3], ids=lambda g: g.name)
    @pytest.mark.parametrize("tableau", [tableau_rk4(), tableau_explicit_trapezoidal()],
                             ids=lambda t: t.name)
    @pytest.mark.parametrize("dt", [1e-3, 0.1, 1.0])
    def test_constant_twist_exactness(self, group, tableau, dt):
        v = random_screw(RNG, angle_lo=0.2, angle_hi=1.0)
        poses = [Pose(so3_exp([0.3, -0.1, 0.2]), np.array([0.5, -1.0, 0.25]))]
        out = mk_step(group, poses, lambda t, g: v[None, :], 0.0, dt, tableau)
        ref = group.compose(poses[0], group.exp(dt * v))
        assert np.abs(out[0].R - ref.R).max() < 1e-13
        assert np.abs(out[0].r - ref.r).max() < 1e-13

    def test_rotating_frame_reproduces_screw_solution(self):
        # frame on a constant-rate circular path: body twist is constant and
        # the SE(3) trapezoidal update is the exact solution
        omega0, axis, p = math.pi, np.array([0.0, 0, 1.0]), np.array([1.0, 0, 0])
        v = np.concatenate([omega0 * axis, omega0 * np.cross(p, axis)])
        dt = 0.1
        tab = tableau_explicit_trapezoidal()
        poses = [Pose.identity()]
        for i in range(1, 51):
            poses = mk_step(SE3, poses, lambda t, g: v[None, :], (i - 1) * dt, dt, tab)
            ref = se3_exp(i * dt * v)
            assert np.abs(poses[0].R - ref.R).max() < 1e-13
            assert np.abs(poses[0].r - ref.r).max() < 1e-13

    def test_dexpinv_pole_raises_for_huge_step(self):
        v = np.array([2.0, 0, 0, 0, 0, 0])
        with pytest.raises(Exception):
            mk_step(SE3, [Pose.identity()], lambda t, g: 4.0 * v[None, :],
                    0.0, 1.0, tableau_rk4())

    def test_so3xr3_step_decouples(self):
        # rotation follows the so(3) MK update and translation a plain RK
        # update; the direct product arithmetic must agree exactly
        tab = tableau_rk4()
        dt = 0.01
        r0 = so3_exp([0.3, 0.2, -0.1])
        p0 = np.array([0.4, -0.2, 1.0])

        def field(t, poses):
            r = poses[0].r
            return np.array([[0.5, -0.2 * r[0], 0.1,
                              math.sin(t), r[1], -r[2]]])

        out = mk_step(SO3R3, [Pose(r0, p0)], field, 0.0, dt, tab)

        # reference: independent so3 chart update + vector-space RK on r,
        # replicating the stage accumulation order
        ks_rot, ks_tr = [], []
        for j in range(tab.stages):
            deps = tab._deps[j]
            if deps:
                psi_rot = dt * sum(w * ks_rot[l] for l, w in deps)
                psi_tr = dt * sum(w * ks_tr[l] for l, w in deps)
                stage = [Pose(r0 @ so3_exp(psi_rot), p0 + psi_tr)]
                v = field(tab.c[j] * dt, stage)[0]
                ks_rot.append(so3_dexpinv(-psi_rot) @ v[:3])
                ks_tr.append(v[3:].copy())
            else:
                v = field(0.0, [Pose(r0, p0)])[0]
                ks_rot.append(v[:3].copy())
                ks_tr.append(v[3:].copy())
        phi_rot = dt * sum(w * k for w, k in zip(tab.b, ks_rot) if w != 0.0)
        phi_tr = dt * sum(w * k for w, k in zip(tab.b, ks_tr) if w != 0.0)
        assert np.array_equal(out[0].R, r0 @ so3_exp(phi_rot))
        assert np.array_equal(out[0].r, p0 + phi_tr)


class TestCoupledStep:
    def test_rest_state_is_fixed_point(self):
        model = free_model("body")
        state = MbsState([Pose.identity()], np.zeros((1, 6)))
        out = coupled_step(model, SE3, state, 0.01, tableau_rk4())
        assert_allclose(out.poses[0].R, np.eye(3), atol=0)
        assert_allclose(out.poses[0].r, np.zeros(3), atol=0)
        assert_allclose(out.velocities, np.zeros((1, 6)), atol=0)

    def test_free_body_translation_exact_on_direct_product(self):
        # rotation about z plus 10 m/s along x: the mixed velocity is
        # constant, so one step lands exactly on r = dt * (10, 0, 0)
        model = free_model("mixed")
        v0 = np.array([0.0, 0.0, 2 * math.pi, 10.0, 0.0, 0.0])
        state = MbsState([Pose.identity()], v0[None, :])
        dt = 0.01
        out = coupled_step(model, SO3R3, state, dt, tableau_rk4())
        assert_allclose(out.poses[0].r, [10 * dt, 0, 0], atol=0)
        assert_allclose(out.poses[0].R, so3_exp([0, 0, 2 * math.pi * dt]), atol=1e-15)

    def test_heavy_top_step_halving_order(self):
        # local error ratio between one dt step and two dt/2 steps ~ 2^4
        from test_dynamics import heavy_top_model, heavy_top_state

        model = heavy_top_model("body")
        state = heavy_top_state("body")
        tab = tableau_rk4()
        dt = 1e-3

        one = coupled_step(model, SE3, state, dt, tab)
        half = coupled_step(model, SE3, state, dt / 2, tab)
        two = coupled_step(model, SE3, half, dt / 2, tab)
        ref = state
        for _ in range(10):
            ref = coupled_step(model, SE3, ref, dt / 10, tab)

        e1 = np.linalg.norm(one.velocities - ref.velocities)
        e2 = np.linalg.norm(two.velocities - ref.velocities)
        assert 10.0 < e1 / e2 < 22.0

    def test_spinning_box_order_four(self):
        # global error on the tumbling box over 0.1 s, log-log slope ~ 4
        model = free_model("body")
        v0 = np.concatenate([[10 * math.pi, 2 * math.pi, 0], np.zeros(3)])
        tab = tableau_rk4()

        def run(dt):
            state = MbsState([Pose.identity()], v0[None, :].copy())
            n = int(round(0.1 / dt))
            for _ in range(n):
                state = coupled_step(model, SE3, state, dt, tab)
            return state

        ref = run(1e-5)
        errs, dts = [], [4e-3, 2e-3, 1e-3]
        for dt in dts:
            out = run(dt)
            errs.append(np.abs(out.poses[0].R - ref.poses[0].R).max())
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert 3.7 < slope < 4.3


class TestIntegrate:
    def test_zero_horizon_single_sample(self):
        model = free_model("body")
        state = MbsState([Pose.identity()], np.zeros((1, 6)))
        rec = integrate(model, SE3, state, 0.01, 0.0, tableau_rk4())
        assert rec.n_samples == 1
        assert rec.times[0] == 0.0

    def test_step_count(self):
        model = free_model("body")
        v0 = np.array([[0.1, 0, 0, 1.0, 0, 0]])
        state = MbsState([Pose.identity()], v0)
        rec = integrate(model, SE3, state, 0.01, 10.0, tableau_rk4())
        assert rec.n_samples == 1001
        assert_allclose(rec.times[-1], 10.0)

    def test_stride_keeps_final_sample(self):
        model = free_model("body")
        state = MbsState([Pose.identity()], np.array([[0.1, 0, 0, 0, 0, 0]]))
        rec = integrate(model, SE3, state, 0.1, 1.05, tableau_rk4(), stride=4)
        # steps: 10 -> samples at 0, 4, 8, 10
        assert rec.n_samples == 4
        assert_allclose(rec.times[-1], 1.0 + 0.0, atol=1e-12)

    def test_deterministic(self):
        from test_dynamics import heavy_top_model, heavy_top_state

        model = heavy_top_model("body")
        a = integrate(model, SE3, heavy_top_state("body"), 1e-3, 0.2, tableau_rk4())
        b = integrate(model, SE3, heavy_top_state("body"), 1e-3, 0.2, tableau_rk4())
        assert np.array_equal(a.rotations, b.rotations)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.velocities, b.velocities)

    def test_error_carries_step_index(self):
        # a huge velocity drives the chart beyond the dexpinv pole
        model = free_model("body")
        state = MbsState([Pose.identity()], np.array([[50.0, 0, 0, 0, 0, 0]]))
        with pytest.raises(IntegrationError, match="step"):
            integrate(model, SE3, state, 0.5, 5.0, tableau_rk4())

    def test_orthonormality_after_many_steps(self):
        # 1e5 kinematic MK steps: exp returns rotations exact to roundoff
        v = np.array([[0.8, -0.5, 0.3, 0.2, 0.1, -0.4]])
        poses = [Pose.identity()]
        tab = tableau_rk4()
        field = lambda t, g: v
        for _ in range(100_000):
            poses = mk_step(SE3, poses, field, 0.0, 1e-3, tab)
        assert poses[0].orthonormality_defect() < 1e-9
