import numpy as np
import pytest
from scipy.optimize import minimize

from nhcollide import (
    BallParams,
    ConstraintMatrix,
    FlowState,
    IntegratorSettings,
    Metric,
    accel_and_multipliers,
    build_ball_floor_scene,
    build_ball_wall_scene,
    empty_constraint,
    energy,
    generic_system_from_config,
    project_velocity,
    step,
)
from nhcollide.models import KIND_GENERIC, MechanicalSystem


class TestAccelAndMultipliers:
    def test_free_flight(self):
        sys = build_ball_floor_scene(BallParams(gravity=9.81))
        a, lam = accel_and_multipliers(sys, np.array([0, 0, 2.0, 1, 0, 0, 0]),
                                       np.zeros(6))
        assert np.abs(a - [0, 0, -9.81, 0, 0, 0]).max() < 1e-12
        assert lam.size == 0

    def test_straight_roll(self):
        sys = build_ball_wall_scene(BallParams())
        v = np.array([2.0, 0.5, -0.5, 2.0, 0.7])
        a, lam = accel_and_multipliers(sys, np.zeros(6), v)
        assert np.abs(a).max() < 1e-12
        assert np.abs(lam).max() < 1e-12

    def test_constraint_force_cancels_potential(self):
        cfg = {
            "n": 3,
            "metric": np.diag([2.0, 1.0, 1.0]).tolist(),
            "potential": {"linear": [3.0, 0.0, 0.0]},
            "A": [[1, 0, 0]],
        }
        sys = generic_system_from_config(cfg)
        a, lam = accel_and_multipliers(sys, np.zeros(3), np.array([0.0, 1.0, 0.0]))
        assert np.abs(a).max() < 1e-12
        assert lam[0] == pytest.approx(3.0)


class TestStep:
    def test_free_fall_quadratic(self):
        g = 9.81
        sys = build_ball_floor_scene(BallParams(gravity=g))
        dt = 1e-2
        s0 = FlowState(0.0, np.array([0, 0, 5.0, 1, 0, 0, 0]), np.zeros(6))
        s1 = step(sys, s0, IntegratorSettings(dt=dt))
        assert s1.x[2] - 5.0 == pytest.approx(-0.5 * g * dt * dt, abs=1e-15)
        assert s1.v[2] == pytest.approx(-g * dt, abs=1e-15)

    def test_straight_roll_exact_advance(self):
        sys = build_ball_wall_scene(BallParams())
        dt = 1e-3
        v = np.array([1.0, 0.0, 0.0, 1.0, 0.0])
        s = FlowState(0.0, np.array([5.0, 0.0, 1, 0, 0, 0]), v)
        for _ in range(100):
            s = step(sys, s, IntegratorSettings(dt=dt))
        assert s.x[0] == pytest.approx(5.0 + 100 * dt, abs=1e-13)
        assert np.abs(sys.a_at(s.x).entries @ s.v).max() <= 1e-14

    def test_flight_energy_drift(self):
        sys = build_ball_floor_scene(BallParams())
        cfg = IntegratorSettings(dt=1e-4)
        s = FlowState(0.0, np.array([0, 0, 100.0, 1, 0, 0, 0]),
                      np.array([1.0, 0.5, 5.0, 0.3, -0.2, 0.1]))
        e0 = energy(sys, s)
        worst = 0.0
        for _ in range(10_000):
            s = step(sys, s, cfg)
            worst = max(worst, abs(energy(sys, s) - e0))
        assert worst <= 1e-10 * abs(e0)


class TestProjectVelocity:
    def test_admissible_fixed_point(self):
        sys = build_ball_wall_scene(BallParams())
        a = sys.a_at(np.zeros(6))
        g = sys.metric_at(np.zeros(6))
        v = np.array([1.0, 2.0, -2.0, 1.0, 0.5])   # satisfies A v = 0
        assert np.abs(project_velocity(g, a, v) - v).max() < 1e-14

    def test_euclidean_axis(self):
        out = project_velocity(Metric(np.eye(2)), ConstraintMatrix([[1.0, 0.0]]),
                               np.array([1.0, 1.0]))
        assert np.abs(out - [0.0, 1.0]).max() < 1e-14

    def test_quadratic_programming_oracle(self):
        # v' minimizes (v-u)^T G (v-u) over A u = 0
        sys = build_ball_wall_scene(BallParams(mass=2.0, inertia=0.5, radius=0.7))
        x = np.zeros(6)
        a = sys.a_at(x)
        g = sys.metric_at(x)
        rng = np.random.default_rng(6)
        for _ in range(5):
            v = rng.standard_normal(5)
            ours = project_velocity(g, a, v)
            res = minimize(
                lambda u: (u - v) @ g.entries @ (u - v),
                np.zeros(5),
                constraints={"type": "eq", "fun": lambda u: a.entries @ u},
                method="SLSQP", tol=1e-12,
            )
            assert np.abs(ours - res.x).max() < 1e-5
            assert np.abs(a.entries @ ours).max() < 1e-12


class TestEnergy:
    def test_rest_at_height(self):
        p = BallParams(mass=2.0, gravity=9.81)
        sys = build_ball_floor_scene(p)
        s = FlowState(0.0, np.array([0, 0, 3.0, 1, 0, 0, 0]), np.zeros(6))
        assert energy(sys, s) == pytest.approx(2.0 * 9.81 * 3.0)

    def test_pendulum_launch_energy(self):
        p = BallParams()
        v, u, z = 1.0, 1.0, 2.0
        sys = build_ball_floor_scene(p)
        om2 = p.radius * p.mass * v / p.inertia
        s = FlowState(0.0, np.array([0, 0, z, 1, 0, 0, 0]),
                      np.array([-v, 0, -u, 0, om2, 0]))
        expect = 0.5 * p.mass * (v * v + u * u) + 0.5 * p.inertia * om2 ** 2 \
            + p.mass * p.gravity * z
        assert energy(sys, s) == pytest.approx(expect, rel=1e-14)


class TestFiniteDifferencePaths:
    def test_position_dependent_metric(self):
        # 1-dof with G = 1 + x^2: a = -x v^2 / (1 + x^2)
        sys = MechanicalSystem(
            kind=KIND_GENERIC, n=1, config_dim=1,
            metric_at=lambda x: Metric([[1.0 + x[0] ** 2]]),
            potential_at=lambda x: 0.0,
            potential_covector=lambda x: np.zeros(1),
            a_at=lambda x: empty_constraint(1),
            constant_fields=False,
        )
        x, v = np.array([0.7]), np.array([1.3])
        a, _ = accel_and_multipliers(sys, x, v)
        expect = -x[0] * v[0] ** 2 / (1.0 + x[0] ** 2)
        assert a[0] == pytest.approx(expect, rel=1e-8)

    def knife_edge(self):
        # planar blade: heading-aligned velocity only, flat and unforced
        eye = Metric(np.eye(3))

        def a_at(x):
            return ConstraintMatrix([[np.sin(x[2]), -np.cos(x[2]), 0.0]])

        return MechanicalSystem(
            kind=KIND_GENERIC, n=3, config_dim=3,
            metric_at=lambda x: eye,
            potential_at=lambda x: 0.0,
            potential_covector=lambda x: np.zeros(3),
            a_at=a_at,
            constant_fields=False,
        )

    def test_knife_edge_flow(self):
        sys = self.knife_edge()
        theta0, speed, omega = 0.3, 1.1, 0.8
        s = FlowState(0.0, np.array([0.0, 0.0, theta0]),
                      np.array([speed * np.cos(theta0), speed * np.sin(theta0), omega]))
        cfg = IntegratorSettings(dt=1e-3)
        e0 = energy(sys, s)
        for _ in range(2000):
            s = step(sys, s, cfg)
        # speed and turn rate stay constant; constraint satisfied after projection
        assert energy(sys, s) == pytest.approx(e0, rel=1e-8)
        assert s.v[2] == pytest.approx(omega, rel=1e-8)
        assert np.abs(sys.a_at(s.x).entries @ s.v).max() < 1e-12
        # heading integrates linearly
        assert s.x[2] == pytest.approx(theta0 + omega * 2.0, rel=1e-8)
