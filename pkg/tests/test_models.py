import numpy as np
import pytest

from nhcollide import (
    BallParams,
    RankDeficient,
    ReducedWallState,
    SchemaError,
    apply_impact,
    ball_floor_impact_closed_form,
    ball_wall_impact_closed_form,
    build_ball_floor_scene,
    build_ball_wall_scene,
    contact_angular_momentum,
    empty_constraint,
    generic_system_from_config,
    impact_matrix,
    kinetic_energy,
    rolling_velocity_completion,
    validate_nesting,
)
from nhcollide.errors import NestingViolated


def random_params(rng):
    return BallParams(mass=float(rng.uniform(0.1, 10)),
                      inertia=float(rng.uniform(0.01, 5)),
                      radius=float(rng.uniform(0.1, 2)),
                      gravity=float(rng.uniform(0, 20)))


class TestBallParams:
    def test_derived_inertias(self):
        p = BallParams(mass=2.0, inertia=0.5, radius=1.5)
        assert p.j_prime == pytest.approx(0.5 + 1.5 ** 2 * 2.0)
        assert p.j_tilde == pytest.approx(0.5 + 1.5 ** 2 * 1.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            BallParams(mass=0.0)
        with pytest.raises(ValueError):
            BallParams(gravity=-1.0)


class TestFloorScene:
    def test_guard_at_contact(self):
        sys = build_ball_floor_scene(BallParams())
        x = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        assert sys.guard(x) == pytest.approx(0.0)

    def test_metric(self):
        sys = build_ball_floor_scene(BallParams())
        g = sys.metric_at(np.zeros(7))
        assert kinetic_energy(g, [0, 0, 1, 0, 0, 0]) == pytest.approx(0.5)

    def test_b_reproduces_rolling_condition(self):
        # B v = v_C, the velocity of the contact point
        p = BallParams(radius=1.7)
        sys = build_ball_floor_scene(p)
        b = sys.wall.b_at(np.zeros(7)).entries
        rng = np.random.default_rng(0)
        for _ in range(10):
            vs, om = rng.standard_normal(3), rng.standard_normal(3)
            v_c = vs + np.cross(om, [0.0, 0.0, -p.radius])
            assert np.abs(b @ np.concatenate([vs, om]) - v_c).max() < 1e-14


class TestWallScene:
    def test_nesting(self):
        sys = build_ball_wall_scene(BallParams())
        x = np.zeros(6)
        assert validate_nesting(sys.a_at(x), sys.wall.b_at(x)).passed

    def test_straight_roll_admissible(self):
        p = BallParams(radius=2.0)
        sys = build_ball_wall_scene(p)
        v = np.array([3.0, 0.0, 0.0, 3.0 / 2.0, 0.0])
        assert np.abs(sys.a_at(np.zeros(6)).entries @ v).max() < 1e-14

    def test_kernel_dimensions(self):
        from nhcollide import kernel_basis
        sys = build_ball_wall_scene(BallParams())
        x = np.zeros(6)
        assert kernel_basis(sys.a_at(x)).dim == 3
        assert kernel_basis(sys.wall.b_at(x)).dim == 1


class TestFloorClosedForm:
    def test_elastic_example(self):
        p = BallParams()
        vs, om = ball_floor_impact_closed_form(p, [1, 0, -1], [0, 0, 0], mu=1.0)
        assert np.abs(vs - [3 / 7, 0, 1]).max() < 1e-14
        assert np.abs(om - [0, 10 / 7, 0]).max() < 1e-14

    def test_pendulum_reversal(self):
        p = BallParams()
        v, u = 1.3, 2.1
        vs_minus = np.array([-v, 0.0, -u])
        om_minus = np.array([0.0, p.radius * p.mass * v / p.inertia, 0.0])
        vs, om = ball_floor_impact_closed_form(p, vs_minus, om_minus, mu=1.0)
        assert np.abs(vs + vs_minus).max() < 1e-13
        assert np.abs(om + om_minus).max() < 1e-13

    def test_plastic_vertical_drop(self):
        vs, om = ball_floor_impact_closed_form(BallParams(), [0, 0, -1], [0, 0, 0], mu=0.0)
        assert vs[2] == 0.0

    def test_vertical_spin_untouched(self):
        p = BallParams()
        rng = np.random.default_rng(1)
        for mu in (0.0, 0.3, 1.0):
            om_in = rng.standard_normal(3)
            _, om = ball_floor_impact_closed_form(p, rng.standard_normal(3), om_in, mu)
            assert om[2] == om_in[2]

    def test_agrees_with_generic_map(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            p = random_params(rng)
            sys = build_ball_floor_scene(p)
            x = np.zeros(7)
            mu = float(rng.choice([0.0, 0.3, 1.0]))
            r = impact_matrix(sys.metric_at(x), sys.a_at(x), sys.wall.b_at(x), mu)
            v = rng.standard_normal(6)
            vs, om = ball_floor_impact_closed_form(p, v[:3], v[3:], mu)
            assert np.abs(apply_impact(r, v) - np.concatenate([vs, om])).max() < 1e-10


class TestWallClosedForm:
    def test_reduced_example(self):
        out = ball_wall_impact_closed_form(BallParams(), ReducedWallState(-1, 1, 2))
        assert out.v1 == pytest.approx(1.0, abs=1e-14)
        assert out.v2 == pytest.approx(13 / 9, abs=1e-14)
        assert out.w3 == pytest.approx(4 / 9, abs=1e-14)

    def test_head_on_reversal(self):
        out = ball_wall_impact_closed_form(BallParams(), ReducedWallState(-2.5, 0, 0))
        assert (out.v1, out.v2, out.w3) == (2.5, 0.0, 0.0)

    def test_energy_conserved(self):
        p = BallParams()
        sys = build_ball_wall_scene(p)
        g = sys.metric_at(np.zeros(6))
        pre = ReducedWallState(-1, 1, 2)
        post = ball_wall_impact_closed_form(p, pre)
        e0 = kinetic_energy(g, rolling_velocity_completion(p, pre))
        e1 = kinetic_energy(g, rolling_velocity_completion(p, post))
        assert e0 == pytest.approx(2.2, abs=1e-14)
        assert e1 == pytest.approx(e0, rel=1e-13)

    def test_agrees_with_generic_map(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = random_params(rng)
            sys = build_ball_wall_scene(p)
            x = np.zeros(6)
            r = impact_matrix(sys.metric_at(x), sys.a_at(x), sys.wall.b_at(x), 1.0)
            pre = ReducedWallState(*rng.standard_normal(3))
            v_plus = apply_impact(r, rolling_velocity_completion(p, pre))
            expect = rolling_velocity_completion(p, ball_wall_impact_closed_form(p, pre))
            assert np.abs(v_plus - expect).max() < 1e-10
            # rolling persists through the impact
            assert np.abs(sys.a_at(x).entries @ v_plus).max() < 1e-10


class TestRollingCompletion:
    def test_examples(self):
        assert np.allclose(
            rolling_velocity_completion(BallParams(radius=1.0), ReducedWallState(1, 0, 0)),
            [1, 0, 0, 1, 0])
        assert np.allclose(
            rolling_velocity_completion(BallParams(radius=2.0), ReducedWallState(0, 1, 0)),
            [0, 1, -0.5, 0, 0])

    def test_always_admissible(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            p = random_params(rng)
            sys = build_ball_wall_scene(p)
            v = rolling_velocity_completion(p, ReducedWallState(*rng.standard_normal(3)))
            assert np.abs(sys.a_at(np.zeros(6)).entries @ v).max() < 1e-12


class TestContactAngularMomentum:
    def test_cross_product_arithmetic(self):
        out = contact_angular_momentum(BallParams(), [1, 0, 0], [0, 0, 0])
        assert np.allclose(out, [0, 1, 0])

    def test_spin_only(self):
        out = contact_angular_momentum(BallParams(), [0, 0, 0], [0, 0, 1])
        assert np.allclose(out, [0, 0, 0.4])

    def test_invariant_under_floor_impact(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = random_params(rng)
            v, om = rng.standard_normal(3), rng.standard_normal(3)
            vp, omp = ball_floor_impact_closed_form(p, v, om, mu=1.0)
            before = contact_angular_momentum(p, v, om)
            after = contact_angular_momentum(p, vp, omp)
            scale = max(1.0, np.abs(before).max())
            assert np.abs(after - before).max() < 1e-10 * scale


class TestGenericFromConfig:
    def floor_replica_cfg(self, p: BallParams):
        m, j, g = p.mass, p.inertia, p.gravity
        return {
            "n": 6,
            "metric": np.diag([m, m, m, j, j, j]).tolist(),
            "potential": {"const": 0.0, "linear": [0, 0, m * g, 0, 0, 0]},
            "A": [],
            "wall": {
                "guard_const": -p.radius,
                "guard_linear": [0, 0, 1, 0, 0, 0],
                "B": [[1, 0, 0, 0, -p.radius, 0],
                      [0, 1, 0, p.radius, 0, 0],
                      [0, 0, 1, 0, 0, 0]],
            },
        }

    def test_floor_replica_impact_map(self):
        p = BallParams()
        gen = generic_system_from_config(self.floor_replica_cfg(p))
        ball = build_ball_floor_scene(p)
        xg, xb = np.zeros(6), np.zeros(7)
        rg = impact_matrix(gen.metric_at(xg), gen.a_at(xg), gen.wall.b_at(xg), 1.0)
        rb = impact_matrix(ball.metric_at(xb), ball.a_at(xb), ball.wall.b_at(xb), 1.0)
        assert np.abs(rg.entries - rb.entries).max() < 1e-14
        assert gen.guard(np.array([0, 0, 1, 0, 0, 0.0])) == pytest.approx(0.0)

    def test_a_equals_b_identity_on_ker(self):
        cfg = {
            "n": 3,
            "metric": np.eye(3).tolist(),
            "A": [[1, 0, 0]],
            "wall": {"guard_const": 0.0, "guard_linear": [1, 0, 0], "B": [[1, 0, 0]]},
        }
        sys = generic_system_from_config(cfg)
        x = np.zeros(3)
        r = impact_matrix(sys.metric_at(x), sys.a_at(x), sys.wall.b_at(x), 1.0)
        v = np.array([0.0, 1.5, -2.0])   # in ker A = ker B
        assert np.abs(apply_impact(r, v, sys.a_at(x)) - v).max() < 1e-14

    def test_non_spd_metric_rejected(self):
        cfg = {"n": 2, "metric": [[1, 0], [0, -1]]}
        with pytest.raises(SchemaError):
            generic_system_from_config(cfg)

    def test_rank_deficient_b_named(self):
        cfg = {
            "n": 2,
            "metric": np.eye(2).tolist(),
            "wall": {"guard_const": 0.0, "guard_linear": [1, 0],
                     "B": [[1, 0], [2, 0]]},
        }
        with pytest.raises(RankDeficient, match="wall.B"):
            generic_system_from_config(cfg)

    def test_non_nested_rejected(self):
        cfg = {
            "n": 2,
            "metric": np.eye(2).tolist(),
            "A": [[0, 1]],
            "wall": {"guard_const": 0.0, "guard_linear": [1, 0], "B": [[1, 0]]},
        }
        with pytest.raises(NestingViolated):
            generic_system_from_config(cfg)
