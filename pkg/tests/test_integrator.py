import math

import numpy as np
import pytest

from qns1d import Grid, InitialData, PhysicalParams, SimConfig, State, advance, initial_data, rk4_step, stable_dt
from qns1d.core import trapezoid
from qns1d.discretization import primitive_arrays
from qns1d.errors import ConfigError, RegimeError, StepError
from qns1d.integrator import sponge_profile

# frozen from the N=1024 run; the N=4096 run gives 0.18152094744136685 and 1.2586002112641845
REF_U_MAX = 0.1815149931712065
REF_V_MAX = 1.258605848793325


class TestStableDt:
    def test_acceptance_config_regression(self):
        g = Grid(20.0, 2048)
        s = initial_data("gauss-bump", {"A": 0.3, "B": 0.2, "sigma": 2.0}, g)
        dt = stable_dt(s, PhysicalParams(1.0, 0.1, 2.0), g, 1.0)
        # viscous clause dx**2 / 8 with dx = 40/2048 and v_min = 1
        assert dt == 4.76837158203125e-05
        assert stable_dt(s, PhysicalParams(1.0, 0.1, 2.0), g, 0.5) == 0.5 * dt

    def test_viscous_limit(self):
        g = Grid(10.0, 256)
        s = State.equilibrium(g)
        dt = stable_dt(s, PhysicalParams(1e4, 0.0, 2.0), g, 0.7)
        assert dt == pytest.approx(0.7 * g.dx**2 / 8e4, rel=1e-14)

    def test_independent_of_eps_at_zero(self):
        g = Grid(10.0, 64)
        s = State(np.full(g.size, 0.3), np.zeros(g.size))
        a = stable_dt(s, PhysicalParams(0.01, 0.0, 2.0), g, 1.0)
        assert a == pytest.approx(min(g.dx**2 * 0.09 / 0.08, g.dx / math.sqrt(2 * 0.3**-3)))

    def test_dispersive_clause(self):
        g = Grid(10.0, 64)
        s = State.equilibrium(g)
        assert stable_dt(s, PhysicalParams(0.01, 5.0, 2.0), g, 1.0) == pytest.approx(g.dx**2 / 20.0)


class TestRk4:
    def test_equilibrium(self):
        g = Grid(5.0, 64)
        p = PhysicalParams(1.0, 0.3, 2.0)
        v, u = rk4_step(lambda t, v, w: primitive_arrays(v, w, p, g.dx), (np.ones(g.size), np.zeros(g.size)), 0.1)
        assert np.array_equal(v, np.ones(g.size)) and np.array_equal(u, np.zeros(g.size))

    def test_time_dependent_rhs_exact(self):
        # y' = 3 t**2 + 1 is integrated exactly by a fourth-order method
        rhs = lambda t, v, w: (np.full_like(v, 3 * t * t + 1), np.full_like(w, -2.0))
        v, w = rk4_step(rhs, (np.zeros(3), np.ones(3)), 0.5, t=1.0)
        assert np.allclose(v, (1.5**3 + 1.5) - (1 + 1), rtol=1e-15)
        assert np.allclose(w, 0.0, atol=1e-15)

    def test_step_doubling_order(self):
        g = Grid(20.0, 128)
        p = PhysicalParams(1.0, 0.25, 2.0)
        s = initial_data("gauss-bump", {}, g)
        f = lambda t, v, w: primitive_arrays(v, w, p, g.dx)

        def gap(dt):
            a = rk4_step(f, (s.v, s.u), dt)
            b = rk4_step(f, rk4_step(f, (s.v, s.u), dt / 2), dt / 2)
            return max(np.abs(a[0] - b[0]).max(), np.abs(a[1] - b[1]).max())

        ratio = gap(0.008) / gap(0.004)
        assert 16 <= ratio <= 34

    def test_floor_violation(self):
        rhs = lambda t, v, w: (np.array([0.0, -10.0, 0.0]), np.zeros(3))
        with pytest.raises(StepError) as info:
            rk4_step(rhs, (np.ones(3), np.zeros(3)), 0.5, t=2.0, floor=1e-8)
        assert info.value.node == 1
        assert info.value.time == pytest.approx(2.25)
        assert info.value.v_min < 0

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            rk4_step(lambda t, v, w: (v, w), (np.ones(2), np.ones(2)), 0.0)


class TestInitialData:
    def test_zero_amplitude_is_equilibrium(self):
        g = Grid(20.0, 64)
        s = initial_data("gauss-bump", {"A": 0.0, "B": 0.0}, g)
        assert np.array_equal(s.v, np.ones(g.size)) and np.array_equal(s.u, np.zeros(g.size))

    def test_gauss_bump_values(self):
        g = Grid(20.0, 1024)
        s = initial_data("gauss-bump", {"A": 0.3, "sigma": 2.0}, g)
        assert s.v[g.N // 2] == 1.3
        assert s.v[0] - 1 <= math.exp(-100) and s.v[-1] - 1 <= math.exp(-100)

    def test_double_bump(self):
        g = Grid(20.0, 400)
        s = initial_data("double-bump", {"A": 0.5, "B": 0.1, "sigma": 2.0, "center": 5.0}, g)
        j = int(np.argmin(np.abs(g.x - 5.0)))
        assert g.x[j] == pytest.approx(5.0)
        want = 1 + 0.5 * (1 + math.exp(-100 / 4))
        assert s.v[j] == pytest.approx(want, rel=1e-14)
        assert s.v[g.N - j] == pytest.approx(want, rel=1e-14)

    @pytest.mark.parametrize("kw", [{"A": -1.0}, {"A": -2.0}, {"sigma": 0.0}])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            initial_data("gauss-bump", kw, Grid(1.0, 16))

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            initial_data("square-wave", {}, Grid(1.0, 16))


class TestSimConfig:
    def test_xi_needs_parabolic_regime(self):
        with pytest.raises(RegimeError):
            SimConfig(PhysicalParams(1.0, 2.0, 2.0), formulation="xi")

    @pytest.mark.parametrize("kw", [{"cfl": 0.0}, {"cfl": 1.5}, {"t_final": -1.0}, {"formulation": "euler"},
                                    {"positivity_floor": 0.0}, {"sponge_fraction": 1.0}, {"sponge_rate": -1.0}])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            SimConfig(PhysicalParams(1.0, 0.1, 2.0), **kw)

    def test_snapshot_times(self):
        cfg = SimConfig(PhysicalParams(1, 0.1, 2), t_final=1.0, snapshot_interval=0.3, extra_times=(0.45,))
        assert cfg.snapshot_times() == pytest.approx([0.0, 0.3, 0.45, 0.6, 0.9, 1.0])
        assert len(SimConfig(PhysicalParams(1, 0.1, 2), t_final=2.0).snapshot_times()) == 11


class TestAdvance:
    def test_zero_time(self):
        cfg = SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=64, t_final=0.0)
        traj = advance(cfg)
        assert traj.times == [0.0]
        s0 = initial_data("gauss-bump", {}, cfg.grid)
        assert np.array_equal(traj.final.v, s0.v) and np.array_equal(traj.final.u, s0.u)

    @pytest.mark.parametrize("form", ["primitive", "xi", "omega"])
    def test_equilibrium(self, form):
        cfg = SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=64, t_final=1.0, formulation=form,
                        initial=InitialData(A=0.0, B=0.0))
        traj = advance(cfg)
        for s in traj.states:
            assert np.array_equal(s.v, np.ones(65)) and np.array_equal(s.u, np.zeros(65))
        assert traj.cumulative_dissipation == 0.0

    @pytest.mark.parametrize("form", ["primitive", "xi", "omega"])
    def test_trajectory_invariants(self, form):
        cfg = SimConfig(PhysicalParams(1.0, 0.5, 2.0), N=128, t_final=0.5, snapshot_interval=0.1, formulation=form)
        traj = advance(cfg)
        assert traj.times[0] == 0.0 and traj.times[-1] == 0.5
        assert all(b > a for a, b in zip(traj.times, traj.times[1:]))
        assert all(b >= a for a, b in zip(traj.dissipation, traj.dissipation[1:]))
        assert all(isinstance(s, State) for s in traj.states)
        assert traj.v_min_seen > cfg.positivity_floor
        summary = traj.dt_summary()
        assert summary["steps"] == traj.step_count > 0 and 0 < summary["dt_min"] <= summary["dt_max"]

    def test_snapshot_landing_is_exact(self):
        cfg = SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=64, t_final=0.3, snapshot_interval=0.1)
        traj = advance(cfg)
        assert traj.times == cfg.snapshot_times()

    def test_regression_constants(self):
        traj = advance(SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=1024, t_final=1.0))
        assert float(traj.final.u.max()) == pytest.approx(REF_U_MAX, rel=1e-12)
        assert float(traj.final.v.max()) == pytest.approx(REF_V_MAX, rel=1e-12)
        # agreement with the N=4096 reference
        assert REF_U_MAX == pytest.approx(0.18152094744136685, rel=1e-3)
        assert REF_V_MAX == pytest.approx(1.2586002112641845, rel=1e-3)

    def test_grid_convergence(self):
        finals = []
        for N in (128, 256, 512):
            traj = advance(SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=N, t_final=0.5))
            finals.append(traj.final)

        def dist(a, b, dx):
            # coarse-grid nodes are every other fine node
            d = np.concatenate([a.v - b.v[::2], a.u - b.u[::2]])
            return math.sqrt(trapezoid(d * d, dx))

        e1 = dist(finals[0], finals[1], 40 / 128)
        e2 = dist(finals[1], finals[2], 40 / 256)
        assert e1 / e2 >= 3.0

    def test_energy_does_not_grow(self):
        from qns1d.diagnostics import energy
        cfg = SimConfig(PhysicalParams(1.0, 0.5, 2.0), N=256, t_final=2.0)
        traj = advance(cfg)
        e = [energy(s, cfg.params, cfg.grid) for s in traj.states]
        assert e[-1] <= e[0] + 1e-8

    def test_step_error_carries_partial_trajectory(self):
        cfg = SimConfig(PhysicalParams(1.0, 0.1, 2.0), N=128, t_final=0.1, dt=1e-4,
                        initial=InitialData(A=-0.999, B=10.0))
        with pytest.raises(StepError) as info:
            advance(cfg)
        assert info.value.trajectory.times == [0.0]
        assert info.value.node is not None and info.value.time > 0

    def test_boundary_contamination_warning(self):
        cfg = SimConfig(PhysicalParams(1.0, 0.25, 2.0), L=4.0, N=64, t_final=0.5, sponge_fraction=0.0)
        traj = advance(cfg)
        assert any("boundary contamination" in w for w in traj.warnings)

    def test_quiet_run_has_no_warnings(self):
        traj = advance(SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=256, t_final=1.0))
        assert traj.warnings == []


class TestAbsorbingLayer:
    def test_profile(self):
        g = Grid(20.0, 400)
        s = sponge_profile(g, 0.3, 20.0)
        inner = np.abs(g.x) <= 14.0 + 1e-12
        assert np.all(s[inner] == 0)
        assert s[0] == s[-1] == 20.0
        assert np.all(np.diff(s[: g.N // 2]) <= 0)
        assert sponge_profile(g, 0.0, 20.0) is None and sponge_profile(g, 0.3, 0.0) is None

    def test_no_effect_before_waves_arrive(self):
        p = PhysicalParams(1.0, 0.25, 2.0)
        a = advance(SimConfig(p, N=256, t_final=1.0)).final
        b = advance(SimConfig(p, N=256, t_final=1.0, sponge_fraction=0.0)).final
        assert np.max(np.abs(a.v - b.v)) < 1e-10 and np.max(np.abs(a.u - b.u)) < 1e-10

    def test_layer_warning(self):
        traj = advance(SimConfig(PhysicalParams(1.0, 0.25, 2.0), N=128, t_final=4.0))
        assert any("absorbing layer active" in w for w in traj.warnings)
