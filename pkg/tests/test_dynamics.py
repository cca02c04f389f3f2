import numpy as np
import pytest

from entroscope.dynamics import (
    DivergenceError,
    ModelParams,
    Trajectory,
    divided_difference,
    evolve,
    evolve_difference,
    evolve_linear,
    generate_ensemble,
    random_initial_state,
    rhs,
)
from entroscope.field import Field, FieldPair, Grid, constant_field


def pair(grid, u, v):
    return FieldPair(Field(grid, u), Field(grid, v))


def const_pair(grid, cu, cv):
    return FieldPair(constant_field(grid, cu), constant_field(grid, cv))


@pytest.fixture(scope="module")
def grid():
    return Grid(-40.0, 40.0, 512)


@pytest.fixture(scope="module")
def params():
    return ModelParams(eta=0.1, scheme="spectral")


class TestModelParams:
    def test_rejects_eta_above_threshold(self):
        with pytest.raises(ValueError, match="eta"):
            ModelParams(eta=0.2)

    def test_rejects_eta0_above_limit(self):
        with pytest.raises(ValueError, match="sqrt"):
            ModelParams(eta=0.1, eta0=0.2)

    def test_rejects_large_cfl(self):
        with pytest.raises(ValueError, match="cfl"):
            ModelParams(eta=0.1, cfl_factor=0.9)

    def test_rejects_oversized_dt(self, grid):
        p = ModelParams(eta=0.1, dt=1.0)
        with pytest.raises(ValueError, match="dt"):
            p.time_step(grid)

    def test_default_dt(self, grid):
        p = ModelParams(eta=0.1)
        expected = min(0.5 * 0.1 * grid.dx, 0.5 * 0.1 ** 2)
        assert p.time_step(grid) == pytest.approx(expected)


class TestRhs:
    def test_zero_state(self, grid, params):
        out = rhs(const_pair(grid, 0.0, 0.0), params)
        assert np.all(out.u.samples == 0.0)
        assert np.all(out.v.samples == 0.0)

    def test_potential_equilibrium(self, grid, params):
        out = rhs(const_pair(grid, 1.0, 0.0), params)
        assert np.abs(out.v.samples).max() < 1e-10

    def test_half_amplitude(self, grid, params):
        # U'(0.5) = 0.5 - 0.125 = 0.375, divided by eta^2 = 0.01
        out = rhs(const_pair(grid, 0.5, 0.0), params)
        assert out.v.samples == pytest.approx(37.5)


class TestEvolve:
    @pytest.mark.parametrize("value", [0.0, 1.0, -1.0])
    def test_equilibria_preserved(self, grid, params, value):
        traj = evolve(const_pair(grid, value, 0.0), params, 2.0)
        assert np.abs(traj.states[-1].u.samples - value).max() < 1e-12
        assert np.abs(traj.states[-1].v.samples).max() < 1e-12

    def test_final_time_and_sampling(self, grid, params):
        traj = evolve(const_pair(grid, 1.0, 0.0), params, 1.0, sample_every=0.3)
        assert traj.times[-1] == pytest.approx(1.0)
        assert np.all(np.diff(traj.times) > 0)

    def test_step_halving_order(self, grid, params):
        state = random_initial_state(grid, np.random.default_rng(3))
        dt = params.time_step(grid)
        ref = evolve(state, ModelParams(eta=0.1, dt=dt / 4), 1.0)
        e1 = np.abs(
            evolve(state, params, 1.0).states[-1].u.samples
            - ref.states[-1].u.samples
        ).max()
        e2 = np.abs(
            evolve(state, ModelParams(eta=0.1, dt=dt / 2), 1.0).states[-1].u.samples
            - ref.states[-1].u.samples
        ).max()
        assert 8.0 < e1 / e2 < 32.0  # 4th order: ratio ~16

    def test_bounded_orbit_vs_half_step(self, grid):
        p = ModelParams(eta=0.1, scheme="finite_difference")
        rng = np.random.default_rng(7)
        state = pair(grid, 0.01 * rng.standard_normal(grid.n),
                     0.01 * rng.standard_normal(grid.n))
        traj = evolve(state, p, 50.0)
        assert np.abs(traj.states[-1].u.samples).max() <= 2.0
        half = ModelParams(eta=0.1, scheme="finite_difference",
                           dt=p.time_step(grid) / 2)
        ref = evolve(state, half, 50.0)
        assert np.abs(
            traj.states[-1].u.samples - ref.states[-1].u.samples
        ).max() < 1e-4

    def test_divergence_detected(self, grid, params):
        state = pair(grid, 1e5 * np.sin(np.pi * grid.points / 40.0),
                     np.zeros(grid.n))
        with pytest.raises(DivergenceError) as err:
            evolve(state, params, 5.0)
        assert err.value.time > 0


class TestEvolveLinear:
    def test_zero_fixed(self, grid, params):
        traj = evolve_linear(const_pair(grid, 0.0, 0.0), params, 1.0)
        assert np.all(traj.states[-1].u.samples == 0.0)

    @pytest.mark.parametrize("k", [1.0, 3.0, 8.0])
    def test_single_mode_closed_form(self, k):
        # mode amplitudes follow the 2x2 system with eigenvalues
        # (-1 +- sqrt(1 - 4 k^2 eta^2)) / (2 eta^2)
        grid = Grid(-np.pi, np.pi, 256)
        eta = 0.1
        p = ModelParams(eta=eta, scheme="spectral")
        state = pair(grid, np.sin(k * grid.points), np.zeros(grid.n))
        t_final = 0.5
        traj = evolve_linear(state, p, t_final)
        disc = np.sqrt(complex(1.0 - 4.0 * k * k * eta * eta))
        lam_p = (-1.0 + disc) / (2.0 * eta * eta)
        lam_m = (-1.0 - disc) / (2.0 * eta * eta)
        cp = -lam_m / (lam_p - lam_m)
        cm = lam_p / (lam_p - lam_m)
        u_amp = (cp * np.exp(lam_p * t_final) + cm * np.exp(lam_m * t_final)).real
        v_amp = (cp * lam_p * np.exp(lam_p * t_final)
                 + cm * lam_m * np.exp(lam_m * t_final)).real
        assert np.abs(
            traj.states[-1].u.samples - u_amp * np.sin(k * grid.points)
        ).max() < 1e-6
        assert np.abs(
            traj.states[-1].v.samples - v_amp * np.sin(k * grid.points)
        ).max() < 1e-6

    def test_linearity(self, grid, params):
        a = random_initial_state(grid, np.random.default_rng(20))
        b = random_initial_state(grid, np.random.default_rng(21))
        both = pair(grid, a.u.samples + b.u.samples, a.v.samples + b.v.samples)
        lhs = evolve_linear(both, params, 1.0).states[-1]
        ra = evolve_linear(a, params, 1.0).states[-1]
        rb = evolve_linear(b, params, 1.0).states[-1]
        scale = np.abs(lhs.u.samples).max()
        assert np.abs(
            lhs.u.samples - ra.u.samples - rb.u.samples
        ).max() / scale < 1e-10


class TestEvolveDifference:
    def test_identical_inputs_stay_zero(self, grid, params):
        a = random_initial_state(grid, np.random.default_rng(1))
        traj = evolve_difference(a, a, params, 1.0)
        assert np.abs(traj.states[-1].u.samples).max() < 1e-12

    def test_equilibrium_pair_constant_difference(self, grid, params):
        a = const_pair(grid, 1.0, 0.0)
        b = const_pair(grid, -1.0, 0.0)
        traj = evolve_difference(a, b, params, 2.0)
        assert traj.states[-1].u.samples == pytest.approx(2.0, abs=1e-10)

    def test_matches_subtraction(self, grid, params):
        a = random_initial_state(grid, np.random.default_rng(10))
        b = random_initial_state(grid, np.random.default_rng(11))
        traj = evolve_difference(a, b, params, 10.0)
        ua = evolve(a, params, 10.0).states[-1].u.samples
        ub = evolve(b, params, 10.0).states[-1].u.samples
        assert np.abs(traj.states[-1].u.samples - (ua - ub)).max() < 1e-5

    def test_divided_difference_identity(self):
        rng = np.random.default_rng(0)
        u1 = rng.uniform(-2, 2, 100)
        u2 = rng.uniform(-2, 2, 100)
        lhs = divided_difference(u1, u2) * (u1 - u2)
        rhs_vals = (u1 - u1 ** 3) - (u2 - u2 ** 3)
        assert np.abs(lhs - rhs_vals).max() < 1e-12


class TestGenerateEnsemble:
    def test_deterministic(self, grid):
        p = ModelParams(eta=0.1, scheme="finite_difference")
        e1 = generate_ensemble(4, p, burn_in=1.0, seed=9, grid=grid)
        e2 = generate_ensemble(4, p, burn_in=1.0, seed=9, grid=grid)
        for m1, m2 in zip(e1.members, e2.members):
            assert np.array_equal(m1.u.samples, m2.u.samples)
            assert np.array_equal(m1.v.samples, m2.v.samples)

    def test_zero_burn_in_returns_seeded_initial(self, grid, params):
        ens = generate_ensemble(1, params, burn_in=0.0, seed=42, grid=grid)
        expected = random_initial_state(grid, np.random.default_rng([42, 0]))
        assert np.array_equal(ens.members[0].u.samples, expected.u.samples)
        assert np.array_equal(ens.members[0].v.samples, expected.v.samples)

    def test_initial_bounds(self, grid, params):
        ens = generate_ensemble(8, params, burn_in=0.0, seed=3, grid=grid)
        for m in ens.members:
            assert np.abs(m.u.samples).max() <= 2.0
            assert np.abs(m.v.samples).max() <= 1.0

    def test_rejects_bad_count(self, grid, params):
        with pytest.raises(ValueError):
            generate_ensemble(0, params, burn_in=0.0, seed=1, grid=grid)


class TestTrajectory:
    def test_rejects_non_increasing_times(self, grid):
        s = const_pair(grid, 0.0, 0.0)
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.0]), [s, s])


def test_absorption_norm_plateau(absorption_run):
    """After burn-in, the alpha-weighted loc2 norm stops growing: the max
    over [300, 400] stays within 5% of the max over [200, 300]."""
    times, norms, _, _ = absorption_run
    early = norms[times <= 300.0].max()
    late = norms[times >= 300.0].max()
    assert late <= 1.05 * early
