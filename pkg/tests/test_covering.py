import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from entroscope.covering import (
    AdjacencyError,
    BridgeProfile,
    CoverScales,
    FunctionClassBounds,
    MarchError,
    bridge_constants,
    bridge_glue,
    brute_force_cover_count,
    build_pl_cover,
    connect_cover,
    connection_count,
    empirical_cover,
    empirical_cover_count,
    merge_covers,
    one_step_line,
    pl_cover_cardinality,
)
from entroscope.field import Field, Grid, field_from_function


def small_bounds(eps=0.1, A=0.2, B=0.2, C=1.0):
    return FunctionClassBounds(eps=eps, A=A, B=B, C=C)


def random_admissible_spline(rng, bounds):
    """Cubic spline in the class: |f| <= A, |f'| <= B, |f''| <= C,
    small endpoint values."""
    R = bounds.R
    nodes = np.arange(-R - 5, R + 5.01, 5.0)
    vals = rng.uniform(-0.75 * bounds.A, 0.75 * bounds.A, nodes.size)
    vals[:2] *= 0.3
    vals[-2:] *= 0.3
    cs = CubicSpline(nodes, vals, bc_type="natural")
    x = np.linspace(-R, R, 4001)
    assert np.abs(cs(x)).max() <= bounds.A
    assert np.abs(cs(x, 1)).max() <= bounds.B
    assert np.abs(cs(x, 2)).max() <= bounds.C
    assert max(abs(cs(-R)), abs(cs(R))) <= bounds.eps
    return cs


class TestCoverScales:
    def test_values(self):
        sc = CoverScales.derive(eps=0.1, A=0.2, C=1.0)
        assert sc.xi == pytest.approx(0.01)
        assert sc.tau == pytest.approx(0.01)
        assert sc.eta == sc.xi * sc.tau  # exact product
        assert sc.nu == pytest.approx(1.0 / 40.0)
        assert sc.gain_mu == pytest.approx(1.0 / 200.0)
        assert sc.n_star == math.ceil(0.2 / sc.eta) + 1

    def test_window_pinned(self):
        b = small_bounds()
        assert 40.0 <= b.R <= 41.0
        assert b.m_star * b.scales.xi == pytest.approx(b.R)

    def test_rejects_eps_above_A(self):
        with pytest.raises(ValueError):
            FunctionClassBounds(eps=0.3, A=0.2, B=0.2, C=1.0)

    def test_rejects_small_curvature(self):
        with pytest.raises(ValueError):
            FunctionClassBounds(eps=0.1, A=0.2, B=0.2, C=0.5)


class TestOneStepLine:
    def test_flat_start(self):
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        step = one_step_line(0.0, 0.0, 0.1, sc)
        assert step.j == 2
        assert step.slope == pytest.approx(0.02)

    def test_positive_slope(self):
        # slope/tau = 3.3: the admissible line index is the integer part
        # of 5.3, i.e. 5, keeping the slope excess inside (tau, 2*tau]
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        step = one_step_line(0.0, 0.033, 0.1, sc)
        assert step.j == 5
        assert step.slope == pytest.approx(0.05)

    def test_certified_endpoint(self):
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        step = one_step_line(0.0, 0.0, 0.1, sc)
        # max(0.1 - 0.01/200, 0.01/40)
        assert step.certified == pytest.approx(0.09995)

    def test_mirror(self):
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        up = one_step_line(0.01, 0.05, 0.1, sc)
        down = one_step_line(-0.01, -0.05, 0.1, sc)
        assert down.j == -up.j

    def test_ceiling_convention_at_integers(self):
        # the integer part [x] = inf{n >= x} keeps exact integers
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        assert one_step_line(0.0, 0.0, 0.1, sc).j == 2

    def test_slope_band_violation(self):
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        with pytest.raises(MarchError):
            one_step_line(0.0, 0.5, 0.1, sc, slope_bound=0.2)

    def test_step_bounds_on_quadratic_instances(self):
        """Value, slope and endpoint bounds against direct interval
        evaluation on f(x) = f0 + s x + r x^2 instances."""
        sc = CoverScales.derive(0.1, 0.2, 1.0)
        eps = 0.1
        rng = np.random.default_rng(2)
        xs = np.linspace(0.0, sc.xi, 33)
        for _ in range(1000):
            s = rng.uniform(-0.2, 0.2)
            r = rng.uniform(-0.5, 0.5)  # |f''| = |2r| <= C = 1
            delta_in = rng.uniform(eps ** 2 * sc.nu, eps)
            f0 = rng.uniform(-delta_in, delta_in)
            step = one_step_line(f0, s, delta_in, sc)
            fvals = f0 + s * xs + r * xs ** 2
            gvals = step.slope * xs
            assert np.abs(fvals - gvals).max() <= max(delta_in, eps ** 2 * sc.nu) + 1e-12
            fslope = s + 2 * r * xs
            assert np.abs(fslope - step.slope).max() <= 3.0 * eps / 10.0 + 1e-12
            end_gap = abs(fvals[-1] - gvals[-1])
            assert end_gap <= max(delta_in - sc.gain_mu * eps ** 2,
                                  sc.nu * eps ** 2) + 1e-12


class TestMarch:
    def test_zero_function_nodes_near_zero(self):
        bounds = small_bounds()
        cover = build_pl_cover(bounds)
        res = cover.match(lambda x: np.zeros_like(np.asarray(x, float)),
                          lambda x: np.zeros_like(np.asarray(x, float)))
        sc = bounds.scales
        node_vals = res.atom.node_values
        assert np.abs(node_vals).max() <= bounds.eps ** 2 * sc.nu + 1e-15
        assert res.atom.endpoint_zero

    def test_random_splines_covered(self):
        bounds = small_bounds()
        cover = build_pl_cover(bounds)
        rng = np.random.default_rng(7)
        x = np.linspace(-bounds.R, bounds.R, 8001)
        for _ in range(10):
            cs = random_admissible_spline(rng, bounds)
            res = cover.match(cs, lambda z: cs(z, 1))
            assert np.abs(cs(x) - res.atom.evaluate(x)).max() <= bounds.eps
            assert np.abs(cs(x, 1) - res.atom.slope_at(x)).max() <= bounds.eps

    def test_endpoint_gain_telescopes(self):
        bounds = small_bounds()
        cover = build_pl_cover(bounds)
        rng = np.random.default_rng(3)
        cs = random_admissible_spline(rng, bounds)
        res = cover.match(cs, lambda z: cs(z, 1))
        sc = bounds.scales
        floor = bounds.eps ** 2 * sc.nu
        assert res.left.deltas_out[-1] <= floor + 1e-15
        assert res.right.deltas_out[-1] <= floor + 1e-15
        # certified deltas decrease until they hit the floor
        d = np.asarray(res.left.deltas_out)
        assert np.all(np.diff(d) <= 1e-15)

    def test_middle_segment_bounds(self):
        """On the closing segment the value gap stays within eps and the
        slope gap within (11/20) eps."""
        bounds = small_bounds()
        cover = build_pl_cover(bounds)
        rng = np.random.default_rng(11)
        sc = bounds.scales
        for _ in range(5):
            cs = random_admissible_spline(rng, bounds)
            res = cover.match(cs, lambda z: cs(z, 1))
            xs = np.linspace(0.0, sc.xi, 65)
            gap = np.abs(cs(xs) - res.atom.evaluate(xs)).max()
            slope_gap = np.abs(cs(xs, 1) - res.atom.slope_at(xs)).max()
            assert gap <= bounds.eps
            assert slope_gap <= (11.0 / 20.0) * bounds.eps + 1e-12

    def test_node_values_quantized(self):
        bounds = small_bounds()
        cover = build_pl_cover(bounds)
        rng = np.random.default_rng(13)
        cs = random_admissible_spline(rng, bounds)
        res = cover.match(cs, lambda z: cs(z, 1))
        assert all(isinstance(i, int) for i in res.atom.node_indices)
        # slopes are integer multiples of tau by construction
        slopes = res.atom.slopes / bounds.scales.tau
        assert np.abs(slopes - np.round(slopes)).max() < 1e-9

    def test_cardinality_formula(self):
        bounds = small_bounds()
        sc = bounds.scales
        expect = (2 * sc.n_star + 1) ** (2 * bounds.m_star - 1)
        assert pl_cover_cardinality(bounds) == expect
        assert build_pl_cover(bounds).cardinality == expect


@pytest.fixture(scope="module")
def bridge_setup():
    grid = Grid(-64.0, 64.0, 4096)
    psi = BridgeProfile(R=40.0)
    return grid, psi


@pytest.fixture(scope="module")
def connect_instance():
    grid = Grid(-64.0, 64.0, 4096)
    eps = 0.2
    g0 = lambda x: 0.2 * np.sin(np.pi * np.asarray(x, float) / 32.0)
    g0p = lambda x: 0.2 * (np.pi / 32.0) * np.cos(np.pi * np.asarray(x, float) / 32.0)
    gfield = field_from_function(grid, g0)
    return grid, eps, g0, g0p, gfield


@pytest.fixture(scope="module")
def cover_members():
    g = Grid(-40.0, 40.0, 512)
    rng = np.random.default_rng(5)
    out = []
    for _ in range(12):
        spec = np.zeros(g.n // 2 + 1, complex)
        spec[1:9] = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        out.append(Field(g, np.fft.irfft(spec, n=g.n)))
    return out


class TestBridge:
    @pytest.fixture
    def setup(self, bridge_setup):
        return bridge_setup

    def test_matching_witness_unchanged(self, setup):
        grid, psi = setup
        u0 = field_from_function(grid, lambda x: 0.05 * np.sin(np.pi * x / 32.0))
        bridge = bridge_glue(u0, u0, u0, psi)
        x = np.linspace(-40.0, 40.0, 101)
        from entroscope.field import eval_periodic

        assert np.abs(bridge.value(x) - eval_periodic(u0, x)).max() < 1e-12

    def test_single_end_mismatch(self, setup):
        grid, psi = setup
        u0 = field_from_function(grid, lambda x: 0.05 * np.sin(np.pi * x / 32.0))
        gR = field_from_function(grid,
                                 lambda x: 0.05 * np.sin(np.pi * x / 32.0) + 0.03)
        bridge = bridge_glue(u0, u0, gR, psi)
        from entroscope.field import eval_periodic

        # exact match at +R, untouched below R - 3
        assert bridge.value(40.0) == pytest.approx(
            float(eval_periodic(gR, 40.0)), abs=1e-12)
        x = np.linspace(-40.0, 36.9, 200)
        assert np.abs(bridge.value(x) - eval_periodic(u0, x)).max() < 1e-12

    def test_sup_bound_two_eps(self, setup):
        grid, psi = setup
        rng = np.random.default_rng(3)
        eps = 0.1
        base = lambda x: 0.3 * np.sin(np.pi * x / 64.0)
        u0 = field_from_function(grid, base)
        gR = field_from_function(
            grid, lambda x: base(x) + eps * np.cos(np.pi * x / 64.0))
        gL = field_from_function(
            grid, lambda x: base(x) - eps * np.sin(np.pi * x / 16.0))
        bridge = bridge_glue(u0, gL, gR, psi)
        x = np.linspace(0.0, 40.0, 400)
        from entroscope.field import eval_periodic

        assert np.abs(bridge.value(x) - eval_periodic(gR, x)).max() <= 2 * eps + 1e-9

    def test_bridge_constants(self):
        psi = BridgeProfile(R=40.0)
        a, b, c = bridge_constants(psi, eps=0.1)
        assert a == 2.0
        assert b > 1.0
        assert c > 0.0


class TestConnectCover:
    @pytest.fixture
    def instance(self, connect_instance):
        return connect_instance

    def test_restrictions_of_global_function_covered(self, instance):
        grid, eps, g0, g0p, gfield = instance
        cover = connect_cover(gfield, gfield, G_curv=1.0, eps=eps, u0=gfield)
        atom = cover.match(g0, g0p)
        R = cover.window[1]
        x = np.linspace(-R, R, 2001)
        assert np.abs(g0(x) - atom.value(x)).max() <= eps
        assert np.abs(g0p(x) - atom.deriv(x)).max() <= eps

    def test_endpoints_match_exactly(self, instance):
        grid, eps, g0, g0p, gfield = instance
        cover = connect_cover(gfield, gfield, G_curv=1.0, eps=eps, u0=gfield)
        atom = cover.match(g0, g0p)
        R = cover.window[1]
        from entroscope.field import eval_periodic

        assert float(atom.value(-R)) == pytest.approx(
            float(eval_periodic(gfield, -R)), abs=1e-12)
        assert float(atom.value(R)) == pytest.approx(
            float(eval_periodic(gfield, R)), abs=1e-12)

    def test_cardinality_independent_of_boundary_data(self, instance):
        grid, eps, g0, g0p, gfield = instance
        rng = np.random.default_rng(0)
        counts = set()
        for _ in range(5):
            c = rng.uniform(-0.2, 0.2)
            gl = field_from_function(grid, lambda x: g0(x) + c * np.cos(np.pi * x / 64.0))
            gr = field_from_function(grid, lambda x: g0(x) - c * np.sin(np.pi * x / 64.0))
            cover = connect_cover(gl, gr, G_curv=1.0, eps=eps, u0=gfield)
            counts.add(cover.cardinality)
        assert len(counts) == 1


class TestMergeCovers:
    def make_cover(self, window, count):
        g = Grid(-64.0, 64.0, 512)
        members = [Field(g, np.full(g.n, 0.1 * i)) for i in range(count)]
        from entroscope.covering import CoverAtomSet

        return CoverAtomSet(eps=0.2, window=window, cardinality=count,
                            kind="empirical", atoms=members)

    def test_adjacency_required(self):
        left = self.make_cover((-20.0, 0.0), 2)
        right = self.make_cover((5.0, 20.0), 2)
        with pytest.raises(AdjacencyError):
            merge_covers(left, right, 0.2, 1.0)

    def test_singletons(self):
        left = self.make_cover((-20.0, 0.0), 1)
        right = self.make_cover((0.0, 20.0), 1)
        cert = merge_covers(left, right, 0.2, 1.0)
        assert cert.bound == cert.k_eps

    def test_k_independent_of_window_length(self):
        k_values = set()
        for length in (10.0, 20.0, 40.0):
            left = self.make_cover((-length, 0.0), 3)
            right = self.make_cover((0.0, length), 2)
            cert = merge_covers(left, right, 0.2, 1.0)
            assert cert.bound == 6 * cert.k_eps
            k_values.add(cert.k_eps)
        assert len(k_values) == 1

    def test_connection_count_depends_on_eps_and_curvature(self):
        k1 = connection_count(0.2, 1.0)
        k2 = connection_count(0.1, 1.0)
        k3 = connection_count(0.2, 2.0)
        assert k1 != k2
        assert k1 != k3


class TestEmpiricalCover:
    @pytest.fixture
    def members(self, cover_members):
        return cover_members

    def test_identical_members(self):
        g = Grid(-40.0, 40.0, 512)
        f = Field(g, np.sin(np.pi * g.points / 40.0))
        assert empirical_cover_count([f, f, f], (-10.0, 10.0), 0.1) == 1

    def test_two_distant_members(self):
        g = Grid(-40.0, 40.0, 512)
        f = Field(g, np.zeros(g.n))
        h = Field(g, np.full(g.n, 0.3))
        assert empirical_cover_count([f, h], (-10.0, 10.0), 0.1) == 2

    def test_large_eps_gives_one(self, members):
        from entroscope.functionals import w1inf_norm
        from entroscope.field import sub

        diameter = max(
            w1inf_norm(sub(a, b), window=(-10.0, 10.0))
            for a in members for b in members
        )
        assert empirical_cover_count(members, (-10.0, 10.0), diameter * 1.01) == 1

    def test_monotone_in_eps_on_data(self, members):
        window = (-10.0, 10.0)
        counts = [
            empirical_cover_count(members, window, eps)
            for eps in (0.05, 0.1, 0.2, 0.4, 0.8)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_monotone_under_subset_on_data(self, members):
        window = (-10.0, 10.0)
        full = empirical_cover_count(members, window, 0.3)
        sub_count = empirical_cover_count(members[:6], window, 0.3)
        assert sub_count <= full

    def test_greedy_vs_brute_force(self, members):
        window = (-10.0, 10.0)
        for eps in (0.2, 0.5, 1.0):
            greedy = empirical_cover_count(members[:8], window, eps)
            optimal = brute_force_cover_count(members[:8], window, eps)
            assert optimal <= greedy <= 2 * optimal

    def test_cover_atoms_are_members(self, members):
        cover = empirical_cover(members, (-10.0, 10.0), 0.3)
        assert cover.count == len(cover.atoms)
        for atom in cover.atoms:
            assert any(atom is m for m in members)
