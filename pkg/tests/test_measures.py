import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leftcurtain import (
    DiscreteMeasure,
    Order,
    check_convex_order,
    put_potential,
    quantile_left,
    quantize_density,
    random_cx_pair,
    restricted_measure,
)
from conftest import dm


class TestPutPotential:
    def test_point_mass(self):
        p = put_potential(dm((0.0, 1.0)))
        assert p.slope_left == 0.0 and p.slope_right == 1.0
        assert p(0.0) == 0.0

    def test_symmetric_pair(self):
        p = put_potential(dm((-1.0, 0.5), (1.0, 0.5)))
        assert p(0.0) == pytest.approx(0.5)

    def test_three_thirds(self):
        p = put_potential(dm((-3.0, 1 / 3), (0.0, 1 / 3), (3.0, 1 / 3)))
        assert p(0.0) == pytest.approx(1.0)

    def test_right_asymptote_encodes_mean(self):
        eta = dm((-2.0, 0.25), (1.0, 0.75))
        p = put_potential(eta)
        k = 100.0
        assert p(k) == pytest.approx(eta.mass * k - eta.mean)


class TestQuantileLeft:
    def test_left_continuity_at_jump(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        assert quantile_left(eta, 0.5) == -1.0
        assert quantile_left(eta, 0.500001) == 1.0

    def test_point_mass_every_level(self):
        eta = dm((0.0, 1.0))
        for u in (0.001, 0.5, 0.999):
            assert quantile_left(eta, u) == 0.0

    def test_rejects_levels_outside_open_interval(self):
        eta = dm((0.0, 1.0))
        with pytest.raises(ValueError):
            quantile_left(eta, 0.0)
        with pytest.raises(ValueError):
            quantile_left(eta, 1.0)


class TestRestrictedMeasure:
    def test_half_keeps_left_atom(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        part = restricted_measure(eta, 0.5)
        assert part.tv_distance(dm((-1.0, 0.5))) == 0.0

    def test_partial_second_atom(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        part = restricted_measure(eta, 0.75)
        assert part.tv_distance(dm((-1.0, 0.5), (1.0, 0.25))) == 0.0

    def test_point_mass_scales(self):
        part = restricted_measure(dm((0.0, 1.0)), 0.3)
        assert part.tv_distance(dm((0.0, 0.3))) == 0.0

    def test_rejects_levels_outside_open_interval(self):
        with pytest.raises(ValueError):
            restricted_measure(dm((0.0, 1.0)), 1.0)
        with pytest.raises(ValueError):
            restricted_measure(dm((0.0, 1.0)), 0.0)

    def test_monotone_in_level_and_potential_shape(self):
        eta = dm((-2.0, 0.25), (0.0, 0.5), (1.0, 0.25))
        p_full = put_potential(eta)
        for u, v in [(0.2, 0.4), (0.4, 0.9), (0.1, 0.95)]:
            pu = restricted_measure(eta, u)
            pv = restricted_measure(eta, v)
            # atomwise domination
            for x, w in zip(pu.xs, pu.ws):
                assert w <= pv.atom_weight(x) + 1e-12
            # potential agrees left of the quantile, linear with slope u right
            g = quantile_left(eta, u)
            p_u = put_potential(pu)
            for k in np.linspace(eta.support_left - 1, g, 7):
                assert p_u(k) == pytest.approx(p_full(k), abs=1e-12)
            s_minus, s_plus = p_u.one_sided_slopes(g + 1.0)
            assert s_minus == pytest.approx(u) and s_plus == pytest.approx(u)


class TestConvexOrder:
    def test_jensen_spread(self):
        res = check_convex_order(dm((0.0, 1.0)), dm((-1.0, 0.5), (1.0, 0.5)))
        assert res.status is Order.ORDERED

    def test_equal_law(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        assert check_convex_order(eta, eta).status is Order.EQUAL_LAW

    def test_reversed_pair_fails_with_witness(self):
        res = check_convex_order(dm((-1.0, 0.5), (1.0, 0.5)), dm((0.0, 1.0)))
        assert res.status is Order.FAILS
        assert res.witness == 0.0
        assert res.gap == pytest.approx(0.5)

    def test_mass_mismatch_fails(self):
        res = check_convex_order(dm((0.0, 0.5)), dm((0.0, 1.0)))
        assert res.status is Order.FAILS


class TestQuantizeDensity:
    def test_uniform_two_cells(self):
        q = quantize_density([-1.0, 1.0], [0.5, 0.5], 2)
        assert q.tv_distance(dm((-0.5, 0.5), (0.5, 0.5))) <= 1e-12

    def test_uniform_four_cells(self):
        q = quantize_density([0.0, 1.0], [1.0, 1.0], 4)
        np.testing.assert_allclose(q.xs, [1 / 8, 3 / 8, 5 / 8, 7 / 8], atol=1e-12)
        np.testing.assert_allclose(q.ws, 0.25)

    def test_triangular_mean_preserved(self):
        # density 1 - |x| on [-1, 1]; mean of x * density computed directly:
        # integral x(1-|x|) dx = 0 by symmetry; shift to check a nonzero mean
        xs = np.array([0.0, 1.0, 2.0])
        pdf = np.array([0.0, 1.0, 0.0])
        exact_mean = 1.0  # triangle centred at 1
        q = quantize_density(xs, pdf, 100)
        assert q.mean == pytest.approx(exact_mean, abs=1e-12)
        assert q.mass == pytest.approx(1.0, abs=1e-12)

    def test_quantisation_is_dominated_by_input_in_order(self):
        # quantised uniform vs a finer quantised uniform: coarser has
        # smaller potential everywhere
        fine = quantize_density([-1.0, 1.0], [0.5, 0.5], 64)
        coarse = quantize_density([-1.0, 1.0], [0.5, 0.5], 8)
        assert check_convex_order(coarse, fine).status is Order.ORDERED

    def test_rejects_zero_mass(self):
        with pytest.raises(ValueError):
            quantize_density([0.0, 1.0], [0.0, 0.0], 4)


class TestRandomCxPair:
    def test_no_steps_returns_equal_laws(self):
        mu, nu = random_cx_pair(5, 4, 0)
        assert mu.tv_distance(nu) == 0.0

    def test_single_split_of_point_mass(self):
        # a one-atom source with one split is exactly a two-point target
        mu, nu = random_cx_pair(0, 1, 1)
        assert mu.n_atoms == 1 and nu.n_atoms == 2
        assert nu.mean == pytest.approx(mu.mean, abs=1e-14)

    @pytest.mark.parametrize("seed", range(25))
    def test_always_ordered(self, seed):
        rng = np.random.default_rng(seed)
        mu, nu = random_cx_pair(seed, int(rng.integers(1, 9)), int(rng.integers(0, 7)))
        res = check_convex_order(mu, nu)
        assert bool(res)
        assert mu.mass == 1.0  # dyadic weights sum exactly
        assert nu.mass == 1.0
        assert nu.mean == mu.mean


@st.composite
def prob_measures(draw):
    n = draw(st.integers(1, 8))
    xs = sorted(draw(st.lists(st.integers(-40, 40), min_size=n, max_size=n, unique=True)))
    ws = draw(st.lists(st.integers(1, 16), min_size=n, max_size=n))
    total = sum(ws)
    return DiscreteMeasure([x / 4.0 for x in xs], [w / total for w in ws])


@given(prob_measures(), st.floats(1e-6, 1 - 1e-6))
@settings(max_examples=200, deadline=None)
def test_quantile_cdf_galois(eta, u):
    g = quantile_left(eta, u)
    assert eta.cdf(g) >= u - 1e-12
    for x in eta.xs:
        f = float(eta.cdf(x))
        if 0.0 < f < 1.0:
            assert quantile_left(eta, f) <= x + 1e-12
