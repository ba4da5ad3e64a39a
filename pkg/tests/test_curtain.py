import numpy as np
import pytest

from leftcurtain import (
    build_curtain,
    check_convex_order,
    coupling,
    excess_potential,
    point_construction,
    put_potential,
    quantize_density,
    sample_y,
    sample_y_many,
    td_tu,
)
from leftcurtain.decompose import decompose
from conftest import dm, random_instance


def single_component_instances(count, start=0):
    found = []
    seed = start
    while len(found) < count:
        mu, nu = random_instance(seed)
        dec = decompose(mu, nu)
        if len(dec.components) == 1 and dec.static.n_atoms == 0:
            found.append((seed, mu, nu))
        seed += 1
    return found


class TestExcessPotential:
    def test_two_point_value(self, two_point):
        mu, nu = two_point
        ep = excess_potential(mu, nu, 0.5)
        # excess at 1: target potential 1 minus restricted potential 0.5
        assert ep.excess(1.0) == pytest.approx(0.5)

    def test_matches_gap_left_of_quantile(self, three_atom):
        mu, nu = three_atom
        ep = excess_potential(mu, nu, 0.3)
        for k in np.linspace(-4, -1, 9):
            assert ep.excess(k) == pytest.approx(ep.gap(k), abs=1e-14)
        # above the quantile the excess dominates the gap and is convex
        grid = np.linspace(-1, 4, 11)
        assert np.all(ep.excess(grid) >= ep.gap(grid) - 1e-14)

    def test_near_full_level_approaches_gap(self, three_atom):
        mu, nu = three_atom
        ep = excess_potential(mu, nu, 1 - 1e-9)
        grid = np.linspace(-4, 4, 17)
        assert np.abs(ep.excess(grid) - ep.gap(grid)).max() <= 1e-8

    def test_slope_difference_between_levels(self, three_atom):
        """Right of the larger quantile, the excess at a smaller level
        exceeds the one at a larger level by exactly the level difference
        per unit distance."""
        mu, nu = three_atom
        u, v = 0.3, 0.8
        e_u = excess_potential(mu, nu, u).excess
        e_v = excess_potential(mu, nu, v).excess
        for k in (2.0, 3.5, 7.0):
            su = e_u.one_sided_slopes(k)[1]
            sv = e_v.one_sided_slopes(k)[1]
            assert su - sv == pytest.approx(v - u, abs=1e-12)


class TestPointConstruction:
    def test_two_point_all_levels(self, two_point):
        mu, nu = two_point
        for u in (0.1, 0.5, 0.9):
            pc = point_construction(mu, nu, u)
            assert (pc.r, pc.q, pc.g, pc.s) == (-1.0, -1.0, 0.0, 1.0)
            # envelope chord from (-1, 0) to (1, 1 - u)
            assert pc.phi == pytest.approx((1.0 - u) / 2.0)

    def test_three_atom_derived_values(self, three_atom):
        # frozen from the incremental-shadow oracle; also hand-checkable
        mu, nu = three_atom
        lo = point_construction(mu, nu, 0.25)
        assert (lo.r, lo.g, lo.s) == (-3.0, -1.0, 0.0)
        hi = point_construction(mu, nu, 0.75)
        assert (hi.r, hi.g, hi.s) == (-3.0, 1.0, 3.0)

    def test_equal_laws_are_degenerate(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        for u in (0.2, 0.5, 0.8):
            pc = point_construction(eta, eta, u)
            g = -1.0 if u <= 0.5 else 1.0
            assert (pc.r, pc.q, pc.g, pc.s) == (g, g, g, g)
            assert pc.phi == 0.0

    def test_ordering_invariant(self):
        for seed, mu, nu in single_component_instances(10):
            rng = np.random.default_rng(seed)
            for u in rng.uniform(0.01, 0.99, size=20):
                pc = point_construction(mu, nu, float(u))
                assert pc.r <= pc.q + 1e-12 <= pc.g + 2e-12 <= pc.s + 3e-12
                # degenerate on one side iff degenerate on the other
                assert (abs(pc.q - pc.g) < 1e-12) == (abs(pc.s - pc.g) < 1e-12)


class TestBuildCurtain:
    def test_two_point_single_interval(self, two_point):
        mu, nu = two_point
        table = build_curtain(mu, nu)
        assert len(table.intervals) == 1
        iv = table.intervals[0]
        assert (iv.u_lo, iv.u_hi) == (0.0, 1.0)
        assert (iv.r, iv.s) == (-1.0, 1.0)

    def test_three_atom_table(self, three_atom):
        # frozen from the incremental-shadow oracle
        mu, nu = three_atom
        table = build_curtain(mu, nu)
        assert len(table.intervals) == 2
        first, second = table.intervals
        assert first.u_hi == pytest.approx(0.5)
        assert (first.r, first.g, first.s) == (-3.0, -1.0, 0.0)
        assert (second.r, second.g, second.s) == (-3.0, 1.0, 3.0)
        # envelope slope: (1 - u) / 3 on both intervals
        assert first.phi_lo == pytest.approx(1 / 3)
        assert table.phi(0.5) == pytest.approx(1 / 6)
        assert table.phi(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_decomposed_table(self, split_pair):
        mu, nu = split_pair
        table = build_curtain(mu, nu)
        assert len(table.intervals) == 2
        first, second = table.intervals
        assert (first.r, first.g, first.s) == (-2.0, -1.0, 0.0)
        assert first.u_hi == pytest.approx(0.5)
        assert (second.r, second.g, second.s) == (0.0, 1.0, 2.0)

    def test_table_reproduces_point_construction(self):
        for seed, mu, nu in single_component_instances(8):
            table = build_curtain(mu, nu)
            rng = np.random.default_rng(seed + 1)
            for u in rng.uniform(1e-4, 1 - 1e-4, size=50):
                pc = point_construction(mu, nu, float(u))
                iv = table.locate(float(u))
                assert pc.g == pytest.approx(iv.g, abs=1e-10)
                assert pc.q == pytest.approx(iv.q, abs=1e-10)
                assert pc.s == pytest.approx(iv.s, abs=1e-10)
                assert pc.phi == pytest.approx(iv.phi_at(float(u)), abs=1e-10)
                if not iv.trivial:
                    assert pc.r == pytest.approx(iv.r, abs=1e-10)

    def test_breakpoints_cover_unit_interval(self):
        for seed in range(12):
            mu, nu = random_instance(seed)
            table = build_curtain(mu, nu)
            assert table.intervals[0].u_lo == 0.0
            assert table.intervals[-1].u_hi == 1.0
            for a, b in zip(table.intervals[:-1], table.intervals[1:]):
                assert a.u_hi == b.u_lo
                assert a.length > 0

    def test_contact_points_match_construction(self, three_atom):
        """Envelope contacts around the quantile are exactly (Q, S)."""
        from leftcurtain import contact_points

        mu, nu = three_atom
        for u in (0.25, 0.6, 0.9):
            ep = excess_potential(mu, nu, u)
            pc = point_construction(mu, nu, u)
            x, z = contact_points(ep.excess, ep.hull, pc.g)
            assert (x, z) == (pc.q, pc.s)

    def test_interval_cap_raises(self, three_atom):
        from leftcurtain import BreakpointOverflow

        mu, nu = three_atom
        with pytest.raises(BreakpointOverflow):
            build_curtain(mu, nu, max_intervals=1)


class TestCoupling:
    def test_two_point_joint(self, two_point):
        mu, nu = two_point
        pi = coupling(build_curtain(mu, nu), mu)
        expected = {(0.0, -1.0): 0.5, (0.0, 1.0): 0.5}
        got = dict(zip(zip(pi.joint_x, pi.joint_y), pi.joint_w))
        assert got == pytest.approx(expected)

    def test_three_atom_joint(self, three_atom):
        # frozen from the incremental-shadow oracle; martingale means
        # (1/3)(-3) + (2/3) 3 = 1 and (1/3)(-3) + (2/3) 0 = -1
        mu, nu = three_atom
        pi = coupling(build_curtain(mu, nu), mu)
        got = dict(zip(zip(pi.joint_x, pi.joint_y), pi.joint_w))
        expected = {
            (-1.0, -3.0): 1 / 6,
            (-1.0, 0.0): 1 / 3,
            (1.0, -3.0): 1 / 6,
            (1.0, 3.0): 1 / 3,
        }
        assert got == pytest.approx(expected)

    def test_identity_coupling(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        pi = coupling(build_curtain(eta, eta), eta)
        assert np.all(pi.joint_x == pi.joint_y)
        assert pi.second_marginal().tv_distance(eta) == 0.0

    @pytest.mark.parametrize("seed", range(15))
    def test_marginals_and_martingale(self, seed):
        mu, nu = random_instance(seed)
        pi = coupling(build_curtain(mu, nu), mu)
        assert pi.first_marginal().tv_distance(mu) <= 1e-12
        assert pi.second_marginal().tv_distance(nu) <= 1e-10
        for x in np.unique(pi.joint_x):
            mask = pi.joint_x == x
            resid = ((pi.joint_y[mask] - x) * pi.joint_w[mask]).sum()
            assert abs(resid) <= 1e-12


class TestSampleY:
    def test_trivial_interval_returns_quantile(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        table = build_curtain(eta, eta)
        assert sample_y(table, 0.3, 0.99) == -1.0

    def test_two_point_threshold(self, two_point):
        mu, nu = two_point
        table = build_curtain(mu, nu)
        # threshold (S - G)/(S - R) = 1/2
        assert sample_y(table, 0.42, 0.25) == -1.0
        assert sample_y(table, 0.42, 0.5) == -1.0
        assert sample_y(table, 0.42, 0.500001) == 1.0

    def test_three_atom_upper_branch(self, three_atom):
        mu, nu = three_atom
        table = build_curtain(mu, nu)
        # threshold on (1/2, 1] is (3 - 1)/(3 + 3) = 1/3
        assert sample_y(table, 0.75, 0.5) == 3.0
        assert sample_y(table, 0.75, 1 / 3) == -3.0

    def test_vectorised_matches_scalar(self, three_atom):
        mu, nu = three_atom
        table = build_curtain(mu, nu)
        rng = np.random.default_rng(0)
        us = rng.uniform(1e-6, 1 - 1e-6, 200)
        vs = rng.uniform(1e-6, 1 - 1e-6, 200)
        ys = sample_y_many(table, us, vs)
        for u, v, y in zip(us, vs, ys):
            assert sample_y(table, float(u), float(v)) == y


class TestTdTu:
    def test_identity_on_equal_laws(self):
        eta = dm((-1.0, 0.5), (1.0, 0.5))
        td, tu = td_tu(build_curtain(eta, eta))
        assert td(-1.0) == -1.0 and tu(-1.0) == -1.0
        assert td(1.0) == 1.0 and tu(1.0) == 1.0
        assert not td.multi_valued.any()

    def test_three_atom_destinations(self, three_atom):
        mu, nu = three_atom
        td, tu = td_tu(build_curtain(mu, nu))
        assert td(1.0) == -3.0 and tu(1.0) == 3.0

    def test_dispersion_monotonicity(self):
        """Uniform into wider uniform: lower map decreasing, upper map
        increasing across the support."""
        mu = quantize_density([-1.0, 1.0], [0.5, 0.5], 64)
        nu = quantize_density([-2.0, 2.0], [0.25, 0.25], 64)
        assert check_convex_order(mu, nu)
        table = build_curtain(mu, nu)
        td, tu = td_tu(table)
        tu_vals = [v[-1] for v in tu.values]
        td_vals = [v[-1] for v in td.values]
        assert all(b >= a - 1e-12 for a, b in zip(tu_vals, tu_vals[1:]))
        assert all(b <= a + 1e-12 for a, b in zip(td_vals, td_vals[1:]))


class TestPhiLaws:
    @pytest.mark.parametrize("seed", range(10))
    def test_lipschitz_lower_bound(self, seed):
        """phi(v) >= phi(u) - (v - u) across the table."""
        mu, nu = random_instance(seed)
        table = build_curtain(mu, nu)
        pts = []
        for iv in table.intervals:
            mid = 0.5 * (iv.u_lo + iv.u_hi)
            pts.extend([(mid, iv.phi_at(mid)), (iv.u_hi, iv.phi_at(iv.u_hi))])
        pts.sort()
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                (u, pu), (v, pv) = pts[i], pts[j]
                assert pv >= pu - (v - u) - 1e-10

    @pytest.mark.parametrize("seed", range(10))
    def test_nonincreasing_on_split_runs(self, seed):
        mu, nu = random_instance(seed)
        table = build_curtain(mu, nu)
        for run in table.nontrivial_runs():
            last = None
            for idx in run:
                iv = table.intervals[idx]
                if last is not None:
                    assert iv.phi_lo <= last + 1e-10
                assert iv.dphi <= 1e-12  # nonincreasing inside intervals
                last = iv.phi_at(iv.u_hi)

    @pytest.mark.parametrize("seed", range(10))
    def test_phi_bounds_and_terminal_value(self, seed):
        """phi stays within [0, 1 - u] and vanishes at the top level."""
        mu, nu = random_instance(seed)
        table = build_curtain(mu, nu)
        for iv in table.intervals:
            for u in (iv.u_lo + iv.length / 2, iv.u_hi):
                val = iv.phi_at(u)
                assert -1e-10 <= val <= 1.0 - u + 1e-10
        assert table.phi(1.0) <= 1e-9

    @pytest.mark.parametrize("start", [0, 11, 29, 47])
    def test_slope_identity_by_finite_differences(self, start):
        """d phi / du matches -(S - G)/(S - R) on splitting intervals."""
        ((_, mu, nu),) = single_component_instances(1, start=start)
        table = build_curtain(mu, nu)
        for run in table.nontrivial_runs():
            for idx in run:
                iv = table.intervals[idx]
                h = iv.length / 8
                if h < 1e-9:
                    continue
                u0 = 0.5 * (iv.u_lo + iv.u_hi)
                fd = (
                    point_construction(mu, nu, u0 + h).phi
                    - point_construction(mu, nu, u0 - h).phi
                ) / (2 * h)
                expect = -(iv.s - iv.g) / (iv.s - iv.r)
                assert fd == pytest.approx(expect, abs=1e-6)

    @pytest.mark.parametrize("seed", range(8))
    def test_slope_extremal_representations(self, seed):
        """phi is the best chord slope from the left and bounds the chords
        to the right: the two closed-form envelope representations."""
        for seed2, mu, nu in single_component_instances(1, start=seed * 37):
            table = build_curtain(mu, nu)
            d = put_potential(nu) - put_potential(mu)
            rng = np.random.default_rng(seed2)
            for u in rng.uniform(0.05, 0.95, size=8):
                pc = point_construction(mu, nu, float(u))
                ep = excess_potential(mu, nu, float(u))
                ks = d.xs[d.xs < pc.g - 1e-9]
                if ks.size and pc.s > pc.g + 1e-9:
                    sup = ((ep.excess(pc.s) - d(ks)) / (pc.s - ks)).max()
                    assert pc.phi == pytest.approx(sup, abs=1e-10)
                ks_hi = np.union1d(nu.xs, mu.xs)
                ks_hi = ks_hi[ks_hi > pc.g + 1e-9]
                if ks_hi.size:
                    inf = ((ep.excess(ks_hi) - d(pc.r)) / (ks_hi - pc.r)).min()
                    assert pc.phi <= inf + 1e-10
