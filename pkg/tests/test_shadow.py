import numpy as np
import pytest

from leftcurtain import (
    put_potential,
    restricted_measure,
    shadow,
    shadow_lp,
)
from leftcurtain.shadow import ShadowInvalid
from conftest import dm, random_instance


class TestShadowExamples:
    def test_equal_measures_shadow_to_target(self):
        nu = dm((-1.0, 0.5), (1.0, 0.5))
        assert shadow(nu, nu).tv_distance(nu) == 0.0

    def test_half_point_mass_into_two_points(self):
        # unique feasible measure on {-1, 1} with mass 1/2 and mean 0
        s = shadow(dm((0.0, 0.5)), dm((-1.0, 0.5), (1.0, 0.5)))
        assert s.tv_distance(dm((-1.0, 0.25), (1.0, 0.25))) <= 1e-12

    def test_half_point_mass_into_three_points(self):
        # frozen from the LP oracle (vertex enumeration of the 3-variable
        # program gives 1/12, 1/3, 1/12)
        mu = dm((0.0, 0.5))
        nu = dm((-1.0, 1 / 3), (0.0, 1 / 3), (1.0, 1 / 3))
        expected = dm((-1.0, 1 / 12), (0.0, 1 / 3), (1.0, 1 / 12))
        assert shadow(mu, nu).tv_distance(expected) <= 1e-12
        assert shadow_lp(mu, nu).tv_distance(expected) <= 1e-9

    def test_mass_excess_rejected(self):
        with pytest.raises(ShadowInvalid):
            shadow(dm((0.0, 1.0)), dm((0.0, 0.5)))

    def test_invalid_embedding_rejected(self):
        # mass fits but the source is too spread out for the target
        with pytest.raises(ShadowInvalid):
            shadow(dm((-5.0, 0.25), (5.0, 0.25)), dm((-1.0, 0.5), (1.0, 0.5)))


class TestShadowProperties:
    @pytest.mark.parametrize("seed", range(30))
    def test_matches_lp_oracle_at_target_atoms(self, seed):
        mu, nu = random_instance(seed)
        rng = np.random.default_rng(seed)
        for u in rng.uniform(0.05, 0.999, size=3):
            part = restricted_measure(mu, float(u))
            s_geo = shadow(part, nu)
            s_lp = shadow_lp(part, nu)
            p_geo = put_potential(s_geo)
            p_lp = put_potential(s_lp)
            assert np.abs(p_geo(nu.xs) - p_lp(nu.xs)).max() <= 1e-9

    @pytest.mark.parametrize("seed", range(20))
    def test_shadow_monotone_in_level(self, seed):
        mu, nu = random_instance(seed)
        levels = np.linspace(0.08, 0.98, 7)
        prev = None
        for u in levels:
            s = shadow(restricted_measure(mu, float(u)), nu)
            if prev is not None:
                # atomwise domination of the earlier shadow
                for x, w in zip(prev.xs, prev.ws):
                    assert w <= s.atom_weight(x) + 1e-9
            prev = s

    @pytest.mark.parametrize("seed", range(20))
    def test_mass_mean_conservation(self, seed):
        mu, nu = random_instance(seed)
        for u in (0.25, 0.7):
            part = restricted_measure(mu, u)
            s = shadow(part, nu)
            assert s.mass == pytest.approx(part.mass, abs=1e-12)
            assert s.mean == pytest.approx(part.mean, abs=1e-10)
