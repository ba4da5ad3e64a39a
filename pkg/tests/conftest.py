import numpy as np
import pytest

from leftcurtain import DiscreteMeasure, random_cx_pair


def dm(*pairs):
    """Shorthand measure constructor from (position, weight) pairs."""
    return DiscreteMeasure.from_atoms(pairs)


@pytest.fixture
def two_point():
    """delta_0 spread to half/half on {-1, 1}."""
    return dm((0.0, 1.0)), dm((-1.0, 0.5), (1.0, 0.5))


@pytest.fixture
def three_atom():
    """Two source atoms into three target atoms; table is hand-checkable."""
    mu = dm((-1.0, 0.5), (1.0, 0.5))
    nu = dm((-3.0, 1 / 3), (0.0, 1 / 3), (3.0, 1 / 3))
    return mu, nu


@pytest.fixture
def split_pair():
    """Pair with an interior zero of the potential gap at 0."""
    mu = dm((-1.0, 0.5), (1.0, 0.5))
    nu = dm((-2.0, 0.25), (0.0, 0.5), (2.0, 0.25))
    return mu, nu


def random_instance(seed, max_atoms=8, max_steps=6):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_atoms + 1))
    steps = int(rng.integers(0, max_steps + 1))
    return random_cx_pair(seed, m, steps)


def barrier_instance(seed, with_shared_atom=False):
    """Two independent pairs far apart, so the gap vanishes at 0.

    Both sides get at least one mean-preserving split, keeping genuine
    transport on each side of the barrier.  With ``with_shared_atom`` a
    scaled pattern carrying target mass exactly at the barrier is mixed
    in, exercising the boundary-atom allocation.
    """
    rng = np.random.default_rng(seed + 31337)
    mu_a, nu_a = random_cx_pair(
        seed * 2 + 1, int(rng.integers(1, 5)), int(rng.integers(1, 4))
    )
    mu_b, nu_b = random_cx_pair(
        seed * 2 + 2, int(rng.integers(1, 5)), int(rng.integers(1, 4))
    )
    shift = 40.0
    if not with_shared_atom:
        mu = DiscreteMeasure(
            np.concatenate([mu_a.xs - shift, mu_b.xs + shift]),
            np.concatenate([mu_a.ws * 0.5, mu_b.ws * 0.5]),
        )
        nu = DiscreteMeasure(
            np.concatenate([nu_a.xs - shift, nu_b.xs + shift]),
            np.concatenate([nu_a.ws * 0.5, nu_b.ws * 0.5]),
        )
        return mu, nu
    # pattern with target mass at the barrier point 0: each side needs a
    # quarter of the central atom
    s = 2.0
    mu_c = DiscreteMeasure([-s, s], [0.25, 0.25])
    nu_c = DiscreteMeasure([-2 * s, 0.0, 2 * s], [0.125, 0.25, 0.125])
    mu = DiscreteMeasure(
        np.concatenate([mu_a.xs - shift, mu_c.xs, mu_b.xs + shift]),
        np.concatenate([mu_a.ws * 0.25, mu_c.ws, mu_b.ws * 0.25]),
    )
    nu = DiscreteMeasure(
        np.concatenate([nu_a.xs - shift, nu_c.xs, nu_b.xs + shift]),
        np.concatenate([nu_a.ws * 0.25, nu_c.ws, nu_b.ws * 0.25]),
    )
    return mu, nu
