"""Finite measures with atoms: potentials, quantiles, restriction, ordering.

Measures are unnormalised throughout (restrictions and shadows have mass
below one), with weights strictly positive and positions strictly
increasing.  The first moment is kept unnormalised as well, i.e. ``mean``
is ``sum(x * w)`` and ``mean / mass`` is the barycentre.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .pwl import PiecewiseLinear

#: absolute tolerance on probability mass / mean equality
MASS_TOL = 1e-12

#: positions closer than this are merged into one atom on construction
POS_TOL = 1e-12


class DiscreteMeasure:
    """Finite atomic measure: sorted positions ``xs`` and weights ``ws > 0``."""

    __slots__ = ("xs", "ws", "__dict__")

    def __init__(self, xs, ws, *, pos_tol: float = POS_TOL):
        xs = np.asarray(xs, dtype=float).ravel()
        ws = np.asarray(ws, dtype=float).ravel()
        if xs.shape != ws.shape:
            raise ValueError("positions and weights must have equal length")
        if np.any(ws < -1e-15):
            raise ValueError("atom weights must be non-negative")
        if xs.size:
            order = np.argsort(xs, kind="stable")
            xs, ws = xs[order], ws[order]
            xs, ws = _merge_atoms(xs, ws, pos_tol)
            keep = ws > 0
            xs, ws = xs[keep], ws[keep]
        xs.flags.writeable = False
        ws.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ws", ws)

    @staticmethod
    def from_atoms(pairs) -> "DiscreteMeasure":
        pairs = list(pairs)
        if not pairs:
            return DiscreteMeasure([], [])
        xs, ws = zip(*pairs)
        return DiscreteMeasure(xs, ws)

    @property
    def n_atoms(self) -> int:
        return int(self.xs.size)

    @cached_property
    def mass(self) -> float:
        return float(self.ws.sum())

    @cached_property
    def mean(self) -> float:
        """Unnormalised first moment ``sum(x * w)``."""
        return float((self.xs * self.ws).sum())

    @cached_property
    def cum_weights(self) -> np.ndarray:
        return np.cumsum(self.ws)

    @property
    def support_left(self) -> float:
        return float(self.xs[0])

    @property
    def support_right(self) -> float:
        return float(self.xs[-1])

    def cdf(self, k) -> np.ndarray | float:
        """Right-continuous distribution function ``F(k)``."""
        k = np.asarray(k, dtype=float)
        idx = np.searchsorted(self.xs, k, side="right")
        cw = np.concatenate(([0.0], self.cum_weights))
        out = cw[idx]
        return float(out) if out.ndim == 0 else out

    def atom_weight(self, x: float, pos_tol: float = 1e-11) -> float:
        i = int(np.searchsorted(self.xs, x))
        for j in (i - 1, i):
            if 0 <= j < self.xs.size and abs(self.xs[j] - x) <= pos_tol:
                return float(self.ws[j])
        return 0.0

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.xs, self.ws * factor)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(
            np.concatenate([self.xs, other.xs]), np.concatenate([self.ws, other.ws])
        )

    def tv_distance(self, other: "DiscreteMeasure", pos_tol: float = 1e-11) -> float:
        """Total-variation distance (half the L1 weight difference).

        Atoms of the two measures within ``pos_tol`` of each other are
        identified, absorbing float noise in positions produced by hull
        arithmetic.
        """
        xs = np.concatenate([self.xs, other.xs])
        ws = np.concatenate([self.ws, -other.ws])
        order = np.argsort(xs, kind="stable")
        xs, ws = xs[order], ws[order]
        if xs.size == 0:
            return 0.0
        mx, mw = _merge_atoms(xs, ws, pos_tol, signed=True)
        return 0.5 * float(np.abs(mw).sum())

    def allclose(self, other: "DiscreteMeasure", tol: float = 1e-9) -> bool:
        return self.tv_distance(other) <= tol

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    def __repr__(self):
        if self.n_atoms == 0:
            return "DiscreteMeasure(empty)"
        return (
            f"DiscreteMeasure({self.n_atoms} atoms, mass={self.mass:.6g}, "
            f"mean={self.mean:.6g})"
        )


def _merge_atoms(xs, ws, pos_tol, signed=False):
    """Merge consecutive atoms whose positions differ by at most ``pos_tol``."""
    out_x = [xs[0]]
    out_w = [ws[0]]
    for x, w in zip(xs[1:], ws[1:]):
        if x - out_x[-1] <= pos_tol:
            out_w[-1] += w
        else:
            out_x.append(x)
            out_w.append(w)
    xs = np.array(out_x)
    ws = np.array(out_w)
    if signed:
        return xs, ws
    return xs, ws


class QuantileFunction:
    """Left-continuous quantile function of a probability measure.

    ``G(u) = inf{x : F(x) >= u}`` evaluated with the left-continuous
    convention: on ``(F(x_{i-1}), F(x_i)]`` the value is ``x_i``.
    """

    def __init__(self, measure: DiscreteMeasure):
        if abs(measure.mass - 1.0) > MASS_TOL:
            raise ValueError(f"quantile function requires a probability measure, mass={measure.mass}")
        self.measure = measure

    def __call__(self, u):
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr <= 0.0) | (u_arr >= 1.0)):
            raise ValueError("quantile level must lie in (0, 1)")
        idx = np.searchsorted(self.measure.cum_weights, u_arr, side="left")
        idx = np.minimum(idx, self.measure.n_atoms - 1)
        out = self.measure.xs[idx]
        return float(out) if out.ndim == 0 else out


def put_potential(eta: DiscreteMeasure) -> PiecewiseLinear:
    """Put-option potential ``P(k) = integral of (k - x)^+ d eta``.

    Piecewise linear with a kink of size ``w_i`` at each atom, identically
    zero left of the support, and asymptote ``mass * k - mean`` on the
    right.
    """
    if eta.n_atoms == 0:
        raise ValueError("put_potential requires a non-empty measure")
    cw = np.concatenate(([0.0], eta.cum_weights[:-1]))
    cm = np.concatenate(([0.0], np.cumsum(eta.xs * eta.ws)[:-1]))
    ys = cw * eta.xs - cm
    return PiecewiseLinear(eta.xs, ys, 0.0, eta.mass)


def quantile_left(eta: DiscreteMeasure, u: float) -> float:
    """Left-continuous quantile of a probability measure at ``u`` in (0,1)."""
    return QuantileFunction(eta)(u)


def restricted_measure(mu: DiscreteMeasure, u: float) -> DiscreteMeasure:
    """Leftmost part of ``mu`` with mass exactly ``u``.

    Keeps every atom strictly below the quantile ``G(u)`` and a partial
    atom of weight ``u - F(G(u)-)`` at ``G(u)``.
    """
    if not (0.0 < u < 1.0):
        raise ValueError("restriction level must lie in (0, 1)")
    g = quantile_left(mu, u)
    i = int(np.searchsorted(mu.cum_weights, u, side="left"))
    below = u - (mu.cum_weights[i - 1] if i > 0 else 0.0)
    xs = np.concatenate([mu.xs[:i], [g]])
    ws = np.concatenate([mu.ws[:i], [below]])
    return DiscreteMeasure(xs, ws)


class Order(enum.Enum):
    ORDERED = "ordered"
    EQUAL_LAW = "equal-law"
    FAILS = "fails"


@dataclass(frozen=True)
class OrderResult:
    status: Order
    witness: float | None = None
    gap: float = 0.0

    def __bool__(self) -> bool:
        return self.status is not Order.FAILS


def check_convex_order(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = MASS_TOL) -> OrderResult:
    """Convex-order test via potential domination.

    Equal mass and mean plus ``P_mu <= P_nu`` at every breakpoint of both
    potentials is sufficient for piecewise-linear potentials, because the
    difference is then non-negative at all of its kinks and vanishes at
    both tails.  The witness is the breakpoint with the most negative gap.
    """
    if abs(mu.mass - nu.mass) > tol:
        return OrderResult(Order.FAILS, witness=None, gap=abs(mu.mass - nu.mass))
    if abs(mu.mean - nu.mean) > max(tol, tol * max(1.0, abs(mu.mean))):
        return OrderResult(Order.FAILS, witness=None, gap=abs(mu.mean - nu.mean))
    p_mu = put_potential(mu)
    p_nu = put_potential(nu)
    grid = np.union1d(p_mu.xs, p_nu.xs)
    gap = p_nu(grid) - p_mu(grid)
    worst = int(np.argmin(gap))
    if gap[worst] < -tol:
        return OrderResult(Order.FAILS, witness=float(grid[worst]), gap=float(-gap[worst]))
    if mu.tv_distance(nu) <= tol:
        return OrderResult(Order.EQUAL_LAW)
    return OrderResult(Order.ORDERED)


def quantize_density(xs, pdf, n: int) -> DiscreteMeasure:
    """Mean-preserving n-point quantisation of a piecewise-linear density.

    The density given by linear interpolation of ``(xs, pdf)`` is split
    into ``n`` cells of equal mass; each cell collapses to one atom at its
    conditional mean, so every convex function decreases in expectation and
    the quantised measure is dominated by the input in convex order.
    """
    xs = np.asarray(xs, dtype=float)
    pdf = np.asarray(pdf, dtype=float)
    if xs.ndim != 1 or xs.shape != pdf.shape or xs.size < 2:
        raise ValueError("need at least two grid points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("grid must be strictly increasing")
    if np.any(pdf < 0):
        raise ValueError("density must be non-negative")
    if n < 1:
        raise ValueError("need at least one cell")
    seg_mass = 0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs)
    total = float(seg_mass.sum())
    if total <= 0:
        raise ValueError("density integrates to zero")
    cum = np.concatenate(([0.0], np.cumsum(seg_mass)))

    def _mass_upto(t: float) -> float:
        """integral of the density on (-inf, t]"""
        j = int(np.clip(np.searchsorted(xs, t, side="right") - 1, 0, xs.size - 2))
        a, b = xs[j], xs[j + 1]
        p, q = pdf[j], pdf[j + 1]
        s = min(max(t - a, 0.0), b - a)
        return float(cum[j] + p * s + 0.5 * (q - p) * s * s / (b - a))

    def _xmom_upto(t: float) -> float:
        """integral of x * density on (-inf, t]"""
        out = 0.0
        for j in range(xs.size - 1):
            a, b = xs[j], xs[j + 1]
            if t <= a:
                break
            p, q = pdf[j], pdf[j + 1]
            h = b - a
            s = min(t - a, h)
            m = p * s + 0.5 * (q - p) * s * s / h
            out += a * m + 0.5 * p * s * s + (q - p) * s**3 / (3.0 * h)
        return out

    def _invert(target: float) -> float:
        """solve mass_upto(t) = target"""
        j = int(np.clip(np.searchsorted(cum, target, side="right") - 1, 0, xs.size - 2))
        a, b = xs[j], xs[j + 1]
        p, q = pdf[j], pdf[j + 1]
        h = b - a
        m = target - cum[j]
        slope = (q - p) / h
        if abs(slope) < 1e-300 or abs(slope) * h < 1e-12 * max(p, 1e-300):
            s = m / p if p > 0 else h
        else:
            disc = p * p + 2.0 * slope * m
            s = (math.sqrt(max(disc, 0.0)) - p) / slope
        return float(a + min(max(s, 0.0), h))

    bounds = [xs[0]] + [_invert(total * j / n) for j in range(1, n)] + [xs[-1]]
    cell = total / n
    atoms_x = np.empty(n)
    for j in range(n):
        xm = _xmom_upto(bounds[j + 1]) - _xmom_upto(bounds[j])
        atoms_x[j] = xm / cell
    return DiscreteMeasure(atoms_x, np.full(n, 1.0 / n))


#: mean-preserving split patterns ``(parts_left, parts_right)`` with
#: ``parts_left + parts_right`` a power of two, so dyadic weights stay dyadic
_SPLIT_PATTERNS = ((1, 1), (1, 3), (3, 1), (1, 7), (3, 5), (5, 3), (7, 1))

_SPLIT_STEPS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)


def random_cx_pair(seed: int, m_atoms: int, spread_steps: int):
    """Random convex-ordered pair ``(mu, nu)`` with exact dyadic data.

    ``mu`` gets ``m_atoms`` atoms with dyadic weights summing to one on a
    quarter-integer grid; ``nu`` starts equal to ``mu`` and each spread
    step replaces one atom by a two-point measure with the same mean
    (weights and offsets chosen so every quantity stays exactly
    representable).  The pair is convex-ordered by construction.
    """
    if m_atoms < 1:
        raise ValueError("need at least one atom")
    if spread_steps < 0:
        raise ValueError("spread_steps must be non-negative")
    rng = np.random.default_rng(seed)
    denom = 64
    counts = rng.multinomial(denom - m_atoms, np.full(m_atoms, 1.0 / m_atoms)) + 1
    positions = rng.choice(np.arange(-24, 25), size=m_atoms, replace=False)
    positions = np.sort(positions) / 4.0
    mu = DiscreteMeasure(positions, counts / denom)

    atoms = {float(x): float(w) for x, w in zip(mu.xs, mu.ws)}
    for _ in range(spread_steps):
        xs = sorted(atoms)
        x = xs[int(rng.integers(len(xs)))]
        w = atoms.pop(x)
        pl, pr = _SPLIT_PATTERNS[int(rng.integers(len(_SPLIT_PATTERNS)))]
        step = _SPLIT_STEPS[int(rng.integers(len(_SPLIT_STEPS)))]
        total = pl + pr
        c = x - step * pr
        d = x + step * pl
        atoms[c] = atoms.get(c, 0.0) + w * pl / total
        atoms[d] = atoms.get(d, 0.0) + w * pr / total
    nu = DiscreteMeasure.from_atoms(sorted(atoms.items()))
    return mu, nu


# -- JSON measure schema (shared with the command-line interface) ---------


def measure_to_json(eta: DiscreteMeasure) -> dict:
    return {"type": "atoms", "atoms": [[float(x), float(w)] for x, w in zip(eta.xs, eta.ws)]}


def measure_from_json(obj: dict) -> DiscreteMeasure:
    kind = obj.get("type")
    if kind == "atoms":
        return DiscreteMeasure.from_atoms((float(x), float(w)) for x, w in obj["atoms"])
    if kind == "grid-density":
        return quantize_density(obj["xs"], obj["pdf"], int(obj["n"]))
    raise ValueError(f"unknown measure type: {kind!r}")
