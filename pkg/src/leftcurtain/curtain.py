"""Geometric construction of the lifted left-curtain martingale coupling.

For a convex-ordered pair ``(mu, nu)`` and quantile level ``u``, the
restricted source ``mu_u`` (leftmost mass ``u``) defines an excess
potential ``E_u = P_nu - P_{mu_u}``.  The contact points of ``E_u`` with
its lower convex envelope on either side of the quantile ``G(u)`` yield
the lower and upper destination functions: mass entering at level ``u`` is
sent to the two contacts ``R(u) <= G(u) <= S(u)`` with the unique weights
that preserve the conditional mean.  ``phi(u)`` is the slope of the
envelope's linear piece through ``G(u)``.

Because all inputs are atomic, ``E_u`` is affine in ``u`` on ``[G(u),
oo)`` while ``u`` stays inside one source atom's quantile interval, so the
contact configuration is piecewise constant in ``u`` and its breakpoints
solve linear equations.  The table builder probes a generic level, reads
off the contact pair, and intersects the affine validity constraints
exactly; no root finding or discretisation in ``u`` is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .decompose import decompose
from .measures import (
    DiscreteMeasure,
    check_convex_order,
    put_potential,
    quantile_left,
)
from .pwl import PiecewiseLinear, contact_points, convex_hull

#: positions closer than this are considered the same point of the line
POS_EPS = 1e-11

#: kernels with spread below this emit a point mass at the current quantile
DEGENERATE_KERNEL_EPS = 1e-13

#: default cap on the number of table intervals
MAX_INTERVALS = 10**6

_PROBE_FRACTIONS = (0.6180339887498949, 0.5, 0.38196601125010515, 0.27, 0.73, 0.911, 0.089)


class InternalGeometry(RuntimeError):
    """The ray/envelope search failed; indicates a geometry bug, not bad input."""


class BreakpointOverflow(RuntimeError):
    """Table refinement exceeded the configured interval bound."""


@dataclass(frozen=True)
class ExcessPotential:
    """Excess of the target potential over the restricted-source potential."""

    u: float
    excess: PiecewiseLinear
    hull: PiecewiseLinear
    gap: PiecewiseLinear  # P_nu - P_mu, independent of u


@dataclass(frozen=True)
class PointConstruction:
    """Destination data at one quantile level: ``r <= q <= g <= s``."""

    r: float
    q: float
    g: float
    s: float
    phi: float

    @property
    def trivial(self) -> bool:
        return self.s - self.r <= DEGENERATE_KERNEL_EPS

    def astuple(self):
        return (self.r, self.q, self.g, self.s, self.phi)


class _Pair:
    """Cached potentials of one (probability) marginal pair."""

    def __init__(self, mu: DiscreteMeasure, nu: DiscreteMeasure):
        self.mu = mu
        self.nu = nu
        self.p_mu = put_potential(mu)
        self.p_nu = put_potential(nu)
        self.gap = self.p_nu - self.p_mu

    def restricted_potential(self, u: float) -> PiecewiseLinear:
        """Potential of the leftmost mass-``u`` part of the source."""
        mu = self.mu
        i = int(np.searchsorted(mu.cum_weights, u, side="left"))
        xs = mu.xs[: i + 1]  # atoms up to and including G(u)
        ws = mu.ws[: i + 1].copy()
        ws[-1] = u - (mu.cum_weights[i - 1] if i > 0 else 0.0)
        restricted = DiscreteMeasure(xs, ws)
        return put_potential(restricted)

    def excess(self, u: float) -> ExcessPotential:
        e = self.p_nu - self.restricted_potential(u)
        return ExcessPotential(u, e, convex_hull(e), self.gap)

    def construct(self, u: float) -> PointConstruction:
        g = quantile_left(self.mu, u)
        ep = self.excess(u)
        q, s = contact_points(ep.excess, ep.hull, g)
        if not (math.isfinite(q) and math.isfinite(s)):
            raise InternalGeometry(f"unbounded contact pair ({q}, {s}) at u={u}")
        phi = ep.hull.one_sided_slopes(s)[0]
        r = _ray_meets_gap(ep.gap, g, ep.hull(g), phi)
        return PointConstruction(r, q, g, s, phi)


def excess_potential(mu: DiscreteMeasure, nu: DiscreteMeasure, u: float) -> ExcessPotential:
    """``E_u = P_nu - P_{mu_u}`` together with its lower convex envelope."""
    order = check_convex_order(mu, nu)
    if not order:
        raise ValueError(f"inputs not in convex order (witness {order.witness})")
    return _Pair(mu, nu).excess(u)


def point_construction(mu: DiscreteMeasure, nu: DiscreteMeasure, u: float) -> PointConstruction:
    """Compute ``(R, Q, G, S, phi)`` at a single quantile level.

    ``Q`` and ``S`` are the contact points of the excess potential with its
    envelope on either side of ``G(u)``; ``phi`` is the envelope's left
    slope at ``S``; ``R`` is the leftmost point at or below ``G(u)`` where
    the potential gap meets the supporting line through
    ``(G(u), envelope(G(u)))`` with slope ``phi``.  The pair should already
    be reduced to one irreducible component (the gap positive between the
    support ends); use :func:`build_curtain` for general inputs.
    """
    order = check_convex_order(mu, nu)
    if not order:
        raise ValueError(f"inputs not in convex order (witness {order.witness})")
    return _Pair(mu, nu).construct(u)


def _ray_meets_gap(
    d: PiecewiseLinear, g: float, anchor_y: float, phi: float, eps: float = 1e-10
) -> float:
    """Leftmost point ``k <= g`` where ``d`` meets the anchored ray.

    The ray supports ``d`` from below on ``(-inf, g]``, so meeting points
    sit at breakpoints of the non-negative difference (or fill whole
    segments whose endpoints then vanish too).  When the difference is
    identically zero on the whole left tail the literal infimum would be
    unbounded; the convention here returns the right end of that initial
    zero run (equal to ``g`` itself when the gap vanishes identically, as
    for equal marginals).  The kernel is unaffected: this happens only in
    degenerate configurations.
    """
    cand = d.xs[d.xs <= g + POS_EPS]
    cand = np.append(cand, g)
    diff = d(cand) - (anchor_y + phi * (cand - g))
    zero = diff <= eps
    if not zero.any():
        raise InternalGeometry(f"ray through ({g}, {anchor_y}) with slope {phi} misses the gap")
    first = int(np.argmax(zero))
    tail_flat = abs(d.slope_left - phi) <= 1e-12
    if first == 0 and tail_flat and abs(diff[0]) <= eps:
        run = 0
        while run + 1 < cand.size and zero[run + 1]:
            run += 1
        return float(cand[run])
    return float(cand[first])


# -- curtain table ---------------------------------------------------------


@dataclass(frozen=True)
class TableInterval:
    """Constant destination data on the quantile interval ``(u_lo, u_hi]``.

    ``phi`` varies linearly inside the interval: ``phi(u) = phi_lo + dphi *
    (u - u_lo)``.  Trivial intervals (point kernel) store ``r = q = g =
    s``; on non-trivial intervals ``r`` equals ``q`` in the interior of the
    interval, and pointwise queries at exact breakpoints follow the
    left-limit convention.
    """

    u_lo: float
    u_hi: float
    g: float
    r: float
    q: float
    s: float
    phi_lo: float
    dphi: float
    component: int = 0

    @property
    def trivial(self) -> bool:
        return self.s - self.r <= DEGENERATE_KERNEL_EPS

    @property
    def length(self) -> float:
        return self.u_hi - self.u_lo

    def phi_at(self, u: float) -> float:
        return self.phi_lo + self.dphi * (u - self.u_lo)

    def with_bounds(self, u_lo: float, u_hi: float) -> "TableInterval":
        return TableInterval(
            u_lo, u_hi, self.g, self.r, self.q, self.s,
            self.phi_at(u_lo), self.dphi, self.component,
        )


@dataclass(frozen=True)
class CurtainTable:
    """Piecewise-constant-in-``u`` representation of ``(G, R, Q, S, phi)``."""

    intervals: tuple[TableInterval, ...]

    @cached_property
    def _his(self) -> np.ndarray:
        return np.array([iv.u_hi for iv in self.intervals])

    @cached_property
    def _svals(self) -> np.ndarray:
        return np.array([iv.s for iv in self.intervals])

    def locate(self, u: float) -> TableInterval:
        if not (0.0 < u <= 1.0):
            raise ValueError("quantile level must lie in (0, 1]")
        i = int(np.searchsorted(self._his, u, side="left"))
        i = min(i, len(self.intervals) - 1)
        return self.intervals[i]

    def g(self, u: float) -> float:
        return self.locate(u).g

    def r(self, u: float) -> float:
        return self.locate(u).r

    def s(self, u: float) -> float:
        return self.locate(u).s

    def phi(self, u: float) -> float:
        """phi(u); accepts ``u = 0`` (right limit) and returns 0 at ``u = 1``."""
        if u <= 0.0:
            return self.intervals[0].phi_lo
        return self.locate(u).phi_at(u)

    def phi_right_limit(self, u: float) -> float:
        """Right limit of phi at ``u`` (phi itself is left-continuous)."""
        if u <= 0.0:
            return self.intervals[0].phi_lo
        if u >= 1.0:
            return 0.0
        i = int(np.searchsorted(self._his, u, side="left"))
        i = min(i, len(self.intervals) - 1)
        iv = self.intervals[i]
        if iv.u_hi - u > 1e-15:
            return iv.phi_at(u)
        if i + 1 < len(self.intervals):
            nxt = self.intervals[i + 1]
            return nxt.phi_at(nxt.u_lo)
        return 0.0

    def s_inverse(self, y: float) -> float:
        """Right-continuous inverse of the non-decreasing step function S."""
        j = int(np.searchsorted(self._svals, y, side="right")) - 1
        if j < 0:
            return 0.0
        return self.intervals[j].u_hi

    @cached_property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate(([self.intervals[0].u_lo], self._his))

    def nontrivial_runs(self) -> list[list[int]]:
        """Maximal index runs where the kernel genuinely splits mass and the
        upper function stays above the next quantile across junctions."""
        runs: list[list[int]] = []
        current: list[int] = []
        for i, iv in enumerate(self.intervals):
            if iv.trivial:
                if current:
                    runs.append(current)
                    current = []
                continue
            if current:
                prev = self.intervals[current[-1]]
                if not (iv.g < prev.s - POS_EPS):
                    runs.append(current)
                    current = []
            current.append(i)
        if current:
            runs.append(current)
        return runs


@dataclass
class _AtomContext:
    """Per-source-atom data for the interval discovery.

    For ``u`` in this atom's quantile interval and ``k > xi``, the excess
    potential at a target kink ``q`` is ``a_right[q] - u * (q - xi)``; left
    of ``xi`` it equals the ``u``-independent gap.
    """

    pair: _Pair
    xi: float
    left_xs: np.ndarray
    d_left: np.ndarray
    d_xi: float
    right_xs: np.ndarray
    a_right: np.ndarray
    sigma_l: float
    component: int


def _component_table(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    component: int,
    max_intervals: int,
    counter: list[int],
) -> list[TableInterval]:
    """Curtain table of one irreducible component with probability marginals."""
    pair = _Pair(mu, nu)
    d = pair.gap
    union_xs = np.union1d(mu.xs, nu.xs)
    cum = np.concatenate(([0.0], mu.cum_weights))
    cum[-1] = 1.0

    out: list[TableInterval] = []
    for i, xi in enumerate(mu.xs):
        lo, hi = float(cum[i]), float(cum[i + 1])
        left_xs = union_xs[union_xs <= xi + POS_EPS]
        d_left = d(left_xs)
        d_xi = float(d(xi))
        right_xs = nu.xs[nu.xs > xi + POS_EPS]
        a_right = pair.p_nu(right_xs) - pair.p_mu(xi) if right_xs.size else np.empty(0)
        strict = left_xs < xi - POS_EPS
        if strict.any():
            chords = (d_xi - d_left[strict]) / (xi - left_xs[strict])
            sigma_l = max(0.0, float(chords.max()))
        else:
            sigma_l = 0.0
        ctx = _AtomContext(pair, float(xi), left_xs, d_left, d_xi, right_xs, a_right, sigma_l, component)
        _discover(ctx, lo, hi, out, max_intervals, counter, depth=0)

    out.sort(key=lambda iv: iv.u_lo)
    return _chain_and_merge(out)


def _discover(ctx, lo, hi, out, max_intervals, counter, depth):
    """Cover ``(lo, hi]`` with maximal constant-configuration intervals.

    Slivers below 1e-13 of quantile measure are dropped: they arise from
    float noise around configuration changes, carry negligible kernel
    weight, and are re-absorbed when neighbouring endpoints are chained.
    """
    if hi - lo <= 1e-13:
        return
    if depth > 60:
        raise InternalGeometry("interval discovery recursion exhausted")
    counter[0] += 1
    if counter[0] > max_intervals:
        raise BreakpointOverflow(f"more than {max_intervals} table intervals")

    interval = None
    for frac in _PROBE_FRACTIONS:
        probe = lo + (hi - lo) * frac
        if not (lo < probe < hi):
            continue
        try:
            interval = _config_at(ctx, probe, lo, hi)
        except InternalGeometry:
            interval = None
            continue
        if interval.u_lo < probe <= interval.u_hi + 1e-15:
            break
        interval = None
    if interval is None:
        raise InternalGeometry(f"no stable configuration found on ({lo}, {hi}]")

    a = max(interval.u_lo, lo)
    b = min(interval.u_hi, hi)
    _discover(ctx, lo, a, out, max_intervals, counter, depth + 1)
    if b > a:
        out.append(interval.with_bounds(a, b))
    _discover(ctx, b, hi, out, max_intervals, counter, depth + 1)


def _value_near(xs: np.ndarray, vals: np.ndarray, point: float) -> float:
    """Value at a grid point, matched by position within tolerance."""
    i = int(np.searchsorted(xs, point))
    for j in (i, i - 1):
        if 0 <= j < xs.size and abs(xs[j] - point) <= POS_EPS:
            return float(vals[j])
    return float(np.interp(point, xs, vals))


def _config_at(ctx: _AtomContext, u: float, lo: float, hi: float) -> TableInterval:
    """Configuration at the probe level and its exact validity interval.

    All constraints keeping the current contact pair optimal are affine in
    ``u`` (the branch of the excess potential right of the quantile tilts
    at unit rate per unit of restricted mass), so the validity interval is
    an intersection of half-lines solved in closed form.
    """
    pc = ctx.pair.construct(u)
    xi = ctx.xi
    slack = 1e-14

    if pc.s <= xi + POS_EPS:  # point kernel: envelope touches at the quantile
        if ctx.right_xs.size:
            slopes0 = (ctx.a_right - ctx.d_xi) / (ctx.right_xs - xi)
            u_detach = float(slopes0.min()) - ctx.sigma_l
        else:
            u_detach = math.inf
        if u > u_detach + 1e-12:
            raise InternalGeometry("contact at the quantile past its detachment level")
        return TableInterval(
            lo, min(u_detach, hi), xi, xi, xi, xi, ctx.sigma_l, 0.0, ctx.component
        )

    q_pt, s_pt = pc.q, pc.s
    if q_pt >= xi - POS_EPS or s_pt <= xi + POS_EPS:
        raise InternalGeometry("probe hit a degenerate contact configuration")
    d_q = _value_near(ctx.left_xs, ctx.d_left, q_pt)
    a_s = _value_near(ctx.right_xs, ctx.a_right, s_pt)
    span = s_pt - q_pt
    phi_b = (s_pt - xi) / span
    phi_a = (a_s - d_q) / span

    alphas = []
    betas = []
    # left constraints: the gap stays above the chord at every kink <= xi
    mask = np.abs(ctx.left_xs - q_pt) > POS_EPS
    p = ctx.left_xs[mask]
    alphas.append(ctx.d_left[mask] - d_q - phi_a * (p - q_pt))
    betas.append(phi_b * (p - q_pt))
    # right constraints: the tilting branch stays above the chord at kinks > xi
    if ctx.right_xs.size:
        maskr = np.abs(ctx.right_xs - s_pt) > POS_EPS
        q_arr = ctx.right_xs[maskr]
        alphas.append(ctx.a_right[maskr] - d_q - phi_a * (q_arr - q_pt))
        betas.append(phi_b * (q_arr - q_pt) - (q_arr - xi))
    # supporting-line slope stays within [0, 1 - u]
    alphas.append(np.array([phi_a, 1.0 - phi_a]))
    betas.append(np.array([-phi_b, phi_b - 1.0]))

    alpha = np.concatenate(alphas)
    beta = np.concatenate(betas)
    lo_v, hi_v = -math.inf, math.inf
    pos = beta > 1e-14
    neg = beta < -1e-14
    if pos.any():
        lo_v = float(((-alpha[pos] - slack) / beta[pos]).max())
    if neg.any():
        hi_v = float(((-alpha[neg] - slack) / beta[neg]).min())
    lo_v, hi_v = max(lo_v, lo), min(hi_v, hi)
    if not (lo_v < u <= hi_v + 1e-15):
        raise InternalGeometry("probe fell outside its own validity interval")
    phi_lo = phi_a - phi_b * lo_v
    return TableInterval(lo_v, hi_v, xi, q_pt, q_pt, s_pt, phi_lo, -phi_b, ctx.component)


def _chain_and_merge(intervals: list[TableInterval]) -> list[TableInterval]:
    """Snap shared endpoints and merge adjacent identical configurations."""
    chained: list[TableInterval] = []
    for iv in intervals:
        if chained:
            prev = chained[-1]
            if iv.u_lo != prev.u_hi:
                iv = iv.with_bounds(prev.u_hi, iv.u_hi)
            same = (
                abs(iv.g - prev.g) <= POS_EPS
                and abs(iv.r - prev.r) <= POS_EPS
                and abs(iv.s - prev.s) <= POS_EPS
                and abs(iv.dphi - prev.dphi) <= 1e-9
            )
            if same:
                chained[-1] = TableInterval(
                    prev.u_lo, iv.u_hi, prev.g, prev.r, prev.q, prev.s,
                    prev.phi_lo, prev.dphi, prev.component,
                )
                continue
        if iv.length > 0:
            chained.append(iv)
    return chained


def build_curtain(
    mu: DiscreteMeasure, nu: DiscreteMeasure, *, max_intervals: int = MAX_INTERVALS
) -> CurtainTable:
    """Exact curtain table for a convex-ordered atomic pair.

    The pair is first split into irreducible components; each component is
    solved in its own normalised coordinates and mapped back into global
    quantile levels (which rescales ``phi`` by the component mass), while
    static atoms contribute point-kernel rows in between.
    """
    dec = decompose(mu, nu)
    pieces: list[tuple[float, int, object]] = []
    for x, w in zip(dec.static.xs, dec.static.ws):
        pieces.append((float(x), 0, (float(x), float(w))))
    for comp in dec.components:
        pieces.append((comp.a, 1, comp))
    pieces.sort(key=lambda t: (t[0], t[1]))

    counter = [0]
    intervals: list[TableInterval] = []
    offset = 0.0
    comp_index = 0
    for _, kind, payload in pieces:
        if kind == 0:
            x, w = payload
            intervals.append(
                TableInterval(offset, offset + w, x, x, x, x, 0.0, 0.0, component=-1)
            )
            offset += w
        else:
            comp = payload
            w = comp.mass
            local = _component_table(
                comp.mu_part.scaled(1.0 / w),
                comp.nu_part.scaled(1.0 / w),
                comp_index,
                max_intervals,
                counter,
            )
            for iv in local:
                intervals.append(
                    TableInterval(
                        offset + w * iv.u_lo,
                        offset + w * iv.u_hi,
                        iv.g,
                        iv.r,
                        iv.q,
                        iv.s,
                        w * iv.phi_lo,
                        iv.dphi,
                        component=comp_index,
                    )
                )
            offset += w
            comp_index += 1
    if not intervals:
        raise ValueError("empty inputs")
    intervals[0] = intervals[0].with_bounds(0.0, intervals[0].u_hi)
    last = intervals[-1]
    intervals[-1] = TableInterval(
        last.u_lo, 1.0, last.g, last.r, last.q, last.s,
        last.phi_lo, last.dphi, last.component,
    )
    return CurtainTable(tuple(intervals))


# -- lifted coupling -------------------------------------------------------


@dataclass(frozen=True)
class LiftedCoupling:
    """Curtain kernels integrated over the quantile level.

    ``intervals`` carries ``(u_lo, u_hi, x, r, s)`` rows; the flattened
    joint measure lives on source/destination pairs.
    """

    intervals: tuple[tuple[float, float, float, float, float], ...]
    joint_x: np.ndarray
    joint_y: np.ndarray
    joint_w: np.ndarray

    def first_marginal(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.joint_x.copy(), self.joint_w.copy())

    def second_marginal(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.joint_y.copy(), self.joint_w.copy())

    def restricted_second_marginal(self, u: float) -> DiscreteMeasure:
        """Destination mass of the quantile levels up to ``u``."""
        ys: list[float] = []
        ws: list[float] = []
        for (u_lo, u_hi, x, r, s) in self.intervals:
            if u <= u_lo:
                break
            frac = min(u, u_hi) - u_lo
            if frac <= 0:
                continue
            if s - r <= DEGENERATE_KERNEL_EPS:
                ys.append(x)
                ws.append(frac)
            else:
                w_r = (s - x) / (s - r)
                ys.extend((r, s))
                ws.extend((frac * w_r, frac * (1.0 - w_r)))
        return DiscreteMeasure(ys, ws)

    def straddle_mass(self, z: float) -> float:
        """Joint mass on pairs whose source and destination bracket ``z``."""
        lo = np.minimum(self.joint_x, self.joint_y)
        hi = np.maximum(self.joint_x, self.joint_y)
        mask = (lo < z - POS_EPS) & (hi > z + POS_EPS)
        return float(self.joint_w[mask].sum())

    def to_json(self, components=None) -> dict:
        return {
            "components": components if components is not None else [],
            "intervals": [
                {"u_lo": a, "u_hi": b, "x": x, "r": r, "s": s}
                for (a, b, x, r, s) in self.intervals
            ],
            "joint": [
                [float(x), float(y), float(w)]
                for x, y, w in zip(self.joint_x, self.joint_y, self.joint_w)
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "LiftedCoupling":
        intervals = tuple(
            (float(r["u_lo"]), float(r["u_hi"]), float(r["x"]), float(r["r"]), float(r["s"]))
            for r in obj["intervals"]
        )
        joint = obj["joint"]
        xs = np.array([row[0] for row in joint], dtype=float)
        ys = np.array([row[1] for row in joint], dtype=float)
        ws = np.array([row[2] for row in joint], dtype=float)
        return LiftedCoupling(intervals, xs, ys, ws)


def coupling(table: CurtainTable, mu: DiscreteMeasure) -> LiftedCoupling:
    """Integrate the two-point kernels of a curtain table over ``du``.

    The kernel is constant on every table interval, so the flattened joint
    measure is an exact finite sum; its first marginal is ``mu`` by
    construction and its second marginal is the target law.
    """
    pairs: dict[tuple[float, float], float] = {}
    rows = []
    for iv in table.intervals:
        rows.append((iv.u_lo, iv.u_hi, iv.g, iv.r, iv.s))
        du = iv.length
        if du <= 0:
            continue
        if iv.trivial:
            pairs[(iv.g, iv.g)] = pairs.get((iv.g, iv.g), 0.0) + du
        else:
            w_r = (iv.s - iv.g) / (iv.s - iv.r)
            pairs[(iv.g, iv.r)] = pairs.get((iv.g, iv.r), 0.0) + du * w_r
            pairs[(iv.g, iv.s)] = pairs.get((iv.g, iv.s), 0.0) + du * (1.0 - w_r)
    keys = sorted(pairs)
    xs = np.array([k[0] for k in keys])
    ys = np.array([k[1] for k in keys])
    ws = np.array([pairs[k] for k in keys])
    keep = ws > 0
    return LiftedCoupling(tuple(rows), xs[keep], ys[keep], ws[keep])


def sample_y(table: CurtainTable, u: float, v: float) -> float:
    """Deterministic destination of the pair of uniforms ``(u, v)``.

    Returns the current quantile on point-kernel intervals; otherwise the
    lower destination when ``v`` is at most the mean-preserving threshold
    ``(S - G) / (S - R)`` and the upper one above it.
    """
    if not (0.0 < u < 1.0) or not (0.0 < v < 1.0):
        raise ValueError("both coordinates must lie in (0, 1)")
    iv = table.locate(u)
    if iv.trivial:
        return iv.g
    threshold = (iv.s - iv.g) / (iv.s - iv.r)
    return iv.r if v <= threshold else iv.s


def sample_y_many(table: CurtainTable, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`sample_y` for Monte Carlo use."""
    his = np.array([iv.u_hi for iv in table.intervals])
    idx = np.minimum(np.searchsorted(his, us, side="left"), len(table.intervals) - 1)
    g = np.array([iv.g for iv in table.intervals])[idx]
    r = np.array([iv.r for iv in table.intervals])[idx]
    s = np.array([iv.s for iv in table.intervals])[idx]
    spread = s - r
    nontrivial = spread > DEGENERATE_KERNEL_EPS
    thresh = (s - g) / np.where(nontrivial, spread, 1.0)
    return np.where(nontrivial, np.where(vs <= thresh, r, s), g)


# -- destination maps in source coordinates --------------------------------


@dataclass(frozen=True)
class StepMap:
    """Right-continuous step function of the source position.

    At genuine source atoms the underlying map may take several values over
    the atom's quantile interval; those positions are flagged and
    ``values_at`` returns the full list (``__call__`` returns the last,
    i.e. highest-level, value).
    """

    xs: np.ndarray
    values: tuple[tuple[float, ...], ...]
    multi_valued: np.ndarray

    def __call__(self, x: float) -> float:
        i = int(np.searchsorted(self.xs, x, side="right")) - 1
        if i < 0:
            raise ValueError(f"{x} lies left of the map's support")
        return self.values[i][-1]

    def values_at(self, x: float) -> tuple[float, ...]:
        i = int(np.searchsorted(self.xs, x, side="right")) - 1
        if i < 0:
            raise ValueError(f"{x} lies left of the map's support")
        return self.values[i]


def td_tu(table: CurtainTable) -> tuple[StepMap, StepMap]:
    """Lower and upper destination maps as step functions of the position.

    These compose the table's lower/upper functions with the inverse
    quantile map; they are single-valued wherever one source atom carries
    one configuration and flagged multi-valued otherwise (genuine source
    atoms spanning several configurations).
    """
    lower: dict[float, list[float]] = {}
    upper: dict[float, list[float]] = {}
    for iv in table.intervals:
        lo_list = lower.setdefault(iv.g, [])
        up_list = upper.setdefault(iv.g, [])
        if not lo_list or lo_list[-1] != iv.r:
            lo_list.append(iv.r)
        if not up_list or up_list[-1] != iv.s:
            up_list.append(iv.s)
    xs = np.array(sorted(lower))
    lo_vals = tuple(tuple(lower[x]) for x in xs)
    up_vals = tuple(tuple(upper[x]) for x in xs)
    multi = np.array([len(a) > 1 or len(b) > 1 for a, b in zip(lo_vals, up_vals)])
    return StepMap(xs, lo_vals, multi.copy()), StepMap(xs, up_vals, multi.copy())


def curve_rows(table: CurtainTable) -> list[tuple[float, float, float, float, float, float]]:
    """Rows ``(u, G, R, Q, S, phi)`` at both endpoints of every interval."""
    rows = []
    for iv in table.intervals:
        rows.append((iv.u_lo, iv.g, iv.r, iv.q, iv.s, iv.phi_lo))
        rows.append((iv.u_hi, iv.g, iv.r, iv.q, iv.s, iv.phi_at(iv.u_hi)))
    return rows
