"""Independent brute-force references for acceptance testing.

Two oracles live here, both deliberately unrelated to the geometric code
paths they check:

* :func:`shadow_lp` recovers the shadow measure as the solution of a small
  linear program.  Feasible points are the measures dominated by the
  target with the source's mass and mean whose put potential dominates the
  source's; the shadow minimises the potential pointwise among them, so
  minimising the summed potential over the target's atoms pins it down
  uniquely.

* :func:`curtain_incremental` assembles the left-curtain coupling from
  increments of shadows of growing left parts of the source, one source
  atom at a time.

The LP is solved by an in-repo dense two-phase simplex with Bland's rule;
instances are tiny (a few dozen variables), so no external solver is
needed and the tests stay hermetic.
"""

from __future__ import annotations

import numpy as np

from .measures import DiscreteMeasure, put_potential, restricted_measure


class Infeasible(ValueError):
    """The LP has no feasible point: the source does not embed into the target."""


class NegativeKernel(RuntimeError):
    """A shadow increment went negative, violating shadow monotonicity."""


_PIVOT_EPS = 1e-9


def simplex_solve(c: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> np.ndarray:
    """Minimise ``c @ x`` subject to ``a_eq @ x = b_eq`` and ``x >= 0``.

    Dense two-phase simplex with Bland's anti-cycling rule.  Intended for
    small instances (up to a few hundred variables); raises
    :class:`Infeasible` when phase one cannot drive the artificials to
    zero.
    """
    a_eq = np.asarray(a_eq, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = a_eq.shape
    # make right-hand sides non-negative
    flip = b_eq < 0
    a_eq = a_eq.copy()
    a_eq[flip] *= -1.0
    b_eq[flip] *= -1.0

    # phase one: minimise the sum of artificial variables
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a_eq
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b_eq
    basis = list(range(n, n + m))
    cost1 = np.zeros(n + m)
    cost1[n:] = 1.0
    _run_simplex(tableau, basis, cost1)
    if tableau[-1, -1] > 1e-7:
        raise Infeasible(f"phase-one objective {tableau[-1, -1]:.3e} > 0")

    # drive leftover artificials out of the basis where possible
    for row, var in enumerate(basis):
        if var >= n:
            cols = np.flatnonzero(np.abs(tableau[row, :n]) > _PIVOT_EPS)
            if cols.size:
                _pivot(tableau, basis, row, int(cols[0]))

    # phase two on the original columns
    keep = [j for j in range(n)]
    rows = [i for i, var in enumerate(basis) if var < n]
    tab2 = np.zeros((len(rows) + 1, n + 1))
    tab2[:-1, :n] = tableau[rows][:, keep]
    tab2[:-1, -1] = tableau[rows, -1]
    basis2 = [basis[i] for i in rows]
    _run_simplex(tab2, basis2, c)

    x = np.zeros(n)
    for row, var in enumerate(basis2):
        x[var] = tab2[row, -1]
    return x


def _run_simplex(tableau: np.ndarray, basis: list[int], cost: np.ndarray) -> None:
    """Run simplex iterations in place until optimality (Bland's rule)."""
    m = len(basis)
    n = cost.size
    # reduced-cost row
    tableau[-1, :n] = cost
    tableau[-1, -1] = 0.0
    for row, var in enumerate(basis):
        if cost[var] != 0.0:
            tableau[-1, :] -= cost[var] * tableau[row, :]
    while True:
        enter = -1
        for j in range(n):
            if tableau[-1, j] < -_PIVOT_EPS:
                enter = j
                break
        if enter < 0:
            tableau[-1, -1] *= -1.0
            return
        ratios = np.full(m, np.inf)
        col = tableau[:m, enter]
        positive = col > _PIVOT_EPS
        ratios[positive] = tableau[:m, -1][positive] / col[positive]
        best = np.inf
        leave = -1
        for i in range(m):
            if ratios[i] < best - 1e-15 or (
                ratios[i] <= best + 1e-15 and leave >= 0 and basis[i] < basis[leave]
            ):
                if np.isfinite(ratios[i]):
                    best = ratios[i]
                    leave = i
        if leave < 0:
            raise Infeasible("objective unbounded below")
        _pivot(tableau, basis, leave, enter)


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row, :] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i, :] -= tableau[i, col] * tableau[row, :]
    basis[row] = col


def shadow_lp(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Shadow of ``mu`` in ``nu`` via linear programming.

    Variables are weights ``w_j in [0, nu_j]`` on the target atoms,
    constrained to the source's mass and mean and to a put potential
    dominating the source's at every atom of either measure; the objective
    minimises the summed potential over the target's atoms.
    """
    if mu.n_atoms == 0:
        return DiscreteMeasure([], [])
    if nu.n_atoms > 220:
        raise ValueError("LP oracle is restricted to small instances")
    xs = nu.xs
    n = xs.size
    p_mu = put_potential(mu)
    grid = np.union1d(mu.xs, nu.xs)
    payoff = np.maximum(grid[:, None] - xs[None, :], 0.0)  # (k, j) -> (k - x_j)^+
    p_mu_grid = p_mu(grid)

    # columns: w (n), slack for potential rows (k), slack for bounds (n)
    k = grid.size
    n_cols = n + k + n
    rows = []
    rhs = []
    # mass and mean
    row = np.zeros(n_cols)
    row[:n] = 1.0
    rows.append(row)
    rhs.append(mu.mass)
    row = np.zeros(n_cols)
    row[:n] = xs
    rows.append(row)
    rhs.append(mu.mean)
    # potential domination: payoff @ w - slack = p_mu
    for i in range(k):
        row = np.zeros(n_cols)
        row[:n] = payoff[i]
        row[n + i] = -1.0
        rows.append(row)
        rhs.append(p_mu_grid[i])
    # upper bounds: w + slack = nu weights
    for j in range(n):
        row = np.zeros(n_cols)
        row[j] = 1.0
        row[n + k + j] = 1.0
        rows.append(row)
        rhs.append(nu.ws[j])
    cost = np.zeros(n_cols)
    # sum of potentials at target atoms
    nu_rows = np.maximum(xs[:, None] - xs[None, :], 0.0)
    cost[:n] = nu_rows.sum(axis=0)

    w = simplex_solve(cost, np.array(rows), np.array(rhs))[:n]
    keep = w > 1e-13
    return DiscreteMeasure(xs[keep], w[keep])


def curtain_incremental(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Left-curtain coupling assembled from shadow increments.

    For cumulative levels at the source atom boundaries, the kernel of
    atom ``i`` is the difference of consecutive shadows divided by the
    atom's weight; shadow monotonicity makes every difference a
    non-negative measure.  Returns ``(xs, ys, ws)`` arrays of the joint
    measure.  Boundary levels suffice because the shadow grows linearly in
    the level while it sweeps through a single source atom.
    """
    if abs(mu.mass - 1.0) > 1e-9 or abs(nu.mass - 1.0) > 1e-9:
        raise ValueError("oracle expects probability measures")
    prev = np.zeros(nu.n_atoms)
    xs_out: list[float] = []
    ys_out: list[float] = []
    ws_out: list[float] = []
    cum = mu.cum_weights
    for i in range(mu.n_atoms):
        u = float(cum[i])
        part = mu if i == mu.n_atoms - 1 else restricted_measure(mu, u)
        sh = shadow_lp(part, nu)
        dense = np.zeros(nu.n_atoms)
        idx = np.searchsorted(nu.xs, sh.xs)
        dense[idx] = sh.ws
        diff = dense - prev
        if diff.min() < -1e-10:
            raise NegativeKernel(f"shadow increment {diff.min():.3e} below zero")
        diff = np.maximum(diff, 0.0)
        prev = dense
        for y, w in zip(nu.xs, diff):
            if w > 1e-14:
                xs_out.append(float(mu.xs[i]))
                ys_out.append(float(y))
                ws_out.append(float(w))
    return np.array(xs_out), np.array(ys_out), np.array(ws_out)


def joint_tv(a, b, pos_tol: float = 1e-11) -> float:
    """Total-variation distance between two atomic joint measures.

    Each argument is an ``(xs, ys, ws)`` triple; atoms within ``pos_tol``
    in both coordinates are identified.
    """
    def _round(v):
        return np.round(v / pos_tol).astype(np.int64)

    table: dict[tuple[int, int], float] = {}
    for (xs, ys, ws), sign in ((a, 1.0), (b, -1.0)):
        for key_x, key_y, w in zip(_round(np.asarray(xs)), _round(np.asarray(ys)), ws):
            key = (int(key_x), int(key_y))
            table[key] = table.get(key, 0.0) + sign * float(w)
    return 0.5 * sum(abs(v) for v in table.values())
