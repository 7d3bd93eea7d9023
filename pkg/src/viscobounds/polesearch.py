"""Joint search over pole positions and weights.

Every bound problem here has the same shape once residues are rewritten as
weights ``w = B / (1 - s)``: minimise ``sum cost(s_i) w_i`` subject to
``sum column(s_i) w_i = rhs`` with ``w >= 0``, where ``column`` and ``cost`` are
smooth functions of the pole and a few fixed columns (slacks, the pure
phase-2 state) carry no pole.  A vertex uses at most ``len(rhs)`` columns.

The search solves the LP on a pole grid, then runs column generation: the
LP duals give each candidate pole a reduced cost, poles with negative reduced
cost are located on a dense grid, polished in ``y = -log(1 - s)`` and added,
and the LP is re-solved until no pole prices out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InfeasibleError, NumericalFailure
from .lp import Status, solve_standard

Y_MAX = 30.0
S_MAX = -np.expm1(-Y_MAX)


def pole_from_y(y):
    return -np.expm1(-np.clip(y, 0.0, Y_MAX))


def y_from_pole(s):
    return -np.log1p(-np.minimum(s, S_MAX))


def pole_grid(n: int) -> np.ndarray:
    """``n`` poles evenly spaced on ``[0, 1 - exp(-Y_MAX)]``."""
    return np.linspace(0.0, S_MAX, max(int(n), 2))


@dataclass(frozen=True)
class Family:
    """Columns parameterised by a pole: ``column(s) -> (rows, k)``, ``cost(s) -> (k,)``."""

    column: Callable[[np.ndarray], np.ndarray]
    cost: Callable[[np.ndarray], np.ndarray]
    tag: object = None


@dataclass(frozen=True)
class ColumnProblem:
    families: tuple
    rhs: np.ndarray
    fixed_columns: np.ndarray = None
    fixed_costs: np.ndarray = None
    fixed_tags: tuple = ()

    def __post_init__(self):
        rhs = np.asarray(self.rhs, float)
        object.__setattr__(self, "rhs", rhs)
        fc = np.zeros((rhs.size, 0)) if self.fixed_columns is None else np.asarray(self.fixed_columns, float)
        object.__setattr__(self, "fixed_columns", fc.reshape(rhs.size, -1))
        cost = np.zeros(fc.shape[1]) if self.fixed_costs is None else np.asarray(self.fixed_costs, float)
        object.__setattr__(self, "fixed_costs", cost)

    @property
    def rows(self) -> int:
        return self.rhs.size


@dataclass(frozen=True)
class Atom:
    family: int
    pole: float
    weight: float


@dataclass
class ColumnSolution:
    value: float
    atoms: list
    fixed_weights: np.ndarray
    lp_value: float = float("nan")
    rounds: int = 0

    def poles(self, family: int | None = None) -> np.ndarray:
        return np.array([a.pole for a in self.atoms if family is None or a.family == family])


def _assemble(problem: ColumnProblem, poles_by_family: Sequence[np.ndarray]):
    blocks, costs, index = [], [], []
    for j, (fam, poles) in enumerate(zip(problem.families, poles_by_family)):
        blocks.append(np.asarray(fam.column(poles), float).reshape(problem.rows, -1))
        costs.append(np.asarray(fam.cost(poles), float).reshape(-1))
        index += [(j, float(s)) for s in poles]
    blocks.append(problem.fixed_columns)
    costs.append(problem.fixed_costs)
    index += [(-1, k) for k in range(problem.fixed_columns.shape[1])]
    return np.hstack(blocks), np.concatenate(costs), index


def _lp(problem, poles_by_family):
    A, c, index = _assemble(problem, poles_by_family)
    status, x, basis = solve_standard(A, problem.rhs, c, rule="dantzig")
    if status is Status.INFEASIBLE:
        raise InfeasibleError("no residues satisfy the constraints on the pole grid")
    if status is not Status.OPTIMAL:
        raise NumericalFailure(f"LP over the pole grid returned {status.value}")
    return float(c @ x), x, list(basis), index, A, c


def _duals(problem, A, c, basis):
    B = A[:, list(basis)]
    y, *_ = np.linalg.lstsq(B.T, c[list(basis)], rcond=None)
    return y


PRICE_S = np.linspace(0.0, S_MAX, 513)
PRICE_Y = np.linspace(0.0, Y_MAX, 257)
PRICE_GRID = np.unique(np.concatenate([PRICE_S, pole_from_y(PRICE_Y)]))


def _price(family: Family, duals: np.ndarray, rows: int, tol: float, max_new: int = 3, basis_poles=()):
    """Poles whose column has negative reduced cost, polished by a 1-D search in ``y``.

    Basis poles and their midpoints join the search grid: near convergence the
    improving region is a narrow dip between two basis poles.
    """
    def reduced(s):
        s = np.atleast_1d(np.asarray(s, float))
        col = np.asarray(family.column(s), float).reshape(rows, -1)
        return np.asarray(family.cost(s), float).reshape(-1) - duals @ col

    grid = PRICE_GRID
    bp = np.sort(np.asarray(basis_poles, float))
    if bp.size:
        grid = np.unique(np.concatenate([grid, bp, 0.5 * (bp[1:] + bp[:-1])]))
    d = reduced(grid)
    n = grid.size
    left = np.concatenate([[np.inf], d[:-1]])
    right = np.concatenate([d[1:], [np.inf]])
    cand = np.flatnonzero((d <= left) & (d <= right) & (d < -tol))
    cand = cand[np.argsort(d[cand])][:max_new]
    out = []
    ygrid = y_from_pole(grid)
    for k in cand:
        lo, hi = ygrid[max(k - 1, 0)], ygrid[min(k + 1, n - 1)]
        if hi - lo > 1e-14:
            res = minimize_scalar(lambda y: float(reduced(pole_from_y(y))[0]), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            s_best = float(pole_from_y(res.x)) if res.fun < d[k] else float(grid[k])
        else:
            s_best = float(grid[k])
        out.append(s_best)
    return out


def solve_columns(problem: ColumnProblem, n_grid: int = 64, extra_poles: Sequence[float] = (),
                  refine: bool = True, max_rounds: int = 60, tol: float = 1e-13) -> ColumnSolution:
    """Minimise over poles and weights.  Raises ``InfeasibleError`` if the grid LP is infeasible.

    With ``refine`` the grid LP is followed by column generation: the LP duals
    price every pole of each family and poles with negative reduced cost join
    the pool until none remain.
    """
    grid = pole_grid(n_grid)
    extra = np.asarray(extra_poles, float).reshape(-1)
    pools = [np.unique(np.concatenate([grid, extra])) for _ in problem.families]
    value, x, basis, index, A, c = _lp(problem, pools)
    lp_value = value
    rounds = 0
    stalled = 0
    while refine and rounds < max_rounds:
        duals = _duals(problem, A, c, basis)
        scale = max(1.0, float(np.abs(c).max()))
        added = 0
        in_basis = [index[k] for k in basis]
        for j, fam in enumerate(problem.families):
            bp = [s for f, s in in_basis if f == j]
            new = [s for s in _price(fam, duals, problem.rows, tol * scale, basis_poles=bp)
                   if not np.any(pools[j] == s)]
            if new:
                pools[j] = np.unique(np.append(pools[j], new))
                added += len(new)
        if not added:
            break
        rounds += 1
        value2, x, basis, index, A, c = _lp(problem, pools)
        stalled = stalled + 1 if value2 >= value - 1e-15 * scale else 0
        value = min(value, value2)
        if stalled >= 3:
            break
    best = _collect(problem, x, index, float(c @ x))
    best.lp_value = lp_value
    best.rounds = rounds
    return best


def _collect(problem, x, index, value) -> ColumnSolution:
    atoms, fixed = [], np.zeros(problem.fixed_columns.shape[1])
    for k in np.flatnonzero(x > 0):
        j, ref = index[k]
        if j >= 0:
            atoms.append(Atom(j, ref, float(x[k])))
        else:
            fixed[ref] = x[k]
    return ColumnSolution(float(value), atoms, fixed)


def golden_minimize(f: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray,
                    tol: float = 1e-13, max_iter: int = 200):
    """Vectorised golden-section search; each lane is an independent 1-D problem."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = np.array(lo, float), np.array(hi, float)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if np.all(b - a < tol):
            break
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - invphi * (b - a)
        new_d = a + invphi * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, np.nan, fd)
        fd_next = np.where(left, fc, np.nan)
        need_c = np.isnan(fc_next)
        need_d = np.isnan(fd_next)
        if need_c.any():
            fc_next = np.where(need_c, f(c_next), fc_next)
        if need_d.any():
            fd_next = np.where(need_d, f(d_next), fd_next)
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)
