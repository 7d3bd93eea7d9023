"""Inner residue optimisation for fixed poles.

``simplex_solve`` is a dense two-phase tableau simplex with Bland's rule.  The
closed-form residue solutions are independent fast paths for the small vertex
families that appear in the scalar bound problems.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalFailure
from .sumrules import LinearProgramSpec

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
COINCIDENT_TOL = 1e-12


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: Status
    value: float = float("nan")
    point: np.ndarray = field(default_factory=lambda: np.zeros(0))
    active_set: tuple = ()
    basis: tuple = ()

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# tableau simplex


class _Tableau:
    """Rows ``[A | b]`` for ``A x = b, x >= 0`` plus a cost row, with an explicit basis."""

    def __init__(self, A, b, basis):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.m, self.n = m, n

    def set_cost(self, c):
        self.T[-1, :-1] = c
        self.T[-1, -1] = 0.0
        for i, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1] -= self.T[-1, j] * self.T[i]

    def pivot(self, r, c):
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, c] = 0.0
        T[r, c] = 1.0
        self.basis[r] = c

    def run(self, allowed, rule, max_iter):
        """Minimise the current cost row over the ``allowed`` columns."""
        T = self.T
        degenerate = 0
        for _ in range(max_iter):
            red = T[-1, :-1]
            cand = np.flatnonzero((red < -PIVOT_TOL) & allowed)
            if cand.size == 0:
                return Status.OPTIMAL
            use_bland = rule == "bland" or degenerate > 50
            c = int(cand[0]) if use_bland else int(cand[np.argmin(red[cand])])
            colv = T[:-1, c]
            pos = np.flatnonzero(colv > PIVOT_TOL)
            if pos.size == 0:
                return Status.UNBOUNDED
            ratios = T[pos, -1] / colv[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-14 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            degenerate = degenerate + 1 if best <= 1e-14 else 0
            self.pivot(r, c)
        raise NumericalFailure("simplex iteration limit reached")


def _standard_form(spec: LinearProgramSpec):
    n = spec.num_vars
    A_eq, b_eq = spec.A_eq, spec.b_eq
    A_ub, b_ub = spec.A_ub, spec.b_ub
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    A = np.zeros((m_eq + m_ub, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub]).astype(float)
    return A, b, n, m_eq, m_ub


def solve_standard(A, b, c, rule="bland", max_iter=None):
    """Minimise ``c.x`` subject to ``A x = b, x >= 0``.

    Returns ``(status, x, basis)``.  Rows are sign-normalised and artificial
    variables added where no slack column can start the basis.
    """
    A = np.array(A, float)
    b = np.array(b, float)
    c = np.asarray(c, float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    # reuse unit columns as the starting basis when possible
    basis = [-1] * m
    for j in range(n):
        col = A[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] > 0 and basis[nz[0]] < 0:
            i = nz[0]
            scale = A[i, j]
            A[i] /= scale
            b[i] /= scale
            basis[i] = j
    art_rows = [i for i in range(m) if basis[i] < 0]
    k = len(art_rows)
    Afull = np.zeros((m, n + k))
    Afull[:, :n] = A
    for a, i in enumerate(art_rows):
        Afull[i, n + a] = 1.0
        basis[i] = n + a
    tab = _Tableau(Afull, b, basis)
    allowed = np.ones(n + k, bool)
    if k:
        c1 = np.zeros(n + k)
        c1[n:] = 1.0
        tab.set_cost(c1)
        tab.run(allowed, rule, max_iter)
        if -tab.T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max()):
            return Status.INFEASIBLE, None, None
        # drive zero-level artificials out of the basis
        for i in range(m):
            if tab.basis[i] >= n:
                row = tab.T[i, :n]
                js = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if js.size:
                    tab.pivot(i, int(js[0]))
        allowed[n:] = False
    c2 = np.zeros(n + k)
    c2[:n] = c
    tab.set_cost(c2)
    status = tab.run(allowed, rule, max_iter)
    if status is not Status.OPTIMAL:
        return status, None, None
    x = np.zeros(n + k)
    for i, j in enumerate(tab.basis):
        x[j] = tab.T[i, -1]
    basis = tuple(j for j in tab.basis if j < n)
    return Status.OPTIMAL, np.maximum(x[:n], 0.0), basis


def simplex_solve(spec: LinearProgramSpec, sense: Sense | str = Sense.MIN, rule: str = "bland") -> LpSolution:
    """Optimise ``spec.objective`` over its polytope with a dense tableau simplex."""
    sense = Sense(sense)
    A, b, n, m_eq, m_ub = _standard_form(spec)
    c = np.zeros(A.shape[1])
    sign = 1.0 if sense is Sense.MIN else -1.0
    c[:n] = sign * spec.objective
    status, x, basis = solve_standard(A, b, c, rule=rule)
    if status is not Status.OPTIMAL:
        return LpSolution(status)
    point = x[:n]
    value = float(spec.objective @ point + spec.objective_offset)
    viol = spec.violation(point)
    if viol > FEAS_TOL * 10:
        raise NumericalFailure(f"simplex returned a point violating constraints by {viol:.3g}")
    active = list(range(m_eq))
    if m_ub:
        resid = spec.b_ub - spec.A_ub @ point
        active += [m_eq + j for j in np.flatnonzero(np.abs(resid) <= FEAS_TOL)]
    return LpSolution(Status.OPTIMAL, value, point, tuple(active), tuple(j for j in basis if j < n))


# ---------------------------------------------------------------------------
# closed-form vertex solutions (scalar residues)


def _pole(name, s, hi_open=True):
    if not (0.0 <= s < 1.0 if hi_open else 0.0 <= s <= 1.0):
        raise DomainError(f"{name}={s!r} outside [0, 1)")


def residues_no_info(s0: float) -> float:
    """Single residue that makes ``sum B/(1-s) <= 1`` tight."""
    _pole("s0", s0)
    return 1.0 - s0


def residues_vf_two_pole(s0: float, s1: float, f1: float) -> tuple[float, float]:
    """Two residues satisfying ``B0 + B1 = f1`` and ``B0/(1-s0) + B1/(1-s1) = 1``."""
    f2 = 1.0 - f1
    if not 0 < f1 < 1:
        raise DomainError("f1 must lie in (0, 1)")
    _pole("s0", s0)
    _pole("s1", s1)
    if not (s0 <= f2 + COINCIDENT_TOL and s1 >= f2 - COINCIDENT_TOL):
        raise DomainError("need s0 in [0, f2] and s1 in [f2, 1)")
    if s1 - s0 < COINCIDENT_TOL:
        return f1, 0.0
    B0 = (1 - s0) * (s1 - f2) / (s1 - s0)
    B1 = (1 - s1) * (f2 - s0) / (s1 - s0)
    return max(B0, 0.0), max(B1, 0.0)


def residues_iso_two_pole(s0: float, s1: float, f1: float):
    """Two residues matching ``sum B = f1`` and ``sum B s = f1 f2 / 2``.

    Returns ``None`` when a residue is negative or ``sum B/(1-s) > 1``.
    """
    f2 = 1.0 - f1
    _pole("s0", s0)
    _pole("s1", s1)
    if abs(s1 - s0) < COINCIDENT_TOL:
        if abs(s0 - f2 / 2) > COINCIDENT_TOL or f1 / (1 - s0) > 1 + FEAS_TOL:
            return None
        return f1, 0.0
    B0 = f1 * (s1 - f2 / 2) / (s1 - s0)
    B1 = f1 * (f2 / 2 - s0) / (s1 - s0)
    if B0 < -FEAS_TOL or B1 < -FEAS_TOL:
        return None
    if B0 / (1 - s0) + B1 / (1 - s1) > 1 + FEAS_TOL:
        return None
    return max(B0, 0.0), max(B1, 0.0)


def residues_iso_three_pole(s0: float, s1: float, s2: float, f1: float):
    """Three residues with all three scalar sum rules tight.

    Returns ``None`` for pole triples that would need a negative residue, so an
    outer search can treat the pole domain as constrained.  Coincident poles
    collapse to the two-pole formula.
    """
    f2 = 1.0 - f1
    for name, s in (("s0", s0), ("s1", s1), ("s2", s2)):
        _pole(name, s)
    if not (s0 <= s1 <= s2):
        raise DomainError("poles must be ordered s0 <= s1 <= s2")
    if s1 - s0 < COINCIDENT_TOL or s2 - s1 < COINCIDENT_TOL:
        lo, hi = (s1, s2) if s1 - s0 < COINCIDENT_TOL else (s0, s1)
        two = residues_iso_two_pole(lo, hi, f1)
        if two is None:
            return None
        return (two[0], 0.0, two[1]) if s1 - s0 < COINCIDENT_TOL else (two[0], two[1], 0.0)
    B0 = (1 - s0) * (f2 * (1 - f1 / 2 - s1 - s2) + s1 * s2) / ((s1 - s0) * (s2 - s0))
    B1 = (1 - s1) * (-f2 + f1 * f2 / 2 + (s0 + s2) * f2 - s0 * s2) / ((s1 - s0) * (s2 - s1))
    B2 = (1 - s2) * (f2 - f1 * f2 / 2 - (s0 + s1) * f2 + s0 * s1) / ((s2 - s0) * (s2 - s1))
    if min(B0, B1, B2) < -FEAS_TOL:
        return None
    return max(B0, 0.0), max(B1, 0.0), max(B2, 0.0)


def basic_weights(columns: np.ndarray, rhs: np.ndarray):
    """Batched square solves ``columns[k] @ w[k] = rhs``; singular systems give NaN rows."""
    columns = np.asarray(columns, float)
    out = np.full(columns.shape[:-1], np.nan)
    det = np.linalg.det(columns)
    scale = np.prod(np.abs(columns).max(axis=-2) + 1e-300, axis=-1)
    ok = np.abs(det) > 1e-13 * scale
    if np.any(ok):
        rhs_b = np.broadcast_to(rhs, out[ok].shape)[..., None]
        out[ok] = np.linalg.solve(columns[ok], rhs_b)[..., 0]
    return out
