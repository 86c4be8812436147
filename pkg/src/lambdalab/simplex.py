"""Dense tableau simplex.

Solves ``min c.x  s.t.  A x = b, x >= 0``. Callers that know a feasible
basis pass it and skip phase one; otherwise artificial variables are added.
Each phase first runs Dantzig pricing on a slightly perturbed right-hand
side (which breaks degeneracy), then re-reads the final basis against the
true data; Bland's rule finishes from there, or from the starting basis if
the perturbed basis is not feasible for the true data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_TOL = 1e-11
_PIVOT_TOL = 1e-7
_REFACTOR_EVERY = 100
_PERTURB = 1e-7


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    basis: list[int]
    pivots: int
    status: str  # optimal | infeasible | unbounded


class _Tableau:
    """Rows ``B^-1 [A | b]`` with the reduced-cost row kept separately."""

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int]):
        self.source = np.hstack([A, b[:, None]]).astype(np.float64)
        self.basis = list(basis)
        self.c = c.astype(np.float64)
        self.pivots = 0
        self.refactor()

    def refactor(self) -> None:
        """Rebuild ``B^-1 [A | b]`` and the cost row from the original data."""
        B = self.source[:, self.basis]
        if np.array_equal(B, np.eye(B.shape[0])):
            self.T = self.source.copy()
        else:
            try:
                self.T = np.linalg.solve(B, self.source)
            except np.linalg.LinAlgError:
                # keep the updated tableau; the next refactor gets another chance
                if not hasattr(self, "T"):
                    raise
                return
        rhs = self.T[:, -1]
        rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0
        self.reprice()

    def reprice(self) -> None:
        self.cost = np.append(self.c, 0.0) - self.c[self.basis] @ self.T

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        factor = T[:, col].copy()
        factor[row] = 0.0
        T -= np.outer(factor, T[row])
        self.cost -= self.cost[col] * T[row]
        self.basis[row] = col
        self.pivots += 1
        if self.pivots % _REFACTOR_EVERY == 0:
            self.refactor()
        else:
            rhs = T[:, -1]
            rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0

    def run(self, allowed: np.ndarray | None = None, max_pivots: int = 1_000_000,
            rule: str = "bland") -> str:
        while self.pivots < max_pivots:
            red = self.cost[:-1]
            cand = red < -_TOL
            if allowed is not None:
                cand &= allowed
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return "optimal"
            if rule == "bland":
                col = int(idx[0])  # lowest entering index
            else:
                col = int(idx[np.argmin(red[idx])])
            colvals = self.T[:, col]
            pos = colvals > _PIVOT_TOL * max(1.0, float(np.abs(colvals).max()))
            if not pos.any():
                return "unbounded"
            ratios = np.full(colvals.shape, np.inf)
            ratios[pos] = self.T[pos, -1] / colvals[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + _TOL * max(1.0, abs(best)))
            if rule == "bland":
                # among ties leave with the lowest basic variable index
                row = int(min(ties, key=lambda r: self.basis[r]))
            else:
                row = int(ties[np.argmax(colvals[ties])])
            self.pivot(row, col)
        return "limit"

    def rebase(self, basis: list[int]) -> None:
        self.basis = list(basis)
        self.refactor()

    def solution(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        for r, j in enumerate(self.basis):
            if j < n:
                x[j] = self.T[r, -1]
        return np.maximum(x, 0.0)


def _solve(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int],
           allowed: np.ndarray | None, max_pivots: int) -> tuple[_Tableau, str]:
    """Perturbed Dantzig run, then Bland on the true data."""
    tab = _Tableau(A, b, c, basis)
    start = list(basis)
    rng = np.random.default_rng(0)
    m = A.shape[0]
    # b + B delta keeps the starting basis feasible with basic values raised by delta
    delta = _PERTURB * max(1.0, float(np.abs(b).max(initial=0.0))) * rng.uniform(1.0, 2.0, m)
    pert = _Tableau(A, b + A[:, start] @ delta, c, start)
    budget = min(max_pivots, 50 * (A.shape[0] + A.shape[1]))
    status = pert.run(allowed=allowed, max_pivots=budget, rule="dantzig")
    used = pert.pivots
    if status in ("optimal", "unbounded"):
        tab.rebase(pert.basis)
        scale = 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0)))
        if np.all(tab.T[:, -1] >= -scale):
            tab.T[:, -1] = np.maximum(tab.T[:, -1], 0.0)
        else:
            tab.rebase(start)
    tab.pivots = used
    status = tab.run(allowed=allowed, max_pivots=max_pivots)
    if status == "limit":
        raise RuntimeError("simplex pivot limit reached")
    return tab, status


def simplex(c, A, b, basis: list[int] | None = None, max_pivots: int = 1_000_000) -> LPResult:
    """Minimise ``c.x`` over ``{A x = b, x >= 0}``.

    ``basis`` must index ``m`` columns forming a feasible basis; when omitted a
    phase-one problem with artificial variables is solved first. ``duals`` are
    the equality multipliers ``y`` with ``c - A^T y >= 0`` at optimality.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise DomainError("inconsistent LP dimensions")

    if basis is not None:
        if len(basis) != m:
            raise DomainError("basis needs one column per row")
        check = _Tableau(A, b, c, basis)
        if np.any(check.T[:, -1] < -1e-9):
            raise DomainError("supplied basis is not feasible")
        tab, status = _solve(A, b, c, list(basis), None, max_pivots)
    else:
        flip = np.where(b < 0, -1.0, 1.0)
        A1 = np.hstack([A * flip[:, None], np.eye(m)])
        b1 = b * flip
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        tab, _ = _solve(A1, b1, c1, list(range(n, n + m)), None, max_pivots)
        if -tab.cost[-1] > 1e-9 * max(1.0, np.abs(b1).max(initial=0.0)):
            return LPResult(np.zeros(n), np.inf, np.zeros(m), tab.basis, tab.pivots, "infeasible")
        # drive artificials out of the basis where possible
        for r, j in enumerate(list(tab.basis)):
            if j >= n:
                nz = np.flatnonzero(np.abs(tab.T[r, :n]) > 1e-9)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
        c2 = np.concatenate([c, np.zeros(m)])
        allowed = np.concatenate([np.ones(n, bool), np.zeros(m, bool)])
        tab, status = _solve(A1, b1, c2, tab.basis, allowed, max_pivots)
        A, c, b = A1, c2, b1
        # duals of the flipped rows are flipped back below

    x_full = tab.solution(A.shape[1])
    x = x_full[:n]
    objective = float(c[:n] @ x)
    # y = c_B B^-1, recovered by solving B^T y = c_B on the original columns
    B = A[:, tab.basis]
    try:
        y = np.linalg.solve(B.T, c[tab.basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(B.T, c[tab.basis], rcond=None)[0]
    if basis is None:
        y = y * flip
    if status == "unbounded":
        objective = -np.inf
    return LPResult(x, objective, y, tab.basis, tab.pivots, status)
