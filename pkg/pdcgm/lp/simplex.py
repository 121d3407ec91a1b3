"""
Two-phase primal simplex on a dense tableau.

Small subproblem LPs only. Besides optimal solutions the solver returns
the two certificates column generation needs: an unbounded direction when
phase two finds an entering column without a blocking row, and a Farkas
vector (the phase-one duals) when phase one ends with positive
infeasibility.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from pdcgm.constants import BLAND_AFTER_DEGENERATE, PIVOT_TOLERANCE
from pdcgm.exceptions import CycleDetected
from pdcgm.lp.models import LinearProgram, SimplexOutcome, SimplexStatus

logger = logging.getLogger(__name__)


class _Tableau:
    """B^-1 [A | I | b] with the artificial identity kept alongside"""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        m, n = A.shape
        self.n = n
        self.m = m
        self.T = np.hstack([A, np.eye(m), b.reshape(-1, 1)])
        self.basis: List[int] = [n + i for i in range(m)]

    @property
    def rhs(self) -> np.ndarray:
        return self.T[:, -1]

    @property
    def basis_inverse(self) -> np.ndarray:
        return self.T[:, self.n:self.n + self.m]

    def reduced_costs(self, costs: np.ndarray) -> np.ndarray:
        c_b = costs[self.basis]
        return costs - c_b @ self.T[:, :-1]

    def pivot(self, row: int, col: int):
        T = self.T
        T[row] /= T[row, col]
        others = np.arange(self.m) != row
        T[others] -= np.outer(T[others, col], T[row])
        self.basis[row] = col


class SimplexSolver:
    """
    Dense two-phase simplex

    Dantzig's rule picks the entering column until `bland_after` degenerate
    pivots have been made, after which Bland's rule is used for the rest of
    the solve. Ratio-test ties go to the basic variable with the lowest
    index.
    """

    def __init__(self, bland_after: int = BLAND_AFTER_DEGENERATE, tol: float = PIVOT_TOLERANCE):
        self.bland_after = bland_after
        self.tol = tol

    def solve(self, lp: LinearProgram) -> SimplexOutcome:
        sf = lp.standard_form()
        A, b, c = sf.A.copy(), sf.b.copy(), sf.c
        m, n = A.shape

        signs = np.where(b < 0, -1.0, 1.0)
        A *= signs[:, None]
        b *= signs
        tab = _Tableau(A, b)
        self._pivots = 0
        self._degenerate = 0
        self._bland = False
        self._max_pivots = 50 * (m + n) + 1000

        # Phase one: minimise the sum of artificials
        phase_one = np.concatenate([np.zeros(n), np.ones(m)])
        self._run(tab, phase_one, allowed=n + m)
        infeasibility = float(phase_one[tab.basis] @ tab.rhs)
        if infeasibility > self.tol * (1.0 + np.max(np.abs(b), initial=0.0)):
            farkas = signs * (phase_one[tab.basis] @ tab.basis_inverse)
            logger.debug(f"Phase one ended with infeasibility {infeasibility:.3e}")
            return SimplexOutcome(
                status=SimplexStatus.INFEASIBLE,
                ray=farkas,
                pivots=self._pivots,
                bland_engaged=self._bland,
            )

        self._drive_out_artificials(tab)

        # Phase two on the original costs, artificials barred from entering
        phase_two = np.concatenate([c, np.zeros(m)])
        entering = self._run(tab, phase_two, allowed=n)
        if entering is not None:
            direction = np.zeros(n)
            direction[entering] = 1.0
            column = tab.T[:, entering]
            for i, var in enumerate(tab.basis):
                if var < n:
                    direction[var] = -column[i]
            ray = sf.recover(direction)
            logger.debug(f"Unbounded along column {entering}")
            return SimplexOutcome(
                status=SimplexStatus.UNBOUNDED,
                ray=ray,
                pivots=self._pivots,
                bland_engaged=self._bland,
            )

        x_std = np.zeros(n)
        for i, var in enumerate(tab.basis):
            if var < n:
                x_std[var] = max(tab.rhs[i], 0.0)
        point = sf.recover(x_std)
        duals = signs * (phase_two[tab.basis] @ tab.basis_inverse)
        return SimplexOutcome(
            status=SimplexStatus.OPTIMAL,
            point=point,
            duals=duals,
            objective=float(lp.objective @ point),
            pivots=self._pivots,
            bland_engaged=self._bland,
        )

    def _run(self, tab: _Tableau, costs: np.ndarray, allowed: int) -> Optional[int]:
        """
        Pivot until optimal

        Returns:
            None at optimality, otherwise the entering column that has no
            blocking row
        """
        scale = 1.0 + np.max(np.abs(costs), initial=0.0)
        while True:
            reduced = tab.reduced_costs(costs)[:allowed]
            candidates = np.flatnonzero(reduced < -self.tol * scale)
            if len(candidates) == 0:
                return None
            if self._bland:
                entering = int(candidates[0])
            else:
                entering = int(candidates[np.argmin(reduced[candidates])])

            leaving, ratio = self._ratio_test(tab, entering)
            if leaving is None:
                return entering

            if ratio <= self.tol:
                self._degenerate += 1
                if not self._bland and self._degenerate >= self.bland_after:
                    logger.warning(f"Switching to Bland's rule after {self._degenerate} degenerate pivots")
                    self._bland = True

            tab.pivot(leaving, entering)
            self._pivots += 1
            if self._pivots > self._max_pivots:
                raise CycleDetected(f"Simplex exceeded {self._max_pivots} pivots")

    def _ratio_test(self, tab: _Tableau, entering: int) -> Tuple[Optional[int], float]:
        column = tab.T[:, entering]
        rows = np.flatnonzero(column > self.tol)
        if len(rows) == 0:
            return None, np.inf
        ratios = np.maximum(tab.rhs[rows], 0.0) / column[rows]
        best = float(np.min(ratios))
        tied = rows[ratios <= best + self.tol * max(1.0, abs(best))]
        leaving = min(tied, key=lambda i: tab.basis[i])
        return int(leaving), best

    def _drive_out_artificials(self, tab: _Tableau):
        """Pivot zero-level artificials out of the basis where a structural column allows it"""
        for row, var in enumerate(list(tab.basis)):
            if var < tab.n:
                continue
            entries = np.flatnonzero(np.abs(tab.T[row, :tab.n]) > self.tol)
            if len(entries) == 0:
                logger.debug(f"Row {row} is redundant")
                continue
            tab.pivot(row, int(entries[0]))
            self._pivots += 1


def solve(lp: LinearProgram) -> SimplexOutcome:
    """Solve lp with the two-phase simplex method"""
    return SimplexSolver().solve(lp)
