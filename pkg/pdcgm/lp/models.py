from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps

from pdcgm.constants import GAP_FLOOR
from pdcgm.exceptions import DimensionMismatch


class RowKind(Enum):
    """Constraint row type"""
    EQUAL = "eq"
    LESS_EQUAL = "le"


class VarKind(Enum):
    """Variable domain"""
    NONNEGATIVE = "nonneg"
    FREE = "free"


@dataclass(eq=False)
class LinearProgram:
    """
    Linear program  min c.x  s.t.  A x (= | <=) b, x >= 0 or free

    Rows are stored as a scipy CSR matrix with canonical (duplicate free)
    entries.
    """
    objective: np.ndarray
    rows: sps.csr_matrix
    row_kinds: Tuple[RowKind, ...]
    rhs: np.ndarray
    var_kinds: Tuple[VarKind, ...]

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.rows = sps.csr_matrix(self.rows, dtype=float)
        self.rows.sum_duplicates()
        self.row_kinds = tuple(self.row_kinds)
        self.var_kinds = tuple(self.var_kinds)

        m, n = self.rows.shape
        if len(self.objective) != n or len(self.var_kinds) != n:
            raise DimensionMismatch(
                f"{n} matrix columns but {len(self.objective)} costs and {len(self.var_kinds)} variable kinds"
            )
        if len(self.rhs) != m or len(self.row_kinds) != m:
            raise DimensionMismatch(
                f"{m} matrix rows but {len(self.rhs)} rhs entries and {len(self.row_kinds)} row kinds"
            )
        if not (np.all(np.isfinite(self.objective)) and np.all(np.isfinite(self.rhs))
                and np.all(np.isfinite(self.rows.data))):
            raise ValueError("Linear program coefficients must be finite")

    @classmethod
    def from_dense(
        cls,
        objective: Sequence[float],
        rows: Sequence[Sequence[float]],
        rhs: Sequence[float],
        row_kinds: Optional[Sequence[RowKind]] = None,
        var_kinds: Optional[Sequence[VarKind]] = None,
    ) -> "LinearProgram":
        """Build from dense data; rows default to equalities, variables to nonnegative"""
        objective = np.asarray(objective, dtype=float).reshape(-1)
        matrix = np.asarray(rows, dtype=float).reshape(-1, len(objective))
        if row_kinds is None:
            row_kinds = [RowKind.EQUAL] * matrix.shape[0]
        if var_kinds is None:
            var_kinds = [VarKind.NONNEGATIVE] * len(objective)
        return cls(objective, sps.csr_matrix(matrix), tuple(row_kinds), rhs, tuple(var_kinds))

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def num_vars(self) -> int:
        return self.rows.shape[1]

    def dense(self) -> np.ndarray:
        return self.rows.toarray()

    def standard_form(self, split_free: bool = True) -> "StandardForm":
        return StandardForm.from_lp(self, split_free)


@dataclass(eq=False)
class StandardForm:
    """
    min c.x  s.t.  A x = b, x >= 0 on the bounded columns

    Every less-equal row gets a slack column appended after the structural
    ones. With split_free (the simplex layout) a free variable becomes a
    (+, -) pair of adjacent nonnegative columns; without it the free
    variable keeps a single column that is left out of `bounded`.
    """
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    var_columns: List[Tuple[int, int]]  # (positive column, negative column or -1)
    slack_columns: np.ndarray  # per row, -1 for equalities
    num_structural: int
    bounded: np.ndarray  # per column, False for unsplit free variables

    @classmethod
    def from_lp(cls, lp: LinearProgram, split_free: bool = True) -> "StandardForm":
        dense = lp.dense()
        m = lp.num_rows
        columns = []
        costs = []
        bounded = []
        var_columns = []
        for j, kind in enumerate(lp.var_kinds):
            pos = len(columns)
            columns.append(dense[:, j])
            costs.append(lp.objective[j])
            if kind is VarKind.FREE and split_free:
                columns.append(-dense[:, j])
                costs.append(-lp.objective[j])
                bounded += [True, True]
                var_columns.append((pos, pos + 1))
            else:
                bounded.append(kind is VarKind.NONNEGATIVE)
                var_columns.append((pos, -1))
        num_structural = len(columns)

        slack_columns = np.full(m, -1, dtype=int)
        for i, kind in enumerate(lp.row_kinds):
            if kind is RowKind.LESS_EQUAL:
                unit = np.zeros(m)
                unit[i] = 1.0
                slack_columns[i] = len(columns)
                columns.append(unit)
                costs.append(0.0)
                bounded.append(True)

        A = np.column_stack(columns) if columns else np.zeros((m, 0))
        return cls(
            A=A.reshape(m, len(columns)),
            b=lp.rhs.copy(),
            c=np.asarray(costs, dtype=float),
            var_columns=var_columns,
            slack_columns=slack_columns,
            num_structural=num_structural,
            bounded=np.asarray(bounded, dtype=bool),
        )

    @property
    def num_columns(self) -> int:
        return self.A.shape[1]

    def recover(self, x_std: np.ndarray) -> np.ndarray:
        """Map a standard-form vector back to the original variables"""
        x = np.empty(len(self.var_columns))
        for j, (pos, neg) in enumerate(self.var_columns):
            x[j] = x_std[pos] - (x_std[neg] if neg >= 0 else 0.0)
        return x


@dataclass(eq=False)
class PrimalDualPoint:
    """
    Primal-dual iterate returned by the interior point solver

    `std_primal` and `slacks` hold the primal values and dual slacks of the
    bounded standard-form columns only: one per nonnegative variable, then
    one per less-equal row. Free variables have no dual slack and take no
    part in the complementarity products checked for centrality.
    """
    primal: np.ndarray
    duals: np.ndarray
    slacks: np.ndarray
    std_primal: np.ndarray
    mu: float
    rel_gap: float
    centered: bool
    primal_objective: float
    dual_objective: float
    var_kinds: Tuple[VarKind, ...] = ()
    iterations: int = 0
    centering_steps: int = 0
    warm_started: bool = False
    primal_residual: float = 0.0
    dual_residual: float = 0.0

    @property
    def complementarity(self) -> np.ndarray:
        return self.std_primal * self.slacks

    def is_centered(self, gamma: float, slack: float = 0.0) -> bool:
        """Check gamma*mu <= x_j z_j <= mu/gamma for every pair"""
        return is_well_centered(self.complementarity, self.mu, gamma, slack)

    def centrality_range(self) -> Tuple[float, float]:
        """Smallest and largest x_j z_j / mu; (1, 1) without products"""
        products = self.complementarity
        if len(products) == 0 or self.mu <= 0.0:
            return 1.0, 1.0
        return float(np.min(products) / self.mu), float(np.max(products) / self.mu)


def is_well_centered(products: np.ndarray, mu: float, gamma: float, slack: float = 0.0) -> bool:
    if len(products) == 0:
        return True
    lower = gamma * mu * (1.0 - slack)
    upper = mu / gamma * (1.0 + slack)
    return bool(np.all(products >= lower) and np.all(products <= upper))


def relative_gap(upper: float, lower: float) -> float:
    """(upper - lower) / (1e-10 + |upper|)"""
    return (upper - lower) / (GAP_FLOOR + abs(upper))


class SimplexStatus(Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(eq=False)
class SimplexOutcome:
    """Result of a simplex solve"""
    status: SimplexStatus
    point: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    objective: Optional[float] = None
    pivots: int = 0
    bland_engaged: bool = field(default=False)

    @property
    def is_optimal(self) -> bool:
        return self.status is SimplexStatus.OPTIMAL
