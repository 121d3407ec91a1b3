"""
Restricted master problem.

The master is kept in its user form (sense, linking rows of any kind,
convexity rows, a pool of columns, an optional block of free variables and
optional artificial columns) and compiled on demand into a min-sense
LinearProgram with equality and less-equal rows only:

- greater-equal linking rows are negated,
- max-sense objectives are negated,
- variable order is free block, artificials, then pool columns in the order
  they were added, so a pool that only grows keeps every previous compiled
  variable as a prefix,
- row order is active linking rows (by index) followed by convexity rows.
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps

from pdcgm.colgen.models import (
    Column,
    DualPoint,
    FreeBlock,
    LinkingKind,
    LinkingRow,
    Sense,
)
from pdcgm.constants import ARTIFICIAL_COST, DUPLICATE_TOLERANCE
from pdcgm.exceptions import DimensionMismatch, EmptyMaster
from pdcgm.lp import LinearProgram, PrimalDualPoint, RowKind, VarKind, primal_dual_objectives

logger = logging.getLogger(__name__)


class ColumnValues(NamedTuple):
    """Primal values of a compiled solve split by variable group"""
    weights: np.ndarray
    artificial: np.ndarray
    free: np.ndarray

    @property
    def artificial_mass(self) -> float:
        return float(np.sum(self.artificial))


class RestrictedMaster:
    """
    Mutable restricted master problem

    Args:
        sense: Optimisation direction of the user formulation
        linking_rows: Full linking-row universe; rows with active=False are
            left out of the compiled LP
        num_convexity: Number of convexity rows (one per subproblem block)
        free_block: Free structural variables with their linking entries
        artificial: Add one artificial column per convexity row
        artificial_costs: Positive penalty per artificial column in the
            min orientation; ARTIFICIAL_COST for every row when omitted
    """

    def __init__(
        self,
        sense: Sense,
        linking_rows: Sequence[LinkingRow],
        num_convexity: int,
        free_block: Optional[FreeBlock] = None,
        artificial: bool = False,
        artificial_costs: Optional[Sequence[float]] = None,
        name: str = "",
    ):
        self.sense = sense
        self.linking_rows: List[LinkingRow] = list(linking_rows)
        self.num_convexity = int(num_convexity)
        self.free_block = free_block
        self.artificial = artificial
        if artificial_costs is None:
            artificial_costs = [ARTIFICIAL_COST] * self.num_convexity
        self.artificial_costs = np.asarray(artificial_costs, dtype=float).reshape(-1)
        self.name = name
        self.columns: List[Column] = []
        self.duplicates_rejected = 0
        self._by_convexity: Dict[Optional[int], List[Column]] = defaultdict(list)

        if free_block is not None and free_block.entries.shape[0] != len(self.linking_rows):
            raise DimensionMismatch(
                f"free block has {free_block.entries.shape[0]} rows, master has {len(self.linking_rows)} linking rows"
            )
        if artificial and len(self.artificial_costs) != self.num_convexity:
            raise DimensionMismatch(
                f"{len(self.artificial_costs)} artificial costs for {self.num_convexity} convexity rows"
            )

    @property
    def num_linking(self) -> int:
        return len(self.linking_rows)

    @property
    def active_keys(self) -> Tuple[int, ...]:
        return tuple(i for i, row in enumerate(self.linking_rows) if row.active)

    @property
    def num_free(self) -> int:
        return 0 if self.free_block is None else self.free_block.size

    @property
    def num_artificial(self) -> int:
        return self.num_convexity if self.artificial else 0

    def set_active(self, keys: Iterable[int], active: bool):
        for key in keys:
            self.linking_rows[key].active = active

    def _row_sign(self, key: int) -> float:
        return -1.0 if self.linking_rows[key].kind is LinkingKind.GREATER_EQUAL else 1.0

    def _check_column(self, column: Column):
        for key in column.entries:
            if not 0 <= key < self.num_linking:
                raise DimensionMismatch(f"column entry on linking row {key}, master has {self.num_linking}")
        if column.convexity_row is not None and not 0 <= column.convexity_row < self.num_convexity:
            raise DimensionMismatch(
                f"column on convexity row {column.convexity_row}, master has {self.num_convexity}"
            )

    def add_columns(self, columns: Iterable[Column]) -> int:
        """
        Append columns to the pool, skipping exact duplicates

        Returns:
            Number of columns actually added
        """
        added = 0
        for column in columns:
            self._check_column(column)
            bucket = self._by_convexity[column.convexity_row]
            if any(column.same_as(existing, DUPLICATE_TOLERANCE) for existing in bucket):
                self.duplicates_rejected += 1
                logger.debug(f"Skipping duplicate column from {column.origin.oracle}")
                continue
            bucket.append(column)
            self.columns.append(column)
            added += 1
        return added

    def compile(self) -> LinearProgram:
        """Min-sense LP of the current restricted master"""
        if not self.columns and not self.artificial:
            raise EmptyMaster(f"Master {self.name or '<unnamed>'} has no columns and no artificial")
        covered = {c.convexity_row for c in self.columns if c.convexity_row is not None}
        if not self.artificial and len(covered) < self.num_convexity:
            missing = sorted(set(range(self.num_convexity)) - covered)
            raise EmptyMaster(f"Convexity rows {missing} have neither a column nor an artificial")

        sign = self.sense.sign
        keys = self.active_keys
        position = {key: i for i, key in enumerate(keys)}
        num_active = len(keys)
        num_rows = num_active + self.num_convexity

        row_idx: List[int] = []
        col_idx: List[int] = []
        values: List[float] = []
        costs: List[float] = []
        var_kinds: List[VarKind] = []

        def put(row: int, col: int, value: float):
            row_idx.append(row)
            col_idx.append(col)
            values.append(value)

        var = 0
        if self.free_block is not None:
            for j in range(self.free_block.size):
                for key in keys:
                    value = self.free_block.entries[key, j]
                    if value != 0.0:
                        put(position[key], var, self._row_sign(key) * value)
                costs.append(sign * self.free_block.costs[j])
                var_kinds.append(VarKind.FREE)
                var += 1

        for k in range(self.num_artificial):
            put(num_active + k, var, 1.0)
            costs.append(self.artificial_costs[k])
            var_kinds.append(VarKind.NONNEGATIVE)
            var += 1

        for column in self.columns:
            for key, value in column.entries.items():
                i = position.get(key)
                if i is not None:
                    put(i, var, self._row_sign(key) * value)
            if column.convexity_row is not None:
                put(num_active + column.convexity_row, var, 1.0)
            costs.append(sign * column.cost)
            var_kinds.append(VarKind.NONNEGATIVE)
            var += 1

        rows = sps.csr_matrix((values, (row_idx, col_idx)), shape=(num_rows, var))
        rhs = np.concatenate([
            [self._row_sign(key) * self.linking_rows[key].rhs for key in keys],
            np.ones(self.num_convexity),
        ])
        row_kinds = [
            RowKind.EQUAL if self.linking_rows[key].kind is LinkingKind.EQUAL else RowKind.LESS_EQUAL
            for key in keys
        ] + [RowKind.EQUAL] * self.num_convexity
        return LinearProgram(np.asarray(costs), rows, tuple(row_kinds), rhs, tuple(var_kinds))

    def _check_point(self, point: PrimalDualPoint):
        expected_vars = self.num_free + self.num_artificial + len(self.columns)
        expected_rows = len(self.active_keys) + self.num_convexity
        if len(point.primal) != expected_vars or len(point.duals) != expected_rows:
            raise DimensionMismatch(
                f"point has {len(point.primal)} primal / {len(point.duals)} dual values, "
                f"master compiles to {expected_vars} variables / {expected_rows} rows"
            )

    def min_bounds(self, point: PrimalDualPoint) -> Tuple[float, float]:
        """Primal and dual objective of the compiled (min-sense) LP at point"""
        self._check_point(point)
        return primal_dual_objectives(self.compile(), point)

    def bounds(self, point: PrimalDualPoint) -> Tuple[float, float]:
        """
        Upper and lower bound on the restricted master optimum in user sense

        For a min master these are the primal and dual objectives; for a
        max master the roles swap, so z_lb <= z_ub holds in either sense.
        The artificial contribution is part of the primal objective.
        """
        primal, dual = self.min_bounds(point)
        if self.sense is Sense.MIN:
            return primal, dual
        return -dual, -primal

    def dual_point(self, point: PrimalDualPoint) -> DualPoint:
        """User-sense duals: one per active linking row, one per convexity row"""
        self._check_point(point)
        sign = self.sense.sign
        keys = self.active_keys
        row_signs = np.array([self._row_sign(key) for key in keys])
        y = point.duals
        return DualPoint(
            linking_duals=sign * row_signs * y[:len(keys)],
            convexity_duals=sign * y[len(keys):],
            linking_keys=keys,
        )

    def column_values(self, point: PrimalDualPoint) -> ColumnValues:
        self._check_point(point)
        x = point.primal
        free_end = self.num_free
        art_end = free_end + self.num_artificial
        return ColumnValues(
            weights=np.asarray(x[art_end:], dtype=float),
            artificial=np.asarray(x[free_end:art_end], dtype=float),
            free=np.asarray(x[:free_end], dtype=float),
        )

    def linking_activity(self, weights: np.ndarray) -> np.ndarray:
        """Sum of column entries weighted by lambda over the full linking universe"""
        activity = np.zeros(self.num_linking)
        for column, weight in zip(self.columns, weights):
            for key, value in column.entries.items():
                activity[key] += weight * value
        return activity


def reduced_cost(column: Column, duals: DualPoint, sense: Sense) -> float:
    """
    Reduced cost of a column at a user-sense dual point, in min orientation

    Point columns subtract their convexity dual; ray columns do not. Rows
    absent from duals.linking_keys count as dual 0.
    """
    dual_of = dict(zip(duals.linking_keys, duals.linking_duals))
    value = column.cost - sum(dual_of.get(key, 0.0) * entry for key, entry in column.entries.items())
    if column.convexity_row is not None:
        value -= duals.convexity_duals[column.convexity_row]
    return sense.sign * value
