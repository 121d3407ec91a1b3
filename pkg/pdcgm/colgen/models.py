from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from pdcgm.constants import (
    DEFAULT_EPS_MAX,
    DEFAULT_GAMMA,
    DEFAULT_IPM_MAX_ITER,
    DEFAULT_MAX_OUTER,
    GAP_FLOOR,
)


class Sense(Enum):
    """Optimisation direction of a user-level master"""
    MIN = "min"
    MAX = "max"

    @property
    def sign(self) -> float:
        return 1.0 if self is Sense.MIN else -1.0


class LinkingKind(Enum):
    """Linking row type in the user formulation"""
    LESS_EQUAL = "le"
    GREATER_EQUAL = "ge"
    EQUAL = "eq"


class ColumnKind(Enum):
    POINT = "point"
    RAY = "ray"


@dataclass(frozen=True)
class ColumnOrigin:
    """Where a column came from"""
    oracle: str
    kind: ColumnKind
    iteration: int = 0
    subproblem: Optional[int] = None


@dataclass(eq=False)
class Column:
    """
    Master column: cost, sparse linking-row entries keyed by row index, and
    the convexity row it belongs to (None for ray columns)
    """
    cost: float
    entries: Dict[int, float]
    convexity_row: Optional[int]
    origin: ColumnOrigin
    point: Optional[np.ndarray] = None  # subproblem solution that generated the column

    def __post_init__(self):
        self.cost = float(self.cost)
        self.entries = {int(k): float(v) for k, v in self.entries.items() if v != 0.0}
        if not np.isfinite(self.cost) or not all(np.isfinite(v) for v in self.entries.values()):
            raise ValueError("Column coefficients must be finite")
        if (self.origin.kind is ColumnKind.POINT) != (self.convexity_row is not None):
            raise ValueError("Point columns need a convexity row and ray columns must not have one")

    @property
    def is_ray(self) -> bool:
        return self.origin.kind is ColumnKind.RAY

    def same_as(self, other: "Column", tol: float) -> bool:
        """Equal cost, convexity row and entries within tol"""
        if self.convexity_row != other.convexity_row or abs(self.cost - other.cost) > tol:
            return False
        keys = set(self.entries) | set(other.entries)
        return all(abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) <= tol for k in keys)


@dataclass
class LinkingRow:
    kind: LinkingKind
    rhs: float
    active: bool = True
    name: str = ""


@dataclass(eq=False)
class FreeBlock:
    """
    Free structural variables of a master (eta of the stochastic master,
    rho of the convex master) with their costs and linking-row coefficients
    """
    costs: np.ndarray
    entries: np.ndarray  # linking rows x free variables
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=float).reshape(-1)
        self.entries = np.asarray(self.entries, dtype=float).reshape(-1, len(self.costs))

    @property
    def size(self) -> int:
        return len(self.costs)


@dataclass(eq=False)
class DualPoint:
    """
    Dual query point in the user sense of the master

    linking_duals[i] belongs to linking row linking_keys[i]; rows that are
    not active in the RMP implicitly have dual 0.
    """
    linking_duals: np.ndarray
    convexity_duals: np.ndarray
    linking_keys: Tuple[int, ...] = ()

    def __post_init__(self):
        self.linking_duals = np.asarray(self.linking_duals, dtype=float).reshape(-1)
        self.convexity_duals = np.asarray(self.convexity_duals, dtype=float).reshape(-1)
        if not self.linking_keys:
            self.linking_keys = tuple(range(len(self.linking_duals)))
        if len(self.linking_keys) != len(self.linking_duals):
            raise ValueError("One key per linking dual is required")

    def dense_linking(self, size: int) -> np.ndarray:
        """Linking duals over the full row universe, zero on inactive rows"""
        dense = np.zeros(size)
        dense[list(self.linking_keys)] = self.linking_duals
        return dense


@dataclass(eq=False)
class SubproblemResult:
    """Outcome of one subproblem: its reduced cost (min orientation) and column"""
    index: int
    kind: ColumnKind
    value: float
    column: Optional[Column] = None


@dataclass(eq=False)
class OracleResult:
    """
    Oracle answer at a dual point

    z_sp is the oracle value in min orientation and is never positive.
    """
    per_subproblem: List[SubproblemResult]
    z_sp: float

    @property
    def columns(self) -> List[Column]:
        return [r.column for r in self.per_subproblem if r.column is not None]

    @property
    def has_rays(self) -> bool:
        return any(r.kind is ColumnKind.RAY and r.column is not None for r in self.per_subproblem)


class DriverMode(Enum):
    PDCGM = "pdcgm"
    STANDARD = "standard"


@dataclass(frozen=True)
class DriverConfig:
    """Column generation parameters"""
    delta: float = 1e-5
    degree: float = 10.0
    eps_max: float = DEFAULT_EPS_MAX
    gamma: float = DEFAULT_GAMMA
    mode: DriverMode = DriverMode.PDCGM
    max_outer: int = DEFAULT_MAX_OUTER
    workers: int = 1
    ipm_max_iter: int = DEFAULT_IPM_MAX_ITER

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.degree > 1:
            raise ValueError(f"degree must exceed 1, got {self.degree}")
        if not 0 < self.eps_max <= 0.5:
            raise ValueError(f"eps_max must lie in (0, 0.5], got {self.eps_max}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be positive, got {self.max_outer}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")


@dataclass
class IterationRecord:
    """
    One outer iteration. Bounds are in the min orientation of the compiled
    master (user sense negated for max masters).
    """
    outer_index: int
    z_ub_running: float
    z_lb_running: float
    gap: float
    epsilon_used: float
    oracle_value: float
    columns_added: int
    rmp_time: float
    oracle_time: float
    rmp_upper: float = float("nan")
    rmp_lower: float = float("nan")
    rmp_rel_gap: float = float("nan")
    rmp_centered: bool = True
    rmp_centrality_min: float = float("nan")  # min x_j z_j / mu of the RMP point
    rmp_centrality_max: float = float("nan")
    ipm_iterations: int = 0
    rows_added: int = 0
    rows_removed: int = 0

    def recomputed_gap(self) -> float:
        if not np.isfinite(self.z_ub_running) or not np.isfinite(self.z_lb_running):
            return float("inf")
        return (self.z_ub_running - self.z_lb_running) / (GAP_FLOOR + abs(self.z_ub_running))


@dataclass(eq=False)
class ColumnGenerationResult:
    """Final state of a column generation run"""
    objective: float  # user sense
    upper_bound: float  # min orientation
    lower_bound: float  # min orientation
    trace: List[IterationRecord]
    weights: np.ndarray  # lambda per pool column
    free_values: np.ndarray
    artificial_mass: float
    duals: Optional[DualPoint] = None
    rmp_time: float = 0.0
    oracle_time: float = 0.0
    total_time: float = 0.0
    columns_rejected: int = 0

    @property
    def outer_iterations(self) -> int:
        return len(self.trace)
