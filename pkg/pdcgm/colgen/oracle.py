"""
Pricing oracle contract and the separable quadratic oracle.

An oracle receives the user-sense duals of the restricted master and
returns, per subproblem, its best reduced cost in min orientation (never
positive) together with the column that attains it. Subproblems are
independent, so map_subproblems may evaluate them on a thread pool;
results always come back in subproblem order.
"""
import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, TypeVar

import numpy as np

from pdcgm.colgen.driver import run
from pdcgm.colgen.master import RestrictedMaster
from pdcgm.colgen.models import (
    Column,
    ColumnGenerationResult,
    ColumnKind,
    ColumnOrigin,
    DriverConfig,
    DualPoint,
    FreeBlock,
    LinkingKind,
    LinkingRow,
    OracleResult,
    Sense,
    SubproblemResult,
)
from pdcgm.exceptions import BadWeights, InvalidInstance

logger = logging.getLogger(__name__)

T = TypeVar("T")

WEIGHT_SIGN_TOLERANCE = 1e-9
WEIGHT_SUM_TOLERANCE = 1e-6


class PricingOracle(Protocol):
    """What the column generation driver needs from an application"""
    name: str

    def price(self, duals: DualPoint, iteration: int = 0) -> OracleResult:
        ...


def map_subproblems(solve: Callable[[int], T], count: int, workers: int = 1) -> List[T]:
    """
    Evaluate solve(0..count-1), concurrently when workers > 1

    Returns:
        Results in subproblem order
    """
    if workers <= 1 or count <= 1:
        return [solve(k) for k in range(count)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(workers, count)) as executor:
        return list(executor.map(solve, range(count)))


def subproblem_result(index: int, kind: ColumnKind, value: float, column: Optional[Column]) -> SubproblemResult:
    """Keep the column only when its reduced cost is negative; report 0 otherwise"""
    if value < 0.0 and column is not None:
        return SubproblemResult(index=index, kind=kind, value=float(value), column=column)
    return SubproblemResult(index=index, kind=kind, value=0.0, column=None)


def collect(results: List[SubproblemResult]) -> OracleResult:
    """Oracle value as the sum of per-subproblem values"""
    return OracleResult(per_subproblem=results, z_sp=float(sum(r.value for r in results)))


@dataclass(eq=False)
class QuadraticBowls:
    """
    K separable quadratics S_k(alpha) = sum_i a_ki alpha_i^2 / 2 - b_ki alpha_i
    over the box [0, C]^N
    """
    a: np.ndarray  # K x N, strictly positive
    b: np.ndarray  # K x N
    box: float

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_2d(np.asarray(self.b, dtype=float))
        if self.a.shape != self.b.shape:
            raise InvalidInstance(f"bowl curvatures {self.a.shape} and linear terms {self.b.shape} differ")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)) and np.isfinite(self.box)):
            raise InvalidInstance("bowl data must be finite")
        if np.any(self.a <= 0):
            raise InvalidInstance("bowl curvatures must be positive")
        if not self.box > 0:
            raise InvalidInstance(f"box bound must be positive, got {self.box}")

    @property
    def num_bowls(self) -> int:
        return self.a.shape[0]

    @property
    def dimension(self) -> int:
        return self.a.shape[1]

    def values(self, alpha: np.ndarray) -> np.ndarray:
        """S_k(alpha) for every bowl"""
        alpha = np.asarray(alpha, dtype=float)
        return 0.5 * self.a @ (alpha * alpha) - self.b @ alpha

    def minimizer(self, weights: np.ndarray) -> np.ndarray:
        """argmin over the box of sum_k weights_k S_k, coordinatewise"""
        curvature = weights @ self.a
        linear = weights @ self.b
        return np.clip(linear / curvature, 0.0, self.box)


def check_weights(weights: np.ndarray):
    if np.any(weights < -WEIGHT_SIGN_TOLERANCE):
        raise BadWeights(f"negative bowl weight {float(np.min(weights)):.3e}")
    total = float(np.sum(weights))
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise BadWeights(f"bowl weights sum to {total:.9f}, expected 1")


def quadratic_column(bowls: QuadraticBowls, alpha: np.ndarray, iteration: int = 0) -> Column:
    """Point column for alpha: cost 0, entry -S_k(alpha) on bowl row k"""
    values = bowls.values(alpha)
    return Column(
        cost=0.0,
        entries={k: -v for k, v in enumerate(values)},
        convexity_row=0,
        origin=ColumnOrigin(oracle="quadratic", kind=ColumnKind.POINT, iteration=iteration, subproblem=0),
        point=np.asarray(alpha, dtype=float).copy(),
    )


def quad_oracle_price(duals: DualPoint, bowls: QuadraticBowls, iteration: int = 0) -> OracleResult:
    """
    Price the minimax master: the greater-equal row duals are the bowl
    weights, the minimiser of the weighted sum is the candidate point

    Raises:
        BadWeights: weights negative or not summing to one
    """
    weights = duals.dense_linking(bowls.num_bowls)
    check_weights(weights)
    alpha = bowls.minimizer(weights)
    column = quadratic_column(bowls, alpha, iteration)
    value = float(weights @ bowls.values(alpha)) - float(duals.convexity_duals[0])
    logger.debug(f"Quadratic oracle value {value:.6e} at iteration {iteration}")
    return collect([subproblem_result(0, ColumnKind.POINT, value, column)])


class QuadraticOracle:
    """PricingOracle over a set of quadratic bowls"""
    name = "quadratic"

    def __init__(self, bowls: QuadraticBowls):
        self.bowls = bowls

    def price(self, duals: DualPoint, iteration: int = 0) -> OracleResult:
        return quad_oracle_price(duals, self.bowls, iteration)


@dataclass(eq=False)
class MinimaxSolution:
    value: float
    alpha: np.ndarray
    run: ColumnGenerationResult
    master: RestrictedMaster


def minimax_master(bowls: QuadraticBowls) -> RestrictedMaster:
    """min rho  s.t.  rho - sum_p lambda_p S_k(alpha_p) >= 0 for every k,  sum_p lambda_p = 1"""
    K = bowls.num_bowls
    rows = [LinkingRow(kind=LinkingKind.GREATER_EQUAL, rhs=0.0, name=f"bowl{k}") for k in range(K)]
    rho = FreeBlock(costs=np.ones(1), entries=np.ones((K, 1)), names=("rho",))
    return RestrictedMaster(Sense.MIN, rows, num_convexity=1, free_block=rho, name="minimax")


def solve_minimax(bowls: QuadraticBowls, cfg: DriverConfig) -> MinimaxSolution:
    """
    Minimise max_k S_k(alpha) over the box by inner linearisation

    The master starts from the point priced at equal weights.
    """
    master = minimax_master(bowls)
    equal = np.full(bowls.num_bowls, 1.0 / bowls.num_bowls)
    master.add_columns([quadratic_column(bowls, bowls.minimizer(equal))])

    result = run(master, QuadraticOracle(bowls), cfg)
    alpha = np.zeros(bowls.dimension)
    for column, weight in zip(master.columns, result.weights):
        alpha += weight * column.point
    logger.info(f"Minimax value {result.objective:.8g} after {result.outer_iterations} outer iterations")
    return MinimaxSolution(value=result.objective, alpha=alpha, run=result, master=master)
