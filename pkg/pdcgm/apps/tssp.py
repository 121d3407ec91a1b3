"""
Two-stage stochastic linear programs.

The deterministic equivalent

    min c.x + sum_i p_i q_i.y_i   s.t.  A x = b,  T_i x + W_i y_i = h_i,  x, y_i >= 0

is solved through the aggregated master of its dual,

    max b.eta + sum_i p_i h_i.theta_i   s.t.  A^T eta + sum_i p_i T_i^T theta_i <= c,

where theta_i ranges over {W_i^T theta <= q_i} and is represented by
convex combinations of aggregated extreme points plus extreme rays. The
duals of the linking rows are the first-stage decisions x.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sps

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
)
from pdcgm.colgen.oracle import collect, map_subproblems, subproblem_result
from pdcgm.exceptions import EmptyDualSet, InvalidInstance
from pdcgm.lp import LinearProgram, RowKind, SimplexSolver, SimplexStatus, VarKind

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9


@dataclass(eq=False)
class Scenario:
    """Second-stage data T x + W y = h with cost q, weighted by p"""
    p: float
    q: np.ndarray
    T: np.ndarray
    W: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.p = float(self.p)
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.h = np.asarray(self.h, dtype=float).reshape(-1)
        self.T = np.asarray(self.T, dtype=float).reshape(len(self.h), -1)
        self.W = np.asarray(self.W, dtype=float).reshape(len(self.h), len(self.q))


@dataclass(eq=False)
class StochasticInstance:
    """First stage (c, A, b) and a list of scenarios"""
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    scenarios: List[Scenario]
    name: str = ""

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.A = np.asarray(self.A, dtype=float).reshape(len(self.b), len(self.c))
        self.scenarios = list(self.scenarios)
        self.validate()

    def validate(self):
        if not self.scenarios:
            raise InvalidInstance("instance has no scenarios")
        arrays = [self.c, self.A, self.b]
        for s in self.scenarios:
            arrays += [s.q, s.T, s.W, s.h]
        if not all(np.all(np.isfinite(arr)) for arr in arrays):
            raise InvalidInstance("instance data must be finite")

        first = self.scenarios[0]
        for i, s in enumerate(self.scenarios):
            if not s.p > 0:
                raise InvalidInstance(f"scenario {i} has probability {s.p}, probabilities must be positive")
            if s.T.shape[1] != self.num_first:
                raise InvalidInstance(f"scenario {i}: T has {s.T.shape[1]} columns, first stage has {self.num_first}")
            if s.W.shape != first.W.shape:
                raise InvalidInstance(f"scenario {i}: W is {s.W.shape}, scenario 0 has {first.W.shape}")
        total = sum(s.p for s in self.scenarios)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidInstance(f"scenario probabilities sum to {total!r}")

    @property
    def num_first(self) -> int:
        return len(self.c)

    @property
    def num_scenarios(self) -> int:
        return len(self.scenarios)


@dataclass(eq=False)
class ScenarioDualResult:
    """Extreme point or extreme ray of a scenario's dual set"""
    kind: ColumnKind
    theta: np.ndarray
    value: float


def recourse_lp(scenario: Scenario, x_bar: np.ndarray) -> LinearProgram:
    """min q.y  s.t.  W y = h - T x_bar, y >= 0"""
    return LinearProgram.from_dense(scenario.q, scenario.W, scenario.h - scenario.T @ x_bar)


def scenario_price(inst: StochasticInstance, i: int, x_bar: np.ndarray) -> ScenarioDualResult:
    """
    Maximise (h_i - T_i x_bar).theta over W_i^T theta <= q_i

    The recourse LP is solved with the simplex method: its optimal duals
    give an extreme point, its Farkas certificate (scaled to unit max-norm)
    an extreme ray.

    Raises:
        EmptyDualSet: the recourse LP is unbounded
    """
    scenario = inst.scenarios[i]
    rhs = scenario.h - scenario.T @ x_bar
    outcome = SimplexSolver().solve(recourse_lp(scenario, x_bar))
    if outcome.status is SimplexStatus.OPTIMAL:
        return ScenarioDualResult(ColumnKind.POINT, outcome.duals, float(rhs @ outcome.duals))
    if outcome.status is SimplexStatus.INFEASIBLE:
        ray = outcome.ray / np.max(np.abs(outcome.ray))
        return ScenarioDualResult(ColumnKind.RAY, ray, float(rhs @ ray))
    raise EmptyDualSet(f"recourse problem of scenario {i} is unbounded; its dual set is empty")


def aggregate_column(
    inst: StochasticInstance,
    results: Sequence[ScenarioDualResult],
    iteration: int = 0,
) -> Column:
    """
    Aggregated master column

    With every scenario at a point the column is the probability-weighted
    sum over all scenarios on convexity row 0; otherwise it is the ray
    column built from the ray scenarios alone.
    """
    rays = [i for i, r in enumerate(results) if r.kind is ColumnKind.RAY]
    members = rays if rays else range(len(results))
    cost = 0.0
    entries = np.zeros(inst.num_first)
    for i in members:
        s, theta = inst.scenarios[i], results[i].theta
        cost += s.p * float(s.h @ theta)
        entries += s.p * (s.T.T @ theta)
    kind = ColumnKind.RAY if rays else ColumnKind.POINT
    return Column(
        cost=cost,
        entries=dict(enumerate(entries)),
        convexity_row=None if rays else 0,
        origin=ColumnOrigin(oracle="scenario_duals", kind=kind, iteration=iteration),
        point=np.concatenate([results[i].theta for i in members]),
    )


class ScenarioOracle:
    """PricingOracle for the aggregated stochastic master"""
    name = "scenario_duals"

    def __init__(self, inst: StochasticInstance, workers: int = 1):
        self.inst = inst
        self.workers = workers

    def price_at(self, x_bar: np.ndarray) -> List[ScenarioDualResult]:
        return map_subproblems(lambda i: scenario_price(self.inst, i, x_bar), self.inst.num_scenarios, self.workers)

    def price(self, duals: DualPoint, iteration: int = 0) -> OracleResult:
        x_bar = duals.dense_linking(self.inst.num_first)
        results = self.price_at(x_bar)
        column = aggregate_column(self.inst, results, iteration)
        # min orientation of the max-sense reduced cost
        if column.is_ray:
            value = -sum(self.inst.scenarios[i].p * r.value for i, r in enumerate(results) if r.kind is ColumnKind.RAY)
        else:
            value = float(duals.convexity_duals[0]) - sum(s.p * r.value for s, r in zip(self.inst.scenarios, results))
        kind = ColumnKind.RAY if column.is_ray else ColumnKind.POINT
        return collect([subproblem_result(0, kind, value, column)])


def deterministic_equivalent(inst: StochasticInstance) -> LinearProgram:
    """DEP over (x, y_1, ..., y_S)"""
    blocks = [[sps.csr_matrix(inst.A)] + [None] * inst.num_scenarios]
    for i, s in enumerate(inst.scenarios):
        row = [sps.csr_matrix(s.T)] + [None] * inst.num_scenarios
        row[i + 1] = sps.csr_matrix(s.W)
        blocks.append(row)
    if inst.A.shape[0] == 0:
        blocks = blocks[1:]
    rows = sps.bmat(blocks, format="csr")
    objective = np.concatenate([inst.c] + [s.p * s.q for s in inst.scenarios])
    rhs = np.concatenate([inst.b] + [s.h for s in inst.scenarios])
    return LinearProgram(
        objective,
        rows,
        (RowKind.EQUAL,) * len(rhs),
        rhs,
        (VarKind.NONNEGATIVE,) * len(objective),
    )


def expected_value_problem(inst: StochasticInstance) -> StochasticInstance:
    """Single-scenario instance with probability-averaged second-stage data"""
    weights = [s.p for s in inst.scenarios]
    average = Scenario(
        p=1.0,
        q=np.average([s.q for s in inst.scenarios], axis=0, weights=weights),
        T=np.average([s.T for s in inst.scenarios], axis=0, weights=weights),
        W=np.average([s.W for s in inst.scenarios], axis=0, weights=weights),
        h=np.average([s.h for s in inst.scenarios], axis=0, weights=weights),
    )
    return StochasticInstance(inst.c, inst.A, inst.b, [average], name=f"{inst.name}-ev")


def expected_value_solution(inst: StochasticInstance) -> Optional[np.ndarray]:
    """First-stage part of the EV problem's optimum, None when it has none"""
    outcome = SimplexSolver().solve(deterministic_equivalent(expected_value_problem(inst)))
    if not outcome.is_optimal:
        logger.warning(f"Expected value problem is {outcome.status.value}")
        return None
    return outcome.point[:inst.num_first]


def tssp_master(inst: StochasticInstance) -> RestrictedMaster:
    """Aggregated max-sense master with the eta block and the artificial column"""
    rows = [LinkingRow(kind=LinkingKind.LESS_EQUAL, rhs=cj, name=f"x{j}") for j, cj in enumerate(inst.c)]
    eta = None
    if inst.A.shape[0] > 0:
        eta = FreeBlock(costs=inst.b, entries=inst.A.T, names=tuple(f"eta{r}" for r in range(len(inst.b))))
    return RestrictedMaster(Sense.MAX, rows, num_convexity=1, free_block=eta, artificial=True,
                            name=inst.name or "tssp")


@dataclass(eq=False)
class TSSPSolution:
    objective: float
    first_stage: np.ndarray
    result: ColumnGenerationResult
    master: RestrictedMaster
    warm_start: Optional[np.ndarray] = None

    @property
    def trace(self):
        return self.result.trace


def solve_tssp(inst: StochasticInstance, cfg: DriverConfig) -> TSSPSolution:
    """
    Solve the DEP of inst through its aggregated dual master

    The master starts from the artificial column plus the aggregated column
    priced at the expected-value first-stage solution; when that solution
    is missing or leaves some scenario infeasible, only the artificial is
    used.
    """
    master = tssp_master(inst)
    oracle = ScenarioOracle(inst, cfg.workers)
    logger.info(
        f"TSSP {inst.name or ''}: {inst.num_first} first-stage variables, {inst.num_scenarios} scenarios"
    )

    x_ev = expected_value_solution(inst)
    if x_ev is not None:
        results = oracle.price_at(x_ev)
        if any(r.kind is ColumnKind.RAY for r in results):
            logger.warning("Expected value solution is infeasible for some scenario, starting from the artificial only")
        else:
            master.add_columns([aggregate_column(inst, results)])

    result = run(master, oracle, cfg)
    x = result.duals.dense_linking(inst.num_first)
    logger.info(f"TSSP objective {result.objective:.10g}")
    return TSSPSolution(objective=result.objective, first_stage=x, result=result, master=master, warm_start=x_ev)
