"""
Brute-force reference solvers and the equivalence suites built on them.

- vertex enumeration for small LPs (and their unbounded directions),
- Bellman-Ford shortest paths through networkx,
- direct simplex solves of the compact multicommodity LP and of the
  deterministic equivalent,
- grid search for the quadratic oracle.

The `verify` command and the test suite share these.
"""
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from pdcgm.apps.mcnf import Network, compact_lp, dijkstra, solve_mcnf
from pdcgm.apps.tssp import StochasticInstance, deterministic_equivalent, solve_tssp
from pdcgm.colgen.driver import check_contract
from pdcgm.colgen.models import DriverConfig, DriverMode
from pdcgm.colgen.oracle import QuadraticBowls
from pdcgm.data.generators import random_network, small_network, small_stochastic
from pdcgm.exceptions import PDCGMError
from pdcgm.lp import LinearProgram, RowKind, SimplexSolver, SimplexStatus

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-9
VERTEX_TOLERANCE = 1e-9
OBJECTIVE_TOLERANCE = 1e-6
SIMPLEX_TOLERANCE = 1e-8
GRID_STEP = 1e-4
GRID_TOLERANCE = 1e-3

# Outer tolerance of the equivalence runs, tighter than the application defaults
SUITE_DELTA = 1e-7


@dataclass(eq=False)
class VertexSolution:
    status: SimplexStatus
    objective: Optional[float] = None
    point: Optional[np.ndarray] = None


def _independent_rows(A: np.ndarray, b: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Drop dependent rows; None when the dropped rows are inconsistent"""
    keep: List[int] = []
    for i in range(A.shape[0]):
        trial = keep + [i]
        if np.linalg.matrix_rank(A[trial], tol=RANK_TOLERANCE) == len(trial):
            keep = trial
    augmented = np.column_stack([A, b])
    if np.linalg.matrix_rank(augmented, tol=RANK_TOLERANCE) > len(keep):
        return None
    return A[keep], b[keep]


def _best_vertex(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> Optional[Tuple[float, np.ndarray]]:
    """min c.x over {A x = b, x >= 0} by enumerating bases; None if empty"""
    reduced = _independent_rows(A, b)
    if reduced is None:
        return None
    A, b = reduced
    m, n = A.shape
    best = None
    for basis in itertools.combinations(range(n), m):
        B = A[:, basis]
        if m and abs(np.linalg.det(B)) < RANK_TOLERANCE:
            continue
        x_b = np.linalg.solve(B, b) if m else np.zeros(0)
        if np.any(x_b < -VERTEX_TOLERANCE):
            continue
        x = np.zeros(n)
        x[list(basis)] = np.maximum(x_b, 0.0)
        value = float(c @ x)
        if best is None or value < best[0] - 1e-12:
            best = (value, x)
    return best


def enumerate_vertices(lp: LinearProgram) -> VertexSolution:
    """
    Solve a small LP by brute force over its standard form

    Unboundedness is detected on {A d = 0, 1.d = 1, d >= 0}: the LP is
    unbounded exactly when it is feasible and that polytope has a vertex
    with c.d < 0.
    """
    sf = lp.standard_form()
    found = _best_vertex(sf.A, sf.b, sf.c)
    if found is None:
        return VertexSolution(SimplexStatus.INFEASIBLE)
    m, n = sf.A.shape
    directions = _best_vertex(np.vstack([sf.A, np.ones((1, n))]), np.concatenate([np.zeros(m), [1.0]]), sf.c)
    if directions is not None and directions[0] < -VERTEX_TOLERANCE:
        return VertexSolution(SimplexStatus.UNBOUNDED)
    value, x_std = found
    return VertexSolution(SimplexStatus.OPTIMAL, value, sf.recover(x_std))


def farkas_violation(lp: LinearProgram, ray: np.ndarray) -> float:
    """
    How far y is from certifying infeasibility of {A x = b, x >= 0}

    Returns:
        max(max(A^T y), -b.y); a certificate scores <= 0 up to tolerance
    """
    A = lp.dense()
    return max(float(np.max(A.T @ ray, initial=-np.inf)), -float(lp.rhs @ ray))


def ray_violation(lp: LinearProgram, ray: np.ndarray) -> float:
    """max(|A r|, -min(r), c.r) for an unbounded direction of an equality-form LP"""
    A = lp.dense()
    return max(float(np.max(np.abs(A @ ray), initial=0.0)), -float(np.min(ray)), float(lp.objective @ ray))


def random_lp(rng: np.random.Generator, kind: str = "any") -> LinearProgram:
    """
    Small equality-form LP

    kind 'infeasible' adds a row contradicting another one, 'unbounded'
    adds a free-of-rows column with negative cost.
    """
    m = int(rng.integers(1, 4))
    n = int(rng.integers(m + 1, 7))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    x0 = rng.integers(0, 4, size=n).astype(float)
    b = A @ x0
    c = rng.integers(-3, 10, size=n).astype(float)
    if kind == "infeasible":
        A = np.vstack([A, -A[0]])
        b = np.concatenate([b, [-b[0] + 1.0]])
    elif kind == "unbounded":
        A = np.column_stack([A, np.zeros(A.shape[0])])
        c = np.concatenate([c, [-1.0]])
    elif kind == "bounded":
        c = np.abs(c)
    return LinearProgram.from_dense(c, A, b)


def bellman_ford_distances(net: Network, lengths: np.ndarray, source: int) -> Dict[int, float]:
    """Distances from source on a networkx multigraph of the network"""
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(range(1, net.num_nodes + 1))
    for a, arc in enumerate(net.arcs):
        graph.add_edge(arc.tail, arc.head, key=a, weight=float(lengths[a]))
    return nx.single_source_bellman_ford_path_length(graph, source, weight="weight")


def dijkstra_matches_bellman_ford(net: Network, lengths: np.ndarray, source: int) -> bool:
    dist, _ = dijkstra(net, lengths, source)
    reference = bellman_ford_distances(net, lengths, source)
    for node in range(1, net.num_nodes + 1):
        expected = reference.get(node, math.inf)
        if math.isinf(expected) != math.isinf(dist[node]):
            return False
        if not math.isinf(expected) and abs(expected - dist[node]) > 1e-9 * (1.0 + abs(expected)):
            return False
    return True


def compact_mcnf_optimum(net: Network) -> float:
    outcome = SimplexSolver().solve(compact_lp(net))
    if not outcome.is_optimal:
        raise PDCGMError(f"compact multicommodity LP is {outcome.status.value}")
    return outcome.objective


def dep_optimum(inst: StochasticInstance) -> float:
    outcome = SimplexSolver().solve(deterministic_equivalent(inst))
    if not outcome.is_optimal:
        raise PDCGMError(f"deterministic equivalent is {outcome.status.value}")
    return outcome.objective


def grid_minimum(bowls: QuadraticBowls, weights: np.ndarray, step: float = GRID_STEP) -> float:
    """min over a grid of the box of sum_k weights_k S_k, one coordinate at a time"""
    grid = np.arange(0.0, bowls.box + step / 2, step)
    curvature = weights @ bowls.a
    linear = weights @ bowls.b
    total = 0.0
    for i in range(bowls.dimension):
        total += float(np.min(0.5 * curvature[i] * grid * grid - linear[i] * grid))
    return total


def relative_difference(value: float, reference: float) -> float:
    return abs(value - reference) / (1.0 + abs(reference))


@dataclass
class SuiteReport:
    name: str
    total: int = 0
    passed: int = 0
    failures: List[str] = field(default_factory=list)
    elapsed: float = 0.0
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, label: str, ok: bool, detail: str = ""):
        self.total += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(f"{label}: {detail}" if detail else label)

    def summary(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} passed in {self.elapsed:.2f}s"


def suite_config(application: str, mode: DriverMode = DriverMode.PDCGM) -> DriverConfig:
    degree = 5.0 if application == "tssp" else 10.0
    return DriverConfig(delta=SUITE_DELTA, degree=degree, mode=mode)


def mcnf_suite(count: int = 50, first_seed: int = 0, modes=(DriverMode.PDCGM,)) -> SuiteReport:
    """Column generation against the compact LP on seeded random networks"""
    report = SuiteReport("mcnf-small")
    started = time.perf_counter()
    for seed in range(first_seed, first_seed + count):
        net = small_network(seed)
        reference = compact_mcnf_optimum(net)
        for mode in modes:
            cfg = suite_config("mcnf", mode)
            label = f"seed {seed} ({mode.value})"
            try:
                solution = solve_mcnf(net, cfg)
            except PDCGMError as e:
                report.record(label, False, e.message)
                continue
            diff = relative_difference(solution.objective, reference)
            violations = check_contract(solution.trace, cfg)
            report.record(
                label,
                diff <= OBJECTIVE_TOLERANCE and not violations,
                f"objective {solution.objective:.10g} vs {reference:.10g}; {violations[:1]}",
            )
    report.elapsed = time.perf_counter() - started
    return report


def tssp_suite(count: int = 50, first_seed: int = 0, modes=(DriverMode.PDCGM,)) -> SuiteReport:
    """Column generation against the deterministic equivalent on seeded random instances"""
    report = SuiteReport("tssp-small")
    started = time.perf_counter()
    for seed in range(first_seed, first_seed + count):
        inst = small_stochastic(seed)
        reference = dep_optimum(inst)
        for mode in modes:
            cfg = suite_config("tssp", mode)
            label = f"seed {seed} ({mode.value})"
            try:
                solution = solve_tssp(inst, cfg)
            except PDCGMError as e:
                report.record(label, False, e.message)
                continue
            diff = relative_difference(solution.objective, reference)
            violations = check_contract(solution.trace, cfg)
            report.record(
                label,
                diff <= OBJECTIVE_TOLERANCE and not violations,
                f"objective {solution.objective:.10g} vs {reference:.10g}; {violations[:1]}",
            )
    report.elapsed = time.perf_counter() - started
    return report


def simplex_suite(count: int = 100, seed: int = 0) -> SuiteReport:
    """Simplex against vertex enumeration, with certificate checks"""
    report = SuiteReport("simplex")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    kinds = ("any", "bounded", "infeasible", "unbounded")
    solver = SimplexSolver()
    for t in range(count):
        kind = kinds[t % len(kinds)]
        lp = random_lp(rng, kind)
        outcome = solver.solve(lp)
        reference = enumerate_vertices(lp)
        label = f"lp {t} ({kind})"
        if outcome.status is not reference.status:
            report.record(label, False, f"simplex {outcome.status.value}, enumeration {reference.status.value}")
        elif outcome.status is SimplexStatus.OPTIMAL:
            diff = abs(outcome.objective - reference.objective)
            report.record(label, diff <= SIMPLEX_TOLERANCE * (1.0 + abs(reference.objective)), f"|diff| {diff:.3e}")
        elif outcome.status is SimplexStatus.INFEASIBLE:
            violation = farkas_violation(lp, outcome.ray)
            report.record(label, _farkas_ok(lp, outcome.ray), f"Farkas {violation:.3e}")
        else:
            violation = ray_violation(lp, outcome.ray)
            report.record(label, _ray_ok(lp, outcome.ray), f"ray {violation:.3e}")
    report.elapsed = time.perf_counter() - started
    return report


def _farkas_ok(lp: LinearProgram, y: np.ndarray) -> bool:
    A = lp.dense()
    return bool(np.all(A.T @ y <= SIMPLEX_TOLERANCE) and lp.rhs @ y > SIMPLEX_TOLERANCE)


def _ray_ok(lp: LinearProgram, r: np.ndarray) -> bool:
    A = lp.dense()
    equal = np.array([kind is RowKind.EQUAL for kind in lp.row_kinds])
    activity = A @ r
    return bool(
        np.all(np.abs(activity[equal]) <= SIMPLEX_TOLERANCE)
        and np.all(activity[~equal] <= SIMPLEX_TOLERANCE)
        and np.all(r >= -SIMPLEX_TOLERANCE)
        and lp.objective @ r < 0.0
    )


def dijkstra_suite(count: int = 100, seed: int = 0) -> SuiteReport:
    """Dijkstra against networkx Bellman-Ford on random networks"""
    report = SuiteReport("dijkstra")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    for t in range(count):
        nodes = int(rng.integers(2, 13))
        arcs = int(rng.integers(nodes, 4 * nodes + 1))
        net = random_network(int(rng.integers(0, 2**31)), nodes, arcs, 1)
        lengths = rng.integers(0, 21, size=net.num_arcs) / 2.0
        source = int(rng.integers(1, nodes + 1))
        report.record(f"graph {t}", dijkstra_matches_bellman_ford(net, lengths, source))
    report.elapsed = time.perf_counter() - started
    return report


def quadratic_suite(count: int = 20, seed: int = 0) -> SuiteReport:
    """Closed-form bowl minimiser against grid search"""
    report = SuiteReport("quadratic")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    for t in range(count):
        K = int(rng.integers(1, 4))
        N = int(rng.integers(1, 4))
        bowls = QuadraticBowls(
            a=rng.integers(1, 31, size=(K, N)) / 10.0,
            b=rng.integers(-20, 41, size=(K, N)) / 10.0,
            box=float(rng.integers(5, 31)) / 10.0,
        )
        weights = rng.integers(1, 10, size=K).astype(float)
        weights /= weights.sum()
        alpha = bowls.minimizer(weights)
        closed = float(weights @ bowls.values(alpha))
        grid = grid_minimum(bowls, weights)
        report.record(f"case {t}", abs(closed - grid) <= GRID_TOLERANCE and closed <= grid + 1e-12,
                      f"closed form {closed:.6f}, grid {grid:.6f}")
    report.elapsed = time.perf_counter() - started
    return report


def mode_agreement(count: int = 50) -> SuiteReport:
    """Both driver modes on the random suites; notes carry the outer-iteration ratios"""
    report = SuiteReport("modes")
    started = time.perf_counter()
    ratios = []
    for seed in range(count):
        for kind, instance, solve, degree in (
            ("mcnf", small_network(seed), solve_mcnf, 10.0),
            ("tssp", small_stochastic(seed), solve_tssp, 5.0),
        ):
            label = f"{kind} seed {seed}"
            runs = {}
            try:
                for mode in (DriverMode.PDCGM, DriverMode.STANDARD):
                    cfg = DriverConfig(delta=SUITE_DELTA, degree=degree, mode=mode)
                    runs[mode] = solve(instance, cfg)
            except PDCGMError as e:
                report.record(label, False, f"{mode.value}: {e.message}")
                continue
            pd, std = runs[DriverMode.PDCGM], runs[DriverMode.STANDARD]
            tolerance = 1e-5 * (1.0 + abs(std.objective))
            report.record(label, abs(pd.objective - std.objective) <= tolerance,
                          f"{pd.objective:.10g} vs {std.objective:.10g}")
            ratios.append(len(pd.trace) / len(std.trace))
    if ratios:
        report.notes.append(f"median outer-iteration ratio pdcgm/standard {float(np.median(ratios)):.3f}")
    report.elapsed = time.perf_counter() - started
    return report


SUITES: Dict[str, Callable[[], SuiteReport]] = {
    "mcnf-small": mcnf_suite,
    "tssp-small": tssp_suite,
    "simplex": simplex_suite,
    "dijkstra": dijkstra_suite,
    "quadratic": quadratic_suite,
    "modes": mode_agreement,
}
