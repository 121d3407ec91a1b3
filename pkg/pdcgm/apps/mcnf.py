"""
Linear multicommodity network flow.

The disaggregated master has one convexity row per commodity and one
capacity row per arc; columns are commodity paths carrying the full demand.
Pricing is a Dijkstra shortest path per commodity on the lengths
t_a - u_a, where u_a <= 0 is the dual of the capacity row of arc a (zero for
rows outside the active set). Capacity rows start inactive and enter the
master only once the recombined flow violates them.
"""
import heapq
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
import scipy.sparse as sps

from pdcgm.colgen.driver import run
from pdcgm.colgen.master import ColumnValues, RestrictedMaster
from pdcgm.colgen.models import (
    Column,
    ColumnGenerationResult,
    ColumnKind,
    ColumnOrigin,
    DriverConfig,
    DualPoint,
    LinkingKind,
    LinkingRow,
    OracleResult,
    Sense,
)
from pdcgm.colgen.oracle import collect, map_subproblems, subproblem_result
from pdcgm.constants import ACTIVE_SET_GAMMA, CAPACITY_TOLERANCE, PATH_ARTIFICIAL_FACTOR
from pdcgm.exceptions import InvalidInstance, NegativeLength, Unreachable
from pdcgm.lp import LinearProgram, RowKind, VarKind

logger = logging.getLogger(__name__)

# Capacity duals come from an interior point solve and may sit a residual above zero
LENGTH_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    cost: float
    capacity: float


@dataclass(frozen=True)
class Commodity:
    source: int
    sink: int
    demand: float


@dataclass(eq=False)
class Network:
    """Directed network with 1-based node ids, arc costs/capacities and commodities"""
    num_nodes: int
    arcs: List[Arc]
    commodities: List[Commodity]
    name: str = ""
    _out: List[List[int]] = field(init=False, repr=False)

    def __post_init__(self):
        self.arcs = list(self.arcs)
        self.commodities = list(self.commodities)
        if self.num_nodes < 1:
            raise InvalidInstance(f"network needs at least one node, got {self.num_nodes}")
        for a, arc in enumerate(self.arcs):
            if not (1 <= arc.tail <= self.num_nodes and 1 <= arc.head <= self.num_nodes):
                raise InvalidInstance(f"arc {a} joins {arc.tail}->{arc.head}, nodes are 1..{self.num_nodes}")
            if arc.tail == arc.head:
                raise InvalidInstance(f"arc {a} is a self-loop at node {arc.tail}")
            if not (np.isfinite(arc.cost) and arc.cost >= 0):
                raise InvalidInstance(f"arc {a} has cost {arc.cost}, costs must be nonnegative")
            if not (np.isfinite(arc.capacity) and arc.capacity > 0):
                raise InvalidInstance(f"arc {a} has capacity {arc.capacity}, capacities must be positive")
        for k, com in enumerate(self.commodities):
            if not (1 <= com.source <= self.num_nodes and 1 <= com.sink <= self.num_nodes):
                raise InvalidInstance(f"commodity {k} runs {com.source}->{com.sink}, nodes are 1..{self.num_nodes}")
            if com.source == com.sink:
                raise InvalidInstance(f"commodity {k} has the same source and sink {com.source}")
            if not (np.isfinite(com.demand) and com.demand > 0):
                raise InvalidInstance(f"commodity {k} has demand {com.demand}, demands must be positive")

        self._out = [[] for _ in range(self.num_nodes + 1)]
        for a, arc in enumerate(self.arcs):
            self._out[arc.tail].append(a)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @property
    def num_commodities(self) -> int:
        return len(self.commodities)

    @property
    def costs(self) -> np.ndarray:
        return np.array([arc.cost for arc in self.arcs], dtype=float)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([arc.capacity for arc in self.arcs], dtype=float)

    def out_arcs(self, node: int) -> List[int]:
        return self._out[node]


@dataclass
class ActiveSet:
    """Arcs whose capacity rows are in the restricted master"""
    active: Set[int] = field(default_factory=set)
    gamma_act: float = ACTIVE_SET_GAMMA


def dijkstra(net: Network, lengths: np.ndarray, source: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Shortest path tree from source on nonnegative arc lengths

    Equal-length labels keep the predecessor with the lowest node index, and
    among parallel arcs the lowest arc index, so trees are deterministic.

    Returns:
        (distance per node, predecessor arc per node or -1), indexed by node id
    """
    n = net.num_nodes
    dist = np.full(n + 1, np.inf)
    pred = np.full(n + 1, -1, dtype=int)
    settled = np.zeros(n + 1, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        for a in net.out_arcs(u):
            v = net.arcs[a].head
            if settled[v]:
                continue
            nd = d + lengths[a]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = a
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and _before(net, a, pred[v]):
                pred[v] = a
    return dist, pred


def _before(net: Network, a: int, b: int) -> bool:
    if b < 0:
        return True
    return (net.arcs[a].tail, a) < (net.arcs[b].tail, b)


def trace_path(net: Network, pred: np.ndarray, source: int, sink: int) -> List[int]:
    """Arc indices from source to sink along a predecessor tree"""
    path = []
    node = sink
    while node != source:
        a = pred[node]
        if a < 0:
            raise Unreachable(f"node {sink} is not reachable from node {source}")
        path.append(int(a))
        node = net.arcs[a].tail
    path.reverse()
    return path


def reduced_lengths(net: Network, arc_duals: np.ndarray) -> np.ndarray:
    """t_a - u_a, raising on negative lengths"""
    lengths = net.costs - arc_duals
    worst = int(np.argmin(lengths)) if len(lengths) else -1
    if worst >= 0 and lengths[worst] < -LENGTH_TOLERANCE:
        raise NegativeLength(f"arc {worst} has reduced length {lengths[worst]:.3e}")
    return np.maximum(lengths, 0.0)


def shortest_paths(net: Network, lengths: np.ndarray, workers: int = 1) -> List[List[int]]:
    """Shortest path (arc list) for every commodity; one tree per distinct source"""
    sources = sorted({com.source for com in net.commodities})
    trees = map_subproblems(lambda i: dijkstra(net, lengths, sources[i])[1], len(sources), workers)
    pred_of = dict(zip(sources, trees))
    return [trace_path(net, pred_of[com.source], com.source, com.sink) for com in net.commodities]


def path_column(net: Network, k: int, path: Sequence[int], iteration: int = 0) -> Column:
    """Column sending the demand of commodity k along path"""
    demand = net.commodities[k].demand
    return Column(
        cost=demand * sum(net.arcs[a].cost for a in path),
        entries={a: demand for a in path},
        convexity_row=k,
        origin=ColumnOrigin(oracle="shortest_path", kind=ColumnKind.POINT, iteration=iteration, subproblem=k),
        point=np.asarray(path, dtype=int),
    )


def shortest_path_price(net: Network, duals: DualPoint, workers: int = 1, iteration: int = 0) -> OracleResult:
    """
    Price every commodity at the given duals

    Raises:
        NegativeLength: a capacity dual is positive enough to make a length negative
        Unreachable: a sink cannot be reached from its source
    """
    lengths = reduced_lengths(net, duals.dense_linking(net.num_arcs))
    paths = shortest_paths(net, lengths, workers)
    results = []
    for k, path in enumerate(paths):
        value = net.commodities[k].demand * float(np.sum(lengths[path])) - duals.convexity_duals[k]
        results.append(subproblem_result(k, ColumnKind.POINT, value, path_column(net, k, path, iteration)))
    return collect(results)


class ShortestPathOracle:
    """PricingOracle for the multicommodity flow master"""
    name = "shortest_path"

    def __init__(self, net: Network, workers: int = 1):
        self.net = net
        self.workers = workers

    def price(self, duals: DualPoint, iteration: int = 0) -> OracleResult:
        return shortest_path_price(self.net, duals, self.workers, iteration)


def update_active_set(net: Network, aset: ActiveSet, flows: np.ndarray) -> Tuple[Set[int], Set[int]]:
    """
    Activate violated capacity rows and drop slack ones

    Returns:
        (added, removed) arc indices; aset is updated in place
    """
    capacities = net.capacities
    added = {a for a in range(net.num_arcs)
             if a not in aset.active and flows[a] > capacities[a] + CAPACITY_TOLERANCE}
    removed = {a for a in aset.active if flows[a] < aset.gamma_act * capacities[a]}
    aset.active |= added
    aset.active -= removed
    return added, removed


class ActiveSetManager:
    """RowManager keeping the master's capacity rows equal to the active set"""

    def __init__(self, net: Network, aset: ActiveSet):
        self.net = net
        self.aset = aset

    def update(self, rm: RestrictedMaster, values: ColumnValues) -> Tuple[Set[int], Set[int]]:
        flows = rm.linking_activity(values.weights)
        added, removed = update_active_set(self.net, self.aset, flows)
        rm.set_active(added, True)
        rm.set_active(removed, False)
        if added or removed:
            logger.info(
                f"Active set: +{len(added)} -{len(removed)} arcs, "
                f"{len(self.aset.active)}/{self.net.num_arcs} active"
            )
        return added, removed


def compact_lp(net: Network) -> LinearProgram:
    """
    Node-arc formulation: x[k, a] >= 0 with flow conservation per commodity
    and node, and a shared capacity row per arc
    """
    m, K, n = net.num_arcs, net.num_commodities, net.num_nodes
    rows, cols, vals = [], [], []
    rhs = []
    for k, com in enumerate(net.commodities):
        for node in range(1, n + 1):
            supply = com.demand if node == com.source else (-com.demand if node == com.sink else 0.0)
            rhs.append(supply)
        for a, arc in enumerate(net.arcs):
            var = k * m + a
            rows += [k * n + arc.tail - 1, k * n + arc.head - 1]
            cols += [var, var]
            vals += [1.0, -1.0]
    for a in range(m):
        for k in range(K):
            rows.append(K * n + a)
            cols.append(k * m + a)
            vals.append(1.0)
    rhs.extend(net.capacities)
    matrix = sps.csr_matrix((vals, (rows, cols)), shape=(K * n + m, K * m))
    kinds = [RowKind.EQUAL] * (K * n) + [RowKind.LESS_EQUAL] * m
    return LinearProgram(np.tile(net.costs, K), matrix, tuple(kinds), np.asarray(rhs), (VarKind.NONNEGATIVE,) * (K * m))


@dataclass(eq=False)
class MCNFSolution:
    objective: float
    flows: np.ndarray  # per arc, summed over commodities
    commodity_flows: np.ndarray  # commodities x arcs
    result: ColumnGenerationResult
    active: Set[int]
    master: RestrictedMaster

    @property
    def trace(self):
        return self.result.trace

    @property
    def active_fraction(self) -> float:
        return len(self.active) / max(1, self.flows.shape[0])


def mcnf_master(net: Network) -> RestrictedMaster:
    """
    Disaggregated master with every capacity row present but inactive

    Each commodity also gets a penalised artificial column so the master
    stays feasible when a newly activated row cuts off every pooled path.
    Its cost exceeds the cost of routing the demand along every arc at once,
    so it stays above any path column whatever the scale of the data.
    """
    rows = [LinkingRow(kind=LinkingKind.LESS_EQUAL, rhs=arc.capacity, active=False, name=f"cap{a}")
            for a, arc in enumerate(net.arcs)]
    total = float(np.sum(net.costs))
    penalties = [PATH_ARTIFICIAL_FACTOR * com.demand * total + 1.0 for com in net.commodities]
    return RestrictedMaster(Sense.MIN, rows, num_convexity=net.num_commodities, artificial=True,
                            artificial_costs=penalties, name=net.name or "mcnf")


def solve_mcnf(net: Network, cfg: DriverConfig, aset: Optional[ActiveSet] = None) -> MCNFSolution:
    """
    Solve the multicommodity flow problem by column generation

    Initial columns are the shortest paths at zero capacity duals.
    """
    master = mcnf_master(net)
    aset = aset if aset is not None else ActiveSet()
    master.set_active(aset.active, True)
    initial = shortest_paths(net, reduced_lengths(net, np.zeros(net.num_arcs)), cfg.workers)
    master.add_columns(path_column(net, k, path) for k, path in enumerate(initial))
    logger.info(
        f"MCNF {net.name or ''}: {net.num_nodes} nodes, {net.num_arcs} arcs, {net.num_commodities} commodities"
    )

    result = run(master, ShortestPathOracle(net, cfg.workers), cfg, ActiveSetManager(net, aset))

    commodity_flows = np.zeros((net.num_commodities, net.num_arcs))
    for column, weight in zip(master.columns, result.weights):
        for a, value in column.entries.items():
            commodity_flows[column.convexity_row, a] += weight * value
    return MCNFSolution(
        objective=result.objective,
        flows=commodity_flows.sum(axis=0),
        commodity_flows=commodity_flows,
        result=result,
        active=set(aset.active),
        master=master,
    )


def node_balance(net: Network, commodity_flows: np.ndarray) -> np.ndarray:
    """Outflow minus inflow per commodity and node (commodities x nodes)"""
    balance = np.zeros((net.num_commodities, net.num_nodes))
    for a, arc in enumerate(net.arcs):
        balance[:, arc.tail - 1] += commodity_flows[:, a]
        balance[:, arc.head - 1] -= commodity_flows[:, a]
    return balance


def supplies(net: Network) -> np.ndarray:
    """Required node balance per commodity (commodities x nodes)"""
    b = np.zeros((net.num_commodities, net.num_nodes))
    for k, com in enumerate(net.commodities):
        b[k, com.source - 1] = com.demand
        b[k, com.sink - 1] = -com.demand
    return b
