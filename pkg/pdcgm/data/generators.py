"""
Seeded random instances.

Every number is drawn as an integer from numpy's default generator and
divided by a fixed power of ten, so the same seed gives the same instance
on every platform. Derived right-hand sides are summed in integers before
the division.
"""
import logging
from typing import Optional

import numpy as np

from pdcgm.apps.mcnf import Arc, Commodity, Network
from pdcgm.apps.tssp import Scenario, StochasticInstance

logger = logging.getLogger(__name__)


def random_network(
    seed: int,
    nodes: int = 8,
    arcs: int = 20,
    commodities: int = 4,
    name: Optional[str] = None,
) -> Network:
    """
    Strongly connected random network with a feasible multicommodity flow

    A Hamiltonian cycle in random node order carries enough capacity for
    every demand at once; the remaining arcs are random with tighter
    capacities, so some of them bind.
    """
    if nodes < 2 or arcs < nodes:
        raise ValueError(f"need at least 2 nodes and as many arcs as nodes, got {nodes} nodes and {arcs} arcs")
    rng = np.random.default_rng(seed)
    demands = rng.integers(10, 101, size=commodities) / 10.0
    total = float(np.sum(demands))

    order = rng.permutation(nodes) + 1
    pairs = [(int(order[i]), int(order[(i + 1) % nodes])) for i in range(nodes)]
    cycle_costs = rng.integers(50, 201, size=nodes) / 10.0
    arc_list = [Arc(t, h, float(c), total) for (t, h), c in zip(pairs, cycle_costs)]

    while len(arc_list) < arcs:
        tail, head = (int(v) + 1 for v in rng.integers(0, nodes, size=2))
        if tail == head:
            continue
        cost = rng.integers(10, 101) / 10.0
        capacity = rng.integers(20, 121) / 10.0
        arc_list.append(Arc(tail, head, float(cost), float(capacity)))

    commodity_list = []
    for k in range(commodities):
        source, sink = (int(v) + 1 for v in rng.choice(nodes, size=2, replace=False))
        commodity_list.append(Commodity(source, sink, float(demands[k])))
    return Network(nodes, arc_list, commodity_list, name=name or f"mcnf-{seed}")


def random_stochastic(
    seed: int,
    first: int = 4,
    first_rows: int = 2,
    second: int = 6,
    second_rows: int = 3,
    scenarios: int = 5,
    name: Optional[str] = None,
) -> StochasticInstance:
    """
    Random two-stage instance with a finite optimum

    Costs c, q are nonnegative, so the recourse is bounded and theta = 0 is
    always dual feasible; right-hand sides come from a random nonnegative
    solution, so the deterministic equivalent is feasible.
    """
    rng = np.random.default_rng(seed)
    c = rng.integers(0, 101, size=first) / 10.0
    A_tenths = rng.integers(-20, 21, size=(first_rows, first))
    x0_tenths = rng.integers(0, 31, size=first)
    A = A_tenths / 10.0
    b = (A_tenths @ x0_tenths) / 100.0

    weights = rng.integers(1, 10, size=scenarios)
    probabilities = weights / weights.sum()
    W_tenths = rng.integers(-20, 21, size=(second_rows, second))
    W = W_tenths / 10.0
    scenario_list = []
    for i in range(scenarios):
        q = rng.integers(0, 101, size=second) / 10.0
        T_tenths = rng.integers(-20, 21, size=(second_rows, first))
        y0_tenths = rng.integers(0, 31, size=second)
        T = T_tenths / 10.0
        h = (T_tenths @ x0_tenths + W_tenths @ y0_tenths) / 100.0
        scenario_list.append(Scenario(p=float(probabilities[i]), q=q, T=T, W=W.copy(), h=h))
    return StochasticInstance(c, A, b, scenario_list, name=name or f"tssp-{seed}")


def small_network(seed: int) -> Network:
    """Network within n <= 10, m <= 30, K <= 5, sizes drawn from the seed"""
    rng = np.random.default_rng(seed)
    nodes = int(rng.integers(3, 11))
    arcs = int(rng.integers(nodes, min(30, 3 * nodes) + 1))
    commodities = int(rng.integers(1, 6))
    return random_network(seed, nodes, arcs, commodities)


def small_stochastic(seed: int) -> StochasticInstance:
    """Instance within n <= 6, m <= 4, second stage <= 5 x 8, at most 10 scenarios"""
    rng = np.random.default_rng(seed)
    first = int(rng.integers(1, 7))
    first_rows = int(rng.integers(0, min(4, first) + 1))
    second_rows = int(rng.integers(1, 6))
    second = int(rng.integers(second_rows, 9))
    scenarios = int(rng.integers(1, 11))
    return random_stochastic(seed, first, first_rows, second, second_rows, scenarios)
