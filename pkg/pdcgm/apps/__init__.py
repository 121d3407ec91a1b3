from pdcgm.apps.mcnf import (
    ActiveSet,
    Arc,
    Commodity,
    MCNFSolution,
    Network,
    ShortestPathOracle,
    compact_lp,
    shortest_path_price,
    solve_mcnf,
    update_active_set,
)
from pdcgm.apps.tssp import (
    Scenario,
    ScenarioDualResult,
    ScenarioOracle,
    StochasticInstance,
    TSSPSolution,
    aggregate_column,
    deterministic_equivalent,
    expected_value_problem,
    scenario_price,
    solve_tssp,
)

__all__ = [
    'ActiveSet',
    'Arc',
    'Commodity',
    'MCNFSolution',
    'Network',
    'ShortestPathOracle',
    'compact_lp',
    'shortest_path_price',
    'solve_mcnf',
    'update_active_set',
    'Scenario',
    'ScenarioDualResult',
    'ScenarioOracle',
    'StochasticInstance',
    'TSSPSolution',
    'aggregate_column',
    'deterministic_equivalent',
    'expected_value_problem',
    'scenario_price',
    'solve_tssp',
]
