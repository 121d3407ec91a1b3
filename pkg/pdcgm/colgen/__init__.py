from pdcgm.colgen.models import (
    Column,
    ColumnGenerationResult,
    ColumnKind,
    ColumnOrigin,
    DriverConfig,
    DriverMode,
    DualPoint,
    FreeBlock,
    IterationRecord,
    LinkingKind,
    LinkingRow,
    OracleResult,
    Sense,
    SubproblemResult,
)
from pdcgm.colgen.master import ColumnValues, RestrictedMaster, reduced_cost
from pdcgm.colgen.driver import RowManager, check_contract, lower_bound_update, run, write_trace
from pdcgm.colgen.oracle import (
    PricingOracle,
    QuadraticBowls,
    QuadraticOracle,
    map_subproblems,
    quad_oracle_price,
    solve_minimax,
)

__all__ = [
    'Column',
    'ColumnGenerationResult',
    'ColumnKind',
    'ColumnOrigin',
    'DriverConfig',
    'DriverMode',
    'DualPoint',
    'FreeBlock',
    'IterationRecord',
    'LinkingKind',
    'LinkingRow',
    'OracleResult',
    'Sense',
    'SubproblemResult',
    'ColumnValues',
    'RestrictedMaster',
    'reduced_cost',
    'RowManager',
    'check_contract',
    'lower_bound_update',
    'run',
    'write_trace',
    'PricingOracle',
    'QuadraticBowls',
    'QuadraticOracle',
    'map_subproblems',
    'quad_oracle_price',
    'solve_minimax',
]
