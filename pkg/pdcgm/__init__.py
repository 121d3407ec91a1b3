from pdcgm.constants import APP_VERSION
from pdcgm.colgen import (
    Column,
    ColumnGenerationResult,
    DriverConfig,
    DriverMode,
    DualPoint,
    RestrictedMaster,
    RowManager,
    check_contract,
    run,
    solve_minimax,
)
from pdcgm.apps import solve_mcnf, solve_tssp

__version__ = APP_VERSION

__all__ = [
    'Column',
    'ColumnGenerationResult',
    'DriverConfig',
    'DriverMode',
    'DualPoint',
    'RestrictedMaster',
    'RowManager',
    'check_contract',
    'run',
    'solve_minimax',
    'solve_mcnf',
    'solve_tssp',
]
