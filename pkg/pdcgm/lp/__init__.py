from pdcgm.lp.models import (
    LinearProgram,
    PrimalDualPoint,
    RowKind,
    SimplexOutcome,
    SimplexStatus,
    StandardForm,
    VarKind,
    relative_gap,
)
from pdcgm.lp.ipm import InteriorPointSolver, primal_dual_objectives, solve_to_gap
from pdcgm.lp.simplex import SimplexSolver
from pdcgm.lp import simplex

__all__ = [
    'LinearProgram',
    'PrimalDualPoint',
    'RowKind',
    'SimplexOutcome',
    'SimplexStatus',
    'StandardForm',
    'VarKind',
    'relative_gap',
    'InteriorPointSolver',
    'primal_dual_objectives',
    'solve_to_gap',
    'SimplexSolver',
    'simplex',
]
