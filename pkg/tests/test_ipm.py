import numpy as np
import pytest

from pdcgm.colgen.oracle import minimax_master, quadratic_column
from pdcgm.exceptions import DimensionMismatch
from pdcgm.lp import (
    InteriorPointSolver,
    LinearProgram,
    SimplexSolver,
    SimplexStatus,
    VarKind,
    primal_dual_objectives,
    relative_gap,
    solve_to_gap,
)
from pdcgm.verify import enumerate_vertices, random_lp


def test_equality_program_to_tight_gap():
    lp = LinearProgram.from_dense([1.0, 2.0], [[1.0, 1.0]], [1.0])
    point = solve_to_gap(lp, 1e-8)
    assert point.primal_objective == pytest.approx(1.0, abs=1e-6)
    assert point.rel_gap <= 1e-8
    assert point.centered
    assert point.is_centered(0.1)
    np.testing.assert_allclose(point.primal, [1.0, 0.0], atol=1e-6)


def test_inequality_rows(le_program):
    point = InteriorPointSolver().solve(le_program, 1e-9)
    assert point.primal_objective == pytest.approx(-2.8, abs=1e-6)
    np.testing.assert_allclose(point.primal, [1.6, 1.2], atol=1e-5)
    # duals of less-equal rows are nonpositive in a min problem
    assert np.all(point.duals <= 1e-8)


def test_loose_gap_is_respected_and_centred(le_program):
    point = InteriorPointSolver(gamma=0.1).solve(le_program, 0.5)
    assert 0.0 <= point.rel_gap <= 0.5
    assert point.is_centered(0.1)
    pobj, dobj = primal_dual_objectives(le_program, point)
    assert dobj <= -2.8 + 1e-6 <= pobj + 2e-6


def test_free_variables():
    # t free, t - x1 = 1, t + x2 = 3: every t in [1, 3] costs 2
    lp = LinearProgram.from_dense(
        [0.0, 1.0, 1.0],
        [[1.0, -1.0, 0.0], [1.0, 0.0, 1.0]],
        [1.0, 3.0],
        var_kinds=[VarKind.FREE, VarKind.NONNEGATIVE, VarKind.NONNEGATIVE],
    )
    point = solve_to_gap(lp, 1e-8)
    assert point.primal_objective == pytest.approx(2.0, abs=1e-6)
    assert 1.0 - 1e-6 <= point.primal[0] <= 3.0 + 1e-6


def test_warm_start_with_appended_column():
    lp = LinearProgram.from_dense([1.0, 2.0], [[1.0, 1.0]], [1.0])
    first = solve_to_gap(lp, 1e-3)
    grown = LinearProgram.from_dense([1.0, 2.0, 0.5], [[1.0, 1.0, 1.0]], [1.0])
    point = solve_to_gap(grown, 1e-8, warm=first)
    assert point.warm_started
    assert point.primal_objective == pytest.approx(0.5, abs=1e-6)


def test_incompatible_warm_point_starts_cold(le_program):
    other = LinearProgram.from_dense([1.0, 2.0], [[1.0, 1.0]], [1.0])
    warm = solve_to_gap(other, 1e-3)
    point = solve_to_gap(le_program, 1e-8, warm=warm)
    assert not point.warm_started
    assert point.primal_objective == pytest.approx(-2.8, abs=1e-6)


@pytest.mark.parametrize("eps", [0.0, -1e-3, 1.5])
def test_rejects_bad_tolerance(le_program, eps):
    with pytest.raises(ValueError):
        InteriorPointSolver().solve(le_program, eps)


def test_rejects_bad_gamma():
    with pytest.raises(ValueError):
        InteriorPointSolver(gamma=1.0)


def test_objectives_check_dimensions(le_program):
    point = solve_to_gap(LinearProgram.from_dense([1.0, 2.0], [[1.0, 1.0]], [1.0]), 1e-3)
    with pytest.raises(DimensionMismatch):
        primal_dual_objectives(le_program, point)


def minimax_lp(bowls, alphas):
    master = minimax_master(bowls)
    master.add_columns([quadratic_column(bowls, np.array([alpha])) for alpha in alphas])
    return master.compile()


@pytest.mark.parametrize("eps", [0.5, 1e-3, 1e-8])
def test_free_column_is_not_split(two_bowls, eps):
    lp = minimax_lp(two_bowls, [0.5, 1.0, 2.0])
    point = InteriorPointSolver(gamma=0.1).solve(lp, eps)
    assert point.centered
    assert point.is_centered(0.1)
    low, high = point.centrality_range()
    assert 0.1 * (1.0 - 1e-9) <= low <= high <= 10.0 * (1.0 + 1e-9)
    # rho has no dual slack: three lambdas and two row slacks remain
    assert len(point.primal) == 4
    assert len(point.slacks) == 5
    optimum = SimplexSolver().solve(lp).objective
    assert optimum == pytest.approx(-0.5)
    assert point.dual_objective <= optimum + 1e-6
    assert point.primal_objective >= optimum - 1e-6
    assert point.rel_gap <= eps


def test_reported_gap_is_the_true_gap(le_program):
    point = InteriorPointSolver(gamma=0.1).solve(le_program, 0.5)
    assert point.rel_gap == pytest.approx(relative_gap(point.primal_objective, point.dual_objective), abs=1e-12)


def test_agrees_with_vertex_enumeration_and_simplex():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(20):
        drawn = random_lp(rng, "bounded")
        A = drawn.dense()
        # positive costs keep the optimum away from zero unless b is
        if not np.any(drawn.rhs) or np.linalg.matrix_rank(A) < A.shape[0]:
            continue
        lp = LinearProgram.from_dense(drawn.objective + 1.0, A, drawn.rhs)
        reference = enumerate_vertices(lp)
        assert reference.status is SimplexStatus.OPTIMAL
        point = solve_to_gap(lp, 1e-9)
        assert point.primal_objective == pytest.approx(reference.objective, rel=1e-6, abs=1e-6)
        assert SimplexSolver().solve(lp).objective == pytest.approx(reference.objective, rel=1e-6, abs=1e-6)
        checked += 1
    assert checked >= 10
