import numpy as np
import pytest

from pdcgm.colgen.master import RestrictedMaster, reduced_cost
from pdcgm.colgen.models import (
    Column,
    ColumnKind,
    ColumnOrigin,
    DualPoint,
    FreeBlock,
    LinkingKind,
    LinkingRow,
    Sense,
)
from pdcgm.constants import ARTIFICIAL_COST
from pdcgm.exceptions import DimensionMismatch, EmptyMaster
from pdcgm.lp import RowKind, VarKind, solve_to_gap


def point_column(cost, entries, row=0):
    return Column(cost, entries, row, ColumnOrigin("test", ColumnKind.POINT))


def ray_column(cost, entries):
    return Column(cost, entries, None, ColumnOrigin("test", ColumnKind.RAY))


@pytest.fixture
def small_master():
    """min l1 + 3 l2 s.t. 2 l1 <= 1, l1 + l2 = 1; optimum 2 with duals u = -1, v = 3"""
    rm = RestrictedMaster(Sense.MIN, [LinkingRow(LinkingKind.LESS_EQUAL, 1.0)], num_convexity=1)
    rm.add_columns([point_column(1.0, {0: 2.0}), point_column(3.0, {})])
    return rm


def test_compile_layout(small_master):
    lp = small_master.compile()
    assert lp.row_kinds == (RowKind.LESS_EQUAL, RowKind.EQUAL)
    np.testing.assert_array_equal(lp.rhs, [1.0, 1.0])
    np.testing.assert_array_equal(lp.objective, [1.0, 3.0])
    np.testing.assert_array_equal(lp.dense(), [[2.0, 0.0], [1.0, 1.0]])


def test_greater_equal_rows_and_max_sense_are_negated():
    rm = RestrictedMaster(Sense.MAX, [LinkingRow(LinkingKind.GREATER_EQUAL, 2.0)], num_convexity=1)
    rm.add_columns([point_column(5.0, {0: 4.0})])
    lp = rm.compile()
    assert lp.row_kinds == (RowKind.LESS_EQUAL, RowKind.EQUAL)
    np.testing.assert_array_equal(lp.rhs, [-2.0, 1.0])
    np.testing.assert_array_equal(lp.dense()[:, 0], [-4.0, 1.0])
    np.testing.assert_array_equal(lp.objective, [-5.0])


def test_variable_order_and_prefix():
    eta = FreeBlock(costs=[7.0], entries=[[1.0]])
    rm = RestrictedMaster(Sense.MIN, [LinkingRow(LinkingKind.EQUAL, 0.0)], num_convexity=2,
                          free_block=eta, artificial=True)
    rm.add_columns([point_column(1.0, {0: 1.0}, row=1)])
    before = rm.compile()
    rm.add_columns([point_column(2.0, {0: -1.0}, row=0)])
    after = rm.compile()
    assert before.var_kinds == (VarKind.FREE, VarKind.NONNEGATIVE, VarKind.NONNEGATIVE, VarKind.NONNEGATIVE)
    np.testing.assert_array_equal(before.objective, [7.0, ARTIFICIAL_COST, ARTIFICIAL_COST, 1.0])
    np.testing.assert_array_equal(after.objective[:before.num_vars], before.objective)
    np.testing.assert_array_equal(after.dense()[:, :before.num_vars], before.dense())


def test_solution_duals_and_reduced_costs(small_master):
    lp = small_master.compile()
    point = solve_to_gap(lp, 1e-9)
    upper, lower = small_master.bounds(point)
    assert upper == pytest.approx(2.0, abs=1e-6)
    assert lower <= upper
    duals = small_master.dual_point(point)
    np.testing.assert_allclose(duals.linking_duals, [-1.0], atol=1e-5)
    np.testing.assert_allclose(duals.convexity_duals, [3.0], atol=1e-5)
    for column in small_master.columns:
        assert reduced_cost(column, duals, Sense.MIN) >= -1e-6
    values = small_master.column_values(point)
    np.testing.assert_allclose(values.weights, [0.5, 0.5], atol=1e-6)
    assert values.artificial_mass == 0.0
    np.testing.assert_allclose(small_master.linking_activity(values.weights), [1.0], atol=1e-6)


def test_max_sense_bounds_are_ordered():
    rm = RestrictedMaster(Sense.MAX, [], num_convexity=1)
    rm.add_columns([point_column(2.0, {}), point_column(1.0, {})])
    point = solve_to_gap(rm.compile(), 1e-3)
    upper, lower = rm.bounds(point)
    primal, dual = rm.min_bounds(point)
    assert (upper, lower) == (-dual, -primal)
    assert lower <= 2.0 + 1e-9 <= upper + 2e-9
    assert rm.dual_point(point).convexity_duals[0] > 0


def test_duplicates_are_rejected(small_master):
    assert small_master.add_columns([point_column(1.0, {0: 2.0})]) == 0
    assert small_master.duplicates_rejected == 1
    assert small_master.add_columns([point_column(1.0, {0: 2.0 + 1e-6})]) == 1
    assert len(small_master.columns) == 3


def test_column_on_unknown_row(small_master):
    with pytest.raises(DimensionMismatch):
        small_master.add_columns([point_column(1.0, {3: 1.0})])
    with pytest.raises(DimensionMismatch):
        small_master.add_columns([point_column(1.0, {}, row=2)])


def test_empty_master():
    rm = RestrictedMaster(Sense.MIN, [], num_convexity=2)
    with pytest.raises(EmptyMaster):
        rm.compile()
    rm.add_columns([point_column(1.0, {}, row=0)])
    with pytest.raises(EmptyMaster):
        rm.compile()


def test_inactive_rows_are_left_out(small_master):
    small_master.set_active([0], False)
    lp = small_master.compile()
    assert lp.num_rows == 1
    point = solve_to_gap(lp, 1e-9)
    duals = small_master.dual_point(point)
    assert duals.linking_keys == ()
    np.testing.assert_array_equal(duals.dense_linking(1), [0.0])
    assert small_master.bounds(point)[0] == pytest.approx(1.0, abs=1e-6)


def test_reduced_cost_of_ray_ignores_convexity():
    duals = DualPoint(linking_duals=[2.0, 0.5], convexity_duals=[10.0], linking_keys=(0, 2))
    ray = ray_column(1.0, {0: 1.0, 1: 4.0})
    assert reduced_cost(ray, duals, Sense.MIN) == pytest.approx(-1.0)
    assert reduced_cost(ray, duals, Sense.MAX) == pytest.approx(1.0)
    point = point_column(1.0, {2: 2.0})
    assert reduced_cost(point, duals, Sense.MIN) == pytest.approx(1.0 - 1.0 - 10.0)


def test_point_mismatch(small_master):
    other = RestrictedMaster(Sense.MIN, [], num_convexity=1)
    other.add_columns([point_column(1.0, {})])
    point = solve_to_gap(other.compile(), 1e-6)
    with pytest.raises(DimensionMismatch):
        small_master.dual_point(point)


def test_column_validation():
    with pytest.raises(ValueError):
        Column(1.0, {}, None, ColumnOrigin("test", ColumnKind.POINT))
    with pytest.raises(ValueError):
        Column(float("inf"), {}, 0, ColumnOrigin("test", ColumnKind.POINT))


def test_artificial_costs_are_min_penalties():
    rows = [LinkingRow(LinkingKind.LESS_EQUAL, 1.0)]
    rm = RestrictedMaster(Sense.MAX, rows, num_convexity=2, artificial=True, artificial_costs=[5.0, 7.0])
    rm.add_columns([point_column(1.0, {0: 1.0}, row=1)])
    lp = rm.compile()
    np.testing.assert_array_equal(lp.objective, [5.0, 7.0, -1.0])
    default = RestrictedMaster(Sense.MIN, rows, num_convexity=1, artificial=True)
    np.testing.assert_array_equal(default.compile().objective, [ARTIFICIAL_COST])
    with pytest.raises(DimensionMismatch):
        RestrictedMaster(Sense.MIN, rows, num_convexity=2, artificial=True, artificial_costs=[1.0])
