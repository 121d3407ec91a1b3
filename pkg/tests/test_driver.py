import csv
import math

import numpy as np
import pytest

from pdcgm.apps.mcnf import solve_mcnf
from pdcgm.apps.tssp import solve_tssp
from pdcgm.colgen.driver import (
    check_contract,
    lower_bound_update,
    next_epsilon,
    outer_gap,
    run,
    user_bounds,
    write_trace,
)
from pdcgm.colgen.master import RestrictedMaster, reduced_cost
from pdcgm.colgen.models import (
    Column,
    ColumnKind,
    ColumnOrigin,
    DriverConfig,
    DriverMode,
    IterationRecord,
    LinkingKind,
    LinkingRow,
    Sense,
)
from pdcgm.colgen.oracle import (
    QuadraticBowls,
    QuadraticOracle,
    collect,
    minimax_master,
    quadratic_column,
    solve_minimax,
)
from pdcgm.constants import STANDARD_EPS, TRACE_HEADER
from pdcgm.data.generators import small_network, small_stochastic
from pdcgm.exceptions import MasterInfeasible, MaxOuterExceeded
from pdcgm.verify import compact_mcnf_optimum, dep_optimum


def test_bound_helpers():
    assert lower_bound_update(-math.inf, 3.0, -1.0) == 2.0
    assert lower_bound_update(2.5, 3.0, -1.0) == 2.5
    assert outer_gap(math.inf, 0.0) == math.inf
    assert outer_gap(10.0, 9.0) == pytest.approx(0.1)


def test_epsilon_schedule():
    cfg = DriverConfig(delta=1e-5, degree=10.0, eps_max=0.5)
    assert next_epsilon(cfg, math.inf) == 0.5
    assert next_epsilon(cfg, 2.0) == pytest.approx(0.2)
    assert next_epsilon(cfg, 1e-2) == pytest.approx(1e-3)
    # never below delta / D, even when rows keep the run going below delta
    assert next_epsilon(cfg, 1e-7) == pytest.approx(1e-6)
    assert next_epsilon(cfg, -1e-9) == pytest.approx(1e-6)
    standard = DriverConfig(mode=DriverMode.STANDARD)
    assert next_epsilon(standard, 1e-2) == STANDARD_EPS


@pytest.mark.parametrize("kwargs", [
    {"delta": 0.0},
    {"degree": 1.0},
    {"eps_max": 0.6},
    {"gamma": 1.0},
    {"max_outer": 0},
    {"workers": 0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        DriverConfig(**kwargs)


@pytest.mark.parametrize("mode", list(DriverMode))
def test_minimax_run(two_bowls, mode):
    cfg = DriverConfig(delta=1e-6, degree=10.0, mode=mode)
    solution = solve_minimax(two_bowls, cfg)
    assert solution.value == pytest.approx(-0.5, abs=1e-5)
    assert two_bowls.values(solution.alpha).max() == pytest.approx(-0.5, abs=1e-3)
    assert 0.0 <= solution.alpha[0] <= two_bowls.box
    assert check_contract(solution.run.trace, cfg) == []
    trace = solution.run.trace
    assert trace[-1].gap < cfg.delta
    if mode is DriverMode.PDCGM:
        assert trace[0].epsilon_used == cfg.eps_max
    else:
        assert all(rec.epsilon_used == STANDARD_EPS for rec in trace)


def test_trace_is_monotone(bottleneck_network, mcnf_config):
    solution = solve_mcnf(bottleneck_network, mcnf_config)
    ubs = [rec.z_ub_running for rec in solution.trace]
    lbs = [rec.z_lb_running for rec in solution.trace]
    assert ubs == sorted(ubs, reverse=True)
    assert lbs == sorted(lbs)
    assert all(rec.rmp_centered for rec in solution.trace)
    assert check_contract(solution.trace, mcnf_config) == []


def test_contract_reports_violations():
    cfg = DriverConfig(delta=1e-5, degree=10.0)
    good = IterationRecord(1, 10.0, 5.0, 0.5, 0.5, -5.0, 1, 0.0, 0.0, rmp_rel_gap=0.1)
    bad = IterationRecord(2, 11.0, 4.0, 7.0 / 11.0, 0.01, -1.0, 1, 0.0, 0.0, rmp_rel_gap=0.2,
                          rmp_centered=False)
    violations = check_contract([good, bad], cfg)
    text = "\n".join(violations)
    assert "UB increased" in text
    assert "LB decreased" in text
    assert "not well centred" in text
    assert "exceeds eps" in text
    assert "schedule" in text


def test_outer_limit(two_bowls):
    with pytest.raises(MaxOuterExceeded):
        solve_minimax(two_bowls, DriverConfig(delta=1e-6, max_outer=1))


def test_artificial_left_in_basis():
    # the only real column violates the linking row, so the artificial must stay
    rm = RestrictedMaster(Sense.MIN, [LinkingRow(LinkingKind.LESS_EQUAL, 1.0)], num_convexity=1, artificial=True)
    rm.add_columns([Column(1.0, {0: 2.0}, 0, ColumnOrigin("test", ColumnKind.POINT))])

    class Silent:
        name = "silent"

        def price(self, duals, iteration=0):
            return collect([])

    with pytest.raises(MasterInfeasible):
        run(rm, Silent(), DriverConfig(delta=1e-6))


def test_write_trace(tmp_path, two_bowls):
    cfg = DriverConfig(delta=1e-6)
    master = minimax_master(two_bowls)
    master.add_columns([quadratic_column(two_bowls, two_bowls.minimizer(np.array([0.5, 0.5])))])
    result = run(master, QuadraticOracle(two_bowls), cfg)
    path = tmp_path / "trace.csv"
    write_trace(result.trace, path, Sense.MIN)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == TRACE_HEADER
    assert len(rows) == result.outer_iterations + 1
    assert [int(r[0]) for r in rows[1:]] == list(range(1, result.outer_iterations + 1))
    assert float(rows[-1][1]) == pytest.approx(result.objective, rel=1e-9)


def test_contract_checks_rmp_bounds_and_spread():
    cfg = DriverConfig(delta=1e-5, degree=10.0, gamma=0.1)
    gap = 5.0 / (1e-10 + 10.0)
    clean = IterationRecord(1, 10.0, 5.0, gap, 0.5, -5.0, 1, 0.0, 0.0, rmp_upper=10.0, rmp_lower=8.0,
                            rmp_rel_gap=0.2, rmp_centrality_min=0.5, rmp_centrality_max=2.0)
    assert check_contract([clean], cfg) == []
    # the stored gap and flag claim success, the bounds and products do not
    wide = IterationRecord(1, 10.0, 5.0, gap, 0.5, -5.0, 1, 0.0, 0.0, rmp_upper=10.0, rmp_lower=1.0,
                           rmp_rel_gap=0.2, rmp_centrality_min=0.05, rmp_centrality_max=2.0)
    text = "\n".join(check_contract([wide], cfg))
    assert "wider than eps allows" in text
    assert "outside the gamma neighbourhood" in text


class Recording:
    """Oracle wrapper keeping every dual point and result"""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.calls = []

    def price(self, duals, iteration=0):
        result = self.inner.price(duals, iteration)
        self.calls.append((duals, result))
        return result


@pytest.mark.parametrize("mode", list(DriverMode))
def test_priced_columns_have_negative_reduced_cost(two_bowls, mode):
    master = minimax_master(two_bowls)
    master.add_columns([quadratic_column(two_bowls, np.array([4.0]))])
    oracle = Recording(QuadraticOracle(two_bowls))
    run(master, oracle, DriverConfig(delta=1e-6, mode=mode))
    priced = [(duals, result) for duals, result in oracle.calls if result.columns]
    assert priced
    for duals, result in priced:
        for column in result.columns:
            value = reduced_cost(column, duals, Sense.MIN)
            assert value < 0.0
            assert value == pytest.approx(result.z_sp, abs=1e-9)


def test_standard_master_values_do_not_increase(two_bowls):
    master = minimax_master(two_bowls)
    master.add_columns([quadratic_column(two_bowls, np.array([4.0]))])
    result = run(master, QuadraticOracle(two_bowls), DriverConfig(delta=1e-6, mode=DriverMode.STANDARD))
    values = [rec.rmp_upper for rec in result.trace]
    assert len(values) > 1
    for before, after in zip(values, values[1:]):
        assert after <= before + 1e-6


def test_complete_pool_stops_after_one_iteration():
    # one bowl: the starting point is already the minimiser
    bowl = QuadraticBowls(a=[[2.0, 1.0]], b=[[1.0, 4.0]], box=3.0)
    cfg = DriverConfig(delta=1e-6, mode=DriverMode.STANDARD)
    solution = solve_minimax(bowl, cfg)
    assert solution.run.outer_iterations == 1
    assert solution.run.trace[0].oracle_value == pytest.approx(0.0, abs=1e-8)
    assert solution.value == pytest.approx(-7.75, abs=1e-6)
    np.testing.assert_allclose(solution.alpha, [0.5, 3.0])


@pytest.mark.parametrize("seed", range(4))
def test_mcnf_bounds_enclose_the_optimum(seed, mcnf_config):
    net = small_network(seed)
    optimum = compact_mcnf_optimum(net)
    tolerance = 1e-6 * (1.0 + abs(optimum))
    solution = solve_mcnf(net, mcnf_config)
    for rec in solution.trace:
        assert rec.z_lb_running <= optimum + tolerance
        assert rec.z_ub_running >= optimum - tolerance


@pytest.mark.parametrize("seed", range(4))
def test_tssp_bounds_enclose_the_optimum(seed, tssp_config):
    inst = small_stochastic(seed)
    optimum = dep_optimum(inst)
    tolerance = 1e-6 * (1.0 + abs(optimum))
    solution = solve_tssp(inst, tssp_config)
    for rec in solution.trace:
        upper, lower = user_bounds(rec, Sense.MAX)
        assert lower <= optimum + tolerance
        assert upper >= optimum - tolerance
