"""
Column generation drivers.

`run` implements the primal-dual column generation loop: each restricted
master is solved by the interior point method only to a relative gap eps
that shrinks with the outer gap (eps = min(eps_max, gap / D)), and the
well-centred duals of that suboptimal point are sent to the oracle. In
standard mode every master is solved to eps = 1e-8 instead.

All bounds kept here are in the min orientation of the compiled master.
"""
import csv
import logging
import math
import time
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Protocol, Set, Tuple

from pdcgm.colgen.master import ColumnValues, RestrictedMaster
from pdcgm.colgen.models import (
    ColumnGenerationResult,
    DriverConfig,
    DriverMode,
    IterationRecord,
    Sense,
)
from pdcgm.constants import (
    ARTIFICIAL_TOLERANCE,
    GAP_FLOOR,
    STANDARD_EPS,
    TRACE_DIGITS,
    TRACE_HEADER,
)
from pdcgm.exceptions import MasterInfeasible, MaxOuterExceeded
from pdcgm.lp import InteriorPointSolver, primal_dual_objectives
from pdcgm.lp.models import relative_gap

if TYPE_CHECKING:
    from pdcgm.colgen.oracle import PricingOracle

logger = logging.getLogger(__name__)

# Slack allowed when re-checking the trace
SCHEDULE_TOLERANCE = 1e-12
CONTRACT_TOLERANCE = 1e-9


class RowManager(Protocol):
    """Hook that adds and removes linking rows between outer iterations"""

    def update(self, rm: RestrictedMaster, values: ColumnValues) -> Tuple[Set[int], Set[int]]:
        """
        Returns:
            (added, removed) linking-row keys
        """
        ...


def lower_bound_update(current_lb: float, z_lb_rmp: float, z_sp: float) -> float:
    """LB = max(LB, z_LB + z_SP)"""
    return max(current_lb, z_lb_rmp + z_sp)


def outer_gap(upper: float, lower: float) -> float:
    if not (math.isfinite(upper) and math.isfinite(lower)):
        return math.inf
    return relative_gap(upper, lower)


def next_epsilon(cfg: DriverConfig, gap: float) -> float:
    """min(eps_max, gap / D), never below delta / D"""
    if cfg.mode is DriverMode.STANDARD:
        return STANDARD_EPS
    return min(cfg.eps_max, max(gap, cfg.delta) / cfg.degree)


def run(
    rm: RestrictedMaster,
    oracle: "PricingOracle",
    cfg: DriverConfig,
    row_manager: Optional[RowManager] = None,
) -> ColumnGenerationResult:
    """
    Run column generation until the relative outer gap drops below delta

    Args:
        rm: Restricted master with its initial columns and/or artificials
        oracle: Pricing oracle for rm's subproblems
        cfg: Driver parameters
        row_manager: Optional linking-row hook called after each oracle call;
            while it keeps adding rows the run does not stop

    Returns:
        ColumnGenerationResult with the final weights and the trace

    Raises:
        MaxOuterExceeded: no convergence within cfg.max_outer iterations
        MasterInfeasible: artificial columns still carry weight at exit
    """
    solver = InteriorPointSolver(gamma=cfg.gamma, max_iter=cfg.ipm_max_iter)
    upper = math.inf
    lower = -math.inf
    eps = cfg.eps_max if cfg.mode is DriverMode.PDCGM else STANDARD_EPS
    warm = None
    trace: List[IterationRecord] = []
    rmp_total = 0.0
    oracle_total = 0.0
    started = time.perf_counter()

    logger.info(
        f"Column generation on {rm.name or 'master'}: mode={cfg.mode.value} delta={cfg.delta:g} "
        f"D={cfg.degree:g} eps_max={cfg.eps_max:g} columns={len(rm.columns)}"
    )

    for outer in range(1, cfg.max_outer + 1):
        lp = rm.compile()
        tick = time.perf_counter()
        point = solver.solve(lp, eps, warm)
        rmp_time = time.perf_counter() - tick
        z_ub, z_lb = primal_dual_objectives(lp, point)
        duals = rm.dual_point(point)

        tick = time.perf_counter()
        result = oracle.price(duals, iteration=outer)
        oracle_time = time.perf_counter() - tick
        rmp_total += rmp_time
        oracle_total += oracle_time

        # taken before the row manager reshapes the master
        values = rm.column_values(point)
        added: Set[int] = set()
        removed: Set[int] = set()
        if row_manager is not None:
            added, removed = row_manager.update(rm, values)

        # A point that violates a newly activated row is not feasible for the full master
        if not added:
            upper = min(upper, z_ub)
        # Ray values are not Lagrangian bounds
        if not result.has_rays:
            lower = lower_bound_update(lower, z_lb, result.z_sp)
        gap = outer_gap(upper, lower)
        converged = gap < cfg.delta and not added

        columns_added = 0
        if not converged and result.z_sp < 0:
            columns_added = rm.add_columns(result.columns)

        centrality_min, centrality_max = point.centrality_range()
        trace.append(IterationRecord(
            outer_index=outer,
            z_ub_running=upper,
            z_lb_running=lower,
            gap=gap,
            epsilon_used=eps,
            oracle_value=result.z_sp,
            columns_added=columns_added,
            rmp_time=rmp_time,
            oracle_time=oracle_time,
            rmp_upper=z_ub,
            rmp_lower=z_lb,
            rmp_rel_gap=point.rel_gap,
            rmp_centered=point.centered,
            rmp_centrality_min=centrality_min,
            rmp_centrality_max=centrality_max,
            ipm_iterations=point.iterations,
            rows_added=len(added),
            rows_removed=len(removed),
        ))
        logger.info(
            f"outer {outer}: UB={upper:.10g} LB={lower:.10g} gap={gap:.3e} eps={eps:.3e} "
            f"zsp={result.z_sp:.3e} cols+={columns_added} ipm={point.iterations}"
            + (f" rows+{len(added)}/-{len(removed)}" if added or removed else "")
        )

        if converged:
            if values.artificial_mass > ARTIFICIAL_TOLERANCE:
                raise MasterInfeasible(
                    f"Artificial columns carry weight {values.artificial_mass:.3e} at convergence"
                )
            total = time.perf_counter() - started
            logger.info(f"Converged after {outer} outer iterations in {total:.3f}s")
            return ColumnGenerationResult(
                objective=rm.sense.sign * upper,
                upper_bound=upper,
                lower_bound=lower,
                trace=trace,
                weights=values.weights,
                free_values=values.free,
                artificial_mass=values.artificial_mass,
                duals=duals,
                rmp_time=rmp_total,
                oracle_time=oracle_total,
                total_time=total,
                columns_rejected=rm.duplicates_rejected,
            )

        eps = next_epsilon(cfg, gap)
        warm = None if (added or removed) else point

    raise MaxOuterExceeded(f"No convergence within {cfg.max_outer} outer iterations (gap {trace[-1].gap:.3e})")


def check_contract(trace: List[IterationRecord], cfg: DriverConfig) -> List[str]:
    """
    Check a trace against the driver's guarantees

    The RMP bounds and the centrality range stored per record are checked
    against eps and gamma directly, not through the solver's own flags.

    Returns:
        Human-readable violations; empty when the trace is clean
    """
    violations = []
    low, high = cfg.gamma * (1.0 - CONTRACT_TOLERANCE), (1.0 + CONTRACT_TOLERANCE) / cfg.gamma
    for t, rec in enumerate(trace):
        tag = f"outer {rec.outer_index}"
        if rec.rmp_rel_gap > rec.epsilon_used + CONTRACT_TOLERANCE:
            violations.append(f"{tag}: RMP gap {rec.rmp_rel_gap:.3e} exceeds eps {rec.epsilon_used:.3e}")
        if math.isfinite(rec.rmp_upper) and math.isfinite(rec.rmp_lower):
            allowed = (rec.epsilon_used + CONTRACT_TOLERANCE) * (GAP_FLOOR + abs(rec.rmp_upper))
            if rec.rmp_upper - rec.rmp_lower > allowed:
                violations.append(
                    f"{tag}: RMP bounds {rec.rmp_upper:.10g} / {rec.rmp_lower:.10g} are wider than eps allows"
                )
        spread = (rec.rmp_centrality_min, rec.rmp_centrality_max)
        if not rec.rmp_centered:
            violations.append(f"{tag}: RMP point not well centred")
        elif spread[0] < low or spread[1] > high:
            violations.append(
                f"{tag}: RMP products span [{spread[0]:.3g}, {spread[1]:.3g}] mu, "
                f"outside the gamma neighbourhood"
            )
        stored, recomputed = rec.gap, rec.recomputed_gap()
        if not (stored == recomputed or abs(stored - recomputed) <= SCHEDULE_TOLERANCE):
            violations.append(f"{tag}: stored gap {stored!r} differs from recomputed {recomputed!r}")
        if cfg.mode is DriverMode.STANDARD and rec.epsilon_used != STANDARD_EPS:
            violations.append(f"{tag}: standard mode used eps {rec.epsilon_used:.3e}")
        if t == 0:
            if cfg.mode is DriverMode.PDCGM and rec.epsilon_used != cfg.eps_max:
                violations.append(f"{tag}: initial eps {rec.epsilon_used:.3e} is not eps_max")
            continue
        prev = trace[t - 1]
        if rec.z_ub_running > prev.z_ub_running:
            violations.append(f"{tag}: UB increased from {prev.z_ub_running:.10g} to {rec.z_ub_running:.10g}")
        if rec.z_lb_running < prev.z_lb_running:
            violations.append(f"{tag}: LB decreased from {prev.z_lb_running:.10g} to {rec.z_lb_running:.10g}")
        if cfg.mode is DriverMode.PDCGM:
            expected = next_epsilon(cfg, prev.gap)
            if abs(rec.epsilon_used - expected) > SCHEDULE_TOLERANCE * max(1.0, expected):
                violations.append(f"{tag}: eps {rec.epsilon_used:.3e}, schedule gives {expected:.3e}")
    return violations


def user_bounds(rec: IterationRecord, sense: Sense) -> Tuple[float, float]:
    """(UB, LB) of a record in the user sense of the master"""
    if sense is Sense.MIN:
        return rec.z_ub_running, rec.z_lb_running
    return -rec.z_lb_running, -rec.z_ub_running


def _fmt(value: float) -> str:
    return f"{value:.{TRACE_DIGITS}g}"


def write_trace(trace: List[IterationRecord], path: Path, sense: Sense = Sense.MIN):
    """Write one CSV row per outer iteration; bounds in user sense"""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for rec in trace:
            ub, lb = user_bounds(rec, sense)
            writer.writerow([
                rec.outer_index,
                _fmt(ub),
                _fmt(lb),
                _fmt(rec.gap),
                _fmt(rec.epsilon_used),
                _fmt(rec.oracle_value),
                rec.columns_added,
                _fmt(rec.rmp_time),
                _fmt(rec.oracle_time),
            ])
    logger.info(f"Wrote {len(trace)} trace rows to {path}")
