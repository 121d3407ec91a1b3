"""
Infeasible primal-dual path-following interior point method.

The solver stops as soon as the relative duality gap drops below a
prescribed tolerance, provided the iterate is primal and dual feasible and
well centred: every complementarity product x_j z_j lies in
[gamma * mu, mu / gamma]. Free variables keep a single column without a
dual slack, so they carry no complementarity product.

Each iteration is a Mehrotra predictor-corrector step followed by up to
MAX_CORRECTORS centrality correctors. Once the gap and feasibility targets
are met, an iterate that is still outside the neighbourhood is recentred by
Newton steps towards a fixed target mu; the predictor is not resumed.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cho_factor, cho_solve, lu_factor, lu_solve

from pdcgm.constants import (
    DEFAULT_GAMMA,
    DEFAULT_IPM_MAX_ITER,
    FEASIBILITY_TOLERANCE,
    MAX_CENTERING_STEPS,
    STEP_FACTOR,
)
from pdcgm.exceptions import DimensionMismatch, NumericalFailure
from pdcgm.lp.models import (
    LinearProgram,
    PrimalDualPoint,
    StandardForm,
    VarKind,
    is_well_centered,
    relative_gap,
)

logger = logging.getLogger(__name__)

# mu must shrink by MU_DECREASE at least once every MU_WINDOW iterations
MU_WINDOW = 25
MU_DECREASE = 0.9

MAX_CORRECTORS = 2
CORRECTOR_REACH = 0.1
CORRECTOR_GAIN = 1.01

# Recentring aims at this fraction of mu at the first gap-feasible iterate
CENTER_TARGET = 0.9

FREE_REGULARIZATION = 1e-12


@dataclass(eq=False)
class _Layout:
    """Standard form split into bounded and free column blocks"""
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    bounded: np.ndarray
    A_bounded: np.ndarray
    A_free: np.ndarray

    @classmethod
    def of(cls, sf: StandardForm) -> "_Layout":
        return cls(
            A=sf.A,
            b=sf.b,
            c=sf.c,
            bounded=sf.bounded,
            A_bounded=sf.A[:, sf.bounded],
            A_free=sf.A[:, ~sf.bounded],
        )

    @property
    def num_bounded(self) -> int:
        return self.A_bounded.shape[1]

    def mu(self, x: np.ndarray, z: np.ndarray) -> float:
        if self.num_bounded == 0:
            return 0.0
        return float(x[self.bounded] @ z[self.bounded] / self.num_bounded)


class InteriorPointSolver:
    """
    Mehrotra predictor-corrector with Gondzio centrality correctors.

    Nonnegative columns are eliminated into the normal equations
    A D A^T dy = r (dense Cholesky); free columns stay in a small augmented
    system factorised by LU.

    A solver instance keeps no state between calls; distinct instances
    may run concurrently on distinct problems.
    """

    def __init__(
        self,
        gamma: float = DEFAULT_GAMMA,
        max_iter: int = DEFAULT_IPM_MAX_ITER,
        feasibility_tol: float = FEASIBILITY_TOLERANCE,
    ):
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
        self.gamma = gamma
        self.max_iter = max_iter
        self.feasibility_tol = feasibility_tol

    def solve(self, lp: LinearProgram, eps: float, warm: Optional[PrimalDualPoint] = None) -> PrimalDualPoint:
        """
        Solve lp to relative gap eps

        Args:
            lp: Feasible and bounded linear program
            eps: Relative duality gap at which to stop, in (0, 1]
            warm: Previous point to start from; incompatible points are
                ignored and the solve starts cold

        Returns:
            Well-centred eps-optimal PrimalDualPoint
        """
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")

        sf = lp.standard_form(split_free=False)
        if sf.num_columns == 0:
            return self._empty_solution(lp)
        layout = _Layout.of(sf)

        if warm is not None:
            try:
                x, y, z = self._warm_start(lp, layout, warm)
                point = self._iterate(lp, sf, layout, eps, x, y, z, warm_started=True)
                logger.debug(f"Warm solve finished in {point.iterations} iterations")
                return point
            except DimensionMismatch as e:
                logger.info(f"Warm start rejected ({e.message}), starting cold")
            except NumericalFailure as e:
                logger.warning(f"Warm-started solve failed ({e.message}), retrying cold")

        x, y, z = self._cold_start(layout)
        return self._iterate(lp, sf, layout, eps, x, y, z, warm_started=False)

    def _iterate(
        self,
        lp: LinearProgram,
        sf: StandardForm,
        layout: _Layout,
        eps: float,
        x: np.ndarray,
        y: np.ndarray,
        z: np.ndarray,
        warm_started: bool,
    ) -> PrimalDualPoint:
        A, b, c = layout.A, layout.b, layout.c
        bounded = layout.bounded
        b_scale = 1.0 + np.abs(b)
        c_scale = 1.0 + np.abs(c)

        mu_checkpoint = layout.mu(x, z)
        target = None
        centering_steps = 0
        iterations = 0
        while True:
            rp = b - A @ x
            rd = c - A.T @ y - z
            mu = layout.mu(x, z)
            pobj = c @ x
            dobj = b @ y
            gap = relative_gap(pobj, dobj)
            p_inf = np.max(np.abs(rp) / b_scale, initial=0.0)
            d_inf = np.max(np.abs(rd) / c_scale, initial=0.0)

            if not (np.isfinite(mu) and np.isfinite(gap)):
                raise NumericalFailure("Interior point iterate became non-finite")

            logger.debug(
                f"ipm it={iterations} mu={mu:.3e} gap={gap:.3e} pinf={p_inf:.2e} dinf={d_inf:.2e}"
            )

            converged = p_inf <= self.feasibility_tol and d_inf <= self.feasibility_tol and gap <= eps
            if converged and is_well_centered(x[bounded] * z[bounded], mu, self.gamma):
                return PrimalDualPoint(
                    primal=sf.recover(x),
                    duals=y.copy(),
                    slacks=z[bounded].copy(),
                    std_primal=x[bounded].copy(),
                    mu=mu,
                    rel_gap=float(gap),
                    centered=True,
                    primal_objective=float(pobj),
                    dual_objective=float(dobj),
                    var_kinds=lp.var_kinds,
                    iterations=iterations,
                    centering_steps=centering_steps,
                    warm_started=warm_started,
                    primal_residual=float(p_inf),
                    dual_residual=float(d_inf),
                )

            if converged or target is not None:
                if target is None:
                    target = CENTER_TARGET * mu
                if centering_steps >= MAX_CENTERING_STEPS:
                    raise NumericalFailure(
                        f"Could not recentre the iterate within {MAX_CENTERING_STEPS} steps"
                    )
                centering_steps += 1
                x, y, z = self._centering_step(layout, x, y, z, rp, rd, target)
                continue

            if iterations >= self.max_iter:
                raise NumericalFailure(
                    f"No convergence after {self.max_iter} iterations (gap={gap:.3e}, mu={mu:.3e})"
                )
            if iterations > 0 and iterations % MU_WINDOW == 0:
                if mu > MU_DECREASE * mu_checkpoint:
                    raise NumericalFailure(f"mu stalled at {mu:.3e} over {MU_WINDOW} iterations")
                mu_checkpoint = mu

            iterations += 1
            x, y, z = self._predictor_corrector_step(layout, x, y, z, rp, rd, mu)

    def _predictor_corrector_step(self, layout: _Layout, x, y, z, rp, rd, mu):
        bounded = layout.bounded
        xb, zb = x[bounded], z[bounded]
        system = _NewtonSystem(layout, xb / zb)

        # Affine scaling predictor
        dx, dy, dz = _direction(layout, system, x, z, rp, rd, -xb * zb)
        alpha_p = min(1.0, _max_step(xb, dx[bounded]))
        alpha_d = min(1.0, _max_step(zb, dz[bounded]))
        if layout.num_bounded > 0 and mu > 0:
            mu_aff = (xb + alpha_p * dx[bounded]) @ (zb + alpha_d * dz[bounded]) / layout.num_bounded
            sigma = (mu_aff / mu) ** 3
        else:
            sigma = 0.0

        # Mehrotra corrector
        rxz = sigma * mu - xb * zb - dx[bounded] * dz[bounded]
        dx, dy, dz = _direction(layout, system, x, z, rp, rd, rxz)
        dx, dy, dz = self._correct_centrality(layout, system, x, z, dx, dy, dz, sigma * mu)
        return _take_step(layout, x, y, z, dx, dy, dz)

    def _correct_centrality(self, layout: _Layout, system: "_NewtonSystem", x, z, dx, dy, dz, target):
        """
        Gondzio correctors: pull the products of a slightly longer trial
        step into [gamma * target, target / gamma]; a corrector is kept only
        if it lengthens the step
        """
        bounded = layout.bounded
        if layout.num_bounded == 0 or target <= 0.0:
            return dx, dy, dz
        xb, zb = x[bounded], z[bounded]
        low, high = self.gamma * target, target / self.gamma
        zeros_p = np.zeros(layout.A.shape[0])
        zeros_d = np.zeros(layout.A.shape[1])

        alpha_p, alpha_d = _step_lengths(layout, x, z, dx, dz)
        for _ in range(MAX_CORRECTORS):
            if min(alpha_p, alpha_d) >= 1.0:
                break
            trial_p = min(1.0, alpha_p + CORRECTOR_REACH)
            trial_d = min(1.0, alpha_d + CORRECTOR_REACH)
            products = (xb + trial_p * dx[bounded]) * (zb + trial_d * dz[bounded])
            shift = np.maximum(np.clip(products, low, high) - products, -high)
            cx, cy, cz = _direction(layout, system, x, z, zeros_p, zeros_d, shift)
            new_dx, new_dy, new_dz = dx + cx, dy + cy, dz + cz
            new_p, new_d = _step_lengths(layout, x, z, new_dx, new_dz)
            if min(new_p, new_d) < CORRECTOR_GAIN * min(alpha_p, alpha_d):
                break
            dx, dy, dz = new_dx, new_dy, new_dz
            alpha_p, alpha_d = new_p, new_d
        return dx, dy, dz

    def _centering_step(self, layout: _Layout, x, y, z, rp, rd, target):
        bounded = layout.bounded
        xb, zb = x[bounded], z[bounded]
        system = _NewtonSystem(layout, xb / zb)
        dx, dy, dz = _direction(layout, system, x, z, rp, rd, target - xb * zb)
        return _take_step(layout, x, y, z, dx, dy, dz)

    def _cold_start(self, layout: _Layout) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mehrotra's starting point heuristic on the bounded columns"""
        A, b, c = layout.A, layout.b, layout.c
        bounded = layout.bounded
        m, n = A.shape
        if m > 0:
            factor = _cholesky(A @ A.T)
            x = A.T @ cho_solve(factor, b)
            y = cho_solve(factor, A @ c)
        else:
            x = np.zeros(n)
            y = np.zeros(0)
        z = c - A.T @ y
        z[~bounded] = 0.0

        if layout.num_bounded > 0:
            xb = x[bounded]
            zb = z[bounded]
            xb = xb + max(-1.5 * np.min(xb), 0.0)
            zb = zb + max(-1.5 * np.min(zb), 0.0)
            xz = xb @ zb
            if xz > 1e-12 and np.sum(xb) > 0 and np.sum(zb) > 0:
                xb = xb + 0.5 * xz / np.sum(zb)
                zb = zb + 0.5 * xz / np.sum(xb)
            else:
                xb = xb + 1.0
                zb = zb + 1.0
            x[bounded] = xb
            z[bounded] = zb
        return x, y, z

    def _warm_start(self, lp: LinearProgram, layout: _Layout, warm: PrimalDualPoint):
        """
        Reuse a previous point on the same rows with possibly appended variables

        New variables are started from their reduced costs at the old duals;
        every complementarity product is then clipped into a neighbourhood
        slightly tighter than gamma by moving whichever of x_j, z_j needs the
        smaller change.
        """
        if len(warm.duals) != lp.num_rows:
            raise DimensionMismatch(f"warm point has {len(warm.duals)} duals, LP has {lp.num_rows} rows")
        old_vars = len(warm.primal)
        if old_vars > lp.num_vars or tuple(lp.var_kinds[:old_vars]) != tuple(warm.var_kinds):
            raise DimensionMismatch("warm point variables are not a prefix of the LP variables")

        old_free = np.array([kind is VarKind.FREE for kind in warm.var_kinds], dtype=bool)
        old_slacks = len(warm.std_primal) - int(np.count_nonzero(~old_free))
        new_slacks = layout.A.shape[1] - lp.num_vars
        if old_slacks != new_slacks:
            raise DimensionMismatch("warm point has a different set of inequality rows")

        # previous point in its own standard-form column order
        old_bounded = np.concatenate([~old_free, np.ones(old_slacks, dtype=bool)])
        old_x = np.zeros(len(old_bounded))
        old_z = np.zeros(len(old_bounded))
        old_x[old_bounded] = warm.std_primal
        old_z[old_bounded] = warm.slacks
        old_x[:old_vars][old_free] = warm.primal[old_free]

        n = layout.A.shape[1]
        x = np.zeros(n)
        z = np.zeros(n)
        y = warm.duals.astype(float).copy()
        x[:old_vars] = old_x[:old_vars]
        z[:old_vars] = old_z[:old_vars]
        x[lp.num_vars:] = old_x[old_vars:]
        z[lp.num_vars:] = old_z[old_vars:]

        mu = max(warm.mu, 1e-12 * (1.0 + abs(warm.primal_objective)) / max(1, layout.num_bounded))
        new = np.arange(old_vars, lp.num_vars)
        new = new[layout.bounded[new]]
        reduced = layout.c[new] - layout.A[:, new].T @ y
        z[new] = np.maximum(reduced, np.sqrt(mu))
        x[new] = mu / z[new]

        bounded = np.flatnonzero(layout.bounded)
        width = np.sqrt(self.gamma)
        products = x[bounded] * z[bounded]
        low = products < width * mu
        high = products > mu / width
        target = np.where(low, width * mu, mu / width)
        for i in np.flatnonzero(low | high):
            j = bounded[i]
            new_x = target[i] / z[j]
            new_z = target[i] / x[j]
            if abs(new_x - x[j]) <= abs(new_z - z[j]):
                x[j] = new_x
            else:
                z[j] = new_z
        return x, y, z

    def _empty_solution(self, lp: LinearProgram) -> PrimalDualPoint:
        if np.any(np.abs(lp.rhs) > self.feasibility_tol):
            raise NumericalFailure("Problem without variables has a nonzero right-hand side")
        return PrimalDualPoint(
            primal=np.zeros(lp.num_vars),
            duals=np.zeros(lp.num_rows),
            slacks=np.zeros(0),
            std_primal=np.zeros(0),
            mu=0.0,
            rel_gap=0.0,
            centered=True,
            primal_objective=0.0,
            dual_objective=0.0,
            var_kinds=lp.var_kinds,
        )


class _NewtonSystem:
    """
    Factorised Newton system of one iterate

    Without free columns this is A_N D A_N^T; with them the free primal
    steps stay as unknowns:

        [ A_N D A_N^T    A_F  ] [dy  ]   [r_p]
        [ A_F^T         -reg  ] [dx_F] = [r_F]
    """

    def __init__(self, layout: _Layout, d: np.ndarray):
        self.m = layout.A.shape[0]
        self.num_free = layout.A_free.shape[1]
        self.factor = None
        if self.m == 0:
            return
        M = (layout.A_bounded * d) @ layout.A_bounded.T
        if self.num_free == 0:
            self.factor = _cholesky(M)
        else:
            self.factor = _augmented_lu(M, layout.A_free)

    def solve(self, r_primal: np.ndarray, r_free: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Returns (dy, dx_F)"""
        if self.factor is None:
            return np.zeros(0), np.zeros(self.num_free)
        if self.num_free == 0:
            return cho_solve(self.factor, r_primal), np.zeros(0)
        solution = lu_solve(self.factor, np.concatenate([r_primal, r_free]))
        return solution[:self.m], solution[self.m:]


def _cholesky(M: np.ndarray):
    """Cholesky factor of M with escalating diagonal regularisation"""
    m = M.shape[0]
    reg = 1e-14 * max(1.0, float(np.max(np.diag(M), initial=0.0)))
    for _ in range(8):
        try:
            return cho_factor(M + reg * np.eye(m), lower=False, check_finite=True)
        except (LinAlgError, ValueError):
            reg *= 100.0
    raise NumericalFailure("Cholesky factorisation of the normal equations broke down")


def _augmented_lu(M: np.ndarray, A_free: np.ndarray):
    """LU factor of the quasidefinite augmented matrix, regularised like _cholesky"""
    m, f = A_free.shape
    reg = 1e-14 * max(1.0, float(np.max(np.diag(M), initial=0.0)))
    reg_free = FREE_REGULARIZATION
    for _ in range(8):
        K = np.block([
            [M + reg * np.eye(m), A_free],
            [A_free.T, -reg_free * np.eye(f)],
        ])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            try:
                lu, piv = lu_factor(K, check_finite=True)
            except ValueError:
                lu = None
        if lu is not None and np.all(np.isfinite(lu)) and np.all(np.diag(lu) != 0.0):
            return lu, piv
        reg *= 100.0
        reg_free *= 100.0
    raise NumericalFailure("LU factorisation of the augmented Newton system broke down")


def _direction(layout: _Layout, system: _NewtonSystem, x, z, rp, rd, rxz):
    """
    Newton direction for  A dx = rp,  A^T dy + dz = rd,  Z dx + X dz = rxz

    rxz is indexed like the bounded columns; free columns get dz = 0.
    """
    bounded = layout.bounded
    xb, zb = x[bounded], z[bounded]
    w = (rxz - xb * rd[bounded]) / zb
    dy, dx_free = system.solve(rp - layout.A_bounded @ w, rd[~bounded])
    aty = layout.A_bounded.T @ dy
    dx = np.empty_like(x)
    dz = np.zeros_like(z)
    dx[bounded] = w + (xb / zb) * aty
    dx[~bounded] = dx_free
    dz[bounded] = rd[bounded] - aty
    if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dz)) and np.all(np.isfinite(dy))):
        raise NumericalFailure("Newton direction is not finite")
    return dx, dy, dz


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _step_lengths(layout: _Layout, x, z, dx, dz) -> Tuple[float, float]:
    bounded = layout.bounded
    alpha_p = min(1.0, STEP_FACTOR * _max_step(x[bounded], dx[bounded]))
    alpha_d = min(1.0, STEP_FACTOR * _max_step(z[bounded], dz[bounded]))
    return alpha_p, alpha_d


def _take_step(layout: _Layout, x, y, z, dx, dy, dz):
    alpha_p, alpha_d = _step_lengths(layout, x, z, dx, dz)
    return x + alpha_p * dx, y + alpha_d * dy, z + alpha_d * dz


def solve_to_gap(
    lp: LinearProgram,
    eps: float,
    gamma: float = DEFAULT_GAMMA,
    warm: Optional[PrimalDualPoint] = None,
    max_iter: int = DEFAULT_IPM_MAX_ITER,
) -> PrimalDualPoint:
    """Solve lp to relative gap eps with a gamma-centred iterate"""
    return InteriorPointSolver(gamma=gamma, max_iter=max_iter).solve(lp, eps, warm)


def primal_dual_objectives(lp: LinearProgram, point: PrimalDualPoint) -> Tuple[float, float]:
    """
    Primal objective c.x and dual objective b.y of a point

    Raises:
        DimensionMismatch: point does not belong to lp
    """
    if len(point.primal) != lp.num_vars or len(point.duals) != lp.num_rows:
        raise DimensionMismatch(
            f"point has {len(point.primal)} primal / {len(point.duals)} dual values, "
            f"LP has {lp.num_vars} variables / {lp.num_rows} rows"
        )
    return float(lp.objective @ point.primal), float(lp.rhs @ point.duals)
