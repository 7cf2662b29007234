"""Bounded-variable primal simplex with a sparse LU-factorized basis.

Two-phase method: phase 1 drives artificial variables (added only on rows
whose slack cannot absorb the initial residual) to zero, phase 2 minimizes
the real objective.  The basis inverse is represented as a sparse LU
factorization plus a product-form eta file, refactorized every
``refactor_every`` pivots.  Entering variable: most-negative reduced cost,
lowest index on ties; after ``degenerate_threshold`` consecutive
non-improving pivots Bland's rule takes over until the objective moves,
which guarantees termination.  Instances are equilibrated by row/column
max-norm scaling (powers of two, so coefficients keep their mantissas).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..base import ConfigError
from .instance import LpInstance, LpSolution, SolveStatus

INF = math.inf

AT_LB, AT_UB, FREE, BASIC = 0, 1, 2, 3


@dataclass
class SolverOptions:
    feasibility_tol: float = 1e-7     # absolute, on scaled rows
    optimality_tol: float = 1e-9      # on reduced costs
    pivot_tol: float = 1e-10          # minimum usable pivot magnitude
    refactor_every: int = 100         # pivots between LU refactorizations
    degenerate_threshold: int = 1000  # non-improving pivots before Bland
    max_iterations: int = 500_000
    scale: bool = True


class IterationLimitError(RuntimeError):
    """Raised when the pivot budget is exhausted; carries the best bound."""

    def __init__(self, message: str, best_objective: float | None = None):
        super().__init__(message)
        self.best_objective = best_objective


def solve(instance: LpInstance, options: SolverOptions | None = None) -> LpSolution:
    """Solve an LpInstance; Infeasible/Unbounded are statuses, not errors."""
    options = options or SolverOptions()
    if instance.n_rows == 0:
        return _solve_unconstrained(instance)
    return _Simplex(instance, options).run()


def _solve_unconstrained(instance: LpInstance) -> LpSolution:
    x = np.zeros(instance.n_variables)
    for j, c in enumerate(instance.objective):
        if c > 0:
            if not math.isfinite(instance.lower[j]):
                return LpSolution(SolveStatus.UNBOUNDED)
            x[j] = instance.lower[j]
        elif c < 0:
            if not math.isfinite(instance.upper[j]):
                return LpSolution(SolveStatus.UNBOUNDED)
            x[j] = instance.upper[j]
        else:
            x[j] = instance.lower[j] if math.isfinite(instance.lower[j]) else 0.0
    return LpSolution(
        SolveStatus.OPTIMAL,
        objective=float(instance.objective @ x),
        values=x,
        duals=np.zeros(0),
        reduced_costs=instance.objective.copy(),
    )


def _pow2_scale(values: np.ndarray) -> np.ndarray:
    """1/value rounded to the nearest power of two; 1.0 for zeros."""
    out = np.ones_like(values)
    nz = values > 0
    out[nz] = 2.0 ** (-np.round(np.log2(values[nz])))
    return out


def _segment_abs_max(data: np.ndarray, indptr: np.ndarray, count: int) -> np.ndarray:
    """Max |value| per CSR/CSC segment; zero for empty segments."""
    out = np.zeros(count)
    nonempty = np.flatnonzero(np.diff(indptr) > 0)
    if nonempty.size:
        out[nonempty] = np.maximum.reduceat(np.abs(data), indptr[nonempty])
    return out


class _Simplex:
    def __init__(self, instance: LpInstance, options: SolverOptions):
        self.instance = instance
        self.opts = options
        m, n = instance.n_rows, instance.n_variables
        self.m, self.n_struct = m, n

        A = instance.matrix.tocsc().astype(float)
        b = instance.rhs.astype(float).copy()
        lb = instance.lower.astype(float).copy()
        ub = instance.upper.astype(float).copy()
        obj = instance.objective.astype(float).copy()

        if options.scale:
            csr = A.tocsr()
            self.rscale = _pow2_scale(_segment_abs_max(csr.data, csr.indptr, m))
            A = (sp.diags(self.rscale) @ A).tocsc()
            self.cscale = _pow2_scale(_segment_abs_max(A.data, A.indptr, n))
            A = (A @ sp.diags(self.cscale)).tocsc()
            b = b * self.rscale
            with np.errstate(invalid="ignore"):
                lb = lb / self.cscale
                ub = ub / self.cscale
            obj = obj * self.cscale
        else:
            self.rscale = np.ones(m)
            self.cscale = np.ones(n)

        # slack column per row: Ax + s = b with bounds by sense
        slack_lb = np.zeros(m)
        slack_ub = np.zeros(m)
        for i, sense in enumerate(instance.senses):
            if sense == "L":
                slack_lb[i], slack_ub[i] = 0.0, INF
            elif sense == "G":
                slack_lb[i], slack_ub[i] = -INF, 0.0
            else:
                slack_lb[i], slack_ub[i] = 0.0, 0.0

        self.b = b
        self.lb = np.concatenate([lb, slack_lb])
        self.ub = np.concatenate([ub, slack_ub])
        self.obj = np.concatenate([obj, np.zeros(m)])

        # initial nonbasic point for structurals
        x0 = np.where(
            np.isfinite(self.lb[:n]), self.lb[:n],
            np.where(np.isfinite(self.ub[:n]), self.ub[:n], 0.0),
        )
        status0 = np.where(
            np.isfinite(self.lb[:n]), AT_LB,
            np.where(np.isfinite(self.ub[:n]), AT_UB, FREE),
        ).astype(np.int8)

        resid = b - A @ x0

        # basis: slack where the residual fits its bounds, else artificial
        art_cols = []
        art_rows = []
        basis = np.empty(m, dtype=np.int64)
        slack_status = np.full(m, AT_LB, dtype=np.int8)
        slack_x = np.zeros(m)
        tol = options.feasibility_tol
        for i in range(m):
            if slack_lb[i] - tol <= resid[i] <= slack_ub[i] + tol:
                basis[i] = n + i
                slack_status[i] = BASIC
                slack_x[i] = resid[i]
            else:
                sign = 1.0 if resid[i] >= 0 else -1.0
                art_rows.append((i, sign))
                art_cols.append(len(art_cols))
                basis[i] = n + m + len(art_cols) - 1
                # slack parks at the bound nearest zero (always 0 here)
                slack_status[i] = AT_UB if instance.senses[i] == "G" else AT_LB
                slack_x[i] = 0.0

        n_art = len(art_cols)
        self.n_art = n_art
        self.n_total = n + m + n_art

        blocks = [A, sp.identity(m, format="csc")]
        if n_art:
            rows = np.array([i for i, _ in art_rows])
            signs = np.array([s for _, s in art_rows])
            art = sp.csc_matrix(
                (signs, (rows, np.arange(n_art))), shape=(m, n_art)
            )
            blocks.append(art)
            self.lb = np.concatenate([self.lb, np.zeros(n_art)])
            self.ub = np.concatenate([self.ub, np.full(n_art, INF)])
            self.obj = np.concatenate([self.obj, np.zeros(n_art)])
        self.A = sp.hstack(blocks, format="csc")
        self.AT = self.A.T.tocsr()

        self.x = np.concatenate([x0, slack_x, np.zeros(n_art)])
        self.status = np.concatenate([
            status0, slack_status, np.full(n_art, BASIC, dtype=np.int8)
        ])
        self.basis = basis
        for i, (row, _) in enumerate(art_rows):
            self.x[n + m + i] = abs(resid[row])
        self.fixed = self.lb == self.ub

        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.iterations = 0
        self._refactor()

    # -- basis algebra ------------------------------------------------------

    def _refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.lu = spla.splu(B.tocsc())
        except RuntimeError as exc:
            raise ConfigError(f"singular basis during solve: {exc}") from exc
        self.etas = []
        # resync basic values against the nonbasic point to curb drift
        x_nb = self.x.copy()
        x_nb[self.basis] = 0.0
        rhs_eff = self.b - self.A @ x_nb
        self.x[self.basis] = self.lu.solve(rhs_eff)

    def _ftran(self, col: np.ndarray) -> np.ndarray:
        z = self.lu.solve(col)
        for p, w in self.etas:
            zp = z[p] / w[p]
            z -= w * zp
            z[p] = zp
        return z

    def _btran(self, c_basis: np.ndarray) -> np.ndarray:
        g = c_basis.copy()
        for p, w in reversed(self.etas):
            g[p] = (g[p] - w @ g + w[p] * g[p]) / w[p]
        return self.lu.solve(g, trans="T")

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        start, end = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[start:end]] = self.A.data[start:end]
        return col

    # -- simplex iterations ---------------------------------------------------

    def _reduced_costs(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self._btran(cost[self.basis])
        d = cost - self.AT @ y
        d[self.basis] = 0.0
        return d, y

    def _price(self, d: np.ndarray, bland: bool) -> int | None:
        tol = self.opts.optimality_tol
        viol = np.zeros(self.n_total)
        at_lb = (self.status == AT_LB) & ~self.fixed
        at_ub = (self.status == AT_UB) & ~self.fixed
        free = self.status == FREE
        viol[at_lb] = -d[at_lb]
        viol[at_ub] = d[at_ub]
        viol[free] = np.abs(d[free])
        if viol.max(initial=0.0) <= tol:
            return None
        if bland:
            return int(np.argmax(viol > tol))
        return int(np.argmax(viol))

    def _run_phase(self, cost: np.ndarray, phase: int) -> SolveStatus:
        opts = self.opts
        degen_run = 0
        bland = False
        while True:
            if self.iterations >= opts.max_iterations:
                raise IterationLimitError(
                    f"simplex exceeded {opts.max_iterations} iterations in phase {phase}",
                    best_objective=float(self.obj @ self.x),
                )
            self.iterations += 1

            d, _ = self._reduced_costs(cost)
            q = self._price(d, bland)
            if q is None:
                return SolveStatus.OPTIMAL

            if self.status[q] == AT_UB or (self.status[q] == FREE and d[q] > 0):
                t = -1.0
            else:
                t = 1.0

            w = self._ftran(self._column(q))
            rate = -t * w  # per-unit change of basic values as x_q moves

            lb_b = self.lb[self.basis]
            ub_b = self.ub[self.basis]
            x_b = self.x[self.basis]
            theta = np.full(self.m, INF)
            dec = rate < -opts.pivot_tol
            inc = rate > opts.pivot_tol
            with np.errstate(invalid="ignore", divide="ignore"):
                theta[dec] = (lb_b[dec] - x_b[dec]) / rate[dec]
                theta[inc] = (ub_b[inc] - x_b[inc]) / rate[inc]
            theta[~np.isfinite(theta)] = INF
            np.maximum(theta, 0.0, out=theta)

            theta_basic = theta.min() if self.m else INF
            theta_self = (
                self.ub[q] - self.lb[q]
                if math.isfinite(self.ub[q]) and math.isfinite(self.lb[q])
                else INF
            )

            if theta_basic == INF and theta_self == INF:
                if phase == 1:
                    raise ConfigError("phase-1 subproblem diverged (numerical failure)")
                return SolveStatus.UNBOUNDED

            if theta_self <= theta_basic:
                # bound flip: no basis change
                self.x[self.basis] = x_b + rate * theta_self
                self.x[q] = self.ub[q] if t > 0 else self.lb[q]
                self.status[q] = AT_UB if t > 0 else AT_LB
                step = theta_self
            else:
                candidates = np.nonzero(theta <= theta_basic + 1e-12)[0]
                if bland:
                    p = int(candidates[np.argmin(self.basis[candidates])])
                else:
                    p = int(candidates[np.argmax(np.abs(w[candidates]))])
                step = float(theta[p])

                leave = self.basis[p]
                self.x[self.basis] = x_b + rate * step
                self.x[q] = self.x[q] + t * step
                # the leaver lands exactly on its blocking bound
                self.x[leave] = lb_b[p] if rate[p] < 0 else ub_b[p]
                self.status[leave] = AT_LB if rate[p] < 0 else AT_UB
                self.status[q] = BASIC
                self.basis[p] = q
                self.etas.append((p, w))
                if len(self.etas) >= opts.refactor_every:
                    self._refactor()

            if step <= opts.feasibility_tol:
                degen_run += 1
                if degen_run >= opts.degenerate_threshold:
                    bland = True
            else:
                degen_run = 0
                bland = False

    # -- driver ---------------------------------------------------------------

    def run(self) -> LpSolution:
        n, m = self.n_struct, self.m

        if self.n_art:
            phase1_cost = np.zeros(self.n_total)
            phase1_cost[n + m:] = 1.0
            self._run_phase(phase1_cost, phase=1)
            infeas = float(self.x[n + m:].sum())
            scale_ref = 1.0 + float(np.abs(self.b).max(initial=0.0))
            if infeas > self.opts.feasibility_tol * scale_ref * 10:
                return LpSolution(
                    SolveStatus.INFEASIBLE,
                    iterations=self.iterations,
                    phase1_infeasibility=infeas,
                )
            # freeze artificials out of the problem
            self.lb[n + m:] = 0.0
            self.ub[n + m:] = 0.0
            self.fixed = self.lb == self.ub

        cost = np.zeros(self.n_total)
        cost[:n + m] = self.obj[:n + m]
        status = self._run_phase(cost, phase=2)
        if status is SolveStatus.UNBOUNDED:
            return LpSolution(SolveStatus.UNBOUNDED, iterations=self.iterations)

        self._refactor()  # fresh factorization for final values and duals
        d, y = self._reduced_costs(cost)

        x_struct = self.x[:n] * self.cscale
        duals = y * self.rscale
        reduced = d[:n] / self.cscale
        objective = float(self.instance.objective @ x_struct)
        return LpSolution(
            SolveStatus.OPTIMAL,
            objective=objective,
            values=x_struct,
            duals=duals,
            reduced_costs=reduced,
            iterations=self.iterations,
        )
