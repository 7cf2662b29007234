"""LP instance/solution containers and solution verification helpers.

An instance is a minimization problem over bounded variables:

    min c'x  s.t.  A x {=, <=, >=} b,  l <= x <= u

with sparse rows, infinite bounds allowed, and stable string ids for
variables and rows (the ids survive file export and solution dumps).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..base import ConfigError

INF = math.inf


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(eq=False)
class LpInstance:
    name: str
    variable_ids: list[str]
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    row_ids: list[str]
    senses: list[str]            # 'E', 'L', 'G' per row
    rhs: np.ndarray
    matrix: sp.csr_matrix        # n_rows x n_variables
    meta: object | None = None   # model-entity mapping, opaque to solver/io

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n, m = len(self.variable_ids), len(self.row_ids)
        if not np.all(np.isfinite(self.objective)):
            raise ConfigError("objective coefficients must be finite")
        if self.matrix.shape != (m, n):
            raise ConfigError(f"matrix shape {self.matrix.shape} != ({m}, {n})")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise ConfigError(
                f"variable {self.variable_ids[bad]}: lower {self.lower[bad]} "
                f"> upper {self.upper[bad]}"
            )
        bad_senses = set(self.senses) - {"E", "L", "G"}
        if bad_senses:
            raise ConfigError(f"unknown row senses: {bad_senses}")

    @property
    def n_variables(self) -> int:
        return len(self.variable_ids)

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    def row_coefficients(self, i: int) -> dict[str, float]:
        start, end = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return {
            self.variable_ids[j]: float(v)
            for j, v in zip(self.matrix.indices[start:end], self.matrix.data[start:end])
        }

    def equals_program(self, other: "LpInstance") -> bool:
        """Exact mathematical equality: ids, bounds, costs, rows, coefficients."""
        if self.variable_ids != other.variable_ids or self.row_ids != other.row_ids:
            return False
        if self.senses != other.senses:
            return False
        for mine, theirs in (
            (self.objective, other.objective),
            (self.lower, other.lower),
            (self.upper, other.upper),
            (self.rhs, other.rhs),
        ):
            if not np.array_equal(mine, theirs):
                return False
        return all(
            self.row_coefficients(i) == other.row_coefficients(i)
            for i in range(self.n_rows)
        )


class LpBuilder:
    """Incremental construction of an LpInstance."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self._var_ids: list[str] = []
        self._var_index: dict[str, int] = {}
        self._obj: list[float] = []
        self._lower: list[float] = []
        self._upper: list[float] = []
        self._row_ids: list[str] = []
        self._senses: list[str] = []
        self._rhs: list[float] = []
        self._entries: list[tuple[int, int, float]] = []   # (row, col, coef)

    def add_variable(
        self, vid: str, lower: float = 0.0, upper: float = INF, objective: float = 0.0
    ) -> int:
        if vid in self._var_index:
            raise ConfigError(f"duplicate variable id {vid!r}")
        index = len(self._var_ids)
        self._var_index[vid] = index
        self._var_ids.append(vid)
        self._obj.append(objective)
        self._lower.append(lower)
        self._upper.append(upper)
        return index

    def add_row(
        self, rid: str, coefficients: list[tuple[int, float]], sense: str, rhs: float
    ) -> int:
        if sense not in ("E", "L", "G"):
            raise ConfigError(f"row {rid!r}: sense must be E/L/G, got {sense!r}")
        row = len(self._row_ids)
        self._row_ids.append(rid)
        self._senses.append(sense)
        self._rhs.append(rhs)
        for col, coef in coefficients:
            if coef != 0.0:
                self._entries.append((row, col, coef))
        return row

    def index_of(self, vid: str) -> int:
        return self._var_index[vid]

    def build(self, meta: object | None = None) -> LpInstance:
        m, n = len(self._row_ids), len(self._var_ids)
        if self._entries:
            rows, cols, data = zip(*self._entries)
            matrix = sp.csr_matrix((data, (rows, cols)), shape=(m, n))
        else:
            matrix = sp.csr_matrix((m, n))
        return LpInstance(
            name=self.name,
            variable_ids=list(self._var_ids),
            objective=np.array(self._obj, dtype=float),
            lower=np.array(self._lower, dtype=float),
            upper=np.array(self._upper, dtype=float),
            row_ids=list(self._row_ids),
            senses=list(self._senses),
            rhs=np.array(self._rhs, dtype=float),
            matrix=matrix,
            meta=meta,
        )


@dataclass
class LpSolution:
    status: SolveStatus
    objective: float | None = None
    values: np.ndarray | None = None          # per variable
    duals: np.ndarray | None = None           # per row
    reduced_costs: np.ndarray | None = None   # per variable
    iterations: int = 0
    phase1_infeasibility: float = 0.0         # residual when infeasible

    def value_of(self, instance: LpInstance, vid: str) -> float:
        return float(self.values[instance.variable_ids.index(vid)])


def primal_residuals(instance: LpInstance, values: np.ndarray) -> np.ndarray:
    """Signed constraint violations per row (0 where satisfied)."""
    activity = instance.matrix @ values
    resid = np.zeros(instance.n_rows)
    for i, sense in enumerate(instance.senses):
        gap = activity[i] - instance.rhs[i]
        if sense == "E":
            resid[i] = gap
        elif sense == "L":
            resid[i] = max(gap, 0.0)
        else:
            resid[i] = min(gap, 0.0)
    return resid


def dual_objective(instance: LpInstance, solution: LpSolution) -> float:
    """Objective of the bound-augmented dual at the reported (y, d).

    b'y plus the bound terms d_j * l_j for positive and d_j * u_j for
    negative reduced costs.  Infinite bounds with a nonzero reduced cost
    indicate dual infeasibility and raise.
    """
    if solution.duals is None or solution.reduced_costs is None:
        raise ConfigError("solution carries no duals")
    total = float(instance.rhs @ solution.duals)
    for j, d in enumerate(solution.reduced_costs):
        if d > 1e-9:
            bound = instance.lower[j]
        elif d < -1e-9:
            bound = instance.upper[j]
        else:
            continue
        if not math.isfinite(bound):
            raise ConfigError(
                f"dual infeasible: variable {instance.variable_ids[j]} has "
                f"reduced cost {d} against an infinite bound"
            )
        total += d * bound
    return total


def verify_solution(
    instance: LpInstance, solution: LpSolution, feas_tol: float = 1e-6
) -> dict[str, float]:
    """Feasibility, duality-gap and complementary-slackness diagnostics.

    Residuals are scaled by (1 + |rhs|) per row; the gap is relative to
    max(1, |objective|).  Raises if the solution is not optimal.
    """
    if solution.status is not SolveStatus.OPTIMAL:
        raise ConfigError(f"cannot verify a {solution.status.value} solution")
    x = solution.values
    resid = primal_residuals(instance, x)
    scaled = np.abs(resid) / (1.0 + np.abs(instance.rhs))
    bound_viol = np.maximum(instance.lower - x, 0.0)
    bound_viol = np.maximum(bound_viol, np.maximum(x - instance.upper, 0.0))

    gap = abs(dual_objective(instance, solution) - solution.objective)
    gap_rel = gap / max(1.0, abs(solution.objective))

    # complementary slackness: y_i * slack_i for inequality rows
    activity = instance.matrix @ x
    comp = 0.0
    for i, sense in enumerate(instance.senses):
        if sense == "E" or solution.duals is None:
            continue
        slack = abs(instance.rhs[i] - activity[i])
        comp = max(comp, abs(solution.duals[i]) * slack / (1.0 + abs(instance.rhs[i])))

    return {
        "max_row_residual": float(scaled.max(initial=0.0)),
        "max_bound_violation": float(bound_viol.max(initial=0.0)),
        "duality_gap_rel": float(gap_rel),
        "max_complementary_slackness": float(comp),
        "feasible": bool(scaled.max(initial=0.0) <= feas_tol
                         and bound_viol.max(initial=0.0) <= feas_tol),
    }
