"""Self-contained dense two-phase simplex solver.

Problem sizes here are small (a few hundred variables, a few dozen rows), and
basic solutions double as sharpness witnesses, so a dense tableau with
Bland's rule is the right tool: deterministic pivots, exact vertex output,
and no external dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .compile import ConstraintSet
from .errors import SolverFailureError, ValidationError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
DEAD_TOL = 1e-12
MAX_ITERATIONS = 200_000


@dataclass(frozen=True)
class LpProblem:
    """Minimize or maximize ``objective . p`` subject to a constraint set.

    All variables are implicitly nonnegative.
    """

    objective: np.ndarray
    constraints: ConstraintSet
    sense: str = "maximize"

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        object.__setattr__(self, "objective", obj)
        if obj.shape != (self.constraints.dims.param_count(),):
            raise ValidationError(
                f"objective length {obj.shape} does not match {self.constraints.dims.param_count()} parameters"
            )
        if self.sense not in ("minimize", "maximize"):
            raise ValidationError(f"unknown sense {self.sense!r}")


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None
    witness: np.ndarray | None
    iterations: int
    certificate: tuple[str, ...] = ()


class LpBackend(Protocol):
    """Anything able to solve an :class:`LpProblem` can be swapped in."""

    def __call__(self, problem: LpProblem) -> LpSolution: ...


class _Tableau:
    """Standard-form tableau with one slack per inequality and one artificial
    per row.  Maintains reduced costs in the last row (minimization form)."""

    def __init__(self, constraints: ConstraintSet, n_params: int):
        rows = constraints.rows
        m = len(rows)
        n_slack = sum(1 for r in rows if r.kind == "le")
        self.n = n_params
        self.m = m
        self.n_slack = n_slack
        self.art0 = n_params + n_slack
        ncols = n_params + n_slack + m

        A = np.zeros((m, ncols))
        b = np.zeros(m)
        slack = 0
        for i, row in enumerate(rows):
            for idx, c in row.coeffs.items():
                A[i, idx] = c
            b[i] = row.rhs
            if row.kind == "le":
                A[i, n_params + slack] = 1.0
                slack += 1
        # rhs must start nonnegative for the artificial basis
        neg = b < 0
        A[neg] *= -1.0
        b[neg] *= -1.0

        for i in range(m):
            A[i, self.art0 + i] = 1.0

        self.T = np.zeros((m + 1, ncols + 1))
        self.T[:m, :ncols] = A
        self.T[:m, -1] = b
        self.basis = [self.art0 + i for i in range(m)]
        self.iterations = 0

    def set_costs(self, costs: np.ndarray) -> None:
        """Install a cost vector and price out the current basis."""
        self.T[-1, :] = 0.0
        self.T[-1, : costs.size] = costs
        for i, col in enumerate(self.basis):
            c = self.T[-1, col]
            if c != 0.0:
                self.T[-1, :] -= c * self.T[i, :]

    def _pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row, :] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])
        self.basis[row] = col
        self.iterations += 1

    def run(self, allowed: int) -> str:
        """Minimize until reduced costs are nonnegative (Bland's rule).

        ``allowed`` is the number of leading columns eligible to enter; it
        excludes artificial columns during phase 2.
        """
        T = self.T
        while True:
            if self.iterations > MAX_ITERATIONS:
                raise SolverFailureError("iteration limit exceeded", tableau=T.copy(), basis=list(self.basis))
            red = T[-1, :allowed]
            entering = -1
            for j in range(allowed):
                if red[j] < -PIVOT_TOL:
                    entering = j
                    break
            if entering < 0:
                return "optimal"
            col = T[:-1, entering]
            eligible = np.flatnonzero(col > PIVOT_TOL)
            if eligible.size == 0:
                if np.any(col > DEAD_TOL):
                    raise SolverFailureError(
                        f"pivot candidates below tolerance in column {entering}",
                        tableau=T.copy(),
                        basis=list(self.basis),
                    )
                return "unbounded"
            ratios = T[:-1, -1][eligible] / col[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + DEAD_TOL]
            leaving = min(ties, key=lambda i: self.basis[i])
            self._pivot(leaving, entering)

    def phase1(self) -> float:
        costs = np.zeros(self.art0 + self.m)
        costs[self.art0 :] = 1.0
        self.set_costs(costs)
        status = self.run(allowed=self.art0 + self.m)
        if status != "optimal":
            raise SolverFailureError("phase 1 terminated without optimum", tableau=self.T.copy())
        return -float(self.T[-1, -1])

    def phase1_duals(self) -> np.ndarray:
        """Row multipliers certifying infeasibility (Farkas certificate)."""
        red_art = self.T[-1, self.art0 : self.art0 + self.m]
        return 1.0 - red_art

    def drop_artificials(self) -> None:
        """Pivot zero-level artificials out of the basis; delete rows that
        turn out redundant, then remove the artificial columns."""
        keep = []
        for i in range(self.m):
            if self.basis[i] < self.art0:
                keep.append(i)
                continue
            row = self.T[i, : self.art0]
            best = int(np.argmax(np.abs(row)))
            if abs(row[best]) > PIVOT_TOL:
                # largest entry keeps the (near-zero) artificial level from
                # being amplified into the entering variable
                self._pivot(i, best)
                keep.append(i)
            # else: redundant row, dropped
        keep_rows = keep + [self.m]
        self.T = self.T[keep_rows][:, list(range(self.art0)) + [-1]]
        self.basis = [self.basis[i] for i in keep]
        self.m = len(self.basis)

    def solution_vector(self) -> np.ndarray:
        x = np.zeros(self.T.shape[1] - 1)
        for i, col in enumerate(self.basis):
            x[col] = self.T[i, -1]
        return np.where(x > 0.0, x, 0.0)


def solve(problem: LpProblem) -> LpSolution:
    """Two-phase simplex returning the optimum and a primal witness."""
    n = problem.constraints.dims.param_count()
    tab = _Tableau(problem.constraints, n)

    residual = tab.phase1()
    if residual > 1e-9:
        duals = tab.phase1_duals()
        provs = problem.constraints.provenances()
        cert = tuple(provs[i] for i in range(tab.m) if abs(duals[i]) > 1e-7)
        return LpSolution("infeasible", None, None, tab.iterations, cert)

    tab.drop_artificials()
    costs = np.zeros(tab.art0)
    sign = -1.0 if problem.sense == "maximize" else 1.0
    costs[:n] = sign * problem.objective
    tab.set_costs(costs)
    status = tab.run(allowed=tab.art0)
    if status == "unbounded":
        return LpSolution("unbounded", None, None, tab.iterations)

    witness = tab.solution_vector()[:n]
    value = float(problem.objective @ witness)
    return LpSolution("optimal", value, witness, tab.iterations)


def check_feasible(constraints: ConstraintSet) -> LpSolution:
    """Phase-1 feasibility probe.

    On infeasibility the certificate carries the provenance tags of rows with
    nonzero multipliers in the phase-1 dual: dropping or revising one of them
    is necessary to restore feasibility.  On feasibility the witness is a
    basic feasible point.
    """
    n = constraints.dims.param_count()
    tab = _Tableau(constraints, n)
    residual = tab.phase1()
    if residual > 1e-9:
        duals = tab.phase1_duals()
        provs = constraints.provenances()
        cert = tuple(provs[i] for i in range(tab.m) if abs(duals[i]) > 1e-7)
        return LpSolution("infeasible", None, None, tab.iterations, cert)
    witness = tab.solution_vector()[:n]
    return LpSolution("feasible", 0.0, witness, tab.iterations)


def default_backend(problem: LpProblem) -> LpSolution:
    """The built-in reference backend."""
    return solve(problem)
