"""Orchestration: compile a problem, solve both directions, report the interval."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import simplex
from .compile import (
    ConstraintRow,
    ConstraintSet,
    compile_base,
    compile_exogeneity,
    compile_experimental,
    compile_monotonicity,
    compile_observational,
)
from .errors import ConfigError, PoboundsError
from .model import AssumptionSet, Dims, ExperimentalMarginals, ObservationalJoint, QuerySpec
from .queries import bind_condition, collapse_to_objective


@dataclass(frozen=True)
class BoundResult:
    """A sharp interval with achieving parameter vectors, or an infeasibility
    certificate naming the conflicting constraint provenance tags."""

    status: str  # "ok" | "infeasible"
    lower: float | None = None
    upper: float | None = None
    lower_witness: np.ndarray | None = None
    upper_witness: np.ndarray | None = None
    diagnostics: tuple[str, ...] = ()

    def width(self) -> float:
        if self.status != "ok":
            raise PoboundsError("no interval on an infeasible problem")
        return self.upper - self.lower

    def to_json_dict(self, include_witnesses: bool = False) -> dict:
        out: dict = {"status": self.status}
        if self.status == "ok":
            out["lower"] = self.lower
            out["upper"] = self.upper
            if include_witnesses:
                out["witnesses"] = {
                    "lower": list(map(float, self.lower_witness)),
                    "upper": list(map(float, self.upper_witness)),
                }
        else:
            out["diagnostics"] = list(self.diagnostics)
        return out


def _relax_data_rows(cs: ConstraintSet, eps: float) -> ConstraintSet:
    """Replace each data-equality row by |row - rhs| <= eps.

    Opt-in escape hatch for sampling noise: relaxation applies to rows
    sourced from the experimental/observational tables only and is recorded
    in the provenance, never silent.
    """
    if eps < 0:
        raise ConfigError(f"slack must be nonnegative, got {eps}")
    rows = []
    for row in cs.rows:
        data_row = row.provenance.startswith(("experimental(", "observational("))
        if row.kind == "eq" and data_row:
            neg = {i: -c for i, c in row.coeffs.items()}
            rows.append(ConstraintRow(dict(row.coeffs), row.rhs + eps, "le", row.provenance))
            rows.append(ConstraintRow(neg, -(row.rhs - eps), "le", row.provenance))
        else:
            rows.append(row)
    return ConstraintSet(cs.dims, tuple(rows))


def assemble_constraints(
    dims: Dims,
    exp: ExperimentalMarginals | None = None,
    obs: ObservationalJoint | None = None,
    assumptions: AssumptionSet | None = None,
    slack: float | None = None,
) -> ConstraintSet:
    """Base + whatever data is available + exogeneity + monotone rows."""
    assumptions = assumptions or AssumptionSet()
    if exp is None and obs is None:
        raise ConfigError("need at least one of experimental or observational data")
    if assumptions.exogeneity and obs is None:
        raise ConfigError("exogeneity constraints need the observational table for P(X=l)")
    cs = compile_base(dims)
    if exp is not None:
        cs = cs.merge(compile_experimental(dims, exp))
    if obs is not None:
        cs = cs.merge(compile_observational(dims, obs))
    if assumptions.exogeneity:
        cs = cs.merge(compile_exogeneity(dims, obs))
    cs = cs.merge(compile_monotonicity(dims, assumptions))
    if slack is not None:
        cs = _relax_data_rows(cs, slack)
    return cs


def bound(
    dims: Dims,
    query: QuerySpec,
    exp: ExperimentalMarginals | None = None,
    obs: ObservationalJoint | None = None,
    assumptions: AssumptionSet | None = None,
    slack: float | None = None,
    solver: simplex.LpBackend = simplex.solve,
) -> BoundResult:
    """Sharp bounds on the query under the given data and assumptions.

    Infeasibility is reported with a certificate, never auto-relaxed; pass
    ``slack`` explicitly to soften data equalities.
    """
    if query.condition is not None and obs is None:
        raise ConfigError("conditional queries need the observational table to bind the divisor")
    cs = assemble_constraints(dims, exp=exp, obs=obs, assumptions=assumptions, slack=slack)
    if query.condition is not None:
        objective = bind_condition(query, obs)
    else:
        objective = collapse_to_objective(query, dims)

    lo = solver(simplex.LpProblem(objective, cs, "minimize"))
    if lo.status == "infeasible":
        return BoundResult("infeasible", diagnostics=tuple(lo.certificate))
    hi = solver(simplex.LpProblem(objective, cs, "maximize"))
    if lo.status != "optimal" or hi.status != "optimal":
        # the feasible region sits inside the simplex, so this cannot be
        # unboundedness of a well-posed problem
        raise PoboundsError(f"unexpected solver status: min={lo.status}, max={hi.status}")
    return BoundResult(
        "ok",
        lower=lo.value,
        upper=hi.value,
        lower_witness=lo.witness,
        upper_witness=hi.witness,
    )


@dataclass(frozen=True)
class SweepPoint:
    assumptions: AssumptionSet
    result: BoundResult | None
    error: str | None = None


def bound_sweep(
    dims: Dims,
    query: QuerySpec,
    assumption_grid: Sequence[AssumptionSet],
    exp: ExperimentalMarginals | None = None,
    obs: ObservationalJoint | None = None,
    slack: float | None = None,
) -> list[SweepPoint]:
    """One bound per grid point, in input order; per-point failures are
    recorded and do not stop the sweep."""
    out = []
    for assumptions in assumption_grid:
        try:
            res = bound(dims, query, exp=exp, obs=obs, assumptions=assumptions, slack=slack)
            out.append(SweepPoint(assumptions, res))
        except PoboundsError as exc:
            out.append(SweepPoint(assumptions, None, error=str(exc)))
    return out


def constraint_residual(cs: ConstraintSet, x: np.ndarray) -> float:
    """Worst violation of the system by a candidate point (for witness checks)."""
    n = cs.dims.param_count()
    worst = float(max(0.0, -x.min())) if x.size else 0.0
    for row in cs.rows:
        val = sum(c * x[i] for i, c in row.coeffs.items())
        if row.kind == "eq":
            worst = max(worst, abs(val - row.rhs))
        else:
            worst = max(worst, val - row.rhs)
    return worst
