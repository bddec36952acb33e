"""Compilation of data, exogeneity, and monotonicity into linear constraints.

Every row is a sparse linear form over the flattened parameter vector.
Nonnegativity of the parameters is implicit (the solver treats all variables
as >= 0), so it never appears as an explicit row.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError
from .model import (
    AssumptionSet,
    CellIndex,
    Dims,
    ExperimentalMarginals,
    MonotoneTerm,
    ObservationalJoint,
    flatten_index,
    require_valid,
)


@dataclass(frozen=True)
class ConstraintRow:
    """One linear constraint: ``coeffs . p (= | <=) rhs``.

    ``provenance`` records which modelling ingredient produced the row, e.g.
    ``base-sum``, ``experimental(0,1)``, ``observational(2,0)``,
    ``exogeneity(0,1,2)`` or ``monotone(0,lower)``.
    """

    coeffs: dict[int, float]
    rhs: float
    kind: str  # "eq" | "le"
    provenance: str

    def __post_init__(self):
        if not self.coeffs:
            raise ValidationError(f"empty coefficient vector in row {self.provenance}")
        if not np.isfinite(self.rhs):
            raise ValidationError(f"non-finite right-hand side in row {self.provenance}")
        if self.kind not in ("eq", "le"):
            raise ValidationError(f"unknown row kind {self.kind!r}")

    def dense(self, n: int) -> np.ndarray:
        row = np.zeros(n)
        for idx, c in self.coeffs.items():
            row[idx] = c
        return row


@dataclass(frozen=True)
class ConstraintSet:
    """An ordered collection of rows over a fixed parameter space."""

    dims: Dims
    rows: tuple[ConstraintRow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        n = self.dims.param_count()
        for row in self.rows:
            for idx in row.coeffs:
                if not 0 <= idx < n:
                    raise ValidationError(f"row {row.provenance} references index {idx} out of {n}")

    def __len__(self) -> int:
        return len(self.rows)

    def merge(self, *others: "ConstraintSet") -> "ConstraintSet":
        rows = list(self.rows)
        for other in others:
            if other.dims != self.dims:
                raise ValidationError("cannot merge constraint sets over different dimensions")
            rows.extend(other.rows)
        return ConstraintSet(self.dims, tuple(rows))

    def provenances(self) -> list[str]:
        return [row.provenance for row in self.rows]

    def to_json_dict(self) -> dict:
        """Debug dump; not a stability-guaranteed format."""
        return {
            "d_x": self.dims.d_x,
            "d_y": self.dims.d_y,
            "rows": [
                {
                    "kind": row.kind,
                    "rhs": row.rhs,
                    "provenance": row.provenance,
                    "coeffs": {str(i): c for i, c in sorted(row.coeffs.items())},
                }
                for row in self.rows
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConstraintSet":
        dims = Dims(int(data["d_x"]), int(data["d_y"]))
        rows = tuple(
            ConstraintRow(
                coeffs={int(i): float(c) for i, c in r["coeffs"].items()},
                rhs=float(r["rhs"]),
                kind=r["kind"],
                provenance=r["provenance"],
            )
            for r in data["rows"]
        )
        return cls(dims, rows)


def compile_base(dims: Dims) -> ConstraintSet:
    """The normalization row: all parameters sum to one."""
    coeffs = {i: 1.0 for i in range(dims.param_count())}
    return ConstraintSet(dims, (ConstraintRow(coeffs, 1.0, "eq", "base-sum"),))


def compile_experimental(dims: Dims, exp: ExperimentalMarginals) -> ConstraintSet:
    """Arm-marginal equalities, one per (arm, outcome) with the top outcome
    omitted: its row is implied by the base row and the others."""
    require_valid(exp, dims)
    rows = []
    for k in range(dims.d_x):
        for j in range(dims.d_y - 1):
            coeffs = {}
            for y_vec, x in dims.cells():
                if y_vec[k] == j:
                    coeffs[flatten_index(CellIndex(y_vec, x), dims)] = 1.0
            rows.append(ConstraintRow(coeffs, float(exp.table[k, j]), "eq", f"experimental({k},{j})"))
    return ConstraintSet(dims, tuple(rows))


def compile_observational(dims: Dims, obs: ObservationalJoint) -> ConstraintSet:
    """Factual-cell equalities, skipping the final (x, y) cell whose row is
    implied by the base row and the others."""
    require_valid(obs, dims)
    rows = []
    for l in range(dims.d_x):
        for m in range(dims.d_y):
            if (l, m) == (dims.d_x - 1, dims.d_y - 1):
                continue
            coeffs = {}
            for y_vec, x in dims.cells():
                if x == l and y_vec[l] == m:
                    coeffs[flatten_index(CellIndex(y_vec, x), dims)] = 1.0
            rows.append(ConstraintRow(coeffs, float(obs.table[l, m]), "eq", f"observational({l},{m})"))
    return ConstraintSet(dims, tuple(rows))


def compile_exogeneity(dims: Dims, obs: ObservationalJoint) -> ConstraintSet:
    """Product constraints P(Y_k=v, X=l) = P(Y_k=v) P(X=l).

    The treatment marginal is a known scalar from the observational table, so
    each constraint is linear.  Arms with zero probability produce 0 = 0 rows
    and are skipped with a warning.  Linearly dependent rows within a (k, v)
    group are emitted anyway; the solver copes with redundancy.
    """
    require_valid(obs, dims)
    px = obs.x_marginal()
    degenerate = [l for l in range(dims.d_x) if px[l] <= 0.0]
    if degenerate:
        warnings.warn(f"degenerate treatment arms {degenerate} have zero probability; exogeneity rows skipped")
    rows = []
    for k in range(dims.d_x):
        for v in range(dims.d_y):
            for l in range(dims.d_x):
                if px[l] <= 0.0:
                    continue
                coeffs = {}
                for y_vec, x in dims.cells():
                    if y_vec[k] != v:
                        continue
                    c = (1.0 if x == l else 0.0) - float(px[l])
                    if c != 0.0:
                        coeffs[flatten_index(CellIndex(y_vec, x), dims)] = c
                rows.append(ConstraintRow(coeffs, 0.0, "eq", f"exogeneity({k},{v},{l})"))
    return ConstraintSet(dims, tuple(rows))


def indicator_mask(dims: Dims, term: MonotoneTerm) -> np.ndarray:
    """0/1 vector over parameters selecting cells whose outcome vector lies
    inside every pairwise increment window of the term."""
    if term.d_lower.shape[0] != dims.d_x:
        raise ValidationError(f"term windows are {term.d_lower.shape[0]}x, dims expect {dims.d_x}")
    mask = np.zeros(dims.param_count())
    for y_vec in dims.outcome_vectors():
        if term.admits(y_vec):
            for x in range(dims.d_x):
                mask[flatten_index(CellIndex(y_vec, x), dims)] = 1.0
    return mask


def compile_monotonicity(dims: Dims, assumptions: AssumptionSet) -> ConstraintSet:
    """Two inequality rows per term, dropping sides that are vacuous given the
    base constraints (upper side when U = 1, lower side when L = 0)."""
    rows = []
    for w, term in enumerate(assumptions.terms):
        mask = indicator_mask(dims, term)
        coeffs = {i: 1.0 for i in np.flatnonzero(mask)}
        neg = {i: -1.0 for i in coeffs}
        if term.prob_upper < 1.0 and coeffs:
            # empty mask makes the upper side vacuous (0 <= U)
            rows.append(ConstraintRow(dict(coeffs), float(term.prob_upper), "le", f"monotone({w},upper)"))
        if term.prob_lower > 0.0:
            if not coeffs:
                # no outcome vector can realize the event; no data could fix this
                raise ValidationError(f"term {w} admits no outcome vector but requires probability >= {term.prob_lower}")
            rows.append(ConstraintRow(neg, -float(term.prob_lower), "le", f"monotone({w},lower)"))
    return ConstraintSet(dims, tuple(rows))


def _consecutive_pairs(d_x: int) -> dict[tuple[int, int], tuple[float, float]]:
    return {(t + 1, t): (0.0, np.inf) for t in range(d_x - 1)}


def preset(name: str, dims: Dims) -> AssumptionSet:
    """Named assumption presets, each a special case of the general form.

    Supported: ``mtr``, ``mite``, ``pairwise(s,t)``, ``epsilon_harm(eps)``,
    ``prob_mtr(L,U)``.
    """
    name = name.strip()
    base, args = name, []
    if "(" in name:
        if not name.endswith(")"):
            raise ConfigError(f"malformed preset {name!r}")
        base, arg_text = name[:-1].split("(", 1)
        args = [a.strip() for a in arg_text.split(",")] if arg_text.strip() else []
    base = base.strip()

    if base == "mtr":
        if args:
            raise ConfigError("mtr takes no arguments")
        term = MonotoneTerm.from_pairs(dims.d_x, _consecutive_pairs(dims.d_x), 1.0, 1.0)
    elif base == "mite":
        if args:
            raise ConfigError("mite takes no arguments")
        pairs = {(s, t): (0.0, 1.0) for s in range(dims.d_x) for t in range(s)}
        term = MonotoneTerm.from_pairs(dims.d_x, pairs, 1.0, 1.0)
    elif base == "pairwise":
        if len(args) != 2:
            raise ConfigError("pairwise takes two arguments: pairwise(s,t)")
        s, t = int(args[0]), int(args[1])
        term = MonotoneTerm.from_pairs(dims.d_x, {(s, t): (0.0, np.inf)}, 1.0, 1.0)
    elif base == "epsilon_harm":
        if len(args) != 1:
            raise ConfigError("epsilon_harm takes one argument: epsilon_harm(eps)")
        if dims.d_x != 2:
            raise ConfigError("epsilon_harm is defined for binary treatment only")
        eps = float(args[0])
        term = MonotoneTerm.from_pairs(dims.d_x, {(1, 0): (-np.inf, -1.0)}, 0.0, eps)
    elif base == "prob_mtr":
        if len(args) != 2:
            raise ConfigError("prob_mtr takes two arguments: prob_mtr(L,U)")
        lo, hi = float(args[0]), float(args[1])
        term = MonotoneTerm.from_pairs(dims.d_x, _consecutive_pairs(dims.d_x), lo, hi)
    else:
        raise ConfigError(f"unknown preset {name!r}")
    return AssumptionSet((term,))
