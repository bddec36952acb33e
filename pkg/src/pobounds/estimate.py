"""Finite-sample machinery: plug-in estimates, bootstrap, simulation loop.

All randomness flows from one explicit seed through ``numpy`` seed
sequences, so reruns are bit-identical and replicates can be regenerated
independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import bounds as bounds_mod
from . import identify as identify_mod
from .errors import (
    BootstrapFailureError,
    ConfigError,
    InsufficientDataError,
    MiteIncompatibleError,
    PoboundsError,
    UndefinedConditionalError,
    ValidationError,
)
from .model import (
    AssumptionSet,
    Dims,
    ExperimentalMarginals,
    ObservationalJoint,
    QuerySpec,
    SparseJointPO,
)


@dataclass(frozen=True)
class ExperimentalSample:
    """Raw per-arm outcome draws: ``arms[k]`` holds outcomes under do(X=k)."""

    dims: Dims
    arms: tuple[np.ndarray, ...]

    def __post_init__(self):
        arms = tuple(np.asarray(a, dtype=int) for a in self.arms)
        object.__setattr__(self, "arms", arms)
        if len(arms) != self.dims.d_x:
            raise ValidationError(f"expected {self.dims.d_x} arms, got {len(arms)}")
        for k, a in enumerate(arms):
            if a.size and (a.min() < 0 or a.max() >= self.dims.d_y):
                raise ValidationError(f"arm {k} contains outcomes outside [0, {self.dims.d_y})")


@dataclass(frozen=True)
class ObservationalSample:
    """Raw factual records, one (x, y) pair per row."""

    dims: Dims
    records: np.ndarray

    def __post_init__(self):
        rec = np.asarray(self.records, dtype=int).reshape(-1, 2)
        object.__setattr__(self, "records", rec)
        if rec.size:
            if rec[:, 0].min() < 0 or rec[:, 0].max() >= self.dims.d_x:
                raise ValidationError("treatment value out of range in records")
            if rec[:, 1].min() < 0 or rec[:, 1].max() >= self.dims.d_y:
                raise ValidationError("outcome value out of range in records")


def empirical_experimental(sample: ExperimentalSample) -> ExperimentalMarginals:
    """Per-arm frequency tables."""
    dims = sample.dims
    table = np.zeros((dims.d_x, dims.d_y))
    for k, arm in enumerate(sample.arms):
        if arm.size == 0:
            raise InsufficientDataError(f"arm {k} has no observations")
        table[k] = np.bincount(arm, minlength=dims.d_y) / arm.size
    return ExperimentalMarginals(table)


def empirical_observational(sample: ObservationalSample) -> ObservationalJoint:
    """Cell frequencies of the factual pair."""
    dims = sample.dims
    rec = sample.records
    if rec.shape[0] == 0:
        raise InsufficientDataError("observational sample is empty")
    table = np.zeros((dims.d_x, dims.d_y))
    np.add.at(table, (rec[:, 0], rec[:, 1]), 1.0)
    return ObservationalJoint(table / rec.shape[0])


def sample_from_truth(
    truth: SparseJointPO,
    n: int,
    seed: int | np.random.SeedSequence,
    kind: str,
) -> ExperimentalSample | ObservationalSample:
    """Seeded i.i.d. draws from a ground-truth joint.

    ``experimental`` draws ``n`` outcomes per arm from that arm's marginal;
    ``observational`` draws ``n`` factual (x, y) pairs.
    """
    rng = np.random.default_rng(seed)
    dims = truth.dims
    if kind == "experimental":
        marg = truth.po_marginals().table
        arms = tuple(rng.choice(dims.d_y, size=n, p=marg[k]) for k in range(dims.d_x))
        return ExperimentalSample(dims, arms)
    if kind == "observational":
        xy = truth.xy_marginal().table
        flat = xy.reshape(-1)
        idx = rng.choice(flat.size, size=n, p=flat / flat.sum())
        records = np.column_stack(np.divmod(idx, dims.d_y))
        return ObservationalSample(dims, records)
    raise ConfigError(f"unknown sample kind {kind!r}")


@dataclass(frozen=True)
class EndpointSummary:
    mean: float
    ci_low: float
    ci_high: float

    def width(self) -> float:
        return self.ci_high - self.ci_low

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "ci": [self.ci_low, self.ci_high]}


@dataclass(frozen=True)
class ReplicationResult:
    """Summary over replicates: one entry per endpoint, plus exclusions."""

    endpoints: Mapping[str, EndpointSummary]
    excluded: int
    used: int

    def to_json_dict(self) -> dict:
        return {
            "endpoints": {k: v.to_json_dict() for k, v in self.endpoints.items()},
            "excluded": self.excluded,
            "used": self.used,
        }


def _summarize(values_by_endpoint: dict[str, list[float]], excluded: int) -> ReplicationResult:
    used = len(next(iter(values_by_endpoint.values())))
    endpoints = {}
    for name, values in values_by_endpoint.items():
        arr = np.asarray(values)
        lo, hi = np.percentile(arr, [2.5, 97.5])
        endpoints[name] = EndpointSummary(float(arr.mean()), float(lo), float(hi))
    return ReplicationResult(endpoints, excluded, used)


def _one_estimate(
    dims: Dims,
    mode: str,
    query: QuerySpec,
    assumptions: AssumptionSet | None,
    exp: ExperimentalMarginals | None,
    obs: ObservationalJoint | None,
    slack: float | None,
) -> dict[str, float] | None:
    """Endpoint values for one replicate, or None when it must be excluded
    (infeasible bound / identification incompatibility)."""
    if mode == "bound":
        res = bounds_mod.bound(dims, query, exp=exp, obs=obs, assumptions=assumptions, slack=slack)
        if res.status != "ok":
            return None
        return {"lower": res.lower, "upper": res.upper}
    if mode == "identify":
        if (exp is None) == (obs is None):
            raise ConfigError("identification needs exactly one data source")
        try:
            if exp is not None:
                joint = identify_mod.identify_experimental(exp)
                value = identify_mod.evaluate(joint, query)
            else:
                joint = identify_mod.identify_observational(obs)
                value = identify_mod.evaluate(joint, query, obs=obs)
        except (MiteIncompatibleError, UndefinedConditionalError):
            return None
        return {"estimate": value}
    raise ConfigError(f"unknown mode {mode!r}")


def bootstrap(
    dims: Dims,
    query: QuerySpec,
    replicates: int,
    seed: int,
    mode: str = "bound",
    exp_sample: ExperimentalSample | None = None,
    obs_sample: ObservationalSample | None = None,
    assumptions: AssumptionSet | None = None,
    slack: float | None = None,
) -> ReplicationResult:
    """Nonparametric bootstrap over the raw samples.

    Experimental arms are resampled with replacement arm by arm, and
    observational records row-wise.  Each replicate produces bound endpoints
    or the identified value; infeasible replicates are excluded and counted.
    Reports the mean and the equal-tailed 95% percentile interval per
    endpoint.
    """
    if replicates < 1:
        raise ConfigError("need at least one bootstrap replicate")
    if exp_sample is None and obs_sample is None:
        raise ConfigError("bootstrap needs raw samples, not pre-aggregated tables")

    collected: dict[str, list[float]] = {}
    excluded = 0
    children = np.random.SeedSequence(seed).spawn(replicates)
    for child in children:
        rng = np.random.default_rng(child)
        exp = obs = None
        if exp_sample is not None:
            arms = tuple(arm[rng.integers(0, arm.size, arm.size)] for arm in exp_sample.arms)
            exp = empirical_experimental(ExperimentalSample(dims, arms))
        if obs_sample is not None:
            rec = obs_sample.records
            obs = empirical_observational(
                ObservationalSample(dims, rec[rng.integers(0, rec.shape[0], rec.shape[0])])
            )
        values = _one_estimate(dims, mode, query, assumptions, exp, obs, slack)
        if values is None:
            excluded += 1
            continue
        for k, v in values.items():
            collected.setdefault(k, []).append(v)
    if not collected:
        raise BootstrapFailureError(f"all {replicates} bootstrap replicates were infeasible")
    return _summarize(collected, excluded)


def simulation_study(
    truth: SparseJointPO,
    n: int,
    reps: int,
    seed: int,
    query: QuerySpec,
    mode: str = "bound",
    data_kind: str = "both",
    assumptions: AssumptionSet | None = None,
    slack: float | None = None,
) -> ReplicationResult:
    """The sample -> estimate -> bound/identify loop on synthetic data.

    Each replicate draws fresh experimental data (``n`` per arm) and/or
    observational data (``n`` records) from the truth, then computes the
    requested endpoints.  Infeasible replicates are excluded and counted.
    """
    if reps < 1:
        raise ConfigError("need at least one replicate")
    dims = truth.dims
    want_exp = data_kind in ("exp", "both")
    want_obs = data_kind in ("obs", "both")
    if not (want_exp or want_obs):
        raise ConfigError(f"unknown data kind {data_kind!r}")
    if mode == "identify" and data_kind == "both":
        raise ConfigError("identification needs exactly one data source; pick exp or obs")

    collected: dict[str, list[float]] = {}
    excluded = 0
    children = np.random.SeedSequence(seed).spawn(reps)
    for child in children:
        grand = child.spawn(2)
        exp = obs = None
        if want_exp:
            exp = empirical_experimental(sample_from_truth(truth, n, grand[0], "experimental"))
        if want_obs:
            obs = empirical_observational(sample_from_truth(truth, n, grand[1], "observational"))
        values = _one_estimate(dims, mode, query, assumptions, exp, obs, slack)
        if values is None:
            excluded += 1
            continue
        for k, v in values.items():
            collected.setdefault(k, []).append(v)
    if not collected:
        raise BootstrapFailureError(f"all {reps} simulation replicates were infeasible")
    return _summarize(collected, excluded)
