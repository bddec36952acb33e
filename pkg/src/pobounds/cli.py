"""Command-line front end: data ingestion, dispatch, JSON reports.

Exit codes: 0 ok, 1 usage or data error, 2 infeasible system, 3 data
incompatible with the identification assumption.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Any

import numpy as np

from . import bounds as bounds_mod
from . import estimate as estimate_mod
from . import identify as identify_mod
from .compile import preset
from .errors import (
    BootstrapFailureError,
    ConfigError,
    MiteIncompatibleError,
    PoboundsError,
    ValidationError,
)
from .model import (
    AssumptionSet,
    Dims,
    ExperimentalMarginals,
    MonotoneTerm,
    ObservationalJoint,
    QuerySpec,
    SparseJointPO,
)
from .queries import (
    build_conditional_query,
    build_event_query,
    build_moment_query,
    build_posterior_effect_query,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_MITE = 3


def _parse_dims(text: str) -> Dims:
    try:
        d_x, d_y = (int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"--dims expects 'dX,dY', got {text!r}")
    return Dims(d_x, d_y)


def _read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc}")


def _read_csv_records(path: str, columns: tuple[str, str], limits: tuple[int, int]) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != list(columns):
            raise ValidationError(
                f"{path}: expected header '{','.join(columns)}', got {reader.fieldnames}"
            )
        records = []
        for rowno, row in enumerate(reader, start=1):
            values = []
            for col, limit in zip(columns, limits):
                raw = (row.get(col) or "").strip()
                try:
                    v = int(raw)
                except ValueError:
                    raise ValidationError(f"{path}: row {rowno}: {col}={raw!r} is not an integer")
                if not 0 <= v < limit:
                    raise ValidationError(f"{path}: row {rowno}: {col}={v} outside [0, {limit})")
                values.append(v)
            records.append(values)
    return np.asarray(records, dtype=int).reshape(-1, 2)


def _load_table(data: Any) -> np.ndarray:
    if isinstance(data, dict) and "table" in data:
        data = data["table"]
    return np.asarray(data, dtype=float)


def load_experimental(path: str, dims: Dims):
    """Returns (sample or None, marginals). CSV gives raw records (header
    ``arm,y``); JSON gives a pre-aggregated d_x-by-d_y matrix."""
    if path.endswith(".csv"):
        rec = _read_csv_records(path, ("arm", "y"), (dims.d_x, dims.d_y))
        arms = tuple(rec[rec[:, 0] == k, 1] for k in range(dims.d_x))
        sample = estimate_mod.ExperimentalSample(dims, arms)
        return sample, estimate_mod.empirical_experimental(sample)
    table = _load_table(_read_json(path))
    exp = ExperimentalMarginals(table)
    if exp.dims != dims:
        raise ValidationError(f"{path}: table shape {table.shape} does not match --dims")
    return None, exp


def load_observational(path: str, dims: Dims):
    """Returns (sample or None, joint). CSV header is ``x,y``."""
    if path.endswith(".csv"):
        rec = _read_csv_records(path, ("x", "y"), (dims.d_x, dims.d_y))
        sample = estimate_mod.ObservationalSample(dims, rec)
        return sample, estimate_mod.empirical_observational(sample)
    table = _load_table(_read_json(path))
    obs = ObservationalJoint(table)
    if obs.dims != dims:
        raise ValidationError(f"{path}: table shape {table.shape} does not match --dims")
    return None, obs


def load_assumptions(source: str | None, dims: Dims) -> AssumptionSet:
    """``source`` is a preset name (possibly with arguments) or a JSON file."""
    if source is None:
        return AssumptionSet()
    if os.path.exists(source):
        data = _read_json(source)
        if "preset" in data:
            out = preset(data["preset"], dims)
            if data.get("exogeneity"):
                out = out.with_exogeneity()
            return out
        terms = []
        for t in data.get("terms", []):
            pairs = {}
            for p in t.get("pairs", []):
                lo = -np.inf if p.get("lower") is None else float(p["lower"])
                hi = np.inf if p.get("upper") is None else float(p["upper"])
                pairs[(int(p["s"]), int(p["t"]))] = (lo, hi)
            terms.append(
                MonotoneTerm.from_pairs(
                    dims.d_x, pairs, float(t.get("prob_lower", 1.0)), float(t.get("prob_upper", 1.0))
                )
            )
        return AssumptionSet(tuple(terms), bool(data.get("exogeneity", False)))
    return preset(source, dims)


def load_query(path: str, dims: Dims) -> tuple[QuerySpec, Any]:
    """Build a query from its JSON description; returns (query, raw spec)."""
    data = _read_json(path)
    kind = data.get("kind")
    given = data.get("given")
    given_pair = (int(given["x"]), int(given["y"])) if given else None
    if kind == "event":
        po = {int(k): v for k, v in (data.get("po") or {}).items()}
        if given_pair is not None:
            q = build_conditional_query(dims, po, given_pair, x=data.get("x"), y=data.get("y"))
        else:
            q = build_event_query(dims, po, x=data.get("x"), y=data.get("y"))
    elif kind == "moment":
        q = build_moment_query(dims, int(data["order"]), tuple(int(a) for a in data["arms"]))
    elif kind == "posterior_effect":
        if given_pair is None:
            raise ValidationError(f"{path}: posterior_effect queries need a 'given' pair")
        q = build_posterior_effect_query(dims, tuple(int(a) for a in data["arms"]), given_pair)
    elif kind == "raw":
        coeffs = {}
        for cell in data["cells"]:
            key = (tuple(int(v) for v in cell["y_vec"]), int(cell["x"]), int(cell["y"]))
            coeffs[key] = coeffs.get(key, 0.0) + float(cell["coeff"])
        q = QuerySpec(coeffs, given_pair)
        q.validate(dims)
    else:
        raise ValidationError(f"{path}: unknown query kind {kind!r}")
    return q, data


def load_truth(path: str) -> SparseJointPO:
    truth = SparseJointPO.from_json_dict(_read_json(path))
    if truth.space != "full":
        raise ValidationError(f"{path}: simulation truth must live on the full (y_vec, x, y) space")
    bad = truth.consistency_violations()
    if bad:
        raise ValidationError(f"{path}: truth violates consistency: " + "; ".join(bad))
    return truth


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bootstrap_block(args, dims, query, assumptions, mode, exp_sample, obs_sample):
    if (args.exp and exp_sample is None) or (args.obs and obs_sample is None):
        raise ConfigError("--bootstrap needs raw-record CSV inputs, not pre-aggregated tables")
    result = estimate_mod.bootstrap(
        dims,
        query,
        replicates=args.bootstrap,
        seed=args.seed,
        mode=mode,
        exp_sample=exp_sample,
        obs_sample=obs_sample,
        assumptions=assumptions,
        slack=getattr(args, "slack", None),
    )
    return result.to_json_dict()


def cmd_bound(args) -> int:
    dims = _parse_dims(args.dims)
    if not args.exp and not args.obs:
        raise ConfigError("need --exp and/or --obs")
    exp_sample = obs_sample = None
    exp = obs = None
    if args.exp:
        exp_sample, exp = load_experimental(args.exp, dims)
    if args.obs:
        obs_sample, obs = load_observational(args.obs, dims)
    assumptions = load_assumptions(args.assume, dims)
    if args.exogeneity:
        assumptions = assumptions.with_exogeneity()
    query, query_raw = load_query(args.query, dims)

    report: dict = {
        "command": "bound",
        "config": _echo_config(args),
        "assumptions": assumptions.to_json_dict(),
        "query": query_raw,
    }
    result = bounds_mod.bound(
        dims, query, exp=exp, obs=obs, assumptions=assumptions, slack=args.slack
    )
    report.update(result.to_json_dict(include_witnesses=args.witnesses))
    if result.status != "ok":
        _emit(report, args.out)
        return EXIT_INFEASIBLE
    if args.bootstrap:
        report["bootstrap"] = _bootstrap_block(
            args, dims, query, assumptions, "bound", exp_sample, obs_sample
        )
    _emit(report, args.out)
    return EXIT_OK


def cmd_identify(args) -> int:
    dims = _parse_dims(args.dims)
    if bool(args.exp) == bool(args.obs):
        raise ConfigError("identification needs exactly one of --exp or --obs")
    query, query_raw = load_query(args.query, dims)
    report: dict = {"command": "identify", "config": _echo_config(args), "query": query_raw}
    if args.exp:
        exp_sample, exp = load_experimental(args.exp, dims)
        obs_sample = None
        joint = identify_mod.identify_experimental(exp)
        estimate = identify_mod.evaluate(joint, query)
    else:
        print("note: observational identification assumes treatment exogeneity", file=sys.stderr)
        obs_sample, obs = load_observational(args.obs, dims)
        exp_sample = None
        joint = identify_mod.identify_observational(obs)
        estimate = identify_mod.evaluate(joint, query, obs=obs)
    report["status"] = "ok"
    report["estimate"] = estimate
    if args.joint:
        report["joint"] = joint.to_json_dict()
    if args.bootstrap:
        report["bootstrap"] = _bootstrap_block(
            args, dims, query, None, "identify", exp_sample, obs_sample
        )
    _emit(report, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    truth = load_truth(args.truth)
    dims = truth.dims
    assumptions = load_assumptions(args.assume, dims)
    if args.exogeneity:
        assumptions = assumptions.with_exogeneity()
    query, query_raw = load_query(args.query, dims)
    result = estimate_mod.simulation_study(
        truth,
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        query=query,
        mode=args.mode,
        data_kind=args.data,
        assumptions=assumptions,
        slack=args.slack,
    )
    report = {
        "command": "simulate",
        "config": _echo_config(args),
        "assumptions": assumptions.to_json_dict(),
        "query": query_raw,
        "status": "ok",
    }
    report.update(result.to_json_dict())
    _emit(report, args.out)
    return EXIT_OK


def _echo_config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pobounds",
        description="Sharp bounds and identification for joint potential-outcome probabilities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="solve the min/max programs for a query")
    p_bound.add_argument("--dims", required=True, help="treatment,outcome level counts, e.g. 3,3")
    p_bound.add_argument("--exp", help="experimental data: CSV (arm,y) or JSON matrix")
    p_bound.add_argument("--obs", help="observational data: CSV (x,y) or JSON matrix")
    p_bound.add_argument("--assume", help="assumption preset name or JSON file")
    p_bound.add_argument("--query", required=True, help="query JSON file")
    p_bound.add_argument("--exogeneity", action="store_true", help="add exogeneity constraints (needs --obs)")
    p_bound.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p_bound.add_argument("--seed", type=int, default=0)
    p_bound.add_argument("--slack", type=float, default=None, metavar="EPS",
                         help="relax data equalities to |row-rhs| <= EPS")
    p_bound.add_argument("--witnesses", action="store_true", help="include achieving parameter vectors")
    p_bound.add_argument("--out", help="write the JSON report here instead of stdout")
    p_bound.set_defaults(func=cmd_bound)

    p_ident = sub.add_parser("identify", help="closed-form point identification")
    p_ident.add_argument("--dims", required=True)
    p_ident.add_argument("--exp", help="experimental data (CSV or JSON matrix)")
    p_ident.add_argument("--obs", help="observational data (CSV or JSON matrix); implies exogeneity")
    p_ident.add_argument("--query", required=True)
    p_ident.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p_ident.add_argument("--seed", type=int, default=0)
    p_ident.add_argument("--joint", action="store_true", help="include the identified joint in the report")
    p_ident.add_argument("--out")
    p_ident.set_defaults(func=cmd_identify)

    p_sim = sub.add_parser("simulate", help="sample -> estimate -> bound/identify loop")
    p_sim.add_argument("--truth", required=True, help="ground-truth joint JSON")
    p_sim.add_argument("--n", type=int, required=True, help="sample size (per arm for experimental)")
    p_sim.add_argument("--reps", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--mode", choices=["bound", "identify"], default="bound")
    p_sim.add_argument("--data", choices=["exp", "obs", "both"], default="both")
    p_sim.add_argument("--assume")
    p_sim.add_argument("--exogeneity", action="store_true")
    p_sim.add_argument("--query", required=True)
    p_sim.add_argument("--slack", type=float, default=None)
    p_sim.add_argument("--out")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except MiteIncompatibleError as exc:
        report = {
            "command": args.command,
            "status": "mite-incompatible",
            "violations": [{"cell": name, "mass": mass} for name, mass in exc.violations],
        }
        _emit(report, getattr(args, "out", None))
        return EXIT_MITE
    except BootstrapFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PoboundsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
