"""Command-line entry point.

Subcommands: decode, bound {pairwise,averaged,union-sum,union-closed,mgf},
conditions, mc {pairwise,recover}, sweep, verify.  Indices are 1-based at
this boundary (and 0-based everywhere inside the library).  All outputs are
deterministic given the config and seed: JSON is emitted with sorted keys,
CSV with a fixed documented header, and the worker count cannot change any
byte.

Exit codes: 0 success, 1 check/assertion failure, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import bounds, montecarlo
from .decoder import DEFAULT_CANDIDATE_BUDGET, decode_exhaustive
from .errors import SupportLabError
from .model import (
    DesignMatrix,
    ProblemInstance,
    SparseSignal,
    flat_signal,
    gaussian_design,
    make_pattern,
    synthesize_observation,
)
from .verify import DEFAULT_VERIFY_SEED, run_all

MC_CSV_HEADER = [
    "target", "design_mode", "n", "p", "k", "beta_min", "d", "seed", "level",
    "trials", "errors", "rate", "wilson_low", "wilson_high", "bound",
    "dominated", "error",
]

CONDITIONS_CSV_HEADER = [
    "p", "k", "beta_min_sq", "convexity_ok", "sufficient_n", "necessary_n",
    "gap_ratio", "error",
]

REGIME_CSV_HEADER = [
    "regime", "p", "k", "beta_min_sq", "sufficient_n", "necessary_n",
    "predictor", "sufficient_ratio", "necessary_ratio", "error",
]


def one_based(indices) -> list[int]:
    return [int(i) + 1 for i in indices]


def parse_index_list(text: str) -> list[int]:
    """Comma-separated 1-based indices -> 0-based list."""
    items = [s for s in text.replace(" ", "").split(",") if s]
    out = []
    for s in items:
        i = int(s)
        if i < 1:
            raise SupportLabError(f"indices at the CLI are 1-based; got {i}")
        out.append(i - 1)
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(s) for s in text.replace(" ", "").split(",") if s]


def parse_int_list(text: str) -> list[int]:
    return [int(s) for s in text.replace(" ", "").split(",") if s]


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _emit_table(args, header: list[str], rows: list[list]) -> None:
    """Tabular results are CSV by default; --format json yields row records."""
    if getattr(args, "format", None) == "json":
        records = [dict(zip(header, row)) for row in rows]
        _write_text(args.out, _json_text({"rows": records}))
    else:
        _write_text(args.out, _csv_text(header, rows))


def _emit_record(args, record: dict) -> None:
    """Structured results are JSON by default; --format csv yields one row."""
    if getattr(args, "format", None) == "csv":
        header = sorted(record)
        _write_text(args.out, _csv_text(header, [[record[k] for k in header]]))
    else:
        _write_text(args.out, _json_text(record))


def _build_signal(args, pattern) -> SparseSignal:
    if getattr(args, "beta", None):
        return SparseSignal(pattern=pattern, values=np.array(parse_float_list(args.beta)))
    return flat_signal(pattern, args.beta_min)


def _build_instance(args) -> ProblemInstance:
    if getattr(args, "instance", None):
        return load_instance(args.instance)
    support = make_pattern(
        parse_index_list(args.support) if args.support else list(range(args.k)), args.p
    )
    signal = _build_signal(args, support)
    design = gaussian_design(args.n, args.p, args.seed)
    y = synthesize_observation(design, signal, args.seed, noiseless=args.noiseless)
    return ProblemInstance(design=design, signal=signal, observation=y)


def save_instance(path: str, instance: ProblemInstance) -> None:
    """Write an instance as JSON (1-based support), readable by ``load_instance``."""
    record = {
        "design": instance.design.entries.tolist(),
        "support": one_based(instance.true_pattern.indices),
        "values": instance.signal.values.tolist(),
        "observation": instance.observation.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_text(record))


def load_instance(path: str) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    design = DesignMatrix(entries=np.array(record["design"], dtype=float))
    support = make_pattern([i - 1 for i in record["support"]], design.p)
    signal = SparseSignal(pattern=support, values=np.array(record["values"], dtype=float))
    return ProblemInstance(
        design=design, signal=signal, observation=np.array(record["observation"], dtype=float)
    )


# ----------------------------------------------------------------- commands


def cmd_decode(args) -> int:
    instance = _build_instance(args)
    if getattr(args, "save_instance", None):
        save_instance(args.save_instance, instance)
    result = decode_exhaustive(instance, max_candidates=args.cap_candidates)
    record = {
        "declared_support": one_based(result.pattern.indices),
        "score": result.score,
        "runner_up_score": result.runner_up_score,
        "candidates_scored": result.candidates_scored,
        "true_support": one_based(instance.true_pattern.indices),
        "recovered": result.pattern.indices == instance.true_pattern.indices,
        "n": instance.n,
        "p": instance.p,
        "k": instance.k,
    }
    _emit_record(args, record)
    return 0


def _bound_record(report: bounds.BoundReport, extra: dict) -> dict:
    record = {
        "log_bound": report.log_bound,
        "probability": report.probability,
        "d": report.d,
        "projection_energy": report.projection_energy,
    }
    record.update(extra)
    return record


def cmd_bound_pairwise(args) -> int:
    t_patt = make_pattern(
        parse_index_list(args.support) if args.support else list(range(args.k)), args.p
    )
    f_patt = make_pattern(parse_index_list(args.wrong), args.p)
    signal = _build_signal(args, t_patt)
    design = gaussian_design(args.n, args.p, args.seed)
    report = bounds.pairwise_conditional_bound(design, signal, t_patt, f_patt)
    if report.d == 0:
        print("warning: F equals the true support; the bound is vacuous", file=sys.stderr)
    _emit_record(args, _bound_record(report, {
        "kind": "pairwise", "n": args.n, "p": args.p, "k": args.k, "seed": args.seed,
    }))
    return 0


def cmd_bound_averaged(args) -> int:
    report = bounds.averaged_pairwise_bound(args.n, args.k, args.d, args.miss_energy)
    _emit_record(args, _bound_record(report, {
        "kind": "averaged", "n": args.n, "k": args.k, "miss_energy": args.miss_energy,
    }))
    return 0


def cmd_bound_union_sum(args) -> int:
    report = bounds.union_error_bound_sum(args.n, args.p, args.k, args.beta_min_sq)
    _emit_record(args, _bound_record(report, {
        "kind": "union-sum", "n": args.n, "p": args.p, "k": args.k,
        "beta_min_sq": args.beta_min_sq,
    }))
    return 0


def cmd_bound_union_closed(args) -> int:
    report = bounds.union_error_bound_closed_form(
        args.n, args.p, args.k, args.beta_min_sq, args.C
    )
    _emit_record(args, _bound_record(report, {
        "kind": "union-closed", "n": args.n, "p": args.p, "k": args.k,
        "beta_min_sq": args.beta_min_sq, "C": args.C, "B": (args.C - 5.0) / 2.0,
    }))
    return 0


def cmd_bound_mgf(args) -> int:
    t_patt = make_pattern(
        parse_index_list(args.support) if args.support else list(range(args.k)), args.p
    )
    f_patt = make_pattern(parse_index_list(args.wrong), args.p)
    signal = _build_signal(args, t_patt)
    design = gaussian_design(args.n, args.p, args.seed)
    value = bounds.exact_quadratic_log_mgf(design, signal, t_patt, f_patt, args.t)
    _emit_record(args, {
        "kind": "mgf", "t": args.t, "log_mgf": value,
        "n": args.n, "p": args.p, "k": args.k, "seed": args.seed,
    })
    return 0


def _conditions_grid_rows(args) -> list[list]:
    rows = []
    points = []
    if args.point:
        for text in args.point:
            parts = text.split(":")
            if len(parts) != 3:
                raise SupportLabError(f"--point needs p:k:beta_min_sq, got {text!r}")
            points.append((int(parts[0]), int(parts[1]), float(parts[2])))
    for p, k, b2 in points:
        try:
            rep = bounds.condition_report(p, k, b2, C=args.C, variant=args.variant)
            gap = rep.sufficient_threshold / rep.necessary_threshold
            rows.append([p, k, b2, rep.convexity_ok, rep.sufficient_threshold,
                         rep.necessary_threshold, gap, ""])
        except SupportLabError as exc:
            rows.append([p, k, b2, "", "", "", "", str(exc)])
    return rows


def cmd_conditions(args) -> int:
    if args.regime:
        p_grid = parse_int_list(args.p_grid) if args.p_grid else [2**e for e in range(6, 13)]
        rows = []
        ok_rows = 0
        try:
            table = bounds.regime_table(args.regime, p_grid, C=args.C, variant=args.variant)
            for row in table:
                rows.append([args.regime, row.p, row.k, row.beta_min_sq, row.sufficient_n,
                             row.necessary_n, row.predictor, row.sufficient_ratio,
                             row.necessary_ratio, ""])
                ok_rows += 1
        except SupportLabError as exc:
            rows.append([args.regime, "", "", "", "", "", "", "", "", str(exc)])
        _emit_table(args, REGIME_CSV_HEADER, rows)
        return 0 if ok_rows else 2
    if not args.point:
        raise SupportLabError("conditions needs --point p:k:beta_min_sq (repeatable) or --regime")
    rows = _conditions_grid_rows(args)
    _emit_table(args, CONDITIONS_CSV_HEADER, rows)
    return 0 if any(row[-1] == "" for row in rows) else 2


def _spec_from_args(args, target: str) -> montecarlo.ExperimentSpec:
    return montecarlo.ExperimentSpec(
        n=args.n,
        p=args.p,
        k=args.k,
        trials=args.trials,
        master_seed=args.seed,
        target=target,
        design_mode=args.design_mode,
        beta_min=args.beta_min,
        beta_values=tuple(parse_float_list(args.beta)) if getattr(args, "beta", None) else None,
        true_pattern=tuple(parse_index_list(args.support)) if args.support else None,
        random_true_pattern=getattr(args, "random_support", False),
        wrong_pattern=(
            tuple(parse_index_list(args.wrong)) if getattr(args, "wrong", None) else None
        ),
        noiseless=getattr(args, "noiseless", False),
        level=args.level,
    )


def _mc_row(spec: montecarlo.ExperimentSpec, result, error: Optional[str]) -> list:
    d = None
    if spec.target == montecarlo.TARGET_PAIRWISE and spec.wrong_pattern is not None:
        t_set = set(spec.true_pattern if spec.true_pattern is not None else range(spec.k))
        d = len(t_set - set(spec.wrong_pattern))
    if result is None:
        return [spec.target, spec.design_mode, spec.n, spec.p, spec.k, spec.beta_min,
                d, spec.master_seed, spec.level, spec.trials,
                None, None, None, None, None, None, error or ""]
    return [
        spec.target, spec.design_mode, spec.n, spec.p, spec.k, spec.beta_min,
        d, spec.master_seed, spec.level, spec.trials,
        result.error_count, result.rate, result.wilson_low, result.wilson_high,
        result.bound_value, result.wilson_low <= result.bound_value, "",
    ]


def cmd_mc_pairwise(args) -> int:
    spec = _spec_from_args(args, montecarlo.TARGET_PAIRWISE)
    result = montecarlo.run_pairwise(spec, workers=args.workers)
    _emit_table(args, MC_CSV_HEADER, [_mc_row(spec, result, None)])
    return 0


def cmd_mc_recover(args) -> int:
    spec = _spec_from_args(args, montecarlo.TARGET_RECOVERY)
    result = montecarlo.run_full_recovery(
        spec, workers=args.workers, max_candidates=args.cap_candidates
    )
    _emit_table(args, MC_CSV_HEADER, [_mc_row(spec, result, None)])
    return 0


def cmd_sweep(args) -> int:
    target = args.target
    base = _spec_from_args(args, target)
    values = parse_float_list(args.values)
    specs = []
    for v in values:
        changes: dict = {}
        if args.vary in ("n", "p", "k", "trials"):
            changes[args.vary] = int(v)
        elif args.vary == "beta_min":
            changes["beta_min"] = float(v)
        else:
            raise SupportLabError(f"--vary must be one of n,p,k,trials,beta_min, got {args.vary!r}")
        specs.append(montecarlo.ExperimentSpec(**{**_spec_dict(base), **changes}))
    rows = montecarlo.sweep(specs, workers=args.workers)
    csv_rows = [_mc_row(row.spec, row.result, row.error) for row in rows]
    _emit_table(args, MC_CSV_HEADER, csv_rows)
    return 0


def _spec_dict(spec: montecarlo.ExperimentSpec) -> dict:
    from dataclasses import asdict

    return asdict(spec)


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed, fault_c_sign=args.inject_fault)
    failures = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        if not res.passed:
            failures += 1
        line = f"{status} {res.name}"
        if args.verbose or not res.passed:
            line += f": {res.detail}"
        print(line)
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 1 if failures else 0


# ------------------------------------------------------------------- parser


def _add_common(sp, *, out=True, seed=True, workers=False, cap=False):
    sp.add_argument("--config", help="JSON config file; explicit flags override it")
    sp.add_argument("--emit-config", help="write the resolved parameters as JSON")
    if out:
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=["csv", "json"], default=None,
                        help="override the native format (tables: csv, records: json)")
    if seed:
        sp.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    if workers:
        sp.add_argument("--workers", type=int, default=1,
                        help="worker count; never changes any output byte")
    if cap:
        sp.add_argument("--cap-candidates", type=int, default=DEFAULT_CANDIDATE_BUDGET,
                        help="enumeration budget for exhaustive decoding")


def _add_instance_params(sp, wrong=False):
    sp.add_argument("--n", type=int, required=False, default=8)
    sp.add_argument("--p", type=int, required=False, default=10)
    sp.add_argument("--k", type=int, required=False, default=2)
    sp.add_argument("--beta-min", type=float, default=1.0, dest="beta_min")
    sp.add_argument("--beta", help="explicit signal values, comma separated")
    sp.add_argument("--support", help="true support, 1-based comma separated")
    if wrong:
        sp.add_argument("--wrong", required=True, help="candidate support, 1-based")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="supportlab",
        description="Exhaustive sparsity-pattern decoding and bound verification.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[tuple, argparse.ArgumentParser] = {}

    sp = subs.add_parser("decode", help="run the exhaustive decoder on one instance")
    _add_common(sp, workers=False, cap=True)
    _add_instance_params(sp)
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--instance", help="load the instance from a JSON file")
    sp.add_argument("--save-instance", dest="save_instance",
                    help="also write the generated instance as JSON")
    sp.set_defaults(func=cmd_decode)
    registry[("decode",)] = sp

    bound = subs.add_parser("bound", help="evaluate an analytic bound")
    bsubs = bound.add_subparsers(dest="subcommand", required=True)

    sp = bsubs.add_parser("pairwise", help="conditional bound exp(-c g + d/2)")
    _add_common(sp)
    _add_instance_params(sp, wrong=True)
    sp.set_defaults(func=cmd_bound_pairwise)
    registry[("bound", "pairwise")] = sp

    sp = bsubs.add_parser("averaged", help="design-averaged pairwise bound")
    _add_common(sp, seed=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--miss-energy", type=float, required=True, dest="miss_energy")
    sp.set_defaults(func=cmd_bound_averaged)
    registry[("bound", "averaged")] = sp

    sp = bsubs.add_parser("union-sum", help="union bound summed over deficits")
    _add_common(sp, seed=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--beta-min-sq", type=float, required=True, dest="beta_min_sq")
    sp.set_defaults(func=cmd_bound_union_sum)
    registry[("bound", "union-sum")] = sp

    sp = bsubs.add_parser("union-closed", help="closed-form union bound")
    _add_common(sp, seed=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--beta-min-sq", type=float, required=True, dest="beta_min_sq")
    sp.add_argument("--C", type=float, default=9.0)
    sp.set_defaults(func=cmd_bound_union_closed)
    registry[("bound", "union-closed")] = sp

    sp = bsubs.add_parser("mgf", help="exact log-MGF of the decision statistic")
    _add_common(sp)
    _add_instance_params(sp, wrong=True)
    sp.add_argument("--t", type=float, required=True)
    sp.set_defaults(func=cmd_bound_mgf)
    registry[("bound", "mgf")] = sp

    sp = subs.add_parser("conditions", help="sufficient/necessary sample-size table")
    _add_common(sp, seed=False)
    sp.add_argument("--point", action="append",
                    help="p:k:beta_min_sq (repeatable)")
    sp.add_argument("--regime", choices=sorted(bounds.REGIMES),
                    help="Table-style scaling row; expands over --p-grid")
    sp.add_argument("--p-grid", dest="p_grid", help="comma separated p values")
    sp.add_argument("--C", type=float, default=9.0)
    sp.add_argument("--variant", choices=["proof", "statement", "corollary"],
                    default="proof")
    sp.set_defaults(func=cmd_conditions)
    registry[("conditions",)] = sp

    mc = subs.add_parser("mc", help="Monte Carlo error-rate experiments")
    msubs = mc.add_subparsers(dest="subcommand", required=True)

    sp = msubs.add_parser("pairwise", help="frequency of Z_F > 0")
    _add_common(sp, workers=True)
    _add_instance_params(sp, wrong=True)
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--design-mode", choices=["fixed", "fresh"], default="fixed",
                    dest="design_mode")
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--level", type=float, default=0.95)
    sp.set_defaults(func=cmd_mc_pairwise)
    registry[("mc", "pairwise")] = sp

    sp = msubs.add_parser("recover", help="frequency of declared != true support")
    _add_common(sp, workers=True, cap=True)
    _add_instance_params(sp)
    sp.add_argument("--trials", type=int, default=1_000)
    sp.add_argument("--random-support", action="store_true", dest="random_support",
                    help="draw a fresh true support each trial")
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--level", type=float, default=0.95)
    sp.set_defaults(func=cmd_mc_recover, design_mode="fresh")
    registry[("mc", "recover")] = sp

    sp = subs.add_parser("sweep", help="grid of mc experiments over one parameter")
    _add_common(sp, workers=True)
    _add_instance_params(sp, wrong=False)
    sp.add_argument("--target", choices=["pairwise", "recovery"], default="pairwise")
    sp.add_argument("--wrong", help="candidate support for pairwise targets, 1-based")
    sp.add_argument("--design-mode", choices=["fixed", "fresh"], default="fixed",
                    dest="design_mode")
    sp.add_argument("--trials", type=int, default=2_000)
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--vary", required=True, help="parameter to sweep: n,p,k,trials,beta_min")
    sp.add_argument("--values", required=True, help="comma separated sweep values")
    sp.set_defaults(func=cmd_sweep)
    registry[("sweep",)] = sp

    sp = subs.add_parser("verify", help="run the oracle self-checks")
    _add_common(sp, out=False, seed=False)
    sp.add_argument("--seed", type=int, default=DEFAULT_VERIFY_SEED)
    sp.add_argument("--inject-fault", action="store_true", dest="inject_fault",
                    help="negative control: flip the sign of c")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_verify)
    registry[("verify",)] = sp

    return parser, registry


_HOUSEKEEPING = {"func", "command", "subcommand", "config", "emit_config"}


def _command_path(args) -> tuple:
    path = [args.command]
    if getattr(args, "subcommand", None):
        path.append(args.subcommand)
    return tuple(path)


def _prescan_config(argv: list[str]) -> Optional[str]:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()

    config_path = _prescan_config(argv)
    config_command: Optional[tuple] = None
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        params = data.get("params", {})
        config_command = tuple(data.get("command", ()))
        sub = registry.get(config_command)
        if sub is None:
            print(f"error: config names unknown command {list(config_command)}", file=sys.stderr)
            return 2
        supplied = {}
        for action in sub._actions:
            if action.dest in params and action.dest not in _HOUSEKEEPING:
                supplied[action.dest] = params[action.dest]
                action.required = False
        sub.set_defaults(**supplied)

    args = parser.parse_args(argv)
    if config_command is not None and _command_path(args) != config_command:
        print(
            f"error: config is for {list(config_command)}, not {list(_command_path(args))}",
            file=sys.stderr,
        )
        return 2

    if args.emit_config:
        params = {k: v for k, v in vars(args).items() if k not in _HOUSEKEEPING}
        with open(args.emit_config, "w", encoding="utf-8") as fh:
            fh.write(_json_text({"command": list(_command_path(args)), "params": params}))

    try:
        return args.func(args)
    except SupportLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
