"""Command-line front end.

Subcommands
-----------
classify   growth classification of the configured noise model
solve      one path: simulate, solve the fixed point, emit field files
verify     run the invariant suites
mc         Monte Carlo martingale test of discounted bond prices

Exit codes: 0 success (existence / converged / suites pass / test pass),
1 invalid configuration, 2 explosion verdict, 3 indeterminate verdict,
4 solver exploded or hit the iteration cap, 5 a verification suite
failed, 6 the martingale test failed.  The HJMM_LOG environment variable
sets the log level.  Reruns with the same config and seed write
byte-identical files for any --threads value.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, HjmmError
from .grids import RateField
from .levy import Verdict, classify_growth
from .market import martingale_test
from .paths import field_a, field_b, simulate_path
from .solver import STATUS_CONVERGED, solve_fixed_point
from .verification import run_all

__all__ = ["main"]

log = logging.getLogger("hjmm")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EXPLOSION = 2
EXIT_INDETERMINATE = 3
EXIT_DIVERGED = 4
EXIT_VERIFY_FAILED = 5
EXIT_MC_FAILED = 6


def _jsonable(obj):
    """Make a report JSON-safe and deterministic (no NaN/inf literals)."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isnan(val):
            return None
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        return val
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10e}"
    return str(value)


def _out_dir(args, config: RunConfig) -> str:
    out = args.out if args.out else config.outputs.get("directory", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _seed(args, config: RunConfig) -> int:
    return args.seed if args.seed is not None else config.mc["master_seed"]


def cmd_classify(args, config: RunConfig) -> int:
    result = classify_growth(config.levy, config.volatility.lambda_upper,
                             config.grid.t_star)
    payload = {
        "verdict": result.verdict.value,
        "rule_fired": result.rule_fired.value,
        "rho": result.rho,
        "notes": result.notes,
    }
    out = _out_dir(args, config)
    _write_json(os.path.join(out, "classification.json"), payload)
    print(f"classification: {result.verdict.value} "
          f"(rule {result.rule_fired.value})")
    if result.verdict == Verdict.EXISTENCE:
        return EXIT_OK
    if result.verdict == Verdict.EXPLOSION:
        return EXIT_EXPLOSION
    return EXIT_INDETERMINATE


def cmd_solve(args, config: RunConfig) -> int:
    result = classify_growth(config.levy, config.volatility.lambda_upper,
                             config.grid.t_star)
    if result.verdict != Verdict.EXISTENCE and not args.allow_explosive:
        print(f"refusing to solve: classifier says {result.verdict.value} "
              "(use --allow-explosive to force)", file=sys.stderr)
        return (EXIT_EXPLOSION if result.verdict == Verdict.EXPLOSION
                else EXIT_INDETERMINATE)
    seed = _seed(args, config)
    grid = config.grid
    path = simulate_path(config.levy, grid.t_star, [seed, 0],
                         eps=config.mc["eps"])
    b_vals = field_b(config.volatility, path, grid)
    a_vals = field_a(config.curve, b_vals, grid)
    report = solve_fixed_point(
        a_vals, config.volatility, config.levy, grid,
        tol=config.solver["tol"], max_iter=config.solver["max_iter"],
        explosion_threshold=config.solver["explosion_threshold"])
    out = _out_dir(args, config)
    payload = {
        "status": report.status,
        "iterations": report.iterations,
        "sup_diffs": report.sup_diffs,
        "norm_trace": report.norm_trace,
        "increment_mins": report.increment_mins,
        "c1_bound": report.c1_bound,
        "seed": seed,
        "n_jumps": path.n_jumps,
    }
    _write_json(os.path.join(out, "solve_report.json"), payload)
    if config.outputs.get("write_csv", True):
        _write_field_csvs(out, report.final_field)
    print(f"solve: {report.status} after {report.iterations} iterations")
    return EXIT_OK if report.status == STATUS_CONVERGED else EXIT_DIVERGED


def _write_field_csvs(out: str, rate_field: RateField) -> None:
    grid = rate_field.grid
    t_nodes = grid.t_nodes()
    T_nodes = grid.T_nodes()
    values = rate_field.values

    def standard_rows():
        for i, t in enumerate(t_nodes):
            for j, T in enumerate(T_nodes):
                yield (t, T, values[i, j])

    _write_csv(os.path.join(out, "field_standard.csv"),
               ["t", "T", "f"], standard_rows())

    def musiela_rows():
        for i, t in enumerate(t_nodes):
            for k in range(values.shape[1] - i):
                yield (t, k * grid.delta, values[i, i + k])

    _write_csv(os.path.join(out, "field_musiela.csv"),
               ["t", "x", "r"], musiela_rows())


def cmd_verify(args, config: RunConfig) -> int:
    report = run_all(config, _seed(args, config))
    out = _out_dir(args, config)
    payload = {
        "all_passed": report.all_passed,
        "suites": [dataclasses.asdict(s) for s in report.suites],
    }
    _write_json(os.path.join(out, "verification.json"), payload)
    for suite in report.suites:
        mark = "pass" if suite.passed else "FAIL"
        extra = f" ({suite.note})" if suite.note else ""
        print(f"verify {suite.name}: {mark}{extra}")
    return EXIT_OK if report.all_passed else EXIT_VERIFY_FAILED


def cmd_mc(args, config: RunConfig) -> int:
    report = martingale_test(
        config.levy, config.volatility, config.curve, config.grid,
        n_paths=config.mc["n_paths"], master_seed=_seed(args, config),
        eps=config.mc["eps"],
        t_checkpoints=config.mc.get("t_checkpoints"),
        T_checkpoints=config.mc.get("T_checkpoints"),
        tol=config.solver["tol"], max_iter=config.solver["max_iter"],
        explosion_threshold=config.solver["explosion_threshold"],
        threads=args.threads)
    out = _out_dir(args, config)
    rows = [(r.t, r.T, r.mean_discounted, r.reference, r.deviation,
             r.std, r.z_score, r.degenerate) for r in report.results]
    _write_csv(os.path.join(out, "martingale.csv"),
               ["t", "T", "mean_discounted", "reference", "deviation",
                "std", "z_score", "degenerate"], rows)
    summary = {
        "passed": report.passed,
        "valid": report.valid,
        "n_paths": report.n_paths,
        "n_excluded": report.n_excluded,
        "master_seed": report.master_seed,
        "max_abs_z": report.max_abs_z,
        "mean_abs_deviation": report.mean_abs_deviation,
        "notes": report.notes,
    }
    _write_json(os.path.join(out, "martingale.json"), summary)
    print(f"martingale test: {'pass' if report.passed else 'FAIL'} "
          f"(max |z| = {report.max_abs_z:.3g}, "
          f"excluded {report.n_excluded}/{report.n_paths})")
    return EXIT_OK if report.passed else EXIT_MC_FAILED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjmm",
        description="Forward-rate solver and simulator for jump-driven "
                    "term-structure models")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("classify", "classify the noise model growth regime"),
            ("solve", "solve the fixed point on one simulated path"),
            ("verify", "run the invariant suites"),
            ("mc", "Monte Carlo martingale test")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None,
                       help="override mc.master_seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes for mc")
        p.add_argument("--out", default=None,
                       help="output directory (default from config)")
        p.add_argument("--allow-explosive", action="store_true",
                       help="run solve even when the classifier does not "
                            "report existence")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("HJMM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handlers = {"classify": cmd_classify, "solve": cmd_solve,
                "verify": cmd_verify, "mc": cmd_mc}
    try:
        return handlers[args.command](args, config)
    except HjmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
