"""Run configuration: one JSON document per reproducible run.

The document is versioned and carries everything a pipeline needs: the
noise model, the volatility structure, the initial curve, the grid, and
the solver / Monte Carlo / output settings.  Loading validates the
standing assumptions and reports violations by their labels:

    (A1) the initial curve is positive,
    (A2) jumps below -1/lambda_upper have measure zero,
    (A3) the volatility factor is bounded away from zero and infinity
         with a bounded maturity derivative,
    (A4) the jump measure integrates min(y^2, y).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .curves import (InitialCurve, affine_curve, constant_curve,
                     exp_decay_curve, require_positive_on, table_curve)
from .errors import ConfigError, NonPositiveInitialCurve
from .grids import GridSpec
from .levy import LevyModelSpec, check_assumptions
from .measures import (GammaLike, MeasureFamily, PointMasses, StableLike,
                       UserDensity)
from .volatility import VolatilitySpec

__all__ = ["RunConfig", "load_config", "parse_config", "default_solver_settings",
           "default_mc_settings", "default_output_settings"]

SCHEMA_VERSION = 1

_EXPR_NAMES = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "cos": np.cos, "sin": np.sin, "where": np.where,
    "pi": math.pi, "e": math.e,
}


def default_solver_settings() -> dict:
    return {"tol": 1e-9, "max_iter": 200, "explosion_threshold": 1e8}


def default_mc_settings() -> dict:
    return {"n_paths": 100, "master_seed": 0, "eps": 1e-3,
            "t_checkpoints": None, "T_checkpoints": None}


def default_output_settings() -> dict:
    return {"directory": ".", "write_csv": True, "write_json": True}


@dataclass
class RunConfig:
    """Validated, fully built run description plus its source document."""

    levy: LevyModelSpec
    volatility: VolatilitySpec
    curve: InitialCurve
    grid: GridSpec
    solver: dict = field(default_factory=default_solver_settings)
    mc: dict = field(default_factory=default_mc_settings)
    outputs: dict = field(default_factory=default_output_settings)
    raw: dict = field(default_factory=dict)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported config version {version!r}; expected {SCHEMA_VERSION}")
    for key in ("levy", "volatility", "initial_curve", "grid"):
        if key not in doc:
            raise ConfigError(f"missing required section '{key}'")

    grid = _parse_grid(doc["grid"])
    vol = _parse_volatility(doc["volatility"], grid)
    levy = _parse_levy(doc["levy"])
    curve = _parse_curve(doc["initial_curve"])

    try:
        require_positive_on(curve, grid.T_nodes())
    except NonPositiveInitialCurve as exc:
        raise ConfigError(f"(A1) initial curve must be positive: {exc}") from exc

    report = check_assumptions(levy, vol)
    if not report.a2_pass:
        raise ConfigError(
            "(A2) jump support reaches "
            f"{report.support_infimum:g}, at or below the admissible bound "
            f"-1/lambda_upper = {report.a2_threshold:g}")
    if not report.a4_pass:
        raise ConfigError(
            "(A4) the jump measure must integrate min(y^2, y); got "
            f"small-jump part {report.a4_square_integral:g}, "
            f"tail part {report.a4_tail_integral:g}")

    solver = dict(default_solver_settings())
    solver.update(_section(doc, "solver"))
    _require_positive_number(solver, "tol")
    _require_positive_number(solver, "explosion_threshold")
    if not isinstance(solver.get("max_iter"), int) or solver["max_iter"] < 1:
        raise ConfigError("solver.max_iter must be a positive integer")

    mc = dict(default_mc_settings())
    mc.update(_section(doc, "mc"))
    if not isinstance(mc.get("n_paths"), int) or mc["n_paths"] < 1:
        raise ConfigError("mc.n_paths must be a positive integer")
    if not isinstance(mc.get("master_seed"), int) or mc["master_seed"] < 0:
        raise ConfigError("mc.master_seed must be a nonnegative integer")
    _require_positive_number(mc, "eps")

    outputs = dict(default_output_settings())
    outputs.update(_section(doc, "outputs"))

    return RunConfig(levy=levy, volatility=vol, curve=curve, grid=grid,
                     solver=solver, mc=mc, outputs=outputs, raw=doc)


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be an object")
    return sec


def _require_positive_number(sec: dict, key: str) -> None:
    val = sec.get(key)
    if not isinstance(val, (int, float)) or not math.isfinite(val) or val <= 0:
        raise ConfigError(f"'{key}' must be a positive finite number")


def _get_number(sec: dict, key: str, context: str) -> float:
    if key not in sec:
        raise ConfigError(f"{context}: missing '{key}'")
    val = sec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{context}: '{key}' must be a number")
    if not math.isfinite(float(val)):
        raise ConfigError(f"{context}: '{key}' must be finite")
    return float(val)


def _parse_grid(sec: dict) -> GridSpec:
    if not isinstance(sec, dict):
        raise ConfigError("grid section must be an object")
    try:
        return GridSpec(delta=_get_number(sec, "delta", "grid"),
                        t_star=_get_number(sec, "t_star", "grid"),
                        t_max=_get_number(sec, "t_max", "grid"),
                        gamma=_get_number(sec, "gamma", "grid"))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _parse_measure(sec: dict) -> MeasureFamily:
    if not isinstance(sec, dict):
        raise ConfigError("levy.measure must be an object")
    family = sec.get("family")
    try:
        if family == "point_masses":
            atoms = sec.get("atoms")
            if not isinstance(atoms, list):
                raise ConfigError("point_masses: 'atoms' must be a list of "
                                  "[size, weight] pairs")
            return PointMasses(tuple((float(y), float(w)) for y, w in atoms))
        if family == "stable_like":
            return StableLike(c=_get_number(sec, "c", "stable_like"),
                              alpha=_get_number(sec, "alpha", "stable_like"),
                              y_max=_get_number(sec, "y_max", "stable_like"))
        if family == "gamma_like":
            return GammaLike(c=_get_number(sec, "c", "gamma_like"),
                             beta=_get_number(sec, "beta", "gamma_like"))
        if family == "user_density":
            return _parse_user_density(sec)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid measure parameters: {exc}") from exc
    raise ConfigError(
        f"unknown measure family {family!r}; expected one of point_masses, "
        "stable_like, gamma_like, user_density")


def _parse_user_density(sec: dict) -> UserDensity:
    expr = sec.get("expression")
    if not isinstance(expr, str) or not expr.strip():
        raise ConfigError("user_density: 'expression' must be a nonempty string "
                          "in the variable y")
    try:
        code = compile(expr, "<user_density>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"user_density: bad expression: {exc}") from exc
    for name in code.co_names:
        if name not in _EXPR_NAMES and name != "y":
            raise ConfigError(
                f"user_density: name '{name}' is not allowed; available: "
                f"y, {', '.join(sorted(_EXPR_NAMES))}")

    def density(y):
        scope = dict(_EXPR_NAMES)
        scope["y"] = y
        return eval(code, {"__builtins__": {}}, scope)

    try:
        probe = float(density(0.5))
    except Exception as exc:
        raise ConfigError(f"user_density: expression failed at y=0.5: {exc}")
    if not math.isfinite(probe) or probe < 0.0:
        raise ConfigError("user_density: expression must be a finite "
                          "nonnegative density")
    return UserDensity(density_fn=density,
                       a4_certified=bool(sec.get("a4_certified", False)),
                       second_moment_certified=bool(
                           sec.get("second_moment_certified", False)))


def _parse_levy(sec: dict) -> LevyModelSpec:
    if not isinstance(sec, dict):
        raise ConfigError("levy section must be an object")
    # a missing measure section means a measure with no jumps
    measure = (_parse_measure(sec["measure"]) if "measure" in sec
               else PointMasses(()))
    subordinator = bool(sec.get("subordinator", False))
    drift = sec.get("drift_a", 0.0)
    if drift == "subordinator":
        first = measure.first_moment(0.0, 1.0)
        if not math.isfinite(first):
            raise ConfigError(
                "drift_a='subordinator' needs a finite small-jump first moment")
        drift_a = first
        subordinator = True
    else:
        if isinstance(drift, bool) or not isinstance(drift, (int, float)):
            raise ConfigError("levy.drift_a must be a number or 'subordinator'")
        drift_a = float(drift)
    q = sec.get("gaussian_q", 0.0)
    if isinstance(q, bool) or not isinstance(q, (int, float)) or q < 0:
        raise ConfigError("levy.gaussian_q must be a nonnegative number")
    try:
        return LevyModelSpec(drift_a=drift_a, gaussian_q=float(q),
                             measure=measure, subordinator=subordinator)
    except ValueError as exc:
        raise ConfigError(f"levy: {exc}") from exc


def _ones(T):
    return np.ones_like(np.asarray(T, dtype=float))


def _build_term(term: dict, n: int):
    kind = term.get("kind")
    context = f"volatility.terms[{n}]"
    if kind == "constant":
        level = _get_number(term, "level", context)

        def a_const(t):
            return np.full_like(np.asarray(t, dtype=float), level)

        return a_const, _ones
    if kind == "time_affine":
        intercept = _get_number(term, "intercept", context)
        slope = _get_number(term, "slope", context)

        def a_affine(t):
            return intercept + slope * np.asarray(t, dtype=float)

        return a_affine, _ones
    if kind == "exp_decay":
        level = _get_number(term, "level", context)
        rate = _get_number(term, "rate", context)

        def a_level(t):
            return np.full_like(np.asarray(t, dtype=float), level)

        def b_decay(T):
            return np.exp(-rate * np.asarray(T, dtype=float))

        return a_level, b_decay
    raise ConfigError(f"{context}: unknown kind {kind!r}; expected one of "
                      "constant, time_affine, exp_decay")


def _parse_volatility(sec: dict, grid: GridSpec) -> VolatilitySpec:
    if not isinstance(sec, dict):
        raise ConfigError("volatility section must be an object")
    terms_doc = sec.get("terms")
    if not isinstance(terms_doc, list) or not terms_doc:
        raise ConfigError("volatility.terms must be a nonempty list")
    terms = tuple(_build_term(t, n) for n, t in enumerate(terms_doc))
    time_only = all(t.get("kind") in ("constant", "time_affine")
                    for t in terms_doc)

    # mesh-sample the summed factor over the full rectangle for the
    # model constants the assumptions need
    t_mesh = np.linspace(0.0, grid.t_star, 257)
    T_mesh = np.linspace(0.0, grid.t_max, 257)
    total = np.zeros((t_mesh.size, T_mesh.size))
    for a_fn, b_fn in terms:
        a_vals = np.asarray(a_fn(t_mesh), dtype=float)
        b_vals = np.asarray(b_fn(T_mesh), dtype=float)
        total += np.outer(a_vals, b_vals)
    lo = float(np.min(total))
    hi = float(np.max(total))
    if lo <= 0.0:
        raise ConfigError(
            f"(A3) volatility factor must stay positive; sampled minimum {lo:g}")
    dT = T_mesh[1] - T_mesh[0]
    deriv_bound = float(np.max(np.abs(np.diff(total, axis=1)))) / dT
    lo_cfg = sec.get("lambda_lower", lo)
    hi_cfg = sec.get("lambda_upper", hi)
    try:
        return VolatilitySpec(terms=terms, lambda_lower=float(lo_cfg),
                              lambda_upper=float(hi_cfg),
                              x_derivative_bound=max(deriv_bound, 1e-12),
                              time_only=time_only)
    except ValueError as exc:
        raise ConfigError(f"(A3) volatility bounds invalid: {exc}") from exc


def _parse_curve(sec: dict) -> InitialCurve:
    if not isinstance(sec, dict):
        raise ConfigError("initial_curve section must be an object")
    family = sec.get("family")
    try:
        if family == "constant":
            return constant_curve(_get_number(sec, "level", "initial_curve"))
        if family == "affine":
            return affine_curve(_get_number(sec, "intercept", "initial_curve"),
                                _get_number(sec, "slope", "initial_curve"))
        if family == "exponential_decay":
            return exp_decay_curve(_get_number(sec, "level", "initial_curve"),
                                   _get_number(sec, "rate", "initial_curve"))
        if family == "table":
            points = sec.get("points")
            if not isinstance(points, list) or len(points) < 2:
                raise ConfigError(
                    "initial_curve table needs at least 2 [x, value] points")
            return table_curve([(float(x), float(v)) for x, v in points])
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial_curve: {exc}") from exc
    raise ConfigError(
        f"unknown initial_curve family {family!r}; expected one of constant, "
        "affine, exponential_decay, table")
