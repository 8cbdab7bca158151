"""Run-configuration parsing and assumption gating."""

import copy
import json
import math

import pytest

from hjmm.config import (
    SCHEMA_VERSION,
    load_config,
    parse_config,
)
from hjmm.errors import ConfigError
from hjmm.levy import gamma_subordinator
from hjmm.measures import GammaLike, PointMasses, StableLike, UserDensity


def _base_doc() -> dict:
    return {
        "version": 1,
        "levy": {
            "drift_a": "subordinator",
            "measure": {"family": "gamma_like", "c": 0.5, "beta": 2.0},
        },
        "volatility": {
            "terms": [{"kind": "constant", "level": 0.2}],
        },
        "initial_curve": {"family": "exponential_decay", "level": 0.08,
                          "rate": 0.4},
        "grid": {"delta": 0.125, "t_star": 1.0, "t_max": 2.0, "gamma": 1.0},
    }


def test_minimal_document_parses() -> None:
    cfg = parse_config(_base_doc())
    assert isinstance(cfg.levy.measure, GammaLike)
    assert cfg.levy.subordinator
    assert cfg.grid.delta == 0.125
    assert cfg.volatility.time_only
    assert cfg.solver["tol"] == 1e-9
    assert cfg.mc["n_paths"] == 100
    assert cfg.mc["master_seed"] == 0


def test_subordinator_drift_matches_small_jump_mean() -> None:
    cfg = parse_config(_base_doc())
    expected = gamma_subordinator(0.5, 2.0)
    assert cfg.levy.drift_a == pytest.approx(expected.drift_a, rel=1e-12)


def test_version_gate() -> None:
    doc = _base_doc()
    doc["version"] = 2
    with pytest.raises(ConfigError, match="version"):
        parse_config(doc)
    del doc["version"]
    with pytest.raises(ConfigError):
        parse_config(doc)
    assert SCHEMA_VERSION == 1


def test_missing_sections_reported_by_name() -> None:
    for key in ("levy", "volatility", "initial_curve", "grid"):
        doc = _base_doc()
        del doc[key]
        with pytest.raises(ConfigError, match=key):
            parse_config(doc)


def test_a1_violation_names_the_assumption() -> None:
    doc = _base_doc()
    doc["initial_curve"] = {"family": "affine", "intercept": 0.1,
                            "slope": -0.2}
    with pytest.raises(ConfigError, match=r"\(A1\)"):
        parse_config(doc)


def test_a2_violation_names_the_assumption() -> None:
    # atom at -6 against lambda_upper = 0.2 breaks the support condition
    doc = _base_doc()
    doc["levy"] = {"drift_a": 0.0,
                   "measure": {"family": "point_masses",
                               "atoms": [[-6.0, 1.0]]}}
    with pytest.raises(ConfigError, match=r"\(A2\)"):
        parse_config(doc)


def test_a3_violation_names_the_assumption() -> None:
    doc = _base_doc()
    doc["volatility"] = {"terms": [{"kind": "time_affine", "intercept": 0.1,
                                    "slope": -0.5}]}
    with pytest.raises(ConfigError, match=r"\(A3\)"):
        parse_config(doc)


def test_a4_violation_names_the_assumption() -> None:
    # alpha >= 1 with unbounded support fails the tail moment; emulate a
    # heavy tail with a user density ~ y^-2
    doc = _base_doc()
    doc["levy"] = {"drift_a": 0.0,
                   "measure": {"family": "user_density",
                               "expression": "1.0 / (1.0 + y)**2"}}
    with pytest.raises(ConfigError, match=r"\(A4\)"):
        parse_config(doc)


def test_measure_families_constructed() -> None:
    doc = _base_doc()
    doc["levy"] = {"drift_a": 0.0,
                   "measure": {"family": "stable_like", "c": 1.0,
                               "alpha": 0.5, "y_max": 1.0}}
    cfg = parse_config(doc)
    assert isinstance(cfg.levy.measure, StableLike)

    doc["levy"] = {"drift_a": 0.0,
                   "measure": {"family": "point_masses",
                               "atoms": [[0.5, 1.0], [2.0, 0.5]]}}
    cfg = parse_config(doc)
    assert isinstance(cfg.levy.measure, PointMasses)


def test_missing_measure_means_no_jumps() -> None:
    doc = _base_doc()
    doc["levy"] = {"drift_a": 1.5}
    cfg = parse_config(doc)
    assert isinstance(cfg.levy.measure, PointMasses)
    assert cfg.levy.measure.atoms == ()


def test_unknown_measure_family_rejected() -> None:
    doc = _base_doc()
    doc["levy"]["measure"] = {"family": "cauchy"}
    with pytest.raises(ConfigError, match="cauchy"):
        parse_config(doc)


class TestUserDensityExpression:
    def _doc(self, expression: str) -> dict:
        doc = _base_doc()
        doc["levy"] = {"drift_a": 0.0,
                       "measure": {"family": "user_density",
                                   "expression": expression,
                                   "a4_certified": True,
                                   "second_moment_certified": True}}
        return doc

    def test_whitelisted_names_evaluate(self) -> None:
        cfg = parse_config(self._doc("exp(-2.0 * y)"))
        assert isinstance(cfg.levy.measure, UserDensity)
        assert cfg.levy.measure.a4_certified

    def test_disallowed_name_rejected(self) -> None:
        with pytest.raises(ConfigError, match="not allowed"):
            parse_config(self._doc("__import__('os').getcwd() and y"))

    def test_open_rejected(self) -> None:
        with pytest.raises(ConfigError, match="not allowed"):
            parse_config(self._doc("open('/etc/passwd') and y"))

    def test_negative_density_rejected(self) -> None:
        with pytest.raises(ConfigError, match="nonnegative"):
            parse_config(self._doc("-exp(-y)"))

    def test_syntax_error_rejected(self) -> None:
        with pytest.raises(ConfigError, match="bad expression"):
            parse_config(self._doc("exp(-y"))


def test_volatility_term_sum() -> None:
    doc = _base_doc()
    doc["volatility"] = {"terms": [
        {"kind": "constant", "level": 0.1},
        {"kind": "exp_decay", "level": 0.2, "rate": 0.5},
    ]}
    cfg = parse_config(doc)
    assert not cfg.volatility.time_only
    got = cfg.volatility.standard(0.3, 1.0)
    assert got == pytest.approx(0.1 + 0.2 * math.exp(-0.5))


def test_volatility_bounds_overridable() -> None:
    doc = _base_doc()
    doc["volatility"]["lambda_lower"] = 0.15
    doc["volatility"]["lambda_upper"] = 0.25
    cfg = parse_config(doc)
    assert cfg.volatility.lambda_lower == 0.15
    assert cfg.volatility.lambda_upper == 0.25


def test_solver_and_mc_validation() -> None:
    doc = _base_doc()
    doc["solver"] = {"tol": -1.0}
    with pytest.raises(ConfigError, match="tol"):
        parse_config(doc)

    doc = _base_doc()
    doc["solver"] = {"max_iter": 0}
    with pytest.raises(ConfigError, match="max_iter"):
        parse_config(doc)

    doc = _base_doc()
    doc["mc"] = {"n_paths": "many"}
    with pytest.raises(ConfigError, match="n_paths"):
        parse_config(doc)

    doc = _base_doc()
    doc["mc"] = {"master_seed": -3}
    with pytest.raises(ConfigError, match="master_seed"):
        parse_config(doc)


def test_curve_families() -> None:
    doc = _base_doc()
    doc["initial_curve"] = {"family": "table",
                            "points": [[0.0, 0.10], [2.0, 0.04]]}
    cfg = parse_config(doc)
    assert cfg.curve(1.0) == pytest.approx(0.07)

    doc["initial_curve"] = {"family": "constant", "level": 0.05}
    cfg = parse_config(doc)
    assert cfg.curve(1.7) == pytest.approx(0.05)


def test_load_config_roundtrip(tmp_path) -> None:
    p = tmp_path / "run.json"
    p.write_text(json.dumps(_base_doc()))
    cfg = load_config(str(p))
    assert cfg.grid.t_max == 2.0
    assert cfg.raw["version"] == 1


def test_raw_document_not_mutated() -> None:
    doc = _base_doc()
    snapshot = copy.deepcopy(doc)
    parse_config(doc)
    assert doc == snapshot
