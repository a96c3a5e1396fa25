import json
import math
import warnings

import pytest

from csatn_module.core_model import derive_sr_constants, has_errors, require_valid, validate
from csatn_module.errors import ConfigError, SeriesConvergenceError
from csatn_module.schemas import ScenarioConfig, SrParams


def test_defaults_are_valid(cfg):
    assert validate(cfg) == []
    assert require_valid(cfg) is cfg


def test_derived_quantities(cfg):
    assert cfg.r_c == pytest.approx(10000.0)
    assert cfg.n_0 == round(1e-4 * math.pi * 9500.0 ** 2) == 28353


def test_sr_constants_q1_collapse():
    kappa, delta, beta = derive_sr_constants(SrParams())
    assert beta == pytest.approx(1.0 / 0.316, rel=1e-14)
    assert delta == pytest.approx(0.1 / (0.316 * 0.416), rel=1e-14)
    # q = 1: kappa equals beta - delta = 1 / (2c + omega)
    assert kappa == pytest.approx(beta - delta, rel=1e-12)
    assert kappa == pytest.approx(1.0 / 0.416, rel=1e-12)


def test_sr_constants_reject_bad_params():
    with pytest.raises(SeriesConvergenceError):
        derive_sr_constants(SrParams(c=-1.0))


def test_association_override_is_a_warning():
    with pytest.warns(UserWarning, match="association"):
        cfg = ScenarioConfig(r_a=600.0)
    violations = validate(cfg)
    assert [v.severity for v in violations] == ["warning"]
    assert not has_errors(violations)


def test_replace_keeps_silent_when_association_unchanged(cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        changed = cfg.replace(h_a=80.0)
    assert changed.h_a == 80.0
    assert changed.config_hash() != cfg.config_hash()


@pytest.mark.parametrize("field,value", [("h_a", -1.0), ("p_t", 0.0), ("lambda_1", -1e-7),
                                         ("theta", 7.0), ("n_ta", 0)])
def test_error_class_violations(cfg, field, value):
    bad = cfg.replace(**{field: value})
    violations = validate(bad)
    assert has_errors(violations)
    assert any(v.field == field for v in violations)
    with pytest.raises(ConfigError):
        require_valid(bad)


def test_user_disk_must_exceed_an_disk(cfg):
    with pytest.warns(UserWarning):
        bad = cfg.replace(r_u=400.0, r_a=500.0, d_min=900.0)
    assert any(v.field == "r_u" for v in validate(bad))


def test_unit_strings_are_converted():
    cfg = ScenarioConfig.from_mapping({"r_u": "9.5 km", "p_t": "20 dBW", "theta": "30 deg",
                                       "g_t_side": "-10 dB", "sr": {"omega": "0.1"}})
    assert cfg.r_u == pytest.approx(9500.0)
    assert cfg.p_t == pytest.approx(100.0)
    assert cfg.theta == pytest.approx(math.pi / 6)
    assert cfg.g_t_side == pytest.approx(0.1)
    assert cfg.sr.omega == pytest.approx(0.1)


def test_unknown_key_is_config_error():
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_mapping({"h_a": 50.0, "height": 10.0})
    assert any("height" in v.field for v in exc.value.violations)


def test_bad_unit_is_config_error():
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_mapping({"r_u": "9.5 furlongs"})
    assert [v.field for v in exc.value.violations] == ["r_u"]
    assert "furlongs" in exc.value.violations[0].rule
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_mapping({"sr": {"c": "0.1 parsec"}})
    assert [v.field for v in exc.value.violations] == ["sr.c"]


def test_from_file_and_hash_are_stable(tmp_path, cfg):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"h_a": "50 m"}), encoding="utf-8")
    loaded = ScenarioConfig.from_file(str(path))
    assert loaded.h_a == pytest.approx(50.0)
    assert loaded.config_hash() == cfg.config_hash()
    assert len(cfg.config_hash()) == 12
