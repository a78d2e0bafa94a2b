import json

import numpy as np
import pytest

from satlab.config import (SCHEMA_VERSION, build_instance, load_config,
                           parse_config, serialize_config)
from satlab.errors import ConfigError


def minimal(**overrides):
    base = {
        "satlab_schema": 1,
        "model": {"kind": "linear", "n": 8, "s": 2.0},
        "rule": {"name": "discrepancy"},
        "grid": {"deltas": [1e-2, 1e-3, 1e-4, 1e-5], "seed": 0},
    }
    base.update(overrides)
    return base


def test_minimal_config_defaults():
    cfg = parse_config(minimal())
    assert cfg.model.kind == "linear" and cfg.model.n == 8
    assert cfg.rule_name == "discrepancy"
    assert cfg.rule.tau == 1.5 and cfg.rule.gamma == 0.5
    assert cfg.grid.deltas == (1e-2, 1e-3, 1e-4, 1e-5)
    assert cfg.grid.seed == 0
    assert cfg.output.directory == "out"
    assert set(cfg.output.formats) == {"csv", "json", "svg"}
    assert SCHEMA_VERSION == 1


def test_schema_version_enforced():
    bad = minimal()
    del bad["satlab_schema"]
    with pytest.raises(ConfigError):
        parse_config(bad)
    with pytest.raises(ConfigError):
        parse_config(minimal(satlab_schema=2))


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="surprise"):
        parse_config(minimal(surprise=1))
    cfg = minimal()
    cfg["model"]["surprise"] = 1
    with pytest.raises(ConfigError, match="surprise"):
        parse_config(cfg)
    cfg = minimal()
    cfg["rule"]["surprise"] = 1
    with pytest.raises(ConfigError, match="surprise"):
        parse_config(cfg)


def test_grid_expansion_geometric():
    cfg = minimal()
    cfg["grid"] = {"deltas": {"num": 5, "lo": 1e-4, "hi": 1.0}, "seed": 0}
    parsed = parse_config(cfg)
    want = tuple(np.geomspace(1.0, 1e-4, 5))
    assert parsed.grid.deltas == want
    assert all(parsed.grid.deltas[i + 1] < parsed.grid.deltas[i] for i in range(4))


def test_deltas_must_decrease():
    cfg = minimal()
    cfg["grid"]["deltas"] = [1e-4, 1e-3, 1e-2, 1e-1]
    with pytest.raises(ConfigError):
        parse_config(cfg)
    cfg["grid"]["deltas"] = [1e-2, 1e-2, 1e-3, 1e-4]
    with pytest.raises(ConfigError):
        parse_config(cfg)
    cfg["grid"]["deltas"] = [1e-2, -1e-3, 1e-4, 1e-5]
    with pytest.raises(ConfigError):
        parse_config(cfg)


def test_missing_seed_warns_and_defaults():
    cfg = minimal()
    del cfg["grid"]["seed"]
    with pytest.warns(UserWarning):
        parsed = parse_config(cfg)
    assert parsed.grid.seed == 0


def test_source_block_validation():
    good = minimal(instance={"source": {"nu": 0.5, "norm_u": 1.0}})
    assert parse_config(good).instance.source_nu == 0.5
    for bad_source in (
        {"nu": 0.5, "norm_w": 1.0},          # wrong norm key for the half order
        {"nu": 1.0, "norm_u": 1.0},          # wrong norm key for order one
        {"nu": 0.5, "norm_u": 1.0, "norm_w": 1.0},
        {"nu": 0.5},                          # no norm at all
        {"norm_u": 1.0},                      # no order
        {"nu": 0.5, "norm_u": 1.0, "profile": "wiggle"},
    ):
        with pytest.raises(ConfigError):
            parse_config(minimal(instance={"source": bad_source}))


def test_power_profile_shapes_source_element():
    cfg = minimal(instance={"source": {"nu": 0.5, "norm_u": 0.5, "profile": "power:2"}})
    inst = build_instance(parse_config(cfg))
    u = np.array([float(i) ** -2.0 for i in range(1, 9)])
    u = 0.5 * u / np.linalg.norm(u)
    offset = inst.x_true - inst.x_prior
    sigma = np.array([float(i) ** -2.0 for i in range(1, 9)])
    assert offset == pytest.approx(sigma * u, rel=1e-12)
    assert inst.source_norm == pytest.approx(0.5, rel=1e-13)


def test_build_instance_rejects_wrong_x_true_length():
    cfg = minimal(instance={"x_true": [1.0, 2.0]})
    with pytest.raises(ConfigError):
        build_instance(parse_config(cfg))


def test_serialize_round_trip():
    cfg = parse_config(minimal(instance={"source": {"nu": 0.5, "norm_u": 1.0, "profile": "power:2"}}))
    payload = serialize_config(cfg)
    again = parse_config(json.loads(json.dumps(payload)))
    assert again == cfg


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    target = tmp_path / "c.json"
    target.write_text(json.dumps(minimal()))
    assert load_config(target) == parse_config(minimal())


def test_composition_model_block():
    cfg = minimal(model={"kind": "composition", "n": 8, "s": 2.0, "beta": 0.2})
    inst = build_instance(parse_config(cfg))
    assert inst.model.kind == "composition"
    assert inst.model.beta == 0.2
    with pytest.raises(ConfigError):
        parse_config(minimal(model={"kind": "quadratic", "n": 8, "s": 2.0}))
