import json

import pytest

from loadbal.harness.config import ConfigError, load_config, parse_config, set_dotted

MIN = {"graph": {"family": "cycle", "n": 4}, "model": "async", "initial": {"kind": "point", "K": 16}}


def test_minimal_config_defaults():
    cfg = load_config(json.dumps(MIN))
    assert cfg.trials == 10 and cfg.cadence == 1 and cfg.rounds.multiplier == 8
    assert cfg.rounds.kind == "tau_spectral" and cfg.model.kind == "async"


def test_k_zero_rejected():
    doc = set_dotted(MIN, "initial.K", 0)
    with pytest.raises(ConfigError, match="K must be >= 1"):
        parse_config(doc)


def test_unknown_model_lists_kinds():
    with pytest.raises(ConfigError) as ei:
        parse_config(set_dotted(MIN, "model", "gossip"))
    assert "circuit" in str(ei.value) and "random_matching" in str(ei.value)


def test_all_errors_in_one_pass():
    doc = {"graph": {"family": "cycle", "n": 4}, "model": "gossip", "initial": {"kind": "point", "K": 0},
           "trials": 0, "observers": {"cadence": 0}, "extra": 1}
    with pytest.raises(ConfigError) as ei:
        parse_config(doc)
    assert len(ei.value.errors) == 5


def test_k_below_initial_disc():
    doc = {**MIN, "initial": {"kind": "explicit", "loads": [9, 0, 0, 0]}, "K": 4}
    with pytest.raises(ConfigError, match="exceeds"):
        parse_config(doc)


def test_explicit_loads_length():
    doc = {**MIN, "initial": {"kind": "explicit", "loads": [1, 0]}}
    with pytest.raises(ConfigError, match="length"):
        parse_config(doc)


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        load_config("{graph:")


def test_initial_builders():
    for kind, want in [("point", [5, 0, 0, 0]), ("two-block", [5, 5, 0, 0])]:
        cfg = parse_config(set_dotted(MIN, "initial", {"kind": kind, "K": 5}))
        assert cfg.initial.build(4).tolist() == want
    cfg = parse_config(set_dotted(MIN, "initial", {"kind": "random-bounded", "K": 5, "seed": 3}))
    x = cfg.initial.build(4)
    assert x.min() >= 0 and x.max() <= 5


def test_set_dotted_expands_string_model():
    d = set_dotted(MIN, "model.seed", 4)
    assert d["model"] == {"kind": "async", "seed": 4} and MIN["model"] == "async"
