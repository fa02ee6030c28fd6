import json
import math

import numpy as np
import pytest

from contact_hj.config import (
    RunConfig, apply_overrides, from_dict, load_config, parse_init, parse_number, parse_seeds, spread_seeds,
)
from contact_hj.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.hamiltonian.name == "quad_pendulum"
    assert cfg.grid.n == 256
    assert cfg.torus().period == pytest.approx(2.0 * math.pi)
    assert cfg.longtime_config().solver == "fd"
    assert cfg.to_dict()["params"]["seeds"] == "spread:8"


def test_from_dict_and_unknown_keys():
    cfg = from_dict({"grid": {"n": 128}, "solver": {"kind": "dp", "tau": 0.05}, "experiment": "longtime"})
    assert cfg.grid.n == 128 and cfg.dp_config().tau == 0.05
    assert cfg.longtime_config().solver == "dp"
    with pytest.raises(ConfigError):
        from_dict({"grid": {"nodes": 128}})
    with pytest.raises(ConfigError):
        from_dict({"mesh": {}})
    with pytest.raises(ConfigError):
        from_dict({"solver": {"kind": "spectral"}})
    with pytest.raises(ConfigError):
        from_dict({"grid": {"n": 2}})


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"hamiltonian": {"name": "even_well"}, "output": {"formats": ["json"]}}))
    cfg = load_config(str(path))
    assert cfg.hamiltonian.name == "even_well"
    assert cfg.output.formats == ("json",)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_overrides_win():
    cfg = from_dict({"grid": {"n": 128, "period": 1.0}})
    cfg = apply_overrides(cfg, {"grid.n": 64, "grid.period": None, "experiment": "audit"})
    assert cfg.grid.n == 64 and cfg.grid.period == 1.0
    assert cfg.experiment == "audit"
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"mesh.n": 3})
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"grid.nodes": 3})


def test_parse_number():
    assert parse_number("pi") == pytest.approx(math.pi)
    assert parse_number("0.5pi") == pytest.approx(0.5 * math.pi)
    assert parse_number("-2") == -2.0
    with pytest.raises(ConfigError):
        parse_number("two")


def test_parse_init(torus64):
    point = parse_init("point:y=3,c=-1", torus64)
    assert point.values[3] == -1.0 and point.infinite_mask.sum() == 63
    assert parse_init("point:y=0,c=inf", torus64).all_infinite
    np.testing.assert_array_equal(parse_init("const:2", torus64).values, 2.0)
    quad = parse_init("quad:y=0|pi,a=2", torus64)
    assert quad.values[0] == 0.0 and quad.values[16] == pytest.approx((math.pi / 2) ** 2)
    assert parse_init("sin", torus64).values[16] == pytest.approx(1.0)
    assert parse_init("shift:1+const:2", torus64).values[0] == 3.0


@pytest.mark.parametrize("text", ["blob", "point:c=1", "point:y=99", "quad:y=zero", "const:x"])
def test_parse_init_errors(torus64, text):
    with pytest.raises(ConfigError):
        parse_init(text, torus64)


def test_seeds(torus64):
    seeds = spread_seeds(torus64, 4)
    assert len(seeds) == 4
    np.testing.assert_array_equal(seeds[0].values, 0.0)
    assert seeds[2].values[32] == 0.0
    assert len(parse_seeds("const:0; const:1", torus64)) == 2
    assert len(parse_seeds("spread:3", torus64)) == 3
    with pytest.raises(ConfigError):
        parse_seeds("spread:x", torus64)
    with pytest.raises(ConfigError):
        spread_seeds(torus64, 0)
