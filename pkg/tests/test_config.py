import copy
import json
from pathlib import Path

import pytest

from sandtable.config import load_config, parse_config
from sandtable.errors import ConfigError
from sandtable.geometry import CircularArc, Disk, Rectangle, Segment
from sandtable.sources import BumpSource, ConstantSource, GridSource

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = {
    "domain": {"type": "rectangle", "x0": 0, "y0": 0, "x1": 1, "y1": 1},
    "gamma": [{"type": "side", "side": "south", "range": [0, 0.5]}],
    "source": {"type": "constant", "value": 1},
    "grid": {"h": 0.25},
}


def _with(**changes):
    data = copy.deepcopy(BASE)
    data.update(changes)
    return data


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_load(name):
    cfg = load_config(CONFIGS / name)
    assert cfg.h > 0 and cfg.gamma


def test_defaults_and_overrides(tmp_path):
    cfg = parse_config(BASE, str(tmp_path))
    assert isinstance(cfg.dom, Rectangle)
    assert cfg.gamma == (Segment((0, 0), (0.5, 0)),)
    assert isinstance(cfg.source, ConstantSource)
    assert (cfg.c, cfg.wall_policy, cfg.out_dir) == (0.1, "copy", str(tmp_path / "out"))
    cfg = parse_config(BASE, str(tmp_path), h=0.125, out_dir="elsewhere")
    assert cfg.h == 0.125 and cfg.out_dir == "elsewhere"
    assert cfg.scheme_params().dt == pytest.approx(0.1 * 0.125 ** 2)


def test_disk_arcs_and_bumps():
    data = _with(domain={"type": "disk", "center": [0, 0], "radius": 1},
                 gamma=[{"type": "arc", "theta0": 0, "theta1": 3.0}],
                 source={"type": "bumps", "bumps": [{"center": [0, 0], "radius": 0.5}]})
    cfg = parse_config(data)
    assert isinstance(cfg.dom, Disk)
    assert isinstance(cfg.gamma[0], CircularArc)
    assert isinstance(cfg.source, BumpSource)


def test_grid_source(tmp_path):
    from sandtable.fieldio import write_field
    from sandtable.grid import Grid, ScalarField
    import numpy as np

    g = Grid.nodes(Rectangle(0, 0, 1, 1), 0.25)
    write_field(tmp_path / "f.csv", ScalarField(g, np.ones(g.shape)))
    cfg = parse_config(_with(source={"type": "grid", "file": "f.csv"}), str(tmp_path))
    assert isinstance(cfg.source, GridSource)


@pytest.mark.parametrize("data,field", [
    (_with(grid={"h": 0.3}), "grid.h"),
    (_with(grid={}), "grid"),
    (_with(gamma=[]), "gamma"),
    (_with(gamma=[{"type": "segment", "a": [0, 0], "b": [0.5, 0.2]}]), "gamma"),
    (_with(gamma=[{"type": "arc"}]), "gamma.0"),
    (_with(domain={"type": "rectangle", "x0": 1, "y0": 0, "x1": 0, "y1": 1}), "domain"),
    (_with(scheme={"c": -1}), "scheme"),
    (_with(scheme={"wall_policy": "mirror"}), "scheme"),
    (_with(unknown=1), "<root>"),
    (_with(source={"type": "grid", "file": "missing.csv"}), "source"),
])
def test_invalid_configs_name_the_field(data, field):
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert err.value.field is not None and err.value.field.startswith(field)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigError):
        load_config(bad)
