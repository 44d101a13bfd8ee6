"""JSON run configurations: schema validation and construction of the run objects."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .errors import ConfigError, DomainError, PreconditionError
from .geometry import CircularArc, Disk, Rectangle, Segment, boundary_arcs, validate_gamma
from .grid import Grid
from .sources import Bump, BumpSource, ConstantSource, GridSource

ALL_FIELDS = ("d_gamma", "u_f", "v_f", "labels", "ridge", "u", "v")


def schema() -> dict:
    text = resources.files("sandtable").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


@dataclass
class RunConfig:
    name: str
    dom: object
    gamma: tuple
    source: object
    h: float
    c: float = 0.1
    steady_tol: float = 1e-6
    max_steps: int | None = None
    wall_policy: str = "copy"
    record_every: int = 1000
    bumps: list = field(default_factory=list)
    quadrature_h: float | None = None
    out_dir: str = "out"
    fields: tuple = ALL_FIELDS
    oracle: str | None = None
    p_radius: float = 0.05
    band: float | None = None
    field_a: str | None = None
    field_b: str | None = None
    region: str = "all"
    mask_ridge: bool = False
    seed: int = 0
    raw: dict = field(default_factory=dict)

    def scheme_params(self):
        from .dynamics import SchemeParams

        return SchemeParams(h=self.h, c=self.c, steady_tol=self.steady_tol,
                            max_steps=self.max_steps, record_every=self.record_every)


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def _domain(d: dict):
    try:
        if d["type"] == "rectangle":
            return Rectangle(d["x0"], d["y0"], d["x1"], d["y1"])
        return Disk(d["center"][0], d["center"][1], d["radius"])
    except (DomainError, PreconditionError) as exc:
        raise ConfigError(str(exc), "domain") from exc


def _side(dom, item: dict, k: int):
    if not isinstance(dom, Rectangle):
        raise ConfigError("sides need a rectangular table", f"gamma.{k}")
    side = item["side"]
    if side in ("south", "north"):
        y = dom.y0 if side == "south" else dom.y1
        lo, hi = item.get("range", (dom.x0, dom.x1))
        return Segment((lo, y), (hi, y))
    x = dom.x0 if side == "west" else dom.x1
    lo, hi = item.get("range", (dom.y0, dom.y1))
    return Segment((x, lo), (x, hi))


def _gamma(dom, items: list) -> tuple:
    arcs = []
    for k, item in enumerate(items):
        kind = item["type"]
        try:
            if kind == "segment":
                arcs.append(Segment(tuple(item["a"]), tuple(item["b"])))
            elif kind == "side":
                arcs.append(_side(dom, item, k))
            elif kind == "arc":
                if not isinstance(dom, Disk):
                    raise ConfigError("arcs need a disk table", f"gamma.{k}")
                arcs.append(CircularArc(dom.cx, dom.cy, dom.radius,
                                        item.get("theta0", 0.0), item.get("theta1", 2 * math.pi)))
            else:
                arcs.extend(boundary_arcs(dom))
        except (DomainError, PreconditionError) as exc:
            raise ConfigError(str(exc), f"gamma.{k}") from exc
    try:
        return validate_gamma(dom, arcs)
    except DomainError as exc:
        raise ConfigError(str(exc), "gamma") from exc


def _source(item: dict, base_dir: str):
    try:
        if item["type"] == "constant":
            return ConstantSource(float(item["value"]))
        if item["type"] == "bumps":
            return BumpSource([Bump(tuple(b["center"]), b["radius"], b.get("amplitude", 1.0))
                               for b in item["bumps"]])
        from .fieldio import read_field

        path = item["file"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return GridSource.from_field(read_field(path))
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc), "source") from exc


def _resolve(path: str | None, base_dir: str) -> str | None:
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)


def parse_config(data: dict, base_dir: str = ".", h: float | None = None,
                 out_dir: str | None = None) -> RunConfig:
    """Validate ``data`` against the schema and build a :class:`RunConfig`.

    ``h`` and ``out_dir`` override the file's grid step and output directory.
    """
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _path(err))
    dom = _domain(data["domain"])
    gamma = _gamma(dom, data["gamma"])
    source = _source(data["source"], base_dir)
    step = float(h if h is not None else data["grid"]["h"])
    if not step > 0:
        raise ConfigError("grid step must be positive", "grid.h")
    try:
        Grid.nodes(dom, step)
    except DomainError as exc:
        raise ConfigError(str(exc), "grid.h") from exc
    scheme = data.get("scheme", {})
    checks = data.get("checks", {})
    outputs = data.get("outputs", {})
    compare = data.get("compare", {})
    bumps = [Bump(tuple(b["center"]), b["radius"], b.get("amplitude", 1.0))
             for b in checks.get("bumps", [])]
    directory = out_dir if out_dir is not None else outputs.get("directory", "out")
    if not os.path.isabs(directory) and out_dir is None:
        directory = os.path.join(base_dir, directory)
    return RunConfig(
        name=data.get("name", "run"), dom=dom, gamma=gamma, source=source, h=step,
        c=scheme.get("c", 0.1), steady_tol=scheme.get("steady_tol", 1e-6),
        max_steps=scheme.get("max_steps"), wall_policy=scheme.get("wall_policy", "copy"),
        record_every=scheme.get("record_every", 1000),
        bumps=bumps, quadrature_h=checks.get("quadrature_h"),
        out_dir=directory, fields=tuple(outputs.get("fields", ALL_FIELDS)),
        oracle=compare.get("oracle"), p_radius=compare.get("p_radius", 0.05),
        band=compare.get("band"),
        field_a=_resolve(compare.get("field"), base_dir),
        field_b=_resolve(compare.get("reference"), base_dir),
        region=compare.get("region", "all"), mask_ridge=compare.get("mask_ridge", False),
        seed=data.get("seed", 0), raw=data,
    )


def load_config(path: str | os.PathLike, h: float | None = None,
                out_dir: str | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    base = os.path.dirname(os.path.abspath(path))
    return parse_config(data, base, h=h, out_dir=out_dir)


__all__ = ["ALL_FIELDS", "RunConfig", "load_config", "parse_config", "schema"]
