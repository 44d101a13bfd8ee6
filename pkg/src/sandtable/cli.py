"""Command line front end: ``sandtable {equilibrium,simulate,compare}``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
instability, 4 no steady state within the step budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import analytic, backend
from .config import RunConfig, load_config
from .dynamics import (CLASS_NAMES, WALL, decomposed_run, node_classes, run_to_equilibrium,
                       wall_normal_derivative)
from .equilibrium import (mass_identity, minimal_standing_layer, transport_density_field,
                          weak_residual)
from .errors import (ConfigError, EmptySupportError, GridMismatchError, InstabilityError,
                     PreconditionError, SandtableError)
from .fieldio import read_field, write_field
from .geometry import dist_gamma_field, extended_ridge_mask, region_decomposition
from .grid import Grid, ScalarField

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_NOT_CONVERGED = 0, 2, 3, 4


def _say(msg: str) -> None:
    print(msg, flush=True)


def _write_json(path: Path, payload) -> None:
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _export(out: Path, name: str, field: ScalarField, cfg: RunConfig) -> None:
    if name in cfg.fields:
        write_field(out / f"{name}.csv", field)


def cmd_equilibrium(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    grid = Grid.nodes(cfg.dom, cfg.h)
    workers = backend.threads()
    report: dict = {"name": cfg.name, "h": cfg.h, "backend": backend.NAME}

    d = dist_gamma_field(grid, cfg.dom, cfg.gamma)
    _export(out, "d_gamma", d, cfg)
    try:
        uf = minimal_standing_layer(grid, cfg.source, cfg.dom, cfg.gamma)
        _export(out, "u_f", uf, cfg)
    except EmptySupportError as exc:
        report["u_f"] = f"not computed: {exc}"
        _say(f"u_f: not computed ({exc})")
    vf = transport_density_field(grid, cfg.source, cfg.dom, cfg.gamma, workers=workers)
    _export(out, "v_f", vf, cfg)
    labels = region_decomposition(grid, cfg.dom, cfg.gamma)
    _export(out, "labels", labels, cfg)
    ridge = extended_ridge_mask(grid, cfg.dom, cfg.gamma)
    _export(out, "ridge", ScalarField(grid, np.asarray(ridge.values, dtype=float)), cfg)

    # identities on the cell lattice, where every sample is interior
    qh = cfg.quadrature_h or cfg.h
    cells = Grid.cells(cfg.dom, qh)
    vc = transport_density_field(cells, cfg.source, cfg.dom, cfg.gamma, workers=workers)
    dc = dist_gamma_field(cells, cfg.dom, cfg.gamma)
    try:
        m = mass_identity(vc, cfg.source, dc, cfg.dom)
        report["mass_identity"] = {"integral_v": m.integral_v, "integral_fd": m.integral_fd,
                                   "residual": m.residual}
        _say(f"mass identity: int v = {m.integral_v:.10g}, int f*d = {m.integral_fd:.10g}, "
             f"relative residual = {m.residual:.3e}")
    except PreconditionError as exc:
        report["mass_identity"] = f"undefined: {exc}"
        _say(f"mass identity: undefined ({exc})")
    rows = []
    for k, phi in enumerate(cfg.bumps):
        try:
            r = weak_residual(dc, vc, cfg.source, phi, cfg.dom, cfg.gamma)
        except PreconditionError as exc:
            _say(f"weak residual [{k}]: skipped ({exc})")
            continue
        rows.append({"bump": k, "center": list(phi.center), "radius": phi.radius, "residual": r})
        _say(f"weak residual [{k}] at {tuple(phi.center)}: {r:.3e}")
    report["weak_residuals"] = rows
    _write_json(out / "equilibrium.json", report)
    return EXIT_OK


def _wall_log(path: Path, u: np.ndarray, classes) -> None:
    dn = wall_normal_derivative(u, classes)
    g = classes.grid
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("i", "j", "x", "y", "class", "out_x", "out_y", "outward_derivative", "rule"))
        for i, j in zip(*np.nonzero(classes.cls > 0)):
            c = int(classes.cls[i, j])
            if c == 1:
                continue  # interior nodes carry no boundary information
            if c == WALL:
                rule = "zero" if dn[i, j] > 0 else "copy"
                deriv = format(float(dn[i, j]), ".17g")
            else:
                rule, deriv = "", ""
            w.writerow((int(i), int(j), format(float(g.xs[i]), ".17g"),
                        format(float(g.ys[j]), ".17g"), CLASS_NAMES[c],
                        int(classes.out_x[i, j]), int(classes.out_y[i, j]), deriv, rule))


def cmd_simulate(cfg: RunConfig, decompose: bool = False) -> int:
    out = _outdir(cfg)
    params = cfg.scheme_params()
    grid = Grid.nodes(cfg.dom, cfg.h)
    classes = node_classes(grid, cfg.dom, cfg.gamma).with_policy(cfg.wall_policy)
    try:
        if decompose:
            labels = region_decomposition(grid, cfg.dom, cfg.gamma)
            state, diags = decomposed_run(cfg.source, params, cfg.dom, cfg.gamma, labels,
                                          wall_policy=cfg.wall_policy)
        else:
            state, diag = run_to_equilibrium(cfg.source, params, cfg.dom, cfg.gamma,
                                             classes=classes)
            diags = [diag]
    except InstabilityError as exc:
        partial = exc.state
        step = exc.step
        if partial is not None:
            write_field(out / f"u_partial_step{step}.csv", partial.u)
            write_field(out / f"v_partial_step{step}.csv", partial.v)
        _write_json(out / "instability.json", {"step": step, "message": str(exc),
                                                "c": cfg.c, "h": cfg.h})
        print(f"error: numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE

    _export(out, "u", state.u, cfg)
    _export(out, "v", state.v, cfg)
    with (out / "rate_history.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("region", "step", "rate"))
        for k, d in enumerate(diags):
            for n, r in d.rate_history:
                w.writerow((k, n, format(r, ".17g")))
    _wall_log(out / "walls.csv", state.u.values, classes)
    summary = {"name": cfg.name, "h": cfg.h, "dt": params.dt, "backend": backend.NAME,
               "decomposed": decompose, "regions": [d.summary() for d in diags]}
    _write_json(out / "simulate.json", summary)
    converged = all(d.converged for d in diags)
    for k, d in enumerate(diags):
        s = d.summary()
        _say(f"region {k}: steps={s['steps']} rate={s['rate']:.3e} converged={s['converged']} "
             f"mass_in={s['mass_in']:.6g} outflux={s['outflux']:.6g}")
    if not converged:
        print(f"error: no steady state within {params.step_limit()} steps", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _oracle(cfg: RunConfig, grid: Grid):
    if cfg.oracle == "exact_standing":
        return analytic.exact_standing
    if cfg.oracle == "exact_rolling":
        return analytic.exact_rolling
    return dist_gamma_field(grid, cfg.dom, cfg.gamma)


def cmd_compare(cfg: RunConfig, field_a: str | None, field_b: str | None) -> int:
    path_a = field_a or cfg.field_a
    path_b = field_b or cfg.field_b
    if path_a is None:
        raise ConfigError("no field to compare", "compare.field")
    if path_b is None and cfg.oracle is None:
        raise ConfigError("need a reference field or an oracle", "compare.oracle")
    a = read_field(path_a)
    grid = a.grid
    ref = read_field(path_b) if path_b is not None else _oracle(cfg, grid)
    if isinstance(ref, ScalarField) and not grid.same_as(ref.grid):
        raise GridMismatchError("the two fields live on different grids")
    excl = analytic.exclusion_mask(grid, cfg.p_radius, cfg.band)
    if cfg.region == "left":
        X, _ = grid.mesh()
        excl |= X > analytic.P[0]
    if cfg.mask_ridge:
        excl |= np.asarray(extended_ridge_mask(grid, cfg.dom, cfg.gamma).values, dtype=bool)
    # NaN samples (boundary singularities, points off the table) are left out
    excl |= ~np.isfinite(a.values)
    if isinstance(ref, ScalarField):
        excl |= ~np.isfinite(ref.values)
    rep = analytic.error_report(a, ref, exclusion=excl, dom=cfg.dom)
    row = rep.as_row()
    keys = list(row)
    csv_text = ",".join(keys) + "\n" + ",".join(format(row[k], ".17g") for k in keys) + "\n"
    out = _outdir(cfg)
    (out / "compare.csv").write_text(csv_text)
    sys.stdout.write(csv_text)
    against = path_b if path_b is not None else cfg.oracle
    _say(f"{Path(path_a).name} vs {against}: L1 {rep.l1:.4e} (rel {rep.rel_l1:.3e}), "
         f"L2 {rep.l2:.4e} (rel {rep.rel_l2:.3e}), Linf {rep.linf:.4e} (rel {rep.rel_linf:.3e})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sandtable",
        description="Sandpile equilibria on partially open tables: analytic fields, "
                    "explicit dynamics and comparisons.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides outputs.directory)")
        p.add_argument("--h", type=float, help="grid step (overrides grid.h)")

    common(sub.add_parser("equilibrium", help="export d_Gamma, u_f, v_f, labels, ridge; "
                                              "print identity checks"))
    p = sub.add_parser("simulate", help="run the explicit scheme to steady state")
    common(p)
    p.add_argument("--decompose", action="store_true",
                   help="run each projection region separately, cuts acting as walls")
    p = sub.add_parser("compare", help="masked error norms between two fields or field vs oracle")
    common(p)
    p.add_argument("--field", help="field CSV to assess (overrides compare.field)")
    p.add_argument("--reference", help="reference field CSV (overrides compare.reference)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, h=args.h, out_dir=args.out)
        if args.command == "equilibrium":
            return cmd_equilibrium(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, decompose=args.decompose)
        return cmd_compare(cfg, args.field, args.reference)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridMismatchError, PreconditionError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SandtableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
