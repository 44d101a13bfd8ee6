"""Plain-text field files: one CSV per field, header ``i,j,x,y,value``.

Rows run over ``i`` (x index) first, ``j`` fastest, matching the ``[i, j]``
layout of the arrays.  Numbers are written with 17 significant digits so a
round trip reproduces every double exactly; missing values are ``nan``.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .errors import GridMismatchError
from .grid import Grid, ScalarField

HEADER = ("i", "j", "x", "y", "value")


def _fmt(x: float) -> str:
    return "nan" if x != x else format(float(x), ".17g")


def write_field(path: str | os.PathLike, field: ScalarField) -> None:
    g = field.grid
    vals = np.asarray(field.values, dtype=float)
    xs, ys = g.xs, g.ys
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for i in range(g.nx):
            xi = _fmt(xs[i])
            for j in range(g.ny):
                w.writerow((i, j, xi, _fmt(ys[j]), _fmt(vals[i, j])))


def read_field(path: str | os.PathLike) -> ScalarField:
    """Inverse of :func:`write_field`; the lattice is recovered from the coordinates."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise ValueError(f"{path}: expected header {','.join(HEADER)}")
        rows = [row for row in r if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    ii = np.array([int(row[0]) for row in rows])
    jj = np.array([int(row[1]) for row in rows])
    xs = np.array([float(row[2]) for row in rows])
    ys = np.array([float(row[3]) for row in rows])
    vals = np.array([float(row[4]) for row in rows])
    nx, ny = int(ii.max()) + 1, int(jj.max()) + 1
    if len(rows) != nx * ny:
        raise GridMismatchError(f"{path}: {len(rows)} rows for a {nx}x{ny} lattice")
    order = ii * ny + jj
    if not np.array_equal(order, np.arange(nx * ny)):
        raise GridMismatchError(f"{path}: rows are not in row-major order")
    x0, y0 = xs[0], ys[0]
    if nx > 1:
        h = xs[ny] - x0
    elif ny > 1:
        h = ys[1] - y0
    else:
        h = 1.0
    grid = Grid(float(x0), float(y0), float(h), nx, ny)
    if not (np.allclose(xs, x0 + h * ii, rtol=0, atol=1e-9 * max(1.0, abs(h) * nx))
            and np.allclose(ys, y0 + h * jj, rtol=0, atol=1e-9 * max(1.0, abs(h) * ny))):
        raise GridMismatchError(f"{path}: coordinates do not form a uniform lattice")
    return ScalarField(grid, vals.reshape(nx, ny))


__all__ = ["HEADER", "read_field", "write_field"]
