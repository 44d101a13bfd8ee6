"""Closed-form equilibrium of the half-open unit square, plus masked error norms.

Table (0,1)^2 with the open boundary on the bottom side from the origin to
P = (0.5, 0).  Left of the line PQ (Q = (0.5, 1)) matter runs straight down;
right of it every ray converges into P, so the rolling layer blows up like
1/r there and jumps across PQ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, PreconditionError, SingularityError
from .geometry import Rectangle, Segment
from .grid import Grid, ScalarField

P = (0.5, 0.0)
Q = (0.5, 1.0)
# where the ray from P switches from the east wall to the north wall (tan = 2)
S = (1.0, 1.0)
THETA_SWITCH = math.atan(2.0)


def half_open_square() -> tuple[Rectangle, tuple[Segment]]:
    return Rectangle(0.0, 0.0, 1.0, 1.0), (Segment((0.0, 0.0), P),)


def _xy(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


def exact_standing(x):
    """Distance to the open side: ``y`` left of PQ, ``|x - P|`` right of it."""
    px, py = _xy(x)
    out = np.where(px <= 0.5, py, np.hypot(px - P[0], py - P[1]))
    return out if out.ndim else float(out)


def l_theta(theta):
    """Length of the ray leaving P at angle ``theta`` (east wall, then north wall)."""
    th = np.asarray(theta, dtype=float)
    if np.any((th < -1e-12) | (th > math.pi / 2 + 1e-12)):
        raise PreconditionError("theta must lie in [0, pi/2]")
    c, s = np.cos(th), np.sin(th)
    east = 0.5 / np.where(c > 0, c, np.inf)
    north = 1.0 / np.where(s > 0, s, np.inf)
    out = np.where(np.tan(th) <= 2.0, east, north)
    return out if out.ndim else float(out)


def exact_rolling(x):
    """``1 - y`` left of PQ, ``(l(theta)^2 - r^2) / (2 r)`` right of it (polar about P)."""
    px, py = _xy(x)
    r = np.hypot(px - P[0], py - P[1])
    right = px > 0.5
    if np.any(right & (r == 0.0)) or np.any((px == P[0]) & (py == P[1])):
        raise SingularityError("the rolling layer is unbounded at P")
    theta = np.arctan2(np.maximum(py, 0.0), np.where(right, px - P[0], 1.0))
    ell = l_theta(np.clip(theta, 0.0, math.pi / 2))
    rr = np.where(right, r, 1.0)
    out = np.where(right, (ell * ell - rr * rr) / (2.0 * rr), 1.0 - py)
    return out if out.ndim else float(out)


def exclusion_mask(grid: Grid, p_radius: float = 0.05, band: float | None = None) -> np.ndarray:
    """True on nodes excluded from comparisons: the disk around P and optionally a PQ band."""
    X, Y = grid.mesh()
    out = np.hypot(X - P[0], Y - P[1]) < p_radius
    if band is not None:
        out |= np.abs(X - P[0]) < band
    return out


@dataclass(frozen=True)
class ErrorReport:
    l1: float
    l2: float
    linf: float
    rel_l1: float
    rel_l2: float
    rel_linf: float

    def as_row(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "linf": self.linf,
                "rel_l1": self.rel_l1, "rel_l2": self.rel_l2, "rel_linf": self.rel_linf}


def _rel(err: float, ref: float) -> float:
    if ref > 0:
        return err / ref
    return 0.0 if err == 0 else math.inf


def error_report(field: ScalarField, oracle, exclusion=None, dom=None) -> ErrorReport:
    """Absolute and relative L1, L2 and Linf norms of ``field - oracle`` off ``exclusion``.

    ``oracle`` is a callable on points or a :class:`ScalarField` on the same
    grid.  Integrals use the grid's quadrature weights over ``dom`` (the
    unit square by default).
    """
    grid = field.grid
    if dom is None:
        dom = half_open_square()[0]
    w = grid.weights(dom)
    keep = w > 0
    if exclusion is not None:
        keep &= ~np.asarray(exclusion, dtype=bool)
    if not keep.any():
        raise PreconditionError("the exclusion mask removes every sample")
    if isinstance(oracle, ScalarField):
        if not grid.same_as(oracle.grid):
            raise GridMismatchError("field and oracle live on different grids")
        ref = np.asarray(oracle.values, dtype=float)
    else:
        # only evaluate where it counts: the oracle may be singular inside the mask
        pts, _ = grid.sample_points(dom)
        ref = np.full(grid.shape, np.nan)
        ref[keep] = np.asarray(oracle(pts.reshape(grid.nx, grid.ny, 2)[keep]), dtype=float)
    vals = np.asarray(field.values, dtype=float)[keep]
    refv = ref[keep]
    ww = w[keep]
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(refv))):
        raise ValueError("non-finite values outside the exclusion mask")
    diff = np.abs(vals - refv)
    l1 = float(np.sum(diff * ww))
    l2 = float(math.sqrt(np.sum(diff * diff * ww)))
    linf = float(diff.max())
    return ErrorReport(
        l1, l2, linf,
        _rel(l1, float(np.sum(np.abs(refv) * ww))),
        _rel(l2, float(math.sqrt(np.sum(refv * refv * ww)))),
        _rel(linf, float(np.abs(refv).max())),
    )


__all__ = [
    "ErrorReport", "P", "Q", "S", "THETA_SWITCH", "error_report", "exact_rolling",
    "exact_standing", "exclusion_mask", "l_theta", "half_open_square",
]
