"""Uniform sample lattices, sampled fields and cell quadrature.

A :class:`Grid` is a rectangular lattice ``x0 + i*h, y0 + j*h``.  Two
lattices are used over a table: the *node* lattice, whose outermost nodes sit
on the bounding box (what the explicit scheme runs on), and the *cell* lattice
of cell centres (midpoint quadrature).  Each sample owns the square of side
``h`` centred on it; quadrature weights are the area of that square inside
the table, which gives the midpoint rule on the cell lattice (with cut cells
on a disk) and the trapezoidal rule on the node lattice of a rectangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError
from .geometry import Domain, Rectangle

_SUBSAMPLES = 32


@dataclass(frozen=True)
class Grid:
    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    @classmethod
    def nodes(cls, dom: Domain, h: float) -> "Grid":
        x0, y0, x1, y1 = dom.bbox
        nx, ny = _divisions(x1 - x0, h), _divisions(y1 - y0, h)
        return cls(x0, y0, h, nx + 1, ny + 1)

    @classmethod
    def cells(cls, dom: Domain, h: float) -> "Grid":
        x0, y0, x1, y1 = dom.bbox
        nx, ny = _divisions(x1 - x0, h), _divisions(y1 - y0, h)
        return cls(x0 + h / 2, y0 + h / 2, h, nx, ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.y0 + self.h * np.arange(self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def points(self) -> np.ndarray:
        X, Y = self.mesh()
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        i, j = round((x - self.x0) / self.h), round((y - self.y0) / self.h)
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise DomainError(f"({x}, {y}) is not on the lattice")
        return int(i), int(j)

    def same_as(self, other: "Grid", rtol: float = 1e-9) -> bool:
        if self.shape != other.shape:
            return False
        scale = max(abs(self.h), 1e-300)
        return (abs(self.h - other.h) <= rtol * scale
                and abs(self.x0 - other.x0) <= 1e3 * rtol * scale
                and abs(self.y0 - other.y0) <= 1e3 * rtol * scale)

    def weights(self, dom: Domain) -> np.ndarray:
        """Area of each sample's square inside the table."""
        h = self.h
        if isinstance(dom, Rectangle):
            wx = _overlap(self.xs - h / 2, self.xs + h / 2, dom.x0, dom.x1)
            wy = _overlap(self.ys - h / 2, self.ys + h / 2, dom.y0, dom.y1)
            return np.outer(wx, wy)
        X, Y = self.mesh()
        dx, dy = np.abs(X - dom.cx), np.abs(Y - dom.cy)
        far = np.hypot(dx + h / 2, dy + h / 2) <= dom.radius
        near_x = np.maximum(dx - h / 2, 0.0)
        near_y = np.maximum(dy - h / 2, 0.0)
        out = np.hypot(near_x, near_y) >= dom.radius
        w = np.where(far, h * h, 0.0)
        cut = ~far & ~out
        if cut.any():
            s = (np.arange(_SUBSAMPLES) + 0.5) / _SUBSAMPLES - 0.5
            SX, SY = np.meshgrid(s * h, s * h, indexing="ij")
            cx, cy = X[cut][:, None, None] + SX, Y[cut][:, None, None] + SY
            inside = np.hypot(cx - dom.cx, cy - dom.cy) <= dom.radius
            w[cut] = inside.mean(axis=(1, 2)) * h * h
        return w

    def support(self, dom: Domain) -> np.ndarray:
        return self.weights(dom) > 0

    def sample_points(self, dom: Domain) -> tuple[np.ndarray, np.ndarray]:
        """Evaluation points and the mask of samples carrying weight.

        Samples whose square meets the table but whose centre lies outside
        are evaluated at the nearest point of the closed table.
        """
        mask = self.support(dom)
        pts = dom.clamp(self.points())
        return pts, mask


def _divisions(length: float, h: float) -> int:
    if not h > 0:
        raise DomainError(f"grid step must be positive, got {h}")
    n = length / h
    k = round(n)
    if k < 1 or abs(n - k) > 1e-9 * max(1.0, n):
        raise DomainError(f"grid step {h} does not divide the extent {length}")
    return int(k)


def _overlap(a, b, lo, hi) -> np.ndarray:
    return np.clip(np.minimum(b, hi) - np.maximum(a, lo), 0.0, None)


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {self.values.shape} != grid {self.grid.shape}")

    def at(self, x: float, y: float):
        return self.values[self.grid.index_of(x, y)]

    def integrate(self, dom: Domain, mask: np.ndarray | None = None) -> float:
        w = self.grid.weights(dom)
        if mask is not None:
            w = np.where(mask, w, 0.0)
        sel = w > 0
        vals = self.values[sel]
        if not np.all(np.isfinite(vals)):
            raise ValueError("field has non-finite values where the quadrature needs it")
        return float(np.sum(vals * w[sel]))


@dataclass
class VectorField:
    grid: Grid
    x: np.ndarray
    y: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        return np.hypot(self.x, self.y)


def check_same_grid(*fields) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if not g.same_as(f.grid):
            raise GridMismatchError(f"grid mismatch: {g} vs {f.grid}")
    return g

