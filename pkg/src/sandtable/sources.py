"""Nonnegative vertical matter sources."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class ConstantSource:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise PreconditionError("source must be nonnegative")

    @property
    def max_value(self) -> float:
        return float(self.value)

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.full(p.shape[:-1], float(self.value))

    def in_support(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.full(p.shape[:-1], self.value > 0)


@dataclass(frozen=True)
class Bump:
    center: tuple[float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0 or self.amplitude < 0:
            raise PreconditionError("bump needs radius > 0 and amplitude >= 0")

    def _s2(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return ((p[..., 0] - self.center[0]) ** 2 + (p[..., 1] - self.center[1]) ** 2) / self.radius ** 2

    def __call__(self, p) -> np.ndarray:
        """``amplitude * (1 - s^2)^3`` with ``s = |p - center| / radius``, clipped at 1."""
        s2 = self._s2(p)
        return np.where(s2 < 1.0, self.amplitude * (1.0 - s2) ** 3, 0.0)

    def gradient(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        s2 = self._s2(p)
        coef = np.where(s2 < 1.0, -6.0 * self.amplitude * (1.0 - s2) ** 2 / self.radius ** 2, 0.0)
        return np.stack([coef * (p[..., 0] - self.center[0]),
                         coef * (p[..., 1] - self.center[1])], axis=-1)

    def in_support(self, p) -> np.ndarray:
        return (self._s2(p) <= 1.0) & (self.amplitude > 0)


@dataclass(frozen=True)
class BumpSource:
    bumps: tuple[Bump, ...]

    def __init__(self, bumps: Sequence[Bump]):
        object.__setattr__(self, "bumps", tuple(bumps))

    @property
    def max_value(self) -> float:
        # bumps may overlap; the sum of amplitudes bounds the maximum
        return float(sum(b.amplitude for b in self.bumps))

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1])
        for b in self.bumps:
            out = out + b(p)
        return out

    def in_support(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1], dtype=bool)
        for b in self.bumps:
            out |= b.in_support(p)
        return out


@dataclass(frozen=True)
class GridSource:
    """Nonnegative samples on a lattice, bilinearly interpolated."""

    x0: float
    y0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise PreconditionError("grid source must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_field(cls, field) -> "GridSource":
        g = field.grid
        return cls(g.x0, g.y0, g.h, np.nan_to_num(field.values, nan=0.0))

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        nx, ny = self.values.shape
        fx = np.clip((p[..., 0] - self.x0) / self.h, 0.0, nx - 1)
        fy = np.clip((p[..., 1] - self.y0) / self.h, 0.0, ny - 1)
        i = np.minimum(np.floor(fx).astype(int), nx - 2) if nx > 1 else np.zeros(fx.shape, int)
        j = np.minimum(np.floor(fy).astype(int), ny - 2) if ny > 1 else np.zeros(fy.shape, int)
        ax, ay = fx - i, fy - j
        v = self.values
        i1, j1 = np.minimum(i + 1, nx - 1), np.minimum(j + 1, ny - 1)
        return ((1 - ax) * (1 - ay) * v[i, j] + ax * (1 - ay) * v[i1, j]
                + (1 - ax) * ay * v[i, j1] + ax * ay * v[i1, j1])

    def in_support(self, p) -> np.ndarray:
        return self(p) > 0
