"""Explicit two-layer growth scheme on the node lattice of a rectangular table.

The state is a pair of node fields: the standing height ``u`` and the rolling
height ``v``.  Each step moves rolling matter downhill between neighbouring
nodes (an upwind flux form of ``v D^2u + Dv.Du``), exchanges matter between
the layers at rate ``(1 - |Du|) v`` with ``|Du|`` taken from the steepest
descending differences, adds the source, clamps ``u`` to zero on the open
boundary and finally applies the wall rule to ``v``: zero where the outward
derivative of the new ``u`` is positive, a copy of the inward neighbour
elsewhere.  Ghost nodes across the open boundary mirror ``u`` oddly so
matter can leave the table there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from . import _fallback, backend
from .errors import GridMismatchError, InstabilityError, PreconditionError
from .geometry import RIDGE, Arc, Domain, Rectangle, distance_points, validate_gamma
from .grid import Grid, ScalarField, VectorField

INACTIVE, INTERIOR, GAMMA, WALL = 0, 1, 2, 3
CLASS_NAMES = {INACTIVE: "inactive", INTERIOR: "interior", GAMMA: "gamma", WALL: "wall"}

# steps handed to the kernel between two bookkeeping points
_CHUNK_STEPS = 500


@dataclass(frozen=True)
class SchemeParams:
    h: float
    c: float = 0.1
    steady_tol: float = 1e-6
    max_steps: int | None = None
    neg_tol: float = 1e-12
    record_every: int = 1000

    def __post_init__(self):
        if not self.h > 0:
            raise PreconditionError("h must be positive")
        if not self.c > 0:
            raise PreconditionError("c must be positive")
        if not self.steady_tol > 0:
            raise PreconditionError("steady_tol must be positive")
        if self.max_steps is not None and self.max_steps < 1:
            raise PreconditionError("max_steps must be >= 1")

    @property
    def dt(self) -> float:
        return self.c * self.h * self.h

    def step_limit(self) -> int:
        return int(self.max_steps) if self.max_steps is not None else 10_000_000


@dataclass
class SimState:
    u: ScalarField
    v: ScalarField
    n: int = 0
    t: float = 0.0

    @classmethod
    def zero(cls, grid: Grid) -> "SimState":
        return cls(ScalarField(grid, np.zeros(grid.shape)), ScalarField(grid, np.zeros(grid.shape)))

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def copy(self) -> "SimState":
        g = self.grid
        return SimState(ScalarField(g, self.u.values.copy()), ScalarField(g, self.v.values.copy()),
                        self.n, self.t)


@dataclass
class NodeClass:
    """Per-node class plus the wall data the boundary rule needs."""

    grid: Grid
    cls: np.ndarray
    out_x: np.ndarray
    out_y: np.ndarray
    copy_i: np.ndarray
    copy_j: np.ndarray

    @property
    def active(self) -> np.ndarray:
        return self.cls > 0

    def count(self) -> dict[str, int]:
        return {CLASS_NAMES[k]: int(np.count_nonzero(self.cls == k)) for k in CLASS_NAMES}

    def with_policy(self, policy: str) -> "NodeClass":
        """``"copy"``: flat walls take the inward value; ``"keep"``: they keep their own."""
        if policy == "copy":
            return self
        if policy != "keep":
            raise PreconditionError(f"unknown wall policy {policy!r}")
        I, J = np.meshgrid(np.arange(self.grid.nx), np.arange(self.grid.ny), indexing="ij")
        return NodeClass(self.grid, self.cls, self.out_x, self.out_y,
                         I.astype(np.int64), J.astype(np.int64))

    def restrict(self, region: np.ndarray) -> "NodeClass":
        """Classes for a run confined to ``region``; cut nodes become walls."""
        gamma = (self.cls == GAMMA) & region
        return _classify(self.grid, region & self.active, gamma)


def _classify(grid: Grid, active: np.ndarray, gamma: np.ndarray) -> NodeClass:
    nx, ny = grid.shape
    pad = np.pad(active, 1, constant_values=False)
    has_e, has_w = pad[2:, 1:-1], pad[:-2, 1:-1]
    has_n, has_s = pad[1:-1, 2:], pad[1:-1, :-2]
    out_x = np.where(has_w & ~has_e, 1, 0) + np.where(has_e & ~has_w, -1, 0)
    out_y = np.where(has_s & ~has_n, 1, 0) + np.where(has_n & ~has_s, -1, 0)
    boundary = ~(has_e & has_w & has_n & has_s)
    cls = np.where(active, INTERIOR, INACTIVE)
    cls = np.where(active & boundary, WALL, cls)
    cls = np.where(active & gamma, GAMMA, cls)
    wall = cls == WALL
    out_x = np.where(wall, out_x, 0).astype(np.int64)
    out_y = np.where(wall, out_y, 0).astype(np.int64)
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ci, cj = I - out_x, J - out_y
    # corners copy from the diagonal neighbour; fall back to self if it is missing
    ok = active[np.clip(ci, 0, nx - 1), np.clip(cj, 0, ny - 1)]
    copy_i = np.where(ok, ci, I).astype(np.int64)
    copy_j = np.where(ok, cj, J).astype(np.int64)
    return NodeClass(grid, cls.astype(np.int64), out_x, out_y, copy_i, copy_j)


def node_classes(grid: Grid, dom: Domain, gamma: Sequence[Arc]) -> NodeClass:
    """Classify the node lattice of a rectangle.

    Boundary nodes on the open boundary (endpoints included) are Γ nodes;
    every other boundary node, corners included, is a wall.
    """
    if not isinstance(dom, Rectangle):
        raise PreconditionError("the explicit scheme runs on rectangular tables only")
    gamma = validate_gamma(dom, gamma)
    if not grid.same_as(Grid.nodes(dom, grid.h)):
        raise GridMismatchError("the scheme needs the node lattice of the table")
    pts = grid.points()
    tol = 1e-9 * dom.diam
    on_gamma = dom.on_boundary(pts, tol) & (distance_points(pts, dom, gamma) <= tol)
    return _classify(grid, np.ones(grid.shape, dtype=bool), on_gamma.reshape(grid.shape))


def _stencil(classes: NodeClass | None, shape) -> _fallback._Stencil:
    cls = classes.cls if classes is not None else np.full(shape, INTERIOR, dtype=np.int64)
    return _fallback._Stencil(cls)


def maxmod_gradient(u: ScalarField, classes: NodeClass | None = None) -> VectorField:
    """Per component, the one-sided difference of larger magnitude (ties go backward)."""
    st = _stencil(classes, u.grid.shape)
    dx, dy = _fallback.maxmod_components(np.asarray(u.values, float), u.grid.h, st)
    return VectorField(u.grid, dx, dy)


def upwind_advect(v: ScalarField, du: VectorField, classes: NodeClass | None = None) -> ScalarField:
    """Dot product of ``du`` with one-sided differences of ``v`` taken on the side ``du`` points to."""
    if not v.grid.same_as(du.grid):
        raise GridMismatchError("fields are not co-located")
    st = _stencil(classes, v.grid.shape)
    out = _fallback.upwind_dot(np.asarray(v.values, float), (du.x, du.y), v.grid.h, st)
    return ScalarField(v.grid, out)


def laplacian_5pt(u: ScalarField, classes: NodeClass | None = None) -> ScalarField:
    st = _stencil(classes, u.grid.shape)
    return ScalarField(u.grid, _fallback.laplacian(np.asarray(u.values, float), u.grid.h, st))


def source_nodes(f, grid: Grid) -> np.ndarray:
    return np.asarray(f(grid.points()), dtype=float).reshape(grid.shape)


def _advance(state: SimState, fvals, classes: NodeClass, params: SchemeParams, nsteps: int,
             kernels):
    u = np.array(state.u.values, dtype=float, order="C")
    v = np.array(state.v.values, dtype=float, order="C")
    steps, rate, monotone, status = kernels.advance(
        u, v, np.ascontiguousarray(fvals, dtype=float), classes.cls, classes.out_x,
        classes.out_y, classes.copy_i, classes.copy_j, float(params.h), float(params.dt),
        int(nsteps), float(params.steady_tol), float(params.neg_tol))
    g = state.grid
    n = state.n + int(steps)
    new = SimState(ScalarField(g, u), ScalarField(g, v), n, n * params.dt)
    return new, float(rate), int(monotone), int(status)


def scheme_step(state: SimState, f, params: SchemeParams, classes: NodeClass,
                kernels=None) -> SimState:
    """One explicit step; raises :class:`InstabilityError` on blow-up."""
    kernels = kernels or backend.kernels
    if not state.grid.same_as(classes.grid):
        raise GridMismatchError("state and node classes live on different grids")
    fvals = f if isinstance(f, np.ndarray) else source_nodes(f, state.grid)
    new, _, _, status = _advance(state.copy(), fvals, classes, params, 1, kernels)
    if status == 2:
        raise InstabilityError("non-finite or negative values after one step", new.n, new)
    return new


@dataclass
class Diagnostics:
    converged: bool
    steps: int
    rate: float
    rate_history: list[tuple[int, float]] = field(default_factory=list)
    mass_in: float = 0.0
    outflux: float = 0.0
    u_min: float = 0.0
    u_max: float = 0.0
    v_min: float = 0.0
    v_max: float = 0.0
    monotone_violations: int = 0
    # source minus outflux at the final state: what the wall rule removes
    wall_zeroed: int = 0
    wall_flat: list[tuple[int, int]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "converged": self.converged, "steps": self.steps, "rate": self.rate,
            "mass_in": self.mass_in, "outflux": self.outflux,
            "wall_loss": self.mass_in - self.outflux,
            "u_min": self.u_min, "u_max": self.u_max, "v_min": self.v_min, "v_max": self.v_max,
            "monotone_violations": self.monotone_violations,
            "wall_zeroed": self.wall_zeroed, "wall_flat": len(self.wall_flat),
        }


def wall_normal_derivative(u: np.ndarray, classes: NodeClass) -> np.ndarray:
    """Outward one-sided derivative at wall nodes (summed over outward axes); NaN elsewhere."""
    nx, ny = u.shape
    h = classes.grid.h
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    out = np.full(u.shape, np.nan)
    wall = classes.cls == WALL
    g = np.zeros(u.shape)
    for off, axis in ((classes.out_x, 0), (classes.out_y, 1)):
        ii = np.clip(I - off if axis == 0 else I, 0, nx - 1)
        jj = np.clip(J - off if axis == 1 else J, 0, ny - 1)
        ok = (off != 0) & classes.active[ii, jj]
        g += np.where(ok, u - u[ii, jj], 0.0)
    out[wall] = g[wall] / h
    return out


def gamma_outflux(state: SimState, classes: NodeClass) -> float:
    """Mass per unit time leaving through the open boundary.

    Sums the discrete flux carried across the ghost links of the Γ nodes,
    in the same units as :func:`mass_input` (node area ``h**2``).
    """
    st = _fallback._SchemeStencil(classes.cls)
    u, v = state.u.values, state.v.values
    total = 0.0
    for d in _fallback._DIRS:
        opp = (-d[0], -d[1])
        # the ghost height is -u(opposite) and u vanishes on Γ nodes
        drop = u - (-_fallback._shift(u, *opp))
        total += float(np.sum(np.where(st.ghost[d], v * drop, 0.0)))
    return total


def mass_input(fvals: np.ndarray, classes: NodeClass) -> float:
    """Source mass per unit time, ``sum f h^2`` over active nodes."""
    h = classes.grid.h
    return float(np.sum(np.where(classes.active, fvals, 0.0)) * h * h)


def run_to_equilibrium(f, params: SchemeParams, dom: Domain, gamma: Sequence[Arc],
                       classes: NodeClass | None = None, state: SimState | None = None,
                       kernels=None) -> tuple[SimState, Diagnostics]:
    """Iterate from the zero state until the max rate drops below ``steady_tol``.

    Non-convergence is reported through ``Diagnostics.converged``; blow-up
    raises :class:`InstabilityError` with the last state attached.
    """
    kernels = kernels or backend.kernels
    grid = Grid.nodes(dom, params.h)
    if classes is None:
        classes = node_classes(grid, dom, gamma)
    fvals = f if isinstance(f, np.ndarray) else source_nodes(f, grid)
    fvals = np.where(classes.active, fvals, 0.0)
    if state is None:
        state = SimState.zero(grid)
    limit = params.step_limit()
    history: list[tuple[int, float]] = []
    monotone = 0
    status, rate = 0, math.inf
    chunk = max(1, min(_CHUNK_STEPS, params.record_every))
    next_record = 0
    while state.n < limit:
        nsteps = min(chunk, limit - state.n)
        state, rate, viol, status = _advance(state, fvals, classes, params, nsteps, kernels)
        monotone += viol
        if state.n >= next_record or status:
            history.append((state.n, rate))
            next_record = state.n + params.record_every
        if status == 2:
            raise InstabilityError("non-finite or negative values", state.n, state)
        if status == 1:
            break
    u, v = state.u.values, state.v.values
    dn = wall_normal_derivative(u, classes)
    wall = classes.cls == WALL
    diag = Diagnostics(
        converged=status == 1, steps=state.n, rate=rate, rate_history=history,
        mass_in=mass_input(fvals, classes), outflux=gamma_outflux(state, classes),
        u_min=float(u[classes.active].min()), u_max=float(u[classes.active].max()),
        v_min=float(v[classes.active].min()), v_max=float(v[classes.active].max()),
        monotone_violations=monotone,
        wall_zeroed=int(np.count_nonzero(wall & (dn > 0))),
        wall_flat=[(int(i), int(j)) for i, j in zip(*np.nonzero(wall & (dn == 0)))],
    )
    return state, diag


def merge_ridge(labels: np.ndarray) -> np.ndarray:
    """Give ridge nodes the label of the nearest non-ridge node."""
    labels = np.asarray(labels)
    ridge = labels == RIDGE
    if not ridge.any():
        return labels.copy()
    if ridge.all():
        raise PreconditionError("partition has no regular nodes")
    _, (ii, jj) = ndimage.distance_transform_edt(ridge, return_indices=True)
    return labels[ii, jj]


def decomposed_run(f, params: SchemeParams, dom: Domain, gamma: Sequence[Arc],
                   partition, kernels=None, wall_policy: str = "copy") -> tuple[SimState, list[Diagnostics]]:
    """Run the scheme separately on each region of ``partition``, cuts acting as walls.

    ``partition`` is a label field on the node lattice (e.g. from
    ``region_decomposition``); ridge labels are merged into their nearest
    region first.
    """
    grid = Grid.nodes(dom, params.h)
    labels = partition.values if isinstance(partition, ScalarField) else np.asarray(partition)
    if labels.shape != grid.shape:
        raise GridMismatchError(f"partition shape {labels.shape} != grid {grid.shape}")
    if isinstance(partition, ScalarField) and not partition.grid.same_as(grid):
        raise GridMismatchError("partition lives on a different grid")
    labels = merge_ridge(np.asarray(labels).astype(np.int64))
    if np.any(labels < 0):
        raise PreconditionError("partition does not cover the grid")
    base = node_classes(grid, dom, gamma)
    fvals = f if isinstance(f, np.ndarray) else source_nodes(f, grid)
    u = np.zeros(grid.shape)
    v = np.zeros(grid.shape)
    diags = []
    steps = 0
    for lab in np.unique(labels):
        region = labels == lab
        classes = base.restrict(region).with_policy(wall_policy)
        st, d = run_to_equilibrium(np.where(region, fvals, 0.0), params, dom, gamma,
                                   classes=classes, kernels=kernels)
        u[region] = st.u.values[region]
        v[region] = st.v.values[region]
        steps = max(steps, st.n)
        diags.append(d)
    merged = SimState(ScalarField(grid, u), ScalarField(grid, v), steps, steps * params.dt)
    return merged, diags


__all__ = [
    "CLASS_NAMES", "Diagnostics", "GAMMA", "INACTIVE", "INTERIOR", "NodeClass", "SchemeParams",
    "SimState", "WALL", "decomposed_run", "gamma_outflux", "laplacian_5pt", "maxmod_gradient",
    "mass_input", "merge_ridge", "node_classes", "run_to_equilibrium", "scheme_step", "source_nodes",
    "upwind_advect", "wall_normal_derivative",
]
