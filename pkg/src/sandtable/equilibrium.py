"""Equilibrium standing layer and transport density, plus integral identities.

The transport density at a regular point ``x`` integrates the source along
the remainder of the transport ray through ``x``, weighted by the factor
``M_x(t)`` that accounts for rays fanning out of an endpoint of the open
boundary or converging toward the centre of a curved arc.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import backend
from .errors import (DomainError, EmptySupportError, PreconditionError,
                     SingularityError)
from .geometry import (INTERIOR, KIND_NAMES, TOL_PROJ, Arc, Domain, Rectangle,
                       Segment, distance_points, nudge_boundary, rays_points,
                       validate_gamma)
from .grid import Grid, ScalarField, VectorField, check_same_grid
from .sources import Bump

_EVALS_PER_CHUNK = 1 << 21


def cone_height(z, x, dom: Domain, gamma: Sequence[Arc]) -> float:
    """Height at ``x`` of the maximal unit-slope cone with apex over ``z``."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    dz = float(distance_points(z[None, :], dom, gamma)[0])
    r = float(np.hypot(*(z - x)))
    return dz - r if r <= dz else 0.0


def minimal_standing_layer(grid: Grid, f, dom: Domain, gamma: Sequence[Arc],
                           kernels=None) -> ScalarField:
    """Sup-envelope of the cones with apex on the sampled support of ``f``."""
    gamma = validate_gamma(dom, gamma)
    kernels = kernels or backend.kernels
    pts, mask = grid.sample_points(dom)
    flat = mask.ravel()
    d = distance_points(pts[flat], dom, gamma)
    spt = np.asarray(f.in_support(pts[flat]), dtype=bool)
    if not spt.any():
        raise EmptySupportError("source has empty support on the grid")
    u = d.copy()  # apexes at the node itself: the cone tops out at d there
    rest = ~spt
    if rest.any():
        q = pts[flat]
        u[rest] = kernels.cone_envelope(q[rest, 0], q[rest, 1],
                                        q[spt, 0], q[spt, 1], d[spt])
    vals = np.full(grid.shape, np.nan)
    vals[mask] = u
    return ScalarField(grid, vals)


@dataclass(frozen=True)
class MultiplierInput:
    d: float
    kind: str        # "interior", "A" or "B"
    kappa: float
    tau: float

    def __post_init__(self):
        if self.kind == "interior" and self.kappa > 0:
            if 1.0 - (self.d + self.tau) * self.kappa < 0.0:
                raise PreconditionError("ray runs past the centre of curvature")


def multiplier(mi: MultiplierInput, t: float) -> float:
    if not -1e-12 <= t <= mi.tau + 1e-12:
        raise PreconditionError(f"t={t} outside [0, {mi.tau}]")
    if mi.kind == "interior":
        return (1.0 - (mi.d + t) * mi.kappa) / (1.0 - mi.d * mi.kappa)
    if mi.d <= 0:
        raise SingularityError("endpoint multiplier is unbounded at d = 0")
    return (mi.d + t) / mi.d


def _multiplier_arrays(d, kind, kappa, t):
    """M_x(t) for arrays; ``t`` has shape (n, k)."""
    d = d[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        fan = (d + t) / d
        bend = (1.0 - (d + t) * kappa[:, None]) / (1.0 - d * kappa[:, None])
    return np.where((kind == INTERIOR)[:, None], bend, fan)


def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def _ray_integrals(x, direction, d, kind, kappa, tau, f, step, span) -> np.ndarray:
    """Composite Simpson of f(x + t dir) M_x(t) over [0, tau].

    The panel count comes from ``span`` (an upper bound on every tau), not
    from the batch, so a point's value does not depend on how the points are
    chunked.
    """
    out = np.zeros(len(x))
    if len(x) == 0:
        return out
    n = max(2, 2 * math.ceil(span / (2.0 * step)))
    block = max(1, _EVALS_PER_CHUNK // (n + 1))
    s = np.arange(n + 1) / n
    w = _simpson_weights(n)
    for start in range(0, len(x), block):
        sl = slice(start, start + block)
        t = tau[sl, None] * s[None, :]
        px = x[sl, 0, None] + t * direction[sl, 0, None]
        py = x[sl, 1, None] + t * direction[sl, 1, None]
        fv = f(np.stack([px, py], axis=-1))
        M = _multiplier_arrays(d[sl], kind[sl], kappa[sl], t)
        # row sums rather than a BLAS product: the result must not depend on the block shape
        out[sl] = np.sum(fv * M * w, axis=1) * (tau[sl] / n)
    return out


def _density_points(p, f, dom, gamma, step, delta, singular_nan=True):
    """Transport density at points; ridge -> 0, open-boundary endpoints -> NaN."""
    tol = TOL_PROJ * dom.diam
    q = p if delta is None else nudge_boundary(p, dom, 1e-6 * delta)
    rays = rays_points(q, dom, gamma)
    kappa = np.array([a.curvature for a in gamma])[rays.arc]
    regular = rays.count == 1
    if delta is not None:
        regular &= ~(rays.tau < delta)
    d0 = distance_points(p, dom, gamma)
    singular = (d0 <= tol) & (rays.kind != INTERIOR) & (rays.count == 1)
    ok = regular & ~singular & np.isfinite(rays.length)
    v = np.zeros(len(p))
    idx = np.flatnonzero(ok)
    if len(idx):
        x_eval = q[idx]
        v[idx] = _ray_integrals(x_eval, rays.direction[idx], rays.d[idx], rays.kind[idx],
                                kappa[idx], rays.tau[idx], f, step, dom.diam)
    if singular_nan:
        v[singular] = np.nan
    elif singular.any():
        raise SingularityError("transport density is unbounded at an endpoint of the open boundary")
    return v


def transport_density_at(x, f, dom: Domain, gamma: Sequence[Arc], step: float | None = None) -> float:
    """Transport density at one point (0 at points with several projections)."""
    x = np.asarray(x, dtype=float)
    gamma = validate_gamma(dom, gamma)
    if not bool(dom.contains(x, TOL_PROJ * dom.diam)):
        raise DomainError(f"point {tuple(x)} lies outside the table")
    step = step if step is not None else 1e-3 * dom.diam
    return float(_density_points(x[None, :], f, dom, gamma, step, None, singular_nan=False)[0])


def transport_density_field(grid: Grid, f, dom: Domain, gamma: Sequence[Arc],
                            delta: float | None = None, step: float | None = None,
                            workers: int | None = None) -> ScalarField:
    """Transport density on a lattice.

    Nodes of the extended-ridge proxy (``tau < delta``, default ``2h``, or
    several projections) are 0.  Nodes on the table boundary take the limit
    from the interior; endpoints of the open boundary, where the density is
    unbounded, are NaN.
    """
    gamma = validate_gamma(dom, gamma)
    delta = 2.0 * grid.h if delta is None else delta
    step = grid.h / 2.0 if step is None else step
    pts, mask = grid.sample_points(dom)
    sel = pts[mask.ravel()]
    workers = workers or backend.threads()
    chunks = np.array_split(np.arange(len(sel)), max(1, workers * 4)) if workers > 1 else [np.arange(len(sel))]

    def job(ix):
        return _density_points(sel[ix], f, dom, gamma, step, delta)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    vals = np.full(grid.shape, np.nan)
    vals[mask] = np.concatenate(parts) if parts else []
    return ScalarField(grid, vals)


def source_field(grid: Grid, f, dom: Domain) -> ScalarField:
    pts, mask = grid.sample_points(dom)
    vals = np.full(grid.shape, np.nan)
    vals[mask] = f(pts[mask.ravel()])
    return ScalarField(grid, vals)


@dataclass(frozen=True)
class MassReport:
    integral_v: float
    integral_fd: float
    residual: float

    def __float__(self) -> float:
        return self.residual


def mass_identity(v: ScalarField, f, dgamma: ScalarField, dom: Domain) -> MassReport:
    """Relative gap between the integrals of ``v`` and ``f * d_Gamma``."""
    grid = check_same_grid(v, dgamma)
    fv = source_field(grid, f, dom).values if not isinstance(f, ScalarField) else f.values
    iv = v.integrate(dom)
    ifd = ScalarField(grid, fv * dgamma.values).integrate(dom)
    if ifd == 0.0:
        raise PreconditionError("integral of f * d_Gamma vanishes; residual undefined")
    return MassReport(iv, ifd, abs(iv - ifd) / ifd)


def ray_direction_field(grid: Grid, dom: Domain, gamma: Sequence[Arc],
                        delta: float | None = None) -> VectorField:
    """Unit gradient of d_Gamma (the ray direction); zero on the ridge proxy."""
    gamma = validate_gamma(dom, gamma)
    delta = 2.0 * grid.h if delta is None else delta
    pts, mask = grid.sample_points(dom)
    rays = rays_points(nudge_boundary(pts[mask.ravel()], dom, 1e-6 * delta), dom, gamma)
    good = (rays.count == 1) & np.isfinite(rays.direction[:, 0])
    gx = np.zeros(grid.shape)
    gy = np.zeros(grid.shape)
    gx[mask] = np.where(good, rays.direction[:, 0], 0.0)
    gy[mask] = np.where(good, rays.direction[:, 1], 0.0)
    return VectorField(grid, gx, gy)


def central_gradient(u: ScalarField) -> VectorField:
    gx, gy = np.gradient(np.nan_to_num(u.values), u.grid.h, edge_order=1)
    return VectorField(u.grid, gx, gy)


def weak_residual(u: ScalarField, v: ScalarField, f, phi: Bump, dom: Domain,
                  gamma: Sequence[Arc], du: VectorField | str = "rays") -> float:
    """Midpoint value of  int v <Du, Dphi> - int f phi  for a bump test function.

    ``du="rays"`` uses the analytic ray direction as the gradient of ``u``;
    ``du="central"`` differentiates ``u`` numerically; a :class:`VectorField`
    is used as given.
    """
    gamma = validate_gamma(dom, gamma)
    grid = check_same_grid(u, v)
    if phi.amplitude == 0.0:
        return 0.0
    clearance = float(distance_points(np.array([phi.center], float), dom, gamma)[0]) - phi.radius
    if clearance < 2.0 * grid.h:
        raise PreconditionError("test function support comes within 2h of the open boundary")
    if isinstance(du, str):
        du = ray_direction_field(grid, dom, gamma) if du == "rays" else central_gradient(u)
    pts = grid.points()
    w = grid.weights(dom).ravel()
    near = phi.in_support(pts) & (w > 0)
    p = pts[near]
    gphi = phi.gradient(p)
    vv = v.values.ravel()[near]
    flux = vv * (du.x.ravel()[near] * gphi[:, 0] + du.y.ravel()[near] * gphi[:, 1])
    src = f(p) * phi(p)
    integrand = flux - src
    if not np.all(np.isfinite(integrand)):
        raise PreconditionError("non-finite density inside the test function support")
    return float(np.sum(integrand * w[near]))


# ---------------------------------------------------------------------------
# change of variables along offset curves


def offset_radius(dom: Domain, gamma: Sequence[Arc]) -> float:
    """Largest admissible offset for :func:`offset_integral`.

    Offsets must keep the neighbourhoods of distinct arcs disjoint and must
    not let an endpoint cap reach an adjacent side of the rectangle.
    """
    if not isinstance(dom, Rectangle):
        raise PreconditionError("offset integrals are implemented for rectangular tables only")
    r = 0.25 * min(dom.x1 - dom.x0, dom.y1 - dom.y0)
    segs = list(gamma)
    for i, a in enumerate(segs):
        for b in segs[i + 1:]:
            r = min(r, 0.5 * _segment_gap(a, b))
        for e in a.endpoints:
            gap = _corner_gap(e, dom)
            if gap > 1e-12:
                r = min(r, gap)
    return r


def _segment_gap(a: Segment, b: Segment) -> float:
    # boundary segments never cross, so the gap is attained at an endpoint
    pa, pb = np.stack(a.endpoints), np.stack(b.endpoints)
    return min(float(b.candidates(pa)[0][0][1].min()), float(a.candidates(pb)[0][0][1].min()))


def _corner_gap(e: np.ndarray, dom: Rectangle) -> float:
    corners = np.array([[dom.x0, dom.y0], [dom.x1, dom.y0], [dom.x1, dom.y1], [dom.x0, dom.y1]])
    return float(np.min(np.hypot(*(corners - e).T)))


def _midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def offset_integral(hfun: Callable, eps: float, dom: Domain, gamma: Sequence[Arc],
                    h: float) -> float:
    """Integral of ``hfun`` written along the offset curves at distance ``eps``.

    Each straight arc contributes its parallel copy at distance ``eps`` (zero
    curvature) and the quarter circles of radius ``eps`` around its endpoints
    that lie inside the table (curvature ``-1/eps``).  Points ``y`` of these
    curves are pushed along the outer normal over ``t in [-eps, l(y) - eps]``
    with Jacobian ``1 - t*kappa``.
    """
    gamma = validate_gamma(dom, gamma)
    r = offset_radius(dom, gamma)
    if not 0.0 < eps <= r:
        raise PreconditionError(f"offset {eps} outside (0, {r}]")
    base, normal, kappa, dlen = [], [], [], []
    for arc in gamma:
        a, b = arc.endpoints
        length = arc.length
        tang = (b - a) / length
        nu = arc.inward_normal(dom)
        n = max(1, math.ceil(length / h))
        s = _midpoints(n) * length
        pts = a + s[:, None] * tang + eps * nu
        base.append(pts)
        normal.append(np.broadcast_to(nu, pts.shape))
        kappa.append(np.zeros(n))
        dlen.append(np.full(n, length / n))
        for e, outward in ((a, -tang), (b, tang)):
            if _corner_gap(e, dom) <= 1e-12:
                continue  # cap lies outside the table
            sweep = math.pi / 2.0
            # the swept wedge scales with l(y)^2, not eps: resolve the angle itself
            m = max(4, math.ceil(sweep / h))
            phi = _midpoints(m) * sweep
            dirs = np.cos(phi)[:, None] * outward + np.sin(phi)[:, None] * nu
            base.append(e + eps * dirs)
            normal.append(dirs)
            kappa.append(np.full(m, -1.0 / eps))
            dlen.append(np.full(m, eps * sweep / m))
    y = np.concatenate(base)
    nu = np.concatenate(normal)
    kap = np.concatenate(kappa)
    dl = np.concatenate(dlen)
    # ray length of the offset point, measured from the open boundary
    ell = rays_points(y, dom, gamma).length
    total = 0.0
    n_in = max(2, 2 * math.ceil(float(ell.max()) / h))
    w = _simpson_weights(n_in)
    s = np.arange(n_in + 1) / n_in
    block = max(1, _EVALS_PER_CHUNK // (n_in + 1))
    for start in range(0, len(y), block):
        sl = slice(start, start + block)
        t = -eps + ell[sl, None] * s[None, :]
        px = y[sl, 0, None] + t * nu[sl, 0, None]
        py = y[sl, 1, None] + t * nu[sl, 1, None]
        vals = hfun(dom.clamp(np.stack([px, py], axis=-1))) * (1.0 - t * kap[sl, None])
        total += float(np.sum((vals @ w) * (ell[sl] / n_in) * dl[sl]))
    return total


__all__ = [
    "KIND_NAMES", "MassReport", "MultiplierInput", "central_gradient", "cone_height",
    "mass_identity", "minimal_standing_layer", "multiplier", "offset_integral",
    "offset_radius", "ray_direction_field", "source_field", "transport_density_at",
    "transport_density_field", "weak_residual",
]
