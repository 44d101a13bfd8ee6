"""Distance from the open boundary, transport rays and the extended ridge.

The table is a convex domain (axis-aligned rectangle or disk) and the open
boundary is a finite union of arcs of its boundary: straight segments on the
sides of a rectangle, circular arcs on a disk.  Because the table is convex,
every path distance is realised by a straight segment, so projections onto
the open boundary reduce to closed-form point-to-segment and point-to-arc
formulas.

Every routine exists in two flavours: a scalar one that follows the
documented signature (``project_gamma``, ``transport_ray``, ...) and a
vectorised one working on ``(n, 2)`` arrays of points, used by the field
builders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateRayError, DomainError

INTERIOR, END_A, END_B = 0, 1, 2
KIND_NAMES = {INTERIOR: "interior", END_A: "A", END_B: "B"}

RIDGE = -1
OUTSIDE = -2

TOL_PROJ = 1e-9
"""Relative projection tolerance (multiplied by the domain diameter)."""

BISECTION_STEPS = 60


class _Endpoint:
    def __repr__(self) -> str:
        return "ENDPOINT"


ENDPOINT = _Endpoint()
"""Returned by :func:`curvature_at` at endpoints of the open boundary."""


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Rectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DomainError(f"degenerate rectangle {self}")

    @property
    def diam(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, p, tol: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        return (
            (x >= self.x0 - tol) & (x <= self.x1 + tol)
            & (y >= self.y0 - tol) & (y <= self.y1 + tol)
        )

    def on_boundary(self, p, tol: float) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        near = (
            (np.abs(x - self.x0) <= tol) | (np.abs(x - self.x1) <= tol)
            | (np.abs(y - self.y0) <= tol) | (np.abs(y - self.y1) <= tol)
        )
        return near & self.contains(p, tol)

    def clamp(self, p) -> np.ndarray:
        p = np.array(p, dtype=float)
        p[..., 0] = np.clip(p[..., 0], self.x0, self.x1)
        p[..., 1] = np.clip(p[..., 1], self.y0, self.y1)
        return p

    def inward_normal(self, p, tol: float) -> np.ndarray:
        """Unit inward normal at boundary points (diagonal at corners, 0 inside)."""
        p = np.asarray(p, dtype=float)
        n = np.zeros_like(p)
        n[..., 0] += (np.abs(p[..., 0] - self.x0) <= tol).astype(float)
        n[..., 0] -= (np.abs(p[..., 0] - self.x1) <= tol).astype(float)
        n[..., 1] += (np.abs(p[..., 1] - self.y0) <= tol).astype(float)
        n[..., 1] -= (np.abs(p[..., 1] - self.y1) <= tol).astype(float)
        norm = np.hypot(n[..., 0], n[..., 1])
        return np.divide(n, norm[..., None], out=np.zeros_like(n), where=norm[..., None] > 0)

    def exit_distance(self, p, d) -> np.ndarray:
        """Largest s >= 0 with p + s*d in the closed rectangle (p inside)."""
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        s = np.full(p.shape[:-1], np.inf)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for k, (lo, hi) in enumerate(((self.x0, self.x1), (self.y0, self.y1))):
                dk = d[..., k]
                sk = np.where(dk > 0, (hi - p[..., k]) / dk,
                              np.where(dk < 0, (lo - p[..., k]) / dk, np.inf))
                s = np.minimum(s, sk)
        return np.maximum(s, 0.0)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"disk radius must be positive, got {self.radius}")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    @property
    def diam(self) -> float:
        return 2.0 * self.radius

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        r = self.radius
        return (self.cx - r, self.cy - r, self.cx + r, self.cy + r)

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    def _rho(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.hypot(p[..., 0] - self.cx, p[..., 1] - self.cy)

    def contains(self, p, tol: float = 0.0) -> np.ndarray:
        return self._rho(p) <= self.radius + tol

    def on_boundary(self, p, tol: float) -> np.ndarray:
        return np.abs(self._rho(p) - self.radius) <= tol

    def clamp(self, p) -> np.ndarray:
        p = np.array(p, dtype=float)
        rho = self._rho(p)
        scale = np.where(rho > self.radius, self.radius / np.maximum(rho, 1e-300), 1.0)
        p[..., 0] = self.cx + (p[..., 0] - self.cx) * scale
        p[..., 1] = self.cy + (p[..., 1] - self.cy) * scale
        return p

    def inward_normal(self, p, tol: float) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        rho = self._rho(p)
        on = np.abs(rho - self.radius) <= tol
        n = np.stack([self.cx - p[..., 0], self.cy - p[..., 1]], axis=-1)
        n = n / np.maximum(rho, 1e-300)[..., None]
        return np.where(on[..., None], n, 0.0)

    def exit_distance(self, p, d) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        qx, qy = p[..., 0] - self.cx, p[..., 1] - self.cy
        b = qx * d[..., 0] + qy * d[..., 1]
        c = qx * qx + qy * qy - self.radius ** 2
        disc = np.maximum(b * b - c, 0.0)
        return np.maximum(-b + np.sqrt(disc), 0.0)


Domain = Union[Rectangle, Disk]


# ---------------------------------------------------------------------------
# open-boundary arcs


@dataclass(frozen=True)
class Segment:
    """Straight piece of the open boundary, from ``a`` (A) to ``b`` (B)."""

    a: tuple[float, float]
    b: tuple[float, float]

    curvature = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", (float(self.a[0]), float(self.a[1])))
        object.__setattr__(self, "b", (float(self.b[0]), float(self.b[1])))
        if self.a == self.b:
            raise DomainError("segment endpoints coincide")

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.a), np.array(self.b)

    @property
    def length(self) -> float:
        return math.dist(self.a, self.b)

    def candidates(self, p: np.ndarray):
        """Nearest point of the segment, with its kind code."""
        a, b = self.endpoints
        ab = b - a
        t = ((p - a) @ ab) / (ab @ ab)
        kind = np.where(t <= 0.0, END_A, np.where(t >= 1.0, END_B, INTERIOR))
        t = np.clip(t, 0.0, 1.0)
        q = a + t[:, None] * ab
        q[kind == END_A] = a
        q[kind == END_B] = b
        # points on the segment are their own projection (no round-off in t)
        cross = (p[:, 0] - a[0]) * ab[1] - (p[:, 1] - a[1]) * ab[0]
        on = (cross == 0.0) & (kind == INTERIOR)
        q[on] = p[on]
        dist = np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])
        return [(q, dist, kind, np.ones(len(p), dtype=bool))], np.zeros(len(p), dtype=bool)

    def inward_normal(self, dom: Domain) -> np.ndarray:
        a, b = self.endpoints
        t = (b - a) / np.linalg.norm(b - a)
        n = np.array([-t[1], t[0]])
        centre = np.array([(dom.bbox[0] + dom.bbox[2]) / 2, (dom.bbox[1] + dom.bbox[3]) / 2])
        if n @ (centre - (a + b) / 2) < 0:
            n = -n
        return n

    def normals_at(self, q: np.ndarray, dom: Domain) -> np.ndarray:
        return np.broadcast_to(self.inward_normal(dom), q.shape).copy()


@dataclass(frozen=True)
class CircularArc:
    """Arc of a circle traversed counter-clockwise from ``theta0`` to ``theta1``.

    A span of ``2*pi`` or more is the full circle, which has no endpoints.
    The stored curvature is ``1/radius`` (positive: the boundary bends toward
    the interior of the disk).
    """

    cx: float
    cy: float
    radius: float
    theta0: float = 0.0
    theta1: float = 2.0 * math.pi

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("arc radius must be positive")
        if not self.theta1 > self.theta0:
            raise DomainError("arc needs theta1 > theta0")

    @property
    def full(self) -> bool:
        return self.theta1 - self.theta0 >= 2.0 * math.pi - 1e-12

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius

    @property
    def length(self) -> float:
        return self.radius * min(self.theta1 - self.theta0, 2.0 * math.pi)

    def point(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.stack([self.cx + self.radius * np.cos(theta),
                         self.cy + self.radius * np.sin(theta)], axis=-1)

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray] | None:
        if self.full:
            return None
        return self.point(self.theta0), self.point(self.theta1)

    def _offset(self, theta) -> np.ndarray:
        """Counter-clockwise angular offset of ``theta`` from ``theta0`` in [0, 2pi)."""
        return np.mod(theta - self.theta0, 2.0 * math.pi)

    def candidates(self, p: np.ndarray):
        qx, qy = p[:, 0] - self.cx, p[:, 1] - self.cy
        rho = np.hypot(qx, qy)
        theta = np.arctan2(qy, qx)
        span = self.theta1 - self.theta0
        off = self._offset(theta)
        in_range = np.ones(len(p), dtype=bool) if self.full else off <= span
        safe = np.maximum(rho, 1e-300)
        radial = np.stack([self.cx + self.radius * qx / safe,
                           self.cy + self.radius * qy / safe], axis=-1)
        dist = np.abs(self.radius - rho)
        kind = np.full(len(p), INTERIOR)
        degenerate = rho <= TOL_PROJ * self.radius
        out = []
        if self.full:
            out.append((radial, dist, kind, np.ones(len(p), dtype=bool)))
            return out, degenerate
        a, b = self.endpoints
        kind = np.where(off == 0.0, END_A, np.where(off == span, END_B, INTERIOR))
        radial[kind == END_A] = a
        radial[kind == END_B] = b
        out.append((radial, dist, kind, in_range))
        for pt, code in ((a, END_A), (b, END_B)):
            d = np.hypot(p[:, 0] - pt[0], p[:, 1] - pt[1])
            out.append((np.broadcast_to(pt, p.shape).copy(), d,
                        np.full(len(p), code), ~in_range))
        return out, degenerate & (span > 0)

    def normals_at(self, q: np.ndarray, dom: Domain) -> np.ndarray:
        n = np.stack([self.cx - q[:, 0], self.cy - q[:, 1]], axis=-1)
        return n / np.linalg.norm(n, axis=1, keepdims=True)


Arc = Union[Segment, CircularArc]


def boundary_arcs(dom: Domain) -> tuple[Arc, ...]:
    """The whole boundary as open-boundary arcs (open-table problem)."""
    if isinstance(dom, Disk):
        return (CircularArc(dom.cx, dom.cy, dom.radius),)
    x0, y0, x1, y1 = dom.bbox
    return (Segment((x0, y0), (x1, y0)), Segment((x1, y0), (x1, y1)),
            Segment((x1, y1), (x0, y1)), Segment((x0, y1), (x0, y0)))


def validate_gamma(dom: Domain, gamma: Sequence[Arc]) -> tuple[Arc, ...]:
    gamma = tuple(gamma)
    if not gamma:
        raise DomainError("open boundary must contain at least one arc")
    tol = TOL_PROJ * dom.diam * 10
    for k, arc in enumerate(gamma):
        if isinstance(arc, Segment):
            if not isinstance(dom, Rectangle):
                raise DomainError(f"arc {k}: segments require a rectangular table")
            a, b = arc.endpoints
            pts = np.stack([a, b, (a + b) / 2])
            if not dom.on_boundary(pts, tol).all():
                raise DomainError(f"arc {k}: segment does not lie on the table boundary")
            same_side = (abs(a[0] - b[0]) <= tol and min(abs(a[0] - dom.x0), abs(a[0] - dom.x1)) <= tol) or (
                abs(a[1] - b[1]) <= tol and min(abs(a[1] - dom.y0), abs(a[1] - dom.y1)) <= tol)
            if not same_side:
                raise DomainError(f"arc {k}: segment must lie on a single side")
        elif isinstance(arc, CircularArc):
            if not isinstance(dom, Disk):
                raise DomainError(f"arc {k}: circular arcs require a disk table")
            if (abs(arc.cx - dom.cx) > tol or abs(arc.cy - dom.cy) > tol
                    or abs(arc.radius - dom.radius) > tol):
                raise DomainError(f"arc {k}: arc is not on the table boundary")
        else:
            raise DomainError(f"arc {k}: unsupported arc type {type(arc).__name__}")
    return gamma


# ---------------------------------------------------------------------------
# projections


@dataclass
class ProjectionArrays:
    """Vectorised projection data for ``n`` points."""

    dist: np.ndarray        # (n,)
    point: np.ndarray       # (n, 2) first projection
    arc: np.ndarray         # (n,) arc index of the first projection
    kind: np.ndarray        # (n,) INTERIOR / END_A / END_B
    count: np.ndarray       # (n,) number of distinct projections (large if infinite)
    all_points: np.ndarray  # (n, M, 2) candidate points
    keep: np.ndarray        # (n, M) distinct minimisers among candidates
    cand_arc: np.ndarray    # (M,)
    cand_kind: np.ndarray   # (n, M)


def project_points(p, dom: Domain, gamma: Sequence[Arc]) -> ProjectionArrays:
    p = np.atleast_2d(np.asarray(p, dtype=float))
    tol = TOL_PROJ * dom.diam
    pos_tol = 1e-7 * dom.diam
    pts, dists, kinds, valids, arcs = [], [], [], [], []
    degenerate = np.zeros(len(p), dtype=bool)
    for k, arc in enumerate(gamma):
        cands, deg = arc.candidates(p)
        degenerate |= deg
        for q, d, kind, valid in cands:
            pts.append(q)
            dists.append(d)
            kinds.append(kind)
            valids.append(valid)
            arcs.append(k)
    # endpoint candidates first so that a coinciding interior point is dropped
    order = sorted(range(len(pts)), key=lambda m: 0 if np.all(kinds[m] != INTERIOR) else 1)
    C = np.stack([pts[m] for m in order], axis=1)
    D = np.stack([dists[m] for m in order], axis=1)
    K = np.stack([kinds[m] for m in order], axis=1)
    V = np.stack([valids[m] for m in order], axis=1)
    A = np.array([arcs[m] for m in order])

    D = np.where(V, D, np.inf)
    dmin = D.min(axis=1)
    near = D <= dmin[:, None] + tol
    keep = near.copy()
    M = C.shape[1]
    for m in range(1, M):
        gap = np.hypot(C[:, :m, 0] - C[:, m:m + 1, 0], C[:, :m, 1] - C[:, m:m + 1, 1])
        dup = (keep[:, :m] & (gap <= pos_tol)).any(axis=1)
        keep[:, m] &= ~dup
    count = keep.sum(axis=1)
    count = np.where(degenerate & (dmin <= D.min(axis=1) + tol), np.maximum(count, 1 << 20), count)
    first = np.argmax(keep, axis=1)
    rows = np.arange(len(p))
    return ProjectionArrays(
        dist=dmin, point=C[rows, first], arc=A[first], kind=K[rows, first],
        count=count, all_points=C, keep=keep, cand_arc=A, cand_kind=K)


def distance_points(p, dom: Domain, gamma: Sequence[Arc]) -> np.ndarray:
    """Distance from the open boundary at each row of ``p``."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    d = np.full(len(p), np.inf)
    for arc in gamma:
        for _, dist, _, valid in arc.candidates(p)[0]:
            d = np.minimum(d, np.where(valid, dist, np.inf))
    return d


@dataclass(frozen=True)
class ProjectionPoint:
    y: tuple[float, float]
    arc: int
    kind: str  # "interior", "A" or "B"


@dataclass(frozen=True)
class Projection:
    points: tuple[ProjectionPoint, ...]
    distance: float

    @property
    def regular(self) -> bool:
        return len(self.points) == 1


def _check_inside(x: np.ndarray, dom: Domain) -> None:
    if not bool(dom.contains(x, TOL_PROJ * dom.diam)):
        raise DomainError(f"point {tuple(x)} lies outside the table")


def project_gamma(x, dom: Domain, gamma: Sequence[Arc]) -> Projection:
    """All nearest points of ``x`` on the open boundary."""
    x = np.asarray(x, dtype=float)
    _check_inside(x, dom)
    gamma = validate_gamma(dom, gamma)
    pr = project_points(x[None, :], dom, gamma)
    pts = []
    if pr.count[0] > pr.keep.shape[1]:
        # centre of a circular arc: sample the continuum of projections
        arc = gamma[int(pr.arc[0])]
        for th in np.linspace(arc.theta0, min(arc.theta1, arc.theta0 + 2 * math.pi), 4, endpoint=not arc.full):
            q = arc.point(th)
            pts.append(ProjectionPoint((float(q[0]), float(q[1])), int(pr.arc[0]), "interior"))
    else:
        for m in np.flatnonzero(pr.keep[0]):
            q = pr.all_points[0, m]
            pts.append(ProjectionPoint((float(q[0]), float(q[1])), int(pr.cand_arc[m]),
                                       KIND_NAMES[int(pr.cand_kind[0, m])]))
    return Projection(tuple(pts), float(pr.dist[0]))


def dist_gamma_field(grid, dom: Domain, gamma: Sequence[Arc]):
    """Distance from the open boundary sampled on ``grid``."""
    from .grid import ScalarField

    gamma = validate_gamma(dom, gamma)
    pts, mask = grid.sample_points(dom)
    vals = np.full(grid.shape, np.nan)
    vals[mask] = distance_points(pts[mask.ravel()], dom, gamma)
    return ScalarField(grid, vals)


# ---------------------------------------------------------------------------
# transport rays


@dataclass
class RayArrays:
    d: np.ndarray
    y: np.ndarray
    direction: np.ndarray
    length: np.ndarray
    tau: np.ndarray
    kind: np.ndarray
    arc: np.ndarray
    count: np.ndarray

    @property
    def end(self) -> np.ndarray:
        return self.y + self.length[:, None] * self.direction


def ray_length(y: np.ndarray, direction: np.ndarray, d: np.ndarray,
               dom: Domain, gamma: Sequence[Arc]) -> np.ndarray:
    """Length of the distance ray issued from ``y`` along ``direction``.

    ``d`` is a known admissible length (the distance of the query point).
    The supremum is located by bisection on the monotone predicate
    "``y`` is still a projection of ``y + s*direction``".
    """
    tol = 1e-12 * dom.diam
    x = y + d[:, None] * direction
    hi = d + dom.exit_distance(x, direction)
    lo = d.copy()

    def good(yy, dd, s):
        z = dom.clamp(yy + s[:, None] * dd)
        reach = np.hypot(z[:, 0] - yy[:, 0], z[:, 1] - yy[:, 1])
        return distance_points(z, dom, gamma) >= reach - tol

    done = good(y, direction, hi)
    lo = np.where(done, hi, lo)
    todo = ~done
    if todo.any():
        lo_t, hi_t = lo[todo], hi[todo]
        y_t, dir_t = y[todo], direction[todo]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo_t + hi_t)
            ok = good(y_t, dir_t, mid)
            lo_t = np.where(ok, mid, lo_t)
            hi_t = np.where(ok, hi_t, mid)
        lo[todo] = lo_t
    return lo


def rays_points(p, dom: Domain, gamma: Sequence[Arc], choice: int = 0) -> RayArrays:
    """Transport-ray data at each point; points of the open boundary get the
    inward normal direction when they are arc-interior, NaN when endpoints."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    pr = project_points(p, dom, gamma)
    y = pr.point.copy()
    kind = pr.kind.copy()
    arc = pr.arc.copy()
    if choice:
        rows = np.arange(len(p))
        idx = np.full(len(p), -1)
        seen = np.cumsum(pr.keep, axis=1) - 1
        hit = pr.keep & (seen == choice)
        has = hit.any(axis=1)
        idx[has] = np.argmax(hit[has], axis=1)
        y[has] = pr.all_points[rows[has], idx[has]]
        kind[has] = pr.cand_kind[rows[has], idx[has]]
        arc[has] = pr.cand_arc[idx[has]]
    d = pr.dist
    tol = TOL_PROJ * dom.diam
    direction = np.full_like(p, np.nan)
    offset = p - y
    norm = np.hypot(offset[:, 0], offset[:, 1])
    # the centre of a full circle reports itself as projection: direction stays NaN
    pos = (d > tol) & (norm > 0)
    direction[pos] = offset[pos] / norm[pos, None]
    on_arc = (d <= tol) & (kind == INTERIOR)
    for k, a in enumerate(gamma):
        sel = on_arc & (arc == k)
        if sel.any():
            direction[sel] = a.normals_at(y[sel], dom)
    d_eff = np.where(pos, d, 0.0)
    ok = pos | on_arc
    length = np.full(len(p), np.nan)
    if ok.any():
        length[ok] = ray_length(y[ok], direction[ok], d_eff[ok], dom, gamma)
    tau = length - d_eff
    return RayArrays(d=d, y=y, direction=direction, length=length,
                     tau=np.maximum(tau, 0.0), kind=kind, arc=arc, count=pr.count)


@dataclass(frozen=True)
class TransportRay:
    x: tuple[float, float]
    y: tuple[float, float]
    dir: tuple[float, float]
    d: float
    l: float
    m: tuple[float, float]
    tau: float
    kind: str
    arc: int


def transport_ray(x, dom: Domain, gamma: Sequence[Arc], choice: int = 0) -> TransportRay:
    """Distance ray through ``x`` built from its ``choice``-th projection."""
    x = np.asarray(x, dtype=float)
    _check_inside(x, dom)
    gamma = validate_gamma(dom, gamma)
    r = rays_points(x[None, :], dom, gamma, choice=choice)
    if r.d[0] <= TOL_PROJ * dom.diam:
        raise DegenerateRayError(f"{tuple(x)} lies on the open boundary; ray direction undefined")
    m = r.end[0]
    return TransportRay(
        x=(float(x[0]), float(x[1])), y=(float(r.y[0, 0]), float(r.y[0, 1])),
        dir=(float(r.direction[0, 0]), float(r.direction[0, 1])),
        d=float(r.d[0]), l=float(r.length[0]), m=(float(m[0]), float(m[1])),
        tau=float(r.tau[0]), kind=KIND_NAMES[int(r.kind[0])], arc=int(r.arc[0]))


# ---------------------------------------------------------------------------
# ridge, decomposition, curvature


def nudge_boundary(p, dom: Domain, eta: float) -> np.ndarray:
    """Move points lying on the table boundary inward by ``eta``.

    Boundary nodes are not in the open table; this picks the one-sided limit
    from the interior when classifying them.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    n = dom.inward_normal(p, TOL_PROJ * dom.diam)
    return p + eta * n


def extended_ridge_mask(grid, dom: Domain, gamma: Sequence[Arc], delta: float | None = None):
    """Nodes with several projections or within ``delta`` of their ray end."""
    from .grid import ScalarField

    gamma = validate_gamma(dom, gamma)
    if delta is None:
        delta = 2.0 * grid.h
    if not delta > 0:
        raise ValueError("delta must be positive")
    pts, mask = grid.sample_points(dom)
    rays = rays_points(pts[mask.ravel()], dom, gamma)
    ridge = np.zeros(grid.shape, dtype=bool)
    ridge[mask] = (rays.count >= 2) | (rays.tau < delta)
    return ScalarField(grid, ridge)


def region_labels(p, dom: Domain, gamma: Sequence[Arc], delta: float) -> np.ndarray:
    eta = 1e-6 * delta
    q = nudge_boundary(p, dom, eta)
    rays = rays_points(q, dom, gamma)
    labels = 3 * rays.arc + rays.kind
    ridge = (rays.count >= 2) | (rays.tau < delta)
    return np.where(ridge, RIDGE, labels)


def region_decomposition(grid, dom: Domain, gamma: Sequence[Arc], delta: float | None = None):
    """Label each node by the region of its projection.

    Codes: ``3*i`` (arc ``i`` interior), ``3*i + 1`` (endpoint A of arc i),
    ``3*i + 2`` (endpoint B), :data:`RIDGE` and :data:`OUTSIDE`.
    """
    from .grid import ScalarField

    gamma = validate_gamma(dom, gamma)
    if delta is None:
        delta = 2.0 * grid.h
    pts, mask = grid.sample_points(dom)
    labels = np.full(grid.shape, OUTSIDE, dtype=int)
    labels[mask] = region_labels(pts[mask.ravel()], dom, gamma, delta)
    return ScalarField(grid, labels)


def label_name(code: int) -> str:
    if code == RIDGE:
        return "ridge"
    if code == OUTSIDE:
        return "outside"
    i, k = divmod(int(code), 3)
    return f"Omega_{i + 1}^" + {INTERIOR: "*", END_A: "A", END_B: "B"}[k]


def curvature_at(y, gamma: Sequence[Arc], dom: Domain | None = None):
    """Curvature of the open boundary at ``y``, or :data:`ENDPOINT`."""
    y = np.asarray(y, dtype=float)
    scale = dom.diam if dom is not None else max(1.0, float(np.abs(y).max()))
    tol = 1e-9 * scale
    for arc in gamma:
        q, dist, kind, valid = arc.candidates(y[None, :])[0][0]
        ends = arc.endpoints
        if ends is not None and min(np.linalg.norm(y - ends[0]), np.linalg.norm(y - ends[1])) <= tol:
            return ENDPOINT
        if valid[0] and dist[0] <= tol:
            return arc.curvature
    raise DomainError(f"{tuple(y)} is not on the open boundary")
