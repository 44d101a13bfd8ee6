"""Pure numpy implementations of the compiled kernels.

Same signatures and semantics as ``sandtable._kernels``; selected at import
time when the extension is not built (or ``SANDTABLE_BACKEND=python``).
"""

from __future__ import annotations

import numpy as np

INTERIOR_NODE, GAMMA, WALL = 1, 2, 3

_CHUNK = 1 << 22
# east, west, north, south; the kernel sums contributions in this order
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def cone_envelope(tx, ty, sx, sy, sd):
    """max(0, max_k sd[k] - |t - s_k|) for every target point t."""
    tx, ty = np.asarray(tx, float), np.asarray(ty, float)
    sx, sy, sd = np.asarray(sx, float), np.asarray(sy, float), np.asarray(sd, float)
    out = np.zeros(len(tx))
    if len(sx) == 0 or len(tx) == 0:
        return out
    block = max(1, _CHUNK // len(sx))
    for start in range(0, len(tx), block):
        stop = start + block
        dx = tx[start:stop, None] - sx[None, :]
        dy = ty[start:stop, None] - sy[None, :]
        cone = sd[None, :] - np.sqrt(dx * dx + dy * dy)
        out[start:stop] = np.maximum(cone.max(axis=1), 0.0)
    return out


def _shift(a, di, dj):
    """a[i+di, j+dj] with zeros where out of range."""
    out = np.zeros_like(a)
    nx, ny = a.shape
    xs_dst = slice(max(0, -di), nx - max(0, di))
    xs_src = slice(max(0, di), nx - max(0, -di))
    ys_dst = slice(max(0, -dj), ny - max(0, dj))
    ys_src = slice(max(0, dj), ny - max(0, -dj))
    out[xs_dst, ys_dst] = a[xs_src, ys_src]
    return out


class _Stencil:
    """Neighbour availability for a node classification array."""

    def __init__(self, cls):
        self.cls = cls
        active = cls > 0
        self.active = active
        self.has = {}
        for di, dj in _DIRS:
            self.has[(di, dj)] = _shift(active.astype(np.int8), di, dj).astype(bool) & active


# -- stand-alone difference operators ---------------------------------------

def maxmod_components(u, h, st):
    """Larger-magnitude one-sided difference per axis (ties go backward)."""
    comps = []
    for axis in ((1, 0), (0, 1)):
        fwd_ok = st.has[axis]
        bwd_ok = st.has[(-axis[0], -axis[1])]
        b = np.where(fwd_ok, (_shift(u, *axis) - u) / h, 0.0)
        a = np.where(bwd_ok, (u - _shift(u, -axis[0], -axis[1])) / h, 0.0)
        both = np.where(np.abs(b) > np.abs(a), b, a)
        comps.append(np.where(fwd_ok & bwd_ok, both, np.where(fwd_ok, b, a)))
    return comps


def laplacian(u, h, st):
    """Five-point Laplacian; a missing neighbour mirrors the opposite one."""
    out = np.zeros_like(u)
    for axis in ((1, 0), (0, 1)):
        fwd_ok = st.has[axis]
        bwd_ok = st.has[(-axis[0], -axis[1])]
        up = _shift(u, *axis)
        dn = _shift(u, -axis[0], -axis[1])
        up_g = np.where(fwd_ok, up, np.where(bwd_ok, dn, u))
        dn_g = np.where(bwd_ok, dn, np.where(fwd_ok, up, u))
        out += up_g - 2.0 * u + dn_g
    return np.where(st.active, out / (h * h), 0.0)


def upwind_dot(v, du, h, st):
    out = np.zeros_like(v)
    for axis, dk in zip(((1, 0), (0, 1)), du):
        fwd_ok = st.has[axis]
        bwd_ok = st.has[(-axis[0], -axis[1])]
        fwd = np.where(fwd_ok, (_shift(v, *axis) - v) / h, 0.0)
        bwd = np.where(bwd_ok, (v - _shift(v, -axis[0], -axis[1])) / h, 0.0)
        out += np.where(dk > 0, dk * fwd, np.where(dk < 0, dk * bwd, 0.0))
    return out


# -- scheme ------------------------------------------------------------------

class _SchemeStencil(_Stencil):
    """Adds odd ghost nodes across the open boundary."""

    def __init__(self, cls):
        super().__init__(cls)
        gamma = cls == GAMMA
        self.ghost = {}
        for d in _DIRS:
            opp = (-d[0], -d[1])
            self.ghost[d] = gamma & ~self.has[d] & self.has[opp]

    def neighbour_u(self, u, d):
        opp = (-d[0], -d[1])
        return np.where(self.has[d], _shift(u, *d),
                        np.where(self.ghost[d], -_shift(u, *opp), u))


def downhill_slope(u, h, st):
    """|Du| built from the steepest descending one-sided difference per axis."""
    s2 = np.zeros_like(u)
    for fwd, bwd in (((1, 0), (-1, 0)), ((0, 1), (0, -1))):
        a = (u - st.neighbour_u(u, bwd)) / h
        b = (st.neighbour_u(u, fwd) - u) / h
        s = np.maximum(np.maximum(a, 0.0), np.maximum(-b, 0.0))
        s2 += s * s
    return np.sqrt(s2)


def transport(u, v, h, st):
    """Upwind flux divergence of ``v Du``: matter moves from higher to lower nodes."""
    out = np.zeros_like(v)
    for d in _DIRS:
        diff = (st.neighbour_u(u, d) - u) / h
        vn = np.where(st.has[d], _shift(v, *d), 0.0)
        out += np.where(diff > 0, vn * diff, v * diff)
    return out / h


def _wall_update(u_new, v_new, active, out_x, out_y, copy_i, copy_j):
    wall_i, wall_j = np.nonzero(out_x.astype(bool) | out_y.astype(bool))
    if len(wall_i) == 0:
        return
    nx, ny = u_new.shape
    sx, sy = out_x[wall_i, wall_j], out_y[wall_i, wall_j]
    ii, jj = wall_i - sx, wall_j - sy
    ok_x = (sx != 0) & _active_at(active, ii, wall_j)
    ok_y = (sy != 0) & _active_at(active, wall_i, jj)
    # outward one-sided derivative, summed over the outward axes
    g = (np.where(ok_x, u_new[wall_i, wall_j] - u_new[np.clip(ii, 0, nx - 1), wall_j], 0.0)
         + np.where(ok_y, u_new[wall_i, wall_j] - u_new[wall_i, np.clip(jj, 0, ny - 1)], 0.0))
    copied = v_new[copy_i[wall_i, wall_j], copy_j[wall_i, wall_j]]
    v_new[wall_i, wall_j] = np.where(g > 0, 0.0, copied)


def advance(u, v, f, cls, out_x, out_y, copy_i, copy_j, h, dt, nsteps, tol, neg_tol):
    """Run up to ``nsteps`` explicit steps, updating ``u`` and ``v`` in place.

    ``cls`` holds 0 (inactive), 1 (interior), 2 (open boundary) or 3 (wall).
    Wall nodes carry outward axis directions ``out_x``/``out_y`` in {-1, 0, 1}
    and the node ``copy_i``/``copy_j`` whose rolling height they copy under
    the no-flux rule.  Stops early when the max rate drops below ``tol``
    (status 1) or the state blows up (status 2).  Returns
    ``(steps, rate, monotone_violations, status)``.
    """
    st = _SchemeStencil(cls)
    active = st.active
    gamma = cls == GAMMA
    wall = cls == WALL
    out_x = np.where(wall, out_x, 0).astype(np.int64)
    out_y = np.where(wall, out_y, 0).astype(np.int64)
    f = np.where(active, f, 0.0)
    rate, monotone, status, n = np.inf, 0, 0, 0
    while n < nsteps:
        grad = downhill_slope(u, h, st)
        exch = (1.0 - grad) * v
        v_new = np.where(active, v + dt * (transport(u, v, h, st) - exch + f), 0.0)
        u_new = np.where(active, u + dt * exch, 0.0)
        u_new[gamma] = 0.0
        _wall_update(u_new, v_new, active, out_x, out_y, copy_i, copy_j)
        monotone += int(np.count_nonzero(active & (grad <= 1.0) & (u_new < u)))
        rate = max(float(np.max(np.abs(u_new - u))), float(np.max(np.abs(v_new - v)))) / dt
        u[...] = u_new
        v[...] = v_new
        n += 1
        if not (np.isfinite(rate) and u.min() >= -neg_tol and v.min() >= -neg_tol):
            status = 2
            break
        if rate < tol:
            status = 1
            break
    return n, rate, monotone, status


def _in(idx, n):
    return (idx >= 0) & (idx < n)


def _active_at(active, i, j):
    ii = np.clip(i, 0, active.shape[0] - 1)
    jj = np.clip(j, 0, active.shape[1] - 1)
    return active[ii, jj] & _in(i, active.shape[0]) & _in(j, active.shape[1])
