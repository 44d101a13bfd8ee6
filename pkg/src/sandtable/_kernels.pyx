# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: cone envelope and the explicit scheme.

Mirrors ``sandtable._fallback`` operation by operation (same summation
order), so both backends agree to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite

cnp.import_array()

DEF GAMMA = 2
DEF WALL = 3


def cone_envelope(tx, ty, sx, sy, sd):
    """max(0, max_k sd[k] - |t - s_k|) for every target point t."""
    cdef double[::1] txv = np.ascontiguousarray(tx, dtype=np.float64)
    cdef double[::1] tyv = np.ascontiguousarray(ty, dtype=np.float64)
    cdef double[::1] sxv = np.ascontiguousarray(sx, dtype=np.float64)
    cdef double[::1] syv = np.ascontiguousarray(sy, dtype=np.float64)
    cdef double[::1] sdv = np.ascontiguousarray(sd, dtype=np.float64)
    cdef Py_ssize_t nt = txv.shape[0], ns = sxv.shape[0], a, k
    out = np.zeros(nt)
    cdef double[::1] o = out
    cdef double best, dx, dy, c
    if ns == 0:
        return out
    with nogil:
        for a in range(nt):
            best = -1e300
            for k in range(ns):
                dx = txv[a] - sxv[k]
                dy = tyv[a] - syv[k]
                c = sdv[k] - sqrt(dx * dx + dy * dy)
                if c > best:
                    best = c
            o[a] = best if best > 0.0 else 0.0
    return out


cdef inline bint _has(long[:, ::1] cls, Py_ssize_t i, Py_ssize_t j,
                      Py_ssize_t nx, Py_ssize_t ny) nogil:
    return 0 <= i < nx and 0 <= j < ny and cls[i, j] > 0


def _neighbour_codes(long[:, ::1] c):
    """Per node and direction (E, W, N, S): 0 none, 1 node, 2 odd ghost."""
    cdef Py_ssize_t nx = c.shape[0], ny = c.shape[1], i, j, d
    cdef int di, dj
    cdef int[4] DI = [1, -1, 0, 0]
    cdef int[4] DJ = [0, 0, 1, -1]
    codes = np.zeros((nx, ny, 4), dtype=np.int8)
    cdef signed char[:, :, ::1] k = codes
    for i in range(nx):
        for j in range(ny):
            if c[i, j] <= 0:
                continue
            for d in range(4):
                di = DI[d]
                dj = DJ[d]
                if _has(c, i + di, j + dj, nx, ny):
                    k[i, j, d] = 1
                elif c[i, j] == GAMMA and _has(c, i - di, j - dj, nx, ny):
                    k[i, j, d] = 2
    return codes


def advance(double[:, ::1] u, double[:, ::1] v, f, cls, out_x, out_y, copy_i, copy_j,
            double h, double dt, long nsteps, double tol, double neg_tol):
    """Run up to ``nsteps`` explicit steps in place; see the numpy fallback."""
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], size = nx * ny
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef long[:, ::1] c = np.ascontiguousarray(cls, dtype=np.int64)
    cdef long[:, ::1] ox = np.ascontiguousarray(out_x, dtype=np.int64)
    cdef long[:, ::1] oy = np.ascontiguousarray(out_y, dtype=np.int64)
    cdef long[:, ::1] ci = np.ascontiguousarray(copy_i, dtype=np.int64)
    cdef long[:, ::1] cj = np.ascontiguousarray(copy_j, dtype=np.int64)
    cdef signed char[:, :, ::1] nbk = _neighbour_codes(c)
    cdef double[:, ::1] ub = np.zeros((nx, ny))
    cdef double[:, ::1] vb = np.zeros((nx, ny))
    wi_np, wj_np = np.nonzero((np.asarray(c) == WALL)
                              & ((np.asarray(ox) != 0) | (np.asarray(oy) != 0)))
    cdef long[::1] wi = np.ascontiguousarray(wi_np, dtype=np.int64)
    cdef long[::1] wj = np.ascontiguousarray(wj_np, dtype=np.int64)
    cdef Py_ssize_t nw = wi.shape[0]
    cdef double[::1] wv = np.zeros(max(nw, 1))
    cdef double *cu = &u[0, 0]
    cdef double *cv = &v[0, 0]
    cdef double *nu = &ub[0, 0]
    cdef double *nv = &vb[0, 0]
    cdef double *tmp
    cdef double *pf = &fv[0, 0]
    cdef long *pc = &c[0, 0]
    cdef signed char *pk = &nbk[0, 0, 0]
    cdef Py_ssize_t[4] off
    off[0] = ny
    off[1] = -ny
    off[2] = 1
    off[3] = -1
    cdef Py_ssize_t i, j, k, d, idx, ii, jj
    cdef long n = 0, monotone = 0
    cdef int status = 0
    cdef signed char code
    cdef double[4] un
    cdef double[4] vn
    cdef double uc, vc, a, b, pa, pb, sx, sy, grad, exch, trans, diff, g, worst, dd, rate = np.inf
    cdef bint bad
    with nogil:
        while n < nsteps:
            worst = 0.0
            bad = False
            for idx in range(size):
                if pc[idx] <= 0:
                    nu[idx] = 0.0
                    nv[idx] = 0.0
                    continue
                uc = cu[idx]
                vc = cv[idx]
                for d in range(4):
                    code = pk[4 * idx + d]
                    if code == 1:
                        un[d] = cu[idx + off[d]]
                        vn[d] = cv[idx + off[d]]
                    elif code == 2:
                        un[d] = -cu[idx - off[d]]
                        vn[d] = 0.0
                    else:
                        un[d] = uc
                        vn[d] = 0.0
                # steepest descending one-sided difference per axis
                a = (uc - un[1]) / h
                b = (un[0] - uc) / h
                pa = a if a > 0.0 else 0.0
                pb = -b if -b > 0.0 else 0.0
                sx = pa if pa >= pb else pb
                a = (uc - un[3]) / h
                b = (un[2] - uc) / h
                pa = a if a > 0.0 else 0.0
                pb = -b if -b > 0.0 else 0.0
                sy = pa if pa >= pb else pb
                grad = sqrt(0.0 + sx * sx + sy * sy)
                exch = (1.0 - grad) * vc
                trans = 0.0
                for d in range(4):
                    diff = (un[d] - uc) / h
                    if diff > 0.0:
                        trans = trans + vn[d] * diff
                    else:
                        trans = trans + vc * diff
                trans = trans / h
                nv[idx] = vc + dt * (trans - exch + pf[idx])
                nu[idx] = uc + dt * exch
                if pc[idx] == GAMMA:
                    nu[idx] = 0.0
                if grad <= 1.0 and nu[idx] < uc:
                    monotone += 1
            # wall rule reads the pre-wall rolling heights
            for k in range(nw):
                i = wi[k]
                j = wj[k]
                idx = i * ny + j
                g = 0.0
                ii = i - ox[i, j]
                if ox[i, j] != 0 and _has(c, ii, j, nx, ny):
                    g = g + (nu[idx] - nu[ii * ny + j])
                jj = j - oy[i, j]
                if oy[i, j] != 0 and _has(c, i, jj, nx, ny):
                    g = g + (nu[idx] - nu[i * ny + jj])
                if g > 0.0:
                    wv[k] = 0.0
                else:
                    wv[k] = nv[ci[i, j] * ny + cj[i, j]]
            for k in range(nw):
                nv[wi[k] * ny + wj[k]] = wv[k]
            for idx in range(size):
                dd = fabs(nu[idx] - cu[idx])
                if dd > worst:
                    worst = dd
                dd = fabs(nv[idx] - cv[idx])
                if dd > worst:
                    worst = dd
                if not (nu[idx] >= -neg_tol) or not (nv[idx] >= -neg_tol):
                    bad = True
            tmp = cu
            cu = nu
            nu = tmp
            tmp = cv
            cv = nv
            nv = tmp
            rate = worst / dt
            n += 1
            if bad or not isfinite(rate):
                status = 2
                break
            if rate < tol:
                status = 1
                break
    if cu != &u[0, 0]:
        # results live in the scratch buffers
        u[:, :] = ub
        v[:, :] = vb
    return n, rate, monotone, status
