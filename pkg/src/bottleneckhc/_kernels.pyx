# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled core: polynomial-system evaluation and the path-tracking loop.

``Evaluator`` computes values, partial derivatives and magnitude scales in
one pass over the flattened term tables built by
``algebra.compiled.build_tables``; terms of a row are accumulated left to
right in storage order. ``track_core`` runs the same predictor-corrector
loop as ``tracking._track_loop_py`` on a polynomial homotopy whose last
variable is ``t``, with a small partial-pivot LU in place of LAPACK.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite, fmax

cnp.import_array()

IMPLEMENTATION = "cython"

ctypedef double complex cplx

# outcome kinds returned by track_core
FINISHED = 0
DIVERGED = 1
TRUNCATED = 2


cdef inline double cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef class Evaluator:
    cdef int V, R, M, maxdeg
    cdef long long[::1] mono_ptr, row_ptr
    cdef int[::1] mono_var, mono_exp, term_mono
    cdef cplx[::1] term_coef

    def __init__(self, tables):
        self.V = tables.num_vars
        self.R = tables.num_polys
        self.M = len(tables.mono_ptr) - 1
        self.maxdeg = int(tables.max_deg.max()) if self.V else 0
        self.mono_ptr = np.ascontiguousarray(tables.mono_ptr, dtype=np.int64)
        self.row_ptr = np.ascontiguousarray(tables.row_ptr, dtype=np.int64)
        self.mono_var = np.ascontiguousarray(tables.mono_var, dtype=np.int32)
        self.mono_exp = np.ascontiguousarray(tables.mono_exp, dtype=np.int32)
        self.term_mono = np.ascontiguousarray(tables.term_mono, dtype=np.int32)
        self.term_coef = np.ascontiguousarray(tables.term_coef, dtype=np.complex128)

    cdef void eval_into(self, cplx* z, bint want_jac, cplx* out, double* scale,
                        cplx* pw, cplx* mono, double* amono) nogil:
        """``out`` gets R values then R*V partials (row-major); ``pw`` holds V*(maxdeg+1)."""
        cdef int v, k, m, r
        cdef long long q
        cdef cplx acc, val
        cdef double sacc
        cdef int stride = self.maxdeg + 1
        cdef int nrows = self.R + (self.R * self.V if want_jac else 0)
        for v in range(self.V):
            pw[v * stride] = 1.0
            for k in range(1, stride):
                pw[v * stride + k] = pw[v * stride + k - 1] * z[v]
        for m in range(self.M):
            val = 1.0
            for q in range(self.mono_ptr[m], self.mono_ptr[m + 1]):
                val = val * pw[self.mono_var[q] * stride + self.mono_exp[q]]
            mono[m] = val
            amono[m] = cabs(val)
        for r in range(nrows):
            acc = 0.0
            if r < self.R:
                sacc = 0.0
                for q in range(self.row_ptr[r], self.row_ptr[r + 1]):
                    acc = acc + self.term_coef[q] * mono[self.term_mono[q]]
                    sacc = sacc + cabs(self.term_coef[q]) * amono[self.term_mono[q]]
                scale[r] = sacc
            else:
                for q in range(self.row_ptr[r], self.row_ptr[r + 1]):
                    acc = acc + self.term_coef[q] * mono[self.term_mono[q]]
            out[r] = acc

    def __call__(self, cplx[::1] z, bint want_jac):
        cdef int nrows = self.R + (self.R * self.V if want_jac else 0)
        out_arr = np.empty(max(nrows, 1), dtype=np.complex128)
        scale_arr = np.empty(max(self.R, 1), dtype=np.float64)
        # scratch is per call so one evaluator can serve concurrent callers
        cdef cplx[::1] pw = np.empty(max(self.V, 1) * (self.maxdeg + 1), dtype=np.complex128)
        cdef cplx[::1] mono = np.empty(max(self.M, 1), dtype=np.complex128)
        cdef double[::1] amono = np.empty(max(self.M, 1), dtype=np.float64)
        cdef cplx[::1] out = out_arr
        cdef double[::1] scale = scale_arr
        with nogil:
            self.eval_into(&z[0], want_jac, &out[0], &scale[0], &pw[0], &mono[0], &amono[0])
        vals = out_arr[:self.R]
        jac = out_arr[self.R:nrows].reshape(self.R, self.V) if want_jac else None
        return vals, jac, scale_arr[:self.R]


cdef class _Work:
    """Scratch buffers for one tracking run on an N x N homotopy."""
    cdef int N
    cdef Evaluator ev
    cdef cplx[::1] zt, out, pw, mono, A, b, k1, k2, k3, k4, ztmp, zp, zn
    cdef double[::1] scale, amono

    def __init__(self, Evaluator ev):
        cdef int N = ev.R
        self.N = N
        self.ev = ev
        self.zt = np.empty(N + 1, dtype=np.complex128)
        self.out = np.empty(N + N * (N + 1), dtype=np.complex128)
        self.pw = np.empty((N + 1) * (ev.maxdeg + 1), dtype=np.complex128)
        self.mono = np.empty(max(ev.M, 1), dtype=np.complex128)
        self.amono = np.empty(max(ev.M, 1), dtype=np.float64)
        self.scale = np.empty(N, dtype=np.float64)
        self.A = np.empty(N * N, dtype=np.complex128)
        self.b = np.empty(N, dtype=np.complex128)
        self.k1 = np.empty(N, dtype=np.complex128)
        self.k2 = np.empty(N, dtype=np.complex128)
        self.k3 = np.empty(N, dtype=np.complex128)
        self.k4 = np.empty(N, dtype=np.complex128)
        self.ztmp = np.empty(N, dtype=np.complex128)
        self.zp = np.empty(N, dtype=np.complex128)
        self.zn = np.empty(N, dtype=np.complex128)

    cdef void evaluate(self, cplx* z, double t, bint want_jac) nogil:
        cdef int i
        for i in range(self.N):
            self.zt[i] = z[i]
        self.zt[self.N] = t
        self.ev.eval_into(&self.zt[0], want_jac, &self.out[0], &self.scale[0],
                          &self.pw[0], &self.mono[0], &self.amono[0])

    cdef double residual(self) nogil:
        cdef int i
        cdef double r = 0.0, v
        for i in range(self.N):
            v = cabs(self.out[i]) / (1.0 + self.scale[i])
            if not isfinite(v):
                return v
            r = fmax(r, v)
        return r

    cdef bint solve(self, cplx* rhs_col, int rhs_stride, double sign, cplx* x) nogil:
        """Solve J_z x = sign * rhs with J_z taken from the last evaluation."""
        cdef int N = self.N, V = self.N + 1
        cdef int i, j, k, p
        cdef double best, m
        cdef cplx f, tmp
        for i in range(N):
            for j in range(N):
                self.A[i * N + j] = self.out[N + i * V + j]
            self.b[i] = sign * rhs_col[i * rhs_stride]
        for k in range(N):
            p = k
            best = cabs(self.A[k * N + k])
            for i in range(k + 1, N):
                m = cabs(self.A[i * N + k])
                if m > best:
                    best = m
                    p = i
            if best == 0.0 or not isfinite(best):
                return False
            if p != k:
                for j in range(N):
                    tmp = self.A[k * N + j]
                    self.A[k * N + j] = self.A[p * N + j]
                    self.A[p * N + j] = tmp
                tmp = self.b[k]
                self.b[k] = self.b[p]
                self.b[p] = tmp
            for i in range(k + 1, N):
                f = self.A[i * N + k] / self.A[k * N + k]
                if f != 0.0:
                    for j in range(k + 1, N):
                        self.A[i * N + j] = self.A[i * N + j] - f * self.A[k * N + j]
                    self.b[i] = self.b[i] - f * self.b[k]
        for i in range(N - 1, -1, -1):
            tmp = self.b[i]
            for j in range(i + 1, N):
                tmp = tmp - self.A[i * N + j] * x[j]
            x[i] = tmp / self.A[i * N + i]
        return True

    cdef bint tangent(self, cplx* z, double t, cplx* out) nogil:
        self.evaluate(z, t, True)
        # J_t is column N of the (N x N+1) partials block
        return self.solve(&self.out[self.N + self.N], self.N + 1, -1.0, out)


cdef inline double norm2(cplx* z, int n) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n):
        s += z[i].real * z[i].real + z[i].imag * z[i].imag
    return sqrt(s)


cdef inline double norminf(cplx* z, int n) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n):
        s = fmax(s, cabs(z[i]))
    return s


cdef inline bint allfinite(cplx* z, int n) nogil:
    cdef int i
    for i in range(n):
        if not (isfinite(z[i].real) and isfinite(z[i].imag)):
            return False
    return True


cdef bint rk4(_Work w, cplx* z, double t, double dt, cplx* zp) nogil:
    cdef int i, N = w.N
    if not w.tangent(z, t, &w.k1[0]):
        return False
    for i in range(N):
        w.ztmp[i] = z[i] + 0.5 * dt * w.k1[i]
    if not w.tangent(&w.ztmp[0], t + 0.5 * dt, &w.k2[0]):
        return False
    for i in range(N):
        w.ztmp[i] = z[i] + 0.5 * dt * w.k2[i]
    if not w.tangent(&w.ztmp[0], t + 0.5 * dt, &w.k3[0]):
        return False
    for i in range(N):
        w.ztmp[i] = z[i] + dt * w.k3[i]
    if not w.tangent(&w.ztmp[0], t + dt, &w.k4[0]):
        return False
    for i in range(N):
        zp[i] = z[i] + (dt / 6.0) * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i])
    return True


cdef bint newton(_Work w, double t, cplx* z, double tol, int max_iters, double* first_corr) nogil:
    """In-place Newton on z; True when the scaled residual drops below tol."""
    cdef int it, i, N = w.N
    cdef double res
    first_corr[0] = -1.0
    for it in range(max_iters + 1):
        w.evaluate(z, t, True)
        res = w.residual()
        if not isfinite(res):
            return False
        if res < tol:
            return True
        if it == max_iters:
            return False
        if not w.solve(&w.out[0], 1, -1.0, &w.ztmp[0]):
            return False
        if it == 0:
            first_corr[0] = norm2(&w.ztmp[0], N)
        for i in range(N):
            z[i] = z[i] + w.ztmp[i]
    return False


cdef bint finish(_Work w, cplx* z, int iters, double final_tol, double radius,
                 double* corr, int* ncorr, double* res_out) nogil:
    """Newton at t = 0 with the jump guards; z is updated in place."""
    cdef int k, i, N = w.N
    cdef double res, step
    ncorr[0] = 0
    for k in range(iters + 1):
        w.evaluate(z, 0.0, True)
        res = w.residual()
        res_out[0] = res
        if not isfinite(res):
            return False
        if res <= final_tol:
            return True
        if not w.solve(&w.out[0], 1, -1.0, &w.ztmp[0]):
            return False
        if not allfinite(&w.ztmp[0], N):
            return False
        step = norm2(&w.ztmp[0], N)
        if step > radius * (1.0 + norm2(z, N)):
            return False
        if ncorr[0] > 0 and step > corr[ncorr[0] - 1]:
            return False
        corr[ncorr[0]] = step
        ncorr[0] += 1
        for i in range(N):
            z[i] = z[i] + w.ztmp[i]
    return False


def track_core(Evaluator ev, start, cfg, bint record=False):
    """Run the tracking loop; returns ``(kind, z, t, residual, steps, rejected, corrections, path)``.

    ``kind`` is FINISHED (Newton at t = 0 reached ``final_tol``), DIVERGED or
    TRUNCATED; final classification of finished paths happens in Python.
    """
    cdef _Work w = _Work(ev)
    cdef int N = w.N
    cdef cplx[::1] z = np.array(start, dtype=np.complex128)
    cdef cplx[::1] zf = np.empty(N, dtype=np.complex128)
    cdef double newton_tol = cfg.newton_tol
    cdef int max_newton_iters = cfg.max_newton_iters
    cdef double min_step = cfg.min_step
    cdef double max_step = cfg.max_step
    cdef int expand_after = cfg.step_expand_after
    cdef double expand = cfg.step_expand_factor
    cdef double cut = cfg.step_cut_factor
    cdef double div_norm = cfg.divergence_norm
    cdef double endgame_t = cfg.endgame_t
    cdef double final_tol = cfg.final_tol
    cdef int max_steps = cfg.max_steps
    cdef double max_corr = cfg.max_correction
    cdef int finish_iters = cfg.finish_iters
    cdef double radius = cfg.finish_radius
    cdef double t = 1.0, t1, dt, h = cfg.initial_step, first, res = 0.0
    cdef int successes = 0, steps = 0, rejected = 0, ncorr = 0, i
    cdef bint ok
    cdef double[::1] corr = np.empty(finish_iters + 1, dtype=np.float64)
    path = [(1.0, np.asarray(z).copy())] if record else None

    while steps < max_steps:
        if t <= endgame_t:
            for i in range(N):
                zf[i] = z[i]
            with nogil:
                ok = finish(w, &zf[0], finish_iters, final_tol, radius, &corr[0], &ncorr, &res)
            if ok:
                return (FINISHED, np.asarray(zf).copy(), 0.0, res, steps, rejected,
                        [corr[i] for i in range(ncorr)], path)
            if t < min_step:
                break
            t1 = fmax(t - h, 0.25 * t)
        else:
            t1 = fmax(t - h, 0.0)
            if t1 < endgame_t:
                t1 = endgame_t
        dt = t1 - t
        steps += 1
        with nogil:
            ok = rk4(w, &z[0], t, dt, &w.zp[0])
            if ok:
                ok = allfinite(&w.zp[0], N)
            if ok:
                for i in range(N):
                    w.zn[i] = w.zp[i]
                ok = newton(w, t1, &w.zn[0], newton_tol, max_newton_iters, &first)
                if ok and first >= 0.0:
                    ok = first <= max_corr * (1.0 + norminf(&w.zp[0], N))
        if ok:
            for i in range(N):
                z[i] = w.zn[i]
            t = t1
            if record:
                path.append((t, np.asarray(z).copy()))
            if norminf(&z[0], N) > div_norm:
                return (DIVERGED, np.asarray(z).copy(), t, float("nan"), steps, rejected, [], path)
            successes += 1
            if successes >= expand_after:
                h = min(h * expand, max_step)
                successes = 0
        else:
            rejected += 1
            successes = 0
            h *= cut
            if h < min_step:
                break
    kind = DIVERGED if norminf(&z[0], N) > div_norm else TRUNCATED
    return (kind, np.asarray(z).copy(), t, float("nan"), steps, rejected, [], path)
