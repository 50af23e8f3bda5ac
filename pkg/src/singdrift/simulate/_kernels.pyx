# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernels; a line-by-line port of ``_fallback``."""

from libc.math cimport sqrt, log, exp, pow, fabs, copysign, erfc, cos, INFINITY, NAN, M_PI
from libc.stdint cimport uint64_t, int64_t, int8_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t STREAM = 0xD2B74407B1CE6E93ULL
cdef double INV53 = 1.0 / 9007199254740992.0

cdef enum:
    RUNNING = 0
    ABSORBED = 1
    EXPLODED = 2
    TRUNCATED = 3

_x, _w = np.polynomial.legendre.leggauss(8)
cdef double[8] BX
cdef double[8] BW
for _i in range(8):
    BX[_i] = 0.5 * (_x[_i] + 1.0)
    BW[_i] = 0.5 * _w[_i]


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _stream(uint64_t seed, uint64_t index) noexcept nogil:
    return _mix(_mix(seed + GOLDEN) ^ (index * STREAM))


def stream_state(uint64_t seed, uint64_t index):
    return _stream(seed, index)


cdef inline double _uniform(uint64_t* s) noexcept nogil:
    s[0] = s[0] + GOLDEN
    return (<double>(_mix(s[0]) >> 11) + 0.5) * INV53


cdef inline double _normal(uint64_t* s) noexcept nogil:
    cdef double u1 = _uniform(s)
    cdef double u2 = _uniform(s)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)


# -- walk -------------------------------------------------------------------------

cdef inline double _Q(double t, double q) noexcept nogil:
    if q == -1.0:
        return t * log(t) - t if t > 0.0 else 0.0
    if q == -2.0:
        return -log(t) if t > 0.0 else INFINITY
    if t == 0.0:
        return 0.0 if q > -2.0 else INFINITY
    return pow(t, q + 2.0) / ((q + 1.0) * (q + 2.0))


cdef inline double _dQ(double t, double q) noexcept nogil:
    if q == -1.0:
        return log(t) if t > 0.0 else -INFINITY
    if t == 0.0:
        return 0.0 if q > -1.0 else -INFINITY
    return pow(t, q + 1.0) / (q + 1.0)


cdef class _Walk:
    cdef double[::1] pl, pr, C, q, u0, ja, jb, clo, chi, lam
    cdef int8_t[::1] lo_r, hi_r
    cdef double dt, jitter
    cdef double oA, oB, oleft, oright

    def __init__(self, tab, double dt, double jitter):
        self.pl = np.ascontiguousarray(tab.pl, dtype=np.float64)
        self.pr = np.ascontiguousarray(tab.pr, dtype=np.float64)
        self.C = np.ascontiguousarray(tab.C, dtype=np.float64)
        self.q = np.ascontiguousarray(tab.q, dtype=np.float64)
        self.u0 = np.ascontiguousarray(tab.u0, dtype=np.float64)
        self.ja = np.ascontiguousarray(tab.ja, dtype=np.float64)
        self.jb = np.ascontiguousarray(tab.jb, dtype=np.float64)
        self.clo = np.ascontiguousarray(tab.clo, dtype=np.float64)
        self.chi = np.ascontiguousarray(tab.chi, dtype=np.float64)
        self.lo_r = np.ascontiguousarray(tab.lo_reach, dtype=np.int8)
        self.hi_r = np.ascontiguousarray(tab.hi_reach, dtype=np.int8)
        lam = np.zeros(len(tab.C))
        for j in range(len(tab.C)):
            if tab.q[j] == 0.0 and tab.C[j] > 0.0:
                lam[j] = sqrt(dt / tab.C[j])
        self.lam = lam
        self.dt = dt
        self.jitter = jitter

    cdef inline int locate(self, double v, int i) noexcept nogil:
        while v < self.pl[i]:
            i -= 1
        while v > self.pr[i]:
            i += 1
        return i

    cdef inline double J(self, double v, int i) noexcept nogil:
        cdef int j = self.locate(v, i)
        return self.C[j] * _Q(fabs(v - self.u0[j]), self.q[j]) + self.ja[j] + self.jb[j] * v

    cdef inline double I(self, double v, int i) noexcept nogil:
        cdef int j = self.locate(v, i)
        cdef double d = v - self.u0[j]
        return self.C[j] * copysign(1.0, d) * _dQ(fabs(d), self.q[j]) + self.jb[j]

    cdef inline double k(self, double v, int i) noexcept nogil:
        cdef int j = self.locate(v, i)
        cdef double d = fabs(v - self.u0[j])
        if d > 0.0 or self.q[j] >= 0.0:
            return self.C[j] * pow(d, self.q[j])
        return INFINITY

    cdef inline double exit_time(self, double u, int i, double A, double B, double left,
                                 double right, double Ju) noexcept nogil:
        return 2.0 * ((B * self.J(left, i) + A * self.J(right, i)) / (A + B) - Ju)

    cdef int step(self, double* u, int i, uint64_t* rng) noexcept nogil:
        cdef double z = 2.0 * _uniform(rng) - 1.0
        cdef double a = 1.0 + self.jitter * z
        cdef double b = 1.0 / a
        cdef double r = _uniform(rng)
        cdef double lam = self.lam[i]
        cdef double A, B, v
        if lam > 0.0:
            A = lam * a
            B = lam * b
            if u[0] - A >= self.pl[i] and u[0] + B <= self.pr[i]:
                if r * (A + B) < A:
                    u[0] = u[0] + B
                else:
                    u[0] = u[0] - A
                return i
        self.solve(u[0], i, a, b)
        if r * (self.oA + self.oB) < self.oA:
            v = self.oright
        else:
            v = self.oleft
        u[0] = v
        return self.locate(v, i)

    cdef void _set(self, double A, double B, double left, double right) noexcept nogil:
        self.oA = A
        self.oB = B
        self.oleft = left
        self.oright = right

    cdef void solve(self, double u, int i, double a, double b) noexcept nogil:
        cdef double dt = self.dt
        cdef double lo_b = self.clo[i], hi_b = self.chi[i]
        cdef double dA = u - lo_b, dB = hi_b - u
        cdef double Ju = self.J(u, i)
        cdef double capA = dA / a, capB = dB / b
        cdef double lam_max = capA if capA < capB else capB
        cdef double A, B, left, right, kk, lam, lo, hi, e, d, new, qq
        cdef int it, j
        if lam_max < INFINITY:
            A = lam_max * a
            B = lam_max * b
            left = lo_b if capA <= capB else u - A
            right = hi_b if capB <= capA else u + B
            if capA <= capB:
                A = dA
            if capB <= capA:
                B = dB
            if self.exit_time(u, i, A, B, left, right, Ju) <= dt:
                self.solve_clipped(u, i, A, B, left, right, Ju, capA <= capB, capB <= capA)
                return
        kk = self.k(u, i)
        if 0.0 < kk < INFINITY:
            lam = sqrt(dt / kk)
        else:
            j = self.locate(u, i)
            qq = self.q[j]
            lam = pow(dt / self.C[j], 1.0 / (qq + 2.0)) if qq > -2.0 else sqrt(dt)
        lo = 0.0
        hi = lam_max
        if not lam < hi:
            lam = 0.5 * hi
        for it in range(200):
            A = lam * a
            B = lam * b
            e = self.exit_time(u, i, A, B, u - A, u + B, Ju) - dt
            if fabs(e) <= 1e-12 * dt:
                break
            if e > 0.0:
                hi = lam
            else:
                lo = lam
            d = 2.0 * (self.I(u + B, i) - self.I(u - A, i)) / (a + b)
            new = lam - e / d if d > 0.0 else NAN
            if not (lo < new < hi):
                new = 2.0 * lam if hi == INFINITY else 0.5 * (lo + hi)
            if hi < INFINITY and hi - lo <= 1e-15 * hi:
                break
            lam = new
        self._set(lam * a, lam * b, u - lam * a, u + lam * b)

    cdef void solve_clipped(self, double u, int i, double A, double B, double left, double right,
                            double Ju, bint clipA, bint clipB) noexcept nogil:
        cdef double dt = self.dt
        cdef double lo_b, hi_b, Jl = 0.0, Jr = 0.0, lo, hi, x, v, e, d, new
        cdef int it
        if clipA and clipB:
            self._set(A, B, left, right)
            return
        lo_b = self.clo[i]
        hi_b = self.chi[i]
        if clipA:
            Jl = self.J(left, i)
            lo = B
            hi = hi_b - u
            x = B
            if hi < INFINITY and self.exit_time(u, i, A, hi, left, hi_b, Ju) <= dt:
                self._set(A, hi, left, hi_b)
                return
        else:
            Jr = self.J(right, i)
            lo = A
            hi = u - lo_b
            x = A
            if hi < INFINITY and self.exit_time(u, i, hi, B, lo_b, right, Ju) <= dt:
                self._set(hi, B, lo_b, right)
                return
        x = 2.0 * x
        if x >= hi:
            x = 0.5 * (lo + hi)
        for it in range(200):
            if clipA:
                v = u + x
                e = 2.0 * ((x * Jl + A * self.J(v, i)) / (A + x) - Ju) - dt
                d = 2.0 * A * (Jl - self.J(v, i) + (A + x) * self.I(v, i)) / ((A + x) * (A + x))
            else:
                v = u - x
                e = 2.0 * ((B * self.J(v, i) + x * Jr) / (x + B) - Ju) - dt
                d = 2.0 * B * (Jr - self.J(v, i) - (x + B) * self.I(v, i)) / ((x + B) * (x + B))
            if fabs(e) <= 1e-12 * dt:
                break
            if e > 0.0:
                hi = x
            else:
                lo = x
            new = x - e / d if d > 0.0 else NAN
            if not (lo < new < hi):
                new = 2.0 * x if hi == INFINITY else 0.5 * (lo + hi)
            if hi < INFINITY and hi - lo <= 1e-15 * hi:
                break
            x = new
        if clipA:
            self._set(A, x, left, u + x)
        else:
            self._set(x, B, u - x, right)


def walk_paths(tab, u_start, piece_start, status_start, uint64_t seed, uint64_t index_start,
               int64_t n_steps, int64_t stride, double dt, double jitter,
               double[:, ::1] out_u, int8_t[::1] out_status, int64_t[::1] out_event):
    """Fill ``out_u[p, j]`` with U at step j * stride for each path p."""
    cdef _Walk w = _Walk(tab, dt, jitter)
    cdef double[::1] us = np.ascontiguousarray(u_start, dtype=np.float64)
    cdef int64_t[::1] ps = np.ascontiguousarray(piece_start, dtype=np.int64)
    cdef int8_t[::1] ss = np.ascontiguousarray(status_start, dtype=np.int8)
    cdef Py_ssize_t n_paths = out_u.shape[0], n_out = out_u.shape[1], p, col
    cdef int64_t n, ev
    cdef uint64_t rng
    cdef double u
    cdef int i, st
    with nogil:
        for p in range(n_paths):
            rng = _stream(seed, index_start + p)
            u = us[p]
            i = <int>ps[p]
            st = ss[p]
            ev = -1 if st == RUNNING else 0
            out_u[p, 0] = u
            col = 1
            for n in range(1, n_steps + 1):
                if st == RUNNING:
                    i = w.step(&u, i, &rng)
                    if u == w.clo[i] and w.lo_r[i]:
                        st = w.lo_r[i]
                        ev = n
                    elif u == w.chi[i] and w.hi_r[i]:
                        st = w.hi_r[i]
                        ev = n
                if n % stride == 0 and col < n_out:
                    out_u[p, col] = u
                    col += 1
            out_status[p] = st
            out_event[p] = ev


# -- time change -----------------------------------------------------------------

cdef inline double _phi_cdf(double x) noexcept nogil:
    return 0.5 * erfc(-x / sqrt(2.0))


cdef class _Clock:
    cdef double[::1] yl, yr, C, q, y0
    cdef int8_t[::1] jump
    cdef int n

    def __init__(self, tab):
        self.yl = np.ascontiguousarray(tab.yl, dtype=np.float64)
        self.yr = np.ascontiguousarray(tab.yr, dtype=np.float64)
        self.C = np.ascontiguousarray(tab.C, dtype=np.float64)
        self.q = np.ascontiguousarray(tab.q, dtype=np.float64)
        self.y0 = np.ascontiguousarray(tab.y0, dtype=np.float64)
        self.n = len(tab.C)
        jump = np.zeros(max(self.n - 1, 1), dtype=np.int8)
        for j in range(self.n - 1):
            jump[j] = self.k_piece(self.yr[j], j) != self.k_piece(self.yr[j], j + 1)
        self.jump = jump

    cdef double k_piece(self, double y, int j) noexcept nogil:
        cdef double d = fabs(y - self.y0[j])
        if d == 0.0:
            if self.q[j] > 0.0:
                return 0.0
            return self.C[j] if self.q[j] == 0.0 else INFINITY
        return self.C[j] * pow(d, self.q[j])

    cdef int piece(self, double y) noexcept nogil:
        cdef int j = 0
        while j < self.n - 1 and y >= self.yr[j]:
            j += 1
        return j

    cdef inline double k(self, double y) noexcept nogil:
        return self.k_piece(y, self.piece(y))

    cdef double increment(self, double w0, double w1, double h, double dt) noexcept nogil:
        cdef double lo = w0 if w0 <= w1 else w1
        cdef double hi = w1 if w0 <= w1 else w0
        cdef bint crossing = False
        cdef int j, m
        cdef double e, a, c, frac, mid, sd, va, vc, kbar, total, near
        for j in range(self.n - 1):
            e = self.yr[j]
            if lo < e < hi and self.jump[j]:
                crossing = True
                break
        if not crossing:
            return 0.5 * (self.k(w0) + self.k(w1)) * dt
        total = 0.0
        for j in range(self.n):
            a = self.yl[j]
            c = self.yr[j]
            frac = 0.0
            for m in range(8):
                mid = w0 + BX[m] * (w1 - w0)
                sd = h * sqrt(BX[m] * (1.0 - BX[m]))
                frac += BW[m] * (_phi_cdf((c - mid) / sd) - _phi_cdf((a - mid) / sd))
            if frac <= 0.0:
                continue
            va = a if a > lo else lo
            vc = c if c < hi else hi
            if va > vc:
                near = a if a > hi else c
                kbar = self.k_piece(near, j)
            else:
                kbar = 0.5 * (self.k_piece(va, j) + self.k_piece(vc, j))
            total += frac * kbar
        return total * dt


def timechange_paths(tab, y_start, uint64_t seed, uint64_t index_start, double h, double out_dt,
                     int64_t max_steps, double[:, ::1] out_y, int8_t[::1] out_status):
    cdef _Clock clock = _Clock(tab)
    cdef double dt = h * h
    cdef double[::1] ys = np.ascontiguousarray(y_start, dtype=np.float64)
    cdef Py_ssize_t n_paths = out_y.shape[0], n_out = out_y.shape[1], p, j
    cdef double c = tab.atom, p_right = tab.p
    cdef bint has_atom = tab.has_atom
    cdef uint64_t rng
    cdef double w, A, nz, a, r, uh, us, side, w1, dA, A1, frac
    cdef int64_t steps
    cdef int st
    with nogil:
        for p in range(n_paths):
            rng = _stream(seed, index_start + p)
            w = ys[p]
            A = 0.0
            out_y[p, 0] = w
            j = 1
            steps = 0
            st = RUNNING
            while j < n_out:
                if steps >= max_steps:
                    st = TRUNCATED
                    while j < n_out:
                        out_y[p, j] = w
                        j += 1
                    break
                steps += 1
                nz = _normal(&rng)
                if has_atom:
                    a = w - c
                    r = fabs(a + h * nz)
                    uh = _uniform(&rng)
                    us = _uniform(&rng)
                    if a == 0.0 or uh * (1.0 + exp(2.0 * fabs(a) * r / dt)) < 2.0:
                        side = 1.0 if us < p_right else -1.0
                    else:
                        side = 1.0 if a > 0.0 else -1.0
                    w1 = c + side * r
                else:
                    w1 = w + h * nz
                dA = clock.increment(w, w1, h, dt)
                A1 = A + dA
                while j < n_out and A1 >= j * out_dt:
                    frac = (j * out_dt - A) / dA if dA > 0.0 else 1.0
                    out_y[p, j] = w + frac * (w1 - w)
                    j += 1
                w = w1
                A = A1
            out_status[p] = st
