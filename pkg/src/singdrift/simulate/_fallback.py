"""Pure-Python path kernels.

Step-for-step the same algorithm as the compiled ``_kernels`` module; used
when the extension is not built and as its reference in tests.
"""

from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM = 0xD2B74407B1CE6E93
INV53 = 1.0 / 9007199254740992.0

RUNNING, ABSORBED, EXPLODED, TRUNCATED = 0, 1, 2, 3

# 8-point Gauss-Legendre on (0, 1) for Brownian-bridge occupation fractions
_x, _w = np.polynomial.legendre.leggauss(8)
BRIDGE_X = tuple(float(v) for v in 0.5 * (_x + 1.0))
BRIDGE_W = tuple(float(v) for v in 0.5 * _w)
_BX, _BW = BRIDGE_X, BRIDGE_W


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def stream_state(seed: int, index: int) -> int:
    """Initial splitmix64 state of the stream owned by path ``index``."""
    return _mix((_mix((seed + GOLDEN) & MASK) ^ ((index * STREAM) & MASK)) & MASK)


class SplitMix:
    __slots__ = ("s",)

    def __init__(self, state: int):
        self.s = state

    def uniform(self) -> float:
        self.s = (self.s + GOLDEN) & MASK
        return ((_mix(self.s) >> 11) + 0.5) * INV53

    def normal(self) -> float:
        u1, u2 = self.uniform(), self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


# -- walk -------------------------------------------------------------------------

def _Q(t, q):
    if q == -1.0:
        return t * math.log(t) - t if t > 0.0 else 0.0
    if q == -2.0:
        return -math.log(t) if t > 0.0 else math.inf
    if t == 0.0:
        return 0.0 if q > -2.0 else math.inf
    return t ** (q + 2.0) / ((q + 1.0) * (q + 2.0))


def _dQ(t, q):
    if q == -1.0:
        return math.log(t) if t > 0.0 else -math.inf
    if t == 0.0:
        return 0.0 if q > -1.0 else -math.inf
    return t ** (q + 1.0) / (q + 1.0)


class _Walk:
    def __init__(self, tab, dt, jitter):
        self.pl, self.pr = list(tab.pl), list(tab.pr)
        self.C, self.q, self.u0 = list(tab.C), list(tab.q), list(tab.u0)
        self.ja, self.jb = list(tab.ja), list(tab.jb)
        self.clo, self.chi = list(tab.clo), list(tab.chi)
        self.lo_r, self.hi_r = [int(v) for v in tab.lo_reach], [int(v) for v in tab.hi_reach]
        self.lam = [math.sqrt(dt / c) if (qq == 0.0 and c > 0.0) else 0.0
                    for c, qq in zip(self.C, self.q)]
        self.dt = dt
        self.jitter = jitter

    def locate(self, v, i):
        while v < self.pl[i]:
            i -= 1
        while v > self.pr[i]:
            i += 1
        return i

    def J(self, v, i):
        j = self.locate(v, i)
        return self.C[j] * _Q(abs(v - self.u0[j]), self.q[j]) + self.ja[j] + self.jb[j] * v

    def I(self, v, i):  # noqa: E743
        j = self.locate(v, i)
        d = v - self.u0[j]
        return self.C[j] * math.copysign(1.0, d) * _dQ(abs(d), self.q[j]) + self.jb[j]

    def k(self, v, i):
        j = self.locate(v, i)
        d = abs(v - self.u0[j])
        return self.C[j] * d ** self.q[j] if d > 0.0 or self.q[j] >= 0.0 else math.inf

    def exit_time(self, u, i, A, B, left, right, Ju):
        return 2.0 * ((B * self.J(left, i) + A * self.J(right, i)) / (A + B) - Ju)

    def step(self, u, i, rng):
        """One walk step; returns the new position and its piece."""
        z = 2.0 * rng.uniform() - 1.0
        a = 1.0 + self.jitter * z
        b = 1.0 / a
        r = rng.uniform()
        lam = self.lam[i]
        if lam > 0.0:
            A, B = lam * a, lam * b
            if u - A >= self.pl[i] and u + B <= self.pr[i]:
                if r * (A + B) < A:
                    return u + B, i
                return u - A, i
        A, B, left, right = self.solve(u, i, a, b)
        if r * (A + B) < A:
            v = right
        else:
            v = left
        return v, self.locate(v, i)

    def solve(self, u, i, a, b):
        dt = self.dt
        lo_b, hi_b = self.clo[i], self.chi[i]
        dA, dB = u - lo_b, hi_b - u
        Ju = self.J(u, i)
        capA, capB = dA / a, dB / b
        lam_max = min(capA, capB)
        if lam_max < math.inf:
            A, B = lam_max * a, lam_max * b
            left = lo_b if capA <= capB else u - A
            right = hi_b if capB <= capA else u + B
            if capA <= capB:
                A = dA
            if capB <= capA:
                B = dB
            if self.exit_time(u, i, A, B, left, right, Ju) <= dt:
                return self.solve_clipped(u, i, A, B, left, right, Ju, capA <= capB, capB <= capA)
        # safeguarded Newton on lambda in (0, lam_max)
        kk = self.k(u, i)
        if 0.0 < kk < math.inf:
            lam = math.sqrt(dt / kk)
        else:
            j = self.locate(u, i)
            qq = self.q[j]
            lam = (dt / self.C[j]) ** (1.0 / (qq + 2.0)) if qq > -2.0 else math.sqrt(dt)
        lo, hi = 0.0, lam_max
        if not lam < hi:
            lam = 0.5 * hi
        for _ in range(200):
            A, B = lam * a, lam * b
            e = self.exit_time(u, i, A, B, u - A, u + B, Ju) - dt
            if abs(e) <= 1e-12 * dt:
                break
            if e > 0.0:
                hi = lam
            else:
                lo = lam
            d = 2.0 * (self.I(u + B, i) - self.I(u - A, i)) / (a + b)
            new = lam - e / d if d > 0.0 else math.nan
            if not (lo < new < hi):
                new = 2.0 * lam if hi == math.inf else 0.5 * (lo + hi)
            if hi < math.inf and hi - lo <= 1e-15 * hi:
                break
            lam = new
        return lam * a, lam * b, u - lam * a, u + lam * b

    def solve_clipped(self, u, i, A, B, left, right, Ju, clipA, clipB):
        """One side sits on its bound; stretch the other until the mean time is dt."""
        dt = self.dt
        if clipA and clipB:
            return A, B, left, right
        lo_b, hi_b = self.clo[i], self.chi[i]
        if clipA:
            Jl = self.J(left, i)
            lo, hi, x = B, hi_b - u, B
            if hi < math.inf and self.exit_time(u, i, A, hi, left, hi_b, Ju) <= dt:
                return A, hi, left, hi_b
        else:
            Jr = self.J(right, i)
            lo, hi, x = A, u - lo_b, A
            if hi < math.inf and self.exit_time(u, i, hi, B, lo_b, right, Ju) <= dt:
                return hi, B, lo_b, right
        x = 2.0 * x
        if x >= hi:
            x = 0.5 * (lo + hi)
        for _ in range(200):
            if clipA:
                v = u + x
                e = 2.0 * ((x * Jl + A * self.J(v, i)) / (A + x) - Ju) - dt
                d = 2.0 * A * (Jl - self.J(v, i) + (A + x) * self.I(v, i)) / (A + x) ** 2
            else:
                v = u - x
                e = 2.0 * ((B * self.J(v, i) + x * Jr) / (x + B) - Ju) - dt
                d = 2.0 * B * (Jr - self.J(v, i) - (x + B) * self.I(v, i)) / (x + B) ** 2
            if abs(e) <= 1e-12 * dt:
                break
            if e > 0.0:
                hi = x
            else:
                lo = x
            new = x - e / d if d > 0.0 else math.nan
            if not (lo < new < hi):
                new = 2.0 * x if hi == math.inf else 0.5 * (lo + hi)
            if hi < math.inf and hi - lo <= 1e-15 * hi:
                break
            x = new
        if clipA:
            return A, x, left, u + x
        return x, B, u - x, right


def walk_paths(tab, u_start, piece_start, status_start, seed, index_start, n_steps, stride,
               dt, jitter, out_u, out_status, out_event):
    """Fill ``out_u[p, j]`` with U at step j * stride for each path p."""
    w = _Walk(tab, dt, jitter)
    n_paths, n_out = out_u.shape
    for p in range(n_paths):
        rng = SplitMix(stream_state(seed, index_start + p))
        u, i, st = float(u_start[p]), int(piece_start[p]), int(status_start[p])
        ev = -1 if st == RUNNING else 0
        out_u[p, 0] = u
        col = 1
        for n in range(1, n_steps + 1):
            if st == RUNNING:
                u, i = w.step(u, i, rng)
                if u == w.clo[i] and w.lo_r[i]:
                    st, ev = w.lo_r[i], n
                elif u == w.chi[i] and w.hi_r[i]:
                    st, ev = w.hi_r[i], n
            if n % stride == 0 and col < n_out:
                out_u[p, col] = u
                col += 1
        out_status[p] = st
        out_event[p] = ev


# -- time change -----------------------------------------------------------------

def _phi_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


class _Clock:
    def __init__(self, tab):
        self.yl, self.yr = list(tab.yl), list(tab.yr)
        self.C, self.q, self.y0 = list(tab.C), list(tab.q), list(tab.y0)
        self.edges = self.yr[:-1]
        n = len(self.C)
        # edges where k jumps need the bridge occupation split
        self.jump = [self.k_piece(e, j) != self.k_piece(e, j + 1) for j, e in enumerate(self.edges)]
        self.n = n

    def k_piece(self, y, j):
        d = abs(y - self.y0[j])
        if d == 0.0:
            return 0.0 if self.q[j] > 0.0 else (self.C[j] if self.q[j] == 0.0 else math.inf)
        return self.C[j] * d ** self.q[j]

    def piece(self, y):
        j = 0
        while j < self.n - 1 and y >= self.yr[j]:
            j += 1
        return j

    def k(self, y):
        return self.k_piece(y, self.piece(y))

    def increment(self, w0, w1, h, dt):
        lo, hi = (w0, w1) if w0 <= w1 else (w1, w0)
        crossing = False
        for j, e in enumerate(self.edges):
            if lo < e < hi and self.jump[j]:
                crossing = True
                break
        if not crossing:
            return 0.5 * (self.k(w0) + self.k(w1)) * dt
        # expected bridge occupation of each piece, k averaged over the visited part
        total = 0.0
        for j in range(self.n):
            a, c = self.yl[j], self.yr[j]
            frac = 0.0
            for s, wt in zip(_BX, _BW):
                m = w0 + s * (w1 - w0)
                sd = h * math.sqrt(s * (1.0 - s))
                frac += wt * (_phi_cdf((c - m) / sd) - _phi_cdf((a - m) / sd))
            if frac <= 0.0:
                continue
            va, vc = max(a, lo), min(c, hi)
            if va > vc:
                near = a if a > hi else c
                kbar = self.k_piece(near, j)
            else:
                kbar = 0.5 * (self.k_piece(va, j) + self.k_piece(vc, j))
            total += frac * kbar
        return total * dt


def timechange_paths(tab, y_start, seed, index_start, h, out_dt, max_steps, out_y, out_status):
    clock = _Clock(tab)
    dt = h * h
    n_paths, n_out = out_y.shape
    c, p_right, has_atom = tab.atom, tab.p, tab.has_atom
    for p in range(n_paths):
        rng = SplitMix(stream_state(seed, index_start + p))
        w = float(y_start[p])
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
            nz = rng.normal()
            if has_atom:
                a = w - c
                r = abs(a + h * nz)
                uh = rng.uniform()
                us = rng.uniform()
                x = 2.0 * abs(a) * r / dt
                # beyond 700 the threshold is below any uniform; C's exp gives inf there
                if a == 0.0 or (x < 700.0 and uh * (1.0 + math.exp(x)) < 2.0):
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
            w, A = w1, A1
        out_status[p] = st
