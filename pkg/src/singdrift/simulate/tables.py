"""Piece tables consumed by the path kernels.

The walk runs in natural scale U = s(Y), where s' = g of the image skewness
measure: piecewise constant, multiplied by 1 - 2 alpha across each skew
point.  On every U-piece the speed density is k(u) = C |u - u0| ** q
(or the piece is absorbing when b vanishes there), and J with J'' = k is
kept in closed form so that mean exit times are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..coeffspec import INF
from ..measures import GNu, LocalSignedMeasure, pushforward
from ..transform import SpaceTransform, sigma_pieces

# reachability codes of a component end
FREE, ABSORB, EXPLODE = 0, 1, 2


def skew_prob_from_atom(alpha: float) -> float:
    """Probability of a right excursion at a skew point of mass alpha."""
    if not alpha < 0.5:
        raise ValueError(f"atom mass {alpha} must be < 1/2")
    return 1.0 / (2.0 * (1.0 - alpha))


def Q(t: float, q: float) -> float:
    """Second primitive of t**q vanishing at 0 when finite."""
    if q == -1.0:
        return t * math.log(t) - t if t > 0 else 0.0
    if q == -2.0:
        return -math.log(t) if t > 0 else INF
    if t == 0.0:
        return 0.0 if q > -2.0 else INF
    return t ** (q + 2.0) / ((q + 1.0) * (q + 2.0))


def dQ(t: float, q: float) -> float:
    if q == -1.0:
        return math.log(t) if t > 0 else -INF
    if t == 0.0:
        return 0.0 if q > -1.0 else -INF
    return t ** (q + 1.0) / (q + 1.0)


@dataclass
class WalkTable:
    pl: np.ndarray
    pr: np.ndarray
    absorbing: np.ndarray  # int8
    C: np.ndarray
    q: np.ndarray
    u0: np.ndarray
    ja: np.ndarray
    jb: np.ndarray
    clo: np.ndarray
    chi: np.ndarray
    lo_reach: np.ndarray  # int8
    hi_reach: np.ndarray  # int8
    # Y <-> U affine charts, one per U-piece
    yl: np.ndarray
    ya: np.ndarray
    ua: np.ndarray
    kappa: np.ndarray
    atoms_u: np.ndarray

    @property
    def n(self) -> int:
        return len(self.pl)

    def J(self, u: float, i: int) -> float:
        t = abs(u - self.u0[i])
        return self.C[i] * Q(t, self.q[i]) + self.ja[i] + self.jb[i] * u

    def I(self, u: float, i: int) -> float:  # noqa: E743
        d = u - self.u0[i]
        return self.C[i] * math.copysign(1.0, d) * dQ(abs(d), self.q[i]) + self.jb[i]

    def k(self, u: float, i: int) -> float:
        return self.C[i] * abs(u - self.u0[i]) ** self.q[i]

    def piece_of(self, u) -> np.ndarray:
        return np.clip(np.searchsorted(self.pr, u, side="left"), 0, self.n - 1)

    def y_to_u(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        i = np.clip(np.searchsorted(self.yl, y, side="right") - 1, 0, self.n - 1)
        out = self.ua[i] + self.kappa[i] * (y - self.ya[i])
        out[np.isinf(y)] = y[np.isinf(y)]
        return out

    def u_to_y(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(self.pl, u, side="right") - 1, 0, self.n - 1)
        out = self.ya[i] + (u - self.ua[i]) / self.kappa[i]
        return np.where(np.isinf(u), u, out)


def _image_atoms(t: SpaceTransform, nu: LocalSignedMeasure) -> dict:
    return pushforward(nu, t.G).atoms if nu.atoms else {}


def _split_pieces(t, b, atoms_y):
    """Sigma pieces in Y, split at skew points."""
    out = []
    for p in sigma_pieces(t, b):
        cuts = sorted(c for c in atoms_y if p.yl < c < p.yr)
        edges = [p.yl, *cuts, p.yr]
        for l, r in zip(edges[:-1], edges[1:]):
            out.append((l, r, p))
    return out


def build_walk_table(t: SpaceTransform, b, nu: LocalSignedMeasure, dt: float) -> WalkTable:
    atoms_y = _image_atoms(t, nu)
    pieces = _split_pieces(t, b, atoms_y)
    g = GNu(LocalSignedMeasure(atoms_y))
    n = len(pieces)
    yl = np.array([p[0] for p in pieces])
    yr = np.array([p[1] for p in pieces])
    kappa = np.empty(n)
    for i in range(n):
        probe = (0.5 * (yl[i] + yr[i]) if np.isfinite(yl[i]) and np.isfinite(yr[i])
                 else (yr[i] - 1.0 if np.isfinite(yr[i]) else (yl[i] + 1.0 if np.isfinite(yl[i]) else 0.0)))
        kappa[i] = g(probe)
    # U(y) = int_0^y kappa; chart anchored at a finite edge (or 0)
    finite = sorted({0.0, *[e for e in np.concatenate([yl, yr]) if np.isfinite(e)]})
    u_at = {0.0: 0.0}
    i0 = finite.index(0.0)
    slope = lambda y: kappa[int(np.searchsorted(yr, y, side="left"))]  # noqa: E731
    for j in range(i0 + 1, len(finite)):
        a, c = finite[j - 1], finite[j]
        u_at[c] = u_at[a] + slope(0.5 * (a + c)) * (c - a)
    for j in range(i0 - 1, -1, -1):
        a, c = finite[j], finite[j + 1]
        u_at[a] = u_at[c] - slope(0.5 * (a + c)) * (c - a)
    ya = np.array([yl[i] if np.isfinite(yl[i]) else (yr[i] if np.isfinite(yr[i]) else 0.0) for i in range(n)])
    ua = np.array([u_at[y] for y in ya])
    conv = lambda y, i: y if np.isinf(y) else u_at.get(y, ua[i] + kappa[i] * (y - ya[i]))  # noqa: E731
    pl = np.array([conv(yl[i], i) for i in range(n)])
    pr = np.array([conv(yr[i], i) for i in range(n)])

    absorbing = np.zeros(n, dtype=np.int8)
    C, q, u0 = np.zeros(n), np.zeros(n), np.zeros(n)
    for i, (l, r, sp) in enumerate(pieces):
        if sp.coeff == 0.0:
            absorbing[i] = 1
            continue
        q[i] = -2.0 * sp.exponent
        C[i] = sp.coeff ** -2 * kappa[i] ** (-q[i] - 2.0)
        if q[i] == 0.0:
            u0[i] = pl[i] if np.isfinite(pl[i]) else (pr[i] if np.isfinite(pr[i]) else 0.0)
        elif sp.y0 == l:
            u0[i] = pl[i]
        elif sp.y0 == r:
            u0[i] = pr[i]
        else:
            u0[i] = ua[i] + kappa[i] * (sp.y0 - ya[i])

    # barriers: interior edges that are singular on some side, and finite domain ends
    def singular_end(i, e):
        return bool(absorbing[i]) or (q[i] <= -1.0 and u0[i] == e)

    barrier_after = [singular_end(i, pr[i]) or singular_end(i + 1, pr[i]) for i in range(n - 1)]
    clo, chi = np.empty(n), np.empty(n)
    lo_r = np.zeros(n, dtype=np.int8)
    hi_r = np.zeros(n, dtype=np.int8)
    ja, jb = np.zeros(n), np.zeros(n)
    start = 0
    while start < n:
        end = start
        while end < n - 1 and not barrier_after[end] and not absorbing[end + 1] and not absorbing[end]:
            end += 1
        lo, hi = pl[start], pr[end]
        for i in range(start, end + 1):
            clo[i], chi[i] = lo, hi
        if not absorbing[start]:
            lo_r[start:end + 1] = _reach(lo, start, q, u0, start == 0)
            hi_r[start:end + 1] = _reach(hi, end, q, u0, end == n - 1)
            _chain(start, end, pl, pr, C, q, u0, ja, jb)
        start = end + 1
    tab = WalkTable(pl, pr, absorbing, C, q, u0, ja, jb, clo, chi, lo_r, hi_r,
                    yl, ya, ua, kappa, np.array(sorted(u_at[c] for c in atoms_y)))
    return tab


def _reach(e, i, q, u0, domain_end) -> int:
    if np.isinf(e):
        return FREE
    finite_J = u0[i] != e or q[i] > -2.0
    if not finite_J:
        return FREE
    return EXPLODE if domain_end else ABSORB


def _chain(start, end, pl, pr, C, q, u0, ja, jb):
    """Make J continuously differentiable across the pieces of one component."""
    for i in range(start + 1, end + 1):
        e = pl[i]
        Jp = C[i - 1] * Q(abs(e - u0[i - 1]), q[i - 1]) + ja[i - 1] + jb[i - 1] * e
        d = e - u0[i - 1]
        Ip = C[i - 1] * math.copysign(1.0, d) * dQ(abs(d), q[i - 1]) + jb[i - 1]
        d = e - u0[i]
        jb[i] = Ip - C[i] * math.copysign(1.0, d) * dQ(abs(d), q[i])
        ja[i] = Jp - C[i] * Q(abs(d), q[i]) - jb[i] * e


@dataclass
class TimeChangeTable:
    """Y-space speed density pieces k = C |y - y0| ** q and one optional skew point."""
    yl: np.ndarray
    yr: np.ndarray
    C: np.ndarray
    q: np.ndarray
    y0: np.ndarray
    atom: float
    p: float
    has_atom: bool


def build_timechange_table(t: SpaceTransform, b, nu: LocalSignedMeasure) -> TimeChangeTable:
    from ..wellposed import sigma_sets

    if math.isfinite(t.G_minus_inf) or math.isfinite(t.G_plus_inf):
        raise NotImplementedError("time-change engine needs G(R) = R (no explosion)")
    _, E = sigma_sets(t, b)
    if not E.is_empty():
        raise NotImplementedError(f"time-change engine needs an empty singular set, got {E}")
    atoms_y = _image_atoms(t, nu)
    if len(atoms_y) > 1:
        raise NotImplementedError("time-change engine supports at most one skew point")
    sp = sigma_pieces(t, b)
    if any(p.coeff == 0.0 for p in sp):
        raise NotImplementedError("time-change engine needs b non-vanishing on intervals")
    yl = np.array([p.yl for p in sp])
    yr = np.array([p.yr for p in sp])
    C = np.array([p.coeff ** -2 for p in sp])
    q = np.array([-2.0 * p.exponent for p in sp])
    y0 = np.array([p.y0 for p in sp])
    if atoms_y:
        (c, m), = atoms_y.items()
        return TimeChangeTable(yl, yr, C, q, y0, c, skew_prob_from_atom(m), True)
    return TimeChangeTable(yl, yr, C, q, y0, 0.0, 0.5, False)
