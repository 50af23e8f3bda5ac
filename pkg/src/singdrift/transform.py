"""Space transformation G = int_0^x 1/f, its inverse H and sigma = (b/f) o H."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .coeffspec import INF, CoefficientError, PiecewisePower, check_drift_function, zero_sets


class DomainError(ValueError):
    pass


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


class SpaceTransform:
    """G, H and the component decomposition of R minus F for a drift function f."""

    def __init__(self, f: PiecewisePower):
        rep = check_drift_function(f)
        if not rep:
            raise CoefficientError("not a drift function: " + "; ".join(rep.problems))
        self.f = f
        self.recip = f.reciprocal()
        self.F_plus, self.F_minus = zero_sets(f)
        self.F = sorted(set(self.F_plus) | set(self.F_minus))
        edges = [-INF, *self.F, INF]
        self.components = list(zip(edges[:-1], edges[1:]))
        self.G_minus_inf = float(self.recip.cumulative(-INF, 0.0))
        self.G_plus_inf = float(self.recip.cumulative(INF, 0.0))
        self._Gb = np.asarray(self.recip.cumulative(f.breakpoints, 0.0), dtype=float) \
            if len(f.breakpoints) else np.empty(0)
        self._offs = self.recip._offsets(0.0)

    # -- maps ------------------------------------------------------------------
    def G(self, x):
        return self.recip.cumulative(x, 0.0)

    @property
    def image_breakpoints(self) -> np.ndarray:
        return self._Gb

    @property
    def image_skeleton(self) -> dict:
        return {"F_plus": [float(self.G(a)) for a in self.F_plus],
                "F_minus": [float(self.G(a)) for a in self.F_minus]}

    def in_image(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (y > self.G_minus_inf) & (y < self.G_plus_inf)

    def H(self, y):
        """Inverse of G; +-inf at or beyond the finite ends of G(R)."""
        ya = np.asarray(y, dtype=float)
        scalar = ya.ndim == 0
        ya = np.atleast_1d(ya)
        out = np.empty_like(ya)
        out[ya >= self.G_plus_inf] = INF
        out[ya <= self.G_minus_inf] = -INF
        inside = self.in_image(ya)
        idx = np.searchsorted(self._Gb, ya, side="right")
        for i, p in enumerate(self.recip.pieces):
            m = inside & (idx == i)
            if not m.any():
                continue
            yy = ya[m]
            x = np.asarray(p.inverse_primitive(yy - self._offs[i]), dtype=float)
            x = np.clip(x, p.l, p.r)
            bad = ~np.isfinite(x) | (np.abs(self.G(x) - yy) > 1e-12 * np.maximum(1.0, np.abs(yy)))
            for j in np.flatnonzero(bad):
                x[j] = self._bisect(yy[j], p.l, p.r)
            out[m] = x
        # breakpoints map back exactly
        for c, gc in zip(self.f.breakpoints, self._Gb):
            out[ya == gc] = c
        return float(out[0]) if scalar else out

    def _bisect(self, y: float, lo: float, hi: float) -> float:
        if math.isinf(lo):
            lo = min(hi, 0.0) - 1.0
            while self.G(lo) > y:
                lo = 2.0 * lo - 1.0
        if math.isinf(hi):
            hi = max(lo, 0.0) + 1.0
            while self.G(hi) < y:
                hi = 2.0 * hi + 1.0
        for _ in range(200):
            if hi - lo <= 1e-12 * max(1.0, abs(lo)):
                break
            mid = 0.5 * (lo + hi)
            if self.G(mid) < y:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # -- transformed coefficient -------------------------------------------------
    def _check_domain(self, y):
        if np.any((y < self.G_minus_inf) | (y > self.G_plus_inf)) or np.any(np.isnan(y)):
            raise DomainError(
                f"y outside the closure of G(R) = [{self.G_minus_inf}, {self.G_plus_inf}]")

    def sigma(self, b: PiecewisePower, y, side: str = "right"):
        """(b/f)(H(y)), +inf where f vanishes and b does not (0 * inf = 0)."""
        ya = np.asarray(y, dtype=float)
        scalar = ya.ndim == 0
        ya = np.atleast_1d(ya)
        self._check_domain(ya)
        out = self.b_over_f(b, self.H(ya), side)
        return float(out[0]) if scalar else out

    def b_over_f(self, b: PiecewisePower, x, side: str = "right") -> np.ndarray:
        """(b/f)(x) with 1/0 = +inf and 0 * inf = 0; zero at +-inf."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        fin = np.isfinite(x)
        bx = b(x[fin], side=side)
        fx = self.f(x[fin], side=side)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(fx == 0.0, np.where(bx == 0.0, 0.0, INF), bx / fx)
        out[fin] = s
        return out

    def sigma_tilde(self, b: PiecewisePower, y, side: str = "right"):
        """sigma with its +inf values on G(F_plus & {b != 0}) replaced by 1."""
        s = np.asarray(self.sigma(b, y, side), dtype=float)
        if side == "right":
            s = np.where(np.isinf(s), 1.0, s)
        return float(s) if s.ndim == 0 else s

    # -- checks -------------------------------------------------------------------
    def invariant_residuals(self, lo: float = -4.0, hi: float = 4.0, n: int = 801) -> dict:
        """sup |H(G(x)) - x| and sup |H(y) - int_0^y f(H)| on an x-grid."""
        xs = np.linspace(lo, hi, n)
        roundtrip = float(np.max(np.abs(self.H(self.G(xs)) - xs)))
        ys = np.asarray(self.G(xs), dtype=float)
        fh = lambda u: self.f(self.H(u))  # noqa: E731
        cum = _cumulative_from_zero(fh, ys, self._Gb)
        eq8 = float(np.max(np.abs(self.H(ys) - cum)))
        return {"roundtrip": roundtrip, "eq8": eq8}

    def dump_rows(self, b: PiecewisePower, xs) -> list[tuple]:
        xs = np.asarray(xs, dtype=float)
        g = np.asarray(self.G(xs), dtype=float)
        return list(zip(xs.tolist(), g.tolist(), np.atleast_1d(self.H(g)).tolist(),
                        np.atleast_1d(self.sigma_tilde(b, g)).tolist()))


def _cumulative_from_zero(fn, ys: np.ndarray, kinks: np.ndarray) -> np.ndarray:
    """int_0^y fn for every y in the sorted array ys (fn smooth between kinks)."""
    nodes = np.union1d(ys, np.concatenate([[0.0], kinks[(kinks > ys[0]) & (kinks < ys[-1])]]))
    a, c = nodes[:-1], nodes[1:]
    mid, half = 0.5 * (a + c), 0.5 * (c - a)
    pts = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    cells = half * (np.asarray(fn(pts)).reshape(-1, len(_GL_X)) @ _GL_W)
    # cells adjacent to a kink can carry an integrable power singularity
    near = np.isin(a, kinks) | np.isin(c, kinks)
    for j in np.flatnonzero(near):
        cells[j], _ = integrate.quad(lambda u: float(fn(u)), a[j], c[j],
                                     epsabs=1e-13, epsrel=1e-12, limit=200)
    i0 = int(np.searchsorted(nodes, 0.0))
    cum = np.zeros(len(nodes))
    cum[i0 + 1:] = np.cumsum(cells[i0:])
    cum[:i0] = -np.cumsum(cells[:i0][::-1])[::-1]
    return cum[np.searchsorted(nodes, ys)]


@dataclass(frozen=True)
class SigmaPiece:
    """sigma(y) = coeff * |y - y0| ** exponent on the open image interval (yl, yr).

    (xl, xr) is the exact preimage interval.
    """
    yl: float
    yr: float
    coeff: float
    exponent: float
    y0: float
    xl: float = -INF
    xr: float = INF


def sigma_pieces(t: SpaceTransform, b: PiecewisePower) -> list[SigmaPiece]:
    """Closed form of sigma on each image piece, where it is a single power.

    Exact when, on every refined interval, f is a constant or a power and b
    a constant or a power sharing f's anchor, or f is exponential and b a
    constant or exponential.  Other combinations raise NotImplementedError.
    """
    edges = sorted(set(t.f.breakpoints.tolist()) | set(b.breakpoints.tolist()))
    edges = [-INF, *edges, INF]
    out = []
    for l, r in zip(edges[:-1], edges[1:]):
        probe = 0.5 * (l + r) if math.isfinite(l) and math.isfinite(r) else (
            r - 1.0 if math.isfinite(r) else (l + 1.0 if math.isfinite(l) else 0.0))
        fp, bp = t.f.piece_at(probe), b.piece_at(probe)
        yl, yr = float(t.G(l)), float(t.G(r))
        if bp.coeff == 0.0:
            out.append(SigmaPiece(yl, yr, 0.0, 0.0, 0.0, l, r))
            continue
        if fp.rate != 0.0:
            if bp.exponent != 0.0:
                raise NotImplementedError("power b over exponential f is not supported")
            # f(H(y)) = 1 / (rate * (y* - y)), so b/f is a power of |y - y*|
            if fp.rate > 0 and r == INF:
                ystar = t.G_plus_inf
            elif fp.rate < 0 and l == -INF:
                ystar = t.G_minus_inf
            else:
                ystar = float(t.G(fp.anchor)) + 1.0 / (fp.coeff * fp.rate)
            ba = bp.anchor if bp.rate != 0.0 else fp.anchor
            coeff = (bp.coeff / fp.coeff * math.exp(bp.rate * (fp.anchor - ba))
                     * abs(fp.coeff * fp.rate) ** ((fp.rate - bp.rate) / fp.rate))
            out.append(SigmaPiece(yl, yr, coeff, 1.0 - bp.rate / fp.rate, ystar, l, r))
            continue
        if bp.rate != 0.0:
            raise NotImplementedError("exponential b over a power or constant f is not supported")
        if bp.exponent != 0.0 and fp.exponent != 0.0 and bp.anchor != fp.anchor:
            raise NotImplementedError("b and f anchored at different points on one piece")
        if fp.exponent == 0.0 and bp.exponent == 0.0:
            out.append(SigmaPiece(yl, yr, bp.coeff / fp.coeff, 0.0, 0.0, l, r))
            continue
        a = fp.anchor if fp.exponent != 0.0 else bp.anchor
        pf, pb = fp.exponent, bp.exponent
        # |x - a| = kappa * |y - G(a)| ** (1 / (1 - pf)) with kappa from the power primitive
        kappa = ((1.0 - pf) * fp.coeff) ** (1.0 / (1.0 - pf))
        q = (pb - pf) / (1.0 - pf)
        coeff = bp.coeff / fp.coeff * kappa ** (pb - pf)
        out.append(SigmaPiece(yl, yr, coeff, q, float(t.G(a)), l, r))
    return out


def build_transform(f: PiecewisePower) -> SpaceTransform:
    return SpaceTransform(f)
