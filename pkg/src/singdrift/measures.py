"""Locally finite signed measures: atoms plus a piecewise-power density."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .coeffspec import (INF, CoefficientError, PiecewisePower, PowerPiece,
                        ValidationReport, _arr, zero_sets)


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class LocalSignedMeasure:
    atoms: dict = field(default_factory=dict)
    density: PiecewisePower | None = None

    def __init__(self, atoms: dict | None = None, density: PiecewisePower | None = None):
        clean = {float(a): float(m) for a, m in (atoms or {}).items() if m != 0.0}
        for a, m in clean.items():
            if not (math.isfinite(a) and math.isfinite(m)):
                raise MeasureError(f"atom ({a}, {m}) must be finite")
        if density is not None and all(p.coeff == 0.0 for p in density.pieces):
            density = None
        object.__setattr__(self, "atoms", dict(sorted(clean.items())))
        object.__setattr__(self, "density", density)

    @classmethod
    def zero(cls) -> "LocalSignedMeasure":
        return cls()

    @classmethod
    def atom(cls, at: float, mass: float) -> "LocalSignedMeasure":
        return cls({at: mass})

    @classmethod
    def constant_density(cls, beta: float) -> "LocalSignedMeasure":
        return cls(density=PiecewisePower.constant(beta))

    @property
    def is_atomic(self) -> bool:
        return self.density is None

    def mass(self, a: float, b: float, closed_left=True, closed_right=True) -> float:
        """nu of the interval between a and b with the requested endpoint rule."""
        total = self.density.integral(a, b) if self.density is not None else 0.0
        for x, m in self.atoms.items():
            if (a < x < b) or (closed_left and x == a) or (closed_right and x == b):
                total += m
        return total

    def to_dict(self) -> dict:
        d = {"atoms": [{"point": a, "mass": m} for a, m in self.atoms.items()]}
        if self.density is not None:
            d["density_pieces"] = self.density.to_dict()["pieces"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LocalSignedMeasure":
        unknown = set(d) - {"atoms", "density_pieces"}
        if unknown:
            raise MeasureError(f"unknown measure field(s): {sorted(unknown)}")
        atoms = {}
        for item in d.get("atoms", []):
            extra = set(item) - {"point", "mass"}
            if extra:
                raise MeasureError(f"unknown atom field(s): {sorted(extra)}")
            atoms[float(item["point"])] = float(item["mass"])
        dens = None
        if d.get("density_pieces"):
            dens = PiecewisePower([PowerPiece.from_dict(p) for p in d["density_pieces"]])
        return cls(atoms, dens)

    def __eq__(self, other):
        return (isinstance(other, LocalSignedMeasure) and self.atoms == other.atoms
                and self.density == other.density)

    def __hash__(self):
        return hash((tuple(self.atoms.items()), self.density))


def validate_atoms(nu: LocalSignedMeasure) -> ValidationReport:
    """Every atom must carry mass strictly below 1/2."""
    problems = []
    for a, m in nu.atoms.items():
        if m == 0.5:
            problems.append(f"atom at {a} has mass 1/2: reflecting barrier (unsupported)")
        elif m > 0.5:
            problems.append(f"atom at {a} has mass {m} > 1/2: no solution in general")
    return ValidationReport(not problems, problems)


class GNu:
    """Cadlag solution of the integral equation attached to nu.

    g(x) = exp(-2 R(x)) * (product of atom factors), R the primitive of the
    density with R(0) = 0; crossing an atom a multiplies g by 1 - 2 nu({a}).
    """

    def __init__(self, nu: LocalSignedMeasure):
        self.nu = nu
        self._pts = np.array(list(nu.atoms), dtype=float)
        factors = np.array([1.0 - 2.0 * m for m in nu.atoms.values()])
        self._logf = np.log(factors) if len(factors) else factors
        # cumulative log factor for atoms in [0, x] (x >= 0) or (x, 0) (x < 0)
        self._cum = np.concatenate([[0.0], np.cumsum(self._logf)])
        self._i0 = int(np.searchsorted(self._pts, 0.0, side="left"))

    def _log_atoms(self, x, side):
        # atoms in [0, x] / (x, 0) for right values, [0, x) / [x, 0) for left limits
        k = np.searchsorted(self._pts, x, side="right" if side == "right" else "left")
        return self._cum[k] - self._cum[self._i0]

    def density_primitive(self, x):
        dens = self.nu.density
        x = np.atleast_1d(_arr(x))
        if dens is None:
            return np.zeros_like(x)
        return dens.cumulative(x, 0.0)

    def __call__(self, x, side: str = "right"):
        xa = _arr(x)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        out = np.exp(self._log_atoms(xa, side) - 2.0 * self.density_primitive(xa))
        return float(out[0]) if scalar else out

    def reciprocal(self):
        return lambda x, side="right": 1.0 / self(x, side)


def solve_g_nu(nu: LocalSignedMeasure) -> GNu:
    rep = validate_atoms(nu)
    if not rep:
        raise MeasureError("; ".join(rep.problems))
    return GNu(nu)


# 10-point Gauss-Legendre rule to 30 digits, so the extended-precision
# quadrature is not biased by float64-rounded weights
_GL_HALF = [
    ("0.14887433898163121088482600113", "0.295524224714752870173892994651"),
    ("0.433395394129247190799265943166", "0.269266719309996355091226921569"),
    ("0.679409568299024406234327365115", "0.219086362515982043995534934228"),
    ("0.865063366688984510732096688423", "0.149451349150580593145776339658"),
    ("0.973906528517171720077964012084", "0.0666713443086881375935688098933"),
]
_GL_X = np.array([-np.longdouble(x) for x, _ in reversed(_GL_HALF)]
                 + [np.longdouble(x) for x, _ in _GL_HALF])
_GL_W = np.array([np.longdouble(w) for _, w in reversed(_GL_HALF)]
                 + [np.longdouble(w) for _, w in _GL_HALF])


def _compensated_cumsum(v):
    """Kahan running sums as (sum, low-order correction) pairs."""
    out = np.zeros(len(v) + 1, dtype=v.dtype)
    low = np.zeros(len(v) + 1, dtype=v.dtype)
    s = c = v.dtype.type(0)
    for i, x in enumerate(v):
        y = x - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i + 1], low[i + 1] = s, -c
    return out, low


def residual_g_nu(nu: LocalSignedMeasure, g, lo: float = -10.0, hi: float = 10.0,
                  step: float = 1e-3) -> float:
    """Sup over a grid of |g(x) - RHS(x)| for the integral equation.

    The right-hand side is rebuilt from the candidate by Lebesgue-Stieltjes
    quadrature: Gauss-Legendre on the absolutely continuous part (cells split
    at density breakpoints, adaptive quadrature next to power anchors) and
    exact sums over atoms.
    """
    # the equation is anchored at 0, so integrate from there even if 0 is off-window
    glo, ghi = min(lo, 0.0), max(hi, 0.0)
    n = int(round((ghi - glo) / step))
    grid = np.linspace(np.longdouble(glo), np.longdouble(ghi), n + 1)
    grid[np.argmin(np.abs(grid))] = 0.0
    gl = lambda y: g(y, side="left")  # noqa: E731
    dens = nu.density
    cuts = set()
    anchors = set()
    if dens is not None:
        for p in dens.pieces:
            for e in (p.l, p.r):
                if math.isfinite(e) and glo < e < ghi:
                    cuts.add(e)
            if p.exponent != 0.0:
                anchors.add(p.anchor)
    nodes = np.union1d(grid, np.array(sorted(cuts), dtype=np.longdouble))

    # per-cell integrals of g(y-) * density(y)
    lo_n, hi_n = nodes[:-1], nodes[1:]
    cells = np.zeros(len(lo_n), dtype=np.longdouble)
    if dens is not None:
        mid, half = 0.5 * (lo_n + hi_n), 0.5 * (hi_n - lo_n)
        ys = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = (gl(ys.ravel()) * dens(ys.ravel())).reshape(ys.shape)
        cells = half * (vals @ _GL_W)
        for j in np.flatnonzero(np.isin(lo_n, list(anchors)) | np.isin(hi_n, list(anchors))):
            cells[j], _ = integrate.quad(lambda y: float(gl(y) * dens(y)), float(lo_n[j]),
                                         float(hi_n[j]), epsabs=1e-15, epsrel=1e-13, limit=200)
    # cumulative integral away from 0 in each direction
    i0 = int(np.searchsorted(nodes, 0.0))
    cum = np.zeros(len(nodes), dtype=np.longdouble)
    low = np.zeros_like(cum)
    cum[i0:], low[i0:] = _compensated_cumsum(cells[i0:])
    c, l = _compensated_cumsum(cells[:i0][::-1])
    cum[:i0 + 1], low[:i0 + 1] = c[::-1], l[::-1]
    idx = np.searchsorted(nodes, grid)
    ac, acl = cum[idx], low[idx]
    atoms = np.zeros_like(grid)
    for a, m in nu.atoms.items():
        w = gl(a) * m
        atoms += np.where((grid >= 0) & (a >= 0) & (a <= grid), w, 0.0)
        atoms += np.where((grid < 0) & (a > grid) & (a < 0), w, 0.0)
    sign = np.where(grid >= 0, -2.0, 2.0)
    # leading terms cancel almost exactly; add the Kahan correction afterwards
    res = (1.0 + sign * (ac + atoms) - g(grid)) + sign * acl
    window = (grid >= lo) & (grid <= hi)
    return float(np.max(np.abs(res[window])))


def drift_measure_from_f(f: PiecewisePower) -> LocalSignedMeasure:
    """nu(dy) = f(y)^-1 df(y) / 2 for a drift function without zeros."""
    try:
        fp, fm = zero_sets(f)
    except CoefficientError as exc:
        raise MeasureError(str(exc)) from None
    if fp or fm:
        raise MeasureError(
            "f has zeros: nu = df/(2f) is only sigma-finite, not a locally finite measure")
    atoms = {}
    for c in f.breakpoints:
        fc, fcm = f.value_at_breakpoint(c), f.left_limit(c)
        if fc != fcm:
            atoms[float(c)] = 0.5 * (fc - fcm) / fc
    dens_pieces = []
    for p in f.pieces:
        if p.exponent != 0.0:
            raise MeasureError(f"power piece anchored at {p.anchor} makes f vanish or blow up")
        dens_pieces.append(PowerPiece(p.l, p.r, 0.5 * p.rate))
    return LocalSignedMeasure(atoms, PiecewisePower(dens_pieces))


def drift_function_from_measure(nu: LocalSignedMeasure) -> PiecewisePower:
    """f_nu = 1 / g_nu as a piecewise exponential, for piecewise constant densities."""
    g = solve_g_nu(nu)
    dens = nu.density if nu.density is not None else PiecewisePower.constant(0.0)
    if not all(p.is_constant for p in dens.pieces):
        raise MeasureError("closed-form f_nu needs a piecewise constant density")
    cuts = sorted(set(dens.breakpoints.tolist()) | set(nu.atoms))
    edges = [-INF, *cuts, INF]
    pieces = []
    for l, r in zip(edges[:-1], edges[1:]):
        m = l if math.isfinite(l) else (r - 1.0 if math.isfinite(r) else 0.0)
        beta = float(dens(m))
        # f(x) = f(m) exp(2 beta (x - m)), stored with anchor 0
        coeff = math.exp(-2.0 * beta * m) / float(g(m))
        pieces.append(PowerPiece(l, r, coeff, rate=2.0 * beta))
    return PiecewisePower(pieces)


def pushforward(nu: LocalSignedMeasure, G) -> LocalSignedMeasure:
    """Image nu o G^-1 of an atomic measure under a strictly increasing map."""
    if not nu.is_atomic:
        raise MeasureError("pushforward is only defined for atomic measures")
    return LocalSignedMeasure({float(G(a)): m for a, m in nu.atoms.items()})
