"""Window estimators of local times from discretized paths.

All estimators use the left-point rule: grid point j contributes its
quadratic-variation increment ``qv[j]`` (over (t_j, t_{j+1}]) when X(t_j)
lies in the window.  L_m is normalised by the exact m-mass of the window,
m(dy) = 2 f(y) dy, so it stays finite where f vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffspec import PiecewisePower
from .simulate.scenario import PathBatch, PathSample


class LocalTimeError(ValueError):
    pass


@dataclass(frozen=True)
class LocalTimeEstimate:
    y: float
    eps: float
    t: float
    Lp: float
    Lminus: float
    Lm_right: float
    Lm_left: float
    n_samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _arrays(path):
    """(times, X, qv) with X and qv two-dimensional."""
    if isinstance(path, (PathSample, PathBatch)):
        return path.times, np.atleast_2d(path.X), np.atleast_2d(path.qv)
    times, X, qv = path
    return np.asarray(times), np.atleast_2d(X), np.atleast_2d(qv)


def _upto(times, t) -> int:
    """Number of grid intervals (t_j, t_{j+1}] contained in [0, t]."""
    tol = 1e-9 * max(1.0, abs(t))
    return int(np.searchsorted(times[1:], t + tol, side="right"))


def _window_sums(X, Xn, qv, y, lo, hi, side):
    """Sum of qv over grid points in the open window (lo, hi), plus points sitting
    exactly at y credited to the side the path leaves towards."""
    inside = (X > lo) & (X < hi)
    at = X == y
    share = np.where(Xn > y, 1.0, np.where(Xn < y, 0.0, 0.5))
    w = np.where(inside, 1.0, 0.0) + np.where(at, share if side == "right" else 1.0 - share, 0.0)
    return (w * qv).sum(axis=-1), (w > 0).sum(axis=-1)


def m_mass(f: PiecewisePower, a: float, b: float) -> float:
    """m((a, b)) = 2 * integral of f."""
    return 2.0 * f.integral(a, b)


def _check_eps(eps):
    if not eps > 0:
        raise LocalTimeError(f"window width must be positive, got {eps}")


def _sums(path, y, t, eps, side):
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    X, Xn, qv = X[:, :n], X[:, 1:n + 1], qv[:, :n]
    if side == "right":
        return _window_sums(X, Xn, qv, y, y, y + eps, "right")
    return _window_sums(X, Xn, qv, y, y - eps, y, "left")


def _out(v, path):
    single = isinstance(path, PathSample) or (isinstance(path, tuple) and np.ndim(path[1]) == 1)
    return float(v[0]) if single else v


def estimate_Lplus(path, y: float, t: float, eps: float):
    """(1/eps) * sum of qv over grid points with y <= X < y + eps.

    A grid point exactly at y counts here only if the path moves up from it
    (half if it stays): on a lattice the time spent on a level is not
    negligible and belongs to the side the path actually occupies next.
    """
    _check_eps(eps)
    s, _ = _sums(path, y, t, eps, "right")
    return _out(s / eps, path)


def estimate_Lminus(path, y: float, t: float, eps: float):
    """(1/eps) * sum of qv over grid points with y - eps < X <= y (departure rule at y)."""
    _check_eps(eps)
    s, _ = _sums(path, y, t, eps, "left")
    return _out(s / eps, path)


def estimate_Lm(path, f: PiecewisePower, y: float, side: str, t: float, eps: float):
    """Occupation density with respect to m(dy) = 2 f(y) dy on a one-sided window."""
    _check_eps(eps)
    if side not in ("right", "left"):
        raise LocalTimeError(f"side must be 'right' or 'left', got {side!r}")
    a, b = (y, y + eps) if side == "right" else (y - eps, y)
    mass = m_mass(f, a, b)
    if not mass > 0:
        raise LocalTimeError(f"window ({a}, {b}) has zero m-mass")
    s, _ = _sums(path, y, t, eps, side)
    return _out(s / mass, path)


def estimate(path: PathSample, f: PiecewisePower, y: float, t: float, eps: float) -> LocalTimeEstimate:
    _, n_r = _sums(path, y, t, eps, "right")
    _, n_l = _sums(path, y, t, eps, "left")
    return LocalTimeEstimate(
        float(y), float(eps), float(t),
        estimate_Lplus(path, y, t, eps), estimate_Lminus(path, y, t, eps),
        estimate_Lm(path, f, y, "right", t, eps), estimate_Lm(path, f, y, "left", t, eps),
        int(n_r[0] + n_l[0]))


# -- identity checks ---------------------------------------------------------------

def _batches(paths):
    if isinstance(paths, (PathSample, PathBatch, tuple)):
        return [paths]
    return list(paths)


def check_density_identity(paths, f: PiecewisePower, levels, t: float, eps: float,
                           floor: float = 1e-3, tol: float = 0.1) -> dict:
    """2 f(y+-) L_m(y+-) against L_+- at each level, as a per-path relative error."""
    batches = _batches(paths)
    out = {}
    for y in levels:
        fr, fl = float(f(y)), float(f(y, side="left"))
        if fr == 0.0 or fl == 0.0:
            out[float(y)] = {"skipped": "0 = 0 degenerate"}
            continue
        errs = []
        for b in batches:
            Lp = np.atleast_1d(estimate_Lplus(b, y, t, eps))
            Lmi = np.atleast_1d(estimate_Lminus(b, y, t, eps))
            Lmr = np.atleast_1d(estimate_Lm(b, f, y, "right", t, eps))
            Lml = np.atleast_1d(estimate_Lm(b, f, y, "left", t, eps))
            er = np.abs(2.0 * fr * Lmr - Lp) / np.maximum(Lp, floor)
            el = np.abs(2.0 * fl * Lml - Lmi) / np.maximum(Lmi, floor)
            errs.append(np.maximum(er, el))
        err = float(np.mean(np.concatenate(errs)))
        out[float(y)] = {"rel_error": err, "pass": err < tol}
    return {"levels": out, "pass": all(v.get("pass", True) for v in out.values())}


def lplus_profile(path, levels, t: float, eps: float) -> np.ndarray:
    """L_+ estimates at many levels at once, one row per path."""
    _check_eps(eps)
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    levels = np.asarray(levels, dtype=float)
    out = np.zeros((X.shape[0], len(levels)))
    for r in range(X.shape[0]):
        x, w = X[r, :n], qv[r, :n]
        keep = np.isfinite(x)
        order = np.argsort(x[keep], kind="stable")
        xs = x[keep][order]
        cq = np.concatenate([[0.0], np.cumsum(w[keep][order])])
        below = lambda z: cq[np.searchsorted(xs, z, side="left")]  # noqa: E731
        out[r] = (below(levels + eps) - below(levels)) / eps
    return out


def check_occupation_formula(path, g: PiecewisePower, t: float, grid, eps: float = 0.02,
                             tol: float = 0.05) -> dict:
    """Sum of g(X) dqv against the trapezoid integral of L_+ g over a level grid.

    The residual is pooled over paths: a path that barely touches the
    support of g has a meaningless relative error of its own.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise LocalTimeError("grid must be increasing with at least two points")
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    Xn, qn = X[:, :n], qv[:, :n]
    fin = np.isfinite(Xn)
    gx = np.zeros_like(Xn)
    gx[fin] = g(Xn[fin])
    lhs = (gx * qn).sum(axis=-1)
    L = lplus_profile(path, grid, t, eps)
    rhs = np.trapezoid(L * g(grid)[None, :], grid, axis=-1)
    res = abs(lhs.sum() - rhs.sum()) / (abs(lhs.sum()) + 1e-9)
    return {"lhs": lhs, "rhs": rhs, "residual": float(res), "pass": bool(res < tol)}


def check_support(path, y: float, t: float, eps: float) -> dict:
    """Increments of the window estimator vanish while X stays 2 eps away from y."""
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    X, qv = X[:, :n], qv[:, :n]
    inc = np.where((X >= y) & (X < y + eps), qv, 0.0) + np.where((X > y - eps) & (X < y), qv, 0.0)
    away = np.abs(X - y) >= 2.0 * eps
    leaked = float(inc[away].sum())
    return {"total": inc.sum(axis=-1), "away_steps": int(away.sum()), "leaked": leaked,
            "pass": leaked == 0.0}


def check_outside_range(path, f: PiecewisePower, levels, t: float, eps: float) -> dict:
    """Every estimate at a level whose windows miss the running range is exactly 0."""
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    Xs = X[:, : n + 1]
    fin = np.where(np.isfinite(Xs), Xs, np.nan)
    lo, hi = np.nanmin(fin), np.nanmax(fin)
    checked, bad = [], []
    for y in levels:
        if lo - eps <= y <= hi + eps:
            continue
        checked.append(float(y))
        vals = [estimate_Lplus(path, y, t, eps), estimate_Lminus(path, y, t, eps)]
        for side in ("right", "left"):
            a, b = (y, y + eps) if side == "right" else (y - eps, y)
            if m_mass(f, a, b) > 0:
                vals.append(estimate_Lm(path, f, y, side, t, eps))
        if any(np.any(np.asarray(v) != 0.0) for v in vals):
            bad.append(float(y))
    return {"range": (float(lo), float(hi)), "checked": checked, "nonzero": bad, "pass": not bad}


def left_right_ratio(paths, f: PiecewisePower, y: float, t: float, eps: float) -> dict:
    """Mean L_m(y-) over mean L_m(y), averaged over paths."""
    left, right = [], []
    for b in _batches(paths):
        left.append(np.atleast_1d(estimate_Lm(b, f, y, "left", t, eps)))
        right.append(np.atleast_1d(estimate_Lm(b, f, y, "right", t, eps)))
    left, right = np.concatenate(left), np.concatenate(right)
    mr = float(right.mean())
    return {"left": float(left.mean()), "right": mr,
            "ratio": float(left.mean()) / mr if mr > 0 else math.nan, "n_paths": len(left)}


def check_left_right(paths, f: PiecewisePower, y: float, t: float, eps: float,
                     target: float = 1.0, tol: float = 0.1) -> dict:
    r = left_right_ratio(paths, f, y, t, eps)
    r["pass"] = bool(abs(r["ratio"] - target) <= tol * abs(target) if target else abs(r["ratio"]) <= tol)
    return r


def check_transform_consistency(paths, f: PiecewisePower, G, y: float, t: float, eps: float,
                                tol: float = 0.2) -> dict:
    """L_+ of Y = G(X) at G(y) against L_m of X at y; the ratio should be 2."""
    ly, lm = [], []
    gy = float(G(y))
    for b in _batches(paths):
        times, X, qv = _arrays(b)
        fin = np.isfinite(X)
        fx = np.ones_like(X)
        fx[fin] = f(X[fin])
        with np.errstate(divide="ignore", invalid="ignore"):
            qvy = np.where(fx > 0, qv / fx ** 2, 0.0)
        Y = np.where(fin, G(np.where(fin, X, 0.0)), X)
        ly.append(np.atleast_1d(estimate_Lplus((times, Y, qvy), gy, t, eps)))
        lm.append(np.atleast_1d(estimate_Lm(b, f, y, "right", t, eps)))
    ly, lm = np.concatenate(ly).mean(), np.concatenate(lm).mean()
    ratio = float(ly / lm) if lm > 0 else math.nan
    return {"L_Y": float(ly), "L_m": float(lm), "ratio": ratio, "pass": abs(ratio - 2.0) <= tol * 2.0}


def inverse_f_energy(path, f: PiecewisePower, t: float):
    """Sum of qv / f(X)**2; grid points on the zero set of f are skipped."""
    times, X, qv = _arrays(path)
    n = _upto(times, t)
    X, qv = X[:, :n], qv[:, :n]
    fin = np.isfinite(X)
    fx = np.zeros_like(X)
    fx[fin] = f(X[fin])
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.where(fx > 0, qv / fx ** 2, 0.0)
    return _out(e.sum(axis=-1), path)


def occupation_near(path, a: float, eps: float, t: float | None = None):
    """Fraction of grid times with |X - a| < eps."""
    times, X, _ = _arrays(path)
    n = _upto(times, times[-1] if t is None else t)
    return float(np.mean(np.abs(X[:, : n + 1] - a) < eps))


__all__ = ["LocalTimeEstimate", "LocalTimeError", "estimate", "estimate_Lplus", "estimate_Lminus",
           "estimate_Lm", "lplus_profile", "m_mass", "check_density_identity", "check_occupation_formula",
           "check_support", "check_outside_range", "left_right_ratio", "check_left_right",
           "check_transform_consistency", "inverse_f_energy", "occupation_near"]
