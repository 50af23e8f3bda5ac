"""Path engines: the exact-mean-time natural-scale walk and the time-change oracle."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..transform import SpaceTransform
from . import _fallback
from .scenario import PathBatch, Scenario
from .tables import ABSORB, build_timechange_table, build_walk_table

try:
    if os.environ.get("SINGDRIFT_PURE_PYTHON"):
        raise ImportError("pure Python kernels requested")
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
RUNNING, ABSORBED, EXPLODED, TRUNCATED = 0, 1, 2, 3
JITTER = 0.5
_INIT_SALT = 0x5851F42D4C957F2D


def kernels(name: str | None = None):
    """The kernel module: 'compiled', 'python', or the default backend."""
    name = name or BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if name == "python":
        return _fallback
    raise ValueError(f"unknown kernel backend {name!r}")


@dataclass
class _Prepared:
    t: SpaceTransform
    table: object


@lru_cache(maxsize=32)
def _prepare_walk(s: Scenario) -> _Prepared:
    t = SpaceTransform(s.f)
    return _Prepared(t, build_walk_table(t, s.b, s.nu, s.dt))


@lru_cache(maxsize=32)
def _prepare_tc(s: Scenario) -> _Prepared:
    t = SpaceTransform(s.f)
    return _Prepared(t, build_timechange_table(t, s.b, s.nu))


def initial_points(s: Scenario, start: int, n: int) -> np.ndarray:
    if s.x0_uniform is None:
        return np.full(n, float(s.x0))
    lo, hi = s.x0_uniform
    u = np.array([_fallback.SplitMix(_fallback.stream_state(s.seed ^ _INIT_SALT, start + i)).uniform()
                  for i in range(n)])
    return lo + (hi - lo) * u


def _output_grid(s: Scenario, stride: int | None, terminal_only: bool):
    n = s.n_steps
    if terminal_only:
        stride = n
    stride = stride or 1
    if n % stride:
        raise ValueError(f"stride {stride} does not divide the {n} steps")
    return stride, n // stride + 1


def _walk_batch(s: Scenario, start: int, n: int, stride: int, n_out: int, backend: str | None):
    prep = _prepare_walk(s)
    tab = prep.table
    u = tab.y_to_u(prep.t.G(initial_points(s, start, n)))
    piece = tab.piece_of(u).astype(np.int64)
    status = np.zeros(n, dtype=np.int8)
    barriers = {e for i in range(tab.n) if not tab.absorbing[i]
                for e, r in ((tab.clo[i], tab.lo_reach[i]), (tab.chi[i], tab.hi_reach[i]))
                if np.isfinite(e) and r != 2}
    for p in range(n):
        i = piece[p]
        inside_abs = tab.absorbing[i] or (u[p] == tab.pl[i] and i > 0 and tab.absorbing[i - 1])
        if inside_abs or u[p] in barriers:
            status[p] = ABSORB
    out_u = np.empty((n, n_out))
    out_status = np.empty(n, dtype=np.int8)
    out_event = np.empty(n, dtype=np.int64)
    kernels(backend).walk_paths(tab, u, piece, status, int(s.seed), int(start), s.n_steps, stride,
                                float(s.dt), JITTER, out_u, out_status, out_event)
    return out_u, out_status, out_event


def _finish(s: Scenario, prep: _Prepared, start, Y, status, event_time, stride, full):
    t = prep.t
    step = stride * s.dt
    times = np.linspace(0.0, (Y.shape[1] - 1) * step, Y.shape[1])
    X = t.H(Y)
    n = Y.shape[0]
    qv = np.zeros_like(X)
    explosion = np.full(n, np.nan)
    absorbed = np.full(n, np.nan)
    explosion[status == EXPLODED] = event_time[status == EXPLODED]
    absorbed[status == ABSORBED] = event_time[status == ABSORBED]
    if full:
        fin = np.isfinite(X[:, :-1])
        bx = np.zeros_like(X[:, :-1])
        bx[fin] = s.b(X[:, :-1][fin]) ** 2
        qv[:, :-1] = bx * step
        stopped = np.where(np.isnan(explosion), absorbed, explosion)
        qv[:, :-1][times[None, :-1] >= stopped[:, None]] = 0.0
    return PathBatch(start, times, X, Y, qv, explosion, absorbed)


def _walk_job(args):
    s, start, n, stride, n_out, backend, full = args
    prep = _prepare_walk(s)
    U, status, event = _walk_batch(s, start, n, stride, n_out, backend)
    Y = prep.table.u_to_y(U)
    ev_time = np.where(event >= 0, event * s.dt, np.nan)
    batch = _finish(s, prep, start, Y, status, ev_time, stride, full)
    if full:
        # crossings of each skew point image
        for a, cu in zip(sorted(s.nu.atoms), prep.table.atoms_u):
            side = np.sign(U - cu)
            nz = [row[row != 0] for row in side]
            batch.skew_crossings[a] = np.array([int(np.sum(r[1:] != r[:-1])) for r in nz])
    return batch


def _tc_job(args):
    s, start, n, out_dt, n_out, backend, max_steps = args
    prep = _prepare_tc(s)
    y0 = prep.t.G(initial_points(s, start, n))
    out_y = np.empty((n, n_out))
    status = np.empty(n, dtype=np.int8)
    kernels(backend).timechange_paths(prep.table, np.atleast_1d(y0).astype(float), int(s.seed),
                                      int(start), float(s.h), float(out_dt), int(max_steps),
                                      out_y, status)
    stride = out_dt / s.dt
    batch = _finish(s, prep, start, out_y, status, np.full(n, np.nan), stride, True)
    batch.truncated = status == TRUNCATED
    return batch


def _run(job, jobs, workers):
    if workers <= 1:
        for j in jobs:
            yield job(j)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(job, jobs)


def _batches(n_paths, batch_size):
    for start in range(0, n_paths, batch_size):
        yield start, min(batch_size, n_paths - start)


def simulate_walk(s: Scenario, n_paths: int, *, stride: int | None = None,
                  terminal_only: bool = False, batch_size: int = 1000, workers: int = 1,
                  backend: str | None = None):
    """Stream of PathBatch objects for paths 0..n_paths-1.

    Refuses scenarios without a good solution.  Path p depends only on
    (seed, p), so batching and worker count never change results.
    """
    s.require_existence()
    _prepare_walk(s)
    stride, n_out = _output_grid(s, stride, terminal_only)
    jobs = [(s, st, n, stride, n_out, backend, not terminal_only)
            for st, n in _batches(n_paths, batch_size)]
    yield from _run(_walk_job, jobs, workers)


def simulate_timechange(s: Scenario, n_paths: int, *, stride: int | None = None,
                        terminal_only: bool = False, batch_size: int = 1000, workers: int = 1,
                        backend: str | None = None, max_steps: int = 50_000_000):
    """Time-changed (skew) Brownian motion; output on the walk's time grid."""
    s.require_existence()
    _prepare_tc(s)
    stride, n_out = _output_grid(s, stride, terminal_only)
    jobs = [(s, st, n, stride * s.dt, n_out, backend, max_steps)
            for st, n in _batches(n_paths, batch_size)]
    yield from _run(_tc_job, jobs, workers)


def terminal_values(batches) -> np.ndarray:
    return np.concatenate([b.X[:, -1] for b in batches])


def explosion_probe(s: Scenario, n_paths: int, **kw) -> dict:
    """Fraction of paths exploding by T, and their explosion times."""
    times = []
    frozen = True
    for b in simulate_walk(s, n_paths, **kw):
        hit = ~np.isnan(b.explosion_time)
        times.extend(b.explosion_time[hit].tolist())
        for i in np.flatnonzero(hit):
            after = b.times >= b.explosion_time[i]
            frozen &= bool(np.all(np.isinf(b.X[i, after])) and np.all(b.X[i, after] == b.X[i, -1]))
    return {"n_paths": n_paths, "fraction": len(times) / n_paths,
            "min_time": min(times) if times else math.nan,
            "mean_time": float(np.mean(times)) if times else math.nan,
            "frozen_after_explosion": frozen}
