"""Scenario description and path containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..coeffspec import PiecewisePower
from ..measures import LocalSignedMeasure
from ..wellposed import check_skewness, verdicts


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    f: PiecewisePower
    b: PiecewisePower
    nu: LocalSignedMeasure = field(default_factory=LocalSignedMeasure.zero)
    x0: float = 0.0
    x0_uniform: tuple | None = None
    T: float = 1.0
    dt: float = 1e-3
    h: float = 0.01
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0 and self.h > 0):
            raise ScenarioError("T, dt and h must be positive")
        if not math.isfinite(self.x0):
            raise ScenarioError("initial point must be finite")
        if self.x0_uniform is not None:
            lo, hi = self.x0_uniform
            if not lo < hi:
                raise ScenarioError("uniform initial law needs lo < hi")
        if not 0 <= int(self.seed) < 2**64:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        check_skewness(self.f, self.nu)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.T / self.dt)))

    def verdicts(self):
        return verdicts(self.f, self.b, self.nu)

    def require_existence(self):
        rep = self.verdicts()
        key = "skew_exists" if self.nu.atoms else "symmetric_exists"
        if not rep.verdicts[key]:
            raise ScenarioError(
                f"no good solution: E(b/sqrt f) = {rep.E_bsqrtf} is not contained in N(b) = {rep.N_b}")
        return rep

    def replace(self, **kw) -> "Scenario":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return Scenario(**d)


@dataclass
class PathSample:
    """One discretized path; values are +-inf after explosion."""
    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    qv: np.ndarray
    explosion_time: float | None = None
    absorbed_at: float | None = None
    absorbed_time: float | None = None
    skew_crossings: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)


@dataclass
class PathBatch:
    """Paths [start, start + n) of a run, stored row-wise.

    ``qv[:, j]`` is the quadratic-variation increment over (t_j, t_{j+1}];
    its last column is zero.  With ``terminal_only`` the arrays have two
    columns (t = 0 and t = T).
    """
    start: int
    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    qv: np.ndarray
    explosion_time: np.ndarray
    absorbed_time: np.ndarray
    skew_crossings: dict = field(default_factory=dict)
    truncated: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def path(self, i: int) -> PathSample:
        et = self.explosion_time[i]
        at = self.absorbed_time[i]
        return PathSample(self.times, self.X[i], self.Y[i], self.qv[i],
                          None if np.isnan(et) else float(et),
                          None if np.isnan(at) else float(self.X[i, -1]),
                          None if np.isnan(at) else float(at),
                          {c: int(v[i]) for c, v in self.skew_crossings.items()})

    def __iter__(self):
        return (self.path(i) for i in range(self.n))
