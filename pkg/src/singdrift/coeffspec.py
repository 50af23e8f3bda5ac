"""Piecewise-power real functions.

A :class:`PiecewisePower` is a finite, ordered list of :class:`PowerPiece`
objects covering the real line, plus explicit values at the finite
breakpoints.  On its open interval a piece evaluates to

    coeff * |x - anchor| ** exponent * exp(rate * (x - anchor))

with ``exponent`` in (-1, 1) and ``rate != 0`` only for ``exponent == 0``.
The class is closed under reciprocals and has closed-form primitives,
which is all the space transformation needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class CoefficientError(ValueError):
    """Invalid piece or piecewise-power construction."""


def _encode_real(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _arr(x):
    """Float array view of x, keeping extended precision if given."""
    x = np.asarray(x)
    return x if x.dtype.kind == "f" else x.astype(float)


def _decode_real(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return INF
        if v == "-inf":
            return -INF
        raise CoefficientError(f"not a real number: {v!r}")
    return float(v)


@dataclass(frozen=True)
class PowerPiece:
    l: float
    r: float
    coeff: float
    exponent: float = 0.0
    anchor: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        if not self.l < self.r:
            raise CoefficientError(f"empty interval ({self.l}, {self.r})")
        if not -1.0 < self.exponent < 1.0:
            raise CoefficientError(
                f"exponent {self.exponent} outside (-1, 1) on ({self.l}, {self.r})")
        if self.exponent != 0.0:
            if self.anchor not in (self.l, self.r) or math.isinf(self.anchor):
                raise CoefficientError(
                    "anchor of a non-constant power piece must be a finite "
                    f"endpoint of ({self.l}, {self.r}), got {self.anchor}")
            if self.rate != 0.0:
                raise CoefficientError("rate and exponent cannot both be non-zero")
        if not math.isfinite(self.coeff):
            raise CoefficientError("coeff must be finite")

    # -- shape ---------------------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self.exponent == 0.0 and self.rate == 0.0

    @property
    def side(self) -> int:
        """+1 if the piece lies right of its anchor, -1 if left."""
        if self.exponent == 0.0:
            return 1
        return 1 if self.anchor == self.l else -1

    def local_exponent(self, endpoint: float) -> float:
        """Power-law exponent of the piece as x approaches ``endpoint``."""
        if self.exponent != 0.0 and endpoint == self.anchor:
            return self.exponent
        return 0.0

    # -- evaluation ----------------------------------------------------------
    def value(self, x):
        x = _arr(x)
        d = x - self.anchor
        out = np.full_like(x, self.coeff)
        if self.exponent != 0.0:
            with np.errstate(divide="ignore"):
                out = out * np.abs(d) ** self.exponent
        if self.rate != 0.0:
            out = out * np.exp(self.rate * d)
        return out

    def limit(self, endpoint: float) -> float:
        """One-sided limit at ``l`` (from the right) or ``r`` (from the left)."""
        if math.isinf(endpoint):
            if self.rate == 0.0:
                return self.coeff
            grows = (self.rate > 0) == (endpoint > 0)
            return math.copysign(INF, self.coeff) if grows and self.coeff else 0.0
        if self.coeff == 0.0:
            return 0.0
        if self.exponent != 0.0 and endpoint == self.anchor:
            return 0.0 if self.exponent > 0 else math.copysign(INF, self.coeff)
        return float(self.value(endpoint))

    def reciprocal(self) -> "PowerPiece":
        if self.coeff == 0.0:
            raise CoefficientError("reciprocal of a zero piece")
        return PowerPiece(self.l, self.r, 1.0 / self.coeff, -self.exponent,
                          self.anchor, -self.rate)

    # -- calculus ------------------------------------------------------------
    def primitive(self, x):
        """An antiderivative, continuous on the closure of the piece."""
        x = _arr(x)
        d = x - self.anchor
        if self.exponent != 0.0:
            e1 = self.exponent + 1.0
            return self.side * self.coeff * np.abs(d) ** e1 / e1
        if self.rate != 0.0:
            return self.coeff * np.exp(self.rate * d) / self.rate
        return self.coeff * d

    def primitive_limit(self, endpoint: float) -> float:
        if math.isinf(endpoint):
            if self.coeff == 0.0:
                return 0.0
            if self.rate != 0.0 and (self.rate > 0) != (endpoint > 0):
                return 0.0
            return math.copysign(INF, self.coeff * endpoint)
        return float(self.primitive(endpoint))

    def inverse_primitive(self, v):
        """Solve ``primitive(x) = v`` for x on the piece (closed form)."""
        v = np.asarray(v, dtype=float)
        c = self.coeff
        if self.exponent != 0.0:
            e1 = self.exponent + 1.0
            t = np.abs(v * e1 / (self.side * c)) ** (1.0 / e1)
            return self.anchor + self.side * t
        if self.rate != 0.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.anchor + np.log(v * self.rate / c) / self.rate
        return self.anchor + v / c

    def integral(self, a: float, b: float) -> float:
        """Integral of the piece over [a, b] within its closure."""
        a = max(a, self.l)
        b = min(b, self.r)
        if b <= a:
            return 0.0
        return self.primitive_limit(b) - self.primitive_limit(a)

    # -- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"l": _encode_real(self.l), "r": _encode_real(self.r),
             "anchor": float(self.anchor), "coeff": float(self.coeff),
             "exponent": float(self.exponent)}
        if self.rate != 0.0:
            d["rate"] = float(self.rate)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PowerPiece":
        allowed = {"l", "r", "anchor", "coeff", "exponent", "rate"}
        unknown = set(d) - allowed
        if unknown:
            raise CoefficientError(f"unknown piece field(s): {sorted(unknown)}")
        try:
            return cls(l=_decode_real(d["l"]), r=_decode_real(d["r"]),
                       coeff=float(d["coeff"]),
                       exponent=float(d.get("exponent", 0.0)),
                       anchor=float(d.get("anchor", 0.0)),
                       rate=float(d.get("rate", 0.0)))
        except KeyError as exc:
            raise CoefficientError(f"piece is missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class PiecewisePower:
    pieces: tuple
    values: dict = field(default_factory=dict)

    def __init__(self, pieces: Iterable[PowerPiece], values: dict | None = None):
        pieces = tuple(sorted(pieces, key=lambda p: p.l))
        if not pieces:
            raise CoefficientError("at least one piece is required")
        if pieces[0].l != -INF or pieces[-1].r != INF:
            raise CoefficientError("pieces must cover the whole real line")
        for a, b in zip(pieces, pieces[1:]):
            if a.r != b.l:
                raise CoefficientError(
                    f"pieces are not contiguous at {a.r} / {b.l}")
        bps = [p.r for p in pieces[:-1]]
        vals = {}
        for k, v in (values or {}).items():
            k = float(k)
            if k not in bps:
                raise CoefficientError(f"value given at {k}, which is not a breakpoint")
            vals[k] = float(v)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_bps", np.array(bps, dtype=float))

    # -- construction helpers ----------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> "PiecewisePower":
        return cls([PowerPiece(-INF, INF, c)])

    @classmethod
    def symmetric_power(cls, coeff: float, exponent: float, at: float = 0.0) -> "PiecewisePower":
        """``coeff * |x - at| ** exponent`` on both sides of ``at``."""
        return cls([PowerPiece(-INF, at, coeff, exponent, at),
                    PowerPiece(at, INF, coeff, exponent, at)])

    @classmethod
    def step(cls, left: float, right: float, at: float = 0.0) -> "PiecewisePower":
        return cls([PowerPiece(-INF, at, left), PowerPiece(at, INF, right)])

    @classmethod
    def exponential(cls, coeff: float, rate: float) -> "PiecewisePower":
        return cls([PowerPiece(-INF, INF, coeff, rate=rate)])

    # -- structure -------------------------------------------------------------
    @property
    def breakpoints(self) -> np.ndarray:
        return self._bps

    def piece_index(self, x):
        """Index of the piece whose half-open interval [l, r) contains x."""
        return np.searchsorted(self._bps, x, side="right")

    def piece_at(self, x: float) -> PowerPiece:
        return self.pieces[int(self.piece_index(x))]

    def value_at_breakpoint(self, c: float) -> float:
        if c in self.values:
            return self.values[c]
        return self.right_limit(c)

    def right_limit(self, c: float) -> float:
        return self.pieces[int(np.searchsorted(self._bps, c, side="right"))].limit(c)

    def left_limit(self, c: float) -> float:
        return self.pieces[int(np.searchsorted(self._bps, c, side="left"))].limit(c)

    # -- evaluation ------------------------------------------------------------
    def __call__(self, x, side: str = "right"):
        """Vectorized evaluation; ``side='left'`` gives g(x-)."""
        xa = _arr(x)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        out = np.empty_like(xa)
        idx = np.searchsorted(self._bps, xa, side="right" if side == "right" else "left")
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                out[m] = p.value(xa[m])
        # exact breakpoint values and limits
        for c in self._bps:
            m = xa == c
            if m.any():
                out[m] = self.value_at_breakpoint(c) if side == "right" else self.left_limit(c)
        inf = np.isinf(xa)
        if inf.any():
            out[inf] = [self.pieces[0 if v < 0 else -1].limit(v) for v in xa[inf]]
        return float(out[0]) if scalar else out

    def reciprocal(self) -> "PiecewisePower":
        vals = {}
        for c, v in self.values.items():
            vals[c] = INF if v == 0.0 else 1.0 / v
        return PiecewisePower([p.reciprocal() for p in self.pieces], vals)

    def integral(self, a: float, b: float) -> float:
        """Lebesgue integral over [a, b] (a <= b)."""
        if b < a:
            return -self.integral(b, a)
        total = 0.0
        for p in self.pieces:
            if p.r <= a or p.l >= b:
                continue
            total += p.integral(a, b)
        return total

    def cumulative(self, x, origin: float = 0.0):
        """Vectorized primitive ``x -> integral from origin to x`` (signed)."""
        xa = _arr(x)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        offs = self._offsets(origin)
        idx = np.searchsorted(self._bps, xa, side="right")
        out = np.empty_like(xa)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                out[m] = p.primitive(xa[m]) + offs[i]
        inf = np.isinf(xa)
        if inf.any():
            for j in np.flatnonzero(inf):
                p = self.pieces[0 if xa[j] < 0 else -1]
                k = 0 if xa[j] < 0 else len(self.pieces) - 1
                out[j] = p.primitive_limit(xa[j]) + offs[k]
        return float(out[0]) if scalar else out

    def _offsets(self, origin):
        cache = self.__dict__.setdefault("_offset_cache", {})
        if origin not in cache:
            offs = []
            for p in self.pieces:
                ref = p.l if math.isfinite(p.l) else (p.r if math.isfinite(p.r) else origin)
                offs.append(self.integral(origin, ref) - float(p.primitive(ref)))
            cache[origin] = offs
        return cache[origin]

    def variation(self, a: float, b: float) -> float:
        """Total variation on [a, b]; every piece is monotone."""
        total = 0.0
        for p in self.pieces:
            lo, hi = max(a, p.l), min(b, p.r)
            if hi <= lo:
                continue
            vlo = p.limit(lo) if lo == p.l else float(p.value(lo))
            vhi = p.limit(hi) if hi == p.r else float(p.value(hi))
            total += abs(vhi - vlo)
        def jump(u, v):
            return 0.0 if u == v else abs(u - v)  # inf == inf is no jump

        for c in self._bps:
            if a < c <= b:
                total += jump(self.value_at_breakpoint(c), self.left_limit(c))
            elif c == a:
                # jump from g(a) to the right limit only matters if overridden
                total += jump(self.right_limit(c), self.value_at_breakpoint(c))
        return total

    # -- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"pieces": [p.to_dict() for p in self.pieces]}
        if self.values:
            d["values"] = [{"at": c, "value": _encode_real(v)} for c, v in sorted(self.values.items())]
        return d

    @classmethod
    def from_dict(cls, d) -> "PiecewisePower":
        if isinstance(d, (int, float)):
            return cls.constant(float(d))
        unknown = set(d) - {"pieces", "values"}
        if unknown:
            raise CoefficientError(f"unknown field(s): {sorted(unknown)}")
        if "pieces" not in d:
            raise CoefficientError("missing field 'pieces'")
        vals = {}
        for item in d.get("values", []):
            extra = set(item) - {"at", "value"}
            if extra:
                raise CoefficientError(f"unknown breakpoint field(s): {sorted(extra)}")
            vals[float(item["at"])] = _decode_real(item["value"])
        return cls([PowerPiece.from_dict(p) for p in d["pieces"]], vals)

    def __eq__(self, other):
        return (isinstance(other, PiecewisePower) and self.pieces == other.pieces
                and self.values == other.values)

    def __hash__(self):
        return hash((self.pieces, tuple(sorted(self.values.items()))))


def eval(g: PiecewisePower, x: float, side: str = "right") -> float:  # noqa: A001
    """g(x) for ``side='right'`` or g(x-) for ``side='left'``; +inf at +-inf."""
    if math.isinf(x):
        return INF
    return g(x, side=side)


def zero_sets(f: PiecewisePower) -> tuple[list[float], list[float]]:
    """Return (F_plus, F_minus), the zeros of f and of its left limits."""
    for p in f.pieces:
        if p.coeff == 0.0:
            raise CoefficientError(
                f"f vanishes on ({p.l}, {p.r}): 1/f not locally integrable")
    f_plus = [float(c) for c in f.breakpoints if f.value_at_breakpoint(c) == 0.0]
    f_minus = [float(c) for c in f.breakpoints if f.left_limit(c) == 0.0]
    return f_plus, f_minus


@dataclass
class ValidationReport:
    ok: bool
    problems: list

    def __bool__(self):
        return self.ok


def check_drift_function(f: PiecewisePower) -> ValidationReport:
    """Diagnose whether f qualifies as a drift function."""
    problems = []
    for p in f.pieces:
        if p.coeff == 0.0:
            problems.append(f"1/f not locally integrable: f = 0 on ({p.l}, {p.r})")
        elif p.coeff < 0.0:
            problems.append(f"negative values on ({p.l}, {p.r})")
        if p.exponent < 0.0:
            problems.append(
                f"f unbounded near {p.anchor}: not of locally bounded variation")
        if -p.exponent <= -1.0:
            problems.append(f"1/f not locally integrable near {p.anchor}")
    for c, v in f.values.items():
        if v < 0.0:
            problems.append(f"negative value at {c}")
        if v != f.right_limit(c):
            problems.append(f"not right-continuous at {c}")
    return ValidationReport(not problems, problems)


def refine(*gs: PiecewisePower) -> list[tuple[float, float]]:
    """Common refinement of the piece intervals of several functions."""
    pts = sorted(set().union(*(set(g.breakpoints.tolist()) for g in gs)))
    edges = [-INF, *pts, INF]
    return list(zip(edges[:-1], edges[1:]))


def pieces_on(g: PiecewisePower, intervals: Sequence[tuple[float, float]]) -> list[PowerPiece]:
    """The piece of g active on each refined interval."""
    out = []
    for lo, hi in intervals:
        probe = lo if math.isfinite(lo) else (hi - 1.0 if math.isfinite(hi) else 0.0)
        out.append(g.piece_at(probe))
    return out
