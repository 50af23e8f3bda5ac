"""Zero sets N_h, singularity sets E_h and existence/uniqueness verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coeffspec import INF, PiecewisePower, zero_sets
from .measures import LocalSignedMeasure, MeasureError, validate_atoms
from .transform import SpaceTransform, sigma_pieces


@dataclass(frozen=True)
class Interval:
    l: float
    r: float
    closed_l: bool = True
    closed_r: bool = True

    def __post_init__(self):
        # infinite ends are never members
        object.__setattr__(self, "closed_l", self.closed_l and math.isfinite(self.l))
        object.__setattr__(self, "closed_r", self.closed_r and math.isfinite(self.r))

    def contains(self, x: float) -> bool:
        return ((self.l < x or (self.closed_l and x == self.l))
                and (x < self.r or (self.closed_r and x == self.r)))

    def covers(self, other: "Interval") -> bool:
        left = self.l < other.l or (self.l == other.l and (self.closed_l or not other.closed_l))
        right = other.r < self.r or (self.r == other.r and (self.closed_r or not other.closed_r))
        return left and right

    def to_dict(self) -> dict:
        enc = lambda v: v if math.isfinite(v) else ("inf" if v > 0 else "-inf")  # noqa: E731
        return {"l": enc(self.l), "r": enc(self.r), "closed": [self.closed_l, self.closed_r]}


class PointAndIntervalSet:
    """Finite union of points and intervals, kept in canonical form.

    Canonical: intervals sorted, disjoint and non-touching (touching pieces
    are merged), points sorted and outside every interval.
    """

    def __init__(self, points=(), intervals=()):
        ivs = sorted((iv for iv in intervals if iv.l < iv.r or (iv.l == iv.r and iv.closed_l and iv.closed_r)),
                     key=lambda iv: (iv.l, not iv.closed_l))
        pts = set(float(p) for p in points)
        pts |= {iv.l for iv in ivs if iv.l == iv.r}
        ivs = [iv for iv in ivs if iv.l < iv.r]
        merged: list[Interval] = []
        for iv in ivs:
            if merged:
                last = merged[-1]
                touch = iv.l < last.r or (iv.l == last.r and (last.closed_r or iv.closed_l or iv.l in pts))
                if touch:
                    if iv.r > last.r or (iv.r == last.r and iv.closed_r):
                        merged[-1] = Interval(last.l, iv.r, last.closed_l, iv.closed_r)
                    continue
            merged.append(iv)
        # close open ends that carry a point
        out = []
        for iv in merged:
            out.append(Interval(iv.l, iv.r, iv.closed_l or iv.l in pts, iv.closed_r or iv.r in pts))
        self.intervals = tuple(out)
        self.points = tuple(sorted(p for p in pts if not any(iv.contains(p) for iv in out)))

    @classmethod
    def empty(cls) -> "PointAndIntervalSet":
        return cls()

    def is_empty(self) -> bool:
        return not self.points and not self.intervals

    def contains(self, x: float) -> bool:
        return x in self.points or any(iv.contains(x) for iv in self.intervals)

    def issubset(self, other: "PointAndIntervalSet") -> bool:
        return (all(other.contains(p) for p in self.points)
                and all(any(o.covers(iv) for o in other.intervals) for iv in self.intervals))

    def map(self, fn) -> "PointAndIntervalSet":
        """Image under a strictly increasing continuous map."""
        return PointAndIntervalSet([float(fn(p)) for p in self.points],
                                   [Interval(float(fn(iv.l)), float(fn(iv.r)), iv.closed_l, iv.closed_r)
                                    for iv in self.intervals])

    def __eq__(self, other):
        return (isinstance(other, PointAndIntervalSet) and self.points == other.points
                and self.intervals == other.intervals)

    def __repr__(self):
        return f"PointAndIntervalSet(points={list(self.points)}, intervals={list(self.intervals)})"

    def to_dict(self) -> dict:
        return {"points": list(self.points), "intervals": [iv.to_dict() for iv in self.intervals]}


# -- local exponent calculus -------------------------------------------------------

def _side_profile(piece, point: float):
    """(vanishes identically, local exponent) of a piece next to ``point``."""
    if piece.coeff == 0.0:
        return True, 0.0
    return False, piece.local_exponent(point)


def _singular_from_profile(sides: dict, zero_intervals) -> PointAndIntervalSet:
    # a point is singular iff on some side h vanishes on an interval or |h| ~ |x - x0|^p with 2p >= 1
    pts = [x for x, prof in sides.items()
           if any(zero or 2.0 * p >= 1.0 for zero, p in prof)]
    return PointAndIntervalSet(pts, list(zero_intervals))


def zero_set(h: PiecewisePower) -> PointAndIntervalSet:
    """N_h from actual values: breakpoint values and identically-zero pieces."""
    pts = [float(c) for c in h.breakpoints if h.value_at_breakpoint(c) == 0.0]
    ivs = [Interval(p.l, p.r, False, False) for p in h.pieces if p.coeff == 0.0]
    return PointAndIntervalSet(pts, ivs)


def singular_set(h: PiecewisePower) -> PointAndIntervalSet:
    """E_h: points where h^-2 fails to be integrable on every neighbourhood."""
    sides = {}
    for c, left, right in zip(h.breakpoints, h.pieces[:-1], h.pieces[1:]):
        sides[float(c)] = (_side_profile(left, c), _side_profile(right, c))
    return _singular_from_profile(sides, [Interval(p.l, p.r) for p in h.pieces if p.coeff == 0.0])


def singular_set_ratio(b: PiecewisePower, f: PiecewisePower, power: float = 0.5) -> PointAndIntervalSet:
    """E of b / f**power, by exponent subtraction at each breakpoint.

    The quotient is never materialised: its exponent may leave (-1, 1).
    """
    pts = sorted(set(b.breakpoints.tolist()) | set(f.breakpoints.tolist()))
    sides = {}
    for c in pts:
        prof = []
        for side_probe in ("left", "right"):
            bp = b.pieces[int(b.piece_index(c)) - (1 if side_probe == "left" and c in b.breakpoints else 0)]
            fp = f.pieces[int(f.piece_index(c)) - (1 if side_probe == "left" and c in f.breakpoints else 0)]
            zero, pb = _side_profile(bp, c)
            prof.append((zero, pb - power * fp.local_exponent(c)))
        sides[c] = tuple(prof)
    return _singular_from_profile(sides, [Interval(p.l, p.r) for p in b.pieces if p.coeff == 0.0])


def sigma_sets(t: SpaceTransform, b: PiecewisePower) -> tuple[PointAndIntervalSet, PointAndIntervalSet]:
    """(N, E) of the regularized transformed coefficient, computed in Y-space."""
    pieces = sigma_pieces(t, b)
    sides, pre = {}, {}
    for left, right in zip(pieces[:-1], pieces[1:]):
        y = left.yr
        pre[y] = left.xr
        prof = []
        for pc in (left, right):
            if pc.coeff == 0.0:
                prof.append((True, 0.0))
            else:
                prof.append((False, pc.exponent if pc.y0 == y else 0.0))
        sides[y] = tuple(prof)
    # ends of G(R) are not points of the state space
    zero_ivs = [Interval(pc.yl, pc.yr, bool(t.in_image(pc.yl)), bool(t.in_image(pc.yr)))
                for pc in pieces if pc.coeff == 0.0]
    E = _singular_from_profile(sides, zero_ivs)
    # sigma-tilde vanishes exactly where b does (its +inf values become 1)
    skel = list(sides)
    vals = t.b_over_f(b, [pre[y] for y in skel]) if skel else []
    N = PointAndIntervalSet([y for y, v in zip(skel, vals) if v == 0.0],
                            [Interval(pc.yl, pc.yr, False, False) for pc in pieces if pc.coeff == 0.0])
    return N, E


# -- verdicts -------------------------------------------------------------------------

CRITERIA = {
    "symmetric_exists": "E(b/sqrt f) subset of N(b): symmetric good solution exists",
    "symmetric_unique": "E(b/sqrt f) = N(b): symmetric good solution is unique",
    "skew_exists": "E(b/sqrt f) subset of N(b), nu atomic on F_minus: skew good solution exists",
    "skew_unique": "E(b/sqrt f) = N(b), nu atomic on F_minus: skew good solution is unique",
}


@dataclass
class WellPosednessReport:
    N_b: PointAndIntervalSet
    E_b: PointAndIntervalSet
    E_bsqrtf: PointAndIntervalSet
    atoms_ok: bool
    atom_problems: list
    verdicts: dict

    def to_dict(self) -> dict:
        return {
            "N_b": self.N_b.to_dict(),
            "E_b": self.E_b.to_dict(),
            "E_b_over_sqrt_f": self.E_bsqrtf.to_dict(),
            "atoms": {"ok": self.atoms_ok, "problems": list(self.atom_problems)},
            "verdicts": {k: {"value": v, "criterion": CRITERIA[k]}
                         for k, v in sorted(self.verdicts.items())},
        }


class PreconditionError(MeasureError):
    pass


def check_skewness(f: PiecewisePower, nu: LocalSignedMeasure) -> None:
    """Raise unless nu is atomic, supported on F_minus, with all atoms < 1/2."""
    if not nu.is_atomic:
        raise PreconditionError("skewness measure must be atomic (no density part)")
    rep = validate_atoms(nu)
    if not rep:
        raise PreconditionError("; ".join(rep.problems))
    _, f_minus = zero_sets(f)
    off = [a for a in nu.atoms if a not in f_minus]
    if off:
        raise PreconditionError(f"skewness atoms {off} lie outside F_minus = {f_minus}")


def verdicts(f: PiecewisePower, b: PiecewisePower, nu: LocalSignedMeasure | None = None) -> WellPosednessReport:
    nu = nu if nu is not None else LocalSignedMeasure.zero()
    check_skewness(f, nu)
    N = zero_set(b)
    E_b = singular_set(b)
    E = singular_set_ratio(b, f)
    exists = E.issubset(N)
    unique = E == N
    return WellPosednessReport(N, E_b, E, True, [], {
        "symmetric_exists": exists, "symmetric_unique": unique,
        "skew_exists": exists, "skew_unique": unique})


def image_identity(f: PiecewisePower, b: PiecewisePower) -> dict:
    """Compare N/E of sigma computed in Y-space with G-images of N_b, E_{b/sqrt f}."""
    t = SpaceTransform(f)
    N_direct, E_direct = sigma_sets(t, b)
    N_mapped = zero_set(b).map(t.G)
    E_mapped = singular_set_ratio(b, f).map(t.G)
    return {"N_direct": N_direct, "N_mapped": N_mapped, "E_direct": E_direct,
            "E_mapped": E_mapped, "ok": N_direct == N_mapped and E_direct == E_mapped}


__all__ = ["INF", "Interval", "PointAndIntervalSet", "zero_set", "singular_set",
           "singular_set_ratio", "sigma_sets", "verdicts", "image_identity",
           "WellPosednessReport", "check_skewness", "PreconditionError"]
