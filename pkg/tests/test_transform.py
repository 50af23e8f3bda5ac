import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from singdrift.coeffspec import INF, PiecewisePower, PowerPiece
from singdrift.transform import DomainError, SpaceTransform, sigma_pieces

from conftest import f_delta


def quad_G(f, x):
    """Oracle: integral of 1/f from 0 to x, split at 0 for the anchor singularity."""
    v, _ = integrate.quad(lambda y: 1.0 / f(y), 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)
    return v


def test_bessel_G(bessel_f):
    t = SpaceTransform(bessel_f)
    assert t.G(1.0) == 2.0 and t.G(4.0) == 4.0 and t.G(-1.0) == -2.0
    assert t.components == [(-INF, 0.0), (0.0, INF)]
    for x in (-3.0, 0.3, 2.5):
        assert t.G(x) == pytest.approx(quad_G(bessel_f, x), abs=1e-9)


def test_identity(one):
    t = SpaceTransform(one)
    xs = np.linspace(-5, 5, 11)
    np.testing.assert_array_equal(t.G(xs), xs)
    np.testing.assert_array_equal(t.H(xs), xs)
    assert t.components == [(-INF, INF)]
    r = t.invariant_residuals()
    assert r["roundtrip"] == 0.0 and r["eq8"] < 1e-15


def test_step(skew_f):
    t = SpaceTransform(skew_f)
    assert t.G(-2.0) == -2.0 and t.G(3.0) == pytest.approx(1.0)
    assert t.G_plus_inf == INF and t.G_minus_inf == -INF
    assert t.components == [(-INF, INF)]


def test_G_finite_at_infinity():
    t = SpaceTransform(PiecewisePower.exponential(1.0, 2.0))
    assert t.G_plus_inf == pytest.approx(0.5)
    assert t.G_minus_inf == -INF
    assert t.H(0.5) == INF and t.H(0.7) == INF


def test_H_matches_brentq(bessel_f):
    t = SpaceTransform(bessel_f)
    for y in (-3.0, -0.1, 0.7, 5.0):
        x = optimize.brentq(lambda x: quad_G(bessel_f, x) - y, -50, 50, xtol=1e-14)
        assert t.H(y) == pytest.approx(x, abs=1e-9)


def test_sigma_bessel(bessel_f, one):
    t = SpaceTransform(bessel_f)
    for y in (0.5, 2.0, -3.0):
        assert t.sigma(one, y) == pytest.approx(2.0 / abs(y), rel=1e-14)
    assert t.sigma(one, 2.0) == 1.0
    assert t.sigma(one, 0.0) == INF
    assert t.sigma_tilde(one, 0.0) == 1.0


def test_sigma_identity_and_step(one, skew_f):
    assert SpaceTransform(one).sigma(one, 3.3) == 1.0
    t = SpaceTransform(skew_f)
    assert t.sigma(one, -1.0) == 1.0
    assert t.sigma(one, 1.0) == pytest.approx(1 / 3)
    assert t.sigma(one, 0.0, side="left") == 1.0


def test_sigma_domain_error():
    t = SpaceTransform(PiecewisePower.exponential(1.0, 2.0))
    with pytest.raises(DomainError):
        t.sigma(PiecewisePower.constant(1.0), 0.9)


def test_sigma_zero_b_at_zero_f(bessel_f):
    # 0 * inf = 0: b vanishing where f does gives sigma = 0, not inf
    b = PiecewisePower.symmetric_power(1.0, 0.75)
    assert SpaceTransform(bessel_f).sigma(b, 0.0) == 0.0


@pytest.mark.parametrize("delta", [1.25, 1.5, 1.75])
def test_residuals_bessel_family(delta):
    r = SpaceTransform(f_delta(delta)).invariant_residuals()
    assert r["roundtrip"] < 1e-9 and r["eq8"] < 1e-6


def test_residuals_step(skew_f):
    r = SpaceTransform(skew_f).invariant_residuals(-3, 3)
    assert r["roundtrip"] < 1e-9 and r["eq8"] < 1e-6


def test_image_skeleton(bessel_f):
    t = SpaceTransform(f_delta(1.5))
    assert t.image_skeleton == {"F_plus": [0.0], "F_minus": [0.0]}


def test_sigma_pieces_closed_form(bessel_f, one):
    t = SpaceTransform(bessel_f)
    for pc in sigma_pieces(t, one):
        ys = np.linspace(max(pc.yl, -5), min(pc.yr, 5), 9)[1:-1]
        np.testing.assert_allclose(pc.coeff * np.abs(ys - pc.y0) ** pc.exponent, t.sigma(one, ys), rtol=1e-13)


def test_dump_rows(bessel_f, one):
    rows = SpaceTransform(bessel_f).dump_rows(one, [0.0, 1.0])
    assert rows == [(0.0, 0.0, 0.0, 1.0), (1.0, 2.0, 1.0, 1.0)]


# -- properties ----------------------------------------------------------------------

@st.composite
def drift_functions(draw):
    n = draw(st.integers(1, 4))
    # breakpoints on a coarse grid keep the quadrature oracle away from near-endpoint singularities
    cuts = sorted(draw(st.lists(st.integers(-16, 16), min_size=n - 1, max_size=n - 1, unique=True)))
    edges = [-INF, *(c / 4 for c in cuts), INF]
    pieces = []
    for l, r in zip(edges[:-1], edges[1:]):
        coeff = draw(st.floats(0.2, 4.0))
        finite = [e for e in (l, r) if math.isfinite(e)]
        if finite and draw(st.booleans()):
            pieces.append(PowerPiece(l, r, coeff, draw(st.floats(1e-3, 0.8)),
                                     draw(st.sampled_from(finite))))
        else:
            pieces.append(PowerPiece(l, r, coeff))
    return PiecewisePower(pieces)


@settings(max_examples=50, deadline=None)
@given(drift_functions())
def test_G_strictly_increasing(f):
    xs = np.linspace(-6, 6, 2001)
    assert np.all(np.diff(SpaceTransform(f).G(xs)) > 0)


@settings(max_examples=50, deadline=None)
@given(drift_functions())
def test_roundtrip_property(f):
    t = SpaceTransform(f)
    xs = np.linspace(-5, 5, 401)
    assert np.max(np.abs(t.H(t.G(xs)) - xs)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(drift_functions(), st.floats(-5, 5))
def test_G_against_quadrature(f, x):
    t = SpaceTransform(f)
    pts = sorted({0.0, x, *[c for c in f.breakpoints if min(0, x) < c < max(0, x)]})
    ref = sum(integrate.quad(lambda y: 1.0 / f(y), a, b, epsabs=1e-12, limit=200)[0] for a, b in zip(pts, pts[1:]))
    assert t.G(x) == pytest.approx(math.copysign(ref, x) if x else 0.0, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(drift_functions())
def test_sigma_tilde_finite_and_nonzero_on_skeleton(f):
    t = SpaceTransform(f)
    one = PiecewisePower.constant(1.0)
    ys = np.asarray(t.G(np.linspace(-4, 4, 101)))
    s = t.sigma_tilde(one, ys)
    assert np.all(np.isfinite(s))
    for y in t.image_skeleton["F_plus"]:
        assert t.sigma_tilde(one, y) != 0.0
