import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singdrift.coeffspec import INF, PiecewisePower, PowerPiece
from singdrift.measures import (LocalSignedMeasure, MeasureError, drift_function_from_measure,
                                drift_measure_from_f, pushforward, residual_g_nu, solve_g_nu,
                                validate_atoms)
from singdrift.transform import SpaceTransform

from conftest import f_delta

MIXED = LocalSignedMeasure({-1.0: 0.2, 0.5: -0.3},
                           PiecewisePower([PowerPiece(-INF, 0.0, 0.25), PowerPiece(0.0, INF, -0.5)]))


def test_validate_atoms():
    assert validate_atoms(LocalSignedMeasure.atom(0.0, 1 / 3))
    rep = validate_atoms(LocalSignedMeasure.atom(0.0, 0.5))
    assert not rep and "reflecting barrier" in rep.problems[0]
    rep = validate_atoms(LocalSignedMeasure.atom(0.0, 0.6))
    assert not rep and "no solution in general" in rep.problems[0]


def test_solve_rejects_big_atoms():
    with pytest.raises(MeasureError):
        solve_g_nu(LocalSignedMeasure.atom(0.0, 0.5))


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1 / 3, 0.25])
def test_single_atom_closed_form(alpha):
    g = solve_g_nu(LocalSignedMeasure.atom(0.0, alpha))
    assert g(-1.0) == 1.0
    assert g(0.0) == pytest.approx(1 - 2 * alpha, abs=1e-15)
    assert g(0.0, side="left") == 1.0
    assert g(7.0) == pytest.approx(1 - 2 * alpha, abs=1e-15)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
def test_constant_density_closed_form(beta):
    g = solve_g_nu(LocalSignedMeasure.constant_density(beta))
    xs = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(g(xs), np.exp(-2 * beta * xs), rtol=1e-14)


def test_zero_measure():
    assert solve_g_nu(LocalSignedMeasure.zero())(3.0) == 1.0
    assert residual_g_nu(LocalSignedMeasure.zero(), lambda x, side="right": np.ones_like(np.asarray(x))) == 0.0


@pytest.mark.parametrize("nu", [LocalSignedMeasure.atom(0.0, a) for a in (-0.5, 0.0, 1 / 3, 0.25)]
                         + [LocalSignedMeasure.constant_density(b) for b in (0.0, 0.5, 1.0)] + [MIXED])
def test_residual_below_threshold(nu):
    assert residual_g_nu(nu, solve_g_nu(nu)) < 1e-10


def test_residual_of_wrong_candidate():
    # g = 1 against density 1: the right-hand side is 1 - 2x on both sides of 0
    nu = LocalSignedMeasure.constant_density(1.0)
    ones = lambda x, side="right": np.ones_like(np.asarray(x))  # noqa: E731
    assert residual_g_nu(nu, ones, 0.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert residual_g_nu(nu, ones) == pytest.approx(20.0, abs=1e-10)
    assert residual_g_nu(nu, ones) > 1 - math.exp(-2)


def test_drift_measure_step(skew_f):
    nu = drift_measure_from_f(skew_f)
    assert nu.atoms == {0.0: pytest.approx(1 / 3)} and nu.is_atomic
    g = solve_g_nu(nu)
    assert g(1.0) * skew_f(1.0) == pytest.approx(1.0)
    assert g(-1.0) * skew_f(-1.0) == 1.0


def test_drift_measure_exponential():
    nu = drift_measure_from_f(PiecewisePower.exponential(1.0, 2 * 0.7))
    assert nu.density(3.0) == pytest.approx(0.7) and not nu.atoms


def test_drift_measure_constant():
    assert drift_measure_from_f(PiecewisePower.constant(2.5)) == LocalSignedMeasure.zero()


def test_drift_measure_rejects_zeros(bessel_f):
    with pytest.raises(MeasureError, match="sigma-finite"):
        drift_measure_from_f(bessel_f)


def test_drift_function_from_measure():
    f = drift_function_from_measure(LocalSignedMeasure.constant_density(0.5))
    assert f(0.0) == 1.0 and f(1.0) == pytest.approx(math.e)
    f = drift_function_from_measure(MIXED)
    g = solve_g_nu(MIXED)
    xs = np.linspace(-4, 4, 161)
    np.testing.assert_allclose(f(xs) * g(xs), 1.0, rtol=1e-14)


def test_pushforward(bessel_f):
    t = SpaceTransform(f_delta(1.5))
    assert pushforward(LocalSignedMeasure.atom(0.0, 0.25), t.G).atoms == {0.0: 0.25}
    assert pushforward(LocalSignedMeasure.atom(1.0, 0.25), t.G).atoms == {2.0: 0.25}
    assert pushforward(LocalSignedMeasure.zero(), t.G) == LocalSignedMeasure.zero()


def test_measure_dict_roundtrip():
    assert LocalSignedMeasure.from_dict(MIXED.to_dict()) == MIXED
    with pytest.raises(MeasureError):
        LocalSignedMeasure.from_dict({"atom": []})


# -- properties --------------------------------------------------------------------

steps = st.lists(st.tuples(st.floats(-3, 3), st.floats(0.2, 5.0)), min_size=1, max_size=4,
                 unique_by=lambda t: round(t[0], 6))


@settings(max_examples=40, deadline=None)
@given(steps, st.floats(-1, 1))
def test_duality_roundtrip(levels, rate):
    # f piecewise exponential with jumps; the equation pins g(0-) = 1, so normalise f(0-) = 1
    levels = sorted(levels)
    cuts = [c for c, _ in levels]
    edges = [-INF, *cuts, INF]
    vals = [levels[0][1], *(v for _, v in levels)]
    pieces = [PowerPiece(l, r, v, rate=rate) for (l, r), v in zip(zip(edges[:-1], edges[1:]), vals)]
    f = PiecewisePower(pieces)
    f0 = f(0.0, side="left")
    f = PiecewisePower([PowerPiece(p.l, p.r, p.coeff / f0, rate=p.rate) for p in f.pieces])
    g = solve_g_nu(drift_measure_from_f(f))
    xs = np.linspace(-5, 5, 1001)
    np.testing.assert_allclose(g(xs), 1.0 / f(xs), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.floats(-5, 5), st.floats(0.0, 0.45), max_size=3), st.floats(0, 2))
def test_g_positive_and_decreasing(atoms, beta):
    g = solve_g_nu(LocalSignedMeasure(atoms, PiecewisePower.constant(beta)))
    xs = np.linspace(-6, 6, 601)
    v = g(xs)
    assert np.all(v > 0)
    assert np.all(np.diff(v) <= 1e-15 * v[:-1])
