import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from singdrift.coeffspec import INF, PiecewisePower, PowerPiece
from singdrift.harness import image_identity_pairs
from singdrift.measures import LocalSignedMeasure
from singdrift.wellposed import (Interval, PointAndIntervalSet, PreconditionError, image_identity,
                                 singular_set, singular_set_ratio, verdicts, zero_set)

GOLDEN = Path(__file__).parent / "golden"
c, sp = PiecewisePower.constant, PiecewisePower.symmetric_power
P = PointAndIntervalSet
# b = 0 on the closed interval [1, 2]: the right end needs an explicit value
ZERO_MID = PiecewisePower([PowerPiece(-INF, 1.0, 1.0), PowerPiece(1.0, 2.0, 0.0), PowerPiece(2.0, INF, 1.0)],
                          {2.0: 0.0})


def diverges(p):
    """Oracle: does the integral of y^(-2p) over (0, 1) diverge?  Checked numerically."""
    # substitute y = exp(-s): integral of exp((2p - 1) s) over s in (0, K)
    tails = [integrate.quad(lambda s: math.exp((2 * p - 1) * s), 0.0, k * math.log(10), limit=200)[0]
             for k in (4, 12)]
    return tails[1] > 2 * tails[0]


def test_divergence_oracle():
    assert not diverges(0.25) and diverges(0.5) and diverges(0.75)


def test_zero_set():
    assert zero_set(sp(1.0, 0.25)) == P([0.0])
    assert zero_set(c(1.0)).is_empty()
    assert zero_set(ZERO_MID) == P([], [Interval(1.0, 2.0)])


def test_singular_set():
    assert singular_set(sp(1.0, 0.25)).is_empty() == (not diverges(0.25))
    assert singular_set(sp(1.0, 0.75)) == P([0.0])
    assert singular_set(c(1.0)).is_empty()
    assert singular_set(sp(1.0, 0.5)) == P([0.0])  # boundary 2p = 1 diverges logarithmically


def test_zero_interval_is_singular_and_closed():
    assert singular_set(ZERO_MID) == P([], [Interval(1.0, 2.0, True, True)])


def test_ratio_exponent_leaves_class():
    # b = |x|^0.75 over sqrt(|x|^0.9): exponent 0.3 and the E-rule still applies
    assert singular_set_ratio(sp(1.0, 0.75), sp(1.0, 0.9)).is_empty()
    assert singular_set_ratio(c(1.0), sp(1.0, 0.9)).is_empty()
    assert singular_set_ratio(sp(1.0, 0.75), sp(1.0, -0.9)) == P([0.0])


def test_verdicts_bessel():
    rep = verdicts(sp(1.0, 0.5), c(1.0), LocalSignedMeasure.atom(0.0, 0.25))
    assert rep.E_bsqrtf.is_empty() and rep.N_b.is_empty()
    assert all(rep.verdicts.values())


def test_verdicts_exists_not_unique():
    v = verdicts(c(1.0), sp(1.0, 0.25)).verdicts
    assert v["symmetric_exists"] and not v["symmetric_unique"]


def test_verdicts_exists_and_unique():
    v = verdicts(c(1.0), sp(1.0, 0.75)).verdicts
    assert v["symmetric_exists"] and v["symmetric_unique"]


def test_verdicts_no_solution():
    # |x|^(3/4) lifted to 1 at 0: E = {0} but no zeros
    b = PiecewisePower(sp(1.0, 0.75).pieces, {0.0: 1.0})
    rep = verdicts(c(1.0), b)
    assert rep.E_bsqrtf == P([0.0]) and rep.N_b.is_empty()
    v = rep.verdicts
    assert not v["symmetric_exists"] and not v["skew_exists"]


def test_verdict_preconditions(skew_f):
    with pytest.raises(PreconditionError, match="outside F_minus"):
        verdicts(skew_f, c(1.0), LocalSignedMeasure.atom(0.0, 0.25))
    with pytest.raises(PreconditionError, match="reflecting"):
        verdicts(sp(1.0, 0.5), c(1.0), LocalSignedMeasure.atom(0.0, 0.5))
    with pytest.raises(PreconditionError, match="atomic"):
        verdicts(sp(1.0, 0.5), c(1.0), LocalSignedMeasure.constant_density(1.0))


@pytest.mark.parametrize("config", ["tests/data/b_quarter.json", "tests/data/b_three_quarter.json",
                                    "skew-bessel-1.5"])
def test_check_report_golden(config, capsys):
    from singdrift.cli import main

    assert main(["check", config]) == 0
    name = config[:-5].split("/")[-1] if config.endswith(".json") else config
    assert capsys.readouterr().out == (GOLDEN / f"check_{name}.json").read_text()


@pytest.mark.parametrize("name", sorted(image_identity_pairs()))
def test_image_identity(name):
    f, b = image_identity_pairs()[name]
    r = image_identity(f, b)
    assert r["N_direct"] == r["N_mapped"] and r["E_direct"] == r["E_mapped"]


def test_canonical_form():
    s = P([0.5, 3.0], [Interval(0.0, 1.0), Interval(1.0, 2.0, False, True)])
    assert s.intervals == (Interval(0.0, 2.0),) and s.points == (3.0,)
    assert P([1.0], [Interval(1.0, 2.0, False, False)]).intervals == (Interval(1.0, 2.0, True, False),)


# -- properties ----------------------------------------------------------------------

exps = st.floats(0.01, 0.99)


@settings(max_examples=60, deadline=None)
@given(exps)
def test_singular_matches_divergence_rule(p):
    assert singular_set(sp(1.0, p)).contains(0.0) == (2 * p >= 1)


@settings(max_examples=60, deadline=None)
@given(exps, exps)
def test_monotone_consistency(p, q):
    # |x|^max <= |x|^min near 0, so the smaller function has the larger E-set
    small, big = sp(1.0, max(p, q)), sp(1.0, min(p, q))
    assert singular_set(big).issubset(singular_set(small))


@settings(max_examples=60, deadline=None)
@given(exps, st.floats(0.0, 0.99))
def test_unique_implies_exists(p, q):
    v = verdicts(sp(1.0, q) if q else c(1.0), sp(1.0, p)).verdicts
    assert v["symmetric_exists"] or not v["symmetric_unique"]
    assert v["skew_exists"] or not v["skew_unique"]
