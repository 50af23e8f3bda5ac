import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from singdrift import harness as hs
from singdrift.harness import Check, HarnessError, McStats, Observation, ScenarioCatalogEntry


def skew_sample(p, n, seed):
    rng = np.random.default_rng(seed)
    return np.abs(rng.standard_normal(n)) * np.where(rng.random(n) < p, 1.0, -1.0)


def test_ks_needs_100_samples():
    with pytest.raises(HarnessError, match="at least 100"):
        hs.ks_test(np.zeros(99), stats.norm.cdf)
    with pytest.raises(HarnessError, match="reference"):
        hs.ks_test(np.zeros(200), np.zeros(50))


def test_ks_self_consistency_uniform():
    u = np.random.default_rng(0).random(20_000)
    r = hs.ks_test(u, stats.uniform.cdf)
    assert r and r.statistic < r.critical


def test_ks_two_sample_same_law():
    rng = np.random.default_rng(1)
    assert hs.ks_test(rng.standard_normal(500), rng.standard_normal(700))


def test_ks_power_skew_vs_symmetric():
    x = skew_sample(0.75, 20_000, 2)
    assert not hs.ks_test(x, hs.skew_normal_cdf(0.5))
    assert hs.ks_test(x, hs.skew_normal_cdf(0.75))


def test_ks_critical_value():
    # sqrt(-ln(alpha/2)/2) at alpha = 0.01 is 1.6276
    assert hs.ks_critical(10_000) == pytest.approx(1.62762 / 100, rel=1e-4)
    assert hs.ks_critical(100, 100) == pytest.approx(1.62762 * math.sqrt(0.02), rel=1e-4)


def test_skew_normal_cdf_shape():
    F = hs.skew_normal_cdf(0.75)
    assert F(0.0) == pytest.approx(0.25)
    assert F(-40.0) == 0.0 and F(40.0) == pytest.approx(1.0)
    assert np.all(np.diff(F(np.linspace(-5, 5, 101))) >= 0)
    np.testing.assert_allclose(hs.skew_normal_cdf(0.5)(np.linspace(-3, 3, 13)),
                               stats.norm.cdf(np.linspace(-3, 3, 13)), atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=300), st.integers(1, 60))
def test_mcstats_invariants(xs, bins):
    m = McStats.from_samples(xs, bins=bins)
    assert m.n == len(xs) and int(m.hist_counts.sum()) == len(xs)
    assert m.se == pytest.approx(math.sqrt(m.variance / m.n), nan_ok=True)
    assert len(m.hist_edges) == bins + 1


def test_mcstats_with_ks_and_dict():
    x = np.random.default_rng(3).standard_normal(1000)
    d = McStats.from_samples(x, cdf=stats.norm.cdf).to_dict()
    assert d["ks"]["pass"] and set(d) == {"n", "mean", "variance", "se", "histogram", "ks"}


def test_batch_se_close_to_iid_se():
    x = np.random.default_rng(4).standard_normal(100_000)
    assert hs.batch_se(x) == pytest.approx(x.std() / math.sqrt(len(x)), rel=0.3)
    assert math.isnan(hs.batch_se([1.0]))


def _check(**kw):
    base = dict(name="c", statistic="s", target=0.0, tolerance=1.0, kind="abs", provenance="theory",
                anchor="a", compute=lambda ctx: Observation(0.0))
    base.update(kw)
    return Check(**base)


@pytest.mark.parametrize("kw, msg", [(dict(provenance="folklore"), "provenance"),
                                     (dict(anchor=""), "missing anchor"),
                                     (dict(kind="roughly"), "unknown kind")])
def test_lint_refuses(kw, msg):
    with pytest.raises(HarnessError, match=msg):
        hs.lint_catalog([ScenarioCatalogEntry("e", None, (_check(**kw),))])
    with pytest.raises(HarnessError):
        hs.run_catalog("all", entries=[ScenarioCatalogEntry("e", None, (_check(**kw),))])


def test_shipped_catalog_lints():
    entries = hs.build_catalog()
    hs.lint_catalog(entries)
    names = [c.name for e in entries for c in e.checks]
    assert len(names) == len(set(names)) == 23


def test_select_unknown():
    with pytest.raises(HarnessError, match="unknown catalog selection"):
        hs.select(hs.build_catalog(), ["nope"])
    assert len(hs.select(hs.build_catalog(), "skew-bm")) == 3
    assert len(hs.select(hs.build_catalog(), ["gnu-residuals"])) == 1


@pytest.mark.parametrize("kind, value, se, ok", [("k_se", 1.2, 0.1, True), ("k_se", 1.4, 0.1, False),
                                                 ("abs", 0.9, None, True), ("below", 0.99, None, True),
                                                 ("below", 1.0, None, False), ("exact", 0.0, None, True),
                                                 ("exact", 1e-300, None, False)])
def test_judge(kind, value, se, ok):
    c = _check(kind=kind, target=1.0 if kind == "k_se" else 0.0, tolerance=3.0 if kind == "k_se" else 1.0)
    assert c.judge(Observation(value, se)) is ok
    assert not c.judge(Observation(math.nan, se))


def test_deterministic_checks_pass():
    rep = hs.run_catalog(["gnu", "transform", "wellposed"], seed=0)
    assert rep["summary"] == {"n_checks": 6, "n_failed": 0, "pass": True}


def test_run_catalog_reproducible():
    a = hs.report_json(hs.run_catalog(["skew-bm", "drift-reduction"], seed=7, scale=0.01))
    b = hs.report_json(hs.run_catalog(["skew-bm", "drift-reduction"], seed=7, scale=0.01))
    c = hs.report_json(hs.run_catalog(["skew-bm", "drift-reduction"], seed=8, scale=0.01))
    assert a == b and a != c


def test_report_table():
    rep = {"checks": [{"name": "x", "observed": 0.5, "target": 0.5, "tolerance": 0.1, "pass": True},
                      {"name": "y", "observed": 3.0, "target": 0.0, "tolerance": 1.0, "pass": False}],
           "summary": {"n_checks": 2, "n_failed": 1, "pass": False}}
    lines = hs.report_table(rep).splitlines()
    assert lines[1].endswith("PASS") and lines[2].endswith("FAIL") and lines[-1] == "1/2 checks passed"
