import json
import math

import numpy as np
import pytest
from scipy import stats

from oracles import scipy_loglik
from stocknet.distfit import (DegenerateFitError, Family, FamilyConfig, fit_mle,
                              segment_fits, segment_objective, select_family)


def test_constant_sample_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_mle([1.0] * 6, "normal")
    with pytest.raises(DegenerateFitError):
        fit_mle([0.3], "exponential")


def test_exponential_rate():
    fit = fit_mle([0.1, 0.2, 0.3, 0.4], "exponential")
    assert fit.params["rate"] == pytest.approx(4.0)


def test_rayleigh_scale():
    fit = fit_mle([0.1, 0.3], Family.RAYLEIGH)
    assert fit.params["scale"] ** 2 == pytest.approx(0.025, rel=1e-12)


def test_normal_is_biased_variance():
    fit = fit_mle([0.1, 0.2, 0.6], "normal")
    assert fit.params["variance"] == pytest.approx(np.var([0.1, 0.2, 0.6]))


def test_zero_values_are_nudged():
    fit = fit_mle([0.0, 0.2, 0.4], "rayleigh")
    assert math.isfinite(fit.loglik)


def test_poisson_quantized():
    xs = np.array([0.11, 0.14, 0.2, 0.09])
    fit = fit_mle(xs, "poisson-quantized")
    counts = np.rint(100 * xs)
    assert fit.params["mean_count"] == pytest.approx(counts.mean())
    assert fit.loglik == pytest.approx(stats.poisson.logpmf(counts, counts.mean()).sum())


@pytest.mark.parametrize("family", ["normal", "exponential", "rayleigh"])
def test_loglik_matches_scipy(family):
    xs = np.random.default_rng(3).beta(2, 7, size=50)
    assert fit_mle(xs, family).loglik == pytest.approx(scipy_loglik(xs, family), rel=1e-10)


def _perturbed_logliks(fit, xs):
    p = fit.params
    for f in (0.99, 1.01):
        if fit.family is Family.NORMAL:
            sd = math.sqrt(p["variance"])
            yield stats.norm.logpdf(xs, p["mean"] * f, sd).sum()
            yield stats.norm.logpdf(xs, p["mean"], sd * f).sum()
        elif fit.family is Family.EXPONENTIAL:
            yield stats.expon.logpdf(xs, 0, 1 / (p["rate"] * f)).sum()
        else:
            yield stats.rayleigh.logpdf(xs, 0, p["scale"] * f).sum()


@pytest.mark.parametrize("family", ["normal", "exponential", "rayleigh"])
def test_mle_is_local_maximum(family):
    rng = np.random.default_rng(42)
    for _ in range(100):
        xs = rng.beta(rng.uniform(1, 5), rng.uniform(2, 10), size=int(rng.integers(5, 80)))
        fit = fit_mle(xs, family)
        for ll in _perturbed_logliks(fit, xs):
            assert ll <= fit.loglik + 1e-9 * abs(fit.loglik)


def test_select_family_singleton_and_mixed():
    xs = np.random.default_rng(0).random(30)
    assert select_family(xs, ["normal"]) is Family.NORMAL
    with pytest.raises(ValueError):
        select_family(xs, ["normal", "poisson-quantized"])
    assert select_family(xs, ["poisson-quantized"]) is Family.POISSON


@pytest.mark.parametrize("draw, expected", [
    (lambda rng: rng.exponential(1 / 5, 500), Family.EXPONENTIAL),
    (lambda rng: rng.normal(0.5, 0.01, 500), Family.NORMAL),
    (lambda rng: rng.rayleigh(0.2, 500), Family.RAYLEIGH),
])
def test_select_family_recovers_generator(draw, expected):
    hits = sum(select_family(draw(np.random.default_rng(s))) is expected for s in range(100))
    assert hits > 95


def test_fit_result_json():
    d = fit_mle([0.1, 0.3, 0.2], "normal").to_dict()
    assert json.loads(json.dumps(d))["family"] == "normal"


def test_segment_objective_peaks_at_cluster_boundary():
    rng = np.random.default_rng(0)
    xs = np.sort(np.concatenate([rng.normal(0.1, 0.01, 10), rng.normal(0.6, 0.01, 10)]))
    cfg = FamilyConfig(weak="normal", strong="normal", m_min=3)
    values = {u: segment_objective(xs, u, cfg) for u in range(3, 18)}
    assert max(values, key=values.get) == 10


def test_segment_objective_is_sum_of_fits():
    xs = np.sort(np.random.default_rng(1).beta(2, 8, 30))
    for cfg in (FamilyConfig(), FamilyConfig("auto", "auto"), FamilyConfig("rayleigh", "normal")):
        for u in range(5, 26):
            w, s = cfg.fit(xs[:u], "weak"), cfg.fit(xs[u:], "strong")
            assert segment_objective(xs, u, cfg) == w.loglik + s.loglik


def test_segment_objective_never_below_single_fit():
    xs = np.sort(np.random.default_rng(2).normal(0.3, 0.05, 200))
    cfg = FamilyConfig("normal", "normal")
    whole = fit_mle(xs, "normal").loglik
    for u in range(5, 196):
        assert segment_objective(xs, u, cfg) >= whole


def test_segment_objective_errors_and_sentinel():
    xs = np.linspace(0.1, 0.9, 12)
    with pytest.raises(ValueError):
        segment_objective(xs, 4)
    with pytest.raises(ValueError):
        segment_objective(xs, 8)
    flat = np.array([0.2] * 6 + list(np.linspace(0.3, 0.8, 6)))
    assert segment_objective(flat, 6) == -math.inf
    assert segment_fits(flat, 6)[0] is None
    assert math.isfinite(segment_objective(flat, 7))


def test_family_config_validation():
    with pytest.raises(ValueError):
        FamilyConfig(weak="gamma")
    with pytest.raises(ValueError):
        FamilyConfig(candidates=("normal", "poisson-quantized"))
    with pytest.raises(ValueError):
        FamilyConfig(m_min=1)
