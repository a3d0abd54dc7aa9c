import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from vanet_safety.errors import DivergentMoment
from vanet_safety.propagation import (FadingModel, PathLoss, db_to_linear, fractional_moment,
                                      interference_radius, sample_fading)

BETA_8DB = 10 ** 0.8


def test_no_fading_sample_is_one(rng):
    assert sample_fading(FadingModel.none(), rng) == 1.0
    assert np.all(sample_fading(FadingModel.none(), rng, size=5) == 1.0)


def test_rayleigh_samples_have_unit_mean(rng):
    h = sample_fading(FadingModel.rayleigh(), rng, size=10 ** 6)
    assert np.all(h >= 0)
    assert abs(h.mean() - 1.0) < 0.01


def test_nakagami3_variance(rng):
    h = sample_fading(FadingModel.nakagami(3), rng, size=10 ** 6)
    # sampling s.d. of the variance estimator, from the gamma 4th central moment
    ref = stats.gamma(a=3, scale=1 / 3)
    mu4 = ref.moment(4) - 4 * ref.moment(3) * 1 + 6 * ref.moment(2) - 3
    se = math.sqrt((mu4 - (1 / 3) ** 2) / h.size)
    assert abs(h.var() - 1 / 3) < 3 * se
    # an independent sampler agrees in distribution
    other = stats.gamma(a=3, scale=1 / 3).rvs(size=200_000, random_state=7)
    assert stats.ks_2samp(h[:200_000], other).pvalue > 1e-3


def test_rayleigh_power_is_exponential(rng):
    h = sample_fading(FadingModel.rayleigh(), rng, size=10 ** 5)
    stat = stats.kstest(h, "expon").statistic
    assert stat < 1.36 / math.sqrt(h.size)


def test_fading_model_validation():
    with pytest.raises(ValueError):
        FadingModel.nakagami(0)
    with pytest.raises(ValueError):
        FadingModel.nakagami(1.5)
    with pytest.raises(ValueError):
        FadingModel(mean=2.0)
    with pytest.raises(ValueError):
        PathLoss(1.0)


@pytest.mark.parametrize("s, expected", [(0.0, 1.0), (1.0, 1.0)])
def test_rayleigh_moments(s, expected):
    assert fractional_moment(FadingModel.rayleigh(), s) == pytest.approx(expected, rel=1e-14)


def test_fractional_moment_against_quadrature():
    # frozen from quad(h**0.5 * gamma_pdf(h; 3, 1/3))
    assert fractional_moment(FadingModel.nakagami(3), 0.5) == pytest.approx(0.9593687886989386, rel=1e-10)
    for m in (1, 2, 5):
        for s in (-0.4, 0.3, 1.7):
            ref = integrate.quad(lambda h: h ** s * stats.gamma.pdf(h, a=m, scale=1 / m), 0, np.inf)[0]
            assert fractional_moment(FadingModel.nakagami(m), s) == pytest.approx(ref, rel=1e-8)


def test_fractional_moment_diverges():
    with pytest.raises(DivergentMoment):
        fractional_moment(FadingModel.nakagami(2), -2.0)


@given(m=st.integers(1, 8), frac=st.floats(0.01, 0.99))
def test_moment_product_at_least_one(m, frac):
    model = FadingModel.nakagami(m)
    s = frac * m
    assert fractional_moment(model, s) * fractional_moment(model, -s) >= 1 - 1e-12


def test_lgamma_matches_tabulated_values():
    # Gamma(1/2) = sqrt(pi), Gamma(5) = 24, Gamma(7/2) = 15 sqrt(pi) / 8
    assert math.exp(math.lgamma(0.5)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert math.exp(math.lgamma(5)) == pytest.approx(24.0, rel=1e-14)
    assert math.exp(math.lgamma(3.5)) == pytest.approx(15 * math.sqrt(math.pi) / 8, rel=1e-14)
    xs = np.linspace(0.5, 50, 200)
    assert np.allclose([math.lgamma(x) for x in xs], special.gammaln(xs), rtol=1e-12)


def test_interference_radius_examples():
    assert interference_radius(25, BETA_8DB, 2, FadingModel.none()) == pytest.approx(62.7971607877395, rel=1e-12)
    assert interference_radius(25, BETA_8DB, 2, FadingModel.rayleigh()) == pytest.approx(98.64154949852971, rel=1e-12)
    for alpha in (1.5, 2, 3, 4):
        assert interference_radius(40, 1.0, alpha, FadingModel.none()) == 40


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 4.0])
def test_rayleigh_radius_reflection_form(alpha):
    got = interference_radius(25, BETA_8DB, alpha, FadingModel.rayleigh())
    ref = 25 * BETA_8DB ** (1 / alpha) * (math.pi / alpha) / math.sin(math.pi / alpha)
    assert got == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50)
@given(r=st.floats(1, 500), beta=st.floats(0.1, 300), alpha=st.floats(1.2, 5), m=st.integers(1, 6))
def test_radius_monotone(r, beta, alpha, m):
    model = FadingModel.nakagami(m)
    base = interference_radius(r, beta, alpha, model)
    assert interference_radius(r * 1.01, beta, alpha, model) > base
    assert interference_radius(r, beta * 1.01, alpha, model) > base


def test_db_conversion():
    assert db_to_linear(8) == pytest.approx(6.309573444801933)
    assert db_to_linear(0) == 1.0
