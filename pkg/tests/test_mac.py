import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from vanet_safety.errors import CsBelowValidity, TooManyInterferers, WrongFading
from vanet_safety.mac import (CsConfig, cs_components, cs_validity_floor, LinkScenario, SlotMode, asyncize, count_hidden_nodes,
                              cs_access_probability, ps_carrier_sense, ps_enumeration_oracle,
                              ps_nakagami_laplace, ps_nakagami_mc, ps_rayleigh_exact,
                              regularized_upper_gamma)
from vanet_safety.propagation import FadingModel, PathLoss, interference_radius
from vanet_safety.validation import random_link, single_interferer_quadrature

BETA_8DB = 10 ** 0.8


def link(r, pairs, beta=BETA_8DB, alpha=2.0, fading=None):
    return LinkScenario.from_pairs(r, pairs, beta=beta, pathloss=PathLoss(alpha),
                                   fading=fading or FadingModel.rayleigh())


# -- incomplete gamma --------------------------------------------------------

@pytest.mark.parametrize("m", [1, 2, 3, 7])
def test_poisson_sum_matches_scipy(m):
    x = np.array([0.0, 1e-6, 0.3, 2.5, 11.0, 60.0])
    assert np.allclose(regularized_upper_gamma(m, x), special.gammaincc(m, x), rtol=1e-12, atol=1e-300)


# -- Rayleigh closed form and enumeration -------------------------------------

def test_rayleigh_no_interferers():
    assert ps_rayleigh_exact(link(25, [])) == 1.0
    assert ps_enumeration_oracle(link(25, [])) == 1.0


def test_rayleigh_single_interferer_example():
    got = ps_rayleigh_exact(link(25, [(50, 0.1)]))
    assert got == pytest.approx(0.9 + 0.1 / (1 + BETA_8DB * 0.25), rel=1e-14)
    assert got == pytest.approx(0.93880, abs=5e-6)


def test_far_interferers_do_not_matter():
    far = link(25, [(1e12, 1.0)] * 4)
    assert ps_rayleigh_exact(far) == pytest.approx(1.0, abs=1e-15)


def test_rayleigh_requires_m1():
    with pytest.raises(WrongFading):
        ps_rayleigh_exact(link(25, [(50, 0.1)], fading=FadingModel.nakagami(2)))


def test_enumeration_limit():
    with pytest.raises(TooManyInterferers):
        ps_enumeration_oracle(link(25, [(50, 0.1)] * 21))


def test_symmetric_pair_matches():
    lk = link(30, [(45, 0.2), (45, 0.2)])
    assert ps_enumeration_oracle(lk) == pytest.approx(ps_rayleigh_exact(lk), abs=1e-12)


def test_random_scenarios_match_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(50):
        lk = random_link(rng, n_max=12)
        assert abs(ps_enumeration_oracle(lk) - ps_rayleigh_exact(lk)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(probs=st.lists(st.floats(0, 1), min_size=1, max_size=8), bump=st.floats(0.0, 1.0),
       which=st.integers(0, 7), beta=st.floats(0.1, 100))
def test_closed_form_monotone(probs, bump, which, beta):
    n = len(probs)
    dist = [20.0 + 15 * k for k in range(n)]
    base = link(40, list(zip(dist, probs)), beta=beta)
    v = ps_rayleigh_exact(base)
    assert 0.0 <= v <= 1.0
    higher = list(probs)
    i = which % n
    higher[i] = min(1.0, higher[i] + bump)
    assert ps_rayleigh_exact(base.with_probs(higher)) <= v + 1e-15
    assert ps_rayleigh_exact(link(40, list(zip(dist, probs)), beta=beta * 1.1)) <= v + 1e-15


# -- Monte Carlo estimator ------------------------------------------------------

def test_mc_silent_interferers_give_one():
    est = ps_nakagami_mc(link(25, [(30, 0.0), (60, 0.0)], fading=FadingModel.nakagami(3)), 1000, 1)
    assert est.value == 1.0
    assert est.std_error == 0.0


def test_mc_converges_to_closed_form():
    rng = np.random.default_rng(11)
    inside = 0
    for k in range(10):
        lk = random_link(rng, n_max=10)
        est = ps_nakagami_mc(lk, 100_000, np.random.default_rng([11, k]))
        inside += abs(est.value - ps_rayleigh_exact(lk)) <= 4 * est.std_error + 1e-15
    assert inside >= 9


def test_mc_nakagami3_against_quadrature():
    # one always-on interferer at the same distance with beta = 1: P(h > h1) = 1/2
    lk = link(25, [(25, 1.0)], beta=1.0, fading=FadingModel.nakagami(3))
    ref = single_interferer_quadrature(3, 1.0, 1.0)
    assert ref == pytest.approx(0.5, abs=1e-10)
    est = ps_nakagami_mc(lk, 100_000, 3)
    assert abs(est.value - ref) <= 4 * est.std_error


def test_mc_independent_of_chunking():
    lk = link(25, [(30, 0.3), (55, 0.5)], fading=FadingModel.nakagami(2))
    a = ps_nakagami_mc(lk, 5000, 9, chunk=5000)
    b = ps_nakagami_mc(lk, 5000, 9, chunk=5000)
    assert a == b


def test_mc_common_random_numbers_monotone():
    lo = link(25, [(30, 0.2), (55, 0.4)], fading=FadingModel.nakagami(3))
    hi = lo.with_probs([0.4, 0.6])
    a = ps_nakagami_mc(lo, 50_000, 21).value
    b = ps_nakagami_mc(hi, 50_000, 21).value
    assert b <= a


def test_no_fading_mc_is_threshold_indicator():
    # interferer at 2r with beta = 2: SIR = 2**alpha = 4 > 2 always succeeds
    lk = link(10, [(20, 1.0)], beta=2.0, fading=FadingModel.none())
    assert ps_nakagami_mc(lk, 100, 0).value == 1.0
    lk = link(10, [(20, 1.0)], beta=5.0, fading=FadingModel.none())
    assert ps_nakagami_mc(lk, 100, 0).value == 0.0


# -- exact Nakagami via Laplace transform ---------------------------------------

def test_laplace_form_reduces_to_rayleigh():
    rng = np.random.default_rng(8)
    for _ in range(20):
        lk = random_link(rng)
        assert ps_nakagami_laplace(lk) == pytest.approx(ps_rayleigh_exact(lk), abs=1e-13)


@pytest.mark.parametrize("m, beta, ratio", [(2, 2.0, 1.0), (3, 1.0, 1.0), (4, 0.5, 3.0), (3, 6.3, 0.2)])
def test_laplace_form_single_interferer_quadrature(m, beta, ratio):
    r1 = 25.0 / ratio ** 0.5
    lk = link(25, [(r1, 1.0)], beta=beta, fading=FadingModel.nakagami(m))
    assert ps_nakagami_laplace(lk) == pytest.approx(single_interferer_quadrature(m, beta, ratio), abs=1e-9)


def test_laplace_form_matches_mc_multi_interferer():
    lk = link(60, [(25, 0.3), (50, 0.2), (75, 0.6), (120, 0.9)], fading=FadingModel.nakagami(3))
    est = ps_nakagami_mc(lk, 200_000, 4)
    assert abs(ps_nakagami_laplace(lk) - est.value) <= 4 * est.std_error


# -- unsynchronised slots --------------------------------------------------------

def test_asyncize_examples():
    assert asyncize(0.0) == 0.0
    assert asyncize(1.0) == 1.0
    assert asyncize(0.05) == pytest.approx(0.0975, rel=1e-14)
    assert asyncize(0.05, approx=True) == pytest.approx(0.10)


@given(st.floats(0, 1))
def test_asyncize_bounds(p):
    v = asyncize(p)
    assert p - 1e-15 <= v <= min(2 * p, 1.0) + 1e-15
    assert v <= asyncize(p, approx=True) + 1e-15


# -- carrier sensing ----------------------------------------------------------

def test_cs_access_examples():
    assert cs_access_probability(0.05, [0.05] * 4) == pytest.approx(0.0407253125, rel=1e-12)
    assert cs_access_probability(0.3, []) == 0.3
    assert cs_access_probability(0.3, [0.1, 1.0]) == 0.0


def test_count_hidden_nodes_examples():
    assert count_hidden_nodes(25, 25, 100, 125) == 0
    assert count_hidden_nodes(25, 25, 100, 400) == 0
    assert count_hidden_nodes(25, 25, 100, 100) == 1
    assert count_hidden_nodes(25, 25, 100, 60) == 2


def lattice_oracle(spacing, rx_index, extent, p, p_t, r_i, r_cs, asynchronous):
    """Enumerate lattice positions by hand: sensed (<= r_CS from tx) and hidden."""
    rx = rx_index * spacing
    sensed, hidden = [], []
    for k in range(-extent, extent + 1):
        if k in (0, rx_index):
            continue
        x = k * spacing
        if abs(x) <= r_cs:
            sensed.append(p)
        elif abs(x - rx) <= r_i:
            hidden.append(2 * p - p * p if asynchronous else p)
    value = p_t
    for q in sensed:
        value *= 1 - q
    return value * max(0.0, 1 - sum(hidden)), len(sensed), len(hidden)


def test_cs_lattice_example():
    lk = LinkScenario.lattice(25, 1, extent=40, p=0.05)
    cs = CsConfig(r_cs=100, slot_mode="async", p_t=0.05, r_i=100)
    got = ps_carrier_sense(lk, cs).value
    ref, n_cs, n_hidden = lattice_oracle(25, 1, 40, 0.05, 0.05, 100, 100, True)
    assert (n_cs, n_hidden) == (7, 1)
    assert ref == pytest.approx(0.05 * 0.95 ** 7 * (1 - 0.0975), rel=1e-14)
    assert got == pytest.approx(ref, rel=1e-14)
    assert got == pytest.approx(0.031512470486, rel=1e-10)


def test_cs_beyond_optimal_radius_only_access_term():
    lk = LinkScenario.on_lane(np.arange(2, 10) * 25.0, 25.0, 0.05)   # 8 vehicles behind the receiver
    r_i = interference_radius(25, BETA_8DB, 2, FadingModel.rayleigh())
    # sensing reaches the whole lane: only the access term survives
    got = ps_carrier_sense(lk, CsConfig(r_cs=1000.0, p_t=0.05, r_i=r_i)).value
    assert got == pytest.approx(0.05 * 0.95 ** 8, rel=1e-12)
    assert got == pytest.approx(0.03317102156445311, rel=1e-12)


def test_cs_silent_channel():
    lk = LinkScenario.lattice(25, 1, extent=10, p=0.0)
    assert ps_carrier_sense(lk, CsConfig(r_cs=150, p_t=1.0)).value == 1.0


def test_cs_below_validity_raises():
    lk = LinkScenario.lattice(25, 1, extent=10, p=0.05)
    with pytest.raises(CsBelowValidity):
        ps_carrier_sense(lk, CsConfig(r_cs=50, p_t=0.05, r_i=100))


def test_cs_sync_vs_async():
    lk = LinkScenario.lattice(25, 1, extent=40, p=0.05)
    sync = ps_carrier_sense(lk, CsConfig(100, SlotMode.SYNC, 0.05, r_i=100)).value
    ref, *_ = lattice_oracle(25, 1, 40, 0.05, 0.05, 100, 100, False)
    assert sync == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("rx_index, p", [(1, 0.05), (2, 0.1), (1, 0.2)])
def test_cs_matches_lattice_oracle_over_radii(rx_index, p):
    spacing = 25.0
    lk = LinkScenario.lattice(spacing, rx_index, extent=60, p=p)
    r = rx_index * spacing
    r_i = interference_radius(r, BETA_8DB, 2, FadingModel.rayleigh())
    lo = max(r_i - r, (r + r_i) / 2)
    for r_cs in np.linspace(lo, r + r_i + 60, 25):
        got = ps_carrier_sense(lk, CsConfig(r_cs, "async", p)).value
        ref, *_ = lattice_oracle(spacing, rx_index, 60, p, p, r_i, r_cs, True)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("rx_index, p", [(1, 0.05), (2, 0.1)])
def test_cs_hidden_outage_vanishes_at_r_plus_ri(rx_index, p):
    lk = LinkScenario.lattice(25, rx_index, extent=60, p=p)
    r = rx_index * 25.0
    r_i = interference_radius(r, BETA_8DB, 2, FadingModel.rayleigh())
    grid = np.linspace(cs_validity_floor(r, r_i), r + r_i + 100, 60)
    parts = [cs_components(lk, CsConfig(x, "async", p)) for x in grid]
    access = np.array([a for a, _ in parts])
    given = np.array([g for _, g in parts])
    assert np.all(np.diff(given) >= -1e-15)
    assert np.all(np.diff(access) <= 1e-15)
    assert np.all(given[grid >= r + r_i] == 1.0)
    assert np.all(given[grid < r + r_i - 25] < 1.0)
    # r + r_I is the smallest radius with no hidden-node outage
    assert cs_components(lk, CsConfig(r + r_i, "async", p))[1] == 1.0


def test_lane_link_validation():
    with pytest.raises(ValueError):
        LinkScenario(r=10, distances=[5.0], probs=[1.5])
    with pytest.raises(ValueError):
        LinkScenario(r=10, distances=[5.0], probs=[0.1], lane=[100.0])
    lk = LinkScenario.on_lane([-25.0, 50.0], 25.0, 0.1)
    assert lk.distances == (50.0, 25.0)
    with pytest.raises(ValueError):
        ps_carrier_sense(link(25, [(50, 0.1)]), CsConfig(100))
