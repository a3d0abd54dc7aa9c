"""Cross-checks between independent evaluation routes.

Used by ``vanet-safety validate``; each check returns ``(name, passed, detail)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats

from .kinematics import VehicleMotion, pairwise_collision_time
from .mac import (LinkScenario, ps_enumeration_oracle, ps_nakagami_laplace, ps_nakagami_mc,
                  ps_rayleigh_exact)
from .propagation import FadingModel, PathLoss, interference_radius


def random_link(rng, n_max=12, fading=None):
    n = int(rng.integers(0, n_max + 1))
    r = float(rng.uniform(10, 200))
    return LinkScenario(
        r=r,
        distances=rng.uniform(5, 400, size=n),
        probs=rng.uniform(0, 1, size=n),
        beta=float(10 ** (rng.uniform(0, 25) / 10)),
        pathloss=PathLoss(float(rng.uniform(1.5, 4.0))),
        fading=fading or FadingModel.rayleigh(),
    )


def check_rayleigh_enumeration(scenarios=50, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(scenarios):
        link = random_link(rng)
        worst = max(worst, abs(ps_rayleigh_exact(link) - ps_enumeration_oracle(link)))
    return "rayleigh closed form == 2^n enumeration", worst <= 1e-12, f"max |diff| = {worst:.2e}"


def check_rayleigh_mc(scenarios=20, samples=20_000, seed=1):
    rng = np.random.default_rng(seed)
    inside = 0
    for k in range(scenarios):
        link = random_link(rng)
        est = ps_nakagami_mc(link, samples, np.random.default_rng([seed, k]))
        exact = ps_rayleigh_exact(link)
        if abs(est.value - exact) <= 4 * est.std_error + 1e-15:
            inside += 1
    need = scenarios - max(1, scenarios // 25)
    return "m=1 Monte Carlo within 4 s.e. of closed form", inside >= need, f"{inside}/{scenarios}"


def single_interferer_quadrature(m: int, beta: float, ratio: float) -> float:
    """Success probability for one always-on interferer by 1-D quadrature.

    ``ratio`` is ``(r / r_1) ** alpha``; the conditional success given the
    interferer's fading ``h1`` is ``Q(m, m beta ratio h1)``.
    """
    dist = stats.gamma(a=m, scale=1.0 / m)
    f = lambda h: stats.gamma.sf(m * beta * ratio * h, a=m) * dist.pdf(h)
    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    return val


def check_nakagami_quadrature(samples=100_000, seed=2):
    ok = True
    worst = 0.0
    for m, beta in ((3, 1.0), (2, 2.0), (4, 0.5)):
        link = LinkScenario(r=25.0, distances=[25.0], probs=[1.0], beta=beta,
                            pathloss=PathLoss(2.0), fading=FadingModel.nakagami(m))
        ref = single_interferer_quadrature(m, beta, 1.0)
        est = ps_nakagami_mc(link, samples, np.random.default_rng([seed, m]))
        z = abs(est.value - ref) / est.std_error
        worst = max(worst, z)
        ok &= z <= 4 and abs(ps_nakagami_laplace(link) - ref) < 1e-9
    return "Nakagami-m estimator and Laplace form vs quadrature", ok, f"max z = {worst:.2f}"


def check_radius_identity():
    worst = 0.0
    for alpha in (1.5, 2.0, 3.0, 4.0):
        got = interference_radius(1.0, 1.0, alpha, FadingModel.rayleigh())
        ref = (math.pi / alpha) / math.sin(math.pi / alpha)
        worst = max(worst, abs(got - ref) / ref)
    return "Rayleigh r_I gamma ratio == (pi/a) csc(pi/a)", worst <= 1e-12, f"max rel = {worst:.1e}"


def check_kinematics(cases=200, seed=3):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(cases):
        v0 = rng.uniform(5, 35)
        gap = rng.uniform(1, 60)
        a = rng.uniform(3, 10)
        delay = rng.uniform(0, 3)
        t = pairwise_collision_time(VehicleMotion(gap, v0, a, 0.0), VehicleMotion(0.0, v0, a, delay))
        if (t is not None) != (v0 * delay >= gap):
            bad += 1
    return "equal-deceleration pairs match stop-distance rule", bad == 0, f"{bad} mismatches"


ALL_CHECKS = (check_rayleigh_enumeration, check_rayleigh_mc, check_nakagami_quadrature,
              check_radius_identity, check_kinematics)


def run_all():
    return [check() for check in ALL_CHECKS]
