"""Packet-success probability of a broadcast link under interference.

Two channel-access regimes are covered:

* independent slotted p-persistent access, where every other vehicle is an
  interferer active with its own access probability (optionally widened to
  cover two unsynchronised slots), and
* p-persistent access with carrier sensing on a single lane, where vehicles
  inside the sensing radius defer and only hidden nodes can break the link.

Success means the signal-to-interference ratio exceeds ``beta``.  Thermal
noise is ignored.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import CsBelowValidity, TooManyInterferers, WrongFading
from .propagation import FadingKind, FadingModel, PathLoss, interference_radius, sample_fading

__all__ = [
    "LinkScenario",
    "CsConfig",
    "SlotMode",
    "PsEstimate",
    "regularized_upper_gamma",
    "ps_rayleigh_exact",
    "ps_enumeration_oracle",
    "ps_nakagami_mc",
    "ps_nakagami_laplace",
    "asyncize",
    "cs_access_probability",
    "count_hidden_nodes",
    "ps_carrier_sense",
    "cs_components",
    "cs_validity_floor",
    "MAX_ENUMERATION",
]

MAX_ENUMERATION = 20


class SlotMode(str, Enum):
    SYNC = "sync"
    ASYNC = "async"


@dataclass(frozen=True)
class LinkScenario:
    """A transmitter-receiver pair at distance ``r`` plus interferers.

    ``distances[i]`` is the distance from interferer ``i`` to the receiver and
    ``probs[i]`` its per-slot access probability.  ``lane`` optionally holds
    the signed position of each interferer on a one-lane road, measured from
    the transmitter with the receiver at ``+r``; it is needed for carrier
    sensing, where the distance to the transmitter matters too.
    """

    r: float
    distances: tuple = ()
    probs: tuple = ()
    beta: float = 10 ** 0.8
    pathloss: PathLoss = field(default_factory=PathLoss)
    fading: FadingModel = field(default_factory=FadingModel.rayleigh)
    lane: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "distances", tuple(float(d) for d in self.distances))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not isinstance(self.pathloss, PathLoss):
            object.__setattr__(self, "pathloss", PathLoss(float(self.pathloss)))
        if self.r <= 0:
            raise ValueError("link length r must be positive")
        if self.beta <= 0:
            raise ValueError("SIR threshold must be positive")
        if len(self.distances) != len(self.probs):
            raise ValueError("distances and probs must have equal length")
        if any(d <= 0 for d in self.distances):
            raise ValueError("interferer distances must be positive")
        if any(not 0.0 <= p <= 1.0 for p in self.probs):
            raise ValueError("access probabilities must lie in [0, 1]")
        if self.lane is not None:
            lane = tuple(float(x) for x in self.lane)
            if len(lane) != len(self.distances):
                raise ValueError("lane positions must align with interferers")
            if not np.allclose(np.abs(np.subtract(lane, self.r)), self.distances):
                raise ValueError("lane positions disagree with interferer distances")
            object.__setattr__(self, "lane", lane)

    @property
    def n(self) -> int:
        return len(self.distances)

    @classmethod
    def from_pairs(cls, r, interferers: Sequence[tuple[float, float]], **kw) -> "LinkScenario":
        """Build from ``(distance_to_receiver, access_probability)`` pairs."""
        interferers = list(interferers)
        d = [a for a, _ in interferers]
        p = [b for _, b in interferers]
        return cls(r=r, distances=d, probs=p, **kw)

    @classmethod
    def on_lane(cls, positions, rx: float, p, **kw) -> "LinkScenario":
        """Link on a single lane with the transmitter at 0 and receiver at ``rx``.

        ``positions`` are the signed coordinates of every other vehicle
        (transmitter and receiver excluded).  ``p`` is a scalar or one
        probability per position.
        """
        pos = np.asarray(positions, dtype=float)
        probs = np.broadcast_to(np.asarray(p, dtype=float), pos.shape)
        return cls(r=abs(rx), distances=np.abs(pos - rx), probs=probs, lane=pos * np.sign(rx), **kw)

    @classmethod
    def lattice(cls, spacing: float, rx_index: int = 1, extent: int = 40, p=0.0, **kw) -> "LinkScenario":
        """Equal-spacing lane with vehicles at ``k * spacing`` for ``|k| <= extent``.

        The transmitter sits at ``k = 0`` and the receiver at ``k = rx_index``.
        """
        ks = [k for k in range(-extent, extent + 1) if k not in (0, rx_index)]
        return cls.on_lane(np.array(ks) * spacing, rx_index * spacing, p, **kw)

    def with_probs(self, probs) -> "LinkScenario":
        probs = np.broadcast_to(np.asarray(probs, dtype=float), (self.n,))
        return LinkScenario(self.r, self.distances, probs, self.beta, self.pathloss, self.fading, self.lane)

    def gains(self) -> np.ndarray:
        """``(r / r_i) ** alpha`` for every interferer."""
        return (self.r / np.asarray(self.distances, dtype=float)) ** self.pathloss.alpha


@dataclass(frozen=True)
class CsConfig:
    """Carrier-sensing setup for one transmission.

    ``r_i`` overrides the interference radius; by default it is derived from
    the link's fading and threshold.
    """

    r_cs: float
    slot_mode: SlotMode = SlotMode.ASYNC
    p_t: float = 1.0
    r_i: float | None = None
    approx_async: bool = False

    def __post_init__(self):
        if not self.r_cs > 0:
            raise ValueError("carrier-sensing radius must be positive")
        if not 0.0 <= self.p_t <= 1.0:
            raise ValueError("transmitter access probability must lie in [0, 1]")
        object.__setattr__(self, "slot_mode", SlotMode(self.slot_mode))


@dataclass(frozen=True)
class PsEstimate:
    value: float
    std_error: float = 0.0
    samples: int = 0

    @property
    def exact(self) -> bool:
        return self.std_error == 0.0 and self.samples == 0


def regularized_upper_gamma(m: int, x):
    """``Q(m, x) = Gamma(m, x) / Gamma(m)`` for a positive integer ``m``.

    Uses the finite Poisson sum ``exp(-x) * sum_{j<m} x**j / j!``.
    """
    if int(m) != m or m < 1:
        raise ValueError("Poisson-sum form needs a positive integer shape")
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for j in range(1, int(m)):
        term = term * x / j
        total = total + term
    out = np.exp(-x) * total
    return float(out) if out.ndim == 0 else out


def _require_rayleigh(link: LinkScenario):
    if not link.fading.is_rayleigh:
        raise WrongFading(f"closed form needs Rayleigh fading, got {link.fading.label}")


def ps_rayleigh_exact(link: LinkScenario) -> float:
    """Closed-form success probability under Rayleigh fading.

    ``prod_i [1 - p_i + p_i / (1 + beta (r/r_i)**alpha)]``
    """
    _require_rayleigh(link)
    if link.n == 0:
        return 1.0
    p = np.asarray(link.probs)
    return float(np.prod(1.0 - p + p / (1.0 + link.beta * link.gains())))


def ps_enumeration_oracle(link: LinkScenario) -> float:
    """Rayleigh success probability by summing over all 2**n activity patterns.

    Given active set ``A`` the interference is a sum of independent
    exponentials, and the conditional success probability is its Laplace
    transform at ``beta r**alpha``, i.e. ``prod_{i in A} 1/(1 + beta (r/r_i)**alpha)``.
    """
    _require_rayleigh(link)
    n = link.n
    if n > MAX_ENUMERATION:
        raise TooManyInterferers(f"{n} interferers; enumeration is limited to {MAX_ENUMERATION}")
    p = list(link.probs)
    cond = [1.0 / (1.0 + link.beta * g) for g in link.gains()]
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=n):
        weight = 1.0
        success = 1.0
        for i, b in enumerate(pattern):
            if b:
                weight *= p[i]
                success *= cond[i]
            else:
                weight *= 1.0 - p[i]
        total += weight * success
    return total


def ps_nakagami_mc(link: LinkScenario, samples: int, rng, chunk: int = 1 << 16) -> PsEstimate:
    """Monte Carlo estimate of ``E_I[Q(m, m beta r**alpha I)]``.

    Each sample draws interferer activity ``b_i ~ Bernoulli(p_i)`` and fading
    ``h_i``, forms ``I = sum b_i h_i r_i**-alpha`` and averages the conditional
    success probability over the desired signal's fading.  Without fading
    the conditional probability is the indicator ``r**-alpha > beta I``.

    ``rng`` is a ``numpy.random.Generator`` or anything accepted by
    ``numpy.random.default_rng``.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(rng)
    n = link.n
    p = np.asarray(link.probs)
    g = np.asarray(link.distances) ** -link.pathloss.alpha if n else np.zeros(0)
    scale = link.beta * link.r ** link.pathloss.alpha
    fading = link.fading
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        active = rng.random((k, n)) < p
        h = sample_fading(fading, rng, size=(k, n))
        interference = (active * h) @ g
        if fading.kind is FadingKind.NONE:
            vals = (scale * interference < 1.0).astype(float)
        else:
            vals = regularized_upper_gamma(fading.m, fading.m * scale * interference)
            vals = np.atleast_1d(vals)
        s1 += vals.sum()
        s2 += np.dot(vals, vals)
        done += k
    mean = s1 / samples
    if samples > 1:
        var = max(s2 - samples * mean * mean, 0.0) / (samples - 1)
        se = math.sqrt(var / samples)
    else:
        se = 0.0
    return PsEstimate(float(min(max(mean, 0.0), 1.0)), se, samples)


def ps_nakagami_laplace(link: LinkScenario) -> float:
    """Exact Nakagami-m success probability for integer ``m``.

    With ``s = m beta r**alpha`` and ``L`` the Laplace transform of the
    interference, ``E[Q(m, s I)] = sum_{j<m} (-s)**j / j! * L^(j)(s)``.  ``L``
    factorises over interferers, so its Taylor coefficients at ``s`` follow
    from multiplying short per-interferer power series.
    """
    fading = link.fading
    if fading.kind is not FadingKind.NAKAGAMI:
        raise WrongFading("Laplace-transform evaluation needs Nakagami fading")
    m = fading.m
    s = m * link.beta * link.r ** link.pathloss.alpha
    # coeff[j] = L^(j)(s) / j!
    coeff = np.zeros(m)
    coeff[0] = 1.0
    binom = np.array([(-1) ** k * math.comb(m + k - 1, k) for k in range(m)], dtype=float)
    for d, p in zip(link.distances, link.probs):
        c = d ** -link.pathloss.alpha / m
        u = 1.0 + s * c
        w = c / u
        series = p * u ** -m * binom * w ** np.arange(m)
        series[0] += 1.0 - p
        coeff = np.convolve(coeff, series)[:m]
    value = float(np.dot((-s) ** np.arange(m), coeff))
    return min(max(value, 0.0), 1.0)


def asyncize(p, approx: bool = False):
    """Access probability of an interferer spanning two unsynchronised slots.

    Exact union ``2p - p**2`` by default; ``approx=True`` gives ``2p``
    (capped at one).
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probability outside [0, 1]")
    out = np.minimum(2.0 * p, 1.0) if approx else 2.0 * p - p * p
    return float(out) if out.ndim == 0 else out


def cs_access_probability(p_t: float, neighbor_ps: Sequence[float] = ()) -> float:
    """Probability the transmitter finds the channel idle and transmits.

    ``p_t * prod(1 - p_i)`` over the vehicles inside the sensing radius.  This
    treats neighbours as independent, which makes it an upper bound when
    access probabilities are not small.
    """
    ps = np.asarray(neighbor_ps, dtype=float)
    if not 0.0 <= p_t <= 1.0 or np.any((ps < 0) | (ps > 1)):
        raise ValueError("probability outside [0, 1]")
    return float(p_t * np.prod(1.0 - ps))


def count_hidden_nodes(spacing: float, r: float, r_i: float, r_cs: float) -> int:
    """Number of lattice vehicles in a hidden stretch of length ``r + r_I - r_CS``."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    length = r + r_i - r_cs
    if length <= 0:
        return 0
    # guard against 75.0/25.0 -> 2.9999999999999996
    return max(int(math.floor(length / spacing + 1e-9)), 0)


def cs_validity_floor(r: float, r_i: float) -> float:
    """Smallest sensing radius for which hidden nodes never transmit together."""
    return max(r_i - r, 0.5 * (r + r_i))


def cs_components(link: LinkScenario, cs: CsConfig) -> tuple[float, float]:
    """``(P_t, P_s|t)`` for carrier sensing on a one-lane road.

    ``P_t = p_T * prod(1 - p_i)`` over vehicles within ``r_CS`` of the
    transmitter (boundary inclusive) is the chance the transmitter finds the
    channel idle and transmits.  Given that, the packet survives unless a
    hidden node (farther than ``r_CS`` from the transmitter, within ``r_I``
    of the receiver) transmits; hidden nodes are mutually exclusive so their
    probabilities add.  ``P_s|t`` first reaches one at ``r_CS = r + r_I``.
    Raises ``CsBelowValidity`` when ``r_CS`` is too small for that
    exclusivity to hold.
    """
    if link.lane is None:
        raise ValueError("carrier sensing needs lane positions; build the link with on_lane() or lattice()")
    r = link.r
    r_i = cs.r_i if cs.r_i is not None else interference_radius(r, link.beta, link.pathloss, link.fading)
    floor = cs_validity_floor(r, r_i)
    if cs.r_cs < floor * (1 - 1e-12):
        raise CsBelowValidity(
            f"r_CS={cs.r_cs:g} m is below max(r_I - r, (r + r_I)/2) = {floor:g} m"
        )
    pos = np.abs(np.asarray(link.lane, dtype=float))
    p = np.asarray(link.probs, dtype=float)
    tol = 1e-9 * max(cs.r_cs, 1.0)
    sensed = pos <= cs.r_cs + tol
    hidden = ~sensed & (np.asarray(link.distances) <= r_i + tol)
    access = cs_access_probability(cs.p_t, p[sensed])
    given_t = 1.0
    if cs.r_cs < r + r_i and hidden.any():
        hp = p[hidden]
        if cs.slot_mode is SlotMode.ASYNC:
            hp = asyncize(hp, approx=cs.approx_async)
        given_t = max(1.0 - float(np.sum(hp)), 0.0)
    return access, given_t


def ps_carrier_sense(link: LinkScenario, cs: CsConfig) -> PsEstimate:
    """Success probability ``P_t * P_s|t`` with carrier sensing (see ``cs_components``)."""
    access, given_t = cs_components(link, cs)
    return PsEstimate(access * given_t)
