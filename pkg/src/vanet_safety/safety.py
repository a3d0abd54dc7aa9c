"""Monte Carlo rear-end collision experiment for a platoon that brakes.

The front vehicle ``V_0`` brakes hard at ``t = 0`` and broadcasts a safety
packet.  Every follower learns about it either from a packet (directly from
the head of its line-of-sight sub-chain or relayed by a vehicle that has
already braked) or from the brake lights of the vehicle in front, and starts
braking one driver reaction time later.  Randomly placed obstructive vehicles
cut the chain into sub-chains that packets cannot cross.

Trials draw their randomness from ``SeedSequence([seed, trial])`` and all
draws have fixed shapes, so every cell of a sweep sees the same reaction
times, decelerations, obstructions and uniform variates (common random
numbers), and results do not depend on how trials are split across workers.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import UnreachableVehicle, ValidationError
from .kinematics import VehicleMotion, count_collisions_batch, simulate_chain
from .mac import (CsConfig, LinkScenario, SlotMode, asyncize, ps_carrier_sense,
                  ps_nakagami_laplace, ps_rayleigh_exact)
from .propagation import FadingKind, FadingModel, PathLoss, interference_radius

__all__ = [
    "Scheme",
    "DelayMode",
    "ChainScenario",
    "TrialDraws",
    "TrialOutcome",
    "SweepRow",
    "SweepResult",
    "sample_reaction_time",
    "sample_obstructions",
    "split_subchains",
    "hop_success",
    "reception_delays",
    "reception_delay",
    "draw_trial",
    "evaluate_trial",
    "brake_onsets",
    "brake_onsets_batch",
    "run_trial",
    "estimate_collision_probability",
    "sweep_channel_access",
    "DEFAULT_P_GRID",
]

DEFAULT_P_GRID = tuple(round(0.01 * k, 2) for k in range(1, 21))
Z95 = 1.959963984540054


class Scheme(str, Enum):
    INDEPENDENT = "independent"
    CARRIER_SENSE = "cs"


class DelayMode(str, Enum):
    EXPECTED = "expected"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class ChainScenario:
    """Platoon and radio parameters.  Defaults describe a 25-vehicle highway
    platoon at 20 m/s with 25 m spacing, 250-byte packets at 6 Mbit/s and an
    8 dB SIR threshold."""

    n: int = 25
    spacing: float = 25.0
    v0: float = 20.0
    decel_range: tuple = (6.0, 9.0)
    reaction_mu: float = 0.17
    reaction_sigma: float = 0.44
    obstructions: int = 4
    packet_bits: float = 2000.0
    rate: float = 6e6
    beta: float = 10 ** 0.8
    alpha: float = 2.0
    fading: FadingModel = field(default_factory=FadingModel.rayleigh)
    scheme: Scheme = Scheme.INDEPENDENT
    slot_mode: SlotMode = SlotMode.ASYNC
    r_cs: float | None = None
    access: float | tuple = 0.05
    p_tr: float | None = None
    approx_async: bool = False
    attempt_cap: int = 10 ** 6

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "slot_mode", SlotMode(self.slot_mode))
        object.__setattr__(self, "decel_range", tuple(float(d) for d in self.decel_range))
        if not isinstance(self.access, (int, float)):
            object.__setattr__(self, "access", tuple(float(p) for p in self.access))
        self.validate()

    def validate(self):
        def fail(msg):
            raise ValidationError(msg)

        if self.n < 2:
            fail("need at least two vehicles")
        if not 0 <= self.obstructions < self.n:
            fail("obstruction count must satisfy 0 <= k < n")
        if self.spacing <= 0 or self.v0 < 0:
            fail("spacing must be positive and speed non-negative")
        lo, hi = self.decel_range
        if not 0 < lo <= hi:
            fail("deceleration range must satisfy 0 < low <= high")
        if self.reaction_sigma < 0:
            fail("reaction-time sigma must be non-negative")
        if self.packet_bits <= 0 or self.rate <= 0:
            fail("packet length and data rate must be positive")
        if self.beta <= 0:
            fail("SIR threshold must be positive")
        if not self.alpha > 1:
            fail("path-loss exponent must exceed 1")
        if self.fading.kind is FadingKind.NONE:
            fail("the chain experiment needs Nakagami-m fading (m >= 1)")
        ps = self.access_vector()
        if np.any((ps < 0) | (ps > 1)):
            fail("access probabilities must lie in [0, 1]")
        if self.p_tr is not None and not 0 <= self.p_tr <= 1:
            fail("transmitter access probability must lie in [0, 1]")
        if self.r_cs is not None and self.r_cs <= 0:
            fail("carrier-sensing radius must be positive")
        if self.attempt_cap < 1:
            fail("attempt cap must be positive")

    def access_vector(self) -> np.ndarray:
        if isinstance(self.access, tuple):
            if len(self.access) != self.n:
                raise ValidationError(f"access vector has {len(self.access)} entries for {self.n} vehicles")
            return np.array(self.access)
        return np.full(self.n, float(self.access))

    @property
    def slot(self) -> float:
        """Airtime of one packet, ``L / R`` seconds."""
        return self.packet_bits / self.rate

    def with_(self, **changes) -> "ChainScenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class TrialDraws:
    obstructions: tuple
    reaction: np.ndarray
    decel: np.ndarray
    uniforms: np.ndarray


@dataclass(frozen=True)
class TrialOutcome:
    brake_onset_times: tuple
    collision_events: tuple
    collided_vehicle_count: int
    obstructions: tuple = ()
    cap_hits: int = 0


@dataclass(frozen=True)
class SweepRow:
    p: float
    scheme: str
    fading_m: int
    mean_collision_prob: float
    ci_halfwidth: float
    trials: int


@dataclass
class SweepResult:
    rows: list

    def select(self, scheme=None, fading_m=None):
        return [r for r in self.rows
                if (scheme is None or r.scheme == Scheme(scheme).value)
                and (fading_m is None or r.fading_m == fading_m)]

    def curve(self, scheme, fading_m):
        rows = sorted(self.select(scheme, fading_m), key=lambda r: r.p)
        return (np.array([r.p for r in rows]),
                np.array([r.mean_collision_prob for r in rows]),
                np.array([r.ci_halfwidth for r in rows]))


def sample_reaction_time(rng, mu: float = 0.17, sigma: float = 0.44, size=None):
    """Lognormal driver reaction time ``exp(N(mu, sigma**2))`` in seconds."""
    rng = np.random.default_rng(rng)
    if sigma == 0:
        return math.exp(mu) if size is None else np.full(size, math.exp(mu))
    return rng.lognormal(mu, sigma, size=size)


def sample_obstructions(rng, n: int, k: int) -> tuple:
    """``k`` distinct obstructive vehicles drawn uniformly from ``1 .. n-1``."""
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    rng = np.random.default_rng(rng)
    picked = rng.choice(np.arange(1, n), size=k, replace=False)
    return tuple(sorted(int(i) for i in picked))


def split_subchains(n: int, obstructions: Sequence[int]):
    """Maximal ``range`` blocks; each obstructive vehicle starts a new block."""
    starts = [0] + sorted(set(obstructions))
    ends = starts[1:] + [n]
    return [range(a, b) for a, b in zip(starts, ends)]


# -- per-hop success probabilities ----------------------------------------

def _hop_key(sc: ChainScenario):
    return (sc.spacing, sc.beta, sc.alpha, sc.fading, sc.scheme, sc.slot_mode,
            sc.r_cs, sc.approx_async)


@functools.lru_cache(maxsize=4096)
def _hop_success_cached(key, access: tuple) -> tuple:
    spacing, beta, alpha, fading, scheme, slot_mode, r_cs, approx_async = key
    length = len(access)
    p = np.asarray(access)
    pl = PathLoss(alpha)
    out = [1.0]
    for i in range(1, length):
        others = np.array([k for k in range(1, length) if k != i], dtype=int)
        pos = others * spacing
        if scheme is Scheme.INDEPENDENT:
            pi = p[others]
            if slot_mode is SlotMode.ASYNC and len(pi):
                pi = asyncize(pi, approx=approx_async)
            link = LinkScenario.on_lane(pos, i * spacing, pi, beta=beta, pathloss=pl, fading=fading)
            val = ps_rayleigh_exact(link) if fading.is_rayleigh else ps_nakagami_laplace(link)
        else:
            link = LinkScenario.on_lane(pos, i * spacing, p[others], beta=beta, pathloss=pl, fading=fading)
            r = i * spacing
            rcs = r_cs if r_cs is not None else r + interference_radius(r, beta, pl, fading)
            # transmitter access is charged separately by the delay model
            val = ps_carrier_sense(link, CsConfig(rcs, slot_mode, 1.0, approx_async=approx_async)).value
        out.append(float(val))
    return tuple(out)


def hop_success(scenario: ChainScenario, members: Sequence[int]) -> np.ndarray:
    """Packet success probability from the head of a sub-chain to each member.

    ``members`` are absolute vehicle indices, head first.  Interferers are
    the other members of the same sub-chain.  Entry 0 (the head itself) is
    1.  Under carrier sensing the value is the success probability given
    that the head attempted a transmission: the channel-idle factor of the
    sensed neighbours times the hidden-node term.
    """
    access = tuple(float(a) for a in scenario.access_vector()[list(members)])
    return np.array(_hop_success_cached(_hop_key(scenario), access))


# -- message propagation ----------------------------------------------------

def _geometric(u, q, cap):
    """Attempts until first success for success probability ``q`` (inverse CDF)."""
    u = np.asarray(u, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), u.shape)
    out = np.full(u.shape, np.inf)
    ok = q > 0
    certain = q >= 1
    mid = ok & ~certain
    with np.errstate(divide="ignore"):
        out[mid] = np.ceil(np.log(u[mid]) / np.log1p(-q[mid]))
    out[certain] = 1.0
    out = np.maximum(out, 1.0)
    out[out > cap] = np.inf
    return out


def reception_delays(scenario: ChainScenario, members: Sequence[int], reaction,
                     mode=DelayMode.SAMPLED, uniforms=None, hop_ps=None, rng=None):
    """Packet/brake-light reception times for every member of a sub-chain.

    Times are relative to the head's brake onset.  ``reaction`` holds the
    reaction times of the members (head first); ``uniforms[i, j]`` is the
    uniform variate for the hop from member ``j`` to member ``i`` in sampled
    mode.  ``hop_ps`` overrides the per-hop success probabilities.

    Expected mode follows the mean-delay recursion term by term: for receiver
    ``i`` the minimum over relays ``j in 1..i-2`` of
    ``slot/(P(j) p_0 (1-p_j)) + tau_j + slot/(P(i) p_j (1-p_i))``, the direct
    path ``slot/(P(i) p_0 (1-p_i))`` and the brake-light path
    ``slot/(P(i-1) p_0 (1-p_{i-1})) + tau_{i-1}`` (zero for ``i = 1``, who
    sees the head brake).

    Sampled mode uses geometric attempt counts instead of their means, and
    the relay and brake-light paths start from the relay's / predecessor's
    actual brake onset.

    Returns ``(delays, cap_hits)``.
    """
    mode = DelayMode(mode)
    members = list(members)
    length = len(members)
    tau = np.asarray(reaction, dtype=float)
    if tau.shape != (length,):
        raise ValueError("need one reaction time per member")
    ps = hop_success(scenario, members) if hop_ps is None else np.asarray(hop_ps, dtype=float)
    acc = scenario.access_vector()[members]
    p0 = scenario.p_tr if scenario.p_tr is not None else acc[0]
    slot = scenario.slot
    # success prob of one attempt from source j (head when j == 0) to receiver i
    src = acc.copy()
    src[0] = p0
    q = ps[:, None] * src[None, :] * (1.0 - acc)[:, None]
    delays = np.zeros(length)
    cap_hits = 0

    if mode is DelayMode.EXPECTED:
        with np.errstate(divide="ignore"):
            mean_wait = np.where(q > 0, slot / np.where(q > 0, q, 1.0), np.inf)
        for i in range(1, length):
            cands = [mean_wait[i, 0]]
            cands.append(0.0 if i == 1 else mean_wait[i - 1, 0] + tau[i - 1])
            for j in range(1, i - 1):
                cands.append(mean_wait[j, 0] + tau[j] + mean_wait[i, j])
            best = min(cands)
            if not math.isfinite(best):
                raise UnreachableVehicle(f"member {i} cannot be reached by any path")
            delays[i] = best
        return delays, 0

    if uniforms is None:
        rng = np.random.default_rng(rng)
        uniforms = 1.0 - rng.random((length, length))
    attempts = _geometric(uniforms[:length, :length], q, scenario.attempt_cap)
    onset = np.zeros(length)
    for i in range(1, length):
        best = attempts[i, 0] * slot
        if attempts[i, 0] == np.inf and q[i, 0] > 0:
            cap_hits += 1
        best = min(best, onset[i - 1])
        if i > 2:
            relay = onset[1:i - 1] + attempts[i, 1:i - 1] * slot
            best = min(best, float(relay.min()))
        delays[i] = best
        onset[i] = best + tau[i]
    return delays, cap_hits


def reception_delay(scenario: ChainScenario, i: int, members: Sequence[int], reaction,
                    mode=DelayMode.EXPECTED, uniforms=None, hop_ps=None, rng=None) -> float:
    """Reception delay of sub-chain member ``i`` (see ``reception_delays``)."""
    if not 1 <= i < len(members):
        raise ValueError("i must index a non-head member")
    delays, _ = reception_delays(scenario, list(members)[: i + 1], np.asarray(reaction)[: i + 1],
                                 mode, uniforms, None if hop_ps is None else np.asarray(hop_ps)[: i + 1], rng)
    return float(delays[i])


# -- trials -----------------------------------------------------------------

def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def draw_trial(scenario: ChainScenario, seed: int, trial: int = 0) -> TrialDraws:
    rng = _trial_rng(seed, trial)
    n = scenario.n
    obstructions = sample_obstructions(rng, n, scenario.obstructions)
    reaction = sample_reaction_time(rng, scenario.reaction_mu, scenario.reaction_sigma, size=n)
    lo, hi = scenario.decel_range
    decel = rng.uniform(lo, hi, size=n)
    uniforms = 1.0 - rng.random((n, n))
    return TrialDraws(obstructions, np.asarray(reaction), decel, uniforms)


def brake_onsets(scenario: ChainScenario, draws: TrialDraws, hop_ps_override=None):
    """Absolute brake onset of every vehicle and the number of capped attempt draws."""
    n = scenario.n
    onset = np.zeros(n)
    cap_hits = 0
    for block in split_subchains(n, draws.obstructions):
        members = list(block)
        head = members[0]
        if head > 0:
            onset[head] = onset[head - 1] + draws.reaction[head]
        if len(members) == 1:
            continue
        hop_ps = None if hop_ps_override is None else hop_ps_override(members)
        delays, hits = reception_delays(scenario, members, draws.reaction[members],
                                        DelayMode.SAMPLED, draws.uniforms[np.ix_(members, members)], hop_ps)
        cap_hits += hits
        onset[members[1:]] = onset[head] + delays[1:] + draws.reaction[members[1:]]
    return onset, cap_hits


def evaluate_trial(scenario: ChainScenario, draws: TrialDraws, hop_ps_override=None) -> TrialOutcome:
    onset, cap_hits = brake_onsets(scenario, draws, hop_ps_override)
    motions = [VehicleMotion(-k * scenario.spacing, scenario.v0, float(draws.decel[k]), float(onset[k]))
               for k in range(scenario.n)]
    events = simulate_chain(motions)
    collided = len({e.follower_index for e in events})
    return TrialOutcome(tuple(float(t) for t in onset), tuple(events), collided,
                        draws.obstructions, cap_hits)


def run_trial(scenario: ChainScenario, seed: int, trial: int = 0) -> TrialOutcome:
    """One platoon run; deterministic in ``(scenario, seed, trial)``."""
    return evaluate_trial(scenario, draw_trial(scenario, seed, trial))


# -- estimation -------------------------------------------------------------

def _hop_table(scenario: ChainScenario) -> np.ndarray:
    """``table[length, i]``: head-to-member success probability in a sub-chain of ``length``."""
    n = scenario.n
    table = np.ones((n + 1, n))
    for length in range(2, n + 1):
        table[length, :length] = hop_success(scenario, range(length))
    return table


def brake_onsets_batch(scenario: ChainScenario, obstructions, reaction, uniforms) -> np.ndarray:
    """Brake onsets for a block of trials with homogeneous access.

    ``obstructions`` is a ``(trials, k)`` index array, ``reaction`` a
    ``(trials, n)`` array and ``uniforms`` ``(trials, n, n)``.  Same result as
    ``brake_onsets`` trial by trial.
    """
    if isinstance(scenario.access, tuple):
        raise ValueError("batched onsets need a single access probability")
    reaction = np.asarray(reaction, dtype=float)
    trials, n = reaction.shape
    obstructed = np.zeros((trials, n), dtype=bool)
    if np.size(obstructions):
        np.put_along_axis(obstructed, np.asarray(obstructions, dtype=int), True, axis=1)
    obstructed[:, 0] = True
    idx = np.broadcast_to(np.arange(n), (trials, n))
    head = np.maximum.accumulate(np.where(obstructed, idx, 0), axis=1)
    rel = idx - head
    # sub-chain length: distance from the head to the next head
    nxt = np.minimum.accumulate(np.where(obstructed, idx, n)[:, ::-1], axis=1)[:, ::-1]
    nxt = np.concatenate([nxt[:, 1:], np.full((trials, 1), n)], axis=1)
    sub_len = np.take_along_axis(nxt, head, axis=1) - head
    table = _hop_table(scenario)
    p = float(scenario.access)
    p0 = scenario.p_tr if scenario.p_tr is not None else p
    slot = scenario.slot
    cap = scenario.attempt_cap
    rows = np.arange(trials)
    onset = np.zeros((trials, n))
    for k in range(1, n):
        h = head[:, k]
        ps = table[sub_len[:, k], rel[:, k]]
        direct = onset[rows, h] + _geometric(uniforms[rows, k, h], ps * p0 * (1 - p), cap) * slot
        best = np.minimum(direct, onset[:, k - 1])
        if k >= 3:
            js = np.arange(k - 1)
            ok = (js[None, :] > h[:, None]) & (js[None, :] < k - 1)
            if ok.any():
                att = _geometric(uniforms[:, k, : k - 1], (ps * p * (1 - p))[:, None], cap)
                relay = np.where(ok, onset[:, : k - 1] + att * slot, np.inf).min(axis=1)
                best = np.minimum(best, relay)
        is_head = rel[:, k] == 0
        onset[:, k] = np.where(is_head, onset[:, k - 1], best) + reaction[:, k]
    return onset


def _count_block(cells, seed, start, stop):
    draws = [draw_trial(cells[0], seed, t) for t in range(start, stop)]
    obstructions = np.array([d.obstructions for d in draws], dtype=int).reshape(len(draws), -1)
    reaction = np.stack([d.reaction for d in draws])
    decel = np.stack([d.decel for d in draws])
    uniforms = np.stack([d.uniforms for d in draws])
    n = cells[0].n
    sums, sqs = [], []
    for sc in cells:
        if isinstance(sc.access, tuple):
            counts = np.array([evaluate_trial(sc, d).collided_vehicle_count for d in draws])
        else:
            onset = brake_onsets_batch(sc, obstructions, reaction, uniforms)
            x0 = np.broadcast_to(-np.arange(n) * sc.spacing, onset.shape)
            counts, _ = count_collisions_batch(x0, sc.v0, decel, onset)
        sums.append(int(counts.sum()))
        sqs.append(int((counts.astype(np.int64) ** 2).sum()))
    return sums, sqs


BLOCK = 500


def _count_chunk(args):
    cells, seed, start, stop = args
    sums = [0] * len(cells)
    sqs = [0] * len(cells)
    for a in range(start, stop, BLOCK):
        s, q = _count_block(cells, seed, a, min(a + BLOCK, stop))
        sums = [x + y for x, y in zip(sums, s)]
        sqs = [x + y for x, y in zip(sqs, q)]
    return sums, sqs


def _run_cells(cells, trials, seed, workers=1):
    if trials < 1:
        raise ValueError("need at least one trial")
    shape = {(c.n, c.obstructions, c.decel_range, c.reaction_mu, c.reaction_sigma) for c in cells}
    if len(shape) != 1:
        raise ValueError("cells sharing random numbers must share platoon size and random laws")
    workers = max(1, int(workers or 1))
    if workers == 1:
        return _count_chunk((cells, seed, 0, trials))
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(cells, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    sums = [0] * len(cells)
    sqs = [0] * len(cells)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for s, q in pool.map(_count_chunk, jobs):
            sums = [a + b for a, b in zip(sums, s)]
            sqs = [a + b for a, b in zip(sqs, q)]
    return sums, sqs


def _summarise(total, total_sq, trials, followers):
    mean = total / (trials * followers)
    if trials < 2:
        return mean, 0.0
    # per-trial fraction k / followers; sums are exact integers
    var = (total_sq - total * total / trials) / (trials - 1) / followers ** 2
    return mean, Z95 * math.sqrt(max(var, 0.0) / trials)


def estimate_collision_probability(scenario: ChainScenario, trials: int, seed: int, workers: int = 1):
    """Mean fraction of followers involved as rear-enders, with a 95% CI half-width."""
    sums, sqs = _run_cells([scenario], trials, seed, workers)
    return _summarise(sums[0], sqs[0], trials, scenario.n - 1)


def sweep_channel_access(scenario: ChainScenario, p_grid=DEFAULT_P_GRID, trials: int = 10_000,
                         seed: int = 0, schemes=(Scheme.INDEPENDENT, Scheme.CARRIER_SENSE),
                         fadings=None, workers: int = 1) -> SweepResult:
    """Collision probability for every (p, scheme, fading) cell.

    All cells reuse the same per-trial random draws.  Every vehicle gets
    access probability ``p``; ``p_tr`` follows ``p`` unless the scenario
    pins it.
    """
    p_grid = [float(p) for p in p_grid]
    if not p_grid:
        raise ValueError("empty access-probability grid")
    if any(not 0 < p < 1 for p in p_grid):
        raise ValueError("grid values must lie in (0, 1)")
    fadings = [scenario.fading] if fadings is None else list(fadings)
    cells, keys = [], []
    for p in p_grid:
        for scheme in schemes:
            for fading in fadings:
                cells.append(scenario.with_(access=p, scheme=Scheme(scheme), fading=fading))
                keys.append((p, Scheme(scheme).value, fading.m))
    sums, sqs = _run_cells(cells, trials, seed, workers)
    rows = []
    for (p, scheme, m), s, q in zip(keys, sums, sqs):
        mean, ci = _summarise(s, q, trials, scenario.n - 1)
        rows.append(SweepRow(p, scheme, m, mean, ci, trials))
    return SweepResult(rows)
