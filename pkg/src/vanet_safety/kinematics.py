"""Braking kinematics and rear-end collision detection for a single lane.

Vehicles are points moving along +x; the leader of a pair has the larger
position.  A vehicle cruises at ``v0`` until ``brake_onset``, then
decelerates at a constant rate until it stops.  Collisions are found
analytically: the gap between two vehicles is piecewise quadratic in time,
so the earliest touching time is the smallest root over the pieces.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import OverlapAtStart

__all__ = [
    "VehicleMotion",
    "CollisionEvent",
    "position_at",
    "pairwise_collision_time",
    "simulate_chain",
    "max_safe_brake_delay",
    "transmission_budget",
    "GAP_TOL",
]

# gaps below this count as contact (metres); absorbs rounding at exact grazing
GAP_TOL = 1e-9


@dataclass(frozen=True)
class VehicleMotion:
    x0: float
    v0: float
    decel: float
    brake_onset: float = math.inf

    def __post_init__(self):
        if self.v0 < 0:
            raise ValueError("speed must be non-negative")
        if self.decel <= 0:
            raise ValueError("deceleration magnitude must be positive")
        if self.brake_onset < 0:
            raise ValueError("brake onset must be non-negative")

    @property
    def stop_time(self) -> float:
        return self.brake_onset + self.v0 / self.decel

    @property
    def stop_position(self) -> float:
        return self.x0 + self.v0 * self.brake_onset + self.v0 ** 2 / (2 * self.decel)


@dataclass(frozen=True)
class CollisionEvent:
    follower_index: int
    time: float
    position: float = math.nan


def position_at(m: VehicleMotion, t: float) -> float:
    if t < 0:
        raise ValueError("time must be non-negative")
    if t <= m.brake_onset:
        return m.x0 + m.v0 * t
    tb = min(t, m.stop_time) - m.brake_onset
    return m.x0 + m.v0 * m.brake_onset + m.v0 * tb - 0.5 * m.decel * tb * tb


def _pieces(m: VehicleMotion, freeze=None):
    """Quadratic pieces ``(t_start, x, v, a)`` with ``x(t) = x + v dt + a dt**2 / 2``."""
    out = [(0.0, m.x0, m.v0, 0.0)]
    if math.isfinite(m.brake_onset):
        out.append((m.brake_onset, m.x0 + m.v0 * m.brake_onset, m.v0, -m.decel))
        out.append((m.stop_time, m.stop_position, 0.0, 0.0))
    if freeze is not None:
        tf, xf = freeze
        out = [pc for pc in out if pc[0] < tf]
        out.append((tf, xf, 0.0, 0.0))
    return out


def _state(pieces, t):
    """Position, velocity, acceleration of a piecewise trajectory at ``t``."""
    cur = pieces[0]
    for pc in pieces:
        if pc[0] <= t:
            cur = pc
        else:
            break
    t0, x, v, a = cur
    dt = t - t0
    return x + v * dt + 0.5 * a * dt * dt, v + a * dt, a


def _earliest_contact(leader_pieces, follower_pieces, t_from=0.0):
    """Earliest ``t >= t_from`` where the gap drops to ``GAP_TOL`` or below."""
    cuts = sorted({t for t, *_ in leader_pieces} | {t for t, *_ in follower_pieces} | {t_from})
    cuts = [t for t in cuts if t >= t_from]
    cuts.append(math.inf)
    for a, b in zip(cuts[:-1], cuts[1:]):
        xl, vl, al = _state(leader_pieces, a)
        xf, vf, af = _state(follower_pieces, a)
        # gap(a + s) = c0 + c1 s + c2 s^2 on [0, b - a]
        c0 = xl - xf
        c1 = vl - vf
        c2 = 0.5 * (al - af)
        if c0 <= GAP_TOL:
            return a
        span = b - a
        root = _first_root(c0 - GAP_TOL, c1, c2, span)
        if root is not None:
            # report where the true gap hits zero if it does, else the touch point
            exact = _first_root(c0, c1, c2, span)
            return a + (exact if exact is not None else _argmin(c1, c2, span))
    return None


def _argmin(c1, c2, span):
    if c2 > 0:
        s = -c1 / (2 * c2)
        if 0 <= s <= span:
            return s
    return span


def _first_root(c0, c1, c2, span):
    """Smallest ``s`` in ``[0, span]`` with ``c0 + c1 s + c2 s**2 <= 0`` given ``c0 > 0``."""
    if c2 == 0.0:
        if c1 >= 0:
            return None
        s = -c0 / c1
        return s if s <= span else None
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    q = -0.5 * (c1 + (sq if c1 >= 0 else -sq))
    roots = [q / c2]
    if q != 0:
        roots.append(c0 / q)
    roots = sorted(s for s in roots if s >= 0)
    for s in roots:
        if s <= span:
            return s
    return None


def pairwise_collision_time(leader: VehicleMotion, follower: VehicleMotion,
                            leader_freeze=None, follower_freeze=None, t_from=0.0):
    """Earliest time the follower reaches the leader, or ``None``.

    ``leader_freeze``/``follower_freeze`` are optional ``(time, position)``
    pairs after which that vehicle is held fixed (it was already involved in
    a crash).
    """
    if follower.x0 >= leader.x0:
        raise OverlapAtStart("follower must start behind the leader")
    return _earliest_contact(_pieces(leader, leader_freeze), _pieces(follower, follower_freeze), t_from)


def simulate_chain(motions):
    """Run a platoon and return every rear-end collision in time order.

    ``motions[0]`` is the front vehicle.  When vehicle ``k`` hits ``k - 1``
    both are frozen at the impact point from then on, and the vehicles
    behind interact with the frozen positions.  Contacts are resolved in
    time order, so a rear impact that happens first stops the struck
    vehicle before it can reach its own leader.
    """
    motions = list(motions)
    n = len(motions)
    for k in range(1, n):
        if not motions[k].x0 < motions[k - 1].x0:
            raise OverlapAtStart(f"vehicle {k} does not start behind vehicle {k - 1}")
    pieces = [_pieces(m) for m in motions]
    frozen = [None] * n
    heap = []
    for k in range(1, n):
        t = _earliest_contact(pieces[k - 1], pieces[k])
        if t is not None:
            heapq.heappush(heap, (t, k))
    events = []
    done = set()
    while heap:
        t, k = heapq.heappop(heap)
        if k in done:
            continue
        # stale entry: one of the pair was frozen after this time was computed
        t_now = _earliest_contact(pieces[k - 1], pieces[k])
        if t_now is None:
            continue
        if t_now > t + 1e-12:
            heapq.heappush(heap, (t_now, k))
            continue
        x = _state(pieces[k], t)[0]
        events.append(CollisionEvent(k, t, x))
        done.add(k)
        for j in (k - 1, k):
            if frozen[j] is None:
                frozen[j] = (t, _state(pieces[j], t)[0])
                pieces[j] = _pieces(motions[j], frozen[j])
        # the follower behind k now faces a stopped vehicle
        if k + 1 < n and k + 1 not in done:
            t2 = _earliest_contact(pieces[k], pieces[k + 1])
            if t2 is not None:
                heapq.heappush(heap, (t2, k + 1))
    events.sort(key=lambda e: (e.time, e.follower_index))
    return events


def max_safe_brake_delay(gap: float, v0: float, leader_decel: float, follower_decel: float,
                         tol: float = 1e-10) -> float:
    """Largest follower brake delay (relative to the leader) that avoids contact.

    Both vehicles start at ``v0``, ``gap`` apart.  Equal decelerations give
    ``gap / v0`` exactly; otherwise the collision indicator is monotone in
    the delay and the threshold is bracketed by bisection.  Returns 0 when
    even simultaneous braking collides.
    """
    if gap <= 0:
        return 0.0
    if v0 <= 0:
        return math.inf
    if leader_decel == follower_decel:
        return gap / v0

    def collides(delay):
        lead = VehicleMotion(gap, v0, leader_decel, 0.0)
        foll = VehicleMotion(0.0, v0, follower_decel, delay)
        return pairwise_collision_time(lead, foll) is not None

    if collides(0.0):
        return 0.0
    lo, hi = 0.0, gap / v0
    while not collides(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if collides(mid):
            hi = mid
        else:
            lo = mid
    return lo


def transmission_budget(t: float, rate: float, length: float) -> int:
    """Whole packet transmissions of ``length`` bits that fit in ``t`` seconds at ``rate`` bit/s."""
    if t < 0 or rate <= 0 or length <= 0:
        raise ValueError("need t >= 0 and positive rate and length")
    return int(math.floor(t * rate / length + 1e-12))


# -- batched evaluation -------------------------------------------------------
# The functions below evaluate many independent platoons at once.  They
# reproduce simulate_chain exactly; trials where a rear impact precedes the
# struck vehicle's own crash are handed back to the event-driven version.

def _first_root_vec(c0, c1, c2, span):
    out = np.full(c0.shape, np.inf)
    lin = c2 == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lin = np.where(c1 < 0, -c0 / c1, np.inf)
        out = np.where(lin, s_lin, out)
        disc = c1 * c1 - 4.0 * c2 * c0
        sq = np.sqrt(np.where(disc >= 0, disc, 0.0))
        q = -0.5 * (c1 + np.where(c1 >= 0, sq, -sq))
        r1 = q / c2
        r2 = np.where(q != 0, c0 / q, np.inf)
        r1 = np.where(r1 >= 0, r1, np.inf)
        r2 = np.where(r2 >= 0, r2, np.inf)
        quad = np.minimum(r1, r2)
        quad = np.where(disc >= 0, quad, np.inf)
    out = np.where(lin, out, quad)
    return np.where(out <= span, out, np.inf)


def _state_vec(x0, v0, decel, onset, t, tf=None, xf=None):
    """Position, velocity and acceleration of braking trajectories at times ``t``."""
    stop = onset + v0 / decel
    tb = np.clip(t - onset, 0.0, v0 / decel)
    cruise = np.minimum(t, onset)
    x = x0 + v0 * cruise + v0 * tb - 0.5 * decel * tb * tb
    braking = (t >= onset) & (t < stop)
    v = np.where(t < onset, v0, np.where(braking, v0 - decel * np.maximum(t - onset, 0.0), 0.0))
    a = np.where(braking, -decel, 0.0)
    if tf is not None:
        frozen = t >= tf
        x = np.where(frozen, xf, x)
        v = np.where(frozen, 0.0, v)
        a = np.where(frozen, 0.0, a)
    return x, v, a


def pairwise_collision_time_batch(lead, foll, lead_freeze=(None, None)):
    """Vectorised earliest contact time (``inf`` when none).

    ``lead`` and ``foll`` are ``(x0, v0, decel, onset)`` arrays; ``lead_freeze``
    optional ``(time, position)`` arrays with ``inf`` time for no freeze.
    """
    lx, lv, ld, lo = (np.asarray(a, dtype=float) for a in lead)
    fx, fv, fd, fo = (np.asarray(a, dtype=float) for a in foll)
    tf, xf = lead_freeze
    cuts = [np.zeros_like(lx), lo, lo + lv / ld, fo, fo + fv / fd]
    if tf is not None:
        cuts.append(np.asarray(tf, dtype=float))
    cuts = np.sort(np.stack(cuts, axis=-1), axis=-1)
    cuts = np.where(np.isfinite(cuts), cuts, np.inf)
    ends = np.concatenate([cuts[..., 1:], np.full(cuts.shape[:-1] + (1,), np.inf)], axis=-1)
    result = np.full(lx.shape, np.inf)
    for k in range(cuts.shape[-1]):
        a = cuts[..., k]
        b = ends[..., k]
        live = np.isfinite(a) & ~np.isfinite(result)
        if not live.any():
            continue
        a_ = np.where(live, a, 0.0)
        xl, vl, al = _state_vec(lx, lv, ld, lo, a_, tf, xf)
        xf_, vf_, af_ = _state_vec(fx, fv, fd, fo, a_)
        c0 = xl - xf_
        c1 = vl - vf_
        c2 = 0.5 * (al - af_)
        span = b - a_
        touching = c0 <= GAP_TOL
        s_tol = _first_root_vec(c0 - GAP_TOL, c1, c2, span)
        s_exact = _first_root_vec(c0, c1, c2, span)
        with np.errstate(divide="ignore", invalid="ignore"):
            s_min = np.where(c2 > 0, -c1 / (2 * c2), span)
        s_min = np.where((s_min >= 0) & (s_min <= span), s_min, span)
        hit = np.where(touching, 0.0, np.where(np.isfinite(s_tol),
                                               np.where(np.isfinite(s_exact), s_exact, s_min), np.inf))
        result = np.where(live & np.isfinite(hit), a_ + hit, result)
    return result


def count_collisions_batch(x0, v0, decel, onset):
    """Rear-ender count per platoon for ``(trials, n)`` arrays.

    Front-to-back pass with freezing, then an event-driven re-run of the
    (rare) platoons where that order is not the time order.
    """
    x0 = np.asarray(x0, dtype=float)
    decel = np.asarray(decel, dtype=float)
    onset = np.asarray(onset, dtype=float)
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), x0.shape)
    trials, n = x0.shape
    tf = np.full(trials, np.inf)      # freeze time of the current leader
    xf = np.zeros(trials)
    hit_as_follower = np.full(trials, np.inf)
    counts = np.zeros(trials, dtype=int)
    redo = np.zeros(trials, dtype=bool)
    for k in range(1, n):
        t = pairwise_collision_time_batch(
            (x0[:, k - 1], v0[:, k - 1], decel[:, k - 1], onset[:, k - 1]),
            (x0[:, k], v0[:, k], decel[:, k], onset[:, k]),
            (tf, xf))
        hit = np.isfinite(t)
        counts += hit
        # leader struck from behind before its own crash: order matters
        redo |= hit & (t < hit_as_follower - 1e-12) & np.isfinite(hit_as_follower)
        pos, _, _ = _state_vec(x0[:, k], v0[:, k], decel[:, k], onset[:, k], np.where(hit, t, 0.0))
        tf = np.where(hit, t, np.inf)
        xf = np.where(hit, pos, 0.0)
        hit_as_follower = np.where(hit, t, np.inf)
    for i in np.flatnonzero(redo):
        motions = [VehicleMotion(x0[i, k], v0[i, k], decel[i, k], onset[i, k]) for k in range(n)]
        counts[i] = len({e.follower_index for e in simulate_chain(motions)})
    return counts, redo
