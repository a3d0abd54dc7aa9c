"""Fading laws, path loss and the single-interferer interference radius.

Received power at distance ``r`` from a unit-power transmitter is
``h * r**-alpha`` where ``h`` is the fading power coefficient.  Under
Nakagami-m fading ``h`` is Gamma distributed with shape ``m`` and mean 1;
``m = 1`` is Rayleigh fading (exponential power).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DivergentMoment

__all__ = [
    "FadingKind",
    "FadingModel",
    "PathLoss",
    "sample_fading",
    "fractional_moment",
    "interference_radius",
    "db_to_linear",
]


class FadingKind(str, Enum):
    NONE = "none"
    NAKAGAMI = "nakagami"


@dataclass(frozen=True)
class FadingModel:
    kind: FadingKind = FadingKind.NAKAGAMI
    m: int = 1
    mean: float = 1.0

    def __post_init__(self):
        if self.mean != 1.0:
            raise ValueError("fading power is normalised to unit mean")
        if self.kind is FadingKind.NAKAGAMI:
            if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
                raise ValueError(f"Nakagami shape must be a positive integer, got {self.m!r}")
            object.__setattr__(self, "m", int(self.m))

    @classmethod
    def none(cls) -> "FadingModel":
        return cls(FadingKind.NONE, m=0)

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls(FadingKind.NAKAGAMI, m=1)

    @classmethod
    def nakagami(cls, m: int) -> "FadingModel":
        return cls(FadingKind.NAKAGAMI, m=m)

    @property
    def is_rayleigh(self) -> bool:
        return self.kind is FadingKind.NAKAGAMI and self.m == 1

    @property
    def label(self) -> str:
        if self.kind is FadingKind.NONE:
            return "none"
        return "rayleigh" if self.m == 1 else f"nakagami-{self.m}"


@dataclass(frozen=True)
class PathLoss:
    alpha: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"path-loss exponent must exceed 1, got {self.alpha}")

    def gain(self, r):
        return np.asarray(r, dtype=float) ** -self.alpha


def _as_pathloss(pl) -> PathLoss:
    return pl if isinstance(pl, PathLoss) else PathLoss(float(pl))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def sample_fading(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw fading power coefficient(s).

    Returns exactly 1.0 (or an array of ones) when there is no fading,
    otherwise Gamma(shape=m, scale=1/m) draws so that the mean is one.
    """
    if model.kind is FadingKind.NONE:
        return 1.0 if size is None else np.ones(size)
    return rng.gamma(model.m, model.mean / model.m, size=size)


def fractional_moment(model: FadingModel, s: float) -> float:
    """``E[h**s]`` for the fading power ``h``.

    For Nakagami-m this is ``Gamma(m + s) / Gamma(m) * (1/m)**s`` and it is
    finite only for ``s > -m``.
    """
    if model.kind is FadingKind.NONE:
        return 1.0
    m = model.m
    if s <= -m:
        raise DivergentMoment(f"E[h^{s}] diverges for Nakagami m={m}")
    return math.exp(math.lgamma(m + s) - math.lgamma(m)) * (model.mean / m) ** s


def interference_radius(r: float, beta: float, pl, model: FadingModel) -> float:
    """Distance within which a single active node can break a link of length ``r``.

    Uses ``r * beta**(1/alpha) * E[h**(-1/alpha)] * E[h_i**(1/alpha)]``,
    i.e. ``r * beta**(1/alpha) * Gamma(m + 1/alpha) Gamma(m - 1/alpha) / Gamma(m)**2``
    for Nakagami-m (with mean one the ``1/m`` powers cancel).  Without
    fading the ratio is one.
    """
    pl = _as_pathloss(pl)
    if r <= 0:
        raise ValueError("link length must be positive")
    if beta <= 0:
        raise ValueError("SIR threshold must be positive")
    inv = 1.0 / pl.alpha
    base = r * beta ** inv
    if model.kind is FadingKind.NONE:
        return base
    m = model.m
    if m <= inv:
        raise DivergentMoment(f"E[h^(-1/alpha)] diverges for m={m}, alpha={pl.alpha}")
    ratio = math.exp(math.lgamma(m + inv) + math.lgamma(m - inv) - 2.0 * math.lgamma(m))
    return base * ratio
