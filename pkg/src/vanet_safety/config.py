"""Flat ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored.  Every key is optional; missing
keys keep the built-in highway defaults.  Recognised keys::

    n               vehicles in the platoon                      (25)
    spacing         gap between neighbours, m                    (25)
    velocity        initial speed, m/s                           (20)
    decel_min       lowest braking deceleration, m/s^2           (6)
    decel_max       highest braking deceleration, m/s^2          (9)
    reaction_mu     lognormal reaction-time mu                   (0.17)
    reaction_sigma  lognormal reaction-time sigma                (0.44)
    obstructions    obstructive vehicles per trial               (4)
    packet_bytes    safety packet length, bytes                  (250)
    rate_mbps       data rate, Mbit/s                            (6)
    beta_db         SIR threshold, dB        (from rate_mbps via the rate table)
    beta            SIR threshold, linear    (alternative to beta_db)
    alpha           path-loss exponent                           (2)
    fading          none | rayleigh | nakagami                   (rayleigh)
    m               Nakagami shape, integer >= 1                 (1)
    scheme          independent | cs                             (independent)
    slot_mode       sync | async                                 (async)
    r_cs            carrier-sensing radius in m, or auto         (auto)
    access          per-slot channel access probability          (0.05)
    p_tr            transmitter access probability, or auto      (auto)
    approx_async    use 2p instead of 2p - p^2                   (false)
    attempt_cap     give up after this many attempts             (1000000)
"""
from __future__ import annotations

from pathlib import Path

from .errors import ParseError, ValidationError
from .propagation import FadingModel, db_to_linear
from .safety import ChainScenario

# IEEE 802.11p data rate (Mbit/s) -> SIR decoding threshold (dB)
RATE_TABLE = {3.0: 5.0, 4.5: 6.0, 6.0: 8.0, 9.0: 11.0, 12.0: 15.0, 18.0: 20.0, 24.0: 25.0}


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _choice(*options):
    def conv(text):
        low = text.lower()
        if low not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return low
    return conv


def _float_or_auto(text):
    return None if text.lower() == "auto" else float(text)


SCHEMA = {
    "n": _int,
    "spacing": float,
    "velocity": float,
    "decel_min": float,
    "decel_max": float,
    "reaction_mu": float,
    "reaction_sigma": float,
    "obstructions": _int,
    "packet_bytes": float,
    "rate_mbps": float,
    "beta_db": float,
    "beta": float,
    "alpha": float,
    "fading": _choice("none", "rayleigh", "nakagami"),
    "m": _int,
    "scheme": _choice("independent", "cs"),
    "slot_mode": _choice("sync", "async"),
    "r_cs": _float_or_auto,
    "access": float,
    "p_tr": _float_or_auto,
    "approx_async": _bool,
    "attempt_cap": _int,
}


def read_config(path) -> dict:
    """Parse a config file into a dict of typed values (only keys present)."""
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in SCHEMA:
            raise ParseError("unknown key", line=lineno, key=key)
        if key in values:
            raise ParseError("duplicate key", line=lineno, key=key)
        try:
            values[key] = SCHEMA[key](value)
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, key=key) from None
    if "beta" in values and "beta_db" in values:
        raise ParseError("give either beta or beta_db, not both", key="beta")
    return values


def resolve_beta(values: dict) -> float:
    if "beta" in values:
        return values["beta"]
    if "beta_db" in values:
        return db_to_linear(values["beta_db"])
    rate = values.get("rate_mbps", 6.0)
    if rate not in RATE_TABLE:
        raise ValidationError(f"no SIR threshold tabulated for {rate} Mbit/s; set beta_db")
    return db_to_linear(RATE_TABLE[rate])


def fading_from(values: dict) -> FadingModel:
    kind = values.get("fading", "nakagami" if "m" in values else "rayleigh")
    if kind == "none":
        return FadingModel.none()
    if kind == "rayleigh":
        if values.get("m", 1) != 1:
            raise ValidationError("rayleigh fading implies m = 1")
        return FadingModel.rayleigh()
    try:
        return FadingModel.nakagami(values.get("m", 1))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def scenario_from_values(values: dict) -> ChainScenario:
    defaults = ChainScenario.__dataclass_fields__
    kw = dict(
        n=values.get("n", defaults["n"].default),
        spacing=values.get("spacing", defaults["spacing"].default),
        v0=values.get("velocity", defaults["v0"].default),
        decel_range=(values.get("decel_min", 6.0), values.get("decel_max", 9.0)),
        reaction_mu=values.get("reaction_mu", defaults["reaction_mu"].default),
        reaction_sigma=values.get("reaction_sigma", defaults["reaction_sigma"].default),
        obstructions=values.get("obstructions", defaults["obstructions"].default),
        packet_bits=8.0 * values.get("packet_bytes", 250.0),
        rate=1e6 * values.get("rate_mbps", 6.0),
        beta=resolve_beta(values),
        alpha=values.get("alpha", defaults["alpha"].default),
        fading=fading_from(values),
        scheme=values.get("scheme", "independent"),
        slot_mode=values.get("slot_mode", "async"),
        r_cs=values.get("r_cs"),
        access=values.get("access", defaults["access"].default),
        p_tr=values.get("p_tr"),
        approx_async=values.get("approx_async", False),
        attempt_cap=values.get("attempt_cap", defaults["attempt_cap"].default),
    )
    return ChainScenario(**kw)


def parse_config(path) -> ChainScenario:
    """Read a scenario file; unspecified keys take the highway defaults."""
    return scenario_from_values(read_config(path))


def scenario_snapshot(sc: ChainScenario) -> dict:
    """Plain-data view of a scenario for manifests."""
    return {
        "n": sc.n,
        "spacing": sc.spacing,
        "velocity": sc.v0,
        "decel_min": sc.decel_range[0],
        "decel_max": sc.decel_range[1],
        "reaction_mu": sc.reaction_mu,
        "reaction_sigma": sc.reaction_sigma,
        "obstructions": sc.obstructions,
        "packet_bytes": sc.packet_bits / 8.0,
        "rate_mbps": sc.rate / 1e6,
        "beta": sc.beta,
        "alpha": sc.alpha,
        "fading": sc.fading.label,
        "m": sc.fading.m,
        "scheme": sc.scheme.value,
        "slot_mode": sc.slot_mode.value,
        "r_cs": "auto" if sc.r_cs is None else sc.r_cs,
        "access": list(sc.access) if isinstance(sc.access, tuple) else sc.access,
        "p_tr": "auto" if sc.p_tr is None else sc.p_tr,
        "approx_async": sc.approx_async,
        "attempt_cap": sc.attempt_cap,
    }
