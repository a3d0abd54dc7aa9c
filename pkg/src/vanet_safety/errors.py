"""Exception types raised across the package."""


class VanetError(Exception):
    """Base class for all package errors."""


class DivergentMoment(VanetError, ValueError):
    """A fractional moment E[h^s] does not exist (s <= -m)."""


class WrongFading(VanetError, ValueError):
    pass


class TooManyInterferers(VanetError, ValueError):
    pass


class CsBelowValidity(VanetError, ValueError):
    """Carrier-sensing radius is below the region where hidden nodes are
    mutually exclusive, so the union bound on hidden-node outage no longer
    applies."""


class OverlapAtStart(VanetError, ValueError):
    pass


class UnreachableVehicle(VanetError, RuntimeError):
    pass


class ParseError(VanetError, ValueError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ValidationError(VanetError, ValueError):
    pass
