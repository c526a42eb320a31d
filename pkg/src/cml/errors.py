"""Exception types shared across the package."""


class CmlError(Exception):
    """Base class for all library errors."""


class ZeroInput(CmlError):
    pass


class DivisibleByLambda(CmlError):
    pass


class DivisionByZero(CmlError):
    pass


class BothZero(CmlError):
    pass


class NotPrime(CmlError):
    pass


class NotPrimaryPrime(CmlError):
    pass


class NotSplit(CmlError):
    pass


class BadModulus(CmlError):
    pass


class CapExceeded(CmlError):
    pass


class NotInFamily(CmlError):
    pass


class QuadratureNotConverged(CmlError):
    pass


class OutOfStrip(CmlError):
    pass


class DivergentArgument(CmlError):
    pass


class RamifiedPrime(CmlError):
    pass


class ThetaOutOfRange(CmlError):
    pass


class CacheMismatch(CmlError):
    pass


class ConfigError(CmlError):
    pass
