"""Exception hierarchy.

Configuration and argument problems derive from :class:`ConfigError`;
failures of the numerical machinery (gaps in a mask, points with no
preimage, vanishing projective denominators) derive from
:class:`NumericError`. The CLI maps the two families to exit codes 1 and 2.
"""


class FractransError(Exception):
    pass


class ConfigError(FractransError, ValueError):
    pass


class BadProbabilities(ConfigError):
    pass


class NumericError(FractransError, ArithmeticError):
    pass


class DegenerateDenominator(NumericError):
    pass


class NotInvertibleHere(NumericError):
    pass


class MaskError(NumericError):
    pass


class MaskGap(MaskError):
    pass


class MaskOverlap(MaskError):
    pass


class MaskNotSubset(MaskError):
    pass


class OrbitEscape(NumericError):
    """A masked orbit left the domain by more than the clamping tolerance."""


class NoIntersection(NumericError):
    pass


class EmptyAddress(FractransError, IndexError):
    pass
