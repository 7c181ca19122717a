"""Exception hierarchy for netlocal.

Every error raised by the library derives from NetlocalError so callers
(and the CLI exit-code mapping) can distinguish library failures from bugs.
"""


class NetlocalError(Exception):
    """Base class for all netlocal errors."""


class DimensionError(NetlocalError):
    """Operands have incompatible or non-square dimensions."""


class RangeError(NetlocalError):
    """A numeric argument lies outside its admissible range."""


class ScenarioError(NetlocalError):
    """A network scenario is malformed (unsupported n, bad operator lists, ...)."""


class KindError(NetlocalError):
    """An object built for one scenario kind was fed to code expecting the other."""


class SizeGuardError(NetlocalError):
    """A computation would exceed a documented size guard."""


class NoCrossingError(NetlocalError):
    """A bisection target is not bracketed by the scanned parameter range."""
