"""Exception types shared across the package."""


class ZkError(Exception):
    """Base class for errors raised by this package."""


class BoundExceeded(ZkError):
    """A requested object is larger than the configured resource bound."""


class BadCharacteristic(ZkError):
    """Construction refused because the field characteristic divides n.

    Pass allow_bad_characteristic=True to proceed anyway (a warning is
    emitted; several closed-form counts degenerate in this case).
    """


class ConsistencyError(ZkError):
    """An internal cross-check failed; indicates a bug, not bad input."""
