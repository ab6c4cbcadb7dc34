"""Exception hierarchy shared by every module."""


class C3Error(Exception):
    """Base class for errors raised by the toolchain and runtime."""


class ErpParamError(C3Error, ValueError):
    """A distribution was given parameters outside its domain."""


class InitializationFailure(C3Error):
    """No trace with finite score was found within the retry limit."""


class EnumerationError(C3Error):
    """The program cannot be enumerated exactly."""


class Reject(Exception):
    """Raised inside a proposal when the trace score becomes -inf."""
