"""Exception types shared across the package."""


class SvhmcError(Exception):
    """Base class for all package-specific errors."""


class NumericalRangeError(SvhmcError):
    """A state component left the numerically representable range.

    Raised when exp(-h_t) would overflow (h_t < -700) or an energy/gradient
    term is non-finite.  Such states indicate a diverged trajectory and abort
    the proposal, not the program.
    """


class DegeneratePosteriorError(SvhmcError):
    """A conditional posterior collapsed to a point (zero scale)."""


class ProposalUndefinedError(SvhmcError):
    """The Gaussian proposal for the persistence update has no valid variance."""


class DegenerateTraceError(SvhmcError):
    """A chain trace has zero variance; autocorrelations are undefined."""


class InsufficientLagsError(SvhmcError):
    """The autocorrelation window did not close within the available lags."""


class PriceParseError(SvhmcError):
    """A price or trace CSV row could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
