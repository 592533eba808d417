"""Exception types raised by the library.

The CLI maps these onto its exit-code contract: data problems (decode,
schema, geometry, joins, empty supports) exit with 2, numerical failures
(optimizer non-convergence) with 3.
"""


class DelsceneError(Exception):
    """Base class for all library errors."""


class DecodeError(DelsceneError):
    """A raster file could not be read or decoded."""


class FormatError(DelsceneError):
    """A file decoded but its sample format is unsupported."""


class GeometryError(DelsceneError):
    """Dimensions are inconsistent (mask vs image, kernel vs image, pairs)."""


class SchemaError(DelsceneError):
    """A manifest or table violates its documented schema."""


class ParseError(DelsceneError):
    """A cell or value failed to parse; the message carries the location."""


class EmptySupportError(DelsceneError):
    """No samples survive exclusion, so a histogram has no support."""


class SupportError(DelsceneError):
    """A sample lies on or outside the declared distribution support."""


class InsufficientDataError(DelsceneError):
    """Too few samples for the requested estimate."""


class DegenerateSceneError(DelsceneError):
    """All complexity samples are identical; no distribution can be fitted.

    Carries the sample mean and count so callers can still report them.
    """

    def __init__(self, message, mu, n):
        super().__init__(message)
        self.mu = mu
        self.n = n


class DegenerateVarianceError(DelsceneError):
    """An input series is constant, so correlation is undefined."""


class ConvergenceError(DelsceneError):
    """The likelihood optimizer did not converge; carries the last iterate."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


class DomainError(DelsceneError):
    """An argument is outside a function's mathematical domain."""


class JoinError(DelsceneError):
    """Joining two tables produced no usable rows."""


class EmptyMatchError(DelsceneError):
    """A directory pairing matched zero files."""
