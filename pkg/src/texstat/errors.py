"""Exception types raised across the package.

Everything derives from :class:`TexstatError` so callers (and the CLI) can
catch data-level failures with a single except clause.
"""


class TexstatError(Exception):
    """Base class for all texstat errors."""


class InvalidSpec(TexstatError):
    """A filterbank spec or configuration violates its invariants."""


class TooFewBins(InvalidSpec):
    """The transform length cannot resolve the requested number of bands."""


class LengthMismatch(TexstatError):
    """Signal length does not match what the operation requires."""


class ShapeMismatch(TexstatError):
    """Array shapes of paired inputs are incompatible."""


class ConfigMismatch(TexstatError):
    """Inputs were produced under different (or wrong) configurations."""


class NonFiniteInput(TexstatError):
    """Input contains NaN or infinity."""


class ParamsTooLong(TexstatError):
    """Envelope parameter vector does not fit the target signal length."""


class DimMismatch(TexstatError):
    """Embedding matrices have incompatible dimensions."""


class DegenerateCovariance(TexstatError):
    """Covariance is rank-deficient beyond what shrinkage can repair."""


class InvalidFraction(TexstatError):
    """A shift or noise fraction lies outside (0, 1)."""


class UnsupportedFormat(TexstatError):
    """Audio file encoding is not one of the supported WAV formats."""


class CorruptFile(TexstatError):
    """File is not a parseable RIFF/WAVE container."""
