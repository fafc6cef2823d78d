"""Exception hierarchy shared by the codec, pipeline and CLI."""


class WavehideError(Exception):
    """Base class for every error raised by this package."""


class FormatError(WavehideError, ValueError):
    """Malformed PGM data or key file."""


class CapacityError(WavehideError):
    """Payload does not fit into the carriers at the requested threshold."""

    def __init__(self, message, capacity_bits=None):
        super().__init__(message)
        self.capacity_bits = capacity_bits


class PixelOverflowError(WavehideError):
    """Reconstructed marked pixels left [0, 255]."""

    def __init__(self, message, coords=()):
        super().__init__(message)
        self.coords = list(coords)


class CorruptionError(WavehideError):
    """A marked coefficient could not be classified during extraction."""


class VerificationError(WavehideError):
    """Checksum mismatch or key/image inconsistency after extraction."""
