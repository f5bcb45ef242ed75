"""Exception types shared across the package."""


class HorolabError(Exception):
    """Base class for package-specific failures."""


class PrecisionExhausted(HorolabError):
    """Raised when a computation cannot certify its result at the working precision.

    Typical trigger: reducing a frame whose translation part needs more bits than
    the element carries, so the fractional part would be pure rounding noise.
    """


class ConfigError(HorolabError):
    """Raised for malformed experiment configuration (CLI exit code 2)."""


class VerifierFailure(HorolabError):
    """Raised when a checked inequality fails; carries a witness dict (CLI exit code 4)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness if witness is not None else {}
