"""Exception types shared across the package."""


class PhasorGuardError(Exception):
    """Base class for all phasorguard errors."""


class ConfigError(PhasorGuardError):
    """Invalid configuration value or combination."""


class DomainError(PhasorGuardError):
    """Input outside the mathematical domain of an operation."""


class AlignmentError(PhasorGuardError):
    """Channels that should share a time base do not."""


class RangeError(PhasorGuardError):
    """Requested window or shift exceeds the extent of the data."""


class SpecError(PhasorGuardError):
    """An attack/event specification violates its own constraints."""


class DataFormatError(PhasorGuardError):
    """Malformed input file (CSV/JSON)."""
