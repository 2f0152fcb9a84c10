class OptionizeError(Exception):
    """Base class for every error raised by optionize."""


class ConfigurationError(OptionizeError, ValueError):
    """Invalid configuration: unknown layout id, bad values, invalid agent/experiment pair."""


class UsageError(OptionizeError, RuntimeError):
    """A caller broke an operation's contract."""


class GenerationError(OptionizeError, RuntimeError):
    """Task generation constraints cannot be satisfied."""


class PersistenceError(OptionizeError, OSError):
    """A persisted file is corrupt, truncated or of an unknown version."""
