"""Exception types shared across the simulator."""


class FogsimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FogsimError):
    """Invalid or incomplete configuration (missing variables, bad parameters)."""


class UndefinedScoreError(FogsimError):
    """Defuzzification requested while no output set is activated."""


class TraceFormatError(FogsimError):
    """A trace file does not match the documented schema."""
