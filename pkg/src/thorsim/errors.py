"""Exception types raised across the simulator."""


class ConfigError(ValueError):
    """A configuration parameter violates a named structural constraint."""


class FormatError(ValueError):
    """A file could not be parsed; the message carries the line number."""


class SchedulerOverflowError(RuntimeError):
    """A spike vector was pushed into a full scheduler FIFO."""


class SimulationError(RuntimeError):
    """The executive was driven outside its operating contract."""
