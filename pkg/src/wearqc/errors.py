"""Exception hierarchy shared by all wearqc modules."""


class WearQCError(ValueError):
    """Base class for user-facing errors (bad input, bad parameters)."""


class InvalidParameterError(WearQCError):
    pass


class AlignmentError(WearQCError):
    """Series do not share a timebase, or do not overlap in time."""


class E4ParseError(WearQCError):
    """Malformed Empatica export file. The message names the file and line."""

    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {reason}")


class RecordingError(WearQCError):
    pass


class GapPlacementError(WearQCError):
    pass


class ImputationError(WearQCError):
    pass


class ConfigError(WearQCError):
    pass


class EmptyWindowError(WearQCError):
    """No valid samples remain to compute a metric on."""
