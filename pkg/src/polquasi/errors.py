"""Exception types; the CLI maps them to exit codes."""


class ValidationError(ValueError):
    """Input data or parameters violate a documented invariant."""


class NumericalError(RuntimeError):
    """A numerical stage could not produce a trustworthy result."""


class RankDeficientError(NumericalError):
    pass


class StageError(RuntimeError):
    """Failure inside one pipeline stage; the message is prefixed with the stage name."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
