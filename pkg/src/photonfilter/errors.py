"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands live on different Hilbert spaces or have incompatible shapes."""


class InvariantViolationError(RuntimeError):
    """A structural invariant of the filter state broke during a run.

    Carries enough context to locate the failure: the step index, the
    physical time, and a snapshot of the offending state when available.
    """

    def __init__(self, message, step=None, time=None, state=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.state = state


class IllConditionedJumpError(InvariantViolationError):
    """A jump was requested while the jump intensity was below the guard.

    The jump map divides by the intensity; applying it here would amplify
    round-off into the state, so the step aborts instead.
    """


class ConfigError(ValueError):
    """A run configuration failed validation.

    ``field`` names the offending entry so the CLI can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
