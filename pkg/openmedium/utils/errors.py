"""Exception types shared by the engine, the media and the CLI."""


class OpenMediumError(Exception):
    """Base class for every error the engine raises on purpose."""


class ConfigError(OpenMediumError, ValueError):
    pass


class CheckpointError(OpenMediumError, ValueError):
    pass


class GenomeError(OpenMediumError, ValueError):
    pass


class RuleError(OpenMediumError, ValueError):
    pass


class PlacementError(OpenMediumError, ValueError):
    """Not enough room on the grid (or in the soup) to place something."""


class AuditViolation(OpenMediumError, RuntimeError):
    def __init__(self, step, detail, expected=None, actual=None):
        self.step = step
        self.detail = detail
        self.expected = expected
        self.actual = actual
        super().__init__(f"audit violation at step {step}: {detail} (expected {expected}, actual {actual})")


class Extinction(OpenMediumError, RuntimeError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"extinction at step {step}")


class UsageError(OpenMediumError, ValueError):
    """Bad command-line input: unknown selector, missing run artifacts."""
