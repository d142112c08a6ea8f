"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array or genome sizes do not agree."""


class NumericError(ValueError):
    """A non-finite value reached the simulator."""


class ScenarioError(ValueError):
    """Unknown scenario, malformed params, or an illegal environment transition."""


class ConfigError(ValueError):
    """Invalid run configuration. ``path`` names the offending field, e.g. ``search.pop_size``."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class CheckpointError(RuntimeError):
    """Checkpoint file is corrupt or fails its checksum."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written by an incompatible format version."""
