class EgoShiftError(Exception):
    exit_code = 1


class ConfigError(EgoShiftError, ValueError):
    """Configuration value out of its documented range."""

    exit_code = 2


class MissingStageError(EgoShiftError):
    """A stage was asked to run before the stage producing its inputs."""

    exit_code = 3

    def __init__(self, stage: str, path=None):
        self.stage = stage
        self.path = path
        where = f" (expected {path})" if path is not None else ""
        super().__init__(f"missing stage: {stage}{where}")


class DataError(EgoShiftError):
    exit_code = 4
