"""Typed failures that map to machine-readable error JSON."""


class TrainerError(Exception):
    """Base class for failures the CLI reports as error JSON."""


class SchemaError(TrainerError):
    """A manifest or input file has the wrong shape or invalid values."""


class DataError(TrainerError):
    """Training data is missing, unreadable, or empty."""


class ConfigError(TrainerError):
    """Trainer configuration conflicts with the manifest."""


class CheckpointError(TrainerError):
    """An init or predict checkpoint is missing, corrupt, or mismatched."""
