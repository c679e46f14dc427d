"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class DaxtError(Exception):
    """Base class for all errors raised by daxt."""


class ContractViolation(DaxtError, ValueError):
    """An operation was called outside its preconditions."""


class ConfigError(ContractViolation):
    """Invalid configuration value or key."""


class SpadlFormatError(ContractViolation):
    """The SPADL CSV cannot be read (missing column, bad header)."""


class NotValuableError(ContractViolation):
    """The action has no xT value (not a successful moving action)."""


class NotFittedError(DaxtError, RuntimeError):
    """A scaler was used before it was fitted."""


class TrainingFault(DaxtError, RuntimeError):
    """Training produced a non-finite loss or parameter."""


class ModelLoadError(DaxtError, ValueError):
    """A model file is corrupted, truncated or of another format version."""


class MissingArtifactError(DaxtError, FileNotFoundError):
    """A prior-stage artifact required by a command does not exist."""

    def __init__(self, path: object, producer: str):
        super().__init__(f"Required artifact missing: {path} (produced by `daxt {producer}`)")
        self.path = path
        self.producer = producer
