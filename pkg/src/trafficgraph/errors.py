"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class TrafficGraphError(Exception):
    """Base class; ``kind`` is the machine-readable tag printed by the CLI."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# graph_core
class UnknownSensorId(TrafficGraphError, KeyError):
    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class SelfLoop(TrafficGraphError, ValueError):
    pass


# spectral
class NotSymmetric(TrafficGraphError, ValueError):
    pass


class ConvergenceFailure(TrafficGraphError, ArithmeticError):
    pass


class RankOutOfRange(TrafficGraphError, ValueError):
    pass


class IndexOutOfRange(TrafficGraphError, IndexError):
    pass


# embeddings
class DimOutOfRange(TrafficGraphError, ValueError):
    pass


class EmptyCorpus(TrafficGraphError, ValueError):
    pass


class NoEdges(TrafficGraphError, ValueError):
    pass


# features
class ZeroVehicles(TrafficGraphError, ZeroDivisionError):
    pass


class MissingMeta(TrafficGraphError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class EmbeddingSizeMismatch(TrafficGraphError, ValueError):
    pass


# classifiers
class EmptyTable(TrafficGraphError, ValueError):
    pass


class ColumnMismatch(TrafficGraphError, ValueError):
    pass


class KTooLarge(TrafficGraphError, ValueError):
    pass


class LengthMismatch(TrafficGraphError, ValueError):
    pass


# dataset_io
class ParseError(TrafficGraphError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SchemaError(TrafficGraphError, ValueError):
    pass


class EmptyDataset(TrafficGraphError, ValueError):
    pass


class TooFewSensors(TrafficGraphError, ValueError):
    pass


# pipeline_cli
class ConfigError(TrafficGraphError, ValueError):
    pass
