"""Exception hierarchy shared by the parser, graph builder, classifier and service."""


class PMAError(Exception):
    """Base class. ``phase`` names the pipeline stage that raised it."""

    phase = "internal"


class ParseError(PMAError):
    phase = "parse"

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class RangeError(ParseError):
    """An integer field does not fit in 256 bits."""


class SchemaError(ParseError):
    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"missing or invalid field: {field}")


class MalformedEvent(PMAError):
    """A log carries the ERC20 Transfer signature but not its payload layout."""

    phase = "parse"

    def __init__(self, message: str, log_index: int | None = None):
        self.log_index = log_index
        super().__init__(message)


class NetworkError(PMAError):
    phase = "parse"
    retryable = True


class NotFound(PMAError):
    phase = "parse"


class UnsupportedNode(PMAError):
    phase = "parse"


class EmptyGraph(PMAError):
    phase = "build"


class FeatureMissing(PMAError):
    phase = "classify"


class ShapeError(PMAError):
    phase = "classify"


class DegenerateDataset(PMAError):
    phase = "train"


class NumericalDivergence(PMAError):
    phase = "train"

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"non-finite loss at epoch {epoch}")


class InputError(PMAError):
    phase = "evaluate"


class UndefinedAUC(InputError):
    pass


class ConfigError(PMAError):
    phase = "config"
