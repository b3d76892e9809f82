"""Exception hierarchy shared by every module of the toolkit."""


class TableEvalError(Exception):
    """Base class for all errors raised by tablegrid_eval."""


class GridError(TableEvalError, ValueError):
    """A set of logical cells does not describe a valid grid."""


class OverlappingSpans(GridError):
    pass


class UncoveredPosition(GridError):
    pass


class SpanOutOfBounds(GridError):
    pass


class SchemaViolation(TableEvalError, ValueError):
    """Input JSON or XML does not follow the expected schema."""


class HardParseFailure(TableEvalError, ValueError):
    """Input could not be decoded at all (e.g. bytes that are not UTF-8)."""


class OracleLimitExceeded(TableEvalError, ValueError):
    pass


class EmptyCorpus(TableEvalError, ValueError):
    pass


class LengthMismatch(TableEvalError, ValueError):
    pass


class MissingScores(TableEvalError, ValueError):
    pass


class XmlMalformed(SchemaViolation):
    pass


class UnknownClassName(SchemaViolation):
    pass


class ConfigError(TableEvalError):
    """Invalid command-line configuration; maps to exit status 2."""
