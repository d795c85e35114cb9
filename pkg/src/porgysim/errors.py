"""Exception hierarchy. Every error carries a short machine-readable code."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "ENGINE"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class GraphError(EngineError):
    code = "GRAPH"


class ParseError(EngineError):
    """Malformed textual input; carries position info when known."""

    code = "PARSE"

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, offset: int | None = None):
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", column {column}" if column is not None else "")
        elif offset is not None:
            loc = f" at offset {offset}"
        super().__init__(message + loc)
        self.line = line
        self.column = column
        self.offset = offset


class RuleError(EngineError):
    code = "RULE"


class ExpressionError(EngineError):
    code = "EXPR"


class ApplicationError(EngineError):
    """A single rule application failed; the host state is unchanged."""

    code = "APPLY"


class StrategyError(EngineError):
    code = "STRATEGY"


class BudgetExceeded(StrategyError):
    code = "BUDGET"


class ConfigError(EngineError):
    code = "CONFIG"


class TraceError(EngineError):
    code = "TRACE"
