"""Exception types shared across the knowledge-base, engine, and session layers."""


class KbError(Exception):
    """Base class for knowledge-base loading and serialization failures."""


class ParseError(KbError):
    """Malformed KB document (bad JSON, wrong shape, unknown keys)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class MissingReferenceError(KbError):
    """A document references an id that does not exist."""


class DuplicateIdError(KbError):
    """Two entities in one scope carry the same identifier."""


class InvalidKbError(KbError):
    """Operation requires a KB that passes validation."""


class EngineError(Exception):
    """Base class for belief/increment computation failures."""


class MassRangeError(EngineError):
    """A belief mass fell outside the open interval (0, 1)."""


class TotalConflictError(EngineError):
    """Combination left no non-conflicting mass to renormalize."""


class OracleSizeError(EngineError):
    """Frame exceeds the exact-combination size limit."""


class UnknownNodeError(EngineError):
    """A node id is not part of the hierarchy being operated on."""


class SessionError(Exception):
    """Base class for consultation-session misuse."""


class UnknownItemError(SessionError):
    """Answer refers to an item id absent from the knowledge base."""


class DuplicateAnswerError(SessionError):
    """Item was already answered in this session."""


class SessionFinishedError(SessionError):
    """Finished sessions accept no further answers."""
