"""Exception hierarchy shared by every spellforge module."""


class SpellforgeError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(SpellforgeError, ValueError):
    """Input violates a structural precondition (empty stream, bad position, ...)."""


class SchemaVersionError(SpellforgeError):
    """A serialized file declares a schema version this build cannot read."""

    def __init__(self, found, expected):
        super().__init__(f"unsupported schema_version {found!r} (expected {expected})")
        self.found = found
        self.expected = expected


class ParseError(SpellforgeError):
    """A serialized file is malformed. ``line``/``column`` are 1-based when known."""

    def __init__(self, message, source=None, line=None, column=None):
        where = ""
        if source is not None:
            where = f"{source}"
        if line is not None:
            where += f":{line}:{column if column is not None else 0}"
        super().__init__(f"{where}: {message}" if where else message)
        self.source = source
        self.line = line
        self.column = column


class ConfigError(StructuralError):
    """Configuration failed validation; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.field}: {v.message}" for v in self.violations)
        super().__init__(f"invalid configuration: {lines}")
