"""Exception hierarchy.

Each CLI-facing error carries a ``category`` used to pick the exit code.
"""


class GfoddError(Exception):
    category = "model"


class VocabularyError(GfoddError):
    """Undeclared object, predicate or sort mismatch."""


class EmptyDomainError(GfoddError):
    """Aggregation over a sort with no objects."""


class ConstructionError(GfoddError):
    """Diagram violates the atom ordering or references unknown variables."""
    category = "form"


class FormError(GfoddError):
    """Aggregation prefix is not in the shape an operation requires."""
    category = "form"


class ModelError(GfoddError):
    """Semantic error in a domain description."""


class ParseError(GfoddError):
    category = "parse"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ResourceError(GfoddError):
    """A size cap or node budget was exceeded.

    ``partial`` holds whatever was computed before the failure.
    """
    category = "resource"

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
