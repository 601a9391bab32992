from typing import Any, Iterable, Optional


class CdiError(Exception):
    """Base class for every error raised by cdicheck"""


class ConstraintSyntaxError(CdiError, ValueError):
    """Constraint text does not follow the constraint grammar.

    Args:
        message: Human readable description
        offset: Byte offset of the offending token in the UTF-8 source
        expected: Tokens that would have been accepted at ``offset``
    """

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownOperator(ConstraintSyntaxError):
    def __init__(self, operator: str, offset: int):
        self.operator = operator
        super().__init__(
            f"Unknown operator '{operator}'",
            offset,
            ["<", ">", "<=", ">=", "=", "!="],
        )


class UnsupportedSyntax(CdiError, ValueError):
    """Function uses a construct outside the analyzable subset"""

    def __init__(self, line: int, construct: str):
        self.line = line
        self.construct = construct
        super().__init__(f"Unsupported syntax on line {line}: {construct}")


class UnsupportedCondition(CdiError):
    """Slicing condition names no parameter the function ever tests.

    The unpruned model is carried on ``model``.
    """

    def __init__(self, message: str, model: Any = None):
        self.model = model
        super().__init__(message)


class SortMismatch(CdiError, ValueError):
    def __init__(self, name: str, detail: str):
        self.name = name
        super().__init__(f"Sort mismatch for '{name}': {detail}")


class UnknownSort(CdiError, ValueError):
    pass


class EmptyEnvironment(CdiError, ValueError):
    pass


class UnknownParameter(CdiError, ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown parameter: {name}")


class InapplicablePattern(CdiError, ValueError):
    def __init__(self, pattern: str, reason: str):
        self.pattern = pattern
        self.reason = reason
        super().__init__(f"{pattern} is not applicable: {reason}")


class CorpusParseError(CdiError, ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"Malformed corpus record on line {line}: {reason}")


class ClientError(CdiError):
    """Chat-completion client failure.

    ``partial`` is filled in by the extraction pipeline with whatever was
    extracted before the failing request.
    """

    def __init__(
        self,
        message: str,
        status: Optional[int] = None,
        retry_after: Optional[float] = None,
        partial: Any = None,
    ):
        self.status = status
        self.retry_after = retry_after
        self.partial = partial
        super().__init__(message)


class ConfigError(CdiError, ValueError):
    pass
