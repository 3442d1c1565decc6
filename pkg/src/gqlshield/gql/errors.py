"""Errors raised by parsing, expansion, and schema resolution."""

from __future__ import annotations


class GqlError(Exception):
    """Base class for all query/schema processing errors."""


class ParseError(GqlError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} at {line}:{column}" if line else message)
        self.message = message
        self.line = line
        self.column = column


class UnresolvedTypeError(GqlError):
    """SDL references one or more type names that are never defined."""

    def __init__(self, names: list[str]):
        super().__init__("undefined type(s): " + ", ".join(sorted(names)))
        self.names = sorted(names)


class ExpansionError(GqlError):
    """Fragment spread cannot be expanded (undefined name or cycle)."""


class UnknownFieldError(GqlError):
    """A query field does not exist on its parent type in the schema."""

    def __init__(self, type_name: str, field_name: str):
        super().__init__(f"field '{field_name}' not defined on type '{type_name}'")
        self.type_name = type_name
        self.field_name = field_name


class ValidationError(GqlError):
    """Document fails the light validation pass (unknown fields or type conditions)."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems
