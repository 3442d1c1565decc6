"""AST node types for GraphQL executable documents.

Every node carries a ``span`` of byte offsets into the original source.
Spans are excluded from equality so two parses of equivalent text compare
equal structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    start: int
    end: int


_NO_SPAN = Span(0, 0)


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass
class IntValue:
    value: int
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class FloatValue:
    value: float
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class StringValue:
    value: str
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class BooleanValue:
    value: bool
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class NullValue:
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class EnumValue:
    value: str
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class ListValue:
    items: list["Value"]
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class ObjectValue:
    fields: list[tuple[str, "Value"]]
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class VariableValue:
    name: str
    span: Span = field(default=_NO_SPAN, compare=False)


Value = Union[
    IntValue, FloatValue, StringValue, BooleanValue,
    NullValue, EnumValue, ListValue, ObjectValue, VariableValue,
]


# ---------------------------------------------------------------------------
# Type references (used by variable definitions and SDL)
# ---------------------------------------------------------------------------

@dataclass
class TypeRef:
    """A named type with list/non-null wrappers, e.g. ``[User!]!``.

    ``wrappers`` records the nesting from the outside in: each element is
    ``"list"`` or ``"non_null"``.
    """

    name: str
    wrappers: tuple[str, ...] = ()
    span: Span = field(default=_NO_SPAN, compare=False)

    @property
    def is_list(self) -> bool:
        return "list" in self.wrappers

    @property
    def list_depth(self) -> int:
        return sum(1 for w in self.wrappers if w == "list")


# ---------------------------------------------------------------------------
# Executable document nodes
# ---------------------------------------------------------------------------

@dataclass
class Argument:
    name: str
    value: Value
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class Directive:
    name: str
    arguments: list[Argument] = field(default_factory=list)
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class Field:
    name: str
    alias: Optional[str] = None
    arguments: list[Argument] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)
    selection_set: Optional[list["Selection"]] = None
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class FragmentSpread:
    name: str
    directives: list[Directive] = field(default_factory=list)
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class InlineFragment:
    type_condition: Optional[str] = None
    directives: list[Directive] = field(default_factory=list)
    selection_set: list["Selection"] = field(default_factory=list)
    span: Span = field(default=_NO_SPAN, compare=False)


Selection = Union[Field, FragmentSpread, InlineFragment]


@dataclass
class VariableDefinition:
    name: str
    type: TypeRef
    default: Optional[Value] = None
    directives: list[Directive] = field(default_factory=list)
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class OperationDefinition:
    operation: str  # "query" | "mutation" | "subscription"
    name: Optional[str] = None
    variable_definitions: list[VariableDefinition] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)
    selection_set: list[Selection] = field(default_factory=list)
    # True when written with the `{ ... }` shorthand (printed back the same way)
    shorthand: bool = field(default=False, compare=False)
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class FragmentDefinition:
    name: str
    type_condition: str
    directives: list[Directive] = field(default_factory=list)
    selection_set: list[Selection] = field(default_factory=list)
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass
class Document:
    operations: list[OperationDefinition] = field(default_factory=list)
    fragments: dict[str, FragmentDefinition] = field(default_factory=dict)
    span: Span = field(default=_NO_SPAN, compare=False)
