"""SDL schema model: type definitions, field resolution, adjacency graph."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .errors import ParseError, UnresolvedTypeError
from .lexer import Token, line_col, tokenize

BUILTIN_SCALARS = frozenset({"Int", "Float", "String", "Boolean", "ID"})

_TYPE_KEYWORDS = frozenset({"type", "interface", "union", "enum", "scalar", "input"})


@dataclass
class FieldDef:
    name: str
    type: ast.TypeRef


@dataclass
class TypeDefinition:
    kind: str  # object | interface | union | enum | scalar | input
    name: str
    fields: dict[str, FieldDef] = field(default_factory=dict)
    members: list[str] = field(default_factory=list)  # union members
    values: list[str] = field(default_factory=list)   # enum values
    interfaces: list[str] = field(default_factory=list)


@dataclass
class Schema:
    types: dict[str, TypeDefinition]
    query_root: str | None
    mutation_root: str | None = None
    subscription_root: str | None = None
    # object/interface type -> set of object/interface types reachable via one field
    adjacency: dict[str, set[str]] = field(default_factory=dict)

    def root_for(self, operation: str) -> str | None:
        if operation == "mutation":
            return self.mutation_root
        if operation == "subscription":
            return self.subscription_root
        return self.query_root

    def field_type(self, type_name: str, field_name: str) -> ast.TypeRef | None:
        tdef = self.types.get(type_name)
        if tdef is None:
            return None
        fdef = tdef.fields.get(field_name)
        return fdef.type if fdef else None

    def is_composite(self, name: str) -> bool:
        tdef = self.types.get(name)
        return tdef is not None and tdef.kind in ("object", "interface", "union")

    def is_leaf(self, name: str) -> bool:
        if name in BUILTIN_SCALARS:
            return True
        tdef = self.types.get(name)
        return tdef is not None and tdef.kind in ("scalar", "enum")


def parse_schema(sdl: str) -> Schema:
    """Parse SDL text and resolve all type references.

    Raises ParseError on syntax errors and UnresolvedTypeError listing every
    undefined name referenced by a field, union member, or root declaration.
    """
    parser = _SdlParser(sdl)
    types, roots = parser.parse()
    schema = _build_schema(types, roots)
    return schema


def _build_schema(types: dict[str, TypeDefinition],
                  roots: dict[str, str | None]) -> Schema:
    missing: set[str] = set()
    for tdef in types.values():
        for fdef in tdef.fields.values():
            name = fdef.type.name
            if name not in types and name not in BUILTIN_SCALARS:
                missing.add(name)
        for member in tdef.members:
            if member not in types:
                missing.add(member)
        for iface in tdef.interfaces:
            if iface not in types:
                missing.add(iface)

    query_root = roots.get("query") or ("Query" if "Query" in types else None)
    mutation_root = roots.get("mutation") or ("Mutation" if "Mutation" in types else None)
    subscription_root = roots.get("subscription") or (
        "Subscription" if "Subscription" in types else None)
    for root in (roots.get("query"), roots.get("mutation"), roots.get("subscription")):
        if root and root not in types:
            missing.add(root)
    if missing:
        raise UnresolvedTypeError(sorted(missing))

    adjacency: dict[str, set[str]] = {}
    for tdef in types.values():
        if tdef.kind not in ("object", "interface"):
            continue
        targets: set[str] = set()
        for fdef in tdef.fields.values():
            target = types.get(fdef.type.name)
            if target is not None and target.kind in ("object", "interface"):
                targets.add(target.name)
        adjacency[tdef.name] = targets

    return Schema(types=types, query_root=query_root, mutation_root=mutation_root,
                  subscription_root=subscription_root, adjacency=adjacency)


class _SdlParser:
    """Hand-rolled SDL reader sharing the document lexer.

    Descriptions and directives on type-system elements are accepted and
    discarded; the checks only need types, fields, and roots.
    """

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == value

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        line, col = line_col(self.source, tok.start)
        shown = tok.value if tok.kind != "EOF" else "<end of input>"
        return ParseError(f"{message}, found {shown!r}", line, col)

    def expect_punct(self, value: str) -> Token:
        if not self.at_punct(value):
            raise self.error(f"expected {value!r}")
        return self.next()

    def expect_name(self) -> str:
        tok = self.peek()
        if tok.kind != "NAME":
            raise self.error("expected a name")
        return self.next().value

    def skip_description(self) -> None:
        if self.peek().kind == "STRING":
            self.next()

    def skip_directives(self) -> None:
        while self.at_punct("@"):
            self.next()
            self.expect_name()
            if self.at_punct("("):
                self.next()
                depth = 0
                while True:
                    tok = self.next()
                    if tok.kind == "EOF":
                        raise self.error("unterminated directive arguments")
                    if tok.kind == "PUNCT" and tok.value == "(":
                        depth += 1
                    elif tok.kind == "PUNCT" and tok.value == ")":
                        if depth == 0:
                            break
                        depth -= 1

    def parse(self) -> tuple[dict[str, TypeDefinition], dict[str, str | None]]:
        types: dict[str, TypeDefinition] = {}
        roots: dict[str, str | None] = {}
        saw_definition = False
        while self.peek().kind != "EOF":
            self.skip_description()
            tok = self.peek()
            if tok.kind != "NAME":
                raise self.error("expected a type-system definition")
            keyword = tok.value
            if keyword == "schema":
                self.next()
                self.skip_directives()
                self.expect_punct("{")
                while not self.at_punct("}"):
                    op = self.expect_name()
                    self.expect_punct(":")
                    roots[op] = self.expect_name()
                self.next()
                saw_definition = True
                continue
            if keyword == "directive":
                self._skip_directive_definition()
                saw_definition = True
                continue
            if keyword not in _TYPE_KEYWORDS:
                raise self.error(f"unsupported definition {keyword!r}")
            self.next()
            tdef = self._parse_type_definition(keyword)
            if tdef.name in types:
                raise self.error(f"duplicate type {tdef.name!r}")
            types[tdef.name] = tdef
            saw_definition = True
        if not saw_definition:
            raise ParseError("empty schema", 1, 1)
        return types, roots

    def _skip_directive_definition(self) -> None:
        # directive @name(args) [repeatable] on LOC | LOC
        self.next()
        self.expect_punct("@")
        self.expect_name()
        if self.at_punct("("):
            self.next()
            depth = 0
            while True:
                tok = self.next()
                if tok.kind == "EOF":
                    raise self.error("unterminated directive definition")
                if tok.kind == "PUNCT" and tok.value == "(":
                    depth += 1
                elif tok.kind == "PUNCT" and tok.value == ")":
                    if depth == 0:
                        break
                    depth -= 1
        if self.peek().kind == "NAME" and self.peek().value == "repeatable":
            self.next()
        if not (self.peek().kind == "NAME" and self.peek().value == "on"):
            raise self.error("expected 'on' in directive definition")
        self.next()
        if self.at_punct("|"):
            self.next()
        self.expect_name()
        while self.at_punct("|"):
            self.next()
            self.expect_name()

    def _parse_type_definition(self, kind: str) -> TypeDefinition:
        name = self.expect_name()
        if kind == "scalar":
            self.skip_directives()
            return TypeDefinition(kind="scalar", name=name)
        if kind == "union":
            self.skip_directives()
            members: list[str] = []
            if self.at_punct("="):
                self.next()
                if self.at_punct("|"):
                    self.next()
                members.append(self.expect_name())
                while self.at_punct("|"):
                    self.next()
                    members.append(self.expect_name())
            return TypeDefinition(kind="union", name=name, members=members)
        if kind == "enum":
            self.skip_directives()
            values: list[str] = []
            if self.at_punct("{"):
                self.next()
                while not self.at_punct("}"):
                    self.skip_description()
                    values.append(self.expect_name())
                    self.skip_directives()
                self.next()
            return TypeDefinition(kind="enum", name=name, values=values)

        interfaces: list[str] = []
        if self.peek().kind == "NAME" and self.peek().value == "implements":
            self.next()
            if self.at_punct("&"):
                self.next()
            interfaces.append(self.expect_name())
            while self.at_punct("&"):
                self.next()
                interfaces.append(self.expect_name())
        self.skip_directives()
        fields: dict[str, FieldDef] = {}
        if self.at_punct("{"):
            self.next()
            while not self.at_punct("}"):
                self.skip_description()
                fname = self.expect_name()
                if self.at_punct("("):
                    self._skip_field_arguments()
                self.expect_punct(":")
                ftype = self._parse_type_ref()
                self.skip_directives()
                if fname in fields:
                    raise self.error(f"duplicate field {fname!r} on {name!r}")
                fields[fname] = FieldDef(name=fname, type=ftype)
            self.next()
            if not fields:
                raise self.error(f"type {name!r} has an empty field block")
        mapped = {"type": "object", "interface": "interface", "input": "input"}[kind]
        return TypeDefinition(kind=mapped, name=name, fields=fields,
                              interfaces=interfaces)

    def _skip_field_arguments(self) -> None:
        self.expect_punct("(")
        while not self.at_punct(")"):
            self.skip_description()
            self.expect_name()
            self.expect_punct(":")
            self._parse_type_ref()
            if self.at_punct("="):
                self.next()
                self._skip_const_value()
            self.skip_directives()
        self.next()

    def _skip_const_value(self) -> None:
        tok = self.next()
        if tok.kind in ("INT", "FLOAT", "STRING", "NAME"):
            return
        if tok.kind == "PUNCT" and tok.value in "[{":
            close = "]" if tok.value == "[" else "}"
            depth = 0
            while True:
                inner = self.next()
                if inner.kind == "EOF":
                    raise self.error("unterminated default value")
                if inner.kind == "PUNCT" and inner.value == tok.value:
                    depth += 1
                elif inner.kind == "PUNCT" and inner.value == close:
                    if depth == 0:
                        return
                    depth -= 1
            return
        raise self.error("expected a default value")

    def _parse_type_ref(self) -> ast.TypeRef:
        wrappers: list[str] = []

        def inner() -> str:
            if self.at_punct("["):
                self.next()
                wrappers.append("list")
                name = inner()
                self.expect_punct("]")
            else:
                name = self.expect_name()
            if self.at_punct("!"):
                self.next()
                wrappers.append("non_null")
            return name

        return ast.TypeRef(name=inner(), wrappers=tuple(wrappers))
