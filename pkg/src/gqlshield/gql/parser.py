"""Recursive-descent parser for GraphQL executable documents.

Implements the October 2021 grammar for the features the security checks
consume: operations, fragments, directives, all value literals, variable
definitions. Selection sets must be non-empty. Nesting is bounded so
hostile inputs raise ParseError instead of exhausting the stack.
"""

from __future__ import annotations

from . import ast
from .errors import ParseError
from .lexer import Token, line_col, tokenize

MAX_NESTING = 400

_OPERATION_TYPES = ("query", "mutation", "subscription")


def parse_query(source: str) -> ast.Document:
    """Parse executable-document text into a Document.

    Raises ParseError on malformed syntax; never raises anything else for
    string input.
    """
    if not isinstance(source, str):
        raise ParseError("source must be text")
    return _Parser(source).parse_document()


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.depth = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect_punct(self, value: str) -> Token:
        tok = self.peek()
        if tok.kind != "PUNCT" or tok.value != value:
            raise self.error(f"expected {value!r}", tok)
        return self.next()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "NAME":
            raise self.error("expected a name", tok)
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == value

    def at_name(self, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == "NAME" and (value is None or tok.value == value)

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        line, col = line_col(self.source, tok.start)
        shown = tok.value if tok.kind != "EOF" else "<end of input>"
        return ParseError(f"{message}, found {shown!r}", line, col)

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("nesting too deep")

    def leave(self) -> None:
        self.depth -= 1

    # -- grammar ------------------------------------------------------------

    def parse_document(self) -> ast.Document:
        operations: list[ast.OperationDefinition] = []
        fragments: dict[str, ast.FragmentDefinition] = {}
        while not self.peek().kind == "EOF":
            if self.at_punct("{"):
                operations.append(self.parse_operation(shorthand=True))
            elif self.at_name("fragment"):
                frag = self.parse_fragment_definition()
                if frag.name in fragments:
                    raise ParseError(f"duplicate fragment name {frag.name!r}",
                                     *line_col(self.source, frag.span.start))
                fragments[frag.name] = frag
            elif self.at_name() and self.peek().value in _OPERATION_TYPES:
                operations.append(self.parse_operation(shorthand=False))
            else:
                raise self.error("expected an operation or fragment definition")
        if not operations and not fragments:
            raise ParseError("empty document", 1, 1)
        return ast.Document(operations=operations, fragments=fragments,
                            span=ast.Span(0, len(self.source)))

    def parse_operation(self, shorthand: bool) -> ast.OperationDefinition:
        start = self.peek().start
        if shorthand:
            op_type = "query"
            name = None
            var_defs: list[ast.VariableDefinition] = []
            directives: list[ast.Directive] = []
        else:
            op_type = self.expect_name().value
            name = self.expect_name().value if self.at_name() else None
            var_defs = self.parse_variable_definitions()
            directives = self.parse_directives()
        selections = self.parse_selection_set()
        end = self.tokens[self.pos - 1].end
        return ast.OperationDefinition(
            operation=op_type, name=name, variable_definitions=var_defs,
            directives=directives, selection_set=selections,
            shorthand=shorthand, span=ast.Span(start, end))

    def parse_variable_definitions(self) -> list[ast.VariableDefinition]:
        if not self.at_punct("("):
            return []
        self.next()
        defs: list[ast.VariableDefinition] = []
        while not self.at_punct(")"):
            start = self.peek().start
            self.expect_punct("$")
            var_name = self.expect_name().value
            self.expect_punct(":")
            type_ref = self.parse_type_ref()
            default = None
            if self.at_punct("="):
                self.next()
                default = self.parse_value(const=True)
            directives = self.parse_directives()
            defs.append(ast.VariableDefinition(
                name=var_name, type=type_ref, default=default,
                directives=directives,
                span=ast.Span(start, self.tokens[self.pos - 1].end)))
        if not defs:
            raise self.error("empty variable definitions")
        self.expect_punct(")")
        return defs

    def parse_type_ref(self) -> ast.TypeRef:
        start = self.peek().start
        wrappers: list[str] = []

        def inner() -> str:
            self.enter()
            try:
                if self.at_punct("["):
                    self.next()
                    wrappers.append("list")
                    name = inner()
                    self.expect_punct("]")
                else:
                    name = self.expect_name().value
                if self.at_punct("!"):
                    self.next()
                    wrappers.append("non_null")
                return name
            finally:
                self.leave()

        name = inner()
        return ast.TypeRef(name=name, wrappers=tuple(wrappers),
                           span=ast.Span(start, self.tokens[self.pos - 1].end))

    def parse_selection_set(self) -> list[ast.Selection]:
        self.enter()
        try:
            self.expect_punct("{")
            selections: list[ast.Selection] = []
            while not self.at_punct("}"):
                selections.append(self.parse_selection())
            if not selections:
                raise self.error("empty selection set")
            self.expect_punct("}")
            return selections
        finally:
            self.leave()

    def parse_selection(self) -> ast.Selection:
        if self.at_punct("..."):
            return self.parse_fragment_selection()
        start = self.peek().start
        first = self.expect_name().value
        alias = None
        name = first
        if self.at_punct(":"):
            self.next()
            alias = first
            name = self.expect_name().value
        arguments = self.parse_arguments()
        directives = self.parse_directives()
        selection_set = None
        if self.at_punct("{"):
            selection_set = self.parse_selection_set()
        return ast.Field(name=name, alias=alias, arguments=arguments,
                         directives=directives, selection_set=selection_set,
                         span=ast.Span(start, self.tokens[self.pos - 1].end))

    def parse_fragment_selection(self) -> ast.Selection:
        start = self.peek().start
        self.expect_punct("...")
        if self.at_name() and self.peek().value != "on":
            name = self.expect_name().value
            directives = self.parse_directives()
            return ast.FragmentSpread(
                name=name, directives=directives,
                span=ast.Span(start, self.tokens[self.pos - 1].end))
        type_condition = None
        if self.at_name("on"):
            self.next()
            type_condition = self.expect_name().value
        directives = self.parse_directives()
        selections = self.parse_selection_set()
        return ast.InlineFragment(
            type_condition=type_condition, directives=directives,
            selection_set=selections,
            span=ast.Span(start, self.tokens[self.pos - 1].end))

    def parse_fragment_definition(self) -> ast.FragmentDefinition:
        start = self.peek().start
        self.expect_name()  # "fragment"
        name_tok = self.expect_name()
        if name_tok.value == "on":
            raise self.error("fragment may not be named 'on'", name_tok)
        if not self.at_name("on"):
            raise self.error("expected 'on' in fragment definition")
        self.next()
        type_condition = self.expect_name().value
        directives = self.parse_directives()
        selections = self.parse_selection_set()
        return ast.FragmentDefinition(
            name=name_tok.value, type_condition=type_condition,
            directives=directives, selection_set=selections,
            span=ast.Span(start, self.tokens[self.pos - 1].end))

    def parse_arguments(self, const: bool = False) -> list[ast.Argument]:
        if not self.at_punct("("):
            return []
        self.next()
        args: list[ast.Argument] = []
        while not self.at_punct(")"):
            start = self.peek().start
            name = self.expect_name().value
            self.expect_punct(":")
            value = self.parse_value(const=const)
            args.append(ast.Argument(
                name=name, value=value,
                span=ast.Span(start, self.tokens[self.pos - 1].end)))
        if not args:
            raise self.error("empty argument list")
        self.expect_punct(")")
        return args

    def parse_directives(self, const: bool = False) -> list[ast.Directive]:
        directives: list[ast.Directive] = []
        while self.at_punct("@"):
            start = self.peek().start
            self.next()
            name = self.expect_name().value
            arguments = self.parse_arguments(const=const)
            directives.append(ast.Directive(
                name=name, arguments=arguments,
                span=ast.Span(start, self.tokens[self.pos - 1].end)))
        return directives

    def parse_value(self, const: bool = False) -> ast.Value:
        self.enter()
        try:
            tok = self.peek()
            span = ast.Span(tok.start, tok.end)
            if tok.kind == "INT":
                self.next()
                return ast.IntValue(int(tok.value), span)
            if tok.kind == "FLOAT":
                self.next()
                return ast.FloatValue(float(tok.value), span)
            if tok.kind == "STRING":
                self.next()
                return ast.StringValue(tok.value, span)
            if tok.kind == "NAME":
                self.next()
                if tok.value == "true":
                    return ast.BooleanValue(True, span)
                if tok.value == "false":
                    return ast.BooleanValue(False, span)
                if tok.value == "null":
                    return ast.NullValue(span)
                return ast.EnumValue(tok.value, span)
            if tok.kind == "PUNCT" and tok.value == "$":
                if const:
                    raise self.error("variables not allowed here")
                self.next()
                name = self.expect_name().value
                return ast.VariableValue(
                    name, ast.Span(span.start, self.tokens[self.pos - 1].end))
            if tok.kind == "PUNCT" and tok.value == "[":
                self.next()
                items: list[ast.Value] = []
                while not self.at_punct("]"):
                    items.append(self.parse_value(const=const))
                end = self.next().end  # "]"
                return ast.ListValue(items, ast.Span(span.start, end))
            if tok.kind == "PUNCT" and tok.value == "{":
                self.next()
                fields: list[tuple[str, ast.Value]] = []
                while not self.at_punct("}"):
                    fname = self.expect_name().value
                    self.expect_punct(":")
                    fields.append((fname, self.parse_value(const=const)))
                end = self.next().end  # "}"
                return ast.ObjectValue(fields, ast.Span(span.start, end))
            raise self.error("expected a value")
        finally:
            self.leave()
