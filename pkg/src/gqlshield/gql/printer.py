"""Canonical printer for executable documents.

Format (normative for round-trip tests): 2-space indent, one selection per
line, a single blank line between top-level definitions, operations before
fragments in document order. Anonymous queries written with the shorthand
form print back as `{ ... }`. Strings print with escape sequences; block
strings are normalized to regular strings.
"""

from __future__ import annotations

from . import ast

_STRING_ESCAPES = {
    '"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t",
    "\b": "\\b", "\f": "\\f",
}


def print_document(doc: ast.Document) -> str:
    blocks = [_print_operation(op) for op in doc.operations]
    blocks += [_print_fragment(f) for f in doc.fragments.values()]
    return "\n\n".join(blocks) + "\n"


def print_value(value: ast.Value) -> str:
    if isinstance(value, ast.IntValue):
        return str(value.value)
    if isinstance(value, ast.FloatValue):
        return repr(value.value)
    if isinstance(value, ast.StringValue):
        return print_string(value.value)
    if isinstance(value, ast.BooleanValue):
        return "true" if value.value else "false"
    if isinstance(value, ast.NullValue):
        return "null"
    if isinstance(value, ast.EnumValue):
        return value.value
    if isinstance(value, ast.VariableValue):
        return f"${value.name}"
    if isinstance(value, ast.ListValue):
        return "[" + ", ".join(print_value(v) for v in value.items) + "]"
    if isinstance(value, ast.ObjectValue):
        inner = ", ".join(f"{k}: {print_value(v)}" for k, v in value.fields)
        return "{" + inner + "}"
    raise TypeError(f"not a value node: {value!r}")


def print_string(text: str) -> str:
    out = ['"']
    for ch in text:
        esc = _STRING_ESCAPES.get(ch)
        code = ord(ch)
        if esc is not None:
            out.append(esc)
        elif code < 0x20 or 0xD800 <= code <= 0xDFFF:
            # Control characters and lone surrogates stay escaped so the
            # printed document is always valid, encodable text.
            out.append(f"\\u{code:04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def print_type_ref(ref: ast.TypeRef) -> str:
    text = ref.name
    for wrapper in reversed(ref.wrappers):
        if wrapper == "list":
            text = f"[{text}]"
        else:
            text = f"{text}!"
    return text


def _print_directives(directives: list[ast.Directive]) -> str:
    parts = []
    for d in directives:
        if d.arguments:
            args = ", ".join(f"{a.name}: {print_value(a.value)}" for a in d.arguments)
            parts.append(f"@{d.name}({args})")
        else:
            parts.append(f"@{d.name}")
    return " ".join(parts)


def _print_operation(op: ast.OperationDefinition) -> str:
    if op.shorthand and op.operation == "query" and not op.name \
            and not op.variable_definitions and not op.directives:
        return _print_selection_set(op.selection_set, 0)
    head = op.operation
    if op.name:
        head += f" {op.name}"
    if op.variable_definitions:
        defs = []
        for vd in op.variable_definitions:
            text = f"${vd.name}: {print_type_ref(vd.type)}"
            if vd.default is not None:
                text += f" = {print_value(vd.default)}"
            if vd.directives:
                text += " " + _print_directives(vd.directives)
            defs.append(text)
        head += "(" + ", ".join(defs) + ")"
    if op.directives:
        head += " " + _print_directives(op.directives)
    return head + " " + _print_selection_set(op.selection_set, 0)


def _print_fragment(frag: ast.FragmentDefinition) -> str:
    head = f"fragment {frag.name} on {frag.type_condition}"
    if frag.directives:
        head += " " + _print_directives(frag.directives)
    return head + " " + _print_selection_set(frag.selection_set, 0)


def _print_selection_set(selections: list[ast.Selection], indent: int) -> str:
    pad = "  " * (indent + 1)
    lines = ["{"]
    for sel in selections:
        lines.append(pad + _print_selection(sel, indent + 1))
    lines.append("  " * indent + "}")
    return "\n".join(lines)


def _print_selection(sel: ast.Selection, indent: int) -> str:
    if isinstance(sel, ast.Field):
        text = f"{sel.alias}: {sel.name}" if sel.alias else sel.name
        if sel.arguments:
            args = ", ".join(f"{a.name}: {print_value(a.value)}" for a in sel.arguments)
            text += f"({args})"
        if sel.directives:
            text += " " + _print_directives(sel.directives)
        if sel.selection_set is not None:
            text += " " + _print_selection_set(sel.selection_set, indent)
        return text
    if isinstance(sel, ast.FragmentSpread):
        text = f"...{sel.name}"
        if sel.directives:
            text += " " + _print_directives(sel.directives)
        return text
    if isinstance(sel, ast.InlineFragment):
        text = "..."
        if sel.type_condition:
            text += f" on {sel.type_condition}"
        if sel.directives:
            text += " " + _print_directives(sel.directives)
        return text + " " + _print_selection_set(sel.selection_set, indent)
    raise TypeError(f"not a selection node: {sel!r}")
