"""Light document validation: fields exist on their parent type and
fragment type conditions name defined types.

Deeper validation (argument types, variable coercion) is out of scope.
Meta-fields (``__schema``, ``__type``, ``__typename``) always validate;
the introspection check deals with them separately.
"""

from __future__ import annotations

from . import ast
from .schema import Schema


def validate_document(doc: ast.Document, schema: Schema) -> list[str]:
    """Return a list of problems; empty means the document validates."""
    problems: list[str] = []
    for op in doc.operations:
        root = schema.root_for(op.operation)
        if root is None:
            problems.append(f"schema has no {op.operation} root type")
            continue
        _check_set(op.selection_set, root, schema, problems)
    for frag in doc.fragments.values():
        if frag.type_condition not in schema.types:
            problems.append(
                f"fragment {frag.name!r} condition on undefined type "
                f"{frag.type_condition!r}")
        else:
            _check_set(frag.selection_set, frag.type_condition, schema, problems)
    return problems


def _check_set(selections: list[ast.Selection], type_name: str,
               schema: Schema, problems: list[str]) -> None:
    for sel in selections:
        if isinstance(sel, ast.Field):
            if sel.name.startswith("__"):
                continue
            ref = schema.field_type(type_name, sel.name)
            if ref is None:
                ref = _interface_field(schema, type_name, sel.name)
            if ref is None:
                problems.append(
                    f"field '{sel.name}' not defined on type '{type_name}'")
                continue
            if sel.selection_set:
                _check_set(sel.selection_set, ref.name, schema, problems)
        elif isinstance(sel, ast.InlineFragment):
            inner_type = sel.type_condition or type_name
            if inner_type not in schema.types:
                problems.append(
                    f"inline fragment condition on undefined type {inner_type!r}")
                continue
            _check_set(sel.selection_set, inner_type, schema, problems)
        elif isinstance(sel, ast.FragmentSpread):
            # Spread validity is covered by expansion; the spread target's
            # selections are validated via doc.fragments above.
            continue


def _interface_field(schema: Schema, type_name: str, field_name: str):
    """Fields selected on a union/interface via its members' shared shape."""
    tdef = schema.types.get(type_name)
    if tdef is None:
        return None
    if tdef.kind == "union":
        for member in tdef.members:
            ref = schema.field_type(member, field_name)
            if ref is not None:
                return ref
    return None
