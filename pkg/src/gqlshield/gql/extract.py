"""Extraction of user-supplied strings from argument values and variables.

Every string leaf reachable from any argument becomes one PayloadSite in
stable document order. Paths follow ``op[i].field.args.argName`` with
``.name`` appended per object field and ``[k]`` per list index. Variables
resolve against the operation's declared variables and the externally
supplied values; undeclared or unsupplied variables are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from . import ast

ORIGIN_ARGUMENT = "argument_literal"
ORIGIN_VARIABLE = "variable_value"
ORIGIN_LIST = "list_item"
ORIGIN_OBJECT = "object_field"


@dataclass(frozen=True)
class PayloadSite:
    text: str
    origin: str
    path: str
    operation_index: int


def extract_string_inputs(doc: ast.Document,
                          variables: dict[str, Any] | None = None) -> list[PayloadSite]:
    variables = variables or {}
    sites: list[PayloadSite] = []
    for op_index, op in enumerate(doc.operations):
        declared = {vd.name for vd in op.variable_definitions}
        walker = _Walker(op_index, declared, variables, sites)
        walker.walk_selections(op.selection_set, f"op[{op_index}]")
    return sites


class _Walker:
    def __init__(self, op_index: int, declared: set[str],
                 variables: dict[str, Any], sites: list[PayloadSite]):
        self.op_index = op_index
        self.declared = declared
        self.variables = variables
        self.sites = sites

    def walk_selections(self, selections: list[ast.Selection], prefix: str) -> None:
        for sel in selections:
            if isinstance(sel, ast.Field):
                field_path = f"{prefix}.{sel.name}"
                for arg in sel.arguments:
                    self.walk_value(arg.value, f"{field_path}.args.{arg.name}",
                                    top_level=True)
                if sel.selection_set:
                    self.walk_selections(sel.selection_set, field_path)
            elif isinstance(sel, ast.InlineFragment):
                self.walk_selections(sel.selection_set, prefix)
            # FragmentSpread: nothing to extract; arguments live on fields,
            # and expanded documents contain no spreads.

    def walk_value(self, value: ast.Value, path: str, top_level: bool) -> None:
        if isinstance(value, ast.StringValue):
            origin = ORIGIN_ARGUMENT if top_level else self._container_origin(path)
            self.add(value.value, origin, path)
        elif isinstance(value, ast.ListValue):
            for k, item in enumerate(value.items):
                self.walk_value(item, f"{path}[{k}]", top_level=False)
        elif isinstance(value, ast.ObjectValue):
            for name, item in value.fields:
                self.walk_value(item, f"{path}.{name}", top_level=False)
        elif isinstance(value, ast.VariableValue):
            if value.name in self.declared and value.name in self.variables:
                self.walk_external(self.variables[value.name], path, top_level=True)

    def walk_external(self, value: Any, path: str, top_level: bool) -> None:
        if isinstance(value, str):
            origin = ORIGIN_VARIABLE if top_level else self._container_origin(path)
            self.add(value, origin, path)
        elif isinstance(value, list):
            for k, item in enumerate(value):
                self.walk_external(item, f"{path}[{k}]", top_level=False)
        elif isinstance(value, dict):
            for name, item in value.items():
                self.walk_external(item, f"{path}.{name}", top_level=False)

    @staticmethod
    def _container_origin(path: str) -> str:
        return ORIGIN_LIST if path.endswith("]") else ORIGIN_OBJECT

    def add(self, text: str, origin: str, path: str) -> None:
        self.sites.append(PayloadSite(text=text, origin=origin, path=path,
                                      operation_index=self.op_index))
