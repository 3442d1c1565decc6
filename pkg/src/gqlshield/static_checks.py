"""AST-threshold DoS checks and both complexity estimators.

All functions are pure over immutable AST/schema/config. Thresholds are
inclusive upper bounds: a measurement must exceed its threshold to block.
"""

from __future__ import annotations

import time

from .config import SecurityConfig
from .gql import ast
from .gql.errors import UnknownFieldError
from .gql.schema import Schema
from .results import (
    STATUS_BLOCKED,
    CheckResult,
    skipped_result,
    threshold_result,
)

LIMIT_ARGUMENT_NAMES = frozenset({"first", "limit", "last", "top", "count"})

INTROSPECTION_FIELDS = frozenset({"__schema", "__type"})


def query_depth(doc: ast.Document) -> int:
    """Maximum field nesting across operations; root fields count as 1.
    Fragment wrappers are transparent."""

    def depth_of(selections: list[ast.Selection]) -> int:
        deepest = 0
        for sel in selections:
            if isinstance(sel, ast.Field):
                inner = depth_of(sel.selection_set) if sel.selection_set else 0
                deepest = max(deepest, 1 + inner)
            elif isinstance(sel, ast.InlineFragment):
                deepest = max(deepest, depth_of(sel.selection_set))
            # FragmentSpread adds no depth (expanded documents have none).
        return deepest

    return max((depth_of(op.selection_set) for op in doc.operations), default=0)


def count_aliases(doc: ast.Document) -> int:
    count = 0
    for _, sel in _walk_selections(doc):
        if isinstance(sel, ast.Field) and sel.alias is not None:
            count += 1
    return count


def batch_size(doc: ast.Document) -> int:
    return len(doc.operations)


def count_directives(doc: ast.Document) -> int:
    count = sum(len(op.directives) for op in doc.operations)
    count += sum(len(f.directives) for f in doc.fragments.values())
    for _, sel in _walk_selections(doc):
        count += len(sel.directives)
    return count


def detect_introspection(doc: ast.Document) -> bool:
    return any(isinstance(sel, ast.Field) and sel.name in INTROSPECTION_FIELDS
               for _, sel in _walk_selections(doc))


def max_type_revisits(doc: ast.Document, schema: Schema) -> int:
    """Most repeats of any single type along one root-to-leaf field path.

    1 means no type is revisited. Raises UnknownFieldError when a field
    cannot be resolved against the schema.
    """
    best = 0

    def walk(selections: list[ast.Selection], type_name: str,
             counts: dict[str, int]) -> None:
        nonlocal best
        for sel in selections:
            if isinstance(sel, ast.InlineFragment):
                walk(sel.selection_set, sel.type_condition or type_name, counts)
            elif isinstance(sel, ast.Field):
                if sel.name.startswith("__"):
                    continue
                ref = schema.field_type(type_name, sel.name)
                if ref is None:
                    raise UnknownFieldError(type_name, sel.name)
                target = ref.name
                if schema.is_composite(target):
                    counts[target] = counts.get(target, 0) + 1
                    best = max(best, counts[target])
                    if sel.selection_set:
                        walk(sel.selection_set, target, counts)
                    counts[target] -= 1

    for op in doc.operations:
        root = schema.root_for(op.operation)
        if root is None:
            raise UnknownFieldError("<document>", op.operation)
        counts = {root: 1}
        best = max(best, 1)
        walk(op.selection_set, root, counts)
    return best


def _limit_argument(field: ast.Field) -> int | None:
    for arg in field.arguments:
        if arg.name in LIMIT_ARGUMENT_NAMES and isinstance(arg.value, ast.IntValue):
            return max(0, arg.value.value)
    return None


def _list_multiplier(field: ast.Field, is_list: bool, cfg: SecurityConfig) -> int:
    if not is_list:
        return 1
    limit = _limit_argument(field)
    return limit if limit is not None else cfg.default_list_size


def estimate_payload_size(doc: ast.Document, schema: Schema,
                          cfg: SecurityConfig) -> int:
    """Response-size estimate in abstract units: leaves cost 1, objects sum
    their children, list fields multiply their subtree by the limit
    argument when present, else the configured default list size."""

    def size_of(selections: list[ast.Selection], type_name: str) -> int:
        total = 0
        for sel in selections:
            if isinstance(sel, ast.InlineFragment):
                total += size_of(sel.selection_set, sel.type_condition or type_name)
            elif isinstance(sel, ast.Field):
                ref = schema.field_type(type_name, sel.name)
                if ref is None or not sel.selection_set:
                    subtree = 1
                else:
                    subtree = size_of(sel.selection_set, ref.name)
                if ref is not None and ref.is_list:
                    subtree *= _list_multiplier(sel, True, cfg)
                total += subtree
        return total

    total = 0
    for op in doc.operations:
        root = schema.root_for(op.operation)
        if root is None:
            continue
        total += size_of(op.selection_set, root)
    return total


def complexity_simple(doc: ast.Document, cfg: SecurityConfig) -> float:
    return cfg.simple_field_cost * query_depth(doc)


def complexity_directive(doc: ast.Document, schema: Schema,
                         cfg: SecurityConfig) -> float:
    """Sum of per-field weights, each scaled by the product of enclosing
    list multiplicities (a field's own list wrapper scales only its
    descendants; its weight already prices the list)."""

    def cost_of(selections: list[ast.Selection], type_name: str,
                multiplier: float) -> float:
        total = 0.0
        for sel in selections:
            if isinstance(sel, ast.InlineFragment):
                total += cost_of(sel.selection_set,
                                 sel.type_condition or type_name, multiplier)
            elif isinstance(sel, ast.Field):
                weight = cfg.field_weights.get(f"{type_name}.{sel.name}", 1.0)
                total += weight * multiplier
                if sel.selection_set:
                    ref = schema.field_type(type_name, sel.name)
                    child_type = ref.name if ref is not None else type_name
                    child_mult = multiplier
                    if ref is not None and ref.is_list:
                        child_mult *= _list_multiplier(sel, True, cfg)
                    total += cost_of(sel.selection_set, child_type, child_mult)
        return total

    total = 0.0
    for op in doc.operations:
        root = schema.root_for(op.operation)
        if root is None:
            continue
        total += cost_of(op.selection_set, root, 1.0)
    return total


def run_static_checks(doc: ast.Document, schema: Schema,
                      cfg: SecurityConfig,
                      batch_total: int | None = None) -> list[CheckResult]:
    """All eight static checks in fixed order. ``batch_total`` overrides the
    operation count when the transport carried a JSON array of queries."""
    enabled = cfg.enabled_checks
    results: list[CheckResult] = []

    def run(name: str, fn) -> None:
        if name not in enabled:
            results.append(skipped_result(name))
            return
        start = time.perf_counter_ns()
        result = fn()
        result.duration_micros = (time.perf_counter_ns() - start) // 1000
        results.append(result)

    run("depth", lambda: threshold_result(
        "depth", query_depth(doc), cfg.max_depth))
    run("aliases", lambda: threshold_result(
        "aliases", count_aliases(doc), cfg.max_aliases))
    run("batch", lambda: threshold_result(
        "batch", batch_total if batch_total is not None else batch_size(doc),
        cfg.max_batch))
    run("directives", lambda: threshold_result(
        "directives", count_directives(doc), cfg.max_directives))
    run("circular", lambda: _circular_result(doc, schema, cfg))
    run("payload_inflation", lambda: threshold_result(
        "payload_inflation", estimate_payload_size(doc, schema, cfg),
        cfg.max_payload_estimate))
    run("introspection", lambda: _introspection_result(doc, cfg))
    run("complexity", lambda: _complexity_result(doc, schema, cfg))
    return results


def _circular_result(doc: ast.Document, schema: Schema,
                     cfg: SecurityConfig) -> CheckResult:
    try:
        revisits = max_type_revisits(doc, schema)
    except UnknownFieldError as exc:
        return CheckResult(check="circular", status=STATUS_BLOCKED,
                           score=cfg.max_circular_revisits + 1,
                           threshold=cfg.max_circular_revisits,
                           detail=str(exc))
    return threshold_result("circular", revisits, cfg.max_circular_revisits)


def _introspection_result(doc: ast.Document, cfg: SecurityConfig) -> CheckResult:
    found = detect_introspection(doc)
    score = 1 if found else 0
    threshold = 1 if cfg.allow_introspection else 0
    detail = "introspection fields present" if found else ""
    return threshold_result("introspection", score, threshold, detail)


def _complexity_result(doc: ast.Document, schema: Schema,
                       cfg: SecurityConfig) -> CheckResult:
    if cfg.estimator == "simple":
        score = complexity_simple(doc, cfg)
        detail = "estimator=simple"
    else:
        score = complexity_directive(doc, schema, cfg)
        detail = "estimator=directive"
    return threshold_result("complexity", score, cfg.complexity_threshold, detail)


def _walk_selections(doc: ast.Document):
    """Yield (container_type, selection) for every selection node in the
    document, operations first then fragment definitions, document order."""
    stack: list[ast.Selection] = []
    for op in doc.operations:
        stack.extend(reversed(op.selection_set))
        while stack:
            sel = stack.pop()
            yield op, sel
            if isinstance(sel, ast.Field) and sel.selection_set:
                stack.extend(reversed(sel.selection_set))
            elif isinstance(sel, ast.InlineFragment):
                stack.extend(reversed(sel.selection_set))
    for frag in doc.fragments.values():
        stack.extend(reversed(frag.selection_set))
        while stack:
            sel = stack.pop()
            yield frag, sel
            if isinstance(sel, ast.Field) and sel.selection_set:
                stack.extend(reversed(sel.selection_set))
            elif isinstance(sel, ast.InlineFragment):
                stack.extend(reversed(sel.selection_set))
