"""One-shot fragment expansion.

Spreads with no directives on either the spread or its fragment definition
are spliced in place; when directives are present the spread becomes an
inline fragment carrying the fragment's type condition and the combined
directives, so directive counts survive expansion. Idempotent on documents
that contain no spreads.
"""

from __future__ import annotations

import copy

from . import ast
from .errors import ExpansionError


def expand_fragments(doc: ast.Document) -> ast.Document:
    """Return a new Document with every FragmentSpread replaced and the
    now-redundant fragment definitions dropped.

    Raises ExpansionError on an undefined fragment name or a spread cycle,
    including cycles among fragments no operation references.
    """
    expander = _Expander(doc.fragments)
    operations = []
    for op in doc.operations:
        expanded = copy.copy(op)
        expanded.selection_set = expander.expand_set(op.selection_set, ())
        operations.append(expanded)
    for name, frag in doc.fragments.items():
        expander.expand_set(frag.selection_set, (name,))
    return ast.Document(operations=operations, fragments={}, span=doc.span)


class _Expander:
    def __init__(self, fragments: dict[str, ast.FragmentDefinition]):
        self.fragments = fragments

    def expand_set(self, selections: list[ast.Selection],
                   stack: tuple[str, ...]) -> list[ast.Selection]:
        out: list[ast.Selection] = []
        for sel in selections:
            if isinstance(sel, ast.Field):
                new = copy.copy(sel)
                if sel.selection_set is not None:
                    new.selection_set = self.expand_set(sel.selection_set, stack)
                out.append(new)
            elif isinstance(sel, ast.InlineFragment):
                new_inline = copy.copy(sel)
                new_inline.selection_set = self.expand_set(sel.selection_set, stack)
                out.append(new_inline)
            elif isinstance(sel, ast.FragmentSpread):
                out.extend(self.expand_spread(sel, stack))
            else:
                raise TypeError(f"not a selection node: {sel!r}")
        return out

    def expand_spread(self, spread: ast.FragmentSpread,
                      stack: tuple[str, ...]) -> list[ast.Selection]:
        frag = self.fragments.get(spread.name)
        if frag is None:
            raise ExpansionError(f"undefined fragment {spread.name!r}")
        if spread.name in stack:
            cycle = " -> ".join(stack + (spread.name,))
            raise ExpansionError(f"fragment cycle: {cycle}")
        inner = self.expand_set(frag.selection_set, stack + (spread.name,))
        directives = list(spread.directives) + list(frag.directives)
        if not directives:
            return inner
        return [ast.InlineFragment(type_condition=frag.type_condition,
                                   directives=directives,
                                   selection_set=inner,
                                   span=spread.span)]
