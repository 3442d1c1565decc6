"""GraphQL document and SDL processing: lex, parse, print, expand, extract."""

from . import ast
from .errors import (
    ExpansionError,
    GqlError,
    ParseError,
    UnknownFieldError,
    UnresolvedTypeError,
    ValidationError,
)
from .expand import expand_fragments
from .extract import PayloadSite, extract_string_inputs
from .parser import parse_query
from .printer import print_document
from .schema import BUILTIN_SCALARS, FieldDef, Schema, TypeDefinition, parse_schema
from .validate import validate_document

__all__ = [
    "ast",
    "GqlError",
    "ParseError",
    "UnresolvedTypeError",
    "ExpansionError",
    "UnknownFieldError",
    "ValidationError",
    "parse_query",
    "parse_schema",
    "print_document",
    "expand_fragments",
    "extract_string_inputs",
    "PayloadSite",
    "Schema",
    "TypeDefinition",
    "FieldDef",
    "BUILTIN_SCALARS",
    "validate_document",
]
