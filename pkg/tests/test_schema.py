"""SDL parsing, type resolution, and the adjacency graph."""

import pytest

from gqlshield.gql import ParseError, UnresolvedTypeError, parse_schema


def test_two_type_schema_adjacency():
    schema = parse_schema("type Query { me: User } type User { id: ID }")
    assert schema.query_root == "Query"
    assert schema.adjacency["Query"] == {"User"}
    assert schema.adjacency["User"] == set()


def test_cycle_in_adjacency():
    schema = parse_schema("type Query { a: A } type A { b: B } type B { a: A }")
    assert schema.adjacency["A"] == {"B"}
    assert schema.adjacency["B"] == {"A"}


def test_unresolved_type_listed():
    with pytest.raises(UnresolvedTypeError) as err:
        parse_schema("type Query { x: Missing y: AlsoMissing }")
    assert err.value.names == ["AlsoMissing", "Missing"]


def test_builtin_scalars_resolve():
    schema = parse_schema(
        "type Query { a: Int b: Float c: String d: Boolean e: ID }")
    assert schema.types["Query"].fields["a"].type.name == "Int"
    assert schema.adjacency["Query"] == set()


def test_explicit_schema_roots():
    schema = parse_schema(
        "schema { query: Root mutation: Mut }"
        " type Root { x: String } type Mut { y: String }")
    assert schema.query_root == "Root"
    assert schema.mutation_root == "Mut"
    assert schema.root_for("mutation") == "Mut"


def test_interface_union_enum_scalar_input():
    schema = parse_schema("""
        scalar Date
        interface Node { id: ID }
        type Query { node: Node when: Date color: Color things: Thing }
        union Thing = A | B
        type A implements Node { id: ID }
        type B { x: Int }
        enum Color { RED GREEN }
        input Where { q: String }
    """)
    assert schema.types["Thing"].members == ["A", "B"]
    assert schema.types["Color"].values == ["RED", "GREEN"]
    assert schema.types["A"].interfaces == ["Node"]
    assert schema.is_leaf("Date") and schema.is_leaf("Color")
    assert schema.is_composite("Thing") and schema.is_composite("Node")
    # interface targets participate in adjacency
    assert "Node" in schema.adjacency["Query"]


def test_field_arguments_and_descriptions_skipped():
    schema = parse_schema('''
        "The root"
        type Query {
          "doc"
          user(name: String = "anon", first: Int): User @deprecated(reason: "x")
        }
        type User { id: ID }
    ''')
    assert schema.field_type("Query", "user").name == "User"


def test_list_wrappers_tracked():
    schema = parse_schema("type Query { names: [[String!]]! }")
    ref = schema.field_type("Query", "names")
    assert ref.is_list and ref.list_depth == 2


def test_union_member_must_exist():
    with pytest.raises(UnresolvedTypeError):
        parse_schema("type Query { t: Thing } union Thing = A | Ghost type A { x: Int }")


def test_duplicate_type_rejected():
    with pytest.raises(ParseError):
        parse_schema("type A { x: Int } type A { y: Int }")


def test_sdl_syntax_error_positions():
    with pytest.raises(ParseError):
        parse_schema("type Query { x }")
