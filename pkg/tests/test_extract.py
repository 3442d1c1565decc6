"""PayloadSite extraction: origins, paths, variables, completeness."""

import random

from generators import gen_document_source, gen_schema
from gqlshield.gql import expand_fragments, extract_string_inputs, parse_query
from oracles import doc_to_plain, oracle_string_leaves


def extract(source, variables=None):
    return extract_string_inputs(parse_query(source), variables)


def test_argument_literal():
    sites = extract('{ user(name: "bob") { id } }')
    assert len(sites) == 1
    site = sites[0]
    assert site.text == "bob"
    assert site.origin == "argument_literal"
    assert site.path == "op[0].user.args.name"
    assert site.operation_index == 0


def test_variable_value():
    sites = extract('query($n: String){ user(name: $n) }',
                    {"n": "x'; DROP TABLE--"})
    assert len(sites) == 1
    assert sites[0].text == "x'; DROP TABLE--"
    assert sites[0].origin == "variable_value"


def test_list_items_in_object_argument():
    sites = extract('{ u(filter: {names: ["a", "b"]}) }')
    assert [s.text for s in sites] == ["a", "b"]
    assert all(s.origin == "list_item" for s in sites)
    assert sites[0].path.endswith(".names[0]")
    assert sites[1].path.endswith(".names[1]")


def test_object_field_origin():
    sites = extract('{ u(filter: {tag: "x"}) }')
    assert sites[0].origin == "object_field"
    assert sites[0].path == "op[0].u.args.filter.tag"


def test_escape_resolution_no_trimming():
    sites = extract('{ u(q: "  a\\"b\\n  ") }')
    assert sites[0].text == '  a"b\n  '


def test_undeclared_variable_skipped():
    sites = extract("{ u(q: $ghost) }", {"ghost": "boo"})
    assert sites == []


def test_unsupplied_variable_skipped():
    sites = extract("query($n: String) { u(q: $n) }", {})
    assert sites == []


def test_variable_with_nested_structure():
    sites = extract("query($f: Filter) { u(filter: $f) }",
                    {"f": {"names": ["x", "y"], "tag": "t"}})
    texts = {s.text for s in sites}
    assert texts == {"x", "y", "t"}
    by_text = {s.text: s for s in sites}
    assert by_text["x"].origin == "list_item"
    assert by_text["t"].origin == "object_field"
    assert by_text["x"].path == "op[0].u.args.filter.names[0]"


def test_variable_inside_literal_list():
    sites = extract('query($n: String) { u(qs: ["lit", $n]) }', {"n": "var"})
    assert [s.text for s in sites] == ["lit", "var"]
    assert sites[0].origin == "list_item"
    # whole variable value sits at the list slot
    assert sites[1].path == "op[0].u.args.qs[1]"


def test_multiple_operations_indexed():
    sites = extract('query A { u(q: "one") } query B { u(q: "two") }')
    assert [s.operation_index for s in sites] == [0, 1]
    assert sites[1].path.startswith("op[1].")


def test_non_string_values_ignored():
    sites = extract("{ u(a: 1, b: true, c: null, d: 2.5, e: RED) }")
    assert sites == []


def test_document_order_stable():
    source = '{ a(x: "1") b(y: "2") { c(z: "3") } }'
    sites = extract(source)
    assert [s.text for s in sites] == ["1", "2", "3"]


def test_completeness_matches_oracle_on_generated_documents():
    rng = random.Random(77)
    for _ in range(120):
        schema = gen_schema(rng)
        source, variables = gen_document_source(rng, schema)
        doc = expand_fragments(parse_query(source))
        sites = extract_string_inputs(doc, variables)
        expected = oracle_string_leaves(doc_to_plain(doc), variables)
        assert len(sites) == expected
