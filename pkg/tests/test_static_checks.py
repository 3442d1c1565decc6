"""Static DoS checks against spec examples and the brute-force oracle."""

import random

import pytest

from generators import gen_document_with_fragments, gen_schema
from gqlshield.config import SecurityConfig
from gqlshield.gql import expand_fragments, parse_query, parse_schema
from gqlshield.gql.errors import UnknownFieldError
from gqlshield.static_checks import (
    batch_size,
    complexity_directive,
    complexity_simple,
    count_aliases,
    count_directives,
    detect_introspection,
    estimate_payload_size,
    max_type_revisits,
    query_depth,
    run_static_checks,
)
from oracles import (
    doc_to_plain,
    oracle_aliases,
    oracle_batch,
    oracle_complexity_directive,
    oracle_depth,
    oracle_directives,
    oracle_introspection,
    oracle_payload_estimate,
    oracle_revisits,
)


def doc(source):
    return expand_fragments(parse_query(source))


class TestDepth:
    def test_single_field(self):
        assert query_depth(doc("{ a }")) == 1

    def test_three_levels(self):
        assert query_depth(doc("{ a { b { c } } }")) == 3

    def test_inline_fragment_transparent(self):
        assert query_depth(doc("{ a { ... on T { b { c } } } d }")) == 3

    def test_max_across_operations(self):
        assert query_depth(doc("query A { a } query B { b { c } }")) == 2


class TestAliases:
    def test_none(self):
        assert count_aliases(doc("{ a }")) == 0

    def test_three(self):
        assert count_aliases(doc("{ x: a, y: a, z: a }")) == 3

    def test_hundred_generated(self):
        source = "{ " + " ".join(f"a{i}: f" for i in range(100)) + " }"
        assert count_aliases(doc(source)) == 100

    def test_nested_aliases_counted(self):
        assert count_aliases(doc("{ x: a { y: b } }")) == 2


class TestBatch:
    def test_single_anonymous(self):
        assert batch_size(doc("{ a }")) == 1

    def test_three_named(self):
        assert batch_size(doc("query A{a} query B{b} query C{c}")) == 3


class TestDirectives:
    def test_none(self):
        assert count_directives(doc("{ a }")) == 0

    def test_field_directives(self):
        assert count_directives(doc("{ a @include(if: true) @skip(if: false) }")) == 2

    def test_operation_directive(self):
        assert count_directives(doc("query @x { a }")) == 1

    def test_spread_directives_survive_expansion(self):
        d = doc("{ ...F @keep } fragment F on Q @mark { a @x }")
        assert count_directives(d) == 3


class TestCircular:
    @pytest.fixture()
    def schema(self):
        return parse_schema(
            "type Query { me: User } "
            "type User { id: ID friends: [User] posts: [Post] } "
            "type Post { author: User title: String }")

    def test_no_repetition(self, schema):
        assert max_type_revisits(doc("{ me { id } }"), schema) == 1

    def test_friends_of_friends(self, schema):
        d = doc("{ me { friends { friends { id } } } }")
        assert max_type_revisits(d, schema) == 3

    def test_max_per_path_not_sum(self, schema):
        d = doc("{ me { friends { friends { id } } posts { author { friends { id } } } } }")
        # each branch revisits User at most 3x on one path
        assert max_type_revisits(d, schema) == 3

    def test_sibling_branches_do_not_accumulate(self, schema):
        d = doc("{ a1: me { friends { id } } a2: me { friends { id } } }")
        assert max_type_revisits(d, schema) == 2

    def test_unknown_field_raises(self, schema):
        with pytest.raises(UnknownFieldError):
            max_type_revisits(doc("{ nope }"), schema)


class TestPayloadEstimate:
    @pytest.fixture()
    def schema(self):
        return parse_schema(
            "type Query { me: User } "
            "type User { id: ID friends(first: Int): [User] }")

    def cfg(self, default_list_size=10):
        return SecurityConfig(default_list_size=default_list_size)

    def test_single_leaf(self, schema):
        assert estimate_payload_size(doc("{ me { id } }"), schema, self.cfg()) == 1

    def test_list_multiplies(self, schema):
        d = doc("{ me { friends { id } } }")
        assert estimate_payload_size(d, schema, self.cfg(10)) == 10

    def test_limit_argument_wins(self, schema):
        d = doc("{ me { friends(first: 3) { id } } }")
        assert estimate_payload_size(d, schema, self.cfg(10)) == 3

    def test_limit_argument_larger_than_default(self, schema):
        d = doc("{ me { friends(first: 5000) { id } } }")
        assert estimate_payload_size(d, schema, self.cfg(10)) == 5000


class TestIntrospection:
    def test_schema_query(self):
        assert detect_introspection(doc("{ __schema { types { name } } }"))

    def test_plain_query(self):
        assert not detect_introspection(doc("{ user { id } }"))

    def test_nested_type_probe(self):
        assert detect_introspection(doc('{ a { __type(name: "X") { name } } }'))

    def test_typename_not_flagged(self):
        assert not detect_introspection(doc("{ a { __typename } }"))


class TestComplexity:
    def test_simple_formula(self):
        d = doc("{ a { b { c } } }")
        assert complexity_simple(d, SecurityConfig(simple_field_cost=10)) == 30

    def test_simple_zero_cost(self):
        assert complexity_simple(doc("{ a }"), SecurityConfig(simple_field_cost=0)) == 0

    def test_simple_depth_seven(self):
        d = doc("{ a { b { c { d { e { f { g } } } } } } }")
        assert complexity_simple(d, SecurityConfig(simple_field_cost=2)) == 14

    def test_directive_weights(self):
        schema = parse_schema("type Query { me: User } type User { id: ID }")
        cfg = SecurityConfig(field_weights={"Query.me": 2, "User.id": 1})
        assert complexity_directive(doc("{ me { id } }"), schema, cfg) == 3

    def test_directive_with_list_multiplier(self):
        schema = parse_schema(
            "type Query { me: User } type User { id: ID friends: [User] }")
        cfg = SecurityConfig(
            field_weights={"Query.me": 2, "User.friends": 20, "User.id": 1},
            default_list_size=10)
        d = doc("{ me { friends { id } } }")
        assert complexity_directive(d, schema, cfg) == 32

    def test_directive_default_weight_is_field_count(self):
        schema = parse_schema("type Query { a: X b: X } type X { c: ID }")
        cfg = SecurityConfig(field_weights={})
        assert complexity_directive(doc("{ a { c } b { c } }"), schema, cfg) == 4


class TestRunStaticChecks:
    @pytest.fixture()
    def schema(self):
        return parse_schema("type Query { a: String b: String }")

    def test_benign_query_all_pass(self, schema):
        cfg = SecurityConfig(allow_introspection=True, complexity_threshold=1e6)
        results = run_static_checks(doc("{ a b }"), schema, cfg)
        assert len(results) == 8
        assert all(r.status == "pass" for r in results)
        assert all(r.duration_micros >= 0 for r in results)

    def test_alias_overload_blocked(self, schema):
        source = "{ " + " ".join(f"x{i}: a" for i in range(50)) + " }"
        cfg = SecurityConfig(max_aliases=10, complexity_threshold=1e6,
                             allow_introspection=True)
        results = {r.check: r for r in run_static_checks(doc(source), schema, cfg)}
        assert results["aliases"].status == "blocked"
        assert results["aliases"].score == 50
        assert results["aliases"].threshold == 10

    def test_introspection_toggle(self, schema):
        cfg = SecurityConfig(allow_introspection=False)
        results = {r.check: r for r in
                   run_static_checks(doc("{ __schema { types { name } } }"),
                                     schema, cfg)}
        assert results["introspection"].status == "blocked"
        cfg2 = SecurityConfig(allow_introspection=True)
        results2 = {r.check: r for r in
                    run_static_checks(doc("{ __schema { types { name } } }"),
                                      schema, cfg2)}
        assert results2["introspection"].status == "pass"

    def test_disabled_checks_skipped(self, schema):
        cfg = SecurityConfig(enabled_checks={"depth"})
        results = run_static_checks(doc("{ a }"), schema, cfg)
        statuses = {r.check: r.status for r in results}
        assert statuses["depth"] == "pass"
        assert statuses["aliases"] == "skipped"

    def test_boundary_score_equal_threshold_passes(self, schema):
        source = "{ x1: a x2: a x3: a }"
        cfg = SecurityConfig(max_aliases=3, allow_introspection=True,
                             complexity_threshold=1e6)
        results = {r.check: r for r in run_static_checks(doc(source), schema, cfg)}
        assert results["aliases"].score == 3
        assert results["aliases"].status == "pass"

    def test_estimator_switch_changes_only_complexity(self, schema):
        source = "{ a b }"
        base = SecurityConfig(estimator="simple", allow_introspection=True)
        other = SecurityConfig(estimator="directive", allow_introspection=True)
        r1 = {r.check: r for r in run_static_checks(doc(source), schema, base)}
        r2 = {r.check: r for r in run_static_checks(doc(source), schema, other)}
        for name in r1:
            if name == "complexity":
                continue
            assert r1[name].score == r2[name].score
            assert r1[name].status == r2[name].status
        assert r1["complexity"].score == 10  # cost 10 x depth 1
        assert r2["complexity"].score == 2   # default weight 1 x 2 fields

    def test_batch_total_override(self, schema):
        cfg = SecurityConfig(max_batch=4, allow_introspection=True)
        results = {r.check: r for r in
                   run_static_checks(doc("{ a }"), schema, cfg, batch_total=5)}
        assert results["batch"].score == 5
        assert results["batch"].status == "blocked"

    def test_unknown_field_blocks_circular_without_crash(self):
        schema = parse_schema("type Query { a: String }")
        cfg = SecurityConfig()
        results = {r.check: r for r in
                   run_static_checks(doc("{ ghost }"), schema, cfg)}
        assert results["circular"].status == "blocked"
        assert "ghost" in results["circular"].detail


class TestMonotonicity:
    def test_adding_alias_never_decreases(self):
        base = "{ x0: a }"
        previous = count_aliases(doc(base))
        for i in range(1, 20):
            base = base[:-1] + f"x{i}: a }}"
            current = count_aliases(doc(base))
            assert current >= previous
            previous = current

    def test_nesting_never_decreases_depth(self):
        source = "{ a }"
        previous = query_depth(doc(source))
        for _ in range(15):
            source = "{ a " + source + " }"
            current = query_depth(doc(source))
            assert current >= previous
            previous = current


def test_all_counters_match_oracle_on_generated_queries():
    rng = random.Random(4242)
    checked = 0
    while checked < 220:
        schema = gen_schema(rng)
        source, _ = gen_document_with_fragments(rng, schema)
        d = expand_fragments(parse_query(source))
        plain = doc_to_plain(d)
        cfg = SecurityConfig(default_list_size=7,
                             field_weights={key: (i % 5) + 0.5 for i, key in
                                            enumerate(sorted(
                                                f"{t.name}.{f}"
                                                for t in schema.types.values()
                                                for f in t.fields))})
        assert query_depth(d) == oracle_depth(plain)
        assert count_aliases(d) == oracle_aliases(plain)
        assert batch_size(d) == oracle_batch(plain)
        assert count_directives(d) == oracle_directives(plain)
        assert detect_introspection(d) == oracle_introspection(plain)
        assert max_type_revisits(d, schema) == oracle_revisits(plain, schema)
        assert estimate_payload_size(d, schema, cfg) == \
            oracle_payload_estimate(plain, schema, cfg.default_list_size)
        assert complexity_directive(d, schema, cfg) == pytest.approx(
            oracle_complexity_directive(plain, schema, cfg.field_weights,
                                        cfg.default_list_size))
        assert complexity_simple(d, cfg) == cfg.simple_field_cost * query_depth(d)
        checked += 1
