"""Handcrafted feature vectors: spec examples, oracle equivalence,
determinism, additivity, and name/order stability."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gqlshield.features import (
    FEATURE_NAMES,
    OSI_FEATURE_NAMES,
    SQLI_FEATURE_NAMES,
    XSS_FEATURE_NAMES,
    osi_features,
    sqli_features,
    xss_features,
)
from oracles import oracle_osi, oracle_sqli, oracle_xss


class TestOsiExamples:
    def test_empty(self):
        assert osi_features("").values == (0,) * 9

    def test_command_chain(self):
        fv = osi_features("ls; whoami | sudo chmod 777 /").as_dict()
        assert fv["os_commands"] >= 3
        assert fv["os_operators"] >= 2
        assert fv["pipe_operators"] == 1
        assert fv["privilege_escalation"] >= 2

    def test_natural_language_is_all_zero(self):
        assert osi_features("please list my orders").values == (0,) * 9

    def test_substitution_forms(self):
        fv = osi_features("$(whoami) and `id`").as_dict()
        assert fv["variable_execution"] == 2

    def test_case_sensitive_commands(self):
        assert osi_features("LS PWD").as_dict()["os_commands"] == 0
        assert osi_features("ls pwd").as_dict()["os_commands"] == 2


class TestSqliExamples:
    def test_empty(self):
        fv = sqli_features("")
        assert fv.values == (0,) * 11
        assert fv.as_dict()["query_length"] == 0

    def test_classic_tautology(self):
        fv = sqli_features("' OR '1'='1' --").as_dict()
        assert fv["sql_special_chars"] >= 5
        assert fv["payload_patterns"] >= 1
        assert fv["query_length"] == 15

    def test_nested_select(self):
        fv = sqli_features(
            "SELECT name FROM t WHERE id IN (SELECT id FROM u)").as_dict()
        assert fv["union_select"] >= 2
        assert fv["nested_select"] == 1

    def test_case_insensitive(self):
        assert sqli_features("drop TABLE x").as_dict()["sql_keywords"] == \
            sqli_features("DROP table x").as_dict()["sql_keywords"]

    def test_encoded_tokens(self):
        fv = sqli_features("%27 OR %3D 0x27206f72").as_dict()
        assert fv["encoded_injection"] >= 3


class TestXssExamples:
    def test_empty(self):
        assert xss_features("").values == (0,) * 8

    def test_script_alert(self):
        fv = xss_features("<script>alert(1)</script>").as_dict()
        assert fv["html_tags"] >= 2
        assert fv["js_methods"] == 1
        assert fv["special_chars"] >= 4
        assert fv["payload_length"] == 25

    def test_benign_mention(self):
        fv = xss_features("I read the javascript tutorial at http://a.com").as_dict()
        assert fv["javascript_keyword"] == 1
        assert fv["external_resources"] == 1
        assert fv["html_tags"] == 0

    def test_obfuscated_variants(self):
        fv = xss_features("%3Cscript%3E and &lt;script&gt;").as_dict()
        assert fv["obfuscated_script"] == 2

    def test_js_file_reference(self):
        assert xss_features('<script src="a.js">').as_dict()["js_file_refs"] == 1


class TestVectorShape:
    def test_lengths_and_names(self):
        assert len(SQLI_FEATURE_NAMES) == 11
        assert len(OSI_FEATURE_NAMES) == 9
        assert len(XSS_FEATURE_NAMES) == 8
        assert sqli_features("x").names == SQLI_FEATURE_NAMES
        assert osi_features("x").names == OSI_FEATURE_NAMES
        assert xss_features("x").names == XSS_FEATURE_NAMES

    def test_normative_order(self):
        assert SQLI_FEATURE_NAMES == (
            "sql_keywords", "sql_operators", "sql_special_chars",
            "boolean_conditions", "query_length", "union_select",
            "payload_patterns", "encoded_injection", "db_specific_keywords",
            "time_based_keywords", "nested_select")
        assert OSI_FEATURE_NAMES == (
            "os_commands", "os_operators", "os_special_chars",
            "payload_patterns", "pipe_operators", "variable_execution",
            "remote_execution", "sysinfo_extraction", "privilege_escalation")
        assert XSS_FEATURE_NAMES == (
            "html_tags", "js_methods", "js_file_refs", "javascript_keyword",
            "payload_length", "obfuscated_script", "special_chars",
            "external_resources")

    def test_counts_are_nonnegative_ints(self):
        for fn in (sqli_features, osi_features, xss_features):
            for value in fn("' OR 1=1 <script>ls;").values:
                assert isinstance(value, int) and value >= 0


def test_determinism():
    payload = "'; DROP TABLE a; <script>ls | nc</script>"
    for fn in (sqli_features, osi_features, xss_features):
        first = json.dumps(fn(payload).values)
        second = json.dumps(fn(payload).values)
        assert first == second


@settings(max_examples=120, deadline=None)
@given(st.text(max_size=60), st.text(max_size=60))
def test_concatenation_additivity(a, b):
    """Joining payloads with a space never loses count signal, and length
    features add exactly."""
    joined = a + " " + b
    for fn, length_name in ((sqli_features, "query_length"),
                            (osi_features, None),
                            (xss_features, "payload_length")):
        fa, fb, fj = fn(a).as_dict(), fn(b).as_dict(), fn(joined).as_dict()
        for name in fa:
            if name in ("query_length", "payload_length", "nested_select"):
                continue
            assert fj[name] >= max(fa[name], fb[name])
        if length_name:
            assert fj[length_name] == fa[length_name] + 1 + fb[length_name]


def corpus_payloads(fixtures_dir):
    rows = []
    with open(fixtures_dir / "payloads_300.jsonl", encoding="utf-8") as fh:
        for line in fh:
            rows.append(json.loads(line))
    return rows


def test_oracle_equivalence_on_corpus(fixtures_dir):
    rows = corpus_payloads(fixtures_dir)
    assert len(rows) == 300
    for row in rows:
        payload = row["payload"]
        assert sqli_features(payload).values == oracle_sqli(payload), payload
        assert osi_features(payload).values == oracle_osi(payload), payload
        assert xss_features(payload).values == oracle_xss(payload), payload


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=120))
def test_oracle_equivalence_on_random_text(payload):
    assert sqli_features(payload).values == oracle_sqli(payload)
    assert osi_features(payload).values == oracle_osi(payload)
    assert xss_features(payload).values == oracle_xss(payload)
