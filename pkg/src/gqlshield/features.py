"""Handcrafted feature vectors for SQLi (11), OS command injection (9),
and XSS (8) payload analysis.

Matching is defined by the dictionary files under ``gqlshield/dictionaries``
(one token or regex per line, ``#`` comments), not by code:

* token files — scanned left to right; at each position the longest
  matching token counts once and the scan resumes after it. Tokens whose
  first/last character is a word character require a word boundary on
  that side. SQL and XSS dictionaries match case-insensitively, OS
  dictionaries case-sensitively.
* pattern files (``*_patterns.txt`` and the encoded/obfuscated/file-ref
  and substitution files) — each line is a regex counted independently
  with ``re.findall``.
* ``xss_tags.txt`` matches ``<tag`` / ``</tag`` with optional whitespace;
  ``xss_methods.txt`` matches ``name(`` with optional whitespace (dots in
  names tolerate surrounding spaces).

Feature order and names are normative and versioned via
FEATURE_SCHEMA_VERSION.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

FEATURE_SCHEMA_VERSION = 1

SQLI_FEATURE_NAMES = (
    "sql_keywords", "sql_operators", "sql_special_chars", "boolean_conditions",
    "query_length", "union_select", "payload_patterns", "encoded_injection",
    "db_specific_keywords", "time_based_keywords", "nested_select",
)
OSI_FEATURE_NAMES = (
    "os_commands", "os_operators", "os_special_chars", "payload_patterns",
    "pipe_operators", "variable_execution", "remote_execution",
    "sysinfo_extraction", "privilege_escalation",
)
XSS_FEATURE_NAMES = (
    "html_tags", "js_methods", "js_file_refs", "javascript_keyword",
    "payload_length", "obfuscated_script", "special_chars", "external_resources",
)

FEATURE_NAMES = {"sqli": SQLI_FEATURE_NAMES, "osi": OSI_FEATURE_NAMES,
                 "xss": XSS_FEATURE_NAMES}
FEATURE_COUNTS = {kind: len(names) for kind, names in FEATURE_NAMES.items()}

_WORD = re.compile(r"[0-9A-Za-z_]")


@dataclass(frozen=True)
class FeatureVector:
    kind: str  # sqli | osi | xss
    names: tuple[str, ...]
    values: tuple[int, ...]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.names, self.values))


def load_lines(filename: str) -> list[str]:
    text = resources.files("gqlshield.dictionaries").joinpath(filename).read_text("utf-8")
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


class TokenSet:
    """Longest-first non-overlapping token counter."""

    def __init__(self, filename: str, case_insensitive: bool):
        self.tokens = load_lines(filename)
        flags = re.IGNORECASE if case_insensitive else 0
        parts = []
        for token in sorted(self.tokens, key=len, reverse=True):
            pattern = re.escape(token)
            if _WORD.match(token[0]):
                pattern = r"(?<![0-9A-Za-z_])" + pattern
            if _WORD.match(token[-1]):
                pattern = pattern + r"(?![0-9A-Za-z_])"
            parts.append(pattern)
        self.regex = re.compile("|".join(parts), flags)

    def count(self, text: str) -> int:
        return sum(1 for _ in self.regex.finditer(text))


class PatternSet:
    """Each line is an independent regex; counts sum across lines."""

    def __init__(self, filename: str, case_insensitive: bool):
        flags = re.IGNORECASE if case_insensitive else 0
        self.patterns = [re.compile(p, flags) for p in load_lines(filename)]

    def count(self, text: str) -> int:
        return sum(len(p.findall(text)) for p in self.patterns)


class TagSet:
    """HTML tag counter: `<tag` / `</tag` with optional whitespace."""

    def __init__(self, filename: str):
        names = load_lines(filename)
        alternation = "|".join(sorted((re.escape(n) for n in names), key=len, reverse=True))
        self.regex = re.compile(r"<\s*/?\s*(?:" + alternation + r")(?![0-9A-Za-z_])",
                                re.IGNORECASE)

    def count(self, text: str) -> int:
        return sum(1 for _ in self.regex.finditer(text))


class CallSet:
    """JS function-call counter: `name(` with optional whitespace."""

    def __init__(self, filename: str):
        parts = []
        for name in sorted(load_lines(filename), key=len, reverse=True):
            dotted = r"\s*\.\s*".join(re.escape(p) for p in name.split("."))
            parts.append(r"(?<![0-9A-Za-z_.])" + dotted + r"\s*\(")
        self.regex = re.compile("|".join(parts), re.IGNORECASE)

    def count(self, text: str) -> int:
        return sum(1 for _ in self.regex.finditer(text))


class _Dictionaries:
    def __init__(self) -> None:
        # OS: shells are case-sensitive.
        self.os_commands = TokenSet("os_commands.txt", case_insensitive=False)
        self.os_operators = TokenSet("os_operators.txt", case_insensitive=False)
        self.os_special = TokenSet("os_special_chars.txt", case_insensitive=False)
        self.os_patterns = PatternSet("os_patterns.txt", case_insensitive=False)
        self.os_pipes = TokenSet("os_pipe_operators.txt", case_insensitive=False)
        self.os_substitution = PatternSet("os_substitution.txt", case_insensitive=False)
        self.os_remote = TokenSet("os_remote_execution.txt", case_insensitive=False)
        self.os_sysinfo = TokenSet("os_sysinfo.txt", case_insensitive=False)
        self.os_privilege = TokenSet("os_privilege.txt", case_insensitive=False)
        # SQL: case-insensitive like the engines.
        self.sql_keywords = TokenSet("sql_keywords.txt", case_insensitive=True)
        self.sql_operators = TokenSet("sql_operators.txt", case_insensitive=True)
        self.sql_special = TokenSet("sql_special_chars.txt", case_insensitive=True)
        self.sql_boolean = TokenSet("sql_boolean.txt", case_insensitive=True)
        self.sql_union_select = TokenSet("sql_union_select.txt", case_insensitive=True)
        self.sql_patterns = PatternSet("sql_patterns.txt", case_insensitive=True)
        self.sql_encoded = PatternSet("sql_encoded.txt", case_insensitive=True)
        self.sql_db = TokenSet("sql_db_keywords.txt", case_insensitive=True)
        self.sql_time = TokenSet("sql_time_keywords.txt", case_insensitive=True)
        # XSS: HTML/JS are case-insensitive.
        self.xss_tags = TagSet("xss_tags.txt")
        self.xss_methods = CallSet("xss_methods.txt")
        self.xss_file_refs = PatternSet("xss_file_refs.txt", case_insensitive=True)
        self.xss_keywords = TokenSet("xss_keywords.txt", case_insensitive=True)
        self.xss_obfuscated = PatternSet("xss_obfuscated.txt", case_insensitive=True)
        self.xss_special = TokenSet("xss_special_chars.txt", case_insensitive=True)
        self.xss_external = PatternSet("xss_external.txt", case_insensitive=True)
        self.select_token = re.compile(r"(?<![0-9A-Za-z_])SELECT(?![0-9A-Za-z_])",
                                       re.IGNORECASE)


_DICTS: _Dictionaries | None = None


def dictionaries() -> _Dictionaries:
    global _DICTS
    if _DICTS is None:
        _DICTS = _Dictionaries()
    return _DICTS


def nested_select_count(payload: str, select_positions: list[int]) -> int:
    """SELECT tokens at paren depth >= 1 with an earlier SELECT before them."""
    depth_at = []
    depth = 0
    for ch in payload:
        depth_at.append(depth)
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
    count = 0
    for i, pos in enumerate(select_positions):
        if i > 0 and depth_at[pos] >= 1:
            count += 1
    return count


def sqli_features(payload: str) -> FeatureVector:
    d = dictionaries()
    select_positions = [m.start() for m in d.select_token.finditer(payload)]
    values = (
        d.sql_keywords.count(payload),
        d.sql_operators.count(payload),
        d.sql_special.count(payload),
        d.sql_boolean.count(payload),
        len(payload),
        d.sql_union_select.count(payload),
        d.sql_patterns.count(payload),
        d.sql_encoded.count(payload),
        d.sql_db.count(payload),
        d.sql_time.count(payload),
        nested_select_count(payload, select_positions),
    )
    return FeatureVector("sqli", SQLI_FEATURE_NAMES, values)


def osi_features(payload: str) -> FeatureVector:
    d = dictionaries()
    values = (
        d.os_commands.count(payload),
        d.os_operators.count(payload),
        d.os_special.count(payload),
        d.os_patterns.count(payload),
        d.os_pipes.count(payload),
        d.os_substitution.count(payload),
        d.os_remote.count(payload),
        d.os_sysinfo.count(payload),
        d.os_privilege.count(payload),
    )
    return FeatureVector("osi", OSI_FEATURE_NAMES, values)


def xss_features(payload: str) -> FeatureVector:
    d = dictionaries()
    values = (
        d.xss_tags.count(payload),
        d.xss_methods.count(payload),
        d.xss_file_refs.count(payload),
        d.xss_keywords.count(payload),
        len(payload),
        d.xss_obfuscated.count(payload),
        d.xss_special.count(payload),
        d.xss_external.count(payload),
    )
    return FeatureVector("xss", XSS_FEATURE_NAMES, values)


FEATURE_FUNCS = {"sqli": sqli_features, "osi": osi_features, "xss": xss_features}


def features_for(kind: str, payload: str) -> FeatureVector:
    try:
        return FEATURE_FUNCS[kind](payload)
    except KeyError:
        raise ValueError(f"unknown detector kind {kind!r}") from None
