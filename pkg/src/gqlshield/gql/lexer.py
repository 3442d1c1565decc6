"""Tokenizer for GraphQL documents and SDL.

Comments and commas are discarded here and never reach later stages.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

PUNCTUATORS = frozenset("!$&():=@[]{}|")

_NAME_START = frozenset("_abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_NAME_CONT = _NAME_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")

_ESCAPES = {
    '"': '"', "\\": "\\", "/": "/", "b": "\b",
    "f": "\f", "n": "\n", "r": "\r", "t": "\t",
}


@dataclass
class Token:
    kind: str  # NAME | INT | FLOAT | STRING | PUNCT | EOF
    value: str
    start: int
    end: int


def line_col(source: str, offset: int) -> tuple[int, int]:
    """1-based line and column for a byte offset into ``source``."""
    line = source.count("\n", 0, offset) + 1
    last_nl = source.rfind("\n", 0, offset)
    return line, offset - last_nl


def tokenize(source: str) -> list[Token]:
    """Produce the full token stream, ending with an EOF token.

    Raises ParseError on any invalid lexeme.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t,\r\n" or ch == "﻿":
            i += 1
            continue
        if ch == "#":
            nl = source.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if ch in _NAME_START:
            j = i + 1
            while j < n and source[j] in _NAME_CONT:
                j += 1
            tokens.append(Token("NAME", source[i:j], i, j))
            i = j
            continue
        if ch in _DIGITS or (ch == "-" and i + 1 < n and source[i + 1] in _DIGITS):
            tok, i = _read_number(source, i)
            tokens.append(tok)
            continue
        if ch == '"':
            tok, i = _read_string(source, i)
            tokens.append(tok)
            continue
        if ch == ".":
            if source[i:i + 3] == "...":
                tokens.append(Token("PUNCT", "...", i, i + 3))
                i += 3
                continue
            raise _err(source, i, "unexpected '.'")
        if ch in PUNCTUATORS:
            tokens.append(Token("PUNCT", ch, i, i + 1))
            i += 1
            continue
        raise _err(source, i, f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", n, n))
    return tokens


def _read_number(source: str, i: int) -> tuple[Token, int]:
    start = i
    n = len(source)
    if source[i] == "-":
        i += 1
    if i < n and source[i] == "0":
        i += 1
        if i < n and source[i] in _DIGITS:
            raise _err(source, start, "invalid number: leading zero")
    else:
        if i >= n or source[i] not in _DIGITS:
            raise _err(source, start, "invalid number")
        while i < n and source[i] in _DIGITS:
            i += 1
    is_float = False
    if i < n and source[i] == ".":
        if i + 1 >= n or source[i + 1] not in _DIGITS:
            raise _err(source, start, "invalid number: digit expected after '.'")
        is_float = True
        i += 1
        while i < n and source[i] in _DIGITS:
            i += 1
    if i < n and source[i] in "eE":
        j = i + 1
        if j < n and source[j] in "+-":
            j += 1
        if j >= n or source[j] not in _DIGITS:
            raise _err(source, start, "invalid number: malformed exponent")
        is_float = True
        i = j
        while i < n and source[i] in _DIGITS:
            i += 1
    # A number may not run straight into a name or '.'
    if i < n and (source[i] in _NAME_START or source[i] == "."):
        raise _err(source, start, "invalid number: unexpected trailing character")
    text = source[start:i]
    return Token("FLOAT" if is_float else "INT", text, start, i), i


def _read_string(source: str, i: int) -> tuple[Token, int]:
    if source[i:i + 3] == '"""':
        return _read_block_string(source, i)
    start = i
    i += 1
    n = len(source)
    out: list[str] = []
    while i < n:
        ch = source[i]
        if ch == '"':
            return Token("STRING", "".join(out), start, i + 1), i + 1
        if ch == "\n" or ch == "\r":
            raise _err(source, start, "unterminated string")
        if ch == "\\":
            if i + 1 >= n:
                raise _err(source, start, "unterminated string")
            esc = source[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
                continue
            if esc == "u":
                hexpart = source[i + 2:i + 6]
                if len(hexpart) == 4 and all(c in "0123456789abcdefABCDEF" for c in hexpart):
                    code = int(hexpart, 16)
                    # Combine a valid surrogate pair into one code point.
                    if 0xD800 <= code <= 0xDBFF and source[i + 6:i + 8] == "\\u":
                        low_hex = source[i + 8:i + 12]
                        if len(low_hex) == 4 and all(
                                c in "0123456789abcdefABCDEF" for c in low_hex):
                            low = int(low_hex, 16)
                            if 0xDC00 <= low <= 0xDFFF:
                                combined = 0x10000 + ((code - 0xD800) << 10) \
                                    + (low - 0xDC00)
                                out.append(chr(combined))
                                i += 12
                                continue
                    out.append(chr(code))
                    i += 6
                    continue
                raise _err(source, i, "invalid \\u escape")
            raise _err(source, i, f"invalid escape \\{esc}")
        out.append(ch)
        i += 1
    raise _err(source, start, "unterminated string")


def _read_block_string(source: str, i: int) -> tuple[Token, int]:
    start = i
    i += 3
    n = len(source)
    out: list[str] = []
    while i < n:
        if source[i:i + 3] == '"""':
            return Token("STRING", _dedent_block("".join(out)), start, i + 3), i + 3
        if source[i:i + 4] == '\\"""':
            out.append('"""')
            i += 4
            continue
        out.append(source[i])
        i += 1
    raise _err(source, start, "unterminated block string")


def _dedent_block(raw: str) -> str:
    """Common-indent removal per the block-string value rules."""
    lines = raw.split("\n")
    indent: int | None = None
    for line in lines[1:]:
        stripped = line.lstrip(" \t")
        if stripped:
            ind = len(line) - len(stripped)
            if indent is None or ind < indent:
                indent = ind
    if indent:
        lines = [lines[0]] + [line[indent:] for line in lines[1:]]
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return "\n".join(lines)


def _err(source: str, offset: int, message: str) -> ParseError:
    line, col = line_col(source, offset)
    return ParseError(message, line, col)
