"""C++ tokenizer with exact byte-span provenance.

Every non-whitespace, non-comment byte of the input is covered by exactly
one token; whitespace and comments are skipped but recorded through the
``leading_space`` flag of the following token.  Inputs need not be valid
C++: bytes that fit no lexeme become single-character punctuators, so the
only lexical errors are unterminated literals and unterminated block
comments.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .diagnostics import SynstitchError


class TokenKind(enum.Enum):
    IDENTIFIER = "identifier"
    NUMBER = "numeric-literal"
    STRING = "string-literal"
    CHAR = "char-literal"
    RAW_STRING = "raw-string-literal"
    PUNCT = "punctuator"


@dataclass(frozen=True, slots=True)
class SourceSpan:
    byte_start: int
    byte_end: int
    line: int
    col: int


class Token:
    """One lexical atom; span fields are stored flat for speed."""

    __slots__ = ("kind", "spelling", "byte_start", "byte_end", "line", "col",
                 "leading_space")

    def __init__(self, kind: TokenKind, spelling: str, byte_start: int,
                 byte_end: int, line: int, col: int, leading_space: bool):
        self.kind = kind
        self.spelling = spelling
        self.byte_start = byte_start
        self.byte_end = byte_end
        self.line = line
        self.col = col
        self.leading_space = leading_space

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.byte_start, self.byte_end, self.line, self.col)

    @classmethod
    def at(cls, kind: TokenKind, spelling: str, span: SourceSpan,
           leading_space: bool) -> "Token":
        return cls(kind, spelling, span.byte_start, span.byte_end, span.line,
                   span.col, leading_space)

    def is_punct(self, spelling: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.spelling == spelling

    def is_ident(self, spelling: str | None = None) -> bool:
        if self.kind is not TokenKind.IDENTIFIER:
            return False
        return spelling is None or self.spelling == spelling

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.spelling!r}, @{self.byte_start})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Token):
            return NotImplemented
        return (self.kind is other.kind and self.spelling == other.spelling
                and self.byte_start == other.byte_start
                and self.byte_end == other.byte_end
                and self.leading_space == other.leading_space)

    def __hash__(self) -> int:
        return hash((self.kind, self.spelling, self.byte_start))


# Multi-character punctuators, longest first so the alternation is
# maximal-munch.  `>>` is one token; `[[` / `]]` are two brackets and the
# scanner matches the pair.  Digraphs/trigraphs are unsupported.
PUNCTUATORS = [
    "<<=", ">>=", "->*", "<=>", "...",
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##", ".*",
    "{", "}", "[", "]", "(", ")", ";", ":", "?", ".", "+", "-", "*", "/",
    "%", "&", "|", "^", "!", "=", "<", ">", ",", "~", "#",
]

_PUNCT_ALT = "|".join(re.escape(p) for p in PUNCTUATORS)

_MASTER = re.compile(
    r"""
      (?P<ws>[ \t\r\n\f\v]+)
    | (?P<line_comment>//[^\n]*)
    | (?P<block_comment>/\*.*?\*/)
    | (?P<raw_string>(?:u8|u|U|L)?R"(?P<rdelim>[^ ()\\\t\r\n\f\v]*)\(.*?\)(?P=rdelim)")
    | (?P<string>(?:u8|u|U|L)?"(?:[^"\\\n]|\\[^\n])*")
    | (?P<char>(?:u8|u|U|L)?'(?:[^'\\\n]|\\[^\n])*')
    | (?P<number>\.?[0-9](?:'[0-9a-zA-Z_]|[eEpP][+-]|[0-9a-zA-Z_.])*)
    | (?P<identifier>[A-Za-z_-\U0010FFFF][A-Za-z0-9_-\U0010FFFF]*)
    | (?P<punct>%s)
    | (?P<other>.)
    """ % _PUNCT_ALT,
    re.VERBOSE | re.DOTALL,
)

_GI = _MASTER.groupindex
_WS, _LINE_COMMENT, _BLOCK_COMMENT = _GI["ws"], _GI["line_comment"], _GI["block_comment"]
_RAW_STRING, _RDELIM, _STRING = _GI["raw_string"], _GI["rdelim"], _GI["string"]
_CHAR_LIT, _NUMBER, _IDENT = _GI["char"], _GI["number"], _GI["identifier"]
_PUNCT_G, _OTHER = _GI["punct"], _GI["other"]

_KIND_BY_INDEX = {
    _RAW_STRING: TokenKind.RAW_STRING,
    _STRING: TokenKind.STRING,
    _CHAR_LIT: TokenKind.CHAR,
    _NUMBER: TokenKind.NUMBER,
    _IDENT: TokenKind.IDENTIFIER,
    _PUNCT_G: TokenKind.PUNCT,
    _OTHER: TokenKind.PUNCT,
}

_LITERAL_PREFIXES = {"u8", "u", "U", "L", "R", "u8R", "uR", "UR", "LR"}


def tokenize(text: str) -> list[Token]:
    """Tokenize ``text``; raises SynstitchError on unterminated lexemes."""
    tokens: list[Token] = []
    append = tokens.append
    kinds = _KIND_BY_INDEX
    line = 1
    line_start = 0
    pending_space = False
    # The catch-all `other` group guarantees every position matches, so the
    # non-overlapping matches of finditer tile the input contiguously.
    for m in _MASTER.finditer(text):
        gi = m.lastindex
        # `rdelim` is nested inside `raw_string` and wins lastindex when a
        # raw string has a non-empty delimiter.
        if gi == _RDELIM:
            gi = _RAW_STRING
        spelling = m.group(gi)
        if gi <= _BLOCK_COMMENT:
            pending_space = True
            if gi != _LINE_COMMENT:
                nl = spelling.count("\n")
                if nl:
                    line += nl
                    line_start = m.start() + spelling.rfind("\n") + 1
            continue
        pos = m.start()
        if gi >= _IDENT:
            _check_unterminated(text, gi, spelling, pos, line, line_start)
        append(Token(kinds[gi], spelling, pos, pos + len(spelling), line,
                     pos - line_start + 1, pending_space))
        pending_space = False
        if gi == _RAW_STRING:
            nl = spelling.count("\n")
            if nl:
                line += nl
                line_start = pos + spelling.rfind("\n") + 1
    return tokens


def _check_unterminated(text: str, gi: int, spelling: str, pos: int,
                        line: int, line_start: int) -> None:
    span = None
    if gi == _OTHER:
        if spelling == '"':
            span, what = _span_at(pos, 1, line, line_start), "string literal"
        elif spelling == "'":
            span, what = _span_at(pos, 1, line, line_start), "character literal"
    elif gi == _PUNCT_G:
        if spelling == "/" and text.startswith("/*", pos):
            span, what = _span_at(pos, 1, line, line_start), "block comment"
    elif len(spelling) <= 3 and spelling in _LITERAL_PREFIXES:
        if text.startswith('"', pos + len(spelling)):
            what = "raw string literal" if spelling.endswith("R") else "string literal"
            span = _span_at(pos, len(spelling), line, line_start)
    if span is not None:
        raise SynstitchError(f"unterminated {what}", span)


def _span_at(pos: int, width: int, line: int, line_start: int) -> SourceSpan:
    return SourceSpan(pos, pos + width, line, pos - line_start + 1)


def _would_paste(a: Token, b: Token) -> bool:
    """True when concatenating the two spellings changes the token list."""
    try:
        toks = tokenize(a.spelling + b.spelling)
    except SynstitchError:
        return True
    return (
        len(toks) != 2
        or toks[0].spelling != a.spelling
        or toks[1].spelling != b.spelling
    )


def render(tokens: list[Token]) -> str:
    """Join spellings, one space where leading_space is set.

    A space is also forced wherever two adjacent spellings would otherwise
    fuse into a different token, so re-tokenizing the result always yields
    a kind/spelling-identical stream.
    """
    parts: list[str] = []
    prev: Token | None = None
    for tok in tokens:
        if tok.leading_space or (prev is not None and _would_paste(prev, tok)):
            parts.append(" ")
        parts.append(tok.spelling)
        prev = tok
    return "".join(parts)
