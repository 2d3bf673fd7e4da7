"""Locate syntax-tagged functions and capture their bodies.

A tagged function is `[[clang::syntax(NAME)]]` (or a registered alias
identifier such as `__qpu__`) immediately preceding a free-function
definition.  Bodies are captured under balanced-delimiter rules: literals
and comments are already opaque at the token level, so only punctuators
count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cpptok import SourceSpan, Token, TokenKind
from .diagnostics import Diagnostic, SynstitchError, warning

# Type-ish keywords that cannot be a parameter name; used to tell
# `f(unsigned int)` (unnamed) from `f(unsigned x)` (named).
_TYPE_TAIL_KEYWORDS = {
    "void", "bool", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "auto", "const", "volatile",
    "struct", "class", "enum", "union",
}

_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {")": "(", "]": "[", "}": "{"}


@dataclass
class Param:
    tokens: list[Token]
    type_tokens: list[Token]
    name: str
    default_tokens: list[Token] = field(default_factory=list)

    @property
    def decl_tokens(self) -> list[Token]:
        """Original tokens up to (excluding) the `=` of a default argument."""
        if self.default_tokens:
            return self.tokens[: len(self.tokens) - len(self.default_tokens) - 1]
        return self.tokens


@dataclass
class Declarator:
    return_tokens: list[Token]
    name: str
    params: list[Param]
    attr_name: str
    attr_span: SourceSpan
    header_span: SourceSpan


@dataclass
class SyntaxFunction:
    declarator: Declarator
    body_tokens: list[Token]
    full_span: SourceSpan


def find_syntax_functions(tokens: list[Token], aliases: dict[str, str],
                          diags: list[Diagnostic] | None = None
                          ) -> list[SyntaxFunction]:
    """Return every tagged function definition, in file order.

    Only the prefix attribute position (before the return type) is
    recognized; an attribute following a declarator is ignored with a
    warning.
    """
    found: list[SyntaxFunction] = []
    i = 0
    n = len(tokens)
    while i < n:
        attr = _match_attribute(tokens, i, aliases)
        if attr is None:
            i += 1
            continue
        attr_name, attr_span, header_start = attr
        if _looks_postfix(tokens, i, header_start):
            if diags is not None:
                diags.append(warning(
                    f"syntax attribute '{attr_name}' ignored in non-prefix "
                    "position", attr_span))
            i = header_start
            continue
        header_end = _find_body_open(tokens, header_start, attr_span)
        header = tokens[header_start:header_end]
        declarator = parse_declarator(header, attr_name, attr_span)
        close = capture_balanced(tokens, header_end)
        body = tokens[header_end + 1: close]
        _check_body_balance(body)
        full_span = SourceSpan(attr_span.byte_start, tokens[close].byte_end,
                               attr_span.line, attr_span.col)
        found.append(SyntaxFunction(declarator, body, full_span))
        i = close + 1
    return found


def _looks_postfix(tokens: list[Token], i: int, header_start: int) -> bool:
    """A `[[...]]` between a declarator fragment and something that cannot
    start a declaration sits in a suffix position, not before a function."""
    if i == 0 or tokens[i].kind is TokenKind.IDENTIFIER:
        return False  # alias markers are prefix by convention
    prev = tokens[i - 1]
    if not (prev.kind is TokenKind.IDENTIFIER or prev.is_punct(")")
            or prev.is_punct("]")):
        return False
    if header_start >= len(tokens):
        return True
    return tokens[header_start].kind is not TokenKind.IDENTIFIER


def _match_attribute(tokens: list[Token], i: int,
                     aliases: dict[str, str]) -> tuple[str, SourceSpan, int] | None:
    tok = tokens[i]
    if tok.kind is TokenKind.IDENTIFIER and tok.spelling in aliases:
        return aliases[tok.spelling], tok.span, i + 1
    if (tok.is_punct("[") and i + 9 < len(tokens)
            and tokens[i + 1].is_punct("[")
            and tokens[i + 2].is_ident("clang")
            and tokens[i + 3].is_punct("::")
            and tokens[i + 4].is_ident("syntax")
            and tokens[i + 5].is_punct("(")
            and tokens[i + 6].kind is TokenKind.IDENTIFIER
            and tokens[i + 7].is_punct(")")
            and tokens[i + 8].is_punct("]")
            and tokens[i + 9].is_punct("]")):
        span = SourceSpan(tok.byte_start, tokens[i + 9].byte_end,
                          tok.line, tok.col)
        return tokens[i + 6].spelling, span, i + 10
    return None


def _find_body_open(tokens: list[Token], start: int,
                    attr_span: SourceSpan) -> int:
    """Index of the `{` opening the tagged function body."""
    depth = 0
    for k in range(start, len(tokens)):
        tok = tokens[k]
        if tok.kind is not TokenKind.PUNCT:
            continue
        s = tok.spelling
        if s in ("(", "["):
            depth += 1
        elif s in (")", "]"):
            depth -= 1
        elif depth == 0:
            if s == "{":
                return k
            if s == ";":
                raise SynstitchError(
                    "syntax attribute on a declaration without a body",
                    tok.span)
    raise SynstitchError("no function body found after syntax attribute",
                         attr_span)


def capture_balanced(tokens: list[Token], open_index: int) -> int:
    """Index of the `}` matching the `{` at open_index (braces only)."""
    assert tokens[open_index].is_punct("{")
    depth = 1
    for k in range(open_index + 1, len(tokens)):
        tok = tokens[k]
        if tok.kind is TokenKind.PUNCT:
            if tok.spelling == "{":
                depth += 1
            elif tok.spelling == "}":
                depth -= 1
                if depth == 0:
                    return k
    raise SynstitchError("unmatched '{' in syntax function body",
                         tokens[open_index].span)


def _check_body_balance(body: list[Token]) -> None:
    stack: list[Token] = []
    for tok in body:
        if tok.kind is not TokenKind.PUNCT:
            continue
        s = tok.spelling
        if s in _OPEN:
            stack.append(tok)
        elif s in _CLOSE:
            if not stack or stack[-1].spelling != _CLOSE[s]:
                raise SynstitchError(
                    f"unbalanced '{s}' inside syntax function body", tok.span)
            stack.pop()
    if stack:
        raise SynstitchError(
            f"unbalanced '{stack[-1].spelling}' inside syntax function body",
            stack[-1].span)


def parse_declarator(header: list[Token], attr_name: str,
                     attr_span: SourceSpan) -> Declarator:
    """Parse return type, name, and parameter list from a function header."""
    if not header:
        raise SynstitchError("missing function declaration after syntax "
                             "attribute", attr_span)
    if header[0].is_ident("template"):
        raise SynstitchError("template functions cannot carry a syntax "
                             "attribute", header[0].span)
    paren = _find_param_list(header)
    if paren is None:
        raise SynstitchError("no parameter list found in tagged function "
                             "declaration", header[0].span)
    name_start = _name_chain_start(header, paren)
    if name_start is None:
        raise SynstitchError("cannot parse the name of the tagged function",
                             header[paren].span)
    if header[name_start].is_ident("operator"):
        raise SynstitchError("operator overloads cannot carry a syntax "
                             "attribute", header[name_start].span)
    if name_start == 0:
        raise SynstitchError("cannot determine the return type of the "
                             "tagged function", header[0].span)
    name = "".join(t.spelling for t in header[name_start:paren])
    close = _match_paren(header, paren)
    params = _split_params(header[paren + 1: close])
    header_span = SourceSpan(header[0].byte_start, header[-1].byte_end,
                             header[0].line, header[0].col)
    return Declarator(
        return_tokens=header[:name_start],
        name=name,
        params=params,
        attr_name=attr_name,
        attr_span=attr_span,
        header_span=header_span,
    )


def _find_param_list(header: list[Token]) -> int | None:
    """First `(` at top level; angle brackets in the return type are nested."""
    angle = 0
    prev: Token | None = None
    for k, tok in enumerate(header):
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s == "<" and prev is not None and prev.kind is TokenKind.IDENTIFIER:
                angle += 1
            elif s == ">" and angle:
                angle -= 1
            elif s == ">>" and angle:
                angle = max(0, angle - 2)
            elif s == "(" and angle == 0:
                return k
        prev = tok
    return None


def _name_chain_start(header: list[Token], paren: int) -> int | None:
    """Walk a possibly ::-qualified identifier chain backwards from `(`."""
    k = paren - 1
    if k < 0 or header[k].kind is not TokenKind.IDENTIFIER:
        return None
    while k >= 2 and header[k - 1].is_punct("::") \
            and header[k - 2].kind is TokenKind.IDENTIFIER:
        k -= 2
    return k


def _match_paren(header: list[Token], paren: int) -> int:
    depth = 0
    for k in range(paren, len(header)):
        tok = header[k]
        if tok.is_punct("("):
            depth += 1
        elif tok.is_punct(")"):
            depth -= 1
            if depth == 0:
                return k
    raise SynstitchError("unbalanced parameter list in tagged function "
                         "declaration", header[paren].span)


def _split_params(tokens: list[Token]) -> list[Param]:
    if not tokens:
        return []
    slices: list[list[Token]] = [[]]
    depth = 0
    angle = 0
    prev: Token | None = None
    for tok in tokens:
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s in ("(", "[", "{"):
                depth += 1
            elif s in (")", "]", "}"):
                depth -= 1
            elif depth == 0:
                if s == "<" and prev is not None \
                        and prev.kind is TokenKind.IDENTIFIER:
                    angle += 1
                elif s == ">" and angle:
                    angle -= 1
                elif s == ">>" and angle:
                    angle = max(0, angle - 2)
                elif s == "," and angle == 0:
                    slices.append([])
                    prev = tok
                    continue
        slices[-1].append(tok)
        prev = tok
    return [_parse_param(s) for s in slices]


def _parse_param(tokens: list[Token]) -> Param:
    left, default = _split_default(tokens)
    name = ""
    name_tok: Token | None = None
    depth = 0
    angle = 0
    prev: Token | None = None
    for tok in left:
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s in ("(", "[", "{"):
                depth += 1
            elif s in (")", "]", "}"):
                depth -= 1
            elif s == "<" and depth == 0 and prev is not None \
                    and prev.kind is TokenKind.IDENTIFIER:
                angle += 1
            elif s == ">" and angle:
                angle -= 1
            elif s == ">>" and angle:
                angle = max(0, angle - 2)
        elif tok.kind is TokenKind.IDENTIFIER and depth == 0 and angle == 0:
            name_tok = tok
        prev = tok
    type_tokens = list(left)
    if name_tok is not None and name_tok.spelling not in _TYPE_TAIL_KEYWORDS:
        reduced = [t for t in left if t is not name_tok]
        if reduced:
            name = name_tok.spelling
            type_tokens = reduced
    return Param(tokens=list(tokens), type_tokens=type_tokens, name=name,
                 default_tokens=default)


def _split_default(tokens: list[Token]) -> tuple[list[Token], list[Token]]:
    depth = 0
    angle = 0
    prev: Token | None = None
    for k, tok in enumerate(tokens):
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s in ("(", "[", "{"):
                depth += 1
            elif s in (")", "]", "}"):
                depth -= 1
            elif depth == 0:
                if s == "<" and prev is not None \
                        and prev.kind is TokenKind.IDENTIFIER:
                    angle += 1
                elif s == ">" and angle:
                    angle -= 1
                elif s == ">>" and angle:
                    angle = max(0, angle - 2)
                elif s == "=" and angle == 0:
                    return list(tokens[:k]), list(tokens[k + 1:])
        prev = tok
    return list(tokens), []
