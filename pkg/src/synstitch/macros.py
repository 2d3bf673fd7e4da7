"""Object-like macro table: #define scanning and bounded substitution.

Only object-like macros are substituted.  Function-like defines are
recorded by name so their use inside a captured syntax body can be
diagnosed instead of silently mis-expanding.  Expansion is applied to
captured function bodies only; directives and ordinary code are never
rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cpptok import Token, TokenKind, tokenize
from .diagnostics import Diagnostic, SynstitchError, warning

EXPANSION_DEPTH_LIMIT = 64


@dataclass
class MacroTable:
    entries: dict[str, list[Token]] = field(default_factory=dict)
    unsupported: set[str] = field(default_factory=set)

    def define_text(self, name: str, value: str) -> None:
        """Add an entry from plain text, e.g. from a command-line -D pair."""
        self.entries[name] = tokenize(value)


def scan_defines(text: str, diags: list[Diagnostic] | None = None) -> MacroTable:
    return scan_defines_tokens(tokenize(text), diags)


def scan_defines_tokens(tokens: list[Token],
                        diags: list[Diagnostic] | None = None) -> MacroTable:
    """Collect `#define NAME tokens...` entries in file order."""
    table = MacroTable()
    i = 0
    n = len(tokens)
    prev_line = 0
    while i < n:
        tok = tokens[i]
        first_on_line = tok.line != prev_line
        prev_line = tok.line
        if not (first_on_line and tok.is_punct("#")):
            i += 1
            continue
        group, i = _directive_tokens(tokens, i)
        if len(group) >= 2 and group[1].is_ident("define"):
            _record_define(group, table, diags)
        if group:
            prev_line = group[-1].line
    return table


def _directive_tokens(tokens: list[Token], start: int) -> tuple[list[Token], int]:
    """Collect one logical directive line, honoring backslash continuations."""
    group = [tokens[start]]
    i = start + 1
    line = tokens[start].line
    while i < len(tokens):
        tok = tokens[i]
        if tok.line != line:
            if group[-1].is_punct("\\"):
                group.pop()
                line = tok.line
            else:
                break
        group.append(tok)
        i += 1
    if group and group[-1].is_punct("\\"):
        group.pop()
    return group, i


def _record_define(group: list[Token], table: MacroTable,
                   diags: list[Diagnostic] | None) -> None:
    if len(group) < 3 or group[2].kind is not TokenKind.IDENTIFIER:
        if diags is not None:
            diags.append(warning("malformed #define ignored", group[0].span))
        return
    name = group[2].spelling
    rest = group[3:]
    if rest and rest[0].is_punct("(") and not rest[0].leading_space:
        table.unsupported.add(name)
        table.entries.pop(name, None)
        return
    table.entries[name] = rest
    table.unsupported.discard(name)


def expand_macros(tokens: list[Token], table: MacroTable,
                  in_syntax_body: bool = False) -> list[Token]:
    """Substitute object-like macros, recursively, bounded by a depth limit.

    Expanded tokens inherit the span of the macro-name occurrence so later
    diagnostics point at user-written code.
    """
    if not table.entries and not (in_syntax_body and table.unsupported):
        return list(tokens)
    out: list[Token] = []
    for tok in tokens:
        if tok.kind is TokenKind.IDENTIFIER:
            if tok.spelling in table.entries:
                _expand_into(out, tok, table, in_syntax_body, 1)
                continue
            if in_syntax_body and tok.spelling in table.unsupported:
                raise SynstitchError(
                    f"function-like macro '{tok.spelling}' is not supported "
                    "inside a syntax function body", tok.span)
        out.append(tok)
    return out


def _expand_into(out: list[Token], origin: Token, table: MacroTable,
                 in_syntax_body: bool, depth: int) -> None:
    if depth > EXPANSION_DEPTH_LIMIT:
        raise SynstitchError(
            f"macro expansion depth limit exceeded while expanding "
            f"'{origin.spelling}'", origin.span)
    replacement = table.entries[origin.spelling]
    for pos, rep in enumerate(replacement):
        leading = origin.leading_space if pos == 0 else rep.leading_space
        cloned = Token.at(rep.kind, rep.spelling, origin.span, leading)
        if rep.kind is TokenKind.IDENTIFIER:
            if rep.spelling in table.entries:
                _expand_into(out, cloned, table, in_syntax_body, depth + 1)
                continue
            if in_syntax_body and rep.spelling in table.unsupported:
                raise SynstitchError(
                    f"function-like macro '{rep.spelling}' is not supported "
                    "inside a syntax function body", origin.span)
        out.append(cloned)
