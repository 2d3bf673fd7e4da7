"""Syntax-handler interface, registry, and shared handler utilities."""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from typing import Callable

from .cpptok import Token, TokenKind, render, tokenize
from .diagnostics import Diagnostic, SynstitchError, error
from .macros import MacroTable, expand_macros
from .scanner import Declarator, SyntaxFunction

COMPAT_STUB_PREFIX = "__synstitch_"


@dataclass
class Replacement:
    """Handler output: C++ text that replaces the whole tagged function."""
    body_text: str
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class HandlerContext:
    """Per-translation-unit state handed to handlers."""
    macro_table: MacroTable
    handler_args: dict[str, str] = field(default_factory=dict)
    _counter: int = 0

    def unique_suffix(self) -> int:
        self._counter += 1
        return self._counter


@dataclass(frozen=True)
class HandlerSpec:
    name: str
    get_replacement: Callable[[Declarator, list[Token], HandlerContext], Replacement]
    add_to_predefines: Callable[[], str]
    aliases: tuple[str, ...] = ()
    help: str = ""


class RegistryError(ValueError):
    """Configuration error while assembling the handler registry."""


class HandlerRegistry:
    def __init__(self) -> None:
        self._by_name: dict[str, HandlerSpec] = {}
        self._by_alias: dict[str, HandlerSpec] = {}

    def register(self, spec: HandlerSpec) -> None:
        if spec.name in self._by_name or spec.name in self._by_alias:
            raise RegistryError(f"duplicate syntax handler name '{spec.name}'")
        for alias in spec.aliases:
            if alias in self._by_alias or alias in self._by_name:
                raise RegistryError(f"duplicate syntax handler alias '{alias}'")
        self._by_name[spec.name] = spec
        for alias in spec.aliases:
            self._by_alias[alias] = spec

    def lookup(self, name: str) -> HandlerSpec | None:
        return self._by_name.get(name) or self._by_alias.get(name)

    def alias_map(self) -> dict[str, str]:
        return {alias: spec.name for alias, spec in self._by_alias.items()}

    def specs(self) -> list[HandlerSpec]:
        return list(self._by_name.values())


def register_handler(registry: HandlerRegistry, spec: HandlerSpec) -> HandlerRegistry:
    registry.register(spec)
    return registry


def get_decl_text(declarator: Declarator) -> str:
    """Regenerate the original function declaration, defaults included."""
    return _decl_text(declarator, declarator.name)


def make_compat_stub(declarator: Declarator, suffix: int) -> str:
    """Renamed original declaration with an unreachable body.

    Mirrors the compiler-side workaround where the already-parsed
    declaration cannot be removed, only renamed out of the way.
    """
    stub_name = f"{COMPAT_STUB_PREFIX}{suffix}_" + declarator.name.replace("::", "_")
    return _decl_text(declarator, stub_name) + " { __builtin_unreachable(); }"


def _decl_text(declarator: Declarator, name: str) -> str:
    ret = render(declarator.return_tokens).strip()
    params = []
    for p in declarator.params:
        text = render(p.decl_tokens).strip()
        if p.default_tokens:
            text += " = " + render(p.default_tokens).strip()
        params.append(text)
    head = f"{ret} {name}" if ret else name
    return f"{head}({', '.join(params)})"


def invoke(spec: HandlerSpec, fn: SyntaxFunction, ctx: HandlerContext) -> Replacement:
    """Run one handler on one tagged function.

    The body is macro-expanded first; the returned text is checked to be
    lexically valid and to define a function named like the original.
    """
    body = expand_macros(fn.body_tokens, ctx.macro_table, in_syntax_body=True)
    replacement = spec.get_replacement(fn.declarator, body, ctx)
    if any(d.severity == "error" for d in replacement.diagnostics):
        return replacement
    try:
        out_tokens = tokenize(replacement.body_text)
    except SynstitchError as exc:
        replacement.diagnostics.append(error(
            f"handler '{spec.name}' produced lexically invalid replacement "
            f"text ({exc.diagnostic.message})", fn.declarator.attr_span))
        return replacement
    if not _defines_function(out_tokens, fn.declarator.name):
        replacement.diagnostics.append(error(
            f"handler '{spec.name}' replacement does not define a function "
            f"named '{fn.declarator.name}'", fn.declarator.attr_span))
    return replacement


def _defines_function(tokens: list[Token], qualified_name: str) -> bool:
    name = qualified_name.split("::")[-1]
    for k, tok in enumerate(tokens[:-1]):
        if tok.kind is TokenKind.IDENTIFIER and tok.spelling == name \
                and tokens[k + 1].is_punct("("):
            return True
    return False


def make_subprocess_handler(name: str, command: list[str],
                            aliases: tuple[str, ...] = (),
                            help: str = "") -> HandlerSpec:
    """Wrap an external program as a syntax handler.

    The program receives one JSON object on stdin (declarator summary plus
    body token spellings) and must print replacement C++ text; a nonzero
    exit status is reported as a handler error.
    """

    def get_replacement(declarator: Declarator, body: list[Token],
                        ctx: HandlerContext) -> Replacement:
        payload = {
            "syntax": name,
            "declarator": {
                "name": declarator.name,
                "return_type": render(declarator.return_tokens).strip(),
                "params": [
                    {
                        "type": render(p.type_tokens).strip(),
                        "name": p.name,
                        "default": render(p.default_tokens).strip(),
                    }
                    for p in declarator.params
                ],
                "text": get_decl_text(declarator),
            },
            "body_tokens": [t.spelling for t in body],
            "body_text": render(body),
        }
        proc = subprocess.run(command, input=json.dumps(payload),
                              capture_output=True, text=True)
        if proc.returncode != 0:
            message = proc.stderr.strip() or f"exit status {proc.returncode}"
            return Replacement("", [error(
                f"subprocess handler '{name}' failed: {message}",
                declarator.attr_span)])
        return Replacement(proc.stdout)

    return HandlerSpec(name=name, get_replacement=get_replacement,
                       add_to_predefines=lambda: "", aliases=aliases,
                       help=help or f"external handler: {' '.join(command)}")
