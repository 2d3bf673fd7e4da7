"""Single translation-unit pipeline: scan, dispatch, splice, predefines.

Bytes outside tagged-function spans are copied verbatim, so a unit with no
tagged functions rewrites to itself exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cpptok import tokenize
from .diagnostics import Diagnostic, SynstitchError
from .handlers import HandlerContext, HandlerRegistry, invoke, make_compat_stub
from .macros import scan_defines_tokens
from .scanner import find_syntax_functions

PREDEFINES_FILE_NAME = "<synstitch-predefines>"


@dataclass
class RewriteOptions:
    emit_compat_stub: bool = False
    emit_line_directives: bool = False
    defines: list[tuple[str, str]] = field(default_factory=list)
    handler_args: dict[str, str] = field(default_factory=dict)
    file_name: str = "<input>"


@dataclass
class RewriteResult:
    output_text: str | None
    diagnostics: list[Diagnostic]
    handlers_used: list[str]

    @property
    def ok(self) -> bool:
        return self.output_text is not None


def inject_predefines(text: str, blocks: dict[str, str]) -> str:
    """Insert per-handler predefines text strictly before the first byte."""
    prefix = "".join(block for block in blocks.values() if block)
    return prefix + text


def rewrite_unit(text: str, registry: HandlerRegistry,
                 options: RewriteOptions | None = None) -> RewriteResult:
    options = options or RewriteOptions()
    diagnostics: list[Diagnostic] = []
    handlers_used: list[str] = []
    try:
        output = _rewrite(text, registry, options, diagnostics, handlers_used)
    except SynstitchError as exc:
        diagnostics.append(exc.diagnostic)
        return RewriteResult(None, diagnostics, [])
    if any(d.severity == "error" for d in diagnostics):
        return RewriteResult(None, diagnostics, [])
    return RewriteResult(output, diagnostics, handlers_used)


def _rewrite(text: str, registry: HandlerRegistry, options: RewriteOptions,
             diagnostics: list[Diagnostic], handlers_used: list[str]) -> str:
    tokens = tokenize(text)
    table = scan_defines_tokens(tokens, diagnostics)
    for name, value in options.defines:
        table.define_text(name, value)
    functions = find_syntax_functions(tokens, registry.alias_map(), diagnostics)
    ctx = HandlerContext(macro_table=table, handler_args=dict(options.handler_args))

    predefines: dict[str, str] = {}
    pieces: list[str] = []
    pos = 0
    for fn in functions:
        spec = registry.lookup(fn.declarator.attr_name)
        if spec is None:
            raise SynstitchError(
                f"no handler registered for syntax '{fn.declarator.attr_name}'",
                fn.declarator.attr_span)
        replacement = invoke(spec, fn, ctx)
        diagnostics.extend(replacement.diagnostics)
        if any(d.severity == "error" for d in replacement.diagnostics):
            return ""
        if spec.name not in predefines:
            predefines[spec.name] = _terminated(spec.add_to_predefines())
            handlers_used.append(spec.name)
        pieces.append(text[pos:fn.full_span.byte_start])
        if options.emit_compat_stub:
            pieces.append(make_compat_stub(fn.declarator, ctx.unique_suffix())
                          + "\n")
        pieces.append(_terminated(replacement.body_text))
        if options.emit_line_directives:
            next_line = text.count("\n", 0, fn.full_span.byte_end) + 1
            pieces.append(f'#line {next_line} "{options.file_name}"\n')
        pos = fn.full_span.byte_end
    pieces.append(text[pos:])

    body = "".join(pieces)
    if not any(predefines.values()):
        return body
    if options.emit_line_directives:
        pre = (f'#line 1 "{PREDEFINES_FILE_NAME}"\n'
               + "".join(predefines.values())
               + f'#line 1 "{options.file_name}"\n')
        return pre + body
    return inject_predefines(body, predefines)


def _terminated(block: str) -> str:
    if block and not block.endswith("\n"):
        return block + "\n"
    return block
