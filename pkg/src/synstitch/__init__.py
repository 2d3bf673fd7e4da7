"""synstitch: embed DSLs in C++ by rewriting syntax-tagged functions.

Functions carrying `[[clang::syntax(NAME)]]` (or a registered alias such
as `__qpu__`) have their bodies captured as token streams, translated by
the handler registered for NAME, and replaced by generated C++ text.
"""

from .cpptok import SourceSpan, Token, TokenKind, render, tokenize
from .diagnostics import Diagnostic, SynstitchError
from .handlers import (
    HandlerContext,
    HandlerRegistry,
    HandlerSpec,
    Replacement,
    get_decl_text,
    invoke,
    make_compat_stub,
    make_subprocess_handler,
    register_handler,
)
from .macros import MacroTable, expand_macros, scan_defines
from .quantum import make_quantum_handler
from .rewrite import RewriteOptions, RewriteResult, inject_predefines, rewrite_unit
from .scanner import (
    Declarator,
    Param,
    SyntaxFunction,
    capture_balanced,
    find_syntax_functions,
    parse_declarator,
)
from .taco import make_taco_handler

__version__ = "0.1.0"

__all__ = [
    "Declarator",
    "Diagnostic",
    "HandlerContext",
    "HandlerRegistry",
    "HandlerSpec",
    "MacroTable",
    "Param",
    "Replacement",
    "RewriteOptions",
    "RewriteResult",
    "SourceSpan",
    "SynstitchError",
    "SyntaxFunction",
    "Token",
    "TokenKind",
    "capture_balanced",
    "expand_macros",
    "find_syntax_functions",
    "get_decl_text",
    "inject_predefines",
    "invoke",
    "make_compat_stub",
    "make_quantum_handler",
    "make_subprocess_handler",
    "make_taco_handler",
    "parse_declarator",
    "register_handler",
    "render",
    "rewrite_unit",
    "scan_defines",
    "tokenize",
    "__version__",
]
