"""Command-line driver: file I/O, handler selection, diagnostics, exit codes."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .handlers import HandlerRegistry
from .quantum import DEFAULT_API, DEFAULT_BACKEND, DEFAULT_SHOTS, make_quantum_handler
from .rewrite import RewriteOptions, RewriteResult, rewrite_unit
from .taco import make_taco_handler

DERIVED_SUFFIX = ".synstitch.cpp"


def build_registry(quantum_api: str = DEFAULT_API,
                   quantum_backend: str = DEFAULT_BACKEND,
                   shots: int = DEFAULT_SHOTS) -> HandlerRegistry:
    registry = HandlerRegistry()
    registry.register(make_taco_handler())
    registry.register(make_quantum_handler(api=quantum_api,
                                           backend=quantum_backend,
                                           shots=shots))
    return registry


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synstitch",
        description="Rewrite C++ sources by replacing syntax-tagged "
                    "functions with handler-generated code.")
    parser.add_argument("inputs", nargs="*", metavar="FILE",
                        help="input files ('-' reads standard input)")
    parser.add_argument("-o", "--output", metavar="PATH",
                        help="output path (single input only; default: stdout)")
    parser.add_argument("--list-handlers", action="store_true",
                        help="list registered syntax handlers and exit")
    parser.add_argument("--emit-compat-stub", action="store_true",
                        help="emit a renamed unreachable stub before each "
                             "replacement")
    parser.add_argument("--line-directives", action="store_true",
                        help="emit #line directives around spliced regions")
    parser.add_argument("--define", action="append", default=[],
                        metavar="NAME=VALUE",
                        help="add an object-like macro (repeatable)")
    parser.add_argument("--handler-arg", action="append", default=[],
                        metavar="NAME=VALUE",
                        help="pass an argument to handlers (repeatable)")
    parser.add_argument("--taco-parallel", action="store_true",
                        help="annotate generated tensor loops with OpenMP")
    parser.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                        metavar="N",
                        help="shot count forwarded to the quantum predefines")
    parser.add_argument("--quantum-api", default=DEFAULT_API, metavar="NS",
                        help="namespace emitted for quantum runtime calls")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    handler_args = {}
    for pair in args.handler_arg:
        name, _, value = pair.partition("=")
        handler_args[name] = value
    if args.taco_parallel:
        handler_args["taco.parallel"] = "1"

    registry = build_registry(
        quantum_api=args.quantum_api,
        quantum_backend=handler_args.get("quantum.backend", DEFAULT_BACKEND),
        shots=args.shots)

    if args.list_handlers:
        for spec in registry.specs():
            aliases = f" (alias: {', '.join(spec.aliases)})" if spec.aliases else ""
            print(f"{spec.name:<10} {spec.help}{aliases}")
        return 0

    if not args.inputs:
        parser.print_usage(sys.stderr)
        print("synstitch: error: no input files", file=sys.stderr)
        return 2
    if args.output and len(args.inputs) > 1:
        print("synstitch: error: -o cannot be used with multiple inputs",
              file=sys.stderr)
        return 2

    defines = []
    for pair in args.define:
        name, _, value = pair.partition("=")
        defines.append((name, value))

    status = 0
    for input_path in args.inputs:
        code = _process_one(input_path, registry, args, defines, handler_args)
        status = max(status, code)
    return status


def _process_one(input_path: str, registry: HandlerRegistry,
                 args: argparse.Namespace, defines: list[tuple[str, str]],
                 handler_args: dict[str, str]) -> int:
    display = "<stdin>" if input_path == "-" else input_path
    try:
        if input_path == "-":
            data = sys.stdin.buffer.read()
        else:
            data = Path(input_path).read_bytes()
    except OSError as exc:
        print(f"{display}: error: cannot read input ({exc.strerror})",
              file=sys.stderr)
        return 1
    # latin-1 maps bytes to code points one-to-one, so spans stay byte-exact
    # and the round trip back to bytes is lossless for arbitrary input.
    text = data.decode("latin-1")

    options = RewriteOptions(
        emit_compat_stub=args.emit_compat_stub,
        emit_line_directives=args.line_directives,
        defines=defines,
        handler_args=handler_args,
        file_name=display,
    )
    result = rewrite_unit(text, registry, options)
    for diag in result.diagnostics:
        print(diag.format(display), file=sys.stderr)
    if not result.ok:
        return 1
    return _write_output(result, input_path, display, args)


def _write_output(result: RewriteResult, input_path: str, display: str,
                  args: argparse.Namespace) -> int:
    assert result.output_text is not None
    payload = result.output_text.encode("latin-1")
    if args.output:
        target = Path(args.output)
    elif len(args.inputs) > 1 and input_path != "-":
        target = Path(input_path).with_suffix(DERIVED_SUFFIX)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
        return 0
    try:
        target.write_bytes(payload)
    except OSError as exc:
        print(f"{display}: error: cannot write output ({exc.strerror})",
              file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
