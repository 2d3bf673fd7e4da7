"""Quantum-kernel handler.

Splits a tagged function body into semicolon-terminated statements, parses
gate applications (`X(q[0])`, `Ry(q[1], x)`, `CX(q[1], q[0])`, `Measure`),
plain kernel calls, and `::ctrl` / `::adjoint` modified calls, then emits a
class deriving from the runtime's QuantumKernel template whose destructor
builds the instruction list and submits it to the configured executor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cpptok import SourceSpan, Token, TokenKind, render
from .diagnostics import SynstitchError
from .handlers import HandlerContext, HandlerSpec, Replacement, get_decl_text
from .scanner import Declarator

SIMPLE_GATES = ("X", "Y", "Z", "H", "S", "T")
ROTATION_GATES = ("Rx", "Ry", "Rz")
GATE_NAMES = SIMPLE_GATES + ROTATION_GATES + ("CX", "Measure")

DEFAULT_API = "qrt"
DEFAULT_BACKEND = "simulator"
DEFAULT_SHOTS = 1024


@dataclass
class QubitRef:
    reg: str
    index_tokens: list[Token] | None  # None means the whole register
    span: SourceSpan

    @property
    def index_text(self) -> str:
        assert self.index_tokens is not None
        return render(self.index_tokens).strip()


@dataclass
class GateStmt:
    gate: str
    qubits: list[QubitRef]
    angle_tokens: list[Token] = field(default_factory=list)
    span: SourceSpan | None = None


@dataclass
class KernelCallStmt:
    callee: str
    modifier: str  # "plain", "ctrl", or "adjoint"
    ctrl_qubit: QubitRef | None
    arg_tokens: list[Token]
    span: SourceSpan | None = None


def split_statements(tokens: list[Token]) -> list[list[Token]]:
    """Split body tokens on top-level semicolons; empty groups are dropped."""
    groups: list[list[Token]] = []
    current: list[Token] = []
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s in ("(", "[", "{"):
                depth += 1
            elif s in (")", "]", "}"):
                depth -= 1
            elif s == ";" and depth == 0:
                if current:
                    groups.append(current)
                current = []
                continue
        current.append(tok)
    if current:
        raise SynstitchError("expected ';' after quantum statement",
                             current[-1].span)
    return groups


def parse_statement(group: list[Token]) -> GateStmt | KernelCallStmt:
    head = group[0]
    if head.kind is not TokenKind.IDENTIFIER:
        raise SynstitchError(
            f"cannot parse quantum statement starting with '{head.spelling}'",
            head.span)
    if len(group) > 1 and group[1].is_punct("::"):
        return _parse_modified_call(group)
    if head.spelling in GATE_NAMES:
        return _parse_gate(group)
    return _parse_plain_call(group)


def _call_args(group: list[Token], start: int) -> list[Token]:
    if start >= len(group) or not group[start].is_punct("(") \
            or not group[-1].is_punct(")"):
        raise SynstitchError(
            f"malformed call in quantum statement '{render(group).strip()}'",
            group[0].span)
    return group[start + 1:-1]


def _split_args(tokens: list[Token]) -> list[list[Token]]:
    if not tokens:
        return []
    args: list[list[Token]] = [[]]
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.PUNCT:
            s = tok.spelling
            if s in ("(", "[", "{"):
                depth += 1
            elif s in (")", "]", "}"):
                depth -= 1
            elif s == "," and depth == 0:
                args.append([])
                continue
        args[-1].append(tok)
    return args


def _parse_qubit_ref(tokens: list[Token], require_index: bool) -> QubitRef:
    if len(tokens) == 1 and tokens[0].kind is TokenKind.IDENTIFIER:
        if require_index:
            raise SynstitchError(
                "expected an indexed qubit reference like q[0]",
                tokens[0].span)
        return QubitRef(tokens[0].spelling, None, tokens[0].span)
    if (len(tokens) >= 4 and tokens[0].kind is TokenKind.IDENTIFIER
            and tokens[1].is_punct("[") and tokens[-1].is_punct("]")):
        return QubitRef(tokens[0].spelling, tokens[2:-1], tokens[0].span)
    span = tokens[0].span if tokens else None
    raise SynstitchError("malformed qubit reference", span)


def _parse_gate(group: list[Token]) -> GateStmt:
    gate = group[0].spelling
    args = _split_args(_call_args(group, 1))
    span = group[0].span
    if gate in ROTATION_GATES:
        if len(args) != 2:
            raise SynstitchError(
                f"rotation gate '{gate}' expects a qubit and an angle",
                span)
        qubit = _parse_qubit_ref(args[0], require_index=True)
        return GateStmt(gate, [qubit], angle_tokens=args[1], span=span)
    if gate == "CX":
        if len(args) != 2:
            raise SynstitchError("gate 'CX' expects 2 qubit operands", span)
        qubits = [_parse_qubit_ref(a, require_index=True) for a in args]
        return GateStmt(gate, qubits, span=span)
    if len(args) != 1:
        raise SynstitchError(f"gate '{gate}' expects 1 qubit operand", span)
    return GateStmt(gate, [_parse_qubit_ref(args[0], require_index=True)],
                    span=span)


def _parse_modified_call(group: list[Token]) -> KernelCallStmt:
    callee = group[0].spelling
    if len(group) < 3 or group[2].kind is not TokenKind.IDENTIFIER \
            or group[2].spelling not in ("ctrl", "adjoint"):
        raise SynstitchError(
            f"unknown kernel modifier in '{render(group[:3]).strip()}'",
            group[0].span)
    modifier = group[2].spelling
    inside = _call_args(group, 3)
    if modifier == "ctrl":
        args = _split_args(inside)
        if not args:
            raise SynstitchError(
                f"'{callee}::ctrl' requires a control qubit argument",
                group[0].span)
        ctrl = _parse_qubit_ref(args[0], require_index=True)
        rest_start = len(args[0]) + 1  # skip the separating comma
        rest = inside[rest_start:] if len(args) > 1 else []
        return KernelCallStmt(callee, "ctrl", ctrl, rest, span=group[0].span)
    return KernelCallStmt(callee, "adjoint", None, inside, span=group[0].span)


def _parse_plain_call(group: list[Token]) -> KernelCallStmt:
    return KernelCallStmt(group[0].spelling, "plain", None,
                          _call_args(group, 1), span=group[0].span)


# ---------------------------------------------------------------------------
# Code generation


def gen_kernel_class(declarator: Declarator,
                     stmts: list[GateStmt | KernelCallStmt], suffix: int,
                     api: str = DEFAULT_API,
                     backend: str = DEFAULT_BACKEND) -> Replacement:
    name = declarator.name
    if render(declarator.return_tokens).strip() != "void":
        raise SynstitchError("quantum kernels must return void",
                             declarator.header_span)
    params = declarator.params
    if any(not p.name for p in params):
        raise SynstitchError("quantum kernel parameters must be named",
                             declarator.header_span)
    qreg_params = [p.name for p in params
                   if any(t.is_ident("qreg") for t in p.type_tokens)]
    _check_qubit_refs(stmts, qreg_params)

    param_types = [render(p.type_tokens).strip() for p in params]
    param_sigs = ", ".join(render(p.decl_tokens).strip() for p in params)
    names = ", ".join(p.name for p in params)
    internal = f"internal_{name}_call"
    base = ", ".join([f"class {name}"] + param_types)
    base = f"QuantumKernel<{base}>"
    lead = ", " if params else ""

    out: list[str] = []
    out.append(get_decl_text(declarator) + " {")
    out.append(f"  void {internal}({', '.join(param_types)});")
    out.append(f"  {internal}({names});")
    out.append("}")
    out.append(f"class {name} : public {base} {{")
    out.append("public:")
    out.append(f"  {name}({param_sigs}) : {base}({names}) {{}}")
    out.append(f"  {name}(std::shared_ptr<{api}::CompositeInstruction> "
               f"__qk_parent{lead}{param_sigs})")
    out.append(f"      : {base}(__qk_parent{lead}{names}) {{}}")
    out.append(f"  virtual ~{name}() {{")
    if params:
        out.append(f"    auto [{names}] = args_tuple;")
    out.extend(_gen_instructions(stmts, api))
    if qreg_params:
        out.append("    if (!is_nested()) {")
        out.append(f'      auto qpu = {api}::getAccelerator("{backend}");')
        out.append(f"      qpu->execute({qreg_params[0]}, _parent_kernel);")
        out.append("    }")
    out.append("  }")
    out.append("};")
    out.append(f"void {internal}({param_sigs}) {{")
    out.append(f"  class {name} temporary_instance({names});")
    out.append("}")
    return Replacement("\n".join(out) + "\n")


def _check_qubit_refs(stmts: list[GateStmt | KernelCallStmt],
                      qreg_params: list[str]) -> None:
    for stmt in stmts:
        refs: list[QubitRef] = []
        if isinstance(stmt, GateStmt):
            refs = stmt.qubits
        elif stmt.ctrl_qubit is not None:
            refs = [stmt.ctrl_qubit]
        for ref in refs:
            if ref.reg not in qreg_params:
                raise SynstitchError(
                    f"reference to undeclared qreg parameter '{ref.reg}'",
                    ref.span)


def _gen_instructions(stmts: list[GateStmt | KernelCallStmt],
                      api: str) -> list[str]:
    lines: list[str] = []
    pending: list[str] = []
    counter = 0
    provider_emitted = False

    def flush() -> None:
        if pending:
            lines.append("    _parent_kernel->addInstructions("
                         f"{{{', '.join(pending)}}});")
            pending.clear()

    for k, stmt in enumerate(stmts):
        if isinstance(stmt, GateStmt):
            if not provider_emitted:
                lines.append(f"    auto provider = {api}::getIRProvider();")
                provider_emitted = True
            var = f"i{counter}"
            counter += 1
            operands = ", ".join(q.index_text for q in stmt.qubits)
            if stmt.angle_tokens:
                angle = render(stmt.angle_tokens).strip()
                lines.append(f'    auto {var} = provider->createInstruction('
                             f'"{stmt.gate}", {{{operands}}}, {{{angle}}});')
            else:
                lines.append(f'    auto {var} = provider->createInstruction('
                             f'"{stmt.gate}", {{{operands}}});')
            pending.append(var)
            continue
        flush()
        args = render(stmt.arg_tokens).strip()
        lead = ", " if args else ""
        if stmt.modifier == "plain":
            lines.append(f"    {{ class {stmt.callee} __qk_nested_{k}("
                         f"_parent_kernel{lead}{args}); }}")
        elif stmt.modifier == "adjoint":
            lines.append(f"    {stmt.callee}::adjoint(_parent_kernel"
                         f"{lead}{args});")
        else:
            assert stmt.ctrl_qubit is not None
            lines.append(f"    {stmt.callee}::ctrl(_parent_kernel, "
                         f"{stmt.ctrl_qubit.index_text}{lead}{args});")
    flush()
    return lines


def make_quantum_handler(api: str = DEFAULT_API,
                         backend: str = DEFAULT_BACKEND,
                         shots: int = DEFAULT_SHOTS) -> HandlerSpec:
    def get_replacement(declarator: Declarator, body: list[Token],
                        ctx: HandlerContext) -> Replacement:
        stmts = [parse_statement(g) for g in split_statements(body)]
        return gen_kernel_class(declarator, stmts, ctx.unique_suffix(),
                                api=api, backend=backend)

    def add_to_predefines() -> str:
        if api == DEFAULT_API:
            return ('#include "qrt.h"\n'
                    "static const bool __qrt_config_applied = "
                    f'qrt::configure("{backend}", {shots});\n')
        return f'#include "{api}.hpp"\n'

    return HandlerSpec(
        name="quantum",
        get_replacement=get_replacement,
        add_to_predefines=add_to_predefines,
        aliases=("__qpu__",),
        help="quantum kernels compiled to QuantumKernel subclasses",
    )
