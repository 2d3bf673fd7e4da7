"""Tensor index-notation handler.

Parses statements like `y(i) = A(i,j) * x(j)` from the body of a tagged
function, reads per-tensor formats from the default string of the final
parameter (`-f=A:ds:0,1 -f=x:d -f=y:d`), and generates assemble/compute
kernels plus a wrapper that converts user structs to `taco_tensor_t` and
back.  Two kernel strategies are supported: all-dense loop nests for any
expression shape, and the CSR matrix-vector product.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cpptok import SourceSpan, Token, TokenKind, render
from .diagnostics import SynstitchError
from .handlers import HandlerContext, HandlerSpec, Replacement, get_decl_text
from .scanner import Declarator, Param

ALL_DENSE = "all-dense"
CSR_SPMV = "csr-spmv"

_STRUCT_NOISE = {"struct", "class", "union", "enum", "const", "volatile"}


@dataclass(frozen=True)
class TensorRef:
    name: str
    indices: tuple[str, ...]
    span: SourceSpan

    @property
    def order(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Literal:
    spelling: str
    span: SourceSpan


@dataclass
class IndexExpr:
    target: TensorRef
    op: str  # "=" or "+="
    terms: list[TensorRef | Literal]

    @property
    def tensor_refs(self) -> list[TensorRef]:
        return [t for t in self.terms if isinstance(t, TensorRef)]

    @property
    def reduction_indices(self) -> list[str]:
        seen: list[str] = []
        for ref in self.tensor_refs:
            for idx in ref.indices:
                if idx not in self.target.indices and idx not in seen:
                    seen.append(idx)
        return seen


@dataclass(frozen=True)
class FormatSpec:
    tensor: str
    mode_formats: tuple[str, ...]
    layout: tuple[int, ...]

    @property
    def is_dense(self) -> bool:
        return all(m == "d" for m in self.mode_formats)


@dataclass
class KernelPlan:
    expr: IndexExpr
    formats: dict[str, FormatSpec]
    suffix: int
    strategy: str
    parallel: bool = False

    @property
    def tensor_order(self) -> list[str]:
        """Kernel parameter order: target first, operands by appearance."""
        names = [self.expr.target.name]
        for ref in self.expr.tensor_refs:
            if ref.name not in names:
                names.append(ref.name)
        return names


# ---------------------------------------------------------------------------
# Parsing


class _Cursor:
    def __init__(self, tokens: list[Token], fallback: SourceSpan):
        self.tokens = tokens
        self.pos = 0
        self.fallback = fallback

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise SynstitchError("unexpected end of index notation",
                                 self.here())
        self.pos += 1
        return tok

    def here(self) -> SourceSpan:
        tok = self.peek()
        if tok is not None:
            return tok.span
        if self.tokens:
            return self.tokens[-1].span
        return self.fallback


def parse_index_notation(tokens: list[Token],
                         fallback: SourceSpan) -> IndexExpr:
    """Parse `ref (=|+=) term (* term)*` with an optional trailing `;`."""
    cur = _Cursor(tokens, fallback)
    if cur.peek() is None:
        raise SynstitchError("expected a tensor index-notation statement in "
                             "the function body", fallback)
    target = _parse_ref(cur)
    op_tok = cur.next()
    if not (op_tok.is_punct("=") or op_tok.is_punct("+=")):
        raise SynstitchError("expected '=' or '+=' in index notation",
                             op_tok.span)
    terms: list[TensorRef | Literal] = [_parse_term(cur)]
    while True:
        tok = cur.peek()
        if tok is None:
            break
        if tok.is_punct("*"):
            cur.next()
            terms.append(_parse_term(cur))
            continue
        if tok.is_punct(";"):
            cur.next()
            if cur.peek() is not None:
                raise SynstitchError(
                    "unsupported notation: expected a single index-notation "
                    "statement", cur.here())
            break
        raise SynstitchError(
            f"unsupported notation: '{tok.spelling}' (terms may only be "
            "combined with '*')", tok.span)
    expr = IndexExpr(target, op_tok.spelling, terms)
    refs = expr.tensor_refs
    for idx in target.indices:
        if not any(idx in ref.indices for ref in refs):
            raise SynstitchError(
                f"free index '{idx}' does not appear in any right-hand-side "
                "term", target.span)
    return expr


def _parse_term(cur: _Cursor) -> TensorRef | Literal:
    tok = cur.peek()
    if tok is not None and tok.kind is TokenKind.NUMBER:
        cur.next()
        return Literal(tok.spelling, tok.span)
    return _parse_ref(cur)


def _parse_ref(cur: _Cursor) -> TensorRef:
    name_tok = cur.next()
    if name_tok.kind is not TokenKind.IDENTIFIER:
        raise SynstitchError(
            f"expected a tensor name, found '{name_tok.spelling}'",
            name_tok.span)
    open_tok = cur.next()
    if not open_tok.is_punct("("):
        raise SynstitchError("expected '(' after tensor name", open_tok.span)
    indices: list[str] = []
    tok = cur.peek()
    if tok is not None and tok.is_punct(")"):
        cur.next()
        return TensorRef(name_tok.spelling, (), name_tok.span)
    while True:
        idx_tok = cur.next()
        if idx_tok.kind is not TokenKind.IDENTIFIER:
            raise SynstitchError(
                f"expected an index variable, found '{idx_tok.spelling}'",
                idx_tok.span)
        indices.append(idx_tok.spelling)
        sep = cur.next()
        if sep.is_punct(")"):
            break
        if not sep.is_punct(","):
            raise SynstitchError(
                f"expected ',' or ')' in tensor reference, found "
                f"'{sep.spelling}'", sep.span)
    return TensorRef(name_tok.spelling, tuple(indices), name_tok.span)


_FORMAT_ENTRY = re.compile(r"^-f=([A-Za-z_]\w*):([ds]*)(?::(\d+(?:,\d+)*))?$")


def parse_format_string(text: str, span: SourceSpan) -> dict[str, FormatSpec]:
    """Parse whitespace-separated `-f=<name>:<modes>[:<layout>]` entries."""
    formats: dict[str, FormatSpec] = {}
    for entry in text.split():
        m = _FORMAT_ENTRY.match(entry)
        if m is None:
            raise SynstitchError(f"malformed format entry '{entry}'", span)
        name, modes, layout_text = m.group(1), m.group(2), m.group(3)
        if name in formats:
            raise SynstitchError(
                f"duplicate format entry for tensor '{name}'", span)
        if layout_text is None:
            layout = tuple(range(len(modes)))
        else:
            layout = tuple(int(v) for v in layout_text.split(","))
        if sorted(layout) != list(range(len(modes))):
            raise SynstitchError(
                f"layout {layout_text or ''} of tensor '{name}' is not a "
                f"permutation of its {len(modes)} modes", span)
        formats[name] = FormatSpec(name, tuple(modes), layout)
    return formats


# ---------------------------------------------------------------------------
# Validation


def validate(expr: IndexExpr, formats: dict[str, FormatSpec],
             declarator: Declarator) -> str:
    """Cross-check notation, formats, and parameters; pick the strategy."""
    params = {p.name for p in declarator.params}
    refs = [expr.target] + expr.tensor_refs
    index_vars = {idx for ref in refs for idx in ref.indices}
    seen: set[str] = set()
    for ref in refs:
        if ref.name in index_vars:
            raise SynstitchError(
                f"tensor name '{ref.name}' collides with an index variable",
                ref.span)
        if ref.name not in params:
            raise SynstitchError(
                f"no parameter named '{ref.name}' for the tensor used in the "
                "index notation", ref.span)
        spec = formats.get(ref.name)
        if spec is None:
            raise SynstitchError(
                f"no format entry for tensor '{ref.name}' in the format "
                "string", ref.span)
        if len(spec.mode_formats) != ref.order:
            raise SynstitchError(
                f"format '{''.join(spec.mode_formats)}' of tensor "
                f"'{ref.name}' has {len(spec.mode_formats)} modes but the "
                f"notation uses {ref.order}", ref.span)
        if ref.name not in seen:
            seen.add(ref.name)
            if spec.layout != tuple(range(ref.order)):
                raise SynstitchError(
                    f"unsupported layout for tensor '{ref.name}': only the "
                    "identity layout is supported", ref.span)
    used = {ref.name for ref in refs}
    if all(formats[name].is_dense for name in used):
        return ALL_DENSE
    if _is_csr_spmv(expr, formats):
        return CSR_SPMV
    raise SynstitchError(
        "unsupported format combination: only all-dense tensors or a CSR "
        "matrix-vector product (A:ds with dense vectors) are supported",
        expr.target.span)


def _is_csr_spmv(expr: IndexExpr, formats: dict[str, FormatSpec]) -> bool:
    if expr.target.order != 1 or len(expr.terms) != 2:
        return False
    refs = expr.tensor_refs
    if len(refs) != 2:
        return False
    mats = [r for r in refs if r.order == 2]
    vecs = [r for r in refs if r.order == 1]
    if len(mats) != 1 or len(vecs) != 1:
        return False
    mat, vec = mats[0], vecs[0]
    i = expr.target.indices[0]
    j = vec.indices[0]
    if i == j or mat.indices != (i, j):
        return False
    return (formats[mat.name].mode_formats == ("d", "s")
            and formats[vec.name].is_dense
            and formats[expr.target.name].is_dense)


# ---------------------------------------------------------------------------
# Code generation


def gen_kernels(plan: KernelPlan) -> str:
    names = plan.tensor_order
    sig = ", ".join(f"taco_tensor_t *{n}" for n in names)
    anon = ", ".join("taco_tensor_t *" for _ in names)
    out = [
        f"int __taco_comput_{plan.suffix}({anon});",
        f"int __taco_assm_{plan.suffix}({anon});",
        "",
    ]
    out.extend(_gen_assemble(plan, sig))
    out.append("")
    if plan.strategy == CSR_SPMV:
        out.extend(_gen_csr_compute(plan, sig))
    else:
        out.extend(_gen_dense_compute(plan, sig))
    return "\n".join(out) + "\n"


def _gen_assemble(plan: KernelPlan, sig: str) -> list[str]:
    target = plan.expr.target
    t = target.name
    lines = [f"int __taco_assm_{plan.suffix}({sig}) {{"]
    for mode in range(1, target.order + 1):
        lines.append(f"  int {t}{mode}_dimension = "
                     f"(int)({t}->dimensions[{mode - 1}]);")
    count = " * ".join(f"{t}{m}_dimension" for m in range(1, target.order + 1)) \
        or "1"
    lines += [
        f"  double* {t}_vals = (double*)({t}->vals);",
        f"  if (!{t}_vals) {{",
        f"    {t}_vals = (double*)calloc({count}, sizeof(double));",
        f"    {t}->vals = (uint8_t*){t}_vals;",
        "  }",
        "  return 0;",
        "}",
    ]
    return lines


def _gen_csr_compute(plan: KernelPlan, sig: str) -> list[str]:
    expr = plan.expr
    y = expr.target.name
    mat = next(r for r in expr.tensor_refs if r.order == 2)
    vec = next(r for r in expr.tensor_refs if r.order == 1)
    a, x = mat.name, vec.name
    i = expr.target.indices[0]
    j = vec.indices[0]
    ja = f"{j}{a}"
    acc = f"t{j}{y}_val"
    init = f"{y}_vals[{i}]" if expr.op == "+=" else "0.0"
    lines = [f"int __taco_comput_{plan.suffix}({sig}) {{",
             f"  int {a}1_dimension = (int)({a}->dimensions[0]);",
             f"  int32_t* {a}2_pos = (int32_t*)({a}->indices[1][0]);",
             f"  int32_t* {a}2_crd = (int32_t*)({a}->indices[1][1]);",
             f"  double* {a}_vals = (double*)({a}->vals);",
             f"  double* {x}_vals = (double*)({x}->vals);",
             f"  double* {y}_vals = (double*)({y}->vals);"]
    if plan.parallel:
        lines.append("  #pragma omp parallel for schedule(runtime)")
    lines += [
        f"  for (int32_t {i} = 0; {i} < {a}1_dimension; {i}++) {{",
        f"    double {acc} = {init};",
        f"    for (int32_t {ja} = {a}2_pos[{i}]; {ja} < {a}2_pos[({i} + 1)]; "
        f"{ja}++) {{",
        f"      int32_t {j} = {a}2_crd[{ja}];",
        f"      {acc} += {a}_vals[{ja}] * {x}_vals[{j}];",
        "    }",
        f"    {y}_vals[{i}] = {acc};",
        "  }",
        "  return 0;",
        "}",
    ]
    return lines


def _gen_dense_compute(plan: KernelPlan, sig: str) -> list[str]:
    expr = plan.expr
    target = expr.target
    y = target.name
    free = list(target.indices)
    reduction = expr.reduction_indices
    refs = [target] + expr.tensor_refs

    used_dims: set[tuple[str, int]] = set()

    def dim_var(name: str, mode: int) -> str:
        used_dims.add((name, mode))
        return f"{name}{mode}_dimension"

    def linear(ref: TensorRef) -> str:
        if ref.order == 0:
            return "0"
        lin = ref.indices[0]
        for mode, idx in enumerate(ref.indices[1:], start=2):
            mul = lin if mode == 2 else f"({lin})"
            lin = f"({mul} * {dim_var(ref.name, mode)}) + {idx}"
        return lin

    for idx in free + reduction:
        name, mode = _extent_source(idx, refs)
        used_dims.add((name, mode))

    target_elem = f"{y}_vals[{linear(target)}]"
    factors = []
    for term in expr.terms:
        if isinstance(term, TensorRef):
            factors.append(f"{term.name}_vals[{linear(term)}]")
        else:
            factors.append(term.spelling)
    product = " * ".join(factors)

    acc = f"t{reduction[0] if reduction else ''}{y}_val"
    init = target_elem if expr.op == "+=" else "0.0"

    body: list[str] = []
    indent = "  "
    for idx in free:
        name, mode = _extent_source(idx, refs)
        body.append(f"{indent}for (int32_t {idx} = 0; {idx} < "
                    f"{name}{mode}_dimension; {idx}++) {{")
        indent += "  "
    body.append(f"{indent}double {acc} = {init};")
    for idx in reduction:
        name, mode = _extent_source(idx, refs)
        body.append(f"{indent}for (int32_t {idx} = 0; {idx} < "
                    f"{name}{mode}_dimension; {idx}++) {{")
        indent += "  "
    body.append(f"{indent}{acc} += {product};")
    for _ in reduction:
        indent = indent[:-2]
        body.append(f"{indent}}}")
    body.append(f"{indent}{target_elem} = {acc};")
    for _ in free:
        indent = indent[:-2]
        body.append(f"{indent}}}")

    lines = [f"int __taco_comput_{plan.suffix}({sig}) {{"]
    for name, mode in sorted(used_dims):
        lines.append(f"  int {name}{mode}_dimension = "
                     f"(int)({name}->dimensions[{mode - 1}]);")
    seen_vals: list[str] = []
    for ref in refs:
        if ref.name not in seen_vals:
            seen_vals.append(ref.name)
            lines.append(f"  double* {ref.name}_vals = "
                         f"(double*)({ref.name}->vals);")
    if plan.parallel and free:
        lines.append("  #pragma omp parallel for schedule(runtime)")
    lines.extend(body)
    lines += ["  return 0;", "}"]
    return lines


def _extent_source(idx: str, refs: list[TensorRef]) -> tuple[str, int]:
    for ref in refs:
        for mode, name in enumerate(ref.indices, start=1):
            if name == idx:
                return ref.name, mode
    raise AssertionError(f"index {idx} has no extent source")


def struct_type_name(param: Param) -> str:
    """Struct name used for `S2taco`/`taco2S` conversion members."""
    names = [t.spelling for t in param.type_tokens
             if t.kind is TokenKind.IDENTIFIER
             and t.spelling not in _STRUCT_NOISE]
    return names[-1] if names else ""


def gen_wrapper(declarator: Declarator, plan: KernelPlan,
                format_param: Param) -> Replacement:
    tensor_names = plan.tensor_order
    arg_expr: dict[str, str] = {}
    converted: list[tuple[str, str]] = []  # (param name, struct type)
    lines: list[str] = []
    for p in declarator.params:
        if p is format_param or p.name not in tensor_names:
            continue
        stype = struct_type_name(p)
        if stype == "taco_tensor_t":
            arg_expr[p.name] = p.name
            continue
        temp = f"__taco_{p.name}"
        arg_expr[p.name] = temp
        converted.append((p.name, stype))
        lines.append(f"  taco_tensor_t * {temp} = "
                     f"{p.name}->{stype}2taco({p.name});")
    args = ", ".join(arg_expr[name] for name in tensor_names)
    lines.append(f"  __taco_assm_{plan.suffix}({args});")
    lines.append(f"  __taco_comput_{plan.suffix}({args});")
    target = plan.expr.target.name
    for name, stype in converted:
        if name == target:
            lines.append(f"  {name}->taco2{stype}(__taco_{name}, {name});")
    for name, _ in converted:
        lines.append(f"  __taco_cleanup_taco(__taco_{name});")
    wrapper = get_decl_text(declarator) + " {\n" + "\n".join(lines) + "\n}\n"
    return Replacement(gen_kernels(plan) + "\n" + wrapper)


# ---------------------------------------------------------------------------
# Handler assembly


def _format_param(declarator: Declarator) -> tuple[Param, str, SourceSpan]:
    params = declarator.params
    if params:
        last = params[-1]
        if len(last.default_tokens) == 1 \
                and last.default_tokens[0].kind is TokenKind.STRING:
            tok = last.default_tokens[0]
            text = tok.spelling[tok.spelling.index('"') + 1:-1]
            return last, text, tok.span
    raise SynstitchError(
        "the final parameter must be a string with a default value giving "
        "the tensor formats (e.g. \"-f=A:ds:0,1 -f=x:d -f=y:d\")",
        declarator.header_span)


def make_taco_handler() -> HandlerSpec:
    def get_replacement(declarator: Declarator, body: list[Token],
                        ctx: HandlerContext) -> Replacement:
        expr = parse_index_notation(body, declarator.header_span)
        format_param, format_text, format_span = _format_param(declarator)
        formats = parse_format_string(format_text, format_span)
        strategy = validate(expr, formats, declarator)
        plan = KernelPlan(
            expr=expr,
            formats=formats,
            suffix=ctx.unique_suffix(),
            strategy=strategy,
            parallel=ctx.handler_args.get("taco.parallel", "") in
            ("1", "true", "yes"),
        )
        return gen_wrapper(declarator, plan, format_param)

    def add_to_predefines() -> str:
        return ('#include "taco_runtime.h"\n'
                "void __taco_cleanup_taco(taco_tensor_t*);\n")

    return HandlerSpec(
        name="taco",
        get_replacement=get_replacement,
        add_to_predefines=add_to_predefines,
        help="tensor index notation compiled to dense or CSR SpMV kernels",
    )
