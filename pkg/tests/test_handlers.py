"""Registry, declaration regeneration, compat stubs, handler invocation."""

import sys

import pytest

from conftest import scan_single
from synstitch.cpptok import tokenize
from synstitch.handlers import (
    HandlerContext,
    HandlerRegistry,
    HandlerSpec,
    RegistryError,
    Replacement,
    get_decl_text,
    invoke,
    make_compat_stub,
    make_subprocess_handler,
    register_handler,
)
from synstitch.macros import MacroTable
from synstitch.quantum import make_quantum_handler
from synstitch.scanner import parse_declarator
from synstitch.taco import make_taco_handler


def echo_handler(name="echo"):
    def get_replacement(declarator, body, ctx):
        return Replacement(get_decl_text(declarator) + " {}\n")
    return HandlerSpec(name=name, get_replacement=get_replacement,
                       add_to_predefines=lambda: "", help="echoes the header")


def parse_header(header):
    toks = tokenize(header)
    return parse_declarator(toks, "test", toks[0].span)


class TestRegistry:
    def test_register_and_lookup(self):
        reg = HandlerRegistry()
        register_handler(reg, make_taco_handler())
        assert reg.lookup("taco") is not None
        assert reg.lookup("taco").name == "taco"

    def test_alias_lookup(self):
        reg = HandlerRegistry()
        reg.register(make_quantum_handler())
        assert reg.lookup("__qpu__").name == "quantum"
        assert reg.alias_map() == {"__qpu__": "quantum"}

    def test_missing_name(self):
        reg = HandlerRegistry()
        assert reg.lookup("nonexistent") is None

    def test_duplicate_name_rejected(self):
        reg = HandlerRegistry()
        reg.register(echo_handler())
        with pytest.raises(RegistryError):
            reg.register(echo_handler())

    def test_duplicate_alias_rejected(self):
        reg = HandlerRegistry()
        reg.register(HandlerSpec("a", lambda d, b, c: Replacement(""),
                                 lambda: "", aliases=("dup",)))
        with pytest.raises(RegistryError):
            reg.register(HandlerSpec("b", lambda d, b, c: Replacement(""),
                                     lambda: "", aliases=("dup",)))


class TestGetDeclText:
    def test_ansatz(self):
        d = parse_header("void ansatz(qreg q, double x)")
        assert get_decl_text(d) == "void ansatz(qreg q, double x)"

    def test_default_argument_preserved(self):
        d = parse_header('void matrix_vector_mul(vector *y, csr *A, '
                         'vector *x, std::string format='
                         '"  -f=A:ds:0,1 -f=x:d -f=y:d")')
        text = get_decl_text(d)
        assert 'std::string format = "  -f=A:ds:0,1 -f=x:d -f=y:d"' in text

    def test_zero_params(self):
        d = parse_header("int f()")
        assert get_decl_text(d) == "int f()"

    def test_round_trip_through_scanner(self):
        original = parse_header('void g(vector *y, std::string s = "x", '
                                "unsigned int)")
        text = get_decl_text(original)
        again = scan_single(f"[[clang::syntax(test)]] {text} {{ }}").declarator
        assert again.name == original.name
        assert len(again.params) == len(original.params)
        assert [p.name for p in again.params] == \
            [p.name for p in original.params]


class TestCompatStub:
    def test_ansatz_stub(self):
        d = parse_header("void ansatz(qreg q, double x)")
        assert make_compat_stub(d, 1) == \
            "void __synstitch_1_ansatz(qreg q, double x) " \
            "{ __builtin_unreachable(); }"

    def test_zero_param_stub(self):
        d = parse_header("int f()")
        assert make_compat_stub(d, 2) == \
            "int __synstitch_2_f() { __builtin_unreachable(); }"

    def test_distinct_suffixes_give_distinct_names(self):
        d = parse_header("void k()")
        assert make_compat_stub(d, 1) != make_compat_stub(d, 2)


class TestContext:
    def test_unique_suffix_starts_at_one_and_increases(self):
        ctx = HandlerContext(macro_table=MacroTable())
        values = [ctx.unique_suffix() for _ in range(10)]
        assert values == list(range(1, 11))

    def test_fresh_context_resets(self):
        ctx1 = HandlerContext(macro_table=MacroTable())
        ctx1.unique_suffix()
        ctx2 = HandlerContext(macro_table=MacroTable())
        assert ctx2.unique_suffix() == 1


class TestInvoke:
    def test_echo_handler_output_retokenizes(self):
        fn = scan_single("[[clang::syntax(echo)]] void f(int a) { a + 1; }")
        ctx = HandlerContext(macro_table=MacroTable())
        replacement = invoke(echo_handler(), fn, ctx)
        assert replacement.diagnostics == []
        tokenize(replacement.body_text)

    def test_body_macros_expanded_before_handler(self):
        seen = {}

        def get_replacement(declarator, body, ctx):
            seen["body"] = [t.spelling for t in body]
            return Replacement(get_decl_text(declarator) + " {}\n")

        spec = HandlerSpec("probe", get_replacement, lambda: "")
        fn = scan_single("[[clang::syntax(probe)]] void f() { X(q[N]); }")
        table = MacroTable()
        table.define_text("N", "3")
        invoke(spec, fn, HandlerContext(macro_table=table))
        assert seen["body"] == ["X", "(", "q", "[", "3", "]", ")", ";"]

    def test_replacement_must_define_original_function(self):
        bad = HandlerSpec("bad", lambda d, b, c: Replacement("int other() {}\n"),
                          lambda: "")
        fn = scan_single("[[clang::syntax(bad)]] void f() { }")
        replacement = invoke(bad, fn, HandlerContext(macro_table=MacroTable()))
        assert any(d.severity == "error" for d in replacement.diagnostics)

    def test_lexically_invalid_replacement_is_diagnosed(self):
        bad = HandlerSpec("bad", lambda d, b, c: Replacement('void f() { "x }\n'),
                          lambda: "")
        fn = scan_single("[[clang::syntax(bad)]] void f() { }")
        replacement = invoke(bad, fn, HandlerContext(macro_table=MacroTable()))
        assert any("lexically invalid" in d.message
                   for d in replacement.diagnostics)


class TestSubprocessHandler:
    def test_round_trip_through_external_program(self):
        program = ("import json, sys; "
                   "payload = json.load(sys.stdin); "
                   "print(payload['declarator']['text'] + ' { /* ' + "
                   "' '.join(payload['body_tokens']) + ' */ }')")
        spec = make_subprocess_handler("ext", [sys.executable, "-c", program])
        fn = scan_single("[[clang::syntax(ext)]] void f(int a) { a * 2; }")
        replacement = invoke(spec, fn, HandlerContext(macro_table=MacroTable()))
        assert replacement.diagnostics == []
        assert "void f(int a)" in replacement.body_text
        assert "a * 2" in replacement.body_text

    def test_nonzero_exit_is_a_handler_error(self):
        spec = make_subprocess_handler(
            "ext", [sys.executable, "-c", "import sys; sys.exit(3)"])
        fn = scan_single("[[clang::syntax(ext)]] void f() { }")
        replacement = invoke(spec, fn, HandlerContext(macro_table=MacroTable()))
        assert any(d.severity == "error" for d in replacement.diagnostics)
