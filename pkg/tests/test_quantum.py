"""Quantum statement parsing and kernel-class generation."""

import random
import re

import pytest

from conftest import KERNELS_EXAMPLE_SOURCE, default_registry
from synstitch.cpptok import tokenize
from synstitch.diagnostics import SynstitchError
from synstitch.quantum import (
    GateStmt,
    KernelCallStmt,
    gen_kernel_class,
    parse_statement,
    split_statements,
)
from synstitch.rewrite import RewriteOptions, rewrite_unit
from synstitch.scanner import parse_declarator

ANSATZ_BODY = "X(q[0]);\n  Ry(q[1], x);\n  CX(q[1], q[0]);"


def groups(body):
    return split_statements(tokenize(body))


def stmt(text):
    [group] = groups(text if text.rstrip().endswith(";") else text + ";")
    return parse_statement(group)


def kernel_header(decl="void k(qreg q, double x)"):
    toks = tokenize(decl)
    return parse_declarator(toks, "quantum", toks[0].span)


class TestSplitStatements:
    def test_ansatz_body_gives_three_groups(self):
        assert len(groups(ANSATZ_BODY)) == 3

    def test_double_semicolon_gives_one_group(self):
        assert len(groups("X(q[0]);;")) == 1

    def test_missing_semicolon_is_an_error(self):
        with pytest.raises(SynstitchError) as exc:
            groups("H(q[0])")
        assert "expected ';'" in exc.value.diagnostic.message

    def test_semicolons_inside_nesting_do_not_split(self):
        got = groups("foo(a; b);")  # balanced per scanner, odd but tolerated
        assert len(got) == 1

    def test_empty_body(self):
        assert groups("") == []


class TestParseStatement:
    def test_rotation_gate(self):
        s = stmt("Ry(q[1], x)")
        assert isinstance(s, GateStmt)
        assert s.gate == "Ry"
        assert s.qubits[0].reg == "q"
        assert s.qubits[0].index_text == "1"
        assert [t.spelling for t in s.angle_tokens] == ["x"]

    def test_simple_gates(self):
        for gate in ("X", "Y", "Z", "H", "S", "T", "Measure"):
            s = stmt(f"{gate}(q[0])")
            assert isinstance(s, GateStmt) and s.gate == gate

    def test_cx_two_qubits(self):
        s = stmt("CX(q[1], q[0])")
        assert [q.index_text for q in s.qubits] == ["1", "0"]

    def test_ctrl_modified_call(self):
        s = stmt("x_gate::ctrl(q[0], q)")
        assert isinstance(s, KernelCallStmt)
        assert (s.callee, s.modifier) == ("x_gate", "ctrl")
        assert s.ctrl_qubit.index_text == "0"
        assert [t.spelling for t in s.arg_tokens] == ["q"]

    def test_adjoint_modified_call(self):
        s = stmt("ansatz::adjoint(q, x)")
        assert (s.callee, s.modifier) == ("ansatz", "adjoint")
        assert [t.spelling for t in s.arg_tokens] == ["q", ",", "x"]

    def test_plain_kernel_call(self):
        s = stmt("ansatz(q, x)")
        assert (s.callee, s.modifier) == ("ansatz", "plain")

    def test_cx_arity_error(self):
        with pytest.raises(SynstitchError) as exc:
            stmt("CX(q[1])")
        assert "expects 2 qubit operands" in exc.value.diagnostic.message

    def test_rotation_arity_error(self):
        with pytest.raises(SynstitchError):
            stmt("Rx(q[0])")

    def test_simple_gate_arity_error(self):
        with pytest.raises(SynstitchError):
            stmt("X(q[0], q[1])")

    def test_whole_register_gate_operand_rejected(self):
        with pytest.raises(SynstitchError) as exc:
            stmt("H(q)")
        assert "indexed qubit reference" in exc.value.diagnostic.message

    def test_unknown_modifier_rejected(self):
        with pytest.raises(SynstitchError):
            stmt("ansatz::reverse(q)")

    def test_non_literal_index_is_passed_through(self):
        s = stmt("X(q[n + 1])")
        assert s.qubits[0].index_text == "n + 1"


class TestGenKernelClass:
    def gen(self, body, decl="void k(qreg q, double x)", **kwargs):
        stmts = [parse_statement(g) for g in groups(body)]
        return gen_kernel_class(kernel_header(decl), stmts, 1, **kwargs).body_text

    def test_three_sections_in_order(self):
        text = self.gen(ANSATZ_BODY, "void ansatz(qreg q, double x)")
        fwd = text.index("void internal_ansatz_call(qreg, double);")
        cls = text.index("class ansatz : public QuantumKernel<")
        impl = text.index("void internal_ansatz_call(qreg q, double x) {")
        assert fwd < cls < impl
        assert "class ansatz temporary_instance(q, x);" in text

    def test_instruction_creation_sequence(self):
        text = self.gen(ANSATZ_BODY, "void ansatz(qreg q, double x)")
        creations = re.findall(r'createInstruction\("(\w+)", \{([^}]*)\}'
                               r'(?:, \{([^}]*)\})?\);', text)
        assert creations == [("X", "0", ""), ("Ry", "1", "x"),
                             ("CX", "1, 0", "")]
        assert "_parent_kernel->addInstructions({i0, i1, i2});" in text

    def test_statement_count_preserved(self):
        rng = random.Random(13)
        singles = ["X", "Y", "Z", "H", "S", "T"]
        for _ in range(50):
            n = rng.randrange(0, 12)
            body = " ".join(
                f"{rng.choice(singles)}(q[{rng.randrange(3)}]);"
                for _ in range(n))
            text = self.gen(body)
            assert text.count("createInstruction(") == n

    def test_adjoint_and_ctrl_transform_calls(self):
        text = self.gen("ansatz(q, x); ansatz::adjoint(q,x);",
                        "void do_nothing(qreg q, double x)")
        assert "{ class ansatz __qk_nested_0(_parent_kernel, q, x); }" in text
        assert "ansatz::adjoint(_parent_kernel, q,x);" in text
        text = self.gen("ansatz::ctrl(q[2], q, x);",
                        "void use_ctrl(qreg q, double x)")
        assert "ansatz::ctrl(_parent_kernel, 2, q, x);" in text

    def test_empty_body_class(self):
        text = self.gen("", "void idle(qreg q, double x)")
        assert "createInstruction" not in text
        assert "class idle" in text
        assert "if (!is_nested())" in text

    def test_executor_submission_emitted_once(self):
        text = self.gen(ANSATZ_BODY)
        assert text.count('getAccelerator("simulator")') == 1
        assert text.count("qpu->execute(q, _parent_kernel);") == 1

    def test_quantum_api_namespace_switch(self):
        text = self.gen(ANSATZ_BODY, api="xacc")
        assert "xacc::getIRProvider()" in text
        assert "qrt::" not in text

    def test_undeclared_qreg_is_an_error(self):
        with pytest.raises(SynstitchError) as exc:
            self.gen("X(r[0]);")
        assert "undeclared qreg parameter 'r'" in exc.value.diagnostic.message

    def test_non_void_kernel_rejected(self):
        with pytest.raises(SynstitchError):
            self.gen("X(q[0]);", "int k(qreg q)")

    def test_gate_statements_flushed_before_kernel_calls(self):
        text = self.gen("H(q[0]); sub(q); H(q[0]);",
                        "void outer(qreg q)", )
        first_add = text.index("addInstructions({i0})")
        nested = text.index("__qk_nested_1")
        second_add = text.index("addInstructions({i1})")
        assert first_add < nested < second_add


class TestThroughPipeline:
    def test_three_kernel_unit_rewrites_cleanly(self):
        result = rewrite_unit(KERNELS_EXAMPLE_SOURCE, default_registry(),
                              RewriteOptions())
        assert result.ok, [d.message for d in result.diagnostics]
        out = result.output_text
        assert out.count('#include "qrt.h"') == 1
        assert 'qrt::configure("simulator", 1024)' in out

    def test_alias_source_rewrites(self):
        src = "__qpu__ void x_gate(qreg q) { X(q[1]); }\n"
        result = rewrite_unit(src, default_registry(), RewriteOptions())
        assert result.ok
        assert "class x_gate" in result.output_text
        assert 'createInstruction("X", {1})' in result.output_text

    def test_hadamard_test_unit(self):
        src = (
            "__qpu__ void x_gate(qreg q) { X(q[1]); }\n"
            "__qpu__ void hadamard_test_x(qreg q) {\n"
            "  H(q[0]);\n"
            "  x_gate(q);\n"
            "  x_gate::ctrl(q[0], q);\n"
            "  H(q[0]);\n"
            "  Measure(q[0]);\n"
            "}\n")
        result = rewrite_unit(src, default_registry(), RewriteOptions())
        assert result.ok
        out = result.output_text
        assert 'createInstruction("Measure", {0})' in out
        assert "x_gate::ctrl(_parent_kernel, 0, q);" in out
        assert "{ class x_gate __qk_nested_1(_parent_kernel, q); }" in out
