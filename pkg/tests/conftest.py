"""Shared helpers for the synstitch test suite."""

from __future__ import annotations

import random
import string

from synstitch.cli import build_registry
from synstitch.cpptok import tokenize
from synstitch.scanner import SyntaxFunction, find_syntax_functions

SPMV_EXAMPLE_SOURCE = '''#include "taco_structs.h"
[[clang::syntax(taco)]]
    void matrix_vector_mul
    (vector *y,csr *A,vector *x,
         std::string format=
         "  -f=A:ds:0,1 -f=x:d -f=y:d") {
   y(i) = A(i,j) * x(j)
}
'''

KERNELS_EXAMPLE_SOURCE = '''[[clang::syntax(quantum)]]
    void ansatz(qreg q, double x) {
  X(q[0]);
  Ry(q[1], x);
  CX(q[1], q[0]);
}
[[clang::syntax(quantum)]]
    void do_nothing(qreg q, double x) {
  ansatz(q, x);
  ansatz::adjoint(q,x);
}
[[clang::syntax(quantum)]]
    void use_ctrl(qreg q, double x) {
  // qreg of size 3
  ansatz::ctrl(q[2], q, x);
}
int main() {
  auto q = qalloc(2);
  ansatz(q, 1.57079632679);
  q.print();
  return 0;
}
'''


def default_registry():
    return build_registry()


def scan_single(source: str, aliases: dict[str, str] | None = None) -> SyntaxFunction:
    functions = find_syntax_functions(tokenize(source), aliases or {})
    assert len(functions) == 1, f"expected one tagged function, got {len(functions)}"
    return functions[0]


def random_source(rng: random.Random, length: int = 40) -> str:
    """Random lexically valid C++-ish text for fuzzing the tokenizer."""
    pieces = []
    for _ in range(rng.randrange(1, length)):
        choice = rng.randrange(8)
        if choice == 0:
            pieces.append(rng.choice(["int", "x", "foo", "_bar", "namespace",
                                      "q0", "A", "if"]))
        elif choice == 1:
            pieces.append(rng.choice(["0", "42", "3.14", "1e-3", "0x1F",
                                      "1'000", ".5"]))
        elif choice == 2:
            body = "".join(rng.choice(string.ascii_letters + "{}()[];, ")
                           for _ in range(rng.randrange(0, 6)))
            pieces.append('"' + body + '"')
        elif choice == 3:
            pieces.append(rng.choice(["{", "}", "(", ")", "[", "]", ";", ",",
                                      "::", "->", "+=", "<<", ">>", "==",
                                      "*", "&", "#", "..."]))
        elif choice == 4:
            pieces.append(rng.choice(["// comment { ) \"\n", "/* blk } */"]))
        elif choice == 5:
            pieces.append("'" + rng.choice("aZ9_+") + "'")
        elif choice == 6:
            body = "".join(rng.choice(string.ascii_letters + "{}();\" ")
                           for _ in range(rng.randrange(0, 6)))
            pieces.append('R"(' + body + ')"')
        else:
            pieces.append(rng.choice([" ", "\n", "\t", "  \n "]))
        pieces.append(rng.choice(["", " ", "\n"]))
    return "".join(pieces)
