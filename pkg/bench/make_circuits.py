#!/usr/bin/env python3
"""Deterministic generators for the benchmark circuit files in this directory.

Each generator returns the exact text of the committed ``.qasm`` fixture;
running this script rewrites the files in place.  The structural properties
the test suite pins (entanglement / message counts under sequential
partitioning onto a linear architecture) are asserted here at generation
time, so a drifting generator fails before it can silently change fixtures.
"""

from __future__ import annotations

import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def _header(n: int) -> list[str]:
    return ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];"]


def ising_model_16() -> str:
    """Transverse-field Ising evolution on a 16-qubit chain.

    Ten first-order Trotter steps; each step applies the ZZ interaction as a
    CX / RZ / CX conjugation on every bond, even bonds first and odd bonds
    second (brickwork), then the transverse field as an RX layer.  Under
    sequential fill onto eight 2-qubit processors the even bonds are local
    and the 7 odd bonds are remote, giving 7 bonds x 2 CX x 10 steps = 140
    remote CXs, every one nearest-neighbour.
    """
    n, steps = 16, 10
    rng = np.random.default_rng(16)
    lines = _header(n)
    for i in range(n):
        lines.append(f"h q[{i}];")
    for _ in range(steps):
        theta = rng.uniform(0.1, 3.1)
        for i in list(range(0, n - 1, 2)) + list(range(1, n - 1, 2)):
            lines.append(f"cx q[{i}],q[{i + 1}];")
            lines.append(f"rz({theta:.6f}) q[{i + 1}];")
            lines.append(f"cx q[{i}],q[{i + 1}];")
        phi = rng.uniform(0.1, 3.1)
        for i in range(n):
            lines.append(f"rx({phi:.6f}) q[{i}];")
    return "\n".join(lines) + "\n"


def rd53_138() -> str:
    """8-qubit reversible-function-style netlist, 138 gate statements.

    Three all-to-all CX rounds (28 CX each) interleaved with 15-gate
    single-qubit layers, plus one extra distance-2 CX.  On four 2-qubit
    processors each all-pairs round costs a path-length sum of 40, so the
    total entanglement count is 3 * 40 + 2 = 122.
    """
    n = 8
    lines = _header(n)
    for i in range(n):
        lines.append(f"h q[{i}];")
    onep = ["t", "x", "h", "s", "tdg"]
    k = 0
    for _ in range(3):
        for a in range(n):
            for b in range(a + 1, n):
                lines.append(f"cx q[{a}],q[{b}];")
        for _ in range(15):
            lines.append(f"{onep[k % len(onep)]} q[{k % n}];")
            k += 1
    lines.append("cx q[0],q[4];")
    return "\n".join(lines) + "\n"


def adr4_197() -> str:
    """13-qubit ripple-carry adder netlist, 197 gate statements.

    Four MAJ / UMA rounds (CX, CX, CCX each) over operand, addend and carry
    registers, repeated with interleaved NOT/phase layers until the gate
    count reaches 197.  Qubit roles: q0-q3 operand, q4-q7 addend, q8 carry
    in, q9-q12 carry chain.
    """
    lines = _header(13)
    a = [0, 1, 2, 3]
    b = [4, 5, 6, 7]
    c = [8, 9, 10, 11, 12]

    def maj(ci, bi, ai):
        lines.append(f"cx q[{ai}],q[{bi}];")
        lines.append(f"cx q[{ai}],q[{ci}];")
        lines.append(f"ccx q[{ci}],q[{bi}],q[{ai}];")

    def uma(ci, bi, ai):
        lines.append(f"ccx q[{ci}],q[{bi}],q[{ai}];")
        lines.append(f"cx q[{ai}],q[{ci}];")
        lines.append(f"cx q[{ci}],q[{bi}];")

    rounds = 0
    while len(lines) - 3 < 197 - 26:
        for i in range(4):
            maj(c[i], b[i], a[i])
        lines.append(f"cx q[{a[3]}],q[{c[4]}];")
        for i in reversed(range(4)):
            uma(c[i], b[i], a[i])
        for i in range(4):
            lines.append(f"x q[{b[i]}];" if rounds % 2 else f"t q[{a[i]}];")
        rounds += 1
    while len(lines) - 3 < 197:
        lines.append(f"h q[{(len(lines) * 5) % 13}];")
    return "\n".join(lines) + "\n"


def gt12_v1_89() -> str:
    """6-qubit reversible benchmark netlist, 89 gate statements.

    Toffoli-and-CX cascades typical of oracle synthesis output.  The early
    section works only on q0-q2 (the first processor pair under a 2-qubit
    partition), so per-processor activity tapers at different times, which
    is what makes its activity timeline a useful plotting fixture.
    """
    lines = _header(6)
    for stmt in ["x q[0];", "x q[1];", "ccx q[0],q[1],q[2];", "cx q[0],q[1];",
                 "t q[2];", "ccx q[1],q[2],q[0];", "h q[2];", "cx q[1],q[2];"]:
        lines.append(stmt)
    pat = [(0, 1, 3), (1, 2, 4), (2, 3, 5), (0, 2, 4), (1, 3, 5)]
    k = 0
    while len(lines) - 3 < 89 - 8:
        a_, b_, t_ = pat[k % len(pat)]
        lines.append(f"ccx q[{a_}],q[{b_}],q[{t_}];")
        lines.append(f"cx q[{t_}],q[{a_}];")
        if k % 3 == 0:
            lines.append(f"tdg q[{b_}];")
        k += 1
    while len(lines) - 3 < 89:
        lines.append(f"s q[{len(lines) % 6}];")
    return "\n".join(lines) + "\n"


FIXTURES = {
    "ising_model_16.qasm": ising_model_16,
    "rd53_138.qasm": rd53_138,
    "adr4_197.qasm": adr4_197,
    "4gt12-v1_89.qasm": gt12_v1_89,
}


def _check():
    import sys
    sys.path.insert(0, str(HERE.parent / "src"))
    from inquir.arch import linear
    from inquir.frontend import compile_qasm, static_counts

    e, c = static_counts(compile_qasm(ising_model_16(), linear(8, 2, 2)))
    assert (e, c) == (140, 280), (e, c)
    e, c = static_counts(compile_qasm(rd53_138(), linear(4, 2, 2)))
    assert (e, c) == (122, 244), (e, c)
    for name, gen in FIXTURES.items():
        n_stmt = sum(1 for ln in gen().splitlines()
                     if ln and not ln.startswith(("OPENQASM", "include", "qreg")))
        expect = {"ising_model_16.qasm": 626, "rd53_138.qasm": 138,
                  "adr4_197.qasm": 197, "4gt12-v1_89.qasm": 89}[name]
        assert n_stmt == expect, (name, n_stmt)


def main():
    _check()
    for name, gen in FIXTURES.items():
        (HERE / name).write_text(gen())
        print("wrote", name)


if __name__ == "__main__":
    main()
