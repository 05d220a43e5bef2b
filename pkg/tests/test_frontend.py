"""QASM parsing, sequential placement, and lowering to located processes."""

import math

import numpy as np
import pytest

from inquir.arch import Architecture, Link, Processor, cube, linear
from inquir.ast import (
    ApplyGate, Close, EntSwap, Free, GenEnt, Init, Measure, Open, Recv,
    RemoteCxControl, RemoteCxTarget, Send, Stop,
)
from inquir.errors import (
    CapacityExceeded, DisconnectedTopology, ParseError, UnsupportedGate,
)
from inquir.frontend import (
    Barrier, Circuit, Gate, MeasureOp, compile_qasm, lower, parse_qasm,
    partition, simulate_monolithic, static_counts,
)
from inquir.printer import print_program

from circuits import (
    compiled_equivalence, random_arch, random_circuit, teledata_fidelity,
)

HDR = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_minimal():
    circ = parse_qasm(HDR + "qreg q[1];\nh q[0];\n")
    assert circ.n_qubits == 1
    assert circ.ops == (Gate("H", (), (0,)),)


def test_parse_cx_and_params():
    circ = parse_qasm(HDR + "qreg q[2];\nrz(pi/2) q[0];\ncx q[0],q[1];\nu3(0.1,-pi/4,2*0.25) q[1];")
    rz, cx, u3 = circ.ops
    assert rz == Gate("RZ", (math.pi / 2,), (0,))
    assert cx == Gate("CX", (), (0, 1))
    assert u3.name == "U3" and u3.params == pytest.approx((0.1, -math.pi / 4, 0.5))


def test_parse_flattens_registers_in_declaration_order():
    circ = parse_qasm(HDR + "qreg a[2];\nqreg b[3];\nx a[1];\nx b[0];")
    assert circ.n_qubits == 5
    assert [op.qubits for op in circ.ops] == [(1,), (2,)]


def test_parse_broadcast_and_barrier():
    circ = parse_qasm(HDR + "qreg q[3];\nh q;\nbarrier q;\ncreg c[3];\nmeasure q -> c;")
    assert circ.ops[:3] == tuple(Gate("H", (), (i,)) for i in range(3))
    assert circ.ops[3] == Barrier((0, 1, 2))
    assert circ.ops[4:] == tuple(MeasureOp(i, f"c{i}") for i in range(3))


def test_parse_measure_single():
    circ = parse_qasm(HDR + "qreg q[2];\ncreg c[2];\nmeasure q[1] -> c[0];")
    assert circ.ops == (MeasureOp(1, "c0"),)


def test_ccx_expands_to_six_cx():
    circ = parse_qasm(HDR + "qreg q[3];\nccx q[0],q[1],q[2];")
    names = [op.name for op in circ.ops]
    assert len(circ.ops) == 15
    assert names.count("CX") == 6
    assert names.count("T") + names.count("Tdg") == 7
    assert names.count("H") == 2
    # it really is a Toffoli
    for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        prep = tuple(Gate("X", (), (q,)) for q, bit in ((0, a), (1, b)) if bit)
        state = simulate_monolithic(Circuit(3, prep + circ.ops))
        want = (a << 2) | (b << 1) | (a & b)
        assert abs(state[want]) == pytest.approx(1.0)


@pytest.mark.parametrize("src,exc", [
    ("qreg q[1];\nh q[0];", ParseError),                     # missing header
    ("OPENQASM 3.0;\nqreg q[1];", ParseError),
    (HDR + "qreg q[1];\nh q[3];", ParseError),               # index out of range
    (HDR + "qreg q[2];\ncx q[0],q[0];", ParseError),         # duplicate qubit
    (HDR + "qreg q[1];\nh q[0]", ParseError),                # missing semicolon
    (HDR + "qreg q[1];\nrz(foo) q[0];", ParseError),
    (HDR + "qreg q[2];\nswap q[0],q[1];", UnsupportedGate),
    (HDR + "qreg q[1];\ncreg c[1];\nif(c==1) x q[0];", UnsupportedGate),
    (HDR + "qreg q[1];\nreset q[0];", UnsupportedGate),
    (HDR + "gate foo a { h a; }", UnsupportedGate),
])
def test_parse_rejections(src, exc):
    with pytest.raises(exc):
        parse_qasm(src)


# ---------------------------------------------------------------------------
# placement
# ---------------------------------------------------------------------------

def test_partition_sequential_uniform():
    qmap = partition(Circuit(16, ()), linear(8, 2, 2))
    assert qmap.placement == tuple((i // 2, i % 2) for i in range(16))


def test_partition_overflow():
    with pytest.raises(CapacityExceeded):
        partition(Circuit(17, ()), linear(8, 2, 2))


def test_partition_nonuniform_fills_in_order():
    arch = Architecture((Processor(0, 1), Processor(1, 3)), (Link(0, 1, 1),))
    qmap = partition(Circuit(4, ()), arch)
    assert qmap.placement == ((0, 0), (1, 0), (1, 1), (1, 2))


# ---------------------------------------------------------------------------
# lowering: structure
# ---------------------------------------------------------------------------

def test_lower_local_only():
    circ = parse_qasm(HDR + "qreg q[3];\nh q[0];\ncx q[0],q[1];")
    arch = linear(2, 3, 1)
    sysm = lower(circ, partition(circ, arch), arch)
    assert static_counts(sysm) == (0, 0)
    p0 = sysm.processes[0].body
    assert [type(i).__name__ for i in p0] == [
        "Open", "Init", "ApplyGate", "Init", "ApplyGate",
        "Free", "Free", "Close", "Stop"]
    # untouched q2 is never initialised; the idle processor still joins in
    assert all(not isinstance(i, Init) for i in sysm.processes[1].body)
    assert sysm.processes[1].body[0] == Open("s", (0, 1))


def test_lower_adjacent_remote_cx():
    circ = parse_qasm(HDR + "qreg q[2];\ncx q[0],q[1];")
    arch = linear(2, 1, 1)
    sysm = lower(circ, partition(circ, arch), arch)
    assert static_counts(sysm) == (1, 2)
    kinds0 = [type(i) for i in sysm.processes[0].body]
    kinds1 = [type(i) for i in sysm.processes[1].body]
    assert RemoteCxControl in kinds0 and RemoteCxTarget in kinds1
    g0 = next(i for i in sysm.processes[0].body if isinstance(i, GenEnt))
    g1 = next(i for i in sysm.processes[1].body if isinstance(i, GenEnt))
    assert g0.label == g1.label and g0.partner == 1 and g1.partner == 0


def test_lower_distant_cx_uses_relay_pattern():
    circ = parse_qasm(HDR + "qreg q[3];\ncx q[0],q[2];")
    arch = linear(3, 1, 1)
    sysm = lower(circ, partition(circ, arch), arch)
    assert static_counts(sysm) == (2, 4)
    mid = [i for i in sysm.processes[1].body
           if not isinstance(i, (Open, Close, Stop))]
    assert [type(i) for i in mid] == [GenEnt, GenEnt, EntSwap, Send, Send]
    assert mid[3].partner == 0 and mid[4].partner == 2
    ctrl = [type(i) for i in sysm.processes[0].body]
    assert ctrl == [Open, Init, GenEnt, Recv, ApplyGate, RemoteCxControl,
                    Free, Close, Stop]
    corr = sysm.processes[0].body[4]
    assert corr.gate == "Z" and corr.exponent is not None
    tgt_corr = next(i for i in sysm.processes[2].body
                    if isinstance(i, ApplyGate))
    assert tgt_corr.gate == "X"


def test_lower_counts_sum_over_paths():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        circ = random_circuit(rng, n, int(rng.integers(5, 20)))
        arch = random_arch(rng, n)
        qmap = partition(circ, arch)
        sysm = lower(circ, qmap, arch)
        expect_e = sum(
            len(arch.shortest_path(qmap.participant(a), qmap.participant(b))) - 1
            for op in circ.ops if isinstance(op, Gate) and len(op.qubits) == 2
            for a, b in [op.qubits]
            if qmap.participant(a) != qmap.participant(b))
        e, c = static_counts(sysm)
        assert e == expect_e
        assert c == 2 * e


def test_lower_disconnected():
    arch = Architecture((Processor(0, 1), Processor(1, 1)), ())
    circ = parse_qasm(HDR + "qreg q[2];\ncx q[0],q[1];")
    with pytest.raises(DisconnectedTopology):
        lower(circ, partition(circ, arch), arch)


def test_compile_deterministic_text():
    src = HDR + "qreg q[4];\nh q[0];\ncx q[0],q[3];\nrz(0.25) q[2];\ncx q[2],q[1];"
    arch = linear(4, 1, 2)
    a = print_program(compile_qasm(src, arch))
    b = print_program(compile_qasm(src, arch))
    assert a == b


# ---------------------------------------------------------------------------
# monolithic reference convention
# ---------------------------------------------------------------------------

def test_simulate_monolithic_bit_order():
    # qubit 0 is the most significant bit of the flat index
    state = simulate_monolithic(Circuit(2, (Gate("H", (), (0,)),)))
    assert state == pytest.approx(np.array([1, 0, 1, 0]) / np.sqrt(2))
    state = simulate_monolithic(
        Circuit(2, (Gate("X", (), (0,)), Gate("CX", (), (0, 1)))))
    assert abs(state[3]) == pytest.approx(1.0)
    state = simulate_monolithic(
        Circuit(2, (Gate("X", (), (1,)), Gate("CX", (), (1, 0)))))
    assert abs(state[3]) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# lowering: semantics
# ---------------------------------------------------------------------------

def test_compiled_distant_cx_matches_reference():
    src = HDR + "qreg q[4];\nh q[0];\nrz(0.7) q[0];\nry(1.1) q[3];\ncx q[0],q[3];\nrx(0.4) q[3];\ncx q[3],q[0];"
    circ = parse_qasm(src)
    for seed in range(4):
        assert compiled_equivalence(circ, linear(4, 1, 2), seed) >= 1 - 1e-9


def test_compiled_ccx_on_cube_matches_reference():
    src = HDR + "qreg q[5];\nh q[0];\nh q[1];\nccx q[0],q[1],q[2];\ncx q[2],q[4];\nu3(0.2,0.3,0.4) q[4];\ncx q[4],q[1];"
    assert compiled_equivalence(parse_qasm(src), cube(2, 2), 1) >= 1 - 1e-9


def test_randomized_compiled_equivalence():
    rng = np.random.default_rng(11)
    for i in range(20):
        n = int(rng.integers(2, 9))
        circ = random_circuit(rng, n, int(rng.integers(8, 22)))
        arch = random_arch(rng, n)
        f = compiled_equivalence(circ, arch, seed=i)
        assert f >= 1 - 1e-9, (i, f)


def test_handwritten_teledata_roundtrip():
    rng = np.random.default_rng(3)
    for i in range(6):
        theta, phi = rng.uniform(0, np.pi, 2)
        assert teledata_fidelity(float(theta), float(phi), seed=i) >= 1 - 1e-9
