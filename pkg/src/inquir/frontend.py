"""OpenQASM 2.0 front end: parse, place, and lower circuits onto a network.

The pipeline is ``parse_qasm`` -> ``partition`` -> ``lower``.  Lowering keeps
every gate at the processor that owns its qubits; a CX whose endpoints live on
different processors is turned into the entanglement-swapping relay pattern
(a comm-qubit pair per crossed link, a Bell measurement at every intermediate
node, Pauli fix-ups at the endpoints) followed by a remote-CX over the
resulting end-to-end pair.
"""

from __future__ import annotations

import ast as pyast
import math
import re
from dataclasses import dataclass

import numpy as np

from .arch import Architecture
from .ast import (
    ApplyGate,
    Close,
    EntSwap,
    Free,
    GenEnt,
    If,
    Init,
    Measure,
    Open,
    Process,
    QSend,
    Recv,
    RemoteCxControl,
    RemoteCxTarget,
    Send,
    Stop,
    System,
    Var,
)
from .errors import CapacityExceeded, ParseError, UnsupportedGate
from .qstate import gate_matrix

__all__ = [
    "Gate",
    "MeasureOp",
    "Barrier",
    "Circuit",
    "QubitMap",
    "parse_qasm",
    "partition",
    "lower",
    "compile_qasm",
    "static_counts",
    "simulate_monolithic",
]


# ---------------------------------------------------------------------------
# circuit representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Gate:
    name: str                      # IR gate name (X, H, CX, ...)
    params: tuple[float, ...]
    qubits: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class MeasureOp:
    qubit: int
    target: str                    # classical bit name, e.g. "c3"


@dataclass(frozen=True, slots=True)
class Barrier:
    qubits: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate | MeasureOp | Barrier, ...]

    def touched(self) -> tuple[int, ...]:
        """Qubits that some gate or measurement actually uses."""
        seen: set[int] = set()
        for op in self.ops:
            if isinstance(op, Gate):
                seen.update(op.qubits)
            elif isinstance(op, MeasureOp):
                seen.add(op.qubit)
        return tuple(sorted(seen))


# qasm name -> (IR name, #params, #qubits)
_QASM_GATES = {
    "x": ("X", 0, 1), "y": ("Y", 0, 1), "z": ("Z", 0, 1), "h": ("H", 0, 1),
    "s": ("S", 0, 1), "sdg": ("Sdg", 0, 1), "t": ("T", 0, 1), "tdg": ("Tdg", 0, 1),
    "rx": ("RX", 1, 1), "ry": ("RY", 1, 1), "rz": ("RZ", 1, 1),
    "u1": ("U1", 1, 1), "u2": ("U2", 2, 1), "u3": ("U3", 3, 1),
    "cx": ("CX", 0, 2),
}

# ccx a,b,c as the standard 6-CX / 7-T network
_CCX = (
    ("H", "c"), ("CX", "b", "c"), ("Tdg", "c"), ("CX", "a", "c"), ("T", "c"),
    ("CX", "b", "c"), ("Tdg", "c"), ("CX", "a", "c"), ("T", "b"), ("T", "c"),
    ("H", "c"), ("CX", "a", "b"), ("T", "a"), ("Tdg", "b"), ("CX", "a", "b"),
)

_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _statements(text: str):
    """Yield (statement, line) with // comments stripped."""
    buf: list[str] = []
    line = 1
    start: int | None = None
    i = 0
    while i < len(text):
        if text.startswith("//", i):
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        ch = text[i]
        if ch == "\n":
            line += 1
            buf.append(" ")
        elif ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield stmt, start if start is not None else line
            buf.clear()
            start = None
        else:
            if start is None and not ch.isspace():
                start = line
            buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise ParseError(start or line, 1, ("';'",), repr(tail))


def _eval_param(text: str, line: int) -> float:
    """Constant-fold a qasm parameter expression (numbers, pi, + - * / ^)."""
    try:
        node = pyast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError:
        raise ParseError(line, 1, ("parameter expression",), repr(text)) from None

    def fold(n) -> float:
        if isinstance(n, pyast.Constant) and isinstance(n.value, (int, float)):
            return float(n.value)
        if isinstance(n, pyast.Name) and n.id == "pi":
            return math.pi
        if isinstance(n, pyast.UnaryOp) and isinstance(n.op, (pyast.USub, pyast.UAdd)):
            v = fold(n.operand)
            return -v if isinstance(n.op, pyast.USub) else v
        if isinstance(n, pyast.BinOp):
            ops = {pyast.Add: float.__add__, pyast.Sub: float.__sub__,
                   pyast.Mult: float.__mul__, pyast.Div: float.__truediv__,
                   pyast.Pow: float.__pow__}
            fn = ops.get(type(n.op))
            if fn is not None:
                return fn(fold(n.left), fold(n.right))
        raise ParseError(line, 1, ("number", "'pi'", "arithmetic"), repr(text))

    return fold(node)


class _Registers:
    def __init__(self):
        self.qregs: dict[str, tuple[int, int]] = {}   # name -> (base, size)
        self.cregs: dict[str, int] = {}               # name -> size
        self.n_qubits = 0

    def add_qreg(self, name: str, size: int):
        self.qregs[name] = (self.n_qubits, size)
        self.n_qubits += size

    def resolve(self, arg: str, line: int) -> tuple[str, int | None]:
        """Return (register, index) for ``reg`` or ``reg[i]`` syntax."""
        m = re.fullmatch(r"(\w+)\s*(?:\[\s*(\d+)\s*\])?", arg.strip())
        if not m:
            raise ParseError(line, 1, ("qubit argument",), repr(arg))
        return m.group(1), None if m.group(2) is None else int(m.group(2))


def _expand_args(regs: _Registers, args: list[str], line: int,
                 kinds: str) -> list[tuple]:
    """Resolve argument syntax, broadcasting bare registers.

    ``kinds`` is one char per argument: 'q' for a qubit, 'c' for a classical
    bit.  Returns one tuple per broadcast iteration; qubits become global
    indices, classical bits become names like "c3".
    """
    resolved = []
    width = None
    for arg, kind in zip(args, kinds):
        reg, idx = regs.resolve(arg, line)
        table = regs.qregs if kind == "q" else regs.cregs
        if reg not in table:
            raise ParseError(line, 1, ("declared register",), repr(reg))
        size = table[reg][1] if kind == "q" else table[reg]
        if idx is None:
            if width is not None and width != size:
                raise ParseError(line, 1, ("registers of equal size",), repr(arg))
            width = size
        elif idx >= size:
            raise ParseError(line, 1, (f"index < {size}",), str(idx))
        resolved.append((reg, idx, kind))
    out = []
    for k in range(width if width is not None else 1):
        row = []
        for reg, idx, kind in resolved:
            j = idx if idx is not None else k
            if kind == "q":
                row.append(regs.qregs[reg][0] + j)
            else:
                row.append(f"{reg}{j}")
        out.append(tuple(row))
    return out


def parse_qasm(text: str) -> Circuit:
    """Parse an OpenQASM 2.0 source into a flat :class:`Circuit`.

    Multiple quantum registers are flattened in declaration order.  ``ccx``
    is expanded into its 6-CX network here so that later stages only ever
    see one- and two-qubit gates.
    """
    regs = _Registers()
    ops: list[Gate | MeasureOp | Barrier] = []
    saw_header = False

    for stmt, line in _statements(text):
        head = _ID.match(stmt)
        key = head.group(0) if head else ""
        if not saw_header:
            m = re.fullmatch(r"OPENQASM\s+(\d+\.\d+)", stmt)
            if not m or m.group(1) != "2.0":
                raise ParseError(line, 1, ("'OPENQASM 2.0;'",), repr(stmt))
            saw_header = True
            continue
        if key == "include":
            continue
        if key in ("qreg", "creg"):
            m = re.fullmatch(rf"{key}\s+(\w+)\s*\[\s*(\d+)\s*\]", stmt)
            if not m:
                raise ParseError(line, 1, (f"{key} name[size]",), repr(stmt))
            name, size = m.group(1), int(m.group(2))
            if key == "qreg":
                regs.add_qreg(name, size)
            else:
                regs.cregs[name] = size
            continue
        if key == "barrier":
            rest = stmt[len("barrier"):].strip()
            args = [a for a in rest.split(",") if a.strip()]
            rows = _expand_args(regs, args, line, "q" * len(args))
            qubits = sorted({q for row in rows for q in row})
            ops.append(Barrier(tuple(qubits)))
            continue
        if key == "measure":
            m = re.fullmatch(r"measure\s+(.+?)\s*->\s*(.+)", stmt)
            if not m:
                raise ParseError(line, 1, ("measure q[i] -> c[j]",), repr(stmt))
            for q, c in _expand_args(regs, [m.group(1), m.group(2)], line, "qc"):
                ops.append(MeasureOp(q, c))
            continue
        if key in ("if", "reset", "gate", "opaque"):
            raise UnsupportedGate(f"'{key}' is outside the supported qasm subset")

        m = re.fullmatch(r"(\w+)\s*(?:\(([^)]*)\))?\s*(.+)", stmt)
        if not m:
            raise ParseError(line, 1, ("gate statement",), repr(stmt))
        name, param_text, arg_text = m.group(1), m.group(2), m.group(3)
        args = [a for a in arg_text.split(",") if a.strip()]
        if name == "ccx":
            if param_text or len(args) != 3:
                raise ParseError(line, 1, ("ccx a, b, c",), repr(stmt))
            for row in _expand_args(regs, args, line, "qqq"):
                if len(set(row)) != 3:
                    raise ParseError(line, 1, ("distinct qubits",), repr(stmt))
                named = dict(zip("abc", row))
                for g, *spec in _CCX:
                    ops.append(Gate(g, (), tuple(named[x] for x in spec)))
            continue
        if name not in _QASM_GATES:
            raise UnsupportedGate(f"gate '{name}' is outside the supported qasm subset")
        ir_name, n_params, n_qubits = _QASM_GATES[name]
        params = tuple(_eval_param(p, line) for p in param_text.split(",")) \
            if param_text else ()
        if len(params) != n_params or len(args) != n_qubits:
            raise ParseError(
                line, 1, (f"{name} with {n_params} param(s), {n_qubits} qubit(s)",),
                repr(stmt))
        for row in _expand_args(regs, args, line, "q" * n_qubits):
            if len(set(row)) != n_qubits:
                raise ParseError(line, 1, ("distinct qubits",), repr(stmt))
            ops.append(Gate(ir_name, params, row))

    if not saw_header:
        raise ParseError(1, 1, ("'OPENQASM 2.0;'",), "end of input")
    return Circuit(regs.n_qubits, tuple(ops))


# ---------------------------------------------------------------------------
# placement
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class QubitMap:
    """Logical qubit index -> (participant, local slot)."""

    placement: tuple[tuple[int, int], ...]

    def participant(self, i: int) -> int:
        return self.placement[i][0]

    def slot(self, i: int) -> int:
        return self.placement[i][1]


def partition(circ: Circuit, arch: Architecture) -> QubitMap:
    """Assign qubits to processors sequentially, filling each one up before
    moving on.  With uniform capacity Q this is qubit i -> processor i // Q."""
    slots = [(p.id, s) for p in arch.processors for s in range(p.data_qubits)]
    if circ.n_qubits > len(slots):
        raise CapacityExceeded(
            f"circuit needs {circ.n_qubits} data qubits, "
            f"architecture provides {len(slots)}")
    return QubitMap(tuple(slots[:circ.n_qubits]))


# ---------------------------------------------------------------------------
# lowering
# ---------------------------------------------------------------------------

class _Namer:
    def __init__(self):
        self.n_label = 0
        self.n_var = 0

    def label(self) -> str:
        self.n_label += 1
        return f"l{self.n_label}"

    def var(self, prefix: str) -> str:
        self.n_var += 1
        return f"{prefix}{self.n_var}"


def _remote_cx(streams, path, ctrl_var, tgt_var, names: _Namer):
    """Emit the relay pattern for a CX whose endpoints sit ``len(path)-1``
    links apart: per-link pairs, a Bell measurement at every intermediate,
    Z fix-ups at the control end, X fix-ups at the target end, then the
    remote-CX over the end-to-end pair."""
    pa, pb = path[0], path[-1]
    k = len(path) - 1
    labels = [names.label() for _ in range(k)]
    ctrl_comm = names.var("x")
    tgt_comm = names.var("x")
    streams[pa].append(GenEnt(ctrl_comm, path[1], labels[0]))
    streams[pb].append(GenEnt(tgt_comm, path[-2], labels[-1]))
    for j in range(1, k):
        left = names.var("x")
        right = names.var("x")
        w1 = names.var("w")
        w2 = names.var("w")
        streams[path[j]] += [
            GenEnt(left, path[j - 1], labels[j - 1]),
            GenEnt(right, path[j + 1], labels[j]),
            EntSwap(w1, w2, Var(left), Var(right)),
            Send("s", pa, labels[j - 1], Var(w1)),
            Send("s", pb, labels[j], Var(w2)),
        ]
    for j in range(1, k):
        wz = names.var("w")
        streams[pa] += [
            Recv("s", labels[j - 1], wz),
            ApplyGate("Z", (), (Var(ctrl_comm),), exponent=Var(wz)),
        ]
        wx = names.var("w")
        streams[pb] += [
            Recv("s", labels[j], wx),
            ApplyGate("X", (), (Var(tgt_comm),), exponent=Var(wx)),
        ]
    l_rcx = names.label()
    streams[pa].append(RemoteCxControl(pb, "s", l_rcx, Var(ctrl_var), Var(ctrl_comm)))
    streams[pb].append(RemoteCxTarget(pa, "s", l_rcx, Var(tgt_var), Var(tgt_comm)))


def lower(circ: Circuit, qmap: QubitMap, arch: Architecture, *,
          free_at_end: bool = True) -> System:
    """Lower a placed circuit to one process per processor.

    Every process opens one shared global session; instructions are emitted
    in circuit order, so barriers need no explicit encoding.  Only qubits
    that some operation touches are initialised.  ``free_at_end=False``
    leaves the data qubits live at the end (useful for state inspection).
    """
    if circ.n_qubits > len(qmap.placement):
        raise CapacityExceeded(
            f"placement covers {len(qmap.placement)} qubits, "
            f"circuit has {circ.n_qubits}")
    streams: dict[int, list] = {pid: [] for pid in arch.ids}
    inited: set[int] = set()
    names = _Namer()

    def touch(i: int) -> str:
        if i not in inited:
            inited.add(i)
            streams[qmap.participant(i)].append(Init(f"q{i}"))
        return f"q{i}"

    for op in circ.ops:
        if isinstance(op, Barrier):
            continue
        if isinstance(op, MeasureOp):
            v = touch(op.qubit)
            streams[qmap.participant(op.qubit)].append(
                Measure(op.target, (Var(v),)))
            continue
        if len(op.qubits) == 1:
            v = touch(op.qubits[0])
            streams[qmap.participant(op.qubits[0])].append(
                ApplyGate(op.name, op.params, (Var(v),)))
            continue
        a, b = op.qubits
        va, vb = touch(a), touch(b)
        pa, pb = qmap.participant(a), qmap.participant(b)
        if pa == pb:
            streams[pa].append(ApplyGate("CX", (), (Var(va), Var(vb))))
        else:
            path = arch.shortest_path(pa, pb)
            _remote_cx(streams, path, va, vb, names)

    session = tuple(arch.ids)
    processes = []
    for pid in arch.ids:
        body: list = [Open("s", session)]
        body.extend(streams[pid])
        if free_at_end:
            body.extend(Free(f"q{i}") for i in sorted(inited)
                        if qmap.participant(i) == pid)
        body.append(Close("s"))
        body.append(Stop())
        processes.append(Process(pid, tuple(body)))
    return System(tuple(processes))


def compile_qasm(text: str, arch: Architecture, *,
                 free_at_end: bool = True) -> System:
    """Parse + partition + lower in one call."""
    circ = parse_qasm(text)
    return lower(circ, partition(circ, arch), arch, free_at_end=free_at_end)


# ---------------------------------------------------------------------------
# static resource counting
# ---------------------------------------------------------------------------

def static_counts(system: System) -> tuple[int, int]:
    """(EPR pairs consumed, classical messages sent), counted structurally.

    genEnt instructions come in pairs, one per endpoint.  Each remote-CX
    half and each qsend contributes the messages its expansion sends.
    """
    pairs2 = 0
    msgs = 0

    def walk(body):
        nonlocal pairs2, msgs
        for ins in body:
            if isinstance(ins, GenEnt):
                pairs2 += 1
            elif isinstance(ins, Send):
                msgs += 1
            elif isinstance(ins, QSend):
                msgs += 2
            elif isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
                msgs += 1
            elif isinstance(ins, If):
                walk(ins.then_body)
                walk(ins.else_body)

    for proc in system.processes:
        walk(proc.body)
    return pairs2 // 2, msgs


# ---------------------------------------------------------------------------
# monolithic reference simulation
# ---------------------------------------------------------------------------

def simulate_monolithic(circ: Circuit) -> np.ndarray:
    """Run the un-distributed circuit on a single statevector, skipping
    measurements; qubit 0 is the most significant tensor factor (matching
    the order convention of the runtime backend's ``fidelity``)."""
    n = circ.n_qubits
    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1.0
    for op in circ.ops:
        if not isinstance(op, Gate):
            continue
        mat = gate_matrix(op.name, op.params)
        k = len(op.qubits)
        tensor = mat.reshape((2,) * (2 * k))
        state = np.tensordot(tensor, state, axes=(range(k, 2 * k), op.qubits))
        state = np.moveaxis(state, range(k), op.qubits)
    return state.ravel()
