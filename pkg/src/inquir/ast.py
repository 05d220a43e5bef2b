"""Abstract syntax for InQuIR programs.

A program is a :class:`System`: a parallel composition of located processes.
Each :class:`Process` carries the participant (processor) id it runs on and a
sequence of instructions.  Classical expressions are the boolean fragment
(bit literals, variables, and, xor, not); qubits only ever enter expressions
through variables, so the expression grammar has no qubit literal.

Every node is a frozen dataclass, which gives us structural equality and
hashability for free — the runtime leans on that for state enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

__all__ = [
    "Expr", "BitLit", "Var", "And", "Xor", "Not",
    "Instr", "Stop", "Open", "Close", "Init", "Free", "Assign",
    "ApplyGate", "Measure", "GenEnt", "EntSwap",
    "QSend", "QRecv", "RemoteCxControl", "RemoteCxTarget",
    "Send", "Recv", "If",
    "Process", "System",
    "GATE_SIGNATURES", "system_to_json", "system_from_json",
    "instruction_count",
]

# gate name -> (number of qubit operands, number of float parameters)
GATE_SIGNATURES: dict[str, tuple[int, int]] = {
    "X": (1, 0), "Y": (1, 0), "Z": (1, 0), "H": (1, 0),
    "S": (1, 0), "Sdg": (1, 0), "T": (1, 0), "Tdg": (1, 0),
    "RX": (1, 1), "RY": (1, 1), "RZ": (1, 1),
    "U1": (1, 1), "U2": (1, 2), "U3": (1, 3),
    "CX": (2, 0),
}


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

class Expr:
    """Marker base class for classical expressions."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class BitLit(Expr):
    value: int  # 0 or 1

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError(f"bit literal must be 0 or 1, got {self.value!r}")


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Xor(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Not(Expr):
    operand: Expr


# ---------------------------------------------------------------------------
# instructions
# ---------------------------------------------------------------------------

class Instr:
    """Marker base class for instructions."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Stop(Instr):
    """Terminated process; always the last instruction of a body."""


@dataclass(frozen=True, slots=True)
class Open(Instr):
    """``s = open[p0,p1,...];`` — n-way session establishment (blocking rendezvous)."""

    var: str
    participants: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Close(Instr):
    """``close(s);``"""

    session: str


@dataclass(frozen=True, slots=True)
class Init(Instr):
    """``x = init();`` — take a free data qubit from the local store, in state |0>."""

    var: str


@dataclass(frozen=True, slots=True)
class Free(Instr):
    """``free x;`` — return the qubit bound to ``x`` to its home store."""

    var: str


@dataclass(frozen=True, slots=True)
class Assign(Instr):
    """``x = e;`` for a classical expression ``e``."""

    var: str
    expr: Expr


@dataclass(frozen=True, slots=True)
class ApplyGate(Instr):
    """``H(q);`` / ``RZ(0.5, q);`` / ``Z^w(q);``.

    ``exponent`` is the optional classical exponent: the gate is applied iff it
    evaluates to 1.  Parameters come before qubit operands in the argument list.
    """

    gate: str
    params: tuple[float, ...]
    args: tuple[Expr, ...]
    exponent: Expr | None = None

    def __post_init__(self):
        sig = GATE_SIGNATURES.get(self.gate)
        if sig is None:
            raise ValueError(f"unknown gate {self.gate!r}")
        if (len(self.args), len(self.params)) != sig:
            raise ValueError(
                f"{self.gate} expects {sig[0]} qubit(s) and {sig[1]} parameter(s), "
                f"got {len(self.args)} and {len(self.params)}")


@dataclass(frozen=True, slots=True)
class Measure(Instr):
    """``x = measure(q0, ..., qn);`` — joint parity measurement, binds a bit."""

    var: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class GenEnt(Instr):
    """``x = genEnt[p](l);`` — joint with the partner's matching genEnt."""

    var: str
    partner: int
    label: str


@dataclass(frozen=True, slots=True)
class EntSwap(Instr):
    """``(w1, w2) = entSwap(x, y);`` — local Bell measurement on two comm qubits.

    Binds the two outcome bits and returns both qubits to their stores.
    """

    var1: str
    var2: str
    arg1: Expr
    arg2: Expr


@dataclass(frozen=True, slots=True)
class QSend(Instr):
    """``qsend[p](s, l, q, x);`` — teleport data qubit ``q`` through comm qubit ``x``."""

    partner: int
    session: str
    label: str
    payload: Expr
    comm: Expr


@dataclass(frozen=True, slots=True)
class QRecv(Instr):
    """``y = qrecv(s, l, x);`` — receive a teleported qubit into a fresh local one."""

    var: str
    session: str
    label: str
    comm: Expr


@dataclass(frozen=True, slots=True)
class RemoteCxControl(Instr):
    """``rcxc[p](s, l, q, x);`` — control half of a remote CX."""

    partner: int
    session: str
    label: str
    qubit: Expr
    comm: Expr


@dataclass(frozen=True, slots=True)
class RemoteCxTarget(Instr):
    """``rcxt[p](s, l, q, x);`` — target half of a remote CX."""

    partner: int
    session: str
    label: str
    qubit: Expr
    comm: Expr


@dataclass(frozen=True, slots=True)
class Send(Instr):
    """``s[p]!(l: e);`` — asynchronous classical send."""

    session: str
    partner: int
    label: str
    value: Expr


@dataclass(frozen=True, slots=True)
class Recv(Instr):
    """``s?(l: x);`` — blocking classical receive, binds ``x``."""

    session: str
    label: str
    var: str


@dataclass(frozen=True, slots=True)
class If(Instr):
    """``if e { ... } else { ... }`` with an implicit join: execution continues
    with the chosen branch followed by whatever comes after the if."""

    cond: Expr
    then_body: tuple[Instr, ...]
    else_body: tuple[Instr, ...]


# ---------------------------------------------------------------------------
# processes / systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Process:
    participant: int
    body: tuple[Instr, ...]


@dataclass(frozen=True, slots=True)
class System:
    processes: tuple[Process, ...]

    @property
    def participants(self) -> tuple[int, ...]:
        return tuple(p.participant for p in self.processes)


def instruction_count(system: System) -> int:
    """Total number of instructions, counting both branches of every if."""
    def count(body) -> int:
        n = 0
        for ins in body:
            n += 1
            if isinstance(ins, If):
                n += count(ins.then_body) + count(ins.else_body)
        return n
    return sum(count(p.body) for p in system.processes)


# ---------------------------------------------------------------------------
# JSON form
#
# One object per instruction with an "op" tag; expressions are tagged with "e".
# The mapping is mechanical over the dataclass fields, so adding an
# instruction automatically round-trips.
# ---------------------------------------------------------------------------

_EXPR_TAGS = {"bit": BitLit, "var": Var, "and": And, "xor": Xor, "not": Not}
_OP_TAGS: dict[str, type] = {
    "stop": Stop, "open": Open, "close": Close, "init": Init, "free": Free,
    "assign": Assign, "gate": ApplyGate, "measure": Measure,
    "genent": GenEnt, "entswap": EntSwap,
    "qsend": QSend, "qrecv": QRecv, "rcxc": RemoteCxControl, "rcxt": RemoteCxTarget,
    "send": Send, "recv": Recv, "if": If,
}
_CLS_TO_OP = {cls: tag for tag, cls in _OP_TAGS.items()}
_CLS_TO_ETAG = {cls: tag for tag, cls in _EXPR_TAGS.items()}


def _expr_to_json(e: Expr):
    tag = _CLS_TO_ETAG[type(e)]
    out = {"e": tag}
    for f in fields(e):
        v = getattr(e, f.name)
        out[f.name] = _expr_to_json(v) if isinstance(v, Expr) else v
    return out


def _expr_from_json(obj) -> Expr:
    cls = _EXPR_TAGS[obj["e"]]
    kwargs = {}
    for f in fields(cls):
        v = obj[f.name]
        kwargs[f.name] = _expr_from_json(v) if isinstance(v, dict) else v
    return cls(**kwargs)


def _value_to_json(v):
    if isinstance(v, Expr):
        return _expr_to_json(v)
    if isinstance(v, Instr):
        return _instr_to_json(v)
    if isinstance(v, tuple):
        return [_value_to_json(x) for x in v]
    return v


def _instr_to_json(ins: Instr):
    out = {"op": _CLS_TO_OP[type(ins)]}
    for f in fields(ins):
        out[f.name] = _value_to_json(getattr(ins, f.name))
    return out


def _instr_from_json(obj) -> Instr:
    cls = _OP_TAGS[obj["op"]]
    kwargs = {}
    for f in fields(cls):
        v = obj[f.name]
        kwargs[f.name] = _value_from_json(f.name, v)
    return cls(**kwargs)


def _value_from_json(name, v):
    if isinstance(v, dict):
        return _expr_from_json(v)
    if isinstance(v, list):
        if name in ("then_body", "else_body"):
            return tuple(_instr_from_json(x) for x in v)
        if v and isinstance(v[0], dict):
            return tuple(_expr_from_json(x) for x in v)
        return tuple(v)
    return v


def system_to_json(system: System) -> dict:
    """Stable JSON form of a program (see :func:`system_from_json`)."""
    return {
        "processes": [
            {"participant": p.participant, "body": [_instr_to_json(i) for i in p.body]}
            for p in system.processes
        ]
    }


def system_from_json(obj: dict) -> System:
    procs = []
    for p in obj["processes"]:
        body = tuple(_instr_from_json(i) for i in p["body"])
        procs.append(Process(int(p["participant"]), body))
    return System(tuple(procs))
