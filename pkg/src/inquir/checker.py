"""Static lints: linear qubit discipline and communication-label sanity.

Two independent passes over a parsed :class:`~inquir.ast.System`:

* :func:`lint_linear` tracks, per process and across both arms of every
  ``if``, whether each qubit variable is unbound, live, or freed.  Using or
  freeing a qubit that may already be freed, or that was never bound, is an
  error; a qubit that may still be live when the process stops (or whose
  binding is shadowed) is a leak warning.
* :func:`lint_sessions` checks the communication surface syntactically:
  every ``genEnt`` needs a counterpart with the mirrored (partner, label)
  key, reusing one label for a second generation between the same pair of
  processors makes the matching ambiguous, rendezvous participant lists
  must agree, and classical sends/receives should balance per destination
  and label (imbalance is only a warning — a dangling message is legal,
  just suspicious).

These are flow-based lints, not a type system: a clean bill here does not
prove deadlock freedom.  The runtime is the authority on dynamic behaviour;
the lints are deliberately one-sided so that anything they pass runs to
completion on the fixture corpus, while flagged programs may still run.

Diagnostics are deterministic and ordered by source location, then code.
Locations are rendered ``p<participant>:<index>`` with ``/then/`` and
``/else/`` segments inside branches, since instructions carry no line info.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    ApplyGate,
    Assign,
    Close,
    EntSwap,
    Free,
    GenEnt,
    If,
    Init,
    Measure,
    Open,
    QRecv,
    QSend,
    Recv,
    RemoteCxControl,
    RemoteCxTarget,
    Send,
    Stop,
    System,
    Var,
)

__all__ = ["Diagnostic", "ERROR", "WARNING", "lint_linear", "lint_sessions"]

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    location: str

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}] {self.location}: {self.message}"

    def to_json(self) -> dict:
        return {"severity": self.severity, "code": self.code,
                "message": self.message, "location": self.location}


def _render(participant: int, path: tuple[int, ...]) -> str:
    parts = [str(path[0])]
    for branch, idx in zip(path[1::2], path[2::2]):
        parts.append("then" if branch == 0 else "else")
        parts.append(str(idx))
    return f"p{participant}:" + "/".join(parts)


class _Collector:
    def __init__(self):
        self.items: list[tuple[tuple, Diagnostic]] = []

    def add(self, participant: int, path: tuple[int, ...],
            severity: str, code: str, message: str):
        key = ((participant,) + path, code, message)
        diag = Diagnostic(severity, code, message, _render(participant, path))
        if (key, diag) not in self.items:
            self.items.append((key, diag))

    def sorted(self) -> list[Diagnostic]:
        return [d for _, d in sorted(self.items, key=lambda kv: kv[0])]


# ---------------------------------------------------------------------------
# linear qubit discipline
# ---------------------------------------------------------------------------

# possible concrete states of a qubit variable on some execution path;
# POISON marks a variable already reported, silencing follow-on noise
_ABSENT, _LIVE, _FREED, _POISON = "absent", "live", "freed", "poison"


class _LinearWalk:
    def __init__(self, participant: int, out: _Collector):
        self.p = participant
        self.out = out

    def _state(self, q: dict, v: str) -> frozenset:
        return q.get(v, frozenset((_ABSENT,)))

    def _use(self, q: dict, v: str, path):
        st = self._state(q, v)
        if _POISON in st:
            return
        if _FREED in st:
            some = " on some path" if st != {_FREED} else ""
            self.out.add(self.p, path, ERROR, "USE_AFTER_FREE",
                         f"qubit variable {v!r} is used after being freed{some}")
            q[v] = frozenset((_POISON,))
        elif _ABSENT in st:
            some = " on some path" if st != {_ABSENT} else ""
            self.out.add(self.p, path, ERROR, "UNBOUND_QUBIT",
                         f"{v!r} is used as a qubit but is not bound by "
                         f"init/genEnt/qrecv{some}")
            q[v] = frozenset((_POISON,))

    def _consume(self, q: dict, v: str, path, code: str, what: str):
        st = self._state(q, v)
        if _POISON in st:
            return
        if _FREED in st:
            some = " on some path" if st != {_FREED} else ""
            self.out.add(self.p, path, ERROR, code,
                         f"qubit variable {v!r} is {what} after being freed{some}")
            q[v] = frozenset((_POISON,))
        elif _ABSENT in st:
            some = " on some path" if st != {_ABSENT} else ""
            self.out.add(self.p, path, ERROR, "UNBOUND_QUBIT",
                         f"{v!r} is {what} but is not bound by "
                         f"init/genEnt/qrecv{some}")
            q[v] = frozenset((_POISON,))
        else:
            q[v] = frozenset((_FREED,))

    def _bind(self, q: dict, v: str, path):
        if _LIVE in self._state(q, v):
            self.out.add(self.p, path, WARNING, "QUBIT_LEAK",
                         f"rebinding {v!r} leaks the qubit it still holds")
        q[v] = frozenset((_LIVE,))

    def _classical(self, q: dict, v: str, path):
        if _LIVE in self._state(q, v):
            self.out.add(self.p, path, WARNING, "QUBIT_LEAK",
                         f"rebinding {v!r} classically leaks the qubit it "
                         f"still holds")
        q.pop(v, None)

    def _stop(self, q: dict, path):
        for v in sorted(q):
            if _LIVE in q[v]:
                some = " on some path" if q[v] != {_LIVE} else ""
                self.out.add(self.p, path, WARNING, "QUBIT_LEAK",
                             f"qubit variable {v!r} is never freed{some}")

    def _names(self, exprs) -> list[str]:
        return [e.name for e in exprs if isinstance(e, Var)]

    def body(self, body, prefix: tuple[int, ...], q: dict):
        """Walk one body; returns the exit state, or None if every path stops."""
        for i, ins in enumerate(body):
            path = prefix + (i,)
            if isinstance(ins, Stop):
                self._stop(q, path)
                return None
            if isinstance(ins, If):
                q1, q2 = dict(q), dict(q)
                e1 = self.body(ins.then_body, path + (0,), q1)
                e2 = self.body(ins.else_body, path + (1,), q2)
                if e1 is None and e2 is None:
                    return None
                if e1 is None:
                    q = e2
                elif e2 is None:
                    q = e1
                else:
                    q = {v: e1.get(v, frozenset((_ABSENT,)))
                         | e2.get(v, frozenset((_ABSENT,)))
                         for v in set(e1) | set(e2)}
                continue
            if isinstance(ins, Init):
                self._bind(q, ins.var, path)
            elif isinstance(ins, GenEnt):
                self._bind(q, ins.var, path)
            elif isinstance(ins, Free):
                self._consume(q, ins.var, path, "DOUBLE_FREE", "freed")
            elif isinstance(ins, ApplyGate):
                for v in self._names(ins.args):
                    self._use(q, v, path)
            elif isinstance(ins, Measure):
                for v in self._names(ins.args):
                    self._use(q, v, path)
                self._classical(q, ins.var, path)
            elif isinstance(ins, EntSwap):
                for v in self._names((ins.arg1, ins.arg2)):
                    self._consume(q, v, path, "USE_AFTER_FREE", "consumed")
                self._classical(q, ins.var1, path)
                self._classical(q, ins.var2, path)
            elif isinstance(ins, QSend):
                for v in self._names((ins.payload, ins.comm)):
                    self._consume(q, v, path, "USE_AFTER_FREE", "consumed")
            elif isinstance(ins, QRecv):
                for v in self._names((ins.comm,)):
                    self._consume(q, v, path, "USE_AFTER_FREE", "consumed")
                self._bind(q, ins.var, path)
            elif isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
                for v in self._names((ins.qubit,)):
                    self._use(q, v, path)
                for v in self._names((ins.comm,)):
                    self._consume(q, v, path, "USE_AFTER_FREE", "consumed")
            elif isinstance(ins, (Assign, Recv)):
                self._classical(q, ins.var, path)
            elif isinstance(ins, Open):
                self._classical(q, ins.var, path)
            # Send / Close touch no qubit variables
        if not prefix:   # a branch body falling off its end just rejoins
            self._stop(q, (len(body),))
        return q


def lint_linear(system: System) -> list[Diagnostic]:
    """Flag non-linear qubit usage: every qubit is consumed exactly once.

    Errors: DOUBLE_FREE, USE_AFTER_FREE, UNBOUND_QUBIT.  Warning:
    QUBIT_LEAK for a qubit that may still be live when its process stops or
    whose binding is shadowed.  ``if`` branches are analysed separately and
    joined, so "on some path" problems are found without enumerating paths.
    """
    out = _Collector()
    for proc in system.processes:
        _LinearWalk(proc.participant, out).body(proc.body, (), {})
    return out.sorted()


# ---------------------------------------------------------------------------
# session / label sanity
# ---------------------------------------------------------------------------

def _flat(body, prefix: tuple[int, ...]):
    for i, ins in enumerate(body):
        path = prefix + (i,)
        if isinstance(ins, If):
            yield from _flat(ins.then_body, path + (0,))
            yield from _flat(ins.else_body, path + (1,))
        else:
            yield path, ins


def lint_sessions(system: System) -> list[Diagnostic]:
    """Flag communication surfaces that cannot line up.

    Errors: UNPAIRED_GENENT for a generation whose mirrored (partner, label)
    key has no counterpart; AMBIGUOUS_LABEL when a label is reused for a
    second generation between the same processors (two in-flight pairs with
    one name cannot be told apart); OPEN_MISMATCH when the participants
    named by a rendezvous do not all open the same list.  Warnings:
    SEND_NO_RECV / RECV_NO_SEND for per-(destination, label) imbalance —
    teleports and remote-CX halves count as one send/receive each.
    """
    out = _Collector()

    gens: dict[tuple, list] = {}
    sends: dict[tuple, list] = {}
    recvs: dict[tuple, list] = {}
    open_counts: dict[tuple, int] = {}
    open_groups: dict[tuple, dict] = {}

    for proc in system.processes:
        p = proc.participant
        for path, ins in _flat(proc.body, ()):
            if isinstance(ins, GenEnt):
                gens.setdefault((p, ins.partner, ins.label), []).append((p, path))
            elif isinstance(ins, Send):
                sends.setdefault((ins.partner, ins.label), []).append((p, path))
            elif isinstance(ins, Recv):
                recvs.setdefault((p, ins.label), []).append((p, path))
            elif isinstance(ins, QSend):
                sends.setdefault((ins.partner, ins.label), []).append((p, path))
            elif isinstance(ins, QRecv):
                recvs.setdefault((p, ins.label), []).append((p, path))
            elif isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
                sends.setdefault((ins.partner, ins.label), []).append((p, path))
                recvs.setdefault((p, ins.label), []).append((p, path))
            elif isinstance(ins, Open):
                k = open_counts.get((p, ins.participants), 0)
                open_counts[(p, ins.participants)] = k + 1
                open_groups.setdefault((ins.participants, k), {})[p] = (p, path)

    for (a, b, label), lst in gens.items():
        other = gens.get((b, a, label), [])
        for k, (p, path) in enumerate(lst):
            if k >= len(other):
                out.add(p, path, ERROR, "UNPAIRED_GENENT",
                        f"genEnt[{b}]({label}) at p{a} has no counterpart "
                        f"genEnt[{a}]({label}) at p{b}")
        if len(lst) >= 2 and len(other) >= 2:
            for p, path in lst[1:]:
                out.add(p, path, ERROR, "AMBIGUOUS_LABEL",
                        f"label {label!r} is reused for another generation "
                        f"between p{a} and p{b}; the pairings are ambiguous")

    for (plist, _), members in open_groups.items():
        if set(plist) != set(members):
            missing = sorted(set(plist) - set(members))
            extra = sorted(set(members) - set(plist))
            what = []
            if missing:
                what.append("no matching open at "
                            + ", ".join(f"p{m}" for m in missing))
            if extra:
                what.append("openers not in the list: "
                            + ", ".join(f"p{m}" for m in extra))
            for p, path in members.values():
                out.add(p, path, ERROR, "OPEN_MISMATCH",
                        f"open[{','.join(map(str, plist))}] does not agree "
                        f"across its participants ({'; '.join(what)})")

    for (dest, label), lst in sends.items():
        n_recv = len(recvs.get((dest, label), []))
        for k, (p, path) in enumerate(sorted(lst)):
            if k >= n_recv:
                out.add(p, path, WARNING, "SEND_NO_RECV",
                        f"send of label {label!r} to p{dest} has no matching "
                        f"receive there")
    for (dest, label), lst in recvs.items():
        n_send = len(sends.get((dest, label), []))
        for k, (p, path) in enumerate(sorted(lst)):
            if k >= n_send:
                out.add(p, path, WARNING, "RECV_NO_SEND",
                        f"receive of label {label!r} at p{dest} has no "
                        f"matching send to it")

    return out.sorted()
