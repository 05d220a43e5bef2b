"""Small-step concurrent runtime.

A running system is a set of located processes plus four stores:

* data pools   — free data qubits per processor,
* comm pools   — free communication qubits per *directed link side*
                 ``(owner, peer)``; a link with capacity E gives each side E,
* the heap     — undelivered classical messages keyed ``(session, receiver)``,
                 FIFO per label,
* the backend  — quantum state (statevector or abstract bookkeeping).

``enabled_transitions`` lists every transition the current state admits under
an issue mode; ``step`` applies one.  Blocking is represented by absence: an
instruction that cannot fire simply contributes no transition.  genEnt,
session open and the rcxc/rcxt pair are joint transitions involving two or
more processes at once.

Issue modes
-----------
``heads``     a process may only issue its first pending instruction
              (program order).
``dataflow``  a process may issue any pending instruction that has no
              conflict (shared variable, same-channel message, barrier) with
              an earlier pending one — out-of-order issue as done by
              dependency-resolving node controllers.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache

from .arch import Architecture
from .ast import (
    And, ApplyGate, Assign, BitLit, Close, EntSwap, Expr, Free, GenEnt, If,
    Init, Instr, Measure, Not, Open, Process, QRecv, QSend, Recv,
    RemoteCxControl, RemoteCxTarget, Send, Stop, System, Var, Xor,
    instruction_count,
)
from .errors import ConfigMismatch, EvalError, IllegalChoice, NotStuck
from .qstate import AbstractBackend, BornRule, OutcomeOracle, Scripted, StatevectorBackend

__all__ = [
    "QubitRef", "SessionId", "Transition", "RuntimeState", "RunResult",
    "StuckReport", "SchedulerPolicy", "RoundRobin", "SeededRandom",
    "InOrderPerProcess", "DependencyResolved",
    "make_state", "enabled_transitions", "step", "run",
    "expand_derived", "classify_stuck", "explore", "ExploreResult",
]


# ---------------------------------------------------------------------------
# runtime values
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class QubitRef:
    """A physical qubit: ``data`` qubits live in a processor's data pool,
    ``comm`` qubits in one side of a link's pool."""

    kind: str           # "data" | "comm"
    uid: int
    home: int           # processor whose pool it returns to
    peer: int | None    # for comm qubits: the link's other endpoint
    index: int

    def __str__(self):
        if self.kind == "data":
            return f"q{self.home}.{self.index}"
        return f"c{self.home}>{self.peer}.{self.index}"


@dataclass(frozen=True, slots=True)
class SessionId:
    sid: int

    def __str__(self):
        return f"s{self.sid}"


def _fmt(v) -> str:
    return str(v)


# ---------------------------------------------------------------------------
# conflict analysis (dataflow issue)
# ---------------------------------------------------------------------------

_BARRIERS = (If, Open, Close, Stop)
_CHANNEL_OPS = (Send, Recv, QSend, QRecv, RemoteCxControl, RemoteCxTarget)


@lru_cache(maxsize=None)
def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BitLit):
        return set()
    if isinstance(e, Not):
        return expr_vars(e.operand)
    if isinstance(e, (And, Xor)):
        return expr_vars(e.left) | expr_vars(e.right)
    raise TypeError(e)


@lru_cache(maxsize=None)
def instr_vars(ins: Instr) -> set[str]:
    """All variables an instruction binds or reads."""
    if isinstance(ins, Stop):
        return set()
    if isinstance(ins, Open):
        return {ins.var}
    if isinstance(ins, Close):
        return {ins.session}
    if isinstance(ins, (Init, Free)):
        return {ins.var}
    if isinstance(ins, Assign):
        return {ins.var} | expr_vars(ins.expr)
    if isinstance(ins, ApplyGate):
        out = set()
        for a in ins.args:
            out |= expr_vars(a)
        if ins.exponent is not None:
            out |= expr_vars(ins.exponent)
        return out
    if isinstance(ins, Measure):
        out = {ins.var}
        for a in ins.args:
            out |= expr_vars(a)
        return out
    if isinstance(ins, GenEnt):
        return {ins.var}
    if isinstance(ins, EntSwap):
        return {ins.var1, ins.var2} | expr_vars(ins.arg1) | expr_vars(ins.arg2)
    if isinstance(ins, QSend):
        return {ins.session} | expr_vars(ins.payload) | expr_vars(ins.comm)
    if isinstance(ins, QRecv):
        return {ins.var, ins.session} | expr_vars(ins.comm)
    if isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
        return {ins.session} | expr_vars(ins.qubit) | expr_vars(ins.comm)
    if isinstance(ins, Send):
        return {ins.session} | expr_vars(ins.value)
    if isinstance(ins, Recv):
        return {ins.session, ins.var}
    if isinstance(ins, If):
        return expr_vars(ins.cond)  # bodies are spliced only when it fires
    raise TypeError(ins)


@lru_cache(maxsize=None)
def instr_reads(ins: Instr) -> set[str]:
    """Variables an instruction reads (before binding its own)."""
    if isinstance(ins, (Stop, Open, Init, GenEnt)):
        return set()
    if isinstance(ins, Close):
        return {ins.session}
    if isinstance(ins, Free):
        return {ins.var}
    if isinstance(ins, Assign):
        return expr_vars(ins.expr)
    if isinstance(ins, ApplyGate):
        out = set()
        for a in ins.args:
            out |= expr_vars(a)
        if ins.exponent is not None:
            out |= expr_vars(ins.exponent)
        return out
    if isinstance(ins, Measure):
        out = set()
        for a in ins.args:
            out |= expr_vars(a)
        return out
    if isinstance(ins, EntSwap):
        return expr_vars(ins.arg1) | expr_vars(ins.arg2)
    if isinstance(ins, QSend):
        return {ins.session} | expr_vars(ins.payload) | expr_vars(ins.comm)
    if isinstance(ins, QRecv):
        return {ins.session} | expr_vars(ins.comm)
    if isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
        return {ins.session} | expr_vars(ins.qubit) | expr_vars(ins.comm)
    if isinstance(ins, Send):
        return {ins.session} | expr_vars(ins.value)
    if isinstance(ins, Recv):
        return {ins.session}
    if isinstance(ins, If):
        return expr_vars(ins.cond)
    raise TypeError(ins)


def _channel_key(ins: Instr):
    if isinstance(ins, (Send, Recv, QSend, QRecv, RemoteCxControl, RemoteCxTarget)):
        return (ins.session, ins.label)
    return None


@lru_cache(maxsize=None)
def _data_vars(ins: Instr) -> set[str]:
    """Variables relevant for issue ordering.

    The session handle is excluded: it is never mutated after ``open``, and
    messages on distinct labels are independent queues, so ordering through
    the shared handle would be spurious.  Per-label FIFO is enforced by the
    channel key below, and ``open``/``close`` are barriers anyway.
    """
    v = set(instr_vars(ins))
    s = getattr(ins, "session", None)
    if s is not None:
        v.discard(s)
    return v


@lru_cache(maxsize=None)
def conflicts(earlier: Instr, later: Instr) -> bool:
    """May ``later`` not be issued past a pending ``earlier``?"""
    if isinstance(earlier, _BARRIERS) or isinstance(later, _BARRIERS):
        return True
    if _data_vars(earlier) & _data_vars(later):
        return True
    ck1, ck2 = _channel_key(earlier), _channel_key(later)
    if ck1 is not None and ck1 == ck2:
        return True  # same (session, label): preserve per-label FIFO order
    if isinstance(earlier, GenEnt) and isinstance(later, GenEnt):
        if (earlier.partner, earlier.label) == (later.partner, later.label):
            return True  # identical pairing key: order disambiguates matching
    return False


# ---------------------------------------------------------------------------
# process / state
# ---------------------------------------------------------------------------

class ProcState:
    __slots__ = ("participant", "body", "done", "env")

    def __init__(self, participant: int, body, done=None, env=None):
        self.participant = participant
        self.body: list[Instr] = list(body)
        self.done: set[int] = set() if done is None else set(done)
        self.env: dict = {} if env is None else dict(env)

    def pending(self) -> list[int]:
        return [i for i in range(len(self.body)) if i not in self.done]

    def is_terminal(self) -> bool:
        p = self.pending()
        return not p or isinstance(self.body[p[0]], Stop)

    def issuable(self, mode: str) -> list[int]:
        """Indices this process may issue, before resource checks."""
        p = self.pending()
        if not p or isinstance(self.body[p[0]], Stop):
            return []
        if mode == "heads":
            return [p[0]]
        out = []
        for pos, i in enumerate(p):
            ins = self.body[i]
            if any(conflicts(self.body[j], ins) for j in p[:pos]):
                continue
            out.append(i)
        return out

    def clone(self) -> "ProcState":
        return ProcState(self.participant, self.body, self.done, self.env)

    def key(self):
        env_items = tuple(sorted(self.env.items()))
        return (self.participant, tuple(self.body), frozenset(self.done), env_items)


@dataclass(frozen=True)
class Transition:
    kind: str                      # op mnemonic
    procs: tuple[int, ...]         # process indices, ascending
    indices: tuple[int, ...]       # instruction index per proc (same order)
    detail: str = ""

    @property
    def ident(self):
        return (self.kind, self.procs, self.indices)

    def sort_key(self):
        return (self.procs[0], self.indices[0], self.kind, self.procs, self.indices)


class RuntimeState:
    def __init__(self, system: System, arch: Architecture, backend, mode: str = "heads"):
        for pid in system.participants:
            if pid not in arch.ids:
                raise ConfigMismatch(
                    f"program uses participant {pid}, absent from architecture "
                    f"{arch.name}")
        self.arch = arch
        self.backend = backend
        self.mode = mode
        self.processes = [ProcState(p.participant, p.body) for p in system.processes]
        self.data_pool: dict[int, deque] = {}
        self.comm_pool: dict[tuple[int, int], deque] = {}
        self.capacity: dict = {}
        uid = 0
        for pid in sorted(arch.ids):
            pool = deque()
            for k in range(arch.data_capacity(pid)):
                pool.append((QubitRef("data", uid, pid, None, k), -1))
                uid += 1
            self.data_pool[pid] = pool
            self.capacity[pid] = len(pool)
        for ln in sorted(arch.links, key=lambda l: (min(l.a, l.b), max(l.a, l.b))):
            for owner, peer in ((min(ln.a, ln.b), max(ln.a, ln.b)),
                                (max(ln.a, ln.b), min(ln.a, ln.b))):
                pool = deque()
                for k in range(ln.comm_qubits):
                    pool.append((QubitRef("comm", uid, owner, peer, k), -1))
                    uid += 1
                self.comm_pool[(owner, peer)] = pool
                self.capacity[(owner, peer)] = len(pool)
        self.holders: dict[int, int] = {}       # qubit uid -> process index
        self.ref_of: dict[int, QubitRef] = {}   # qubit uid -> ref
        self.heap: dict[tuple, list] = {}       # (sid, pid) -> [(label, value, step)]
        self.next_session = 0
        self.step_no = 0
        self.var_birth: dict[tuple[int, str], int] = {}
        self.session_birth: dict[int, int] = {}

    # -- helpers ------------------------------------------------------------

    def lookup(self, ip: int, name: str):
        return self.processes[ip].env.get(name)

    def eval(self, ip: int, e: Expr):
        env = self.processes[ip].env
        if isinstance(e, BitLit):
            return e.value
        if isinstance(e, Var):
            if e.name not in env:
                raise EvalError(f"unbound variable {e.name!r} in process {ip}")
            return env[e.name]
        if isinstance(e, Not):
            return 1 - self._bit(self.eval(ip, e.operand))
        if isinstance(e, And):
            return self._bit(self.eval(ip, e.left)) & self._bit(self.eval(ip, e.right))
        if isinstance(e, Xor):
            return self._bit(self.eval(ip, e.left)) ^ self._bit(self.eval(ip, e.right))
        raise TypeError(e)

    @staticmethod
    def _bit(v):
        if not isinstance(v, int):
            raise EvalError(f"expected a bit, got {v}")
        return v

    def _vars_bound(self, ip: int, ins: Instr) -> bool:
        env = self.processes[ip].env
        return all(n in env for n in instr_reads(ins))

    def _owned(self, ip: int, v) -> bool:
        """Is ``v`` a qubit currently held by process ``ip``?  Guards against
        stale references (alias used after free, refs smuggled over sends)."""
        return isinstance(v, QubitRef) and self.holders.get(v.uid) == ip

    def heap_list(self, sid: int, pid: int) -> list:
        return self.heap.setdefault((sid, pid), [])

    def check_conservation(self):
        """Every pool's free + in-use count equals its capacity."""
        use = Counter()
        for uid, ip in self.holders.items():
            ref = self.ref_of[uid]
            key = ref.home if ref.kind == "data" else (ref.home, ref.peer)
            use[key] += 1
        for pid, pool in self.data_pool.items():
            assert len(pool) + use[pid] == self.capacity[pid], \
                f"data pool {pid} accounting broken"
        for key, pool in self.comm_pool.items():
            assert len(pool) + use[key] == self.capacity[key], \
                f"comm pool {key} accounting broken"

    def clone(self) -> "RuntimeState":
        new = object.__new__(RuntimeState)
        new.arch = self.arch
        new.mode = self.mode
        new.backend = _clone_backend(self.backend)
        new.processes = [p.clone() for p in self.processes]
        new.data_pool = {k: deque(v) for k, v in self.data_pool.items()}
        new.comm_pool = {k: deque(v) for k, v in self.comm_pool.items()}
        new.capacity = self.capacity
        new.holders = dict(self.holders)
        new.ref_of = dict(self.ref_of)
        new.heap = {k: list(v) for k, v in self.heap.items()}
        new.next_session = self.next_session
        new.step_no = self.step_no
        new.var_birth = dict(self.var_birth)
        new.session_birth = dict(self.session_birth)
        return new

    def key(self):
        """Canonical hashable snapshot (classical part only — meant for the
        abstract backend, where the classical part is the whole state)."""
        return (
            tuple(p.key() for p in self.processes),
            tuple(sorted((k, tuple(r.uid for r, _ in v)) for k, v in self.data_pool.items())),
            tuple(sorted((k, tuple(r.uid for r, _ in v)) for k, v in self.comm_pool.items())),
            tuple(sorted((k, tuple((l, str(val)) for l, val, _ in v))
                         for k, v in self.heap.items() if v)),
            self.next_session,
        )


def _clone_backend(be):
    if isinstance(be, AbstractBackend):
        new = AbstractBackend(oracle=be.oracle)
        new._live = set(be._live)
        return new
    raise TypeError("only abstract-backend states can be cloned")


# ---------------------------------------------------------------------------
# enabled transitions
# ---------------------------------------------------------------------------

def enabled_transitions(state: RuntimeState, mode: str | None = None) -> list[Transition]:
    """All transitions the state admits, deterministically ordered."""
    mode = mode or state.mode
    issuable: list[list[int]] = [p.issuable(mode) for p in state.processes]

    out: list[Transition] = []
    genent_sites = []   # (ip, idx, pid, partner, label)
    rcxc_sites = []
    rcxt_sites = []
    open_sites = []

    for ip, proc in enumerate(state.processes):
        pid = proc.participant
        for i in issuable[ip]:
            ins = proc.body[i]
            if isinstance(ins, GenEnt):
                genent_sites.append((ip, i, pid, ins.partner, ins.label))
                continue
            if isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
                try:
                    ok = (state._vars_bound(ip, ins)
                          and isinstance(state.eval(ip, Var(ins.session)), SessionId)
                          and state._owned(ip, state.eval(ip, ins.qubit))
                          and state._owned(ip, state.eval(ip, ins.comm)))
                except EvalError:
                    ok = False
                if ok:
                    dest = rcxc_sites if isinstance(ins, RemoteCxControl) else rcxt_sites
                    dest.append((ip, i, pid, ins))
                continue
            if isinstance(ins, Open):
                if pid in ins.participants:
                    open_sites.append((ip, i, pid, ins.participants))
                continue
            t = _local_transition(state, ip, i, ins)
            if t is not None:
                out.append(t)

    # genEnt rendezvous: matching labels, mutually-named participants, both
    # pool sides non-empty
    for (ip, i, pid, partner, label) in genent_sites:
        for (jp, j, qid, qpartner, qlabel) in genent_sites:
            if jp <= ip:
                continue
            if qid == partner and qpartner == pid and qlabel == label:
                if state.arch.link(pid, qid) is None:
                    continue
                if state.comm_pool[(pid, qid)] and state.comm_pool[(qid, pid)]:
                    out.append(Transition(
                        "genent", (ip, jp), (i, j),
                        f"p{pid}~p{qid} label {label}"))

    # remote-CX rendezvous
    for (ip, i, pid, ci) in rcxc_sites:
        sid_c = state.eval(ip, Var(ci.session))
        for (jp, j, qid, ti) in rcxt_sites:
            if jp == ip:
                continue
            if ti.partner != pid or ci.partner != qid or ti.label != ci.label:
                continue
            sid_t = state.eval(jp, Var(ti.session))
            if sid_c == sid_t:
                a, b = (ip, jp) if ip < jp else (jp, ip)
                ia, ib = (i, j) if ip < jp else (j, i)
                out.append(Transition(
                    "rcx", (a, b), (ia, ib),
                    f"p{pid}~p{qid} label {ci.label}"))

    # session open: one process per named participant, all present
    by_group: dict[tuple[int, ...], dict[int, list[tuple[int, int]]]] = {}
    for (ip, i, pid, parts) in open_sites:
        by_group.setdefault(parts, {}).setdefault(pid, []).append((ip, i))
    for parts, sites in by_group.items():
        if set(parts) != set(sites):
            continue
        for combo in itertools.product(*(sites[pid] for pid in parts)):
            ips = tuple(c[0] for c in combo)
            if len(set(ips)) != len(ips):
                continue
            order = sorted(range(len(ips)), key=lambda k: ips[k])
            out.append(Transition(
                "open",
                tuple(ips[k] for k in order),
                tuple(combo[k][1] for k in order),
                "participants " + ",".join(str(p) for p in parts)))

    out.sort(key=Transition.sort_key)
    return out


def _local_transition(state: RuntimeState, ip: int, i: int, ins: Instr) -> Transition | None:
    try:
        return _local_ready(state, ip, i, ins)
    except EvalError:
        # type fault (bit where qubit expected, etc.): permanently blocked,
        # surfaces through classify_stuck rather than crashing the scheduler
        return None


def _local_ready(state: RuntimeState, ip: int, i: int, ins: Instr) -> Transition | None:
    pid = state.processes[ip].participant
    if isinstance(ins, Stop):
        return None
    if not state._vars_bound(ip, ins):
        return None
    if isinstance(ins, Init):
        if not state.data_pool[pid]:
            return None
        return Transition("init", (ip,), (i,), ins.var)
    if isinstance(ins, Free):
        v = state.lookup(ip, ins.var)
        if not state._owned(ip, v):
            return None
        return Transition("free", (ip,), (i,), str(v))
    if isinstance(ins, Assign):
        state.eval(ip, ins.expr)  # must be well-typed before we commit
        return Transition("assign", (ip,), (i,), ins.var)
    if isinstance(ins, ApplyGate):
        qs = [state.eval(ip, a) for a in ins.args]
        if not all(state._owned(ip, q) for q in qs):
            return None
        if len({q.uid for q in qs}) != len(qs):
            return None
        if ins.exponent is not None:
            state._bit(state.eval(ip, ins.exponent))
        return Transition("gate", (ip,), (i,), ins.gate)
    if isinstance(ins, Measure):
        qs = [state.eval(ip, a) for a in ins.args]
        if not all(state._owned(ip, q) for q in qs):
            return None
        return Transition("measure", (ip,), (i,), ins.var)
    if isinstance(ins, EntSwap):
        q1, q2 = state.eval(ip, ins.arg1), state.eval(ip, ins.arg2)
        if not (state._owned(ip, q1) and state._owned(ip, q2)) or q1.uid == q2.uid:
            return None
        return Transition("entswap", (ip,), (i,), f"{q1},{q2}")
    if isinstance(ins, QSend):
        sid = state.eval(ip, Var(ins.session))
        if not isinstance(sid, SessionId):
            return None
        q, c = state.eval(ip, ins.payload), state.eval(ip, ins.comm)
        if not (state._owned(ip, q) and state._owned(ip, c)) or q.uid == c.uid:
            return None
        return Transition("qsend", (ip,), (i,), f"to p{ins.partner}")
    if isinstance(ins, QRecv):
        sid = state.eval(ip, Var(ins.session))
        if not isinstance(sid, SessionId):
            return None
        if not state._owned(ip, state.eval(ip, ins.comm)):
            return None
        if not state.data_pool[pid]:
            return None
        msgs = [m for m in state.heap_list(sid.sid, pid) if m[0] == ins.label]
        if len(msgs) < 2:
            return None
        return Transition("qrecv", (ip,), (i,), ins.var)
    if isinstance(ins, Send):
        sid = state.eval(ip, Var(ins.session))
        if not isinstance(sid, SessionId):
            return None
        return Transition("send", (ip,), (i,), f"{ins.label} to p{ins.partner}")
    if isinstance(ins, Recv):
        sid = state.eval(ip, Var(ins.session))
        if not isinstance(sid, SessionId):
            return None
        if not any(m[0] == ins.label for m in state.heap_list(sid.sid, pid)):
            return None
        return Transition("recv", (ip,), (i,), ins.label)
    if isinstance(ins, Close):
        return Transition("close", (ip,), (i,), ins.session)
    if isinstance(ins, If):
        state._bit(state.eval(ip, ins.cond))
        return Transition("if", (ip,), (i,), "")
    return None


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def step(state: RuntimeState, transition: Transition, *, trusted: bool = False) -> dict:
    """Apply one transition; returns its trace record.

    Raises :class:`IllegalChoice` when the transition is not currently
    enabled (skipped when ``trusted``, for callers that just computed it).
    """
    if not trusted:
        if transition.ident not in {t.ident for t in enabled_transitions(state)}:
            raise IllegalChoice(f"transition {transition} is not enabled")
    n = state.step_no
    deps: set[int] = set()
    outcome = None
    kind = transition.kind

    def bind(ip, var, value):
        state.processes[ip].env[var] = value
        state.var_birth[(ip, var)] = n

    def read_deps(ip, ins):
        for name in instr_reads(ins):
            b = state.var_birth.get((ip, name))
            if b is not None:
                deps.add(b)

    def unbind(ip, expr):
        if isinstance(expr, Var):
            state.processes[ip].env.pop(expr.name, None)

    def take_data(ip, pid):
        ref, ret_step = state.data_pool[pid].popleft()
        if ret_step >= 0:
            deps.add(ret_step)
        state.holders[ref.uid] = ip
        state.ref_of[ref.uid] = ref
        return ref

    def take_comm(ip, owner, peer):
        ref, ret_step = state.comm_pool[(owner, peer)].popleft()
        if ret_step >= 0:
            deps.add(ret_step)
        state.holders[ref.uid] = ip
        state.ref_of[ref.uid] = ref
        return ref

    def give_back(ref):
        del state.holders[ref.uid]
        if ref.kind == "data":
            state.data_pool[ref.home].append((ref, n))
        else:
            state.comm_pool[(ref.home, ref.peer)].append((ref, n))

    procs = transition.procs
    indices = transition.indices
    first = state.processes[procs[0]]
    ins0 = first.body[indices[0]]

    if kind == "open":
        sid = SessionId(state.next_session)
        state.next_session += 1
        state.session_birth[sid.sid] = n
        for ip, i in zip(procs, indices):
            ins = state.processes[ip].body[i]
            bind(ip, ins.var, sid)
    elif kind == "genent":
        ip, jp = procs
        i, j = indices
        gi = state.processes[ip].body[i]
        gj = state.processes[jp].body[j]
        pid, qid = state.processes[ip].participant, state.processes[jp].participant
        qa = take_comm(ip, pid, qid)
        qb = take_comm(jp, qid, pid)
        state.backend.make_pair(qa.uid, qb.uid)
        bind(ip, gi.var, qa)
        bind(jp, gj.var, qb)
    elif kind == "rcx":
        ip, jp = procs
        i, j = indices
        ci = state.processes[ip].body[i]
        ti = state.processes[jp].body[j]
        if isinstance(ci, RemoteCxTarget):   # procs are sorted; control may be second
            ip, jp = jp, ip
            i, j = j, i
            ci, ti = ti, ci
        read_deps(ip, ci)
        read_deps(jp, ti)
        qc = state.eval(ip, ci.qubit)
        cc = state.eval(ip, ci.comm)
        qt = state.eval(jp, ti.qubit)
        ct = state.eval(jp, ti.comm)
        state.backend.apply_gate("CX", [qc.uid, qt.uid])
        # the comm pair is mutually entangled but clean of the data qubits
        state.backend.discard(cc.uid, quiet=True)
        state.backend.discard(ct.uid, quiet=True)
        give_back(cc)
        give_back(ct)
        unbind(ip, ci.comm)
        unbind(jp, ti.comm)
    elif kind == "init":
        ref = take_data(procs[0], first.participant)
        state.backend.alloc(ref.uid)
        bind(procs[0], ins0.var, ref)
    elif kind == "free":
        read_deps(procs[0], ins0)
        ref = state.lookup(procs[0], ins0.var)
        state.backend.discard(ref.uid)
        give_back(ref)
        del first.env[ins0.var]
    elif kind == "assign":
        read_deps(procs[0], ins0)
        bind(procs[0], ins0.var, state.eval(procs[0], ins0.expr))
    elif kind == "gate":
        read_deps(procs[0], ins0)
        qs = [state.eval(procs[0], a) for a in ins0.args]
        exp = None
        if ins0.exponent is not None:
            exp = state._bit(state.eval(procs[0], ins0.exponent))
        state.backend.apply_gate(ins0.gate, [q.uid for q in qs], ins0.params, exp)
    elif kind == "measure":
        read_deps(procs[0], ins0)
        qs = [state.eval(procs[0], a) for a in ins0.args]
        outcome = state.backend.measure([q.uid for q in qs])
        bind(procs[0], ins0.var, outcome)
    elif kind == "entswap":
        read_deps(procs[0], ins0)
        q1 = state.eval(procs[0], ins0.arg1)
        q2 = state.eval(procs[0], ins0.arg2)
        state.backend.apply_gate("CX", [q1.uid, q2.uid])
        state.backend.apply_gate("H", [q1.uid])
        w1 = state.backend.measure([q1.uid])
        w2 = state.backend.measure([q2.uid])
        state.backend.discard(q1.uid)
        state.backend.discard(q2.uid)
        give_back(q1)
        give_back(q2)
        unbind(procs[0], ins0.arg1)
        unbind(procs[0], ins0.arg2)
        bind(procs[0], ins0.var1, w1)
        bind(procs[0], ins0.var2, w2)
        outcome = (w1, w2)
    elif kind == "qsend":
        read_deps(procs[0], ins0)
        sid = state.eval(procs[0], Var(ins0.session))
        q = state.eval(procs[0], ins0.payload)
        c = state.eval(procs[0], ins0.comm)
        state.backend.apply_gate("CX", [q.uid, c.uid])
        state.backend.apply_gate("H", [q.uid])
        v1 = state.backend.measure([q.uid])
        v2 = state.backend.measure([c.uid])
        h = state.heap_list(sid.sid, ins0.partner)
        h.append((ins0.label, v1, n))
        h.append((ins0.label, v2, n))
        state.backend.discard(q.uid)
        state.backend.discard(c.uid)
        give_back(q)
        give_back(c)
        unbind(procs[0], ins0.payload)
        unbind(procs[0], ins0.comm)
        outcome = (v1, v2)
    elif kind == "qrecv":
        read_deps(procs[0], ins0)
        pid = first.participant
        sid = state.eval(procs[0], Var(ins0.session))
        c = state.eval(procs[0], ins0.comm)
        fresh = take_data(procs[0], pid)
        state.backend.alloc(fresh.uid)
        h = state.heap_list(sid.sid, pid)
        v1 = _pop_label(h, ins0.label, deps)
        v2 = _pop_label(h, ins0.label, deps)
        state.backend.apply_gate("Z", [c.uid], exponent_bit=v1)
        state.backend.apply_gate("X", [c.uid], exponent_bit=v2)
        for pair in ([fresh.uid, c.uid], [c.uid, fresh.uid], [fresh.uid, c.uid]):
            state.backend.apply_gate("CX", pair)   # SWAP as 3 CX
        state.backend.discard(c.uid, quiet=True)
        give_back(c)
        unbind(procs[0], ins0.comm)
        bind(procs[0], ins0.var, fresh)
    elif kind == "send":
        read_deps(procs[0], ins0)
        sid = state.eval(procs[0], Var(ins0.session))
        v = state.eval(procs[0], ins0.value)
        state.heap_list(sid.sid, ins0.partner).append((ins0.label, v, n))
    elif kind == "recv":
        read_deps(procs[0], ins0)
        sid = state.eval(procs[0], Var(ins0.session))
        v = _pop_label(state.heap_list(sid.sid, first.participant), ins0.label, deps)
        bind(procs[0], ins0.var, v)
        outcome = v if isinstance(v, int) else None
    elif kind == "close":
        read_deps(procs[0], ins0)
    elif kind == "if":
        read_deps(procs[0], ins0)
        b = state._bit(state.eval(procs[0], ins0.cond))
        chosen = ins0.then_body if b else ins0.else_body
        i = indices[0]
        first.body[i:i + 1] = list(chosen)
        # done indices are all < i (if is a barrier), so they stay valid
        state.step_no += 1
        rec = _record(state, n, transition, deps, b)
        # the if itself is consumed by the splice; nothing to mark done
        state.check_conservation()
        return rec
    else:  # pragma: no cover
        raise IllegalChoice(f"unknown transition kind {kind}")

    for ip, i in zip(procs, indices):
        state.processes[ip].done.add(i)
    state.step_no += 1
    rec = _record(state, n, transition, deps, outcome)
    state.check_conservation()
    return rec


def _pop_label(h: list, label: str, deps: set):
    for k, (l, v, born) in enumerate(h):
        if l == label:
            del h[k]
            deps.add(born)
            return v
    raise IllegalChoice(f"no message with label {label}")


def _record(state, n, transition, deps, outcome) -> dict:
    parts = [state.processes[ip].participant for ip in transition.procs]
    return {
        "step": n,
        "op": transition.kind,
        "procs": list(transition.procs),
        "participants": parts,
        "indices": list(transition.indices),
        "detail": transition.detail,
        "deps": sorted(deps),
        "outcome": list(outcome) if isinstance(outcome, tuple) else outcome,
    }


# ---------------------------------------------------------------------------
# scheduler policies
# ---------------------------------------------------------------------------

class SchedulerPolicy:
    """Deterministic transition chooser.  ``mode`` fixes the issue relation."""

    mode = "heads"
    name = "policy"

    def choose(self, transitions: list[Transition], state: RuntimeState) -> Transition:
        raise NotImplementedError


class InOrderPerProcess(SchedulerPolicy):
    """Always the lowest (process, instruction) transition."""

    mode = "heads"
    name = "inorder"

    def choose(self, transitions, state):
        return transitions[0]


class RoundRobin(SchedulerPolicy):
    """Rotate fairly over processes (head-of-process issue)."""

    mode = "heads"
    name = "roundrobin"

    def __init__(self):
        self._next = 0

    def choose(self, transitions, state):
        nprocs = len(state.processes)
        for off in range(nprocs):
            want = (self._next + off) % nprocs
            for t in transitions:
                if t.procs[0] == want:
                    self._next = (want + 1) % nprocs
                    return t
        return transitions[0]


class SeededRandom(SchedulerPolicy):
    """Uniform choice among enabled transitions from a seeded generator."""

    mode = "heads"
    name = "random"

    def __init__(self, seed: int = 0):
        import numpy as np
        self._rng = np.random.default_rng([seed, 0x5C])

    def choose(self, transitions, state):
        return transitions[int(self._rng.integers(len(transitions)))]


class DependencyResolved(SchedulerPolicy):
    """Out-of-order issue: any pending instruction without a conflict against
    an earlier pending one may fire; lowest (process, index) wins."""

    mode = "dataflow"
    name = "depresolved"

    def choose(self, transitions, state):
        return transitions[0]


_POLICIES = {
    "inorder": InOrderPerProcess,
    "roundrobin": RoundRobin,
    "random": SeededRandom,
    "depresolved": DependencyResolved,
}


def make_policy(name: str, seed: int = 0) -> SchedulerPolicy:
    try:
        cls = _POLICIES[name]
    except KeyError:
        raise ConfigMismatch(
            f"unknown policy {name!r}; choose from {sorted(_POLICIES)}") from None
    return cls(seed) if cls is SeededRandom else cls()


# ---------------------------------------------------------------------------
# stuck classification
# ---------------------------------------------------------------------------

@dataclass
class StuckReport:
    kind: str                                  # deadlock | qubit_exhaustion |
                                               # message_starvation | unknown
    participant: int | None = None             # for qubit_exhaustion
    session: int | None = None                 # for message_starvation
    label: str | None = None
    cycle: list = field(default_factory=list)  # [(proc index, participant)]
    edges: list = field(default_factory=list)  # (from, to, resource)
    blocked: dict = field(default_factory=dict)  # proc index -> reason

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "participant": self.participant,
            "session": self.session,
            "label": self.label,
            "cycle": [list(c) for c in self.cycle],
            "edges": [list(e) for e in self.edges],
            "blocked": {str(k): v for k, v in self.blocked.items()},
        }

    def __str__(self):
        if self.kind == "deadlock":
            ring = " -> ".join(f"P{i}@p{p}" for i, p in self.cycle)
            return f"deadlock: wait cycle {ring}"
        if self.kind == "qubit_exhaustion":
            return f"qubit exhaustion at processor {self.participant}"
        if self.kind == "message_starvation":
            return (f"message starvation: nobody can send "
                    f"s{self.session}:{self.label}")
        return "stuck (mixed or unknown cause)"


def _pending_sends(state: RuntimeState, sid: int, pid: int, label: str) -> list[int]:
    """Processes that still hold an unexecuted send that could produce
    a (session, receiver, label) message."""
    out = []
    for jp, proc in enumerate(state.processes):
        for i in proc.pending():
            ins = proc.body[i]
            if isinstance(ins, Send) and ins.partner == pid and ins.label == label:
                sval = proc.env.get(ins.session)
                if sval is None or (isinstance(sval, SessionId) and sval.sid == sid):
                    out.append(jp)
            elif isinstance(ins, QSend) and ins.partner == pid and ins.label == label:
                sval = proc.env.get(ins.session)
                if sval is None or (isinstance(sval, SessionId) and sval.sid == sid):
                    out.append(jp)
    return out


def classify_stuck(state: RuntimeState, mode: str | None = None) -> StuckReport:
    """Explain why a stuck state is stuck.

    Builds the wait-for graph over processes; a cycle through two or more
    distinct processes is a deadlock, an empty pool with no cycle is qubit
    exhaustion, a receive nobody can ever answer is message starvation.

    Raises :class:`NotStuck` when the state still has transitions (or has
    terminated cleanly).
    """
    mode = mode or state.mode
    if enabled_transitions(state, mode):
        raise NotStuck("state has enabled transitions")
    stalled = [ip for ip, p in enumerate(state.processes) if not p.is_terminal()]
    if not stalled:
        raise NotStuck("all processes terminated")

    edges: list[tuple[int, int, str]] = []
    blocked: dict[int, str] = {}
    cat: dict[int, set[str]] = {ip: set() for ip in stalled}
    pool_blocked: list[tuple[int, int]] = []   # (proc, participant)
    starved_recv: list[tuple[int, int, str]] = []   # (proc, sid, label)

    def holders_of(key) -> list[tuple[int, str]]:
        out = []
        for uid, jp in state.holders.items():
            ref = state.ref_of[uid]
            k = ref.home if ref.kind == "data" else (ref.home, ref.peer)
            if k == key:
                out.append((jp, str(ref)))
        return sorted(out)

    for ip in stalled:
        proc = state.processes[ip]
        pid = proc.participant
        reasons = []
        for i in proc.issuable(mode):
            ins = proc.body[i]
            if isinstance(ins, GenEnt):
                link = state.arch.link(pid, ins.partner)
                if link is None:
                    cat[ip].add("other")
                    reasons.append(f"genEnt over non-existent link p{pid}-p{ins.partner}")
                    continue
                waiting = False
                for key in ((pid, ins.partner), (ins.partner, pid)):
                    if not state.comm_pool[key]:
                        waiting = True
                        cat[ip].add("wait")
                        for jp, qname in holders_of(key):
                            if jp != ip:
                                edges.append((ip, jp, qname))
                        reasons.append(
                            f"genEnt({ins.label}): comm pool {key[0]}->{key[1]} empty")
                if not waiting:
                    partners = [
                        jp for jp, q in enumerate(state.processes)
                        if jp != ip and q.participant == ins.partner
                        and any(isinstance(q.body[k], GenEnt)
                                and q.body[k].partner == pid
                                and q.body[k].label == ins.label
                                for k in q.pending())
                    ]
                    if partners:
                        cat[ip].add("wait")
                        for jp in partners:
                            edges.append((ip, jp, f"genEnt({ins.label}) partner"))
                        reasons.append(f"genEnt({ins.label}): partner not ready")
                    else:
                        cat[ip].add("other")
                        reasons.append(f"genEnt({ins.label}): no matching partner")
            elif isinstance(ins, (Init, QRecv)):
                if not state.data_pool[pid]:
                    cat[ip].add("pool")
                    pool_blocked.append((ip, pid))
                    for jp, qname in holders_of(pid):
                        if jp != ip:
                            edges.append((ip, jp, qname))
                    reasons.append(f"{'init' if isinstance(ins, Init) else 'qrecv'}: "
                                   f"no free data qubit at p{pid}")
                if isinstance(ins, QRecv):
                    sval = proc.env.get(ins.session)
                    if isinstance(sval, SessionId):
                        have = sum(1 for m in state.heap_list(sval.sid, pid)
                                   if m[0] == ins.label)
                        if have < 2:
                            senders = _pending_sends(state, sval.sid, pid, ins.label)
                            for jp in senders:
                                if jp != ip:
                                    edges.append((ip, jp, f"message {ins.label}"))
                            if senders:
                                cat[ip].add("wait")
                            else:
                                cat[ip].add("recv")
                                starved_recv.append((ip, sval.sid, ins.label))
                            reasons.append(f"qrecv: waiting for {2 - have} message(s) "
                                           f"labelled {ins.label}")
            elif isinstance(ins, Recv):
                sval = proc.env.get(ins.session)
                if isinstance(sval, SessionId):
                    senders = _pending_sends(state, sval.sid, pid, ins.label)
                    for jp in senders:
                        if jp != ip:
                            edges.append((ip, jp, f"message {ins.label}"))
                    if senders:
                        cat[ip].add("wait")
                    else:
                        cat[ip].add("recv")
                        starved_recv.append((ip, sval.sid, ins.label))
                    reasons.append(f"recv: no message labelled {ins.label}")
                else:
                    cat[ip].add("other")
                    reasons.append("recv: session not established")
            elif isinstance(ins, (RemoteCxControl, RemoteCxTarget)):
                want = (RemoteCxTarget if isinstance(ins, RemoteCxControl)
                        else RemoteCxControl)
                partners = [
                    jp for jp, q in enumerate(state.processes)
                    if jp != ip and q.participant == ins.partner
                    and any(isinstance(q.body[k], want)
                            and q.body[k].partner == pid
                            and q.body[k].label == ins.label
                            for k in q.pending())
                ]
                for jp in partners:
                    edges.append((ip, jp, f"rcx({ins.label}) partner"))
                cat[ip].add("wait" if partners else "other")
                reasons.append(f"remote CX {ins.label}: partner not ready")
            elif isinstance(ins, Open):
                candidates = [
                    (jp, q.participant) for jp, q in enumerate(state.processes)
                    if jp != ip and any(
                        isinstance(q.body[k], Open)
                        and q.body[k].participants == ins.participants
                        for k in q.pending())
                ]
                missing = set(ins.participants) - {p for _, p in candidates} - {pid}
                for jp, _ in candidates:
                    edges.append((ip, jp, "open partner"))
                if missing or pid not in ins.participants:
                    cat[ip].add("other")
                    reasons.append(f"open: no process can fill participants "
                                   f"{sorted(missing) or [pid]}")
                else:
                    cat[ip].add("wait")
                    reasons.append("open: partners not ready")
            else:
                cat[ip].add("other")
                reasons.append(f"{type(ins).__name__}: operand not ready "
                               f"(unbound, wrong kind, or not owned)")
        blocked[ip] = "; ".join(reasons) if reasons else "no issuable instruction"

    cycle = _shortest_cycle(edges)
    if cycle:
        return StuckReport(
            kind="deadlock",
            cycle=[(ip, state.processes[ip].participant) for ip in cycle],
            edges=edges, blocked=blocked)
    if pool_blocked:
        _, pid = min(pool_blocked)
        return StuckReport(kind="qubit_exhaustion", participant=pid,
                           edges=edges, blocked=blocked)
    if stalled and all(cat[ip] == {"recv"} for ip in stalled):
        _, sid, label = starved_recv[0]
        return StuckReport(kind="message_starvation", session=sid, label=label,
                           edges=edges, blocked=blocked)
    return StuckReport(kind="unknown", edges=edges, blocked=blocked)


def _shortest_cycle(edges: list[tuple[int, int, str]]) -> list[int]:
    """Shortest directed cycle through >= 2 distinct nodes (BFS from each)."""
    graph: dict[int, set[int]] = {}
    for a, b, _ in edges:
        if a != b:
            graph.setdefault(a, set()).add(b)
    best: list[int] = []
    for start in sorted(graph):
        prev = {start: None}
        frontier = deque([start])
        found = None
        while frontier and found is None:
            cur = frontier.popleft()
            for nxt in sorted(graph.get(cur, ())):
                if nxt == start:
                    found = cur
                    break
                if nxt not in prev:
                    prev[nxt] = cur
                    frontier.append(nxt)
        if found is not None:
            path = [found]
            while path[-1] != start:
                path.append(prev[path[-1]])
            cyc = path[::-1]
            if not best or len(cyc) < len(best):
                best = cyc
    return best


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    status: str                 # completed | stuck | fuel_exhausted
    trace: list
    state: RuntimeState
    stuck: StuckReport | None = None

    @property
    def steps(self) -> int:
        return len(self.trace)

    def trace_jsonl(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.trace) + "\n"


def make_state(system: System, arch: Architecture, *, backend: str = "sv",
               seed: int = 0, oracle: OutcomeOracle | None = None,
               mode: str = "heads") -> RuntimeState:
    if oracle is None:
        oracle = BornRule(seed)
    if backend == "sv":
        be = StatevectorBackend(oracle, seed=seed)
    elif backend == "abstract":
        be = AbstractBackend(oracle, seed=seed)
    else:
        raise ConfigMismatch(f"unknown backend {backend!r}")
    return RuntimeState(system, arch, be, mode=mode)


def run(system: System, arch: Architecture, *, backend: str = "sv",
        policy: SchedulerPolicy | str | None = None, seed: int = 0,
        fuel: int | None = None, oracle: OutcomeOracle | None = None) -> RunResult:
    """Drive a system to completion, stuckness or fuel exhaustion.

    Deterministic for a fixed (program, architecture, seed, policy):
    re-running yields a byte-identical trace.
    """
    if policy is None:
        policy = RoundRobin()
    elif isinstance(policy, str):
        policy = make_policy(policy, seed)
    if fuel is None:
        fuel = 10 * max(1, instruction_count(system))
    state = make_state(system, arch, backend=backend, seed=seed,
                       oracle=oracle, mode=policy.mode)
    trace: list[dict] = []
    while True:
        ts = enabled_transitions(state)
        if not ts:
            if all(p.is_terminal() for p in state.processes):
                return RunResult("completed", trace, state)
            return RunResult("stuck", trace, state, classify_stuck(state))
        if len(trace) >= fuel:
            return RunResult("fuel_exhausted", trace, state)
        t = policy.choose(ts, state)
        trace.append(step(state, t, trusted=True))



# ---------------------------------------------------------------------------
# derived-operation expansion
# ---------------------------------------------------------------------------

def expand_derived(system: System) -> System:
    """Rewrite qsend / qrecv / rcxc / rcxt into their primitive sequences.

    Fresh names are drawn per process (``_e0``, ``_e1``, ...), skipping any
    identifier already used.  A measured qubit is freed immediately after
    its measurement (it never carries quantum data again), which returns
    comm qubits to their store as early as possible; the receive-side comm
    qubit is used until the final swap and is freed after it.  Stores
    balance exactly as under the atomic rules either way.
    """
    procs = []
    for p in system.processes:
        used = _names_in(p.body)
        counter = itertools.count()

        def fresh() -> str:
            while True:
                cand = f"_e{next(counter)}"
                if cand not in used:
                    used.add(cand)
                    return cand

        procs.append(Process(p.participant, _expand_body(p.body, fresh)))
    return System(tuple(procs))


def _names_in(body) -> set[str]:
    out: set[str] = set()
    for ins in body:
        out |= instr_vars(ins)
        if isinstance(ins, If):
            out |= _names_in(ins.then_body) | _names_in(ins.else_body)
    return out


def _expand_body(body, fresh) -> tuple[Instr, ...]:
    out: list[Instr] = []
    for ins in body:
        if isinstance(ins, QSend):
            y1, y2 = fresh(), fresh()
            q, c = ins.payload, ins.comm
            qv = q.name if isinstance(q, Var) else None
            cv = c.name if isinstance(c, Var) else None
            out += [
                ApplyGate("CX", (), (q, c)),
                ApplyGate("H", (), (q,)),
                Measure(y1, (q,)),
            ]
            out += [Free(qv)] if qv else []
            out += [Measure(y2, (c,))]
            out += [Free(cv)] if cv else []
            out += [
                Send(ins.session, ins.partner, ins.label, Var(y1)),
                Send(ins.session, ins.partner, ins.label, Var(y2)),
            ]
        elif isinstance(ins, QRecv):
            y1, y2 = fresh(), fresh()
            c = ins.comm
            cv = c.name if isinstance(c, Var) else None
            x = ins.var
            out += [
                Init(x),
                Recv(ins.session, ins.label, y1),
                Recv(ins.session, ins.label, y2),
                ApplyGate("Z", (), (c,), Var(y1)),
                ApplyGate("X", (), (c,), Var(y2)),
                ApplyGate("CX", (), (Var(x), c)),
                ApplyGate("CX", (), (c, Var(x))),
                ApplyGate("CX", (), (Var(x), c)),
            ]
            out += [Free(cv)] if cv else []
        elif isinstance(ins, RemoteCxControl):
            y, y2 = fresh(), fresh()
            cv = ins.comm.name if isinstance(ins.comm, Var) else None
            out += [
                ApplyGate("CX", (), (ins.qubit, ins.comm)),
                Measure(y, (ins.comm,)),
            ]
            out += [Free(cv)] if cv else []
            out += [
                Send(ins.session, ins.partner, ins.label, Var(y)),
                Recv(ins.session, ins.label, y2),
                ApplyGate("Z", (), (ins.qubit,), Var(y2)),
            ]
        elif isinstance(ins, RemoteCxTarget):
            y, y2 = fresh(), fresh()
            cv = ins.comm.name if isinstance(ins.comm, Var) else None
            out += [
                ApplyGate("CX", (), (ins.comm, ins.qubit)),
                ApplyGate("H", (), (ins.comm,)),
                Measure(y, (ins.comm,)),
            ]
            out += [Free(cv)] if cv else []
            out += [
                Send(ins.session, ins.partner, ins.label, Var(y)),
                Recv(ins.session, ins.label, y2),
                ApplyGate("X", (), (ins.qubit,), Var(y2)),
            ]
        elif isinstance(ins, If):
            out.append(If(ins.cond,
                          _expand_body(ins.then_body, fresh),
                          _expand_body(ins.else_body, fresh)))
        else:
            out.append(ins)
    return tuple(out)


# ---------------------------------------------------------------------------
# exhaustive schedule exploration
# ---------------------------------------------------------------------------

_DRAWS = {"measure": 1, "entswap": 2, "qsend": 2}


@dataclass
class ExploreResult:
    outcomes: Counter               # ("completed",) / ("stuck", kind) -> count
    deadlocks: list                 # StuckReports for deadlocked terminal states
    n_states: int
    truncated: bool

    @property
    def can_deadlock(self) -> bool:
        return bool(self.deadlocks)


def explore(system: System, arch: Architecture, *, mode: str = "dataflow",
            max_states: int = 200_000, depth: int | None = None) -> ExploreResult:
    """Enumerate every reachable state under every scheduler choice (and both
    outcomes of every measurement).  Runs on the abstract backend.

    Terminal states are tallied as completed or stuck (with their stuck
    kind); one representative StuckReport per deadlocked terminal state is
    returned.
    """
    root = RuntimeState(system, arch, AbstractBackend(Scripted([])), mode=mode)
    if depth is None:
        depth = 10 * max(1, instruction_count(system))
    outcomes: Counter = Counter()
    deadlocks: list[StuckReport] = []
    seen = {root.key()}
    frontier: deque[tuple[RuntimeState, int]] = deque([(root, 0)])
    truncated = False

    while frontier:
        state, d = frontier.popleft()
        ts = enabled_transitions(state, mode)
        if not ts:
            if all(p.is_terminal() for p in state.processes):
                outcomes[("completed",)] += 1
            else:
                rep = classify_stuck(state, mode)
                outcomes[("stuck", rep.kind)] += 1
                if rep.kind == "deadlock":
                    deadlocks.append(rep)
            continue
        if d >= depth:
            truncated = True
            continue
        for t in ts:
            for bits in itertools.product((0, 1), repeat=_DRAWS.get(t.kind, 0)):
                succ = state.clone()
                succ.backend.oracle = Scripted(list(bits))
                step(succ, t, trusted=True)
                k = succ.key()
                if k not in seen:
                    if len(seen) >= max_states:
                        truncated = True
                        continue
                    seen.add(k)
                    frontier.append((succ, d + 1))
    return ExploreResult(outcomes, deadlocks, len(seen), truncated)
