"""Discrete-event cost simulation: schedules, resource metrics, timelines.

The simulator schedules the *expanded* program (derived ops are rewritten
first so every message and measurement is visible) onto a timed model of the
architecture:

* each processor has a gate/communication execution unit (single-qubit,
  two-qubit, entSwap and send serialize on it); measurements use per-qubit
  readout, so they tie up the measured qubit for ``measure_ns`` but never
  contend with gate work or with each other;
* entanglement generation runs on the link, not on either processor, with
  ``ent_gen_ns`` latency; a link supports at most
  ``W = min(side capacity, ceil(ent_gen / (two_qubit + measure + send)))``
  live pairs, so generation can run ahead of consumption only up to the
  window beyond which extra comm qubits cannot help;
* comm and data qubits are bound oldest-free-first; the freeing event
  becomes a dependency of the next user, which is what makes reuse chains
  visible to the depth metrics;
* a classical message arrives when its send finishes; a receive completes
  at ``max(arrival, receiver's unit free)`` at no extra cost.

Classical branching (``if``) is rejected: branch-dependent cost is
outcome-dependent and the compiler never emits it.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .arch import Architecture, CostModel
from .ast import (
    And,
    ApplyGate,
    Assign,
    BitLit,
    Close,
    EntSwap,
    Free,
    GenEnt,
    If,
    Init,
    Measure,
    Not,
    Open,
    Process,
    Recv,
    Send,
    Stop,
    System,
    Var,
    Xor,
)
from .errors import ConfigMismatch, StuckDuringSimulation
from .runtime import _BARRIERS, _channel_key, _data_vars, expand_derived

__all__ = [
    "Event",
    "EventTrace",
    "MetricsReport",
    "simulate_cost",
    "metrics",
    "timeline",
    "timeline_csv",
    "verify_trace",
    "sweep",
]

_POLICIES = ("depresolved", "inorder")


@dataclass(frozen=True, slots=True)
class Event:
    idx: int
    op: str                       # gate|measure|send|recv|genent|entswap|open|close|init|free|assign
    procs: tuple[int, ...]
    start: float
    end: float
    deps: tuple[int, ...]         # indices of earlier events this one waited for
    detail: str = ""


@dataclass(frozen=True, slots=True)
class EventTrace:
    events: tuple[Event, ...]
    total_cost_ns: float
    arch: Architecture
    policy: str


@dataclass(frozen=True, slots=True)
class MetricsReport:
    e_count: int
    c_count: int
    e_depth: int
    c_depth: int
    total_cost_ns: float
    per_processor_ops: dict

    def __post_init__(self):
        assert self.e_depth <= self.e_count
        assert self.c_depth <= self.c_count

    def to_json(self) -> dict:
        return {
            "e_count": self.e_count,
            "c_count": self.c_count,
            "e_depth": self.e_depth,
            "c_depth": self.c_depth,
            "total_cost_ns": self.total_cost_ns,
            "per_processor_ops": {str(k): v for k, v in
                                  sorted(self.per_processor_ops.items())},
        }


def _eval(env: dict, expr):
    if isinstance(expr, BitLit):
        return expr.value
    if isinstance(expr, Var):
        v = env.get(expr.name)
        if not isinstance(v, int):
            raise ConfigMismatch(
                f"variable {expr.name!r} is not a classical bit at send time")
        return v
    if isinstance(expr, Not):
        return 1 - _eval(env, expr.operand)
    if isinstance(expr, And):
        return _eval(env, expr.left) & _eval(env, expr.right)
    if isinstance(expr, Xor):
        return _eval(env, expr.left) ^ _eval(env, expr.right)
    raise ConfigMismatch(f"cannot evaluate {type(expr).__name__}")


def _sparse_deps(body):
    """Issue-order edges, chained through each variable's most recent user.

    Equivalent to checking every earlier/later pair for a conflict — shared
    variables, same-channel FIFO, ambiguous generation pairing, barriers —
    but the chain form has the same transitive closure at linear instead of
    quadratic cost, so ready times and critical-path lengths are unchanged.
    """
    n = len(body)
    d: list[list[int]] = [[] for _ in range(n)]
    r: list[list[int]] = [[] for _ in range(n)]
    last_user: dict[str, int] = {}
    last_chan: dict[tuple, int] = {}
    last_gen: dict[tuple, int] = {}
    last_barrier = None
    sinks: set[int] = set()
    for i, ins in enumerate(body):
        if isinstance(ins, _BARRIERS):
            dset = set(sinks)
            last_barrier = i
        else:
            dset = set()
            for v in _data_vars(ins):
                j = last_user.get(v)
                if j is not None:
                    dset.add(j)
                last_user[v] = i
            ck = _channel_key(ins)
            if ck is not None:
                j = last_chan.get(ck)
                if j is not None:
                    dset.add(j)
                last_chan[ck] = i
            if isinstance(ins, GenEnt):
                gk = (ins.partner, ins.label)
                j = last_gen.get(gk)
                if j is not None:
                    dset.add(j)
                last_gen[gk] = i
            if last_barrier is not None:
                dset.add(last_barrier)
        sinks -= dset
        sinks.add(i)
        for j in sorted(dset):
            d[i].append(j)
            r[j].append(i)
    return d, r


class _Pool:
    """Free list with oldest-first binding and freeing-event bookkeeping."""

    __slots__ = ("items",)

    def __init__(self, uids):
        self.items = [[uid, 0.0, None] for uid in uids]   # uid, time, event

    def oldest(self):
        return min(self.items, key=lambda it: (it[1], it[0])) if self.items else None

    def take_oldest(self):
        it = self.oldest()
        self.items.remove(it)
        return it

    def give(self, uid, time, ev):
        self.items.append([uid, time, ev])


class _Sim:
    def __init__(self, system: System, arch: Architecture, costs: CostModel,
                 policy: str, seed: int):
        if policy not in _POLICIES:
            raise ConfigMismatch(
                f"unknown analyzer policy {policy!r}; expected one of {_POLICIES}")
        system = expand_derived(system)
        known = set(arch.ids)
        for proc in system.processes:
            if proc.participant not in known:
                raise ConfigMismatch(
                    f"process participant {proc.participant} not in architecture")
        self.arch = arch
        self.costs = costs
        self.policy = policy
        self.rng = np.random.default_rng([seed, 0xA7])

        self.bodies: list[list] = []
        self.parts: list[int] = []
        for proc in system.processes:
            body = []
            for ins in proc.body:
                if isinstance(ins, If):
                    raise ConfigMismatch(
                        "cost analysis requires branch-free programs "
                        "(classical `if` is outcome-dependent)")
                if isinstance(ins, Stop):
                    break
                body.append(ins)
            self.bodies.append(body)
            self.parts.append(proc.participant)

        # intra-process dependency edges
        self.deps: list[list[list[int]]] = []
        self.rdeps: list[list[list[int]]] = []
        self.missing: list[list[int]] = []
        for body in self.bodies:
            if policy == "inorder":
                n = len(body)
                d = [[i - 1] if i else [] for i in range(n)]
                r = [[i + 1] if i + 1 < n else [] for i in range(n)]
            else:
                d, r = _sparse_deps(body)
            self.deps.append(d)
            self.rdeps.append(r)
            self.missing.append([len(x) for x in d])
        self.ready_time = [[0.0] * len(b) for b in self.bodies]
        self.dep_events: list[list[list[int]]] = [
            [[] for _ in b] for b in self.bodies]
        self.frontier: list[set[int]] = [
            {i for i in range(len(b)) if not self.missing[ip][i]}
            for ip, b in enumerate(self.bodies)]
        self.remaining = sum(len(b) for b in self.bodies)

        # static genEnt pairing by (mutual naming, label, occurrence)
        occ: dict[tuple, list] = {}
        for ip, body in enumerate(self.bodies):
            for i, ins in enumerate(body):
                if isinstance(ins, GenEnt):
                    key = (self.parts[ip], ins.partner, ins.label)
                    occ.setdefault(key, []).append((ip, i))
        self.partner_site: dict[tuple[int, int], tuple[int, int]] = {}
        for (a, b, label), sites in occ.items():
            others = occ.get((b, a, label), [])
            for k, site in enumerate(sites):
                if k < len(others):
                    self.partner_site[site] = others[k]

        # static open grouping by (participant list, occurrence per participant)
        self.open_group: dict[tuple[int, int], tuple] = {}
        groups: dict[tuple, dict[int, tuple[int, int]]] = {}
        counts: dict[tuple, int] = {}
        for ip, body in enumerate(self.bodies):
            for i, ins in enumerate(body):
                if isinstance(ins, Open):
                    k = counts.get((self.parts[ip], ins.participants), 0)
                    counts[(self.parts[ip], ins.participants)] = k + 1
                    groups.setdefault((ins.participants, k), {})[self.parts[ip]] = (ip, i)
        self.groups = {key: members for key, members in groups.items()
                       if set(key[0]) == set(members)}
        for key, members in self.groups.items():
            for site in members.values():
                self.open_group[site] = key
        self.next_sid = 0

        # resources
        uid = 0
        self.data_pool: dict[int, _Pool] = {}
        for pid in arch.ids:
            q = arch.data_capacity(pid)
            self.data_pool[pid] = _Pool(range(uid, uid + q))
            uid += q
        self.comm_pool: dict[tuple[int, int], _Pool] = {}
        self.win: dict[tuple[int, int], int] = {}
        self.gen_count: dict[tuple[int, int], int] = {}
        self.retired: dict[tuple[int, int], list] = {}
        self.live_pairs: dict[tuple[int, int], dict[int, list]] = {}
        for link in arch.links:
            a, b = sorted(link.ends)
            consume = max(
                costs.cost(p, "two_qubit_ns") + costs.cost(p, "measure_ns")
                + costs.cost(p, "classical_send_ns") for p in (a, b))
            cap = int(np.ceil(costs.ent_gen(a, b) / consume))
            win = min(link.comm_qubits, max(1, cap))
            # qubits beyond the prefetch window can never be live at once,
            # so the scheduler provisions exactly `win` per side; this is
            # what makes capacities past the window-cap behave identically
            for owner, peer in ((a, b), (b, a)):
                self.comm_pool[(owner, peer)] = _Pool(range(uid, uid + win))
                uid += win
            self.win[(a, b)] = win
            self.gen_count[(a, b)] = 0
            self.retired[(a, b)] = []
            self.live_pairs[(a, b)] = {}

        self.heap: dict[tuple, list] = {}    # (sid, pid, label) -> [value, time, ev, used]
        self.env: list[dict] = [{} for _ in self.bodies]
        self.gate_free: dict[int, float] = {pid: 0.0 for pid in arch.ids}
        self.events: list[Event] = []

        self.procs_at: dict[int, tuple[int, ...]] = {}
        for ip, p in enumerate(self.parts):
            self.procs_at[p] = self.procs_at.get(p, ()) + (ip,)
        self.pq: list[tuple[float, int, int, int]] = []

    # -- candidate feasibility ---------------------------------------------

    def _base(self, ip: int, i: int) -> float:
        return self.ready_time[ip][i]

    def _candidate(self, ip: int, i: int):
        """Return (start, op, procs, deps, plan) or None if blocked."""
        ins = self.bodies[ip][i]
        p = self.parts[ip]
        base = self._base(ip, i)
        deps = list(self.dep_events[ip][i])

        if isinstance(ins, Open):
            key = self.open_group.get((ip, i))
            if key is None:
                return None          # no complete rendezvous group exists
            members = self.groups[key]
            sites = sorted(members.values())
            if any(self.missing[jp][j] for jp, j in sites):
                return None
            start = max(self._base(jp, j) for jp, j in sites)
            dd = sorted({d for jp, j in sites for d in self.dep_events[jp][j]})
            procs = tuple(sorted(members))
            return (start, "open", procs, dd, ("open", sites, key))

        if isinstance(ins, GenEnt):
            other = self.partner_site.get((ip, i))
            if other is None or self.missing[other[0]][other[1]]:
                return None
            jp, j = other
            if (jp, j) < (ip, i):
                return None          # partner side will propose the pair
            a, b = sorted((p, self.parts[jp]))
            link = (a, b)
            if link not in self.gen_count:
                return None          # no such link in the architecture
            k = self.gen_count[link]
            w = self.win[link]
            start = max(base, self._base(jp, j))
            deps = sorted(set(deps) | set(self.dep_events[jp][j]))
            if k >= w:
                ret = self.retired[link]
                if len(ret) <= k - w or ret[k - w] is None:
                    return None      # window full until an older pair retires
                rt, rev = ret[k - w]
                start = max(start, rt)
                if rev is not None:
                    deps = sorted(set(deps) | {rev})
            qa = self.comm_pool[(p, self.parts[jp])].oldest()
            qb = self.comm_pool[(self.parts[jp], p)].oldest()
            if qa is None or qb is None:
                return None
            for q in (qa, qb):
                start = max(start, q[1])
                if q[2] is not None:
                    deps = sorted(set(deps) | {q[2]})
            return (start, "genent", tuple(sorted((p, self.parts[jp]))), deps,
                    ("genent", (ip, i), (jp, j), link, k))

        if isinstance(ins, Init):
            q = self.data_pool[p].oldest()
            if q is None:
                return None
            start = max(base, q[1])
            if q[2] is not None:
                deps = sorted(set(deps) | {q[2]})
            return (start, "init", (p,), deps, ("init", ip, i))

        if isinstance(ins, Recv):
            sid = self.env[ip].get(ins.session)
            msgs = self.heap.get((sid, p, ins.label), [])
            best = None
            for m in msgs:
                if not m[3] and (best is None or (m[1], m[2]) < (best[1], best[2])):
                    best = m
            if best is None:
                return None
            start = max(base, best[1], self.gate_free[p])
            deps = sorted(set(deps) | {best[2]})
            return (start, "recv", (p,), deps, ("recv", ip, i, best))

        if isinstance(ins, Measure):
            # per-qubit readout: serialized only against other uses of the
            # same qubit, which the dataflow edges already enforce
            return (base, "measure", (p,), deps, ("measure", ip, i))

        if isinstance(ins, (ApplyGate, EntSwap, Send)):
            op = {"ApplyGate": "gate", "EntSwap": "entswap", "Send": "send"}[
                type(ins).__name__]
            start = max(base, self.gate_free[p])
            return (start, op, (p,), deps, (op, ip, i))

        op = {"Free": "free", "Assign": "assign", "Close": "close"}[
            type(ins).__name__]
        return (base, op, (p,), deps, (op, ip, i))

    # -- committing ---------------------------------------------------------

    def _duration(self, op: str, ins, p: int) -> float:
        c = self.costs.cost
        if op == "gate":
            return c(p, "two_qubit_ns") if len(ins.args) == 2 \
                else c(p, "single_qubit_ns")
        if op == "measure":
            return c(p, "measure_ns")
        if op == "send":
            return c(p, "classical_send_ns")
        if op == "entswap":
            return (c(p, "two_qubit_ns") + c(p, "single_qubit_ns")
                    + 2 * c(p, "measure_ns"))
        return 0.0

    # The scheduler heap holds *lower bounds*: a candidate's true start can
    # only move later as other instructions commit, except when a resource
    # frees up or a message arrives — and every one of those transitions
    # pushes a fresh stub below.  Popping therefore recomputes the candidate
    # and commits only when the key still matches; anything stale is either
    # reinserted at its current start or dropped for a later stub to revive.

    def _stub(self, ip: int, i: int):
        heapq.heappush(self.pq, (self.ready_time[ip][i], self.parts[ip], ip, i))

    def _stub_kind(self, participant: int, kind):
        for ip in self.procs_at.get(participant, ()):
            for i in self.frontier[ip]:
                if isinstance(self.bodies[ip][i], kind):
                    self._stub(ip, i)

    def _stub_genents(self, link):
        for p in link:
            self._stub_kind(p, GenEnt)

    def _release_comm(self, token, time: float, ev: int):
        _, link, pair, side, uid = token
        self.comm_pool[side].give(uid, time, ev)
        halves = self.live_pairs[link][pair]
        halves[0 if side == (link[0], link[1]) else 1] = (time, ev)
        if all(h is not None for h in halves):
            rt = max(h[0] for h in halves)
            rev = max((h for h in halves), key=lambda h: (h[0], h[1]))[1]
            ret = self.retired[link]
            while len(ret) <= pair:
                ret.append(None)
            ret[pair] = (rt, rev)
            del self.live_pairs[link][pair]
        self._stub_genents(link)

    def _mark_done(self, ip: int, i: int, end: float, ev: int):
        self.frontier[ip].discard(i)
        for j in self.rdeps[ip][i]:
            self.missing[ip][j] -= 1
            self.ready_time[ip][j] = max(self.ready_time[ip][j], end)
            self.dep_events[ip][j].append(ev)
            if not self.missing[ip][j]:
                self.frontier[ip].add(j)
                self._stub(ip, j)
                if isinstance(self.bodies[ip][j], GenEnt):
                    other = self.partner_site.get((ip, j))
                    if other is not None:
                        self._stub(*other)
        self.remaining -= 1

    def _commit(self, start, op, procs, deps, plan):
        idx = len(self.events)
        if op == "open":
            _, sites, key = plan
            sid = self.next_sid
            self.next_sid += 1
            for jp, j in sites:
                self.env[jp][self.bodies[jp][j].var] = sid
                self._mark_done(jp, j, start, idx)
            ev = Event(idx, op, procs, start, start, tuple(deps),
                       f"s{sid}[{','.join(map(str, key[0]))}]")
            self.events.append(ev)
            return

        if op == "genent":
            _, (ip, i), (jp, j), link, k = plan
            dur = self.costs.ent_gen(*link)
            end = start + dur
            pa, pb = self.parts[ip], self.parts[jp]
            qa = self.comm_pool[(pa, pb)].take_oldest()
            qb = self.comm_pool[(pb, pa)].take_oldest()
            self.gen_count[link] = k + 1
            self.live_pairs[link][k] = [None, None]
            self.env[ip][self.bodies[ip][i].var] = \
                ("comm", link, k, (pa, pb), qa[0])
            self.env[jp][self.bodies[jp][j].var] = \
                ("comm", link, k, (pb, pa), qb[0])
            self._mark_done(ip, i, end, idx)
            self._mark_done(jp, j, end, idx)
            self.events.append(Event(
                idx, op, procs, start, end, tuple(deps),
                self.bodies[ip][i].label))
            self._stub_genents(link)   # the window index moved for the rest
            return

        (op2, ip, i) = plan[0], plan[1], plan[2]
        ins = self.bodies[ip][i]
        p = self.parts[ip]
        dur = self._duration(op, ins, p)
        end = start + dur
        detail = ""
        env = self.env[ip]

        if op == "init":
            q = self.data_pool[p].take_oldest()
            env[ins.var] = ("data", p, q[0])
            detail = ins.var
        elif op == "free":
            token = env.pop(ins.var, None)
            if isinstance(token, tuple) and token[0] == "data":
                self.data_pool[p].give(token[2], end, idx)
                self._stub_kind(p, Init)
            elif isinstance(token, tuple) and token[0] == "comm":
                self._release_comm(token, end, idx)
            detail = ins.var
        elif op == "assign":
            env[ins.var] = _eval(env, ins.expr)
            detail = ins.var
        elif op == "measure":
            env[ins.var] = int(self.rng.integers(2))
            detail = ins.var
        elif op == "entswap":
            for arg_name in (ins.arg1.name, ins.arg2.name):
                token = env.pop(arg_name, None)
                if isinstance(token, tuple) and token[0] == "comm":
                    self._release_comm(token, end, idx)
            env[ins.var1] = int(self.rng.integers(2))
            env[ins.var2] = int(self.rng.integers(2))
            self.gate_free[p] = end
            detail = f"{ins.var1},{ins.var2}"
        elif op == "send":
            sid = env.get(ins.session)
            value = _eval(env, ins.value)
            self.heap.setdefault((sid, ins.partner, ins.label), []).append(
                [value, end, idx, False])
            self.gate_free[p] = end
            self._stub_kind(ins.partner, Recv)
            detail = ins.label
        elif op == "recv":
            msg = plan[3]
            msg[3] = True
            env[ins.var] = msg[0]
            detail = ins.label
        elif op == "gate":
            self.gate_free[p] = end
            detail = ins.gate
        elif op == "close":
            detail = ins.session

        self._mark_done(ip, i, end, idx)
        self.events.append(Event(idx, op, procs, start, end, tuple(deps), detail))

    # -- main loop ----------------------------------------------------------

    def _key(self, cand, ip: int, i: int):
        # a rendezvous is proposed from every member site; pin its tie-break
        # to the first site so the commit order does not depend on which
        # member's stub happened to surface it
        if cand[1] == "open":
            jp, j = cand[4][1][0]
            return (cand[0], cand[2][0], jp, j)
        return (cand[0], cand[2][0], ip, i)

    def _sweep_best(self):
        best = None
        for ip, front in enumerate(self.frontier):
            for i in sorted(front):
                cand = self._candidate(ip, i)
                if cand is None:
                    continue
                key = self._key(cand, ip, i)
                if best is None or key < best[0]:
                    best = (key, cand)
        return best

    def run(self) -> EventTrace:
        for ip, front in enumerate(self.frontier):
            for i in front:
                self._stub(ip, i)
        while self.remaining:
            if not self.pq:
                # the stubs above cover every way a blocked candidate can
                # come alive, so an empty heap normally means a real wedge;
                # sweep once to be sure before reporting it
                best = self._sweep_best()
                if best is None:
                    blocked = []
                    for ip, front in enumerate(self.frontier):
                        for i in sorted(front):
                            ins = self.bodies[ip][i]
                            blocked.append(
                                f"process {ip}@p{self.parts[ip]} instr {i} "
                                f"({type(ins).__name__})")
                    raise StuckDuringSimulation(
                        "cost simulation cannot make progress; blocked at: "
                        + "; ".join(blocked))
                self._commit(*best[1])
                continue
            key = heapq.heappop(self.pq)
            _, _, ip, i = key
            if i not in self.frontier[ip]:
                continue
            cand = self._candidate(ip, i)
            if cand is None:
                continue
            fresh = self._key(cand, ip, i)
            if fresh == key:
                self._commit(*cand)
            else:
                heapq.heappush(self.pq, fresh)
        total = max((ev.end for ev in self.events), default=0.0)
        return EventTrace(tuple(self.events), total, self.arch, self.policy)


def simulate_cost(system: System, arch: Architecture,
                  costs: CostModel | None = None,
                  policy: str = "depresolved", seed: int = 0) -> EventTrace:
    """Schedule the program onto the timed model and return the event trace.

    Derived operations are expanded first so their messages and measurements
    are costed individually.  ``policy`` is "depresolved" (instructions issue
    as soon as their data dependencies allow, the default) or "inorder"
    (strict program order per process).
    """
    return _Sim(system, arch, costs or CostModel(), policy, seed).run()


# ---------------------------------------------------------------------------
# metrics and views
# ---------------------------------------------------------------------------

def metrics(trace: EventTrace) -> MetricsReport:
    """Counts, critical-path depths and total cost from an event trace.

    E-depth counts genEnt events along the longest dependency path (and
    analogously C-depth counts sends); event indices are already a
    topological order of the dependency DAG.
    """
    n = len(trace.events)
    e_len = [0] * n
    c_len = [0] * n
    for ev in trace.events:
        be = max((e_len[d] for d in ev.deps), default=0)
        bc = max((c_len[d] for d in ev.deps), default=0)
        e_len[ev.idx] = be + (1 if ev.op == "genent" else 0)
        c_len[ev.idx] = bc + (1 if ev.op == "send" else 0)
    per_proc: Counter = Counter()
    for ev in trace.events:
        for p in ev.procs:
            per_proc[p] += 1
    return MetricsReport(
        e_count=sum(1 for ev in trace.events if ev.op == "genent"),
        c_count=sum(1 for ev in trace.events if ev.op == "send"),
        e_depth=max(e_len, default=0),
        c_depth=max(c_len, default=0),
        total_cost_ns=trace.total_cost_ns,
        per_processor_ops=dict(per_proc),
    )


def timeline(trace: EventTrace) -> list[tuple[float, int, int]]:
    """Remaining-operation counts: after every completion event, one row
    ``(time_ns, processor, remaining_ops)`` per processor.  A joint event
    counts toward every participating processor."""
    remaining = Counter()
    for ev in trace.events:
        for p in ev.procs:
            remaining[p] += 1
    pids = trace.arch.ids
    rows = []
    for ev in sorted(trace.events, key=lambda e: (e.end, e.idx)):
        for p in ev.procs:
            remaining[p] -= 1
        rows.extend((ev.end, pid, remaining[pid]) for pid in pids)
    return rows


def _fmt_ns(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(t)


def timeline_csv(rows) -> str:
    out = ["time_ns,processor,remaining_ops"]
    out.extend(f"{_fmt_ns(t)},{p},{r}" for t, p, r in rows)
    return "\n".join(out) + "\n"


def verify_trace(trace: EventTrace):
    """Independent schedule checker: dependency edges respected, no overlap
    on any processor's gate/comm execution unit, and link-level generations
    bounded by the side capacity."""
    events = trace.events
    for ev in events:
        assert ev.end >= ev.start >= 0.0, ev
        for d in ev.deps:
            assert d < ev.idx, (d, ev)
            assert events[d].end <= ev.start + 1e-9, (events[d], ev)
    gate_unit = {"gate", "send", "entswap"}
    for pid in trace.arch.ids:
        spans = sorted((ev.start, ev.end) for ev in events
                       if ev.op in gate_unit and pid in ev.procs)
        for (s1, e1), (s2, _) in zip(spans, spans[1:]):
            assert s2 >= e1 - 1e-9, (pid, (s1, e1), s2)
    for link in trace.arch.links:
        a, b = sorted(link.ends)
        spans = sorted((ev.start, ev.end) for ev in events
                       if ev.op == "genent" and ev.procs == (a, b))
        for i, (s, _) in enumerate(spans):
            live = sum(1 for s2, e2 in spans if s2 <= s < e2)
            assert live <= link.comm_qubits, (link, s, live)


def sweep(circuits, archs, costs: CostModel | None = None,
          policy: str = "depresolved") -> list[dict]:
    """Cross product of named systems and named architectures; one metrics
    cell each, with per-cell error capture instead of aborting."""
    out = []
    for cname, system in circuits:
        for aname, arch in archs:
            cell = {"circuit": cname, "arch": aname}
            try:
                report = metrics(simulate_cost(system, arch, costs, policy))
                cell["metrics"] = report.to_json()
            except Exception as exc:          # per-cell capture by contract
                cell["error"] = f"{type(exc).__name__}: {exc}"
            out.append(cell)
    return out
