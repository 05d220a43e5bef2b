"""Runtime semantics tests: stepping, joint rules, blocking, stuck analysis."""

import time

import pytest
from hypothesis import given, settings

from inquir.arch import Architecture, Link, Processor, linear
from inquir.ast import (
    ApplyGate, Free, GenEnt, Init, Measure, Recv, RemoteCxControl, Send, System,
)
from inquir.errors import IllegalChoice, NotStuck
from inquir.parser import parse_program
from inquir.qstate import EPR_PAIR, Scripted
from inquir.runtime import (
    DependencyResolved, RoundRobin, SeededRandom, Transition,
    classify_stuck, enabled_transitions, expand_derived, explore,
    make_state, run, step,
)

from strategies import systems
from test_syntax import SWAP_RELAY

TOL = 1e-9


def fire(state, kind, procs):
    """Step the unique enabled transition with this kind and process set."""
    for t in enabled_transitions(state):
        if t.kind == kind and t.procs == procs:
            return step(state, t)
    raise AssertionError(f"no enabled {kind} on {procs}: "
                         f"{[(t.kind, t.procs) for t in enabled_transitions(state)]}")


# ---------------------------------------------------------------------------
# entanglement swapping (three processors in a line, one comm qubit per side)
# ---------------------------------------------------------------------------

def test_swap_relay_completes_with_expected_step_structure():
    sysm = parse_program(SWAP_RELAY)
    res = run(sysm, linear(3, 1, 1), policy=RoundRobin(), seed=0)
    assert res.status == "completed"
    steps = {}
    for rec in res.trace:
        if rec["op"] in ("init", "free", "close"):
            continue
        key = (rec["op"], tuple(rec["participants"]))
        steps[key] = steps.get(key, 0) + 1
    assert steps == {
        ("open", (0, 1, 2)): 1,
        ("genent", (0, 1)): 1,
        ("genent", (1, 2)): 1,
        ("entswap", (1,)): 1,
        ("send", (1,)): 2,
        ("recv", (0,)): 1,
        ("recv", (2,)): 1,
        ("gate", (0,)): 1,     # Z^w1 correction
        ("gate", (2,)): 1,     # X^w2 correction
        ("rcx", (0, 2)): 1,
    }
    # every qubit is back in its pool at the end
    st = res.state
    assert all(len(pool) == st.capacity[k] for k, pool in st.data_pool.items())
    assert all(len(pool) == st.capacity[k] for k, pool in st.comm_pool.items())


SWAP_CORR_ONLY = """
process 0 {
    s = open[0, 1, 2];
    x2 = genEnt[1](l1);
    s?(l1: w1);
    Z^w1(x2);
    stop;
}

process 1 {
    s = open[0, 1, 2];
    z1 = genEnt[0](l1);
    z2 = genEnt[2](l2);
    (w1, w2) = entSwap(z1, z2);
    s[0]!(l1: w1);
    s[2]!(l2: w2);
    stop;
}

process 2 {
    s = open[0, 1, 2];
    y2 = genEnt[1](l2);
    s?(l2: w2);
    X^w2(y2);
    stop;
}
"""


@pytest.mark.parametrize("w1,w2", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_swap_relay_virtual_pair_state(w1, w2):
    """After the corrections, the two endpoint comm qubits hold a fresh
    maximally entangled pair, whatever the Bell outcomes were."""
    sysm = parse_program(SWAP_CORR_ONLY)
    res = run(sysm, linear(3, 1, 1), oracle=Scripted([w1, w2]))
    assert res.status == "completed"
    a = res.state.processes[0].env["x2"].uid
    b = res.state.processes[2].env["y2"].uid
    assert res.state.backend.fidelity([a, b], EPR_PAIR) >= 1.0 - TOL


# ---------------------------------------------------------------------------
# qubit exhaustion (teleport into a processor with no free data qubit)
# ---------------------------------------------------------------------------

EXHAUSTION = """
process 1 {
    s = open[1, 2];
    q1 = init();
    x1 = genEnt[2](lq);
    qsend[2](s, lq, q1, x1);
    close(s);
    stop;
}

process 2 {
    s = open[1, 2];
    q2 = init();
    x2 = genEnt[1](lq);
    x3 = qrecv(s, lq, x2);
    CX(q2, x3);
    free q2;
    free x3;
    close(s);
    stop;
}
"""

TWO_NODE = Architecture(
    processors=(Processor(1, 1), Processor(2, 1)),
    links=(Link(1, 2, 1),),
    name="two-node",
)


def test_qubit_exhaustion_at_receiver():
    res = run(parse_program(EXHAUSTION), TWO_NODE, backend="abstract", seed=1)
    assert res.status == "stuck"
    assert res.stuck.kind == "qubit_exhaustion"
    assert res.stuck.participant == 2
    # the sender side ran to completion; only the receiver is wedged
    assert res.state.processes[0].is_terminal()
    assert not res.state.processes[1].is_terminal()


def test_exhaustion_resolves_once_capacity_allows():
    roomy = Architecture(
        processors=(Processor(1, 1), Processor(2, 2)),
        links=(Link(1, 2, 1),),
        name="two-node-roomy",
    )
    res = run(parse_program(EXHAUSTION), roomy, seed=1)
    assert res.status == "completed"


# ---------------------------------------------------------------------------
# deadlock (two swap pipelines crossing the same two links)
# ---------------------------------------------------------------------------

def _swap_pipeline(l_left: str, l_right: str) -> str:
    return f"""
process 0 {{
    s = open[0, 1, 2];
    x1 = genEnt[1]({l_left});
    s?({l_left}: w1);
    Z^w1(x1);
    free x1;
    stop;
}}
process 1 {{
    s = open[0, 1, 2];
    y1 = genEnt[0]({l_left});
    y2 = genEnt[2]({l_right});
    (w1, w2) = entSwap(y1, y2);
    s[0]!({l_left}: w1);
    s[2]!({l_right}: w2);
    stop;
}}
process 2 {{
    s = open[0, 1, 2];
    z1 = genEnt[1]({l_right});
    s?({l_right}: w2);
    X^w2(z1);
    free z1;
    stop;
}}
"""


def crossed_pipelines() -> System:
    """Two independent entanglement-swapping jobs sharing one 3-node line."""
    s1 = parse_program(_swap_pipeline("l1", "l2"))
    s2 = parse_program(_swap_pipeline("l3", "l4"))
    return System(s1.processes + s2.processes)


LINE3 = linear(3, 1, 1)


def test_deadlock_under_narrated_out_of_order_schedule():
    sysm = crossed_pipelines()
    st = make_state(sysm, LINE3, backend="abstract", mode="dataflow")
    fire(st, "open", (0, 1, 2))
    fire(st, "open", (3, 4, 5))
    # job 1 grabs the left link; job 2 grabs the right link *out of order*
    # (its left-link request is older but has no data dependency)
    fire(st, "genent", (0, 1))
    fire(st, "genent", (4, 5))
    assert enabled_transitions(st) == []
    rep = classify_stuck(st)
    assert rep.kind == "deadlock"
    assert len(rep.cycle) == 2
    assert {ip for ip, _ in rep.cycle} == {1, 4}
    assert all(part == 1 for _, part in rep.cycle)  # both middle processes
    assert "wait cycle" in str(rep)


def test_deadlock_needs_out_of_order_issue():
    sysm = crossed_pipelines()
    ordered = explore(sysm, LINE3, mode="heads")
    assert not ordered.can_deadlock
    assert ordered.outcomes[("completed",)] > 0


def test_exhaustive_enumeration_finds_deadlock():
    sysm = crossed_pipelines()
    t0 = time.monotonic()
    result = explore(sysm, LINE3, mode="dataflow")
    elapsed = time.monotonic() - t0
    assert result.can_deadlock
    assert result.outcomes[("stuck", "deadlock")] > 0
    assert result.outcomes[("completed",)] > 0
    assert not result.truncated
    assert all(len(rep.cycle) >= 2 for rep in result.deadlocks)
    assert elapsed < 5.0


# ---------------------------------------------------------------------------
# blocking, enabledness, and misc rules
# ---------------------------------------------------------------------------

def test_independent_gates_enabled_simultaneously():
    src = """
process 0 { a = init(); H(a); free a; stop; }
process 1 { b = init(); X(b); free b; stop; }
"""
    st = make_state(parse_program(src), linear(2, 1, 1), backend="abstract")
    fire(st, "init", (0,))
    fire(st, "init", (1,))
    kinds = {(t.kind, t.procs) for t in enabled_transitions(st)}
    assert ("gate", (0,)) in kinds and ("gate", (1,)) in kinds


def test_blocking_receive_absent_until_message_arrives():
    src = """
process 0 { s = open[0, 1]; s?(m: x); stop; }
process 1 { s = open[0, 1]; s[0]!(m: 1); stop; }
"""
    st = make_state(parse_program(src), linear(2, 1, 1), backend="abstract")
    fire(st, "open", (0, 1))
    assert [t.kind for t in enabled_transitions(st)] == ["send"]
    fire(st, "send", (1,))
    fire(st, "recv", (0,))
    assert st.processes[0].env["x"] == 1


def test_heap_is_fifo_per_label_with_interleaving():
    src = """
process 0 {
    s = open[0];
    s[0]!(a: 0);
    s[0]!(b: 1);
    s[0]!(a: 1);
    s?(a: x);
    s?(b: y);
    s?(a: z);
    stop;
}
"""
    res = run(parse_program(src), linear(1, 1, 1), backend="abstract")
    assert res.status == "completed"
    env = res.state.processes[0].env
    assert (env["x"], env["y"], env["z"]) == (0, 1, 1)


def test_genent_same_label_pairs_resolve_in_program_order():
    src0 = "process 0 { a = genEnt[1](l); b = genEnt[1](l); free a; free b; stop; }"
    src1 = "process 1 { c = genEnt[0](l); d = genEnt[0](l); free c; free d; stop; }"
    sysm = System(parse_program(src0).processes + parse_program(src1).processes)
    st = make_state(sysm, linear(2, 1, 2), backend="abstract", mode="dataflow")
    # identical (partner, label) keys conflict, so only the first of each
    # process's pair is issuable: exactly one pairing is offered
    ts = [t for t in enabled_transitions(st) if t.kind == "genent"]
    assert len(ts) == 1 and ts[0].indices == (0, 0)
    res = run(sysm, linear(2, 1, 2), backend="abstract", policy=DependencyResolved())
    assert res.status == "completed"


def test_illegal_choice_rejected():
    st = make_state(parse_program("process 0 { x = init(); stop; }"),
                    linear(1, 1, 1), backend="abstract")
    bogus = Transition("gate", (0,), (5,), "H")
    with pytest.raises(IllegalChoice):
        step(st, bogus)


def test_classify_on_live_state_raises():
    st = make_state(parse_program("process 0 { x = init(); free x; stop; }"),
                    linear(1, 1, 1), backend="abstract")
    with pytest.raises(NotStuck):
        classify_stuck(st)


def test_message_starvation_when_peer_stops():
    src = """
process 0 { s = open[0, 1]; s?(never: x); stop; }
process 1 { s = open[0, 1]; stop; }
"""
    res = run(parse_program(src), linear(2, 1, 1), backend="abstract")
    assert res.status == "stuck"
    assert res.stuck.kind == "message_starvation"
    assert res.stuck.label == "never"


def test_fuel_exhaustion():
    res = run(parse_program(SWAP_RELAY), linear(3, 1, 1), fuel=2)
    assert res.status == "fuel_exhausted"
    assert res.steps == 2


# ---------------------------------------------------------------------------
# derived-op expansion
# ---------------------------------------------------------------------------

def test_expansion_shapes():
    src = """
process 0 {
    s = open[0, 1];
    q = init();
    x = genEnt[1](l);
    rcxc[1](s, l, q, x);
    free q;
    stop;
}
"""
    proc = expand_derived(parse_program(src)).processes[0]
    ops = [type(i).__name__ for i in proc.body]
    # the comm half is freed right after it is measured, the data qubit at
    # its own program-level free
    assert ops == ["Open", "Init", "GenEnt", "ApplyGate", "Measure", "Free",
                   "Send", "Recv", "ApplyGate", "Free", "Stop"]
    assert proc.body[5].var == "x"
    z = proc.body[8]
    assert z.gate == "Z" and z.exponent is not None
    # fresh names never collide with names already in the program
    names = {i.var for i in proc.body if isinstance(i, (Measure, Recv))}
    assert len(names) == 2 and all(n.startswith("_e") for n in names)


def test_expansion_identity_on_primitives():
    sysm = parse_program(SWAP_CORR_ONLY)
    assert expand_derived(sysm) == sysm


TELEPORT = """
process 0 {
    s = open[0, 1];
    p = init();
    RY(0.7, p);
    x = genEnt[1](tp);
    qsend[1](s, tp, p, x);
    stop;
}

process 1 {
    s = open[0, 1];
    y = genEnt[0](tp);
    z = qrecv(s, tp, y);
    stop;
}
"""


@pytest.mark.parametrize("bits", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_teleport_atomic_vs_expanded_forced_outcomes(bits):
    import numpy as np
    expected = np.array([np.cos(0.35), np.sin(0.35)], dtype=complex)
    arch = linear(2, 1, 1)
    sysm = parse_program(TELEPORT)
    for prog in (sysm, expand_derived(sysm)):
        res = run(prog, arch, oracle=Scripted(list(bits)))
        assert res.status == "completed"
        z = res.state.processes[1].env["z"].uid
        assert res.state.backend.fidelity([z], expected) >= 1.0 - TOL


REMOTE_CX = """
process 0 {
    s = open[0, 1];
    q = init();
    H(q);
    x = genEnt[1](rc);
    rcxc[1](s, rc, q, x);
    stop;
}

process 1 {
    s = open[0, 1];
    p = init();
    y = genEnt[0](rc);
    rcxt[0](s, rc, p, y);
    stop;
}
"""


def test_remote_cx_atomic_rule():
    res = run(parse_program(REMOTE_CX), linear(2, 1, 1), seed=0)
    assert res.status == "completed"
    q = res.state.processes[0].env["q"].uid
    p = res.state.processes[1].env["p"].uid
    assert res.state.backend.fidelity([q, p], EPR_PAIR) >= 1.0 - TOL


@pytest.mark.parametrize("bits", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_remote_cx_expanded_matches(bits):
    sysm = expand_derived(parse_program(REMOTE_CX))
    res = run(sysm, linear(2, 1, 1), oracle=Scripted(list(bits)))
    assert res.status == "completed"
    q = res.state.processes[0].env["q"].uid
    p = res.state.processes[1].env["p"].uid
    assert res.state.backend.fidelity([q, p], EPR_PAIR) >= 1.0 - TOL


# ---------------------------------------------------------------------------
# determinism / congruence / robustness
# ---------------------------------------------------------------------------

def test_trace_determinism_byte_for_byte():
    sysm = parse_program(SWAP_RELAY)
    a = run(sysm, linear(3, 1, 1), policy=SeededRandom(5), seed=5)
    b = run(sysm, linear(3, 1, 1), policy=SeededRandom(5), seed=5)
    assert a.status == b.status == "completed"
    assert a.trace_jsonl() == b.trace_jsonl()


def test_outcomes_invariant_under_process_reordering():
    sysm = parse_program(SWAP_RELAY)
    flipped = System(tuple(reversed(sysm.processes)))
    a = explore(sysm, linear(3, 1, 1))
    b = explore(flipped, linear(3, 1, 1))
    assert a.outcomes == b.outcomes
    assert a.outcomes[("completed",)] > 0 and not a.can_deadlock


@settings(max_examples=60, deadline=None)
@given(systems())
def test_runtime_never_crashes_on_arbitrary_programs(sysm):
    # ill-typed programs must block (and classify), not throw; the per-step
    # conservation assertions run throughout
    res = run(sysm, linear(10, 2, 2), backend="abstract", seed=0)
    assert res.status in ("completed", "stuck", "fuel_exhausted")
    if res.status == "stuck":
        assert res.stuck.kind in (
            "deadlock", "qubit_exhaustion", "message_starvation", "unknown")
