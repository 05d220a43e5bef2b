"""Parser / printer / JSON-form tests."""

import pytest
from hypothesis import given, settings

from inquir.ast import (
    ApplyGate, Assign, BitLit, GenEnt, If, Init, Measure, Open, Recv,
    RemoteCxControl, Send, Stop, Var, Xor, instruction_count,
    system_from_json, system_to_json,
)
from inquir.errors import DuplicateProcessHeader, ParseError
from inquir.parser import parse_program
from inquir.printer import print_program

from strategies import systems

SWAP_RELAY = """
process 0 {
    q1 = init();
    s = open[0, 1, 2];
    x2 = genEnt[1](l1);
    s?(l1: w1);
    Z^w1(x2);
    rcxc[2](s, l3, q1, x2);
    free q1;
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
    q2 = init();
    s = open[0, 1, 2];
    y2 = genEnt[1](l2);
    s?(l2: w2);
    X^w2(y2);
    rcxt[0](s, l3, q2, y2);
    free q2;
    stop;
}
"""


def test_parse_swap_relay_shapes():
    sysm = parse_program(SWAP_RELAY)
    assert sysm.participants == (0, 1, 2)
    p0 = sysm.processes[0].body
    assert p0[0] == Init("q1")
    assert p0[1] == Open("s", (0, 1, 2))
    assert p0[2] == GenEnt("x2", 1, "l1")
    assert p0[3] == Recv("s", "l1", "w1")
    assert p0[4] == ApplyGate("Z", (), (Var("x2"),), Var("w1"))
    assert p0[5] == RemoteCxControl(2, "s", "l3", Var("q1"), Var("x2"))
    assert p0[-1] == Stop()
    p1 = sysm.processes[1].body
    assert p1[4] == Send("s", 0, "l1", Var("w1"))
    assert instruction_count(sysm) == 23


def test_print_parse_fixed_point():
    sysm = parse_program(SWAP_RELAY)
    text = print_program(sysm)
    again = parse_program(text)
    assert again == sysm
    # canonical text is itself a fixed point
    assert print_program(again) == text


def test_gate_params_and_if_join():
    src = """
process 4 {
    RZ(0.5, a);
    U3(0.25, -1.5, 2e-06, b);
    m = measure(a, b);
    if (m ^ 1) & !m {
        H(a);
    } else {
        free b;
    }
    v = m ^ 1;
    stop;
}
"""
    sysm = parse_program(src)
    body = sysm.processes[0].body
    assert body[0] == ApplyGate("RZ", (0.5,), (Var("a"),), None)
    assert body[1].params == (0.25, -1.5, 2e-06)
    assert isinstance(body[2], Measure)
    assert isinstance(body[3], If)
    # the join: statements after the if stay in the outer body
    assert body[4] == Assign("v", Xor(Var("m"), BitLit(1)))
    assert parse_program(print_program(sysm)) == sysm


def test_comments_ignored():
    src = "process 0 {\n  // prelude\n  x = init(); // trailing\n  stop;\n}\n"
    sysm = parse_program(src)
    assert sysm.processes[0].body == (Init("x"), Stop())


class TestParseErrors:
    def test_location_and_expected_set(self):
        with pytest.raises(ParseError) as ei:
            parse_program("process 0 {\n  q = init( ;\n}")
        err = ei.value
        assert err.line == 2
        assert err.col == 13
        assert "')'" in err.expected

    def test_unknown_statement(self):
        with pytest.raises(ParseError, match="expected"):
            parse_program("process 0 { ^ }")

    def test_bad_bit_literal(self):
        with pytest.raises(ParseError) as ei:
            parse_program("process 0 { x = 7; }")
        assert "'0'" in ei.value.expected and "'1'" in ei.value.expected

    def test_duplicate_process_header(self):
        with pytest.raises(DuplicateProcessHeader, match="participant 3"):
            parse_program("process 3 { stop; }\nprocess 3 { stop; }")

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_program("")

    def test_gate_arity_enforced(self):
        with pytest.raises(ParseError):
            parse_program("process 0 { CX(a); }")

    def test_stray_character(self):
        with pytest.raises(ParseError, match="1:13"):
            parse_program("process 0 { @ }")


def test_json_roundtrip_fixed():
    sysm = parse_program(SWAP_RELAY)
    blob = system_to_json(sysm)
    assert blob["processes"][0]["participant"] == 0
    assert blob["processes"][0]["body"][0]["op"] == "init"
    assert system_from_json(blob) == sysm


@settings(deadline=None)
@given(systems())
def test_roundtrip_property(sysm):
    assert parse_program(print_program(sysm)) == sysm


@settings(deadline=None)
@given(systems())
def test_json_roundtrip_property(sysm):
    import json
    blob = json.loads(json.dumps(system_to_json(sysm)))
    assert system_from_json(blob) == sysm
