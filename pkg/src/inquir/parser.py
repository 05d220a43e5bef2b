"""Lexer and recursive-descent parser for the concrete syntax.

Grammar sketch (one production per statement form)::

    program  := proc+
    proc     := "process" INT "{" stmt* "}"
    stmt     := "stop" ";"
              | "close" "(" IDENT ")" ";"
              | "free" IDENT ";"
              | "if" expr "{" stmt* "}" "else" "{" stmt* "}"
              | "(" IDENT "," IDENT ")" "=" "entSwap" "(" expr "," expr ")" ";"
              | GATE ("^" atom)? "(" (num ",")* expr ("," expr)* ")" ";"
              | "qsend" "[" INT "]" "(" IDENT "," IDENT "," expr "," expr ")" ";"
              | "rcxc"  "[" INT "]" "(" IDENT "," IDENT "," expr "," expr ")" ";"
              | "rcxt"  "[" INT "]" "(" IDENT "," IDENT "," expr "," expr ")" ";"
              | IDENT "=" rhs ";"
              | IDENT "[" INT "]" "!" "(" IDENT ":" expr ")" ";"
              | IDENT "?" "(" IDENT ":" IDENT ")" ";"
    rhs      := "open" "[" INT ("," INT)* "]"
              | "init" "(" ")"
              | "genEnt" "[" INT "]" "(" IDENT ")"
              | "qrecv" "(" IDENT "," IDENT "," expr ")"
              | "measure" "(" expr ("," expr)* ")"
              | expr
    expr     := and_e ("^" and_e)*            (xor, lowest precedence)
    and_e    := unary ("&" unary)*
    unary    := "!" unary | atom
    atom     := "0" | "1" | IDENT | "(" expr ")"

``//`` starts a line comment.  Gate names are reserved words.  Gate parameter
lists put float parameters first, then qubit operands (``RZ(0.5, q);``).
"""

from __future__ import annotations

import re

from .ast import (
    GATE_SIGNATURES, And, ApplyGate, Assign, BitLit, Close, EntSwap, Expr, Free,
    GenEnt, If, Init, Instr, Measure, Not, Open, Process, QRecv, QSend, Recv,
    RemoteCxControl, RemoteCxTarget, Send, Stop, System, Var, Xor,
)
from .errors import DuplicateProcessHeader, ParseError

__all__ = ["parse_program", "tokenize", "Token"]

KEYWORDS = frozenset({
    "process", "open", "close", "init", "free", "genEnt", "entSwap",
    "qsend", "qrecv", "rcxc", "rcxt", "measure", "if", "else", "stop",
}) | frozenset(GATE_SIGNATURES)

_TOKEN_RE = re.compile(r"""
      (?P<ws>[ \t\r\n]+|//[^\n]*)
    | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
    | (?P<int>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[{}()\[\],;=!?^&:-])
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind    # "float" | "int" | "ident" | "kw" | "punct" | "eof"
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(line, col, ["a token"], repr(text[pos]), filename)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(Token("eof", "<eof>", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[Token], filename: str):
        self.toks = toks
        self.i = 0
        self.filename = filename

    # -- token plumbing -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected) -> ParseError:
        t = self.peek()
        found = t.text if t.kind != "eof" else "end of input"
        return ParseError(t.line, t.col, expected, repr(found), self.filename)

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            raise self.fail([repr(text)])
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise self.fail([what])
        return self.advance()

    def at(self, text: str) -> bool:
        return self.peek().text == text

    # -- program ------------------------------------------------------------

    def program(self) -> System:
        procs: list[Process] = []
        seen: set[int] = set()
        while not self.peek().kind == "eof":
            header = self.peek()
            self.expect("process")
            pid = int(self.expect_kind("int", "a participant id").text)
            if pid in seen:
                raise DuplicateProcessHeader(pid, header.line)
            seen.add(pid)
            self.expect("{")
            body = self.block()
            self.expect("}")
            procs.append(Process(pid, body))
        if not procs:
            raise self.fail(["'process'"])
        return System(tuple(procs))

    def block(self) -> tuple[Instr, ...]:
        out: list[Instr] = []
        while not self.at("}") and self.peek().kind != "eof":
            out.append(self.statement())
        return tuple(out)

    # -- statements ---------------------------------------------------------

    def statement(self) -> Instr:
        t = self.peek()
        if t.text == "stop":
            self.advance(); self.expect(";")
            return Stop()
        if t.text == "close":
            self.advance(); self.expect("(")
            s = self.expect_kind("ident", "a session variable").text
            self.expect(")"); self.expect(";")
            return Close(s)
        if t.text == "free":
            self.advance()
            v = self.expect_kind("ident", "a variable").text
            self.expect(";")
            return Free(v)
        if t.text == "if":
            self.advance()
            cond = self.expr()
            self.expect("{")
            then_body = self.block()
            self.expect("}")
            self.expect("else")
            self.expect("{")
            else_body = self.block()
            self.expect("}")
            return If(cond, then_body, else_body)
        if t.text == "(":
            return self.entswap_stmt()
        if t.kind == "kw" and t.text in GATE_SIGNATURES:
            return self.gate_stmt()
        if t.text in ("qsend", "rcxc", "rcxt"):
            return self.remote_stmt()
        if t.kind == "ident":
            return self.ident_stmt()
        raise self.fail(["a statement"])

    def entswap_stmt(self) -> Instr:
        self.expect("(")
        v1 = self.expect_kind("ident", "a variable").text
        self.expect(",")
        v2 = self.expect_kind("ident", "a variable").text
        self.expect(")"); self.expect("=")
        self.expect("entSwap"); self.expect("(")
        a1 = self.expr()
        self.expect(",")
        a2 = self.expr()
        self.expect(")"); self.expect(";")
        return EntSwap(v1, v2, a1, a2)

    def gate_stmt(self) -> Instr:
        gate = self.advance().text
        n_qubits, n_params = GATE_SIGNATURES[gate]
        exponent = None
        if self.at("^"):
            self.advance()
            exponent = self.atom()
        self.expect("(")
        params = []
        for k in range(n_params):
            if k > 0:
                self.expect(",")
            params.append(self.float_param())
        args = []
        for k in range(n_qubits):
            if params or k > 0:
                self.expect(",")
            args.append(self.expr())
        self.expect(")"); self.expect(";")
        return ApplyGate(gate, tuple(params), tuple(args), exponent)

    def float_param(self) -> float:
        sign = 1.0
        if self.at("-"):
            self.advance()
            sign = -1.0
        t = self.peek()
        if t.kind not in ("float", "int"):
            raise self.fail(["a numeric parameter"])
        self.advance()
        return sign * float(t.text)

    def remote_stmt(self) -> Instr:
        op = self.advance().text
        self.expect("[")
        partner = int(self.expect_kind("int", "a participant id").text)
        self.expect("]"); self.expect("(")
        session = self.expect_kind("ident", "a session variable").text
        self.expect(",")
        label = self.expect_kind("ident", "a label").text
        self.expect(",")
        e1 = self.expr()
        self.expect(",")
        e2 = self.expr()
        self.expect(")"); self.expect(";")
        if op == "qsend":
            return QSend(partner, session, label, e1, e2)
        if op == "rcxc":
            return RemoteCxControl(partner, session, label, e1, e2)
        return RemoteCxTarget(partner, session, label, e1, e2)

    def ident_stmt(self) -> Instr:
        name = self.advance().text
        t = self.peek()
        if t.text == "=":
            self.advance()
            return self.rhs(name)
        if t.text == "[":
            self.advance()
            partner = int(self.expect_kind("int", "a participant id").text)
            self.expect("]"); self.expect("!"); self.expect("(")
            label = self.expect_kind("ident", "a label").text
            self.expect(":")
            value = self.expr()
            self.expect(")"); self.expect(";")
            return Send(name, partner, label, value)
        if t.text == "?":
            self.advance(); self.expect("(")
            label = self.expect_kind("ident", "a label").text
            self.expect(":")
            var = self.expect_kind("ident", "a variable").text
            self.expect(")"); self.expect(";")
            return Recv(name, label, var)
        raise self.fail(["'='", "'['", "'?'"])

    def rhs(self, name: str) -> Instr:
        t = self.peek()
        if t.text == "open":
            self.advance(); self.expect("[")
            parts = [int(self.expect_kind("int", "a participant id").text)]
            while self.at(","):
                self.advance()
                parts.append(int(self.expect_kind("int", "a participant id").text))
            self.expect("]"); self.expect(";")
            return Open(name, tuple(parts))
        if t.text == "init":
            self.advance(); self.expect("("); self.expect(")"); self.expect(";")
            return Init(name)
        if t.text == "genEnt":
            self.advance(); self.expect("[")
            partner = int(self.expect_kind("int", "a participant id").text)
            self.expect("]"); self.expect("(")
            label = self.expect_kind("ident", "a label").text
            self.expect(")"); self.expect(";")
            return GenEnt(name, partner, label)
        if t.text == "qrecv":
            self.advance(); self.expect("(")
            session = self.expect_kind("ident", "a session variable").text
            self.expect(",")
            label = self.expect_kind("ident", "a label").text
            self.expect(",")
            comm = self.expr()
            self.expect(")"); self.expect(";")
            return QRecv(name, session, label, comm)
        if t.text == "measure":
            self.advance(); self.expect("(")
            args = [self.expr()]
            while self.at(","):
                self.advance()
                args.append(self.expr())
            self.expect(")"); self.expect(";")
            return Measure(name, tuple(args))
        e = self.expr()
        self.expect(";")
        return Assign(name, e)

    # -- expressions --------------------------------------------------------

    def expr(self) -> Expr:
        e = self.and_expr()
        while self.at("^"):
            self.advance()
            e = Xor(e, self.and_expr())
        return e

    def and_expr(self) -> Expr:
        e = self.unary()
        while self.at("&"):
            self.advance()
            e = And(e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int" and t.text in ("0", "1"):
            self.advance()
            return BitLit(int(t.text))
        if t.kind == "ident":
            self.advance()
            return Var(t.text)
        if t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail(["'0'", "'1'", "a variable", "'('"])


def parse_program(text: str, filename: str = "<input>") -> System:
    """Parse concrete syntax into a :class:`System`.

    Raises :class:`~inquir.errors.ParseError` with the source location and the
    set of expected tokens, or :class:`~inquir.errors.DuplicateProcessHeader`
    when two blocks declare the same participant.
    """
    return _Parser(tokenize(text, filename), filename).program()
