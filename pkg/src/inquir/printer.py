"""Canonical pretty-printer.  ``parse_program(print_program(s)) == s`` for every
well-formed system, which the property suite checks exhaustively."""

from __future__ import annotations

from .ast import (
    And, ApplyGate, Assign, BitLit, Close, EntSwap, Expr, Free, GenEnt, If,
    Init, Instr, Measure, Not, Open, Process, QRecv, QSend, Recv,
    RemoteCxControl, RemoteCxTarget, Send, Stop, System, Var, Xor,
)

__all__ = ["print_program", "print_expr", "print_instr"]

_INDENT = "    "


def print_expr(e: Expr) -> str:
    # non-atomic operands always get parentheses, so re-parsing rebuilds the
    # identical tree regardless of precedence
    if isinstance(e, BitLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        return "!" + _operand(e.operand)
    if isinstance(e, And):
        return f"{_operand(e.left)} & {_operand(e.right)}"
    if isinstance(e, Xor):
        return f"{_operand(e.left)} ^ {_operand(e.right)}"
    raise TypeError(f"not an expression: {e!r}")


def _operand(e: Expr) -> str:
    if isinstance(e, (BitLit, Var)):
        return print_expr(e)
    return "(" + print_expr(e) + ")"


def _atom(e: Expr) -> str:
    """Exponent position accepts only atoms; parenthesize anything bigger."""
    return _operand(e)


def print_instr(ins: Instr, depth: int = 0) -> str:
    pad = _INDENT * depth
    if isinstance(ins, Stop):
        return pad + "stop;"
    if isinstance(ins, Open):
        parts = ", ".join(str(p) for p in ins.participants)
        return f"{pad}{ins.var} = open[{parts}];"
    if isinstance(ins, Close):
        return f"{pad}close({ins.session});"
    if isinstance(ins, Init):
        return f"{pad}{ins.var} = init();"
    if isinstance(ins, Free):
        return f"{pad}free {ins.var};"
    if isinstance(ins, Assign):
        return f"{pad}{ins.var} = {print_expr(ins.expr)};"
    if isinstance(ins, ApplyGate):
        exp = "^" + _atom(ins.exponent) if ins.exponent is not None else ""
        parts = [repr(p) for p in ins.params] + [print_expr(a) for a in ins.args]
        return f"{pad}{ins.gate}{exp}({', '.join(parts)});"
    if isinstance(ins, Measure):
        args = ", ".join(print_expr(a) for a in ins.args)
        return f"{pad}{ins.var} = measure({args});"
    if isinstance(ins, GenEnt):
        return f"{pad}{ins.var} = genEnt[{ins.partner}]({ins.label});"
    if isinstance(ins, EntSwap):
        return (f"{pad}({ins.var1}, {ins.var2}) = "
                f"entSwap({print_expr(ins.arg1)}, {print_expr(ins.arg2)});")
    if isinstance(ins, QSend):
        return (f"{pad}qsend[{ins.partner}]({ins.session}, {ins.label}, "
                f"{print_expr(ins.payload)}, {print_expr(ins.comm)});")
    if isinstance(ins, QRecv):
        return (f"{pad}{ins.var} = qrecv({ins.session}, {ins.label}, "
                f"{print_expr(ins.comm)});")
    if isinstance(ins, RemoteCxControl):
        return (f"{pad}rcxc[{ins.partner}]({ins.session}, {ins.label}, "
                f"{print_expr(ins.qubit)}, {print_expr(ins.comm)});")
    if isinstance(ins, RemoteCxTarget):
        return (f"{pad}rcxt[{ins.partner}]({ins.session}, {ins.label}, "
                f"{print_expr(ins.qubit)}, {print_expr(ins.comm)});")
    if isinstance(ins, Send):
        return (f"{pad}{ins.session}[{ins.partner}]!"
                f"({ins.label}: {print_expr(ins.value)});")
    if isinstance(ins, Recv):
        return f"{pad}{ins.session}?({ins.label}: {ins.var});"
    if isinstance(ins, If):
        lines = [f"{pad}if {print_expr(ins.cond)} {{"]
        lines += [print_instr(i, depth + 1) for i in ins.then_body]
        lines.append(f"{pad}}} else {{")
        lines += [print_instr(i, depth + 1) for i in ins.else_body]
        lines.append(pad + "}")
        return "\n".join(lines)
    raise TypeError(f"not an instruction: {ins!r}")


def print_process(p: Process) -> str:
    lines = [f"process {p.participant} {{"]
    lines += [print_instr(i, 1) for i in p.body]
    lines.append("}")
    return "\n".join(lines)


def print_program(system: System) -> str:
    """Render a system in canonical concrete syntax (trailing newline included)."""
    return "\n\n".join(print_process(p) for p in system.processes) + "\n"
