"""Numeric sequences and the mnemonic operators that transform them.

Sequences are the only value type of the language: ordered tuples of
finite floats. Operators never mutate their input; every function here
returns a fresh tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import DivisionByZero, EvalError, UnboundVariable

Sequence = tuple  # tuple[float, ...]

OPERATOR_KINDS = ("reverse", "inverse", "transpose")


@dataclass(frozen=True)
class SeqOperator:
    """One postfix operator: reverse, inverse, or transpose with a signed amount."""

    kind: str
    amount: float | None = None

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "transpose" and self.amount is None:
            raise ValueError("transpose requires an amount")
        if self.kind != "transpose" and self.amount is not None:
            raise ValueError(f"{self.kind} takes no amount")


# --- arithmetic expressions -------------------------------------------------
#
# Sequence elements and comprehension bodies are small arithmetic trees
# built by the parser and evaluated here. Spans are not kept on these
# nodes; errors are pinned to the enclosing statement.

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Arith"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Arith"
    right: "Arith"


Arith = Union[Num, Var, Neg, BinOp]


def eval_arith(expr: Arith, env: Mapping[str, float] | None = None) -> float:
    """Evaluate an arithmetic tree with conventional precedence semantics.

    Raises DivisionByZero on x/0 and UnboundVariable for names missing
    from ``env``. Results must be finite; overflow is an EvalError.
    """
    env = env or {}
    value = _eval(expr, env)
    if not math.isfinite(value):
        raise EvalError("arithmetic produced a non-finite value")
    return value


def _eval(expr, env):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable '{expr.name}'") from None
    if isinstance(expr, Neg):
        return -_eval(expr.operand, env)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, env)
        right = _eval(expr.right, env)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0.0:
                raise DivisionByZero("division by zero")
            return left / right
        raise ValueError(f"unknown arithmetic operator {expr.op!r}")
    raise TypeError(f"not an arithmetic node: {expr!r}")


# --- sequence operators -----------------------------------------------------

def apply_operator(seq: Sequence, op: SeqOperator) -> Sequence:
    """Apply one operator to a sequence, returning a new sequence.

    reverse flips the order, inverse reflects every element about the
    first one (x_i -> 2*x_0 - x_i), transpose adds its signed amount to
    every element. Length is always preserved.
    """
    if op.kind == "reverse":
        return tuple(reversed(seq))
    if op.kind == "inverse":
        if not seq:
            return ()
        pivot = seq[0]
        return tuple(2.0 * pivot - x for x in seq)
    if op.kind == "transpose":
        return tuple(x + op.amount for x in seq)
    raise ValueError(f"unknown operator kind {op.kind!r}")


def apply_operator_chain(seq: Sequence, ops) -> Sequence:
    """Fold a list of operators over a sequence, left to right in source order."""
    out = tuple(seq)
    for op in ops:
        out = apply_operator(out, op)
    return out


def eval_comprehension(body: Arith, var: str, domain: Sequence) -> Sequence:
    """Map an arithmetic body over a domain sequence, binding ``var`` per element.

    Output length equals domain length. A division by zero is re-raised
    with the index of the offending domain element.
    """
    out = []
    for i, x in enumerate(domain):
        try:
            out.append(eval_arith(body, {var: x}))
        except DivisionByZero as err:
            raise DivisionByZero(
                f"division by zero at element {i} ({var} = {_fmt(x)})", index=i
            ) from err
    return tuple(out)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)
