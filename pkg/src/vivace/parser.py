"""Tokenizer and parser for the voice/parameter language.

One statement per line: ``voice.param = expr`` where expr is a source
call (``youtube('url')``, ``sample('path')``, ``osc('sine')``) or a
bracketed sequence, optionally a comprehension, followed by a postfix
operator chain. ``#`` starts a comment. Parsing never aborts on the
first problem: bad lines are skipped and reported so a performer sees
every error at once.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import VivaceError
from .seqcore import Arith, BinOp, Neg, Num, SeqOperator, Var

KEYWORDS = frozenset({"for", "in", "reverse", "inverse", "transpose"})
SOURCE_FUNCS = ("youtube", "sample", "osc")

_PUNCT = {
    ".": "dot",
    "=": "equals",
    "[": "lbracket",
    "]": "rbracket",
    ",": "comma",
    "(": "lparen",
    ")": "rparen",
    "+": "plus",
    "-": "minus",
    "*": "star",
    "/": "slash",
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")


@dataclass(frozen=True)
class Span:
    line: int  # 1-based
    col: int   # 1-based
    length: int = 1


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


class LexError(VivaceError):
    def __init__(self, message, span):
        super().__init__(message)
        self.message = message
        self.span = span


class ParseError(VivaceError):
    """Unexpected token. ``expected`` is a set of human-readable descriptions."""

    def __init__(self, expected, found, span):
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        self.span = span
        super().__init__(self.message)

    @property
    def message(self):
        return f"expected {_join_expected(self.expected)}, found {self.found}"


def _join_expected(items):
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " or " + items[-1]


# --- AST ---------------------------------------------------------------------
#
# Spans are carried for diagnostics but excluded from equality so that
# pretty-print round trips compare structurally.

@dataclass(frozen=True)
class SourceCall:
    func: str  # youtube | sample | osc
    arg: str


@dataclass(frozen=True)
class SeqLiteral:
    elements: tuple  # tuple[Arith, ...]
    ops: tuple = ()  # tuple[SeqOperator, ...]


@dataclass(frozen=True)
class Comprehension:
    body: Arith
    var: str
    domain: tuple  # tuple[Arith, ...]
    ops: tuple = ()


Expr = Union[SourceCall, SeqLiteral, Comprehension]


@dataclass(frozen=True)
class Statement:
    voice: str
    param: str
    rhs: Expr
    span: Span = field(default=Span(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    statements: tuple  # tuple[Statement, ...]


@dataclass(frozen=True)
class ParseResult:
    program: Program
    errors: tuple  # tuple[LexError | ParseError, ...]

    @property
    def ok(self):
        return not self.errors


# --- lexer -------------------------------------------------------------------

def _tokenize_line(text: str, line_no: int) -> list[Token]:
    """Tokens of one physical line, without the trailing newline token."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            break  # comment runs to end of line
        col = i + 1
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, Span(line_no, col)))
            i += 1
            continue
        if ch in "'\"":
            end = text.find(ch, i + 1)
            if end < 0:
                raise LexError(
                    "unterminated string literal", Span(line_no, col, n - i)
                )
            tokens.append(
                Token("string", text[i + 1 : end], Span(line_no, col, end - i + 1))
            )
            i = end + 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(Token("number", m.group(), Span(line_no, col, len(m.group()))))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, Span(line_no, col, len(word))))
            i = m.end()
            continue
        raise LexError(f"illegal character {ch!r}", Span(line_no, col))
    return tokens


def tokenize(source: str) -> list[Token]:
    """Deterministic token stream for a whole source text.

    Emits a newline token per line break and a final eof token. Raises
    LexError on the first illegal character; parse() below is the
    error-collecting entry point.
    """
    tokens = []
    lines = source.split("\n")
    for idx, line in enumerate(lines):
        line_no = idx + 1
        tokens.extend(_tokenize_line(line, line_no))
        if idx < len(lines) - 1:
            tokens.append(Token("newline", "\n", Span(line_no, len(line) + 1)))
    last_line = len(lines)
    tokens.append(Token("eof", "", Span(last_line, len(lines[-1]) + 1, 0)))
    return tokens


# --- parser ------------------------------------------------------------------

def _found(tok: Token | None) -> str:
    if tok is None:
        return "end of line"
    if tok.kind == "string":
        return "string"
    return f"'{tok.text}'"


class _LineParser:
    """Recursive descent over the tokens of a single line."""

    def __init__(self, tokens, line_no):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def end_span(self):
        last = self.tokens[-1].span
        return Span(self.line_no, last.col + last.length, 0)

    def error(self, expected):
        tok = self.peek()
        span = tok.span if tok is not None else self.end_span()
        raise ParseError(expected, _found(tok), span)

    def expect(self, kind, description):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.error({description})
        return self.next()

    def at_punct(self, kind):
        tok = self.peek()
        return tok is not None and tok.kind == kind

    def at_keyword(self, word):
        tok = self.peek()
        return tok is not None and tok.kind == "keyword" and tok.text == word

    # statement := ident '.' dotted-ident '=' expr
    def statement(self):
        head = self.peek()
        voice_tok = self.expect("ident", "identifier")
        self.expect("dot", "'.'")
        param = self.expect("ident", "identifier").text
        # dotted parameter names (eq.low) fold into one identifier
        while self.at_punct("dot"):
            self.next()
            param += "." + self.expect("ident", "identifier").text
        self.expect("equals", "'='")
        rhs = self.expr()
        if self.peek() is not None:
            self.error({"'reverse'", "'inverse'", "'transpose'", "end of line"})
        return Statement(voice_tok.text, param, rhs, span=head.span)

    def expr(self):
        tok = self.peek()
        if tok is not None and tok.kind == "ident":
            if tok.text in SOURCE_FUNCS:
                return self.source_call()
            raise ParseError(
                {"source function (youtube, sample or osc)", "'['"},
                _found(tok),
                tok.span,
            )
        if self.at_punct("lbracket"):
            return self.sequence()
        self.error({"'['", "source function (youtube, sample or osc)"})

    def source_call(self):
        func = self.next().text
        self.expect("lparen", "'('")
        arg = self.expect("string", "string").text
        self.expect("rparen", "')'")
        return SourceCall(func, arg)

    # seq := '[' arith (',' arith)* ']' opchain
    #      | '[' arith 'for' ident 'in' '[' arith (',' arith)* ']' ']' opchain
    def sequence(self):
        self.expect("lbracket", "'['")
        first = self.arith()
        if self.at_keyword("for"):
            self.next()
            var = self.expect("ident", "identifier").text
            tok = self.peek()
            if tok is None or not (tok.kind == "keyword" and tok.text == "in"):
                self.error({"'in'"})
            self.next()
            self.expect("lbracket", "'['")
            domain = [self.arith()]
            while self.at_punct("comma"):
                self.next()
                domain.append(self.arith())
            self.expect("rbracket", "']'")
            self.expect("rbracket", "']'")
            return Comprehension(first, var, tuple(domain), self.op_chain())
        elements = [first]
        while self.at_punct("comma"):
            self.next()
            elements.append(self.arith())
        if not self.at_punct("rbracket"):
            self.error({"','", "']'", "'for'"})
        self.next()
        return SeqLiteral(tuple(elements), self.op_chain())

    def op_chain(self):
        ops = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "keyword":
                return tuple(ops)
            if tok.text in ("reverse", "inverse"):
                self.next()
                ops.append(SeqOperator(tok.text))
            elif tok.text == "transpose":
                self.next()
                ops.append(SeqOperator("transpose", self.signed_number()))
            else:
                return tuple(ops)

    def signed_number(self):
        sign = 1.0
        if self.at_punct("plus"):
            self.next()
        elif self.at_punct("minus"):
            self.next()
            sign = -1.0
        tok = self.peek()
        if tok is None or tok.kind != "number":
            self.error({"number"})
        self.next()
        return sign * float(tok.text)

    # arith := term (('+'|'-') term)* with * and / binding tighter
    def arith(self):
        node = self.term()
        while self.at_punct("plus") or self.at_punct("minus"):
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at_punct("star") or self.at_punct("slash"):
            op = self.next().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        tok = self.peek()
        if tok is None:
            self.error({"number"})
        if tok.kind == "number":
            self.next()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.next()
            return Var(tok.text)
        if tok.kind == "minus":
            self.next()
            return Neg(self.factor())
        if tok.kind == "lparen":
            self.next()
            node = self.arith()
            self.expect("rparen", "')'")
            return node
        self.error({"number"})


def parse(source: str) -> ParseResult:
    """Parse a whole source text, collecting every error.

    Recovery is per line: a line that fails to lex or parse contributes
    one diagnostic and no statement; every other line is unaffected.
    """
    statements = []
    errors = []
    for idx, line in enumerate(source.split("\n")):
        line_no = idx + 1
        try:
            tokens = _tokenize_line(line, line_no)
        except LexError as err:
            errors.append(err)
            continue
        if not tokens:
            continue
        lp = _LineParser(tokens, line_no)
        try:
            statements.append(lp.statement())
        except ParseError as err:
            errors.append(err)
    return ParseResult(Program(tuple(statements)), tuple(errors))


def parse_program(source: str) -> Program:
    """Parse and raise the first error if the source is not clean."""
    result = parse(source)
    if result.errors:
        raise result.errors[0]
    return result.program


# --- diagnostics -------------------------------------------------------------

def format_diagnostics(errors, source: str) -> str:
    """Human-readable error report: position, message, caret-marked excerpt."""
    if not errors:
        return ""
    lines = source.split("\n")
    blocks = []
    for err in sorted(errors, key=lambda e: (e.span.line, e.span.col)):
        span = err.span
        src_line = lines[span.line - 1] if span.line - 1 < len(lines) else ""
        blocks.append(
            f"{span.line}:{span.col}: {err.message}\n"
            f"  {src_line}\n"
            f"  {' ' * (span.col - 1)}^\n"
        )
    return "".join(blocks)


def diagnostics_json(errors) -> str:
    """Structured diagnostic form for tooling: {"errors": [{line, col, message}]}."""
    payload = {
        "errors": [
            {"line": e.span.line, "col": e.span.col, "message": e.message}
            for e in sorted(errors, key=lambda e: (e.span.line, e.span.col))
        ]
    }
    return json.dumps(payload, sort_keys=True)


# --- canonical pretty printer -------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_arith(node: Arith) -> str:
    if isinstance(node, Num):
        return format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = format_arith(node.operand)
        if isinstance(node.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        left = format_arith(node.left)
        if isinstance(node.left, BinOp) and _PREC[node.left.op] < prec:
            left = f"({left})"
        right = format_arith(node.right)
        # left-associative grammar: parenthesize same-precedence right children
        if isinstance(node.right, BinOp) and _PREC[node.right.op] <= prec:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an arithmetic node: {node!r}")


def format_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _format_ops(ops) -> str:
    parts = []
    for op in ops:
        if op.kind == "transpose":
            sign = "-" if op.amount < 0 else "+"
            parts.append(f" transpose {sign}{format_number(abs(op.amount))}")
        else:
            parts.append(f" {op.kind}")
    return "".join(parts)


def format_statement(stmt: Statement) -> str:
    rhs = stmt.rhs
    if isinstance(rhs, SourceCall):
        body = f"{rhs.func}('{rhs.arg}')"
    elif isinstance(rhs, SeqLiteral):
        body = "[" + ", ".join(format_arith(e) for e in rhs.elements) + "]"
        body += _format_ops(rhs.ops)
    elif isinstance(rhs, Comprehension):
        domain = ", ".join(format_arith(e) for e in rhs.domain)
        body = f"[{format_arith(rhs.body)} for {rhs.var} in [{domain}]]"
        body += _format_ops(rhs.ops)
    else:
        raise TypeError(f"not an expression: {rhs!r}")
    return f"{stmt.voice}.{stmt.param} = {body}"


def format_program(program: Program) -> str:
    return "".join(format_statement(s) + "\n" for s in program.statements)
