import pytest
from hypothesis import given
from hypothesis import strategies as st

from vivace.parser import (
    Comprehension,
    LexError,
    ParseError,
    Program,
    SeqLiteral,
    SourceCall,
    Statement,
    diagnostics_json,
    format_diagnostics,
    format_program,
    parse,
    parse_program,
    tokenize,
)
from vivace.seqcore import BinOp, Neg, Num, SeqOperator, Var


def kinds(tokens):
    return [t.kind for t in tokens]


class TestTokenize:
    def test_simple_statement(self):
        toks = tokenize("foo.pos = [1, 2]")
        assert kinds(toks) == [
            "ident", "dot", "ident", "equals", "lbracket",
            "number", "comma", "number", "rbracket", "eof",
        ]
        assert [t.text for t in toks[:3]] == ["foo", ".", "pos"]

    def test_comment_is_skipped(self):
        assert kinds(tokenize("# comment\n")) == ["newline", "eof"]

    def test_illegal_character(self):
        with pytest.raises(LexError) as err:
            tokenize("foo.@ = 1")
        assert err.value.span.line == 1
        assert err.value.span.col == 5

    def test_unterminated_string(self):
        with pytest.raises(LexError) as err:
            tokenize("foo.src = osc('sine")
        assert "unterminated" in err.value.message

    def test_spans_are_ordered_and_in_source(self):
        src = "foo.pos = [1, 2]\nbar.amp = [0.5]"
        toks = tokenize(src)
        positions = [(t.span.line, t.span.col) for t in toks]
        assert positions == sorted(positions)
        lines = src.split("\n")
        for t in toks:
            assert t.span.col - 1 <= len(lines[t.span.line - 1])

    def test_keywords_are_not_identifiers(self):
        toks = tokenize("reverse for in inverse transpose")
        assert kinds(toks) == ["keyword"] * 5 + ["eof"]

    def test_determinism(self):
        src = "foo.pos = [1, 2] reverse\n# x\nbar.note = [60]"
        assert tokenize(src) == tokenize(src)


class TestParse:
    def test_hello_world(self, hello_world):
        program = parse_program(hello_world)
        assert program == Program(
            (
                Statement(
                    "foo", "src",
                    SourceCall("youtube", "http://www.youtube.com/watch?v=XXX"),
                ),
                Statement(
                    "foo", "pos",
                    SeqLiteral((Num(10.0), Num(20.0), Num(35.0))),
                ),
                Statement(
                    "foo", "cdur",
                    SeqLiteral(
                        (
                            BinOp("/", Num(1.0), Num(2.0)),
                            BinOp("/", Num(1.0), Num(4.0)),
                            BinOp("/", Num(1.0), Num(8.0)),
                            BinOp("/", Num(1.0), Num(16.0)),
                            Num(1.0),
                        )
                    ),
                ),
            )
        )

    def test_comprehension_with_reverse(self):
        program = parse_program("foo.pos = [1/i+1 for i in [1, 2, 3]] reverse")
        (stmt,) = program.statements
        assert stmt.rhs == Comprehension(
            BinOp("+", BinOp("/", Num(1.0), Var("i")), Num(1.0)),
            "i",
            (Num(1.0), Num(2.0), Num(3.0)),
            (SeqOperator("reverse"),),
        )

    def test_operator_chain_order_is_textual(self):
        program = parse_program("foo.pos = [1] transpose +2 reverse inverse")
        ops = program.statements[0].rhs.ops
        assert [o.kind for o in ops] == ["transpose", "reverse", "inverse"]
        assert ops[0].amount == 2.0

    def test_transpose_signs(self):
        for text, amount in [("+2", 2.0), ("-3", -3.0), ("2", 2.0), ("1.5", 1.5)]:
            program = parse_program(f"foo.pos = [1] transpose {text}")
            assert program.statements[0].rhs.ops[0].amount == amount

    def test_dotted_parameter(self):
        program = parse_program("foo.eq.low = [3]")
        assert program.statements[0].param == "eq.low"

    def test_unterminated_sequence(self):
        result = parse("foo.pos = [1,")
        assert len(result.errors) == 1
        assert isinstance(result.errors[0], ParseError)
        assert "expected number" in result.errors[0].message

    def test_unknown_source_function_fails_at_parse_time(self):
        result = parse("foo.src = tape('x.wav')")
        assert result.errors
        assert "source function" in result.errors[0].message

    def test_recovery_collects_all_errors(self):
        src = "foo.pos = [1,\nbar.amp = [0.5]\nbaz.pos = ]\n"
        result = parse(src)
        assert [e.span.line for e in result.errors] == [1, 3]
        assert [s.voice for s in result.program.statements] == ["bar"]

    def test_comments_and_blanks_do_not_change_ast(self, hello_world):
        stripped = "\n".join(
            line for line in hello_world.split("\n") if not line.startswith("#")
        )
        assert parse_program(hello_world) == parse_program(stripped)

    def test_statements_have_one_voice_and_one_param(self):
        program = parse_program("foo.pos = [1]")
        stmt = program.statements[0]
        assert stmt.voice == "foo" and stmt.param == "pos"
        assert parse("foo = [1]").errors  # missing param
        assert parse(".pos = [1]").errors  # missing voice

    def test_case_sensitive_identifiers(self):
        program = parse_program("Foo.pos = [1]\nfoo.pos = [2]")
        assert [s.voice for s in program.statements] == ["Foo", "foo"]

    def test_parenthesized_arithmetic(self):
        program = parse_program("foo.pos = [(1+2)*3, -(2*2), 2*-3]")
        values = program.statements[0].rhs.elements
        assert values == (
            BinOp("*", BinOp("+", Num(1.0), Num(2.0)), Num(3.0)),
            Neg(BinOp("*", Num(2.0), Num(2.0))),
            BinOp("*", Num(2.0), Neg(Num(3.0))),
        )

    def test_trailing_garbage_is_an_error(self):
        assert parse("foo.pos = [1] 5").errors
        assert parse("foo.pos = [1] reverse 5").errors

    def test_determinism(self, hello_world):
        a = parse(hello_world)
        b = parse(hello_world)
        assert a.program == b.program
        assert format_diagnostics(a.errors, hello_world) == format_diagnostics(
            b.errors, hello_world
        )


class TestDiagnostics:
    def test_single_error_format(self):
        src = "foo.pos = [1,]"
        result = parse(src)
        text = format_diagnostics(result.errors, src)
        assert text == (
            "1:14: expected number, found ']'\n"
            "  foo.pos = [1,]\n"
            "               ^\n"
        )

    def test_empty_error_list(self):
        assert format_diagnostics([], "foo.pos = [1]") == ""

    def test_two_errors_in_line_order(self):
        src = "foo.pos = [1,\nok.amp = [1]\nbar.pos = ]"
        result = parse(src)
        text = format_diagnostics(result.errors, src)
        blocks = [b for b in text.split("\n") if b.startswith(("1:", "3:"))]
        assert len(blocks) == 2
        assert blocks[0].startswith("1:")
        assert blocks[1].startswith("3:")

    def test_json_form(self):
        result = parse("foo.pos = [1,]")
        payload = diagnostics_json(result.errors)
        assert payload == (
            '{"errors": [{"col": 14, "line": 1, '
            '"message": "expected number, found \']\'"}]}'
        )


# strategies generating structurally valid ASTs for the round-trip property
idents = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("for", "in", "reverse", "inverse", "transpose")
)
numbers = st.one_of(
    st.integers(min_value=0, max_value=999).map(float),
    st.floats(min_value=0, max_value=999, allow_nan=False).map(lambda x: round(x, 4)),
).map(Num)


def arith_nodes(var_names):
    leaves = numbers if var_names is None else st.one_of(numbers, var_names.map(Var))
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            st.builds(Neg, children),
            st.builds(
                BinOp, st.sampled_from("+-*/"), children, children
            ),
        ),
        max_leaves=6,
    )


op_chain = st.lists(
    st.one_of(
        st.just(SeqOperator("reverse")),
        st.just(SeqOperator("inverse")),
        st.integers(min_value=-99, max_value=99).map(
            lambda n: SeqOperator("transpose", float(n))
        ),
    ),
    max_size=3,
).map(tuple)

seq_literals = st.builds(
    SeqLiteral,
    st.lists(arith_nodes(None), min_size=1, max_size=5).map(tuple),
    op_chain,
)
comprehensions = idents.flatmap(
    lambda var: st.builds(
        Comprehension,
        arith_nodes(st.just(var)),
        st.just(var),
        st.lists(numbers, min_size=1, max_size=4).map(tuple),
        op_chain,
    )
)
source_calls = st.builds(
    SourceCall,
    st.sampled_from(["youtube", "sample", "osc"]),
    st.sampled_from(["http://example.com/v", "kick.wav", "sine"]),
)
statements = st.builds(
    Statement, idents, idents, st.one_of(seq_literals, comprehensions, source_calls)
)
programs = st.lists(statements, max_size=6).map(tuple).map(Program)


class TestRoundTrip:
    @given(programs)
    def test_format_then_parse_is_identity(self, program):
        text = format_program(program)
        assert parse_program(text) == program

    def test_fixture_round_trip(self, hello_world, operators_listing):
        for src in (hello_world, operators_listing):
            program = parse_program(src)
            assert parse_program(format_program(program)) == program
