import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobj.corpus import corpus_files
from lobj.parser import (
    CheckType,
    EvalTo,
    LobjSyntaxError,
    TraceLen,
    parse_file,
    parse_term,
    parse_type,
    pretty,
    pretty_file,
    pretty_term,
)
from lobj.terms import App, Ascribe, Const, Empty, Ext, Lam, Send, Sel, Var, alpha_eq_term
from lobj.typexpr import INT, Arrow, Pro, Row, TVar, alpha_eq_type

from conftest import CORPUS
from test_typexpr import TYPES

CONSTS = frozenset({"int", "bool", "str", "colors"})


def test_parse_extend_object():
    e = parse_term(r"< <> <- add_n = \self. <self <- n = 1> >")
    assert e == Ext(Empty(), "add_n", None, Lam("self", None, Ext(Var("self"), "n", None, Lam("_s", None, Const("1")))))


def test_parse_send():
    assert parse_term("extend # add_n") == Send(Var("extend"), "add_n")


def test_application_is_left_associative():
    assert parse_term(r"\x. x") == Lam("x", None, Var("x"))
    x = Var("x")
    assert parse_term(r"\x. x x x") == Lam("x", None, App(App(x, x), x))


def test_plus_sugar():
    assert parse_term("a + 1") == App(App(Var("plus"), Var("a")), Const("1"))


def test_sel_literal_and_ascription():
    e = parse_term(r"sel((<> : pro t.<>), m, \s. s)")
    assert e == Sel(Ascribe(Empty(), Pro("t", Row.of({}))), "m", Lam("s", None, Var("s")))


def test_send_binds_tighter_than_lambda_and_looser_than_application():
    assert parse_term("f x # m") == Send(App(Var("f"), Var("x")), "m")


def test_parse_types():
    assert parse_type("pro t. <add_n: t + n, n: int> + add_n") == Pro(
        "t", Row.of({"add_n": TVar("t", frozenset({"n"})), "n": INT}), frozenset({"add_n"}))
    assert parse_type("int -> int -> bool") == Arrow(INT, Arrow(INT, parse_type("bool")))
    cp = parse_type("obj t. <n: int, col: colors> + n, col")
    assert type(cp).__name__ == "Obj" and cp.plus == {"n", "col"}


def test_pretty_examples():
    assert pretty(Empty()) == "<>"
    result = Ext(Ext(Empty(), "add_n", None, Lam("self", None, Ext(Var("self"), "n", None, Lam("_s", None, Const("1"))))),
                 "n", None, Lam("_s", None, Const("1")))
    assert pretty(result) == r"< < <> <- add_n = \self. <self <- n = \_s. 1> > <- n = \_s. 1 >"


def test_type_round_trip_of_extend_type():
    s = parse_type("pro t.<add_n: t + n, n: int> + add_n")
    assert pretty(s) == "pro t.<add_n: t + n, n: int> + add_n"
    assert alpha_eq_type(parse_type(pretty(s)), s)


def test_directives():
    src = parse_file('#use "p.lobj";\ndef a = 1;\n#check a : int [sub];\n#reject a;\n'
                     "#eval a => 1 [plain, fuel=5];\n#steps a = 0;\n")
    assert src.prelude_imports == ["p.lobj"]
    assert [n for n, _ in src.defs] == ["a"]
    assert src.directives == [
        CheckType("a", INT, "sub", "accept", 3),
        CheckType("a", None, None, "reject", 4),
        EvalTo("a", Const("1"), 5, "plain", 5),
        TraceLen("a", 0, 6),
    ]


@pytest.mark.parametrize("text, line, col", [
    ("< <> <- m = 1", 1, 14),
    ("\\x x", 1, 4),
    ("<>\n  # ", 2, 5),
    ("(x : pro t.<n int>)", 1, 15),
    ("x $ y", 1, 3),
])
def test_syntax_error_positions(text, line, col):
    with pytest.raises(LobjSyntaxError) as info:
        parse_term(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(LobjSyntaxError) as info:
        parse_term("< <> <- m 1 >")
    assert "=" in info.value.expected


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="<>-\\.#() xm1=:\n", max_size=20))
def test_syntax_errors_point_inside_the_input(text):
    try:
        parse_term(text)
    except LobjSyntaxError as exc:
        lines = text.split("\n")
        assert 1 <= exc.line <= len(lines)
        assert 1 <= exc.col <= len(lines[exc.line - 1]) + 1


# generated ASTs ------------------------------------------------------------

NAMES = st.sampled_from(["x", "y", "self", "s'", "_s", "true", "white"])
LABELS = st.sampled_from(["m", "n", "add_n", "get_f"])
ANNOT = st.none() | TYPES


def _ast():
    leaves = st.one_of(
        NAMES.map(Var),
        st.just(Empty()),
        st.sampled_from(["0", "1", "42", '"Alice"', '"a b"']).map(Const),
    )

    def grow(sub):
        lam = st.builds(Lam, NAMES, ANNOT, sub)
        return st.one_of(
            lam,
            st.builds(App, sub, sub),
            st.builds(Ext, sub, LABELS, ANNOT, lam),
            st.builds(Send, sub, LABELS),
            st.builds(Sel, sub, LABELS, sub),
            st.builds(Ascribe, sub, TYPES),
        )

    return st.recursive(leaves, grow, max_leaves=10)


@settings(max_examples=1000, deadline=None)
@given(_ast())
def test_round_trip_generated_terms(e):
    text = pretty_term(e)
    back = parse_term(text, CONSTS)
    assert alpha_eq_term(back, e), text
    assert pretty_term(back) == text


@settings(max_examples=500, deadline=None)
@given(TYPES)
def test_round_trip_generated_types(s):
    assert alpha_eq_type(parse_type(pretty(s), CONSTS), s)


@pytest.mark.parametrize("path", corpus_files(CORPUS) + [CORPUS / "prelude.lobj"], ids=lambda p: p.name)
def test_corpus_reparses_after_pretty_printing(path):
    from lobj.corpus import load_prelude

    consts = load_prelude().const_types
    src = parse_file(path.read_text(encoding="utf-8"), consts)
    again = parse_file(pretty_file(src), consts)
    assert again.prelude_imports == src.prelude_imports
    assert len(again.defs) == len(src.defs)
    for (n1, e1), (n2, e2) in zip(src.defs, again.defs):
        assert n1 == n2 and alpha_eq_term(e1, e2)
    assert len(again.directives) == len(src.directives)
    for d1, d2 in zip(src.directives, again.directives):
        assert type(d1) is type(d2) and d1.target == d2.target
        if isinstance(d1, CheckType):
            assert d1.polarity == d2.polarity and d1.mode == d2.mode
            assert (d1.expected is None) == (d2.expected is None)
            if d1.expected is not None:
                assert alpha_eq_type(d1.expected, d2.expected)
        elif isinstance(d1, EvalTo):
            assert alpha_eq_term(d1.expected, d2.expected)
