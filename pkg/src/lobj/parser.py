"""Concrete ASCII syntax: lexer, recursive-descent parser, pretty-printer.

Surface forms::

    <>                      empty object
    < e <- m = e' >         extension / override
    < e <- m : T = e' >     annotated extension
    e # m                   send
    \\x. e   \\x: T. e        abstraction
    sel(e1, m, e2)          lookup form (tests only)
    (e : T)                 ascription
    e1 + e2                 sugar for ``plus e1 e2``
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .terms import App, Ascribe, Const, Empty, Ext, Lam, Send, Sel, Term, Var, fresh_name, free_vars
from .typexpr import Arrow, ConstType, Obj, Pro, Row, TVar, Type

CONST_TYPES = frozenset({"int", "bool", "str", "colors"})
MODES = ("plain", "sub")


class LobjSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        self.line, self.col, self.expected = line, col, frozenset(expected)
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<INT>[0-9]+)
  | (?P<IDENT>[a-zA-Z_][a-zA-Z0-9_']*)
  | (?P<sym><>|<-|->|=>|[<>\\.:=#(),;\[\]+])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise LobjSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Token(s if kind == "sym" else kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = m.start() + s.rindex("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    toks.append(Token("EOF", "", line, col))
    return toks


# directives -----------------------------------------------------------------

@dataclass(frozen=True)
class CheckType:
    target: str
    expected: Optional[Type]  # None for reject
    mode: Optional[str]  # None: plain for accept, both for reject
    polarity: str  # "accept" | "reject"
    line: int = 0


@dataclass(frozen=True)
class EvalTo:
    target: str
    expected: Term
    fuel: Optional[int]
    mode: Optional[str] = None
    line: int = 0


@dataclass(frozen=True)
class TraceLen:
    target: str
    expected_steps: int
    line: int = 0


Directive = Union[CheckType, EvalTo, TraceLen]


@dataclass
class SourceFile:
    prelude_imports: list[str] = field(default_factory=list)
    defs: list[tuple[str, Term]] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)


# parser ---------------------------------------------------------------------

_ATOM_START = frozenset({"<>", "<", "sel", "(", "IDENT", "INT", "STRING"})


class Parser:
    def __init__(self, text: str, const_types: frozenset[str] = CONST_TYPES):
        self.toks = tokenize(text)
        self.i = 0
        self.const_types = const_types

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text == word

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: set[str] | frozenset[str], what: str | None = None):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise LobjSyntaxError(what or f"unexpected {found}", t.line, t.col, frozenset(expected))

    def expect(self, kind: str) -> Token:
        if not self.at(kind):
            self.fail({kind})
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            self.fail({word})
        return self.advance()

    def ident(self) -> str:
        if not self.at("IDENT"):
            self.fail({"IDENT"})
        return self.advance().text

    def end(self):
        if not self.at("EOF"):
            self.fail({"EOF"})

    # terms
    def term(self) -> Term:
        if self.at("\\"):
            start = self.advance()
            x = self.ident()
            annot = None
            if self.at(":"):
                self.advance()
                annot = self.type()
            self.expect(".")
            body = self.term()
            return Lam(x, annot, body, (start.line, start.col))
        return self.sum()

    def sum(self) -> Term:
        e = self.send()
        while self.at("+"):
            op = self.advance()
            rhs = self.send()
            e = App(App(Var("plus", (op.line, op.col)), e), rhs, (op.line, op.col))
        return e

    def send(self) -> Term:
        e = self.app()
        while self.at("#"):
            op = self.advance()
            e = Send(e, self.ident(), (op.line, op.col))
        return e

    def _atom_start(self) -> bool:
        t = self.tok
        if t.kind == "IDENT" and t.text == "sel":
            return True
        return t.kind in _ATOM_START

    def app(self) -> Term:
        if not self._atom_start():
            self.fail(_ATOM_START | {"\\"})
        e = self.atom()
        while self._atom_start():
            a = self.atom()
            e = App(e, a, e.pos)
        return e

    def atom(self) -> Term:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "<>":
            self.advance()
            return Empty(pos)
        if t.kind == "<":
            self.advance()
            obj = self.term()
            self.expect("<-")
            m = self.ident()
            annot = None
            if self.at(":"):
                self.advance()
                annot = self.type()
            self.expect("=")
            body = self.term()
            self.expect(">")
            if not isinstance(body, Lam):
                body = Lam(fresh_name("_s", free_vars(body)), None, body, body.pos)
            return Ext(obj, m, annot, body, pos)
        if t.kind == "IDENT" and t.text == "sel":
            self.advance()
            self.expect("(")
            obj = self.term()
            self.expect(",")
            m = self.ident()
            self.expect(",")
            r = self.term()
            self.expect(")")
            return Sel(obj, m, r, pos)
        if t.kind == "(":
            self.advance()
            e = self.term()
            if self.at(":"):
                self.advance()
                ty = self.type()
                self.expect(")")
                return Ascribe(e, ty, pos)
            self.expect(")")
            return e
        if t.kind == "IDENT":
            self.advance()
            return Var(t.text, pos)
        if t.kind in ("INT", "STRING"):
            self.advance()
            return Const(t.text, pos)
        self.fail(_ATOM_START)

    # types
    def type(self) -> Type:
        dom = self.tatom()
        if self.at("->"):
            self.advance()
            return Arrow(dom, self.type())
        return dom

    def tatom(self) -> Type:
        if self.at("("):
            self.advance()
            s = self.type()
            self.expect(")")
            return s
        if self.at_word("pro") or self.at_word("obj"):
            kw = self.advance().text
            b = self.ident()
            self.expect(".")
            row = self.row()
            plus = self.plus()
            return (Pro if kw == "pro" else Obj)(b, row, plus)
        if self.at("IDENT"):
            t = self.advance()
            plus = self.plus()
            if t.text in self.const_types:
                if plus:
                    raise LobjSyntaxError(f"constant type {t.text} cannot carry '+'", t.line, t.col)
                return ConstType(t.text)
            return TVar(t.text, plus)
        self.fail({"(", "pro", "obj", "IDENT"})

    def row(self) -> Row:
        if self.at("<>"):
            self.advance()
            return Row(())
        start = self.expect("<")
        pairs: list[tuple[str, Type]] = []
        if not self.at(">"):
            while True:
                m = self.ident()
                self.expect(":")
                pairs.append((m, self.type()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(">")
        try:
            return Row.of(pairs)
        except ValueError as exc:
            raise LobjSyntaxError(str(exc), start.line, start.col) from None

    def plus(self) -> frozenset[str]:
        ms: set[str] = set()
        while self.at("+"):
            self.advance()
            ms.add(self.ident())
            # a comma continues the list unless it starts the next row entry
            while self.at(",") and self.peek().kind == "IDENT" and self.peek(2).kind != ":":
                self.advance()
                ms.add(self.ident())
        return frozenset(ms)

    # files
    def opts(self) -> tuple[Optional[str], Optional[int]]:
        if not self.at("["):
            return None, None
        self.advance()
        if not (self.at_word("plain") or self.at_word("sub")):
            self.fail(set(MODES))
        mode = self.advance().text
        fuel = None
        if self.at(","):
            self.advance()
            self.expect_word("fuel")
            self.expect("=")
            fuel = int(self.expect("INT").text)
        self.expect("]")
        return mode, fuel

    def file(self) -> SourceFile:
        src = SourceFile()
        names: set[str] = set()
        while not self.at("EOF"):
            if self.at_word("def"):
                start = self.advance()
                name = self.ident()
                if name in names:
                    raise LobjSyntaxError(f"duplicate definition {name}", start.line, start.col)
                names.add(name)
                self.expect("=")
                src.defs.append((name, self.term()))
                self.expect(";")
                continue
            if not self.at("#"):
                self.fail({"def", "#use", "#check", "#reject", "#eval", "#steps"})
            hash_tok = self.advance()
            word = self.tok
            if word.kind != "IDENT" or word.text not in ("use", "check", "reject", "eval", "steps"):
                self.fail({"use", "check", "reject", "eval", "steps"})
            self.advance()
            line = hash_tok.line
            if word.text == "use":
                src.prelude_imports.append(_unquote(self.expect("STRING").text))
            elif word.text == "check":
                target = self.ident()
                self.expect(":")
                ty = self.type()
                mode, _ = self.opts()
                src.directives.append(CheckType(target, ty, mode, "accept", line))
            elif word.text == "reject":
                target = self.ident()
                mode, _ = self.opts()
                src.directives.append(CheckType(target, None, mode, "reject", line))
            elif word.text == "eval":
                target = self.ident()
                self.expect("=>")
                expected = self.term()
                mode, fuel = self.opts()
                src.directives.append(EvalTo(target, expected, fuel, mode, line))
            else:
                target = self.ident()
                self.expect("=")
                src.directives.append(TraceLen(target, int(self.expect("INT").text), line))
            self.expect(";")
        return src


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def parse_term(text: str, const_types: frozenset[str] = CONST_TYPES) -> Term:
    p = Parser(text, const_types)
    e = p.term()
    p.end()
    return e


def parse_type(text: str, const_types: frozenset[str] = CONST_TYPES) -> Type:
    p = Parser(text, const_types)
    s = p.type()
    p.end()
    return s


def parse_file(text: str, const_types: frozenset[str] = CONST_TYPES) -> SourceFile:
    return Parser(text, const_types).file()


# pretty-printing ------------------------------------------------------------

def _plus(p: frozenset[str]) -> str:
    return " + " + ", ".join(sorted(p)) if p else ""


def pretty_type(s: Type) -> str:
    match s:
        case ConstType(n):
            return n
        case TVar(t, p):
            return t + _plus(p)
        case Pro(b, r, p) | Obj(b, r, p):
            kw = "pro" if isinstance(s, Pro) else "obj"
            body = ", ".join(f"{m}: {pretty_type(x)}" for m, x in r)
            return f"{kw} {b}.<{body}>{_plus(p)}"
        case Arrow(d, c):
            ds = pretty_type(d)
            if isinstance(d, Arrow):
                ds = f"({ds})"
            return f"{ds} -> {pretty_type(c)}"
    raise TypeError(f"not a type: {s!r}")


_LAM, _SEND, _APP, _ATOM = 0, 1, 2, 3


def pretty_term(e: Term) -> str:
    return _pt(e, _LAM)


def _pt(e: Term, level: int) -> str:
    match e:
        case Const(c):
            return c
        case Var(x):
            return x
        case Empty():
            return "<>"
        case Lam(x, t, b):
            head = f"\\{x}: {pretty_type(t)}." if t is not None else f"\\{x}."
            s = f"{head} {_pt(b, _LAM)}"
            return f"({s})" if level > _LAM else s
        case Send(o, m):
            s = f"{_pt(o, _APP)} # {m}"
            return f"({s})" if level > _SEND else s
        case App(f, a):
            s = f"{_pt(f, _APP)} {_pt(a, _ATOM)}"
            return f"({s})" if level > _APP else s
        case Ext(o, m, t, b):
            recv = _pt(o, _LAM)
            pad = " " if recv.startswith("<") else ""
            ann = f" : {pretty_type(t)}" if t is not None else ""
            return f"<{pad}{recv} <- {m}{ann} = {_pt(b, _LAM)}{pad}>"
        case Sel(o, m, r):
            return f"sel({_pt(o, _LAM)}, {m}, {_pt(r, _LAM)})"
        case Ascribe(t, ty):
            return f"({_pt(t, _LAM)} : {pretty_type(ty)})"
    raise TypeError(f"not a term: {e!r}")


def pretty(x) -> str:
    """Pretty-print a term or a type."""
    if isinstance(x, (ConstType, Arrow, TVar, Pro, Obj)):
        return pretty_type(x)
    return pretty_term(x)


def pretty_file(src: SourceFile) -> str:
    out: list[str] = []
    for path in src.prelude_imports:
        out.append(f'#use "{path}";')
    for name, e in src.defs:
        out.append(f"def {name} = {pretty_term(e)};")
    for d in src.directives:
        out.append(pretty_directive(d))
    return "\n".join(out) + "\n"


def _opts(mode: Optional[str], fuel: Optional[int] = None) -> str:
    if mode is None:
        return ""
    return f" [{mode}, fuel={fuel}]" if fuel is not None else f" [{mode}]"


def pretty_directive(d: Directive) -> str:
    match d:
        case CheckType(target, ty, mode, "accept"):
            return f"#check {target} : {pretty_type(ty)}{_opts(mode)};"
        case CheckType(target, _, mode, _):
            return f"#reject {target}{_opts(mode)};"
        case EvalTo(target, exp, fuel, mode):
            if fuel is not None and mode is None:
                mode = "plain"
            return f"#eval {target} => {pretty_term(exp)}{_opts(mode, fuel)};"
        case TraceLen(target, n):
            return f"#steps {target} = {n};"
    raise TypeError(f"not a directive: {d!r}")
