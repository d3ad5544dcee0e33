"""Small-step call-by-name evaluation of object terms.

Evaluation contexts are ``[] | C e | C # m | sel(C, m, e)``.  A send in focus
fires Selection at once; the receiver is then reduced inside ``sel``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .terms import (
    PRIM_ARITY,
    App,
    Ascribe,
    Const,
    Empty,
    Ext,
    Lam,
    Send,
    Sel,
    Term,
    Var,
    all_names,
    children,
    erase,
    fresh_name,
    is_value,
    spine,
    subst_term,
)

DEFAULT_FUEL = 10_000

BETA, SELECTION, SUCCESS, NEXT, DELTA = "Beta", "Selection", "Success", "Next", "Delta"


# outcome types --------------------------------------------------------------

@dataclass(frozen=True)
class Value:
    term: Term


@dataclass(frozen=True)
class Wrong:
    kind: str  # "empty-sel" | "lam-sel" | "const-sel"
    at: Term
    term: Term


@dataclass(frozen=True)
class Stuck:
    at: Term
    term: Term


@dataclass(frozen=True)
class OutOfFuel:
    term: Term


Result = Union[Value, Wrong, Stuck, OutOfFuel]


@dataclass
class ReductionOutcome:
    result: Result
    trace: list[tuple[str, Term]] = field(default_factory=list)

    @property
    def tag(self) -> str:
        return {Value: "value", Wrong: "wrong", Stuck: "stuck", OutOfFuel: "out-of-fuel"}[type(self.result)]

    @property
    def final(self) -> Term:
        return self.result.term


# primitives -----------------------------------------------------------------

def _int(c: Term) -> Optional[int]:
    if isinstance(c, Const) and c.name.isdigit():
        return int(c.name)
    return None


def _delta(name: str, args: list[Term]) -> Optional[Term]:
    vals = [_int(a) for a in args]
    if any(v is None for v in vals):
        return None
    if name == "plus":
        return Const(str(vals[0] + vals[1]))
    if name == "equal_int":
        return Const("true" if vals[0] == vals[1] else "false")
    return None


def _unwrap(e: Term) -> Term:
    while isinstance(e, Ascribe):
        e = e.term
    return e


# deterministic strategy -----------------------------------------------------

def step(e: Term) -> Optional[tuple[str, Term]]:
    """One deterministic call-by-name step, or None when no redex is in focus."""
    return _step(e, all_names(e))


def _step(e: Term, avoid: set[str]) -> Optional[tuple[str, Term]]:
    match e:
        case App(f, a):
            head, args = spine(e)
            head = _unwrap(head)
            if isinstance(head, Const) and len(args) == PRIM_ARITY.get(head.name, -1):
                return _step_prim(e, head.name, args, avoid)
            fu = _unwrap(f)
            if isinstance(fu, Lam):
                return BETA, subst_term(fu.body, fu.param, a)
            r = _step(f, avoid)
            if r is None:
                return None
            return r[0], App(r[1], a, e.pos)
        case Send(o, m):
            s = fresh_name("s", avoid)
            return SELECTION, Sel(o, m, Lam(s, None, Var(s)), e.pos)
        case Sel(o, m, r):
            ou = _unwrap(o)
            if isinstance(ou, Ext):
                if ou.method == m:
                    return SUCCESS, App(ou.body, App(r, ou, e.pos), e.pos)
                s = fresh_name("s", avoid)
                rebuild = Lam(s, None, App(r, Ext(Var(s), ou.method, ou.annot, ou.body, ou.pos)))
                return NEXT, Sel(ou.obj, m, rebuild, e.pos)
            res = _step(o, avoid)
            if res is None:
                return None
            return res[0], Sel(res[1], m, r, e.pos)
        case Ascribe(t, ty):
            res = _step(t, avoid)
            if res is None:
                return None
            return res[0], Ascribe(res[1], ty, e.pos)
    return None


def _step_prim(e: Term, name: str, args: list[Term], avoid: set[str]) -> Optional[tuple[str, Term]]:
    # reduce the first argument that is not yet a constant, then compute
    for i, a in enumerate(args):
        if isinstance(_unwrap(a), Const):
            continue
        r = _step(a, avoid)
        if r is None:
            return None
        new_args = list(args)
        new_args[i] = r[1]
        out: Term = spine(e)[0]
        for x in new_args:
            out = App(out, x)
        return r[0], out
    result = _delta(name, [_unwrap(a) for a in args])
    if result is None:
        return None
    return DELTA, result


def focus(e: Term) -> Term:
    """The subterm the strategy is currently looking at."""
    while True:
        match e:
            case App(f, _):
                head, args = spine(e)
                head = _unwrap(head)
                if isinstance(head, Const) and len(args) == PRIM_ARITY.get(head.name, -1):
                    nonconst = [a for a in args if not isinstance(_unwrap(a), Const)]
                    if not nonconst:
                        return e
                    e = nonconst[0]
                    continue
                fu = _unwrap(f)
                if isinstance(fu, Lam) or is_value(fu):
                    return e  # a redex, or a value applied where no rule fits
                e = f
            case Sel(o, _, _):
                if isinstance(_unwrap(o), Ext):
                    return e
                if is_value(_unwrap(o)) or isinstance(_unwrap(o), Var):
                    return e
                e = o
            case Ascribe(t, _):
                e = t
            case _:
                return e


def wrong_kind(e: Term) -> Optional[str]:
    """Classify e against the three wrong patterns; None if it is not one."""
    if not isinstance(e, Sel):
        return None
    o = _unwrap(e.obj)
    if isinstance(o, Empty):
        return "empty-sel"
    if isinstance(o, Lam):
        return "lam-sel"
    if isinstance(o, Const):
        return "const-sel"
    return None


def contains_wrong(e: Term) -> Optional[Term]:
    """First wrong subterm of e in any context, if any."""
    from .terms import subterms

    for x in subterms(e):
        if wrong_kind(x):
            return x
    return None


def classify(e: Term) -> Result:
    """Classify a term on which ``step`` returned None."""
    if is_value(_unwrap(e)):
        return Value(e)
    f = focus(e)
    kind = wrong_kind(f)
    if kind:
        return Wrong(kind, f, e)
    return Stuck(f, e)


def eval_term(e: Term, fuel: int = DEFAULT_FUEL) -> ReductionOutcome:
    """Iterate ``step`` from e (ascriptions erased) for at most ``fuel`` steps."""
    e = erase(e)
    trace: list[tuple[str, Term]] = []
    for _ in range(fuel):
        r = step(e)
        if r is None:
            return ReductionOutcome(classify(e), trace)
        e = r[1]
        trace.append(r)
    if step(e) is None:
        return ReductionOutcome(classify(e), trace)
    return ReductionOutcome(OutOfFuel(e), trace)


# full contextual closure ----------------------------------------------------

Path = tuple[int, ...]


@dataclass(frozen=True)
class Redex:
    position: Path  # child indices from the root, see ``terms.children``
    rule: str


def _root_redex(e: Term, avoid: set[str]) -> Optional[tuple[str, Term]]:
    match e:
        case App(f, a):
            head, args = spine(e)
            if isinstance(head, Const) and len(args) == PRIM_ARITY.get(head.name, -1):
                r = _delta(head.name, args)
                return (DELTA, r) if r is not None else None
            if isinstance(f, Lam):
                return BETA, subst_term(f.body, f.param, a)
        case Send(o, m):
            s = fresh_name("s", avoid)
            return SELECTION, Sel(o, m, Lam(s, None, Var(s)), e.pos)
        case Sel(o, m, r) if isinstance(o, Ext):
            if o.method == m:
                return SUCCESS, App(o.body, App(r, o))
            s = fresh_name("s", avoid)
            return NEXT, Sel(o.obj, m, Lam(s, None, App(r, Ext(Var(s), o.method, o.annot, o.body))))
    return None


def _replace_child(e: Term, i: int, c: Term) -> Term:
    match e:
        case Lam(x, t, _):
            return Lam(x, t, c, e.pos)
        case App(f, a):
            return App(c, a, e.pos) if i == 0 else App(f, c, e.pos)
        case Ext(o, m, t, b):
            return Ext(c, m, t, b, e.pos) if i == 0 else Ext(o, m, t, c, e.pos)
        case Send(_, m):
            return Send(c, m, e.pos)
        case Sel(o, m, r):
            return Sel(c, m, r, e.pos) if i == 0 else Sel(o, m, c, e.pos)
        case Ascribe(_, ty):
            return Ascribe(c, ty, e.pos)
    raise ValueError("term has no children")


def step_any(e: Term) -> list[tuple[Redex, Term]]:
    """All one-step reducts of e under arbitrary contexts (ascriptions erased)."""
    e = erase(e)
    avoid = all_names(e)
    out: list[tuple[Redex, Term]] = []

    def go(x: Term, path: Path) -> list[tuple[Path, str, Term]]:
        found: list[tuple[Path, str, Term]] = []
        r = _root_redex(x, avoid)
        if r is not None:
            found.append((path, r[0], r[1]))
        for i, c in enumerate(children(x)):
            for p, rule, c2 in go(c, path + (i,)):
                found.append((p, rule, _rebuild(x, p[len(path):], c2)))
        return found

    def _rebuild(x: Term, rel: Path, new_sub: Term) -> Term:
        # new_sub is the rewritten child subtree at rel[0]
        return _replace_child(x, rel[0], new_sub)

    for p, rule, t in go(e, ()):
        out.append((Redex(p, rule), t))
    return out


def subterm_at(e: Term, path: Path) -> Term:
    for i in path:
        e = children(e)[i]
    return e


def format_trace(trace: list[tuple[str, Term]]) -> str:
    from .parser import pretty_term

    return "".join(f"#{i} [{rule}] {pretty_term(t)}\n" for i, (rule, t) in enumerate(trace, 1))


def parse_trace(text: str) -> list[tuple[str, str]]:
    import re

    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        m = re.match(r"#(\d+) \[(\w+)\] (.*)\Z", line)
        if not m:
            raise ValueError(f"bad trace line: {line!r}")
        out.append((m.group(2), m.group(3)))
    return out


def normalize(e: Term, fuel: int = 1000) -> Optional[Term]:
    """Leftmost-outermost normal form under unrestricted contexts, if reached."""
    e = erase(e)
    for _ in range(fuel):
        rs = step_any(e)
        if not rs:
            return e
        e = rs[0][1]
    return None


def same_result(got: Term, want: Term, fuel: int = 1000) -> bool:
    """Equal up to renaming, or joinable: both have the same normal form.

    Values of the call-by-name strategy may keep administrative redexes
    inside objects, so the comparison falls back to full normal forms.
    """
    from .terms import alpha_eq_term

    if alpha_eq_term(got, want, annotations=False):
        return True
    a, b = normalize(got, fuel), normalize(want, fuel)
    return a is not None and b is not None and alpha_eq_term(a, b, annotations=False)
