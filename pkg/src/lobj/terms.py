"""Abstract syntax of object-calculus terms.

Terms are immutable.  Variables are named; substitution renames bound
variables with a deterministic prime-suffix supply so that traces are
reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_']*\Z")

# Prelude functions that reduce by a primitive (delta) step.
PRIM_ARITY = {"plus": 2, "equal_int": 2}


@dataclass(frozen=True)
class Const:
    name: str  # source spelling: 1, "Alice", white
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    param: str
    annot: Optional[object]  # a type from lobj.typexpr
    body: "Term"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Empty:
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ext:
    """Extension or override ``<obj <- method = body>``."""

    obj: "Term"
    method: str
    annot: Optional[object]
    body: "Term"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Send:
    obj: "Term"
    method: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sel:
    obj: "Term"
    method: str
    rebuild: "Term"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ascribe:
    term: "Term"
    type: object
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


Term = Union[Const, Var, Lam, App, Empty, Ext, Send, Sel, Ascribe]


def is_ident(name: str) -> bool:
    return bool(IDENT_RE.match(name))


def children(e: Term) -> tuple[Term, ...]:
    match e:
        case Lam(_, _, b):
            return (b,)
        case App(f, a):
            return (f, a)
        case Ext(o, _, _, b):
            return (o, b)
        case Send(o, _):
            return (o,)
        case Sel(o, _, r):
            return (o, r)
        case Ascribe(t, _):
            return (t,)
    return ()


def subterms(e: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(children(x)))


def size(e: Term) -> int:
    return sum(1 for _ in subterms(e))


def free_vars(e: Term) -> set[str]:
    match e:
        case Var(x):
            return {x}
        case Lam(x, _, b):
            return free_vars(b) - {x}
    out: set[str] = set()
    for c in children(e):
        out |= free_vars(c)
    return out


def all_names(e: Term) -> set[str]:
    """Every variable name occurring in e, bound or free."""
    out: set[str] = set()
    for x in subterms(e):
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Lam):
            out.add(x.param)
    return out


def fresh_name(base: str, avoid: set[str]) -> str:
    """First of base, base', base'', ... not in avoid."""
    name = base
    while name in avoid:
        name += "'"
    return name


def subst_term(e: Term, x: str, v: Term) -> Term:
    """Capture-avoiding e[v/x]."""
    return _subst(e, x, v, free_vars(v))


def _subst(e: Term, x: str, v: Term, fv: set[str]) -> Term:
    match e:
        case Var(y):
            return v if y == x else e
        case Const() | Empty():
            return e
        case Lam(y, ann, b):
            if y == x:
                return e
            if y in fv and x in free_vars(b):
                z = fresh_name(y, fv | free_vars(b) | {x})
                b = _subst(b, y, Var(z), {z})
                y = z
            return Lam(y, ann, _subst(b, x, v, fv), e.pos)
        case App(f, a):
            return App(_subst(f, x, v, fv), _subst(a, x, v, fv), e.pos)
        case Ext(o, m, ann, b):
            return Ext(_subst(o, x, v, fv), m, ann, _subst(b, x, v, fv), e.pos)
        case Send(o, m):
            return Send(_subst(o, x, v, fv), m, e.pos)
        case Sel(o, m, r):
            return Sel(_subst(o, x, v, fv), m, _subst(r, x, v, fv), e.pos)
        case Ascribe(t, ty):
            return Ascribe(_subst(t, x, v, fv), ty, e.pos)
    raise TypeError(f"not a term: {e!r}")


def alpha_eq_term(e1: Term, e2: Term, annotations: bool = True) -> bool:
    """Equality up to consistent renaming of bound variables.

    With ``annotations=False`` type annotations and ascriptions are ignored.
    """
    if not annotations:
        e1, e2 = erase(e1, annotations=True), erase(e2, annotations=True)
    return _aeq(e1, e2, {}, {}, 0)


def _aeq(a: Term, b: Term, ea: dict, eb: dict, depth: int) -> bool:
    from .typexpr import alpha_eq_type

    match a, b:
        case Var(x), Var(y):
            return ea.get(x, x) == eb.get(y, y) if (x in ea) == (y in eb) else False
        case Const(c), Const(d):
            return c == d
        case Empty(), Empty():
            return True
        case Lam(x, ta, ba), Lam(y, tb, bb):
            if (ta is None) != (tb is None):
                return False
            if ta is not None and not alpha_eq_type(ta, tb):
                return False
            return _aeq(ba, bb, {**ea, x: depth}, {**eb, y: depth}, depth + 1)
        case App(f1, a1), App(f2, a2):
            return _aeq(f1, f2, ea, eb, depth) and _aeq(a1, a2, ea, eb, depth)
        case Ext(o1, m1, t1, b1), Ext(o2, m2, t2, b2):
            if m1 != m2 or (t1 is None) != (t2 is None):
                return False
            if t1 is not None and not alpha_eq_type(t1, t2):
                return False
            return _aeq(o1, o2, ea, eb, depth) and _aeq(b1, b2, ea, eb, depth)
        case Send(o1, m1), Send(o2, m2):
            return m1 == m2 and _aeq(o1, o2, ea, eb, depth)
        case Sel(o1, m1, r1), Sel(o2, m2, r2):
            return m1 == m2 and _aeq(o1, o2, ea, eb, depth) and _aeq(r1, r2, ea, eb, depth)
        case Ascribe(t1, y1), Ascribe(t2, y2):
            return alpha_eq_type(y1, y2) and _aeq(t1, t2, ea, eb, depth)
    return False


def canonical_key(e: Term, annotations: bool = False) -> tuple:
    """Hashable key identifying e up to alpha-equivalence."""
    from .typexpr import type_key

    def go(e: Term, env: dict[str, int], depth: int) -> tuple:
        match e:
            case Var(x):
                return ("b", depth - env[x]) if x in env else ("f", x)
            case Const(c):
                return ("c", c)
            case Empty():
                return ("e",)
            case Lam(x, t, b):
                tk = type_key(t) if annotations and t is not None else None
                return ("l", tk, go(b, {**env, x: depth}, depth + 1))
            case App(f, a):
                return ("a", go(f, env, depth), go(a, env, depth))
            case Ext(o, m, t, b):
                tk = type_key(t) if annotations and t is not None else None
                return ("x", m, tk, go(o, env, depth), go(b, env, depth))
            case Send(o, m):
                return ("s", m, go(o, env, depth))
            case Sel(o, m, r):
                return ("S", m, go(o, env, depth), go(r, env, depth))
            case Ascribe(t, ty):
                if annotations:
                    return ("t", type_key(ty), go(t, env, depth))
                return go(t, env, depth)
        raise TypeError(f"not a term: {e!r}")

    return go(e, {}, 0)


def erase(e: Term, annotations: bool = False) -> Term:
    """Drop ascriptions; with ``annotations=True`` also drop binder/method annotations."""
    match e:
        case Ascribe(t, _):
            return erase(t, annotations)
        case Lam(x, t, b):
            return Lam(x, None if annotations else t, erase(b, annotations), e.pos)
        case App(f, a):
            return App(erase(f, annotations), erase(a, annotations), e.pos)
        case Ext(o, m, t, b):
            return Ext(erase(o, annotations), m, None if annotations else t, erase(b, annotations), e.pos)
        case Send(o, m):
            return Send(erase(o, annotations), m, e.pos)
        case Sel(o, m, r):
            return Sel(erase(o, annotations), m, erase(r, annotations), e.pos)
    return e


def spine(e: Term) -> tuple[Term, list[Term]]:
    """Split an application into head and arguments."""
    args: list[Term] = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fun
    args.reverse()
    return e, args


def is_value(e: Term) -> bool:
    """Constants, abstractions, objects, and unsaturated primitive applications."""
    if isinstance(e, (Const, Lam, Empty, Ext)):
        return True
    head, args = spine(e)
    return isinstance(head, Const) and 0 < len(args) < PRIM_ARITY.get(head.name, 0)


def bind_constants(e: Term, names: set[str]) -> Term:
    """Turn free variables naming prelude constants into constants."""

    def go(e: Term, bound: frozenset[str]) -> Term:
        match e:
            case Var(x):
                return Const(x, e.pos) if x in names and x not in bound else e
            case Lam(x, t, b):
                return Lam(x, t, go(b, bound | {x}), e.pos)
            case App(f, a):
                return App(go(f, bound), go(a, bound), e.pos)
            case Ext(o, m, t, b):
                return Ext(go(o, bound), m, t, go(b, bound), e.pos)
            case Send(o, m):
                return Send(go(o, bound), m, e.pos)
            case Sel(o, m, r):
                return Sel(go(o, bound), m, go(r, bound), e.pos)
            case Ascribe(t, ty):
                return Ascribe(go(t, bound), ty, e.pos)
        return e

    return go(e, frozenset())


def obj_of(*methods: tuple[str, Term]) -> Term:
    """``<m1 = e1, ..., mk = ek>`` as nested extensions of the empty object."""
    o: Term = Empty()
    for m, b in methods:
        o = Ext(o, m, None, b)
    return o
