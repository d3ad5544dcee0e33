"""Types: constants, arrows, and object-types with rows and availability sets.

An object-type carries its availability set inline, so ``t + m + n`` is a
single ``TVar`` node and ``pro t.R + m`` a single ``Pro`` node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union


@dataclass(frozen=True)
class ConstType:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Row:
    entries: tuple[tuple[str, "Type"], ...]

    @staticmethod
    def of(items: Mapping[str, "Type"] | Iterable[tuple[str, "Type"]]) -> "Row":
        pairs = list(items.items()) if isinstance(items, Mapping) else list(items)
        labels = [m for m, _ in pairs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate label in row: {labels}")
        return Row(tuple(sorted(pairs, key=lambda p: p[0])))

    def get(self, m: str) -> Optional["Type"]:
        for k, v in self.entries:
            if k == m:
                return v
        return None

    def labels(self) -> frozenset[str]:
        return frozenset(m for m, _ in self.entries)

    def extend(self, more: Mapping[str, "Type"]) -> "Row":
        return Row.of(list(self.entries) + list(more.items()))

    def map(self, f) -> "Row":
        return Row(tuple((m, f(s)) for m, s in self.entries))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TVar:
    name: str
    plus: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Pro:
    binder: str
    row: Row
    plus: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Obj:
    binder: str
    row: Row
    plus: frozenset[str] = frozenset()


ObjectType = Union[TVar, Pro, Obj]
Type = Union[ConstType, Arrow, TVar, Pro, Obj]

INT = ConstType("int")
BOOL = ConstType("bool")
STR = ConstType("str")


def is_object_type(s: Type) -> bool:
    return isinstance(s, (TVar, Pro, Obj))


def meth(r: Row) -> frozenset[str]:
    return r.labels()


def plus_extend(tau: ObjectType, ms: Iterable[str]) -> ObjectType:
    ms = frozenset(ms)
    if ms <= tau.plus:
        return tau
    match tau:
        case TVar(t, p):
            return TVar(t, p | ms)
        case Pro(b, r, p):
            return Pro(b, r, p | ms)
        case Obj(b, r, p):
            return Obj(b, r, p | ms)
    raise TypeError(f"not an object-type: {tau!r}")


def with_binder(tau: Pro | Obj, binder: str, row: Row, plus: frozenset[str]) -> Pro | Obj:
    return type(tau)(binder, row, plus)


def free_tvars(s: Type) -> set[str]:
    match s:
        case ConstType():
            return set()
        case Arrow(d, c):
            return free_tvars(d) | free_tvars(c)
        case TVar(t, _):
            return {t}
        case Pro(b, r, _) | Obj(b, r, _):
            out: set[str] = set()
            for _, x in r:
                out |= free_tvars(x)
            return out - {b}
    raise TypeError(f"not a type: {s!r}")


def all_tvars(s: Type) -> set[str]:
    match s:
        case ConstType():
            return set()
        case Arrow(d, c):
            return all_tvars(d) | all_tvars(c)
        case TVar(t, _):
            return {t}
        case Pro(b, r, _) | Obj(b, r, _):
            out = {b}
            for _, x in r:
                out |= all_tvars(x)
            return out
    raise TypeError(f"not a type: {s!r}")


def fresh_tvar(base: str, avoid: set[str]) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


def subst_type(s: Type, t: str, tau: ObjectType) -> Type:
    """Capture-avoiding s[tau/t]; ``(t + ms)[tau/t]`` is ``tau + ms``."""
    return _subst(s, t, tau, free_tvars(tau))


def _subst(s: Type, t: str, tau: ObjectType, fv: set[str]) -> Type:
    match s:
        case ConstType():
            return s
        case Arrow(d, c):
            return Arrow(_subst(d, t, tau, fv), _subst(c, t, tau, fv))
        case TVar(u, p):
            return plus_extend(tau, p) if u == t else s
        case Pro(b, r, p) | Obj(b, r, p):
            if b == t:
                return s
            if b in fv:
                nb = fresh_tvar(b, fv | free_tvars(s) | {t})
                r = r.map(lambda x: _subst(x, b, TVar(nb), {nb}))
                b = nb
            return type(s)(b, r.map(lambda x: _subst(x, t, tau, fv)), p)
    raise TypeError(f"not a type: {s!r}")


def rename_binder(tau: Pro | Obj, new: str) -> Pro | Obj:
    """Alpha-convert the self binder of a pro/obj type to ``new``."""
    if tau.binder == new:
        return tau
    if new in free_tvars(tau):
        raise ValueError(f"renaming binder to {new} would capture")
    row = tau.row.map(lambda x: subst_type(x, tau.binder, TVar(new)))
    return type(tau)(new, row, tau.plus)


def alpha_eq_type(s1: Type, s2: Type) -> bool:
    return type_key(s1) == type_key(s2)


def type_key(s: Type) -> tuple:
    """Hashable key identifying s up to binder renaming, row order, and set order."""

    def go(s: Type, env: dict[str, int], depth: int) -> tuple:
        match s:
            case ConstType(n):
                return ("c", n)
            case Arrow(d, c):
                return ("a", go(d, env, depth), go(c, env, depth))
            case TVar(t, p):
                v = ("b", depth - env[t]) if t in env else ("f", t)
                return ("v", v, tuple(sorted(p)))
            case Pro(b, r, p) | Obj(b, r, p):
                inner = {**env, b: depth}
                tag = "p" if isinstance(s, Pro) else "o"
                return (tag, tuple((m, go(x, inner, depth + 1)) for m, x in r), tuple(sorted(p)))
        raise TypeError(f"not a type: {s!r}")

    return go(s, {}, 0)


def row_subset(r1: Row, r2: Row, binder1: str = "", binder2: str = "") -> bool:
    """Every pair of r1 occurs in r2 with an alpha-equivalent type.

    Binder names say which variable is self in each row; both are identified.
    """
    if binder1 != binder2:
        common = fresh_tvar("t", _row_fv(r1) | _row_fv(r2) | {binder1, binder2})
        r1 = r1.map(lambda x: subst_type(x, binder1, TVar(common))) if binder1 else r1
        r2 = r2.map(lambda x: subst_type(x, binder2, TVar(common))) if binder2 else r2
    for m, s in r1:
        other = r2.get(m)
        if other is None or not alpha_eq_type(s, other):
            return False
    return True


def _row_fv(r: Row) -> set[str]:
    out: set[str] = set()
    for _, x in r:
        out |= all_tvars(x)
    return out


def canonical(s: Type, avoid: Optional[set[str]] = None) -> Type:
    """Rename binders to t, t', t'', ... by nesting depth for display."""
    avoid = set(avoid or ()) | free_tvars(s)

    def go(s: Type, taken: set[str]) -> Type:
        match s:
            case Arrow(d, c):
                return Arrow(go(d, taken), go(c, taken))
            case Pro(b, r, p) | Obj(b, r, p):
                nb = fresh_tvar("t", taken | (free_tvars(s) - {b}))
                row = r.map(lambda x: subst_type(x, b, TVar(nb))) if nb != b else r
                row = row.map(lambda x: go(x, taken | {nb}))
                return type(s)(nb, row, p)
        return s

    return go(s, avoid)


def mentioned_labels(s: Type, t: str) -> set[str]:
    """Labels m such that ``t + ... m ...`` occurs free in s."""
    match s:
        case Arrow(d, c):
            return mentioned_labels(d, t) | mentioned_labels(c, t)
        case TVar(u, p):
            return set(p) if u == t else set()
        case Pro(b, r, _) | Obj(b, r, _):
            if b == t:
                return set()
            out: set[str] = set()
            for _, x in r:
                out |= mentioned_labels(x, t)
            return out
    return set()
