"""Type checking in two modes: plain, and with width subsumption on obj-types.

The declarative rules are turned into a bidirectional algorithm.  Matching
and kinding are syntax-directed.  Row enrichment (Pre-Extend) happens at an
extension that introduces a fresh method, at ascriptions, and wherever an
expected pro-type is known.  Subsumption happens wherever an expected type
is known, guarded by rigidity.

Annotation conventions:

* in ``\\x: T`` and ``(e : T)`` a free ``t`` names the self type of the
  innermost enclosing method;
* in ``<e <- m : T = b>`` a free ``t`` names the self binder of the row
  being extended, as in a ``pro t.<...>`` entry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .terms import App, Ascribe, Const, Empty, Ext, Lam, Send, Sel, Term, Var, children, subterms
from .typexpr import (
    Arrow,
    ConstType,
    Obj,
    Pro,
    Row,
    TVar,
    Type,
    all_tvars,
    alpha_eq_type,
    free_tvars,
    fresh_tvar,
    is_object_type,
    mentioned_labels,
    plus_extend,
    rename_binder,
    row_subset,
    subst_type,
)


class Mode(str, enum.Enum):
    PLAIN = "plain"
    SUB = "sub"


class ErrorKind(str, enum.Enum):
    UNKNOWN_VAR = "UnknownVar"
    UNKNOWN_METHOD = "UnknownMethod"
    ROW_MISMATCH = "RowMismatch"
    NOT_MATCHING = "NotMatching"
    NOT_RIGID = "NotRigid"
    NOT_COVARIANT = "NotCovariant"
    DUPLICATE_LABEL = "DuplicateLabel"
    ILL_FORMED_TYPE = "IllFormedType"
    ANNOTATION_REQUIRED = "AnnotationRequired"
    ARITY_OR_FORM = "ArityOrForm"


class CheckError(Exception):
    """A failed judgment, tagged with the rule it violates."""

    def __init__(self, kind: ErrorKind, rule: str, message: str, pos: Optional[tuple[int, int]] = None):
        super().__init__(f"[{rule}] {kind.value}: {message}")
        self.kind, self.rule, self.message, self.pos = kind, rule, message, pos

    def to_json(self) -> dict:
        line, col = self.pos if self.pos else (0, 0)
        return {"rule": self.rule, "kind": self.kind.value, "line": line, "col": col, "message": self.message}


# contexts -------------------------------------------------------------------

@dataclass(frozen=True)
class VarBind:
    name: str
    type: Type


@dataclass(frozen=True)
class MatchBind:
    name: str
    bound: Pro | Obj


class Context:
    """Ordered typing context; lookups see the latest binding of a name."""

    __slots__ = ("entries", "_vars", "_bounds")

    def __init__(self, entries: Iterable[VarBind | MatchBind] = ()):
        self.entries = tuple(entries)
        self._vars: dict[str, Type] = {}
        self._bounds: dict[str, Pro | Obj] = {}
        for b in self.entries:
            if isinstance(b, VarBind):
                self._vars[b.name] = b.type
            else:
                self._bounds[b.name] = b.bound

    def add_var(self, x: str, s: Type) -> "Context":
        return Context(self.entries + (VarBind(x, s),))

    def add_match(self, t: str, bound: Pro | Obj) -> "Context":
        return Context(self.entries + (MatchBind(t, bound),))

    def var(self, x: str) -> Optional[Type]:
        return self._vars.get(x)

    def bound(self, t: str) -> Optional[Pro | Obj]:
        return self._bounds.get(t)

    @property
    def tvars(self) -> set[str]:
        return set(self._bounds)

    def __repr__(self) -> str:
        return f"Context({list(self.entries)!r})"


EMPTY_CONTEXT = Context()


# signature ------------------------------------------------------------------

@dataclass
class Signature:
    """Types of constants; integer and string literals are built in."""

    consts: dict[str, Type] = field(default_factory=dict)
    const_types: frozenset[str] = frozenset({"int", "bool", "str", "colors"})

    def type_of(self, name: str) -> Optional[Type]:
        if name.isdigit():
            return ConstType("int")
        if name.startswith('"'):
            return ConstType("str")
        return self.consts.get(name)


def default_signature() -> Signature:
    from .corpus import load_prelude

    return load_prelude()


# polarity -------------------------------------------------------------------

def _polarities(t: str, s: Type, positive: bool) -> set[bool]:
    match s:
        case ConstType():
            return set()
        case Arrow(d, c):
            return _polarities(t, d, not positive) | _polarities(t, c, positive)
        case TVar(u, _):
            return {positive} if u == t else set()
        case Pro(b, r, _) | Obj(b, r, _):
            if b == t:
                return set()
            out: set[bool] = set()
            for _, x in r:
                out |= _polarities(t, x, positive)
            return out
    raise TypeError(f"not a type: {s!r}")


def covariant(t: str, s: Type) -> bool:
    """t never occurs in a negative position of s."""
    return False not in _polarities(t, s, True)


# kinding and matching -------------------------------------------------------

class _Judge:
    def __init__(self, mode: Mode, sig: Signature):
        self.mode = Mode(mode)
        self.sig = sig

    # well-formed types
    def kind(self, g: Context, s: Type) -> None:
        match s:
            case ConstType(n):
                if n not in self.sig.const_types:
                    raise CheckError(ErrorKind.ILL_FORMED_TYPE, "Type-Const", f"unknown constant type {n}")
            case Arrow(d, c):
                self.kind(g, d)
                self.kind(g, c)
            case TVar(t, p):
                b = g.bound(t)
                if b is None:
                    raise CheckError(ErrorKind.ILL_FORMED_TYPE, "Type-Extend", f"unbound type variable {t}")
                missing = p - b.row.labels()
                if missing:
                    rule = "Type-Extend-Obj" if isinstance(b, Obj) else "Type-Extend"
                    raise CheckError(ErrorKind.UNKNOWN_METHOD, rule, f"{t} has no method {', '.join(sorted(missing))}")
            case Pro(_, _, _) | Obj(_, _, _):
                if isinstance(s, Obj) and self.mode is Mode.PLAIN:
                    raise CheckError(ErrorKind.ILL_FORMED_TYPE, "Type-Obj", "obj-types need subsumption mode")
                s = self._apart(g, s)
                self._kind_row(g, s.binder, s.row)
                missing = s.plus - s.row.labels()
                if missing:
                    rule = "Type-Extend-Obj" if isinstance(s, Obj) else "Type-Extend"
                    raise CheckError(ErrorKind.UNKNOWN_METHOD, rule, f"no method {', '.join(sorted(missing))} in row")
            case _:
                raise CheckError(ErrorKind.ILL_FORMED_TYPE, "Type-Const", f"not a type: {s!r}")

    def _apart(self, g: Context, s: Pro | Obj) -> Pro | Obj:
        if s.binder in g.tvars:
            return rename_binder(s, fresh_tvar("t", g.tvars | all_tvars(s)))
        return s

    def _kind_row(self, g: Context, b: str, row: Row) -> None:
        # entries may be added in any order in which each one is well-formed
        done: list[tuple[str, Type]] = []
        pending = list(row)
        while pending:
            first_err: Optional[CheckError] = None
            rest = []
            for m, x in pending:
                try:
                    self.kind(g.add_match(b, Pro(b, Row.of(done))), x)
                    done.append((m, x))
                except CheckError as err:
                    first_err = first_err or err
                    rest.append((m, x))
            if len(rest) == len(pending):
                assert first_err is not None
                raise CheckError(first_err.kind, "Type-Pro", first_err.message)
            pending = rest

    def kind_rigid(self, g: Context, s: Type) -> None:
        match s:
            case ConstType():
                self.kind(g, s)
            case Arrow(d, c):
                self.kind(g, d)
                self.kind_rigid(g, c)
            case TVar(t, _):
                self.kind(g, s)
                b = g.bound(t)
                if not isinstance(b, Obj):
                    raise CheckError(ErrorKind.NOT_RIGID, "Type-Var-Obj", f"{t} is not bounded by an obj-type")
                for _, x in b.row:
                    if not covariant(b.binder, x):
                        raise CheckError(ErrorKind.NOT_COVARIANT, "Type-Var-Obj", f"{t} is not covariant in its bound")
            case Obj():
                self.kind(g, s)
                s = self._apart(g, s)
                g2 = g.add_match(s.binder, s)
                for m, x in s.row:
                    if not covariant(s.binder, x):
                        raise CheckError(ErrorKind.NOT_COVARIANT, "Type-Obj-Rdg", f"self type occurs contravariantly in {m}")
                    self.kind_rigid(g2, x)
            case _:
                raise CheckError(ErrorKind.NOT_RIGID, "Type-Obj-Rdg", "pro-types are never rigid")

    def wf_context(self, g: Context) -> None:
        seen: set[str] = set()
        prefix = EMPTY_CONTEXT
        for b in g.entries:
            if b.name in seen:
                raise CheckError(ErrorKind.DUPLICATE_LABEL, "Cont-x" if isinstance(b, VarBind) else "Cont-t",
                                 f"{b.name} is bound twice")
            seen.add(b.name)
            if isinstance(b, VarBind):
                self.kind(prefix, b.type)
                prefix = prefix.add_var(b.name, b.type)
            else:
                rule = "Cont-Obj" if isinstance(b.bound, Obj) else "Cont-t"
                if not isinstance(b.bound, (Pro, Obj)):
                    raise CheckError(ErrorKind.ILL_FORMED_TYPE, rule, f"bound of {b.name} must be a pro- or obj-type")
                self.kind(prefix, b.bound)
                prefix = prefix.add_match(b.name, b.bound)

    # matching
    def matches(self, g: Context, s1: Type, s2: Type) -> None:
        fail = lambda rule, msg: CheckError(ErrorKind.NOT_MATCHING, rule, msg)  # noqa: E731
        match s1, s2:
            case ConstType(a), ConstType(b):
                if a != b:
                    raise fail("Match-Arrow", f"{a} differs from {b}")
                self.kind(g, s1)
            case Arrow(d1, c1), Arrow(d2, c2):
                if self.mode is Mode.PLAIN:
                    raise fail("Match-Arrow", "arrow matching needs subsumption mode")
                self.matches(g, d2, d1)
                self.matches(g, c1, c2)
                try:
                    self.kind_rigid(g, d1)
                except CheckError as err:
                    raise CheckError(err.kind, "Match-Arrow", err.message) from None
            case TVar(t, m), TVar(u, n) if t == u:
                self.kind(g, s1)
                if not n <= m:
                    raise fail("Match-t", f"methods {', '.join(sorted(n - m))} not available on {t}")
            case TVar(t, m), _:
                b = g.bound(t)
                if b is None:
                    raise CheckError(ErrorKind.ILL_FORMED_TYPE, "Match-Var", f"unbound type variable {t}")
                self.matches(g, plus_extend(b, m), s2)
            case Pro(b1, r1, m), Pro(b2, r2, n):
                self._match_rows(g, s1, s2, "Match-Pro")
            case Pro(), Obj():
                if self.mode is Mode.PLAIN:
                    raise fail("Promote", "promotion needs subsumption mode")
                self._match_rows(g, s1, s2, "Promote")
            case Obj(), Obj():
                self._match_rows(g, s1, s2, "Match-Obj")
            case _:
                raise fail("Match-Pro", "types have different shapes")

    def _match_rows(self, g: Context, s1: Pro | Obj, s2: Pro | Obj, rule: str) -> None:
        self.kind(g, s1)
        self.kind(g, s2)
        if not row_subset(s2.row, s1.row, s2.binder, s1.binder):
            extra = sorted(m for m, x in s2.row if s1.row.get(m) is None)
            what = f"missing {', '.join(extra)}" if extra else "method types differ"
            raise CheckError(ErrorKind.NOT_MATCHING, rule, f"row inclusion fails: {what}")
        if not s2.plus <= s1.plus:
            raise CheckError(ErrorKind.NOT_MATCHING, rule,
                             f"methods {', '.join(sorted(s2.plus - s1.plus))} not available")


# term checking --------------------------------------------------------------

def _base(e: Term) -> Term:
    while isinstance(e, (Ext, Ascribe)):
        e = e.obj if isinstance(e, Ext) else e.term
    return e


def _annotations(e: Term) -> list[tuple[str, Type, Ext]]:
    return [(x.method, x.annot, x) for x in subterms(e) if isinstance(x, Ext) and x.annot is not None]


def _self_ext_labels(body: Term) -> list[tuple[str, Type, Ext]]:
    """Annotated extensions of a method's own self variable inside its body."""
    if not isinstance(body, Lam):
        return []
    me = body.param
    out = []
    stack = [body.body]
    while stack:
        x = stack.pop()
        if isinstance(x, Lam) and x.param == me:
            continue  # shadowed
        if isinstance(x, Ext) and x.annot is not None:
            b = _base(x.obj)
            if isinstance(b, Var) and b.name == me:
                out.append((x.method, x.annot, x))
        stack.extend(reversed(children(x)))
    return out


def _rebuild_labels(rb: Term) -> list[str]:
    r"""Annotated methods that a lookup rebuild puts back, outermost last.

    Rebuilds nest as ``\s''. (\s'. r <s' <- m = b>) <s'' <- n = c>``, so the
    walk follows functions and arguments but not method bodies.
    """
    out: list[str] = []
    stack = [rb]
    while stack:
        x = stack.pop()
        match x:
            case Lam(_, _, b):
                stack.append(b)
            case App(f, a):
                stack += [f, a]
            case Ext(o, m, annot, _):
                if annot is not None:
                    out.append(m)
                stack.append(o)
            case Ascribe(t, _):
                stack.append(t)
    return out


class Checker(_Judge):
    """Bidirectional checker; ``root`` supplies annotations for fresh methods."""

    def __init__(self, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None, root: Optional[Term] = None):
        super().__init__(mode, sig if sig is not None else default_signature())
        self.root_pool = _annotations(root) if root is not None else []

    # helpers
    def _resolve(self, s: Type, scope: Optional[Type]) -> Type:
        if scope is None or scope == TVar("t"):
            return s
        return subst_type(s, "t", scope)

    def _kind_at(self, g: Context, s: Type, pos) -> None:
        try:
            self.kind(g, s)
        except CheckError as err:
            err.pos = err.pos or pos
            raise

    def expose(self, g: Context, s: Type) -> Optional[tuple[type, str, Row, frozenset[str]]]:
        """Kind, binder, row and available methods of an object-type."""
        match s:
            case Pro(b, r, p):
                return Pro, b, r, p
            case Obj(b, r, p):
                return Obj, b, r, p
            case TVar(t, m):
                b = g.bound(t)
                if b is None:
                    return None
                return type(b), b.binder, b.row, b.plus | m
        return None

    def _fresh_self(self, g: Context, row: Row) -> str:
        avoid = set(g.tvars)
        for _, x in row:
            avoid |= all_tvars(x)
        return fresh_tvar("t", avoid)

    def _bound(self, g, cls, b, row, plus) -> tuple[str, Context, Row]:
        t = self._fresh_self(g, row)
        r = row.map(lambda x: subst_type(x, b, TVar(t))) if t != b else row
        return t, g.add_match(t, cls(t, r, plus)), r

    # inference
    def infer(self, g: Context, e: Term, scope: Optional[Type] = None) -> Type:
        match e:
            case Const(c):
                s = self.sig.type_of(c)
                if s is None:
                    raise CheckError(ErrorKind.UNKNOWN_VAR, "Const", f"unknown constant {c}", e.pos)
                return s
            case Var(x):
                s = g.var(x)
                if s is None:
                    raise CheckError(ErrorKind.UNKNOWN_VAR, "Var", f"unbound variable {x}", e.pos)
                return s
            case Lam(x, None, _):
                raise CheckError(ErrorKind.ANNOTATION_REQUIRED, "Abs", f"parameter {x} needs a type annotation", e.pos)
            case Lam(x, ann, b):
                a = self._resolve(ann, scope)
                self._kind_at(g, a, e.pos)
                return Arrow(a, self.infer(g.add_var(x, a), b, scope))
            case App(Lam(x, None, b), a):
                sa = self.infer(g, a, scope)
                return self.infer(g.add_var(x, sa), b, sa if is_object_type(sa) else scope)
            case App(f, a):
                try:
                    sf = self.infer(g, f, scope)
                except CheckError as err:
                    if err.kind is not ErrorKind.ANNOTATION_REQUIRED:
                        raise
                    return self._infer_applied(g, f, a, scope, err)
                if not isinstance(sf, Arrow):
                    raise CheckError(ErrorKind.ARITY_OR_FORM, "Appl", "applying a term that is not a function", e.pos)
                self.check(g, a, sf.dom, scope, rule="Appl")
                return sf.cod
            case Empty():
                return Pro("t", Row(()))
            case Ext():
                return self._ext(g, e, scope)[0]
            case Send(o, n):
                so = self.infer(g, o, scope)
                cls, b, r, p = self._expose_or_fail(g, so, "Send", e.pos)
                s = r.get(n)
                if s is None:
                    raise CheckError(ErrorKind.UNKNOWN_METHOD, _obj_rule("Send", cls), f"no method {n}", e.pos)
                if n not in p:
                    raise CheckError(ErrorKind.NOT_MATCHING, _obj_rule("Send", cls), f"method {n} is not available", e.pos)
                return subst_type(s, b, so)
            case Sel():
                return self._sel(g, e, scope)
            case Ascribe(t, ann):
                a = self._resolve(ann, scope)
                self._kind_at(g, a, e.pos)
                self.check(g, t, a, scope)
                return a
        raise CheckError(ErrorKind.ARITY_OR_FORM, "Var", f"not a term: {e!r}")

    def _infer_applied(self, g: Context, f: Term, a: Term, scope, err: CheckError) -> Type:
        r"""Type ``f a`` when f's parameter is unannotated: it takes the type of a.

        Reducts of a method call apply a body like ``\self. \x. e`` to its
        arguments, so the parameter types come from the arguments.
        """
        match f:
            case Lam(x, None, b):
                sa = self.infer(g, a, scope)
                return self.infer(g.add_var(x, sa), b, sa if is_object_type(sa) else scope)
            case App(Lam(y, None, b), x_arg):
                sx = self.infer(g, x_arg, scope)
                return self._infer_applied(g.add_var(y, sx), b, a, sx if is_object_type(sx) else scope, err)
        raise err

    def _expose_or_fail(self, g, s, rule, pos):
        ex = self.expose(g, s)
        if ex is None:
            raise CheckError(ErrorKind.ARITY_OR_FORM, rule, "receiver is not an object", pos)
        return ex

    # checking
    def check(self, g: Context, e: Term, expected: Type, scope: Optional[Type] = None, rule: Optional[str] = None) -> None:
        match e, expected:
            case Lam(x, ann, b), Arrow(d, c):
                if ann is None or alpha_eq_type(self._resolve(ann, scope), d):
                    self.check(g.add_var(x, d), b, c, scope)
                    return
            case App(Lam(x, None, b), a), _:
                sa = self.infer(g, a, scope)
                self.check(g.add_var(x, sa), b, expected, sa if is_object_type(sa) else scope, rule)
                return
            case Ext(), _:
                candidates = self._ext(g, e, scope, expected)
                last: Optional[CheckError] = None
                for cand in candidates:
                    if cand is None:
                        continue
                    try:
                        self.accept(g, cand, expected, rule, e.pos)
                        return
                    except CheckError as err:
                        last = last or err
                assert last is not None
                raise last
        self.accept(g, self.infer(g, e, scope), expected, rule, e.pos)

    def accept(self, g: Context, got: Type, want: Type, rule: Optional[str] = None, pos=None) -> None:
        """Does a term of type ``got`` also have type ``want``?"""
        rule = rule or ("Subsume" if self.mode is Mode.SUB else "Pre-Extend")
        if alpha_eq_type(got, want):
            return
        if isinstance(got, Pro) and isinstance(want, Pro) and got.plus == want.plus \
                and row_subset(got.row, want.row, got.binder, want.binder):
            self._kind_at(g, want, pos)
            return
        if self.mode is Mode.SUB:
            try:
                self._subsume(g, got, want)
                return
            except CheckError as err:
                err.pos = err.pos or pos
                raise
        raise CheckError(ErrorKind.NOT_MATCHING, rule, f"expected {_show(want)}, got {_show(got)}", pos)

    def _subsume(self, g: Context, got: Type, want: Type) -> None:
        if isinstance(got, Pro) and isinstance(want, (Pro, Obj)):
            missing = [(m, x) for m, x in want.row if got.row.get(m) is None]
            if missing:
                extra = {m: subst_type(x, want.binder, TVar(got.binder)) for m, x in missing}
                got = Pro(got.binder, got.row.extend(extra), got.plus)
        try:
            self.matches(g, got, want)
        except CheckError as err:
            raise CheckError(err.kind, "Subsume", f"{_show(got)} does not match {_show(want)}: {err.message}") from None
        try:
            self.kind_rigid(g, want)
        except CheckError as err:
            raise CheckError(err.kind, "Subsume", f"{_show(want)} is not rigid: {err.message}") from None

    # objects
    def _ext(self, g: Context, e: Ext, scope, expected: Optional[Type] = None) -> tuple[Type, Optional[Type]]:
        """Types of an extension by (Extend) and, when it applies, by (Override)."""
        so = self.infer(g, e.obj, scope)
        cls, b, row, plus = self._expose_or_fail(g, so, "Extend", e.pos)
        n = e.method
        if row.get(n) is None:
            if not isinstance(so, Pro):
                raise CheckError(ErrorKind.UNKNOWN_METHOD, _obj_rule("Extend", cls),
                                 f"cannot add fresh method {n} to a receiver that is not a pro-type", e.pos)
            so = self._enrich(g, so, [n], e, expected)
            cls, b, row, plus = Pro, so.binder, so.row, so.plus
        elif e.annot is not None:
            if not row_subset(Row.of({n: e.annot}), Row.of({n: row.get(n)}), "t", b):
                raise CheckError(ErrorKind.ROW_MISMATCH, _obj_rule("Extend", cls),
                                 f"annotation {_show(e.annot)} for {n} disagrees with {_show(row.get(n))}", e.pos)
        t, g2, r = self._bound(g, cls, b, row, plus | {n})
        self._check_method(g2, e.body, t, r.get(n), _obj_rule("Extend", cls))
        return plus_extend(so, {n}), (so if n in plus else None)

    def _check_method(self, g: Context, body: Term, t: str, s: Type, rule: str) -> None:
        if isinstance(body, Lam) and (body.annot is None or alpha_eq_type(body.annot, TVar(t))):
            self.check(g.add_var(body.param, TVar(t)), body.body, s, TVar(t), rule)
        else:
            self.check(g, body, Arrow(TVar(t), s), TVar(t), rule)

    def _enrich(self, g: Context, so: Pro, seeds: list[str], site: Term, expected: Optional[Type] = None) -> Pro:
        """Pre-Extend ``so`` with the fresh methods ``seeds`` and everything they need."""
        local = _annotations(site)
        hint: list[tuple[str, Type, Optional[Ext]]] = []
        if isinstance(site, Ext) and site.annot is not None:
            hint.append((site.method, site.annot, site))
        if isinstance(expected, (Pro, Obj)):
            hint += [(m, subst_type(x, expected.binder, TVar("t")), None) for m, x in expected.row]
        own: list[tuple[str, Type, Optional[Ext]]] = []  # extensions of the method's own self
        pools = [hint, own, local, self.root_pool]

        def lookup(m: str) -> Optional[tuple[Type, Optional[Ext]]]:
            for pool in pools:
                for lab, s, node in pool:
                    if lab == m:
                        return s, node
            return None

        found: dict[str, Type] = {}
        queue = list(seeds)
        bodies: list[Term] = [site.body] if isinstance(site, Ext) else []
        if isinstance(site, Sel):
            queue += _rebuild_labels(site.rebuild)
        for body in bodies:
            own += _self_ext_labels(body)
        queue += [m for m, _, _ in own]
        while queue:
            m = queue.pop(0)
            if m in found or so.row.get(m) is not None:
                continue
            hit = lookup(m)
            if hit is None:
                raise CheckError(ErrorKind.ANNOTATION_REQUIRED, "Pre-Extend",
                                 f"fresh method {m} needs a type annotation", site.pos)
            s, node = hit
            found[m] = s
            queue += sorted(mentioned_labels(s, "t"))
            if node is not None:
                more = _self_ext_labels(node.body)
                own += more
                queue += [x for x, _, _ in more]
        if not found:
            return so
        b = so.binder
        extra = {m: subst_type(s, "t", TVar(b)) if b != "t" else s for m, s in found.items()}
        out = Pro(b, so.row.extend(extra), so.plus)
        try:
            self.kind(g, out)
        except CheckError as err:
            raise CheckError(err.kind, "Pre-Extend", err.message, site.pos) from None
        return out

    def _sel(self, g: Context, e: Sel, scope) -> Type:
        so = self.infer(g, e.obj, scope)
        if isinstance(so, Pro):
            so = self._enrich(g, so, [], e)
        cls, b, row, plus = self._expose_or_fail(g, so, "Select", e.pos)
        n = e.method
        s = row.get(n)
        if s is None:
            raise CheckError(ErrorKind.UNKNOWN_METHOD, _obj_rule("Select", cls), f"no method {n}", e.pos)
        if n not in plus:
            raise CheckError(ErrorKind.NOT_MATCHING, _obj_rule("Select", cls), f"method {n} is not available", e.pos)
        t, g2, _ = self._bound(g, cls, b, row, plus | {n})
        rb = e.rebuild
        if not isinstance(rb, Lam) or (rb.annot is not None and not alpha_eq_type(rb.annot, TVar(t))):
            raise CheckError(ErrorKind.ARITY_OR_FORM, _obj_rule("Select", cls), "rebuild must be a function of self", e.pos)
        got = self.infer(g2.add_var(rb.param, TVar(t)), rb.body, TVar(t))
        if not (isinstance(got, TVar) and got.name == t):
            raise CheckError(ErrorKind.ROW_MISMATCH, _obj_rule("Select", cls),
                             f"rebuild must return the self type, got {_show(got)}", e.pos)
        return subst_type(s, b, plus_extend(so, got.plus))


def _obj_rule(rule: str, cls: type) -> str:
    return f"{rule}-Obj" if cls is Obj else rule


def _show(s: Type) -> str:
    from .parser import pretty_type
    from .typexpr import canonical

    return pretty_type(canonical(s))


# public API -----------------------------------------------------------------

def _judge(mode, sig) -> _Judge:
    return _Judge(mode, sig if sig is not None else default_signature())


def wf_context(g: Context, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> None:
    _judge(mode, sig).wf_context(g)


def kind_T(g: Context, s: Type, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> None:
    _judge(mode, sig).kind(g, s)


def kind_rigid(g: Context, s: Type, sig: Optional[Signature] = None) -> None:
    _judge(Mode.SUB, sig).kind_rigid(g, s)


def matches(g: Context, s1: Type, s2: Type, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> None:
    _judge(mode, sig).matches(g, s1, s2)


def is_match(g: Context, s1: Type, s2: Type, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> bool:
    try:
        matches(g, s1, s2, mode, sig)
        return True
    except CheckError:
        return False


def infer(g: Context, e: Term, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> Type:
    return Checker(mode, sig, e).infer(g, e)


def check(g: Context, e: Term, expected: Type, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> None:
    c = Checker(mode, sig, e)
    c.kind(g, expected)
    c.check(g, e, expected)


def type_of(e: Term, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> Type:
    """Inferred closed type, with binders renamed for display."""
    from .typexpr import canonical

    return canonical(infer(EMPTY_CONTEXT, e, mode, sig))


def well_typed(e: Term, expected: Type, mode: Mode = Mode.PLAIN, sig: Optional[Signature] = None) -> bool:
    try:
        check(EMPTY_CONTEXT, e, expected, mode, sig)
        return True
    except CheckError:
        return False
