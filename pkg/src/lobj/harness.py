"""Property-based checks of the metatheory on generated terms and types.

Typed terms are built rule by rule (objects grown by annotated extensions,
then sent, overridden, wrapped, ascribed) and every emitted pair is
re-checked before use.  A second, filter-based generator samples raw
terms and keeps the typed ones; it is used to cross-check generator bias
and as extra input for the confluence search.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional

from .checker import EMPTY_CONTEXT, CheckError, Context, Mode, Signature, check, default_signature, infer
from .checker import covariant, is_match, kind_T, kind_rigid, wf_context
from .parser import parse_term, pretty_term, pretty_type
from .reduction import NEXT, Stuck, classify, focus, step, step_any, subterm_at, wrong_kind
from .terms import (
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
    bind_constants,
    canonical_key,
    children,
    free_vars,
    size,
    subst_term,
)
from .typexpr import (
    INT,
    Arrow,
    ConstType,
    Obj,
    Pro,
    Row,
    TVar,
    Type,
    alpha_eq_type,
    canonical,
    row_subset,
    subst_type,
    type_key,
)

BOOL, COLORS = ConstType("bool"), ConstType("colors")
LABELS = ("a", "b", "c", "d", "e", "f")
SR_FUEL = 200
JOIN_DEPTH = 8
JOIN_CAP = 600

Stepper = Callable[[Term], Optional[tuple[str, Term]]]


@dataclass(frozen=True)
class GenConfig:
    seed: int = 42
    size: int = 12
    width: int = 4
    depth: int = 5
    mode: Mode = Mode.PLAIN
    count: int = 1000

    def __post_init__(self):
        for name in ("size", "width", "depth", "count"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class Case:
    index: int
    term: Term
    type: Type
    origin: str  # built | seed | mutant | filtered


@dataclass
class Failure:
    case: int
    message: str
    term: Optional[Term] = None
    type: Optional[Type] = None
    trace: list[str] = field(default_factory=list)
    witness: Optional[Term] = None

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "message": self.message,
            "term": pretty_term(self.term) if self.term is not None else None,
            "type": pretty_type(self.type) if self.type is not None else None,
            "trace": self.trace,
            "witness": pretty_term(self.witness) if self.witness is not None else None,
            "witness_size": size(self.witness) if self.witness is not None else None,
        }


@dataclass
class PropertyReport:
    name: str
    cases: int = 0
    failures: list[Failure] = field(default_factory=list)
    unknown: int = 0
    skipped: int = 0
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "ok" if self.ok else "FAIL"
        extra = f", {self.unknown} unknown" if self.unknown else ""
        return (f"{status} {self.name}: {self.cases} cases, {self.checks} checks, "
                f"{len(self.failures)} failures{extra}, {self.skipped} skipped")

    def to_json(self) -> dict:
        return {
            "property": self.name,
            "ok": self.ok,
            "cases": self.cases,
            "checks": self.checks,
            "unknown": self.unknown,
            "skipped": self.skipped,
            "failures": [f.to_json() for f in self.failures],
        }


# term surgery ---------------------------------------------------------------

def replace_at(e: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    from .reduction import _replace_child

    return _replace_child(e, path[0], replace_at(children(e)[path[0]], path[1:], new))


def positions(e: Term, path: tuple[int, ...] = ()) -> Iterable[tuple[int, ...]]:
    yield path
    for i, c in enumerate(children(e)):
        yield from positions(c, path + (i,))


def _typed(e: Term, mode: Mode, sig: Signature) -> Optional[Type]:
    try:
        return canonical(infer(EMPTY_CONTEXT, e, mode, sig))
    except CheckError:
        return None


def _checks(e: Term, ty: Type, mode: Mode, sig: Signature, g: Context = EMPTY_CONTEXT) -> Optional[CheckError]:
    try:
        check(g, e, ty, mode, sig)
        return None
    except CheckError as err:
        return err


# construction-first generator -----------------------------------------------

def _c(n) -> Term:
    return Const(str(n))


def _plus(a: Term, b: Term) -> Term:
    return App(App(Const("plus"), a), b)


class _Builder:
    """Grows one object by typed extensions, then applies random operations."""

    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.labels = LABELS[: cfg.width]
        self.row: dict[str, tuple] = {}  # label -> kind
        self.avail: set[str] = set()
        self.rigid = False

    def sigma(self, kind: tuple) -> Type:
        match kind:
            case ("int",):
                return INT
            case ("bool",):
                return BOOL
            case ("colors",):
                return COLORS
            case ("self",):
                return TVar("t")
            case ("ext", n):
                return TVar("t", frozenset({n}))
            case ("fun",):
                return Arrow(INT, INT)
        raise ValueError(kind)

    def body(self, kind: tuple, annotate_inner: bool = True, own: Optional[str] = None) -> Term:
        r = self.rng
        # a body never sends its own label, so generated terms terminate
        ints = sorted(m for m in self.avail if self.row[m] == ("int",) and m != own)
        match kind:
            case ("int",):
                if ints and r.random() < 0.4:
                    k = r.choice(ints)
                    get = Send(Var("s"), k)
                    return Lam("s", None, _plus(get, _c(1)) if r.random() < 0.3 else get)
                return Lam("s", None, _c(r.randint(0, 3)))
            case ("bool",):
                return Lam("s", None, Const(r.choice(["true", "false"])))
            case ("colors",):
                return Lam("s", None, Const(r.choice(["white", "black"])))
            case ("self",):
                return Lam("s", None, Var("s"))
            case ("ext", n):
                annot = INT if annotate_inner else None
                return Lam("s", None, Ext(Var("s"), n, annot, Lam("s'", None, _c(r.randint(0, 3)))))
            case ("fun",):
                # the parameter type may come from the method annotation alone
                return Lam("s", None, Lam("x", INT if r.random() < 0.5 else None, _plus(Var("x"), _c(1))))
        raise ValueError(kind)

    def add_method(self, o: Term) -> Term:
        r = self.rng
        free = [m for m in self.labels if m not in self.row]
        if not free:
            return o
        m = r.choice(free)
        choice = r.choices(["int", "bool", "colors", "self", "ext", "fun"], [4, 1, 1, 1, 4, 1])[0]
        kind: tuple = (choice,)
        fresh_n = None
        if choice == "ext":
            others = [n for n in free if n != m]
            existing = [n for n, k in self.row.items() if k == ("int",)]
            pool = others + existing
            if not pool:
                kind = ("int",)
            else:
                n = r.choice(pool)
                kind = ("ext", n)
                if n not in self.row:
                    fresh_n = n
        o = Ext(o, m, self.sigma(kind), self.body(kind))
        self.row[m] = kind
        if fresh_n is not None:
            self.row[fresh_n] = ("int",)
        self.avail.add(m)
        return o

    def operate(self, o: Term, sig: Signature) -> Term:
        r = self.rng
        ops = ["send", "send", "send", "override", "wrap"]
        if not self.rigid:
            ops += ["extend"]
        if self.cfg.mode is Mode.SUB:
            ops += ["ascribe", "width"] if self.rigid else ["ascribe"]
        op = r.choice(ops)
        sendable = sorted(m for m in self.avail if self.row[m][0] in ("self", "ext"))
        if op == "send" and sendable:
            m = r.choice(sendable)
            kind = self.row[m]
            if kind[0] == "ext":
                self.avail.add(kind[1])
            return Send(o, m)
        if op == "override" and self.avail:
            m = r.choice(sorted(self.avail))
            return Ext(o, m, None, self.body(self.row[m], annotate_inner=r.random() < 0.5, own=m))
        if op == "extend" and not self.rigid:
            free = [m for m in self.labels if m not in self.row]
            if free:
                m = r.choice(free)
                self.row[m] = ("int",)
                self.avail.add(m)
                return Ext(o, m, INT, Lam("s", None, _c(r.randint(0, 3))))
        if op == "wrap":
            if r.random() < 0.5:
                return App(Lam("x", None, Var("x")), o)
            ty = _typed(o, self.cfg.mode, sig)
            if ty is not None:
                return App(Lam("x", ty, Var("x")), o)
        if op == "ascribe":
            ty = _typed(o, self.cfg.mode, sig)
            if isinstance(ty, Pro):
                self.rigid = True
                return Ascribe(o, Obj(ty.binder, ty.row, ty.plus))
        if op == "width":
            ty = _typed(o, self.cfg.mode, sig)
            if isinstance(ty, Obj):
                narrowed = _narrow(ty, r)
                self.row = {m: k for m, k in self.row.items() if m in narrowed.row.labels()}
                self.avail &= narrowed.plus
                return App(Lam("x", narrowed, Var("x")), o)
        return o

    def finish(self, o: Term) -> Term:
        r = self.rng
        ints = sorted(m for m in self.avail if self.row[m] == ("int",))
        funs = sorted(m for m in self.avail if self.row[m] == ("fun",))
        x = r.random()
        if ints and x < 0.7:
            get = Send(o, r.choice(ints))
            return _plus(get, _c(1)) if r.random() < 0.2 else get
        if funs and x < 0.85:
            return App(Send(o, r.choice(funs)), _c(2))
        return o


def _narrow(ty: Obj, rng: random.Random) -> Obj:
    """A wider obj-type: drop labels not needed by the ones kept."""
    from .typexpr import mentioned_labels

    labels = sorted(ty.row.labels())
    keep = {m for m in labels if rng.random() < 0.6}
    changed = True
    while changed:
        changed = False
        for m in list(keep):
            need = mentioned_labels(ty.row.get(m), ty.binder) - keep
            if need:
                keep |= need
                changed = True
    row = Row(tuple((m, s) for m, s in ty.row if m in keep))
    plus = frozenset(m for m in sorted(ty.plus) if m in keep and rng.random() < 0.8)
    return Obj(ty.binder, row, plus)


SEED_SOURCES = (
    "<>",
    r"< <> <- add_n : t + n = \self. <self <- n : int = 1> >",
    r"< <> <- add_n : t + n = \self. <self <- n : int = 1> > # add_n",
    r"< <> <- add_mn : t + m = \self. <self <- m : t + n = \s'. <s' <- n : int = 1> > > # add_mn",
    r"< < <> <- id : t = \s. s > <- one : int = 1 > # id",
    r"(< <> <- add_n : t + n = \self. <self <- n : int = 1> > # add_n) # n",
)


@lru_cache(maxsize=4)
def _seed_terms(consts: frozenset[str]) -> tuple[Term, ...]:
    return tuple(bind_constants(parse_term(s), set(consts)) for s in SEED_SOURCES)


def _mutate(e: Term, rng: random.Random) -> Term:
    """Replace one integer literal by an addition with the same type."""
    spots = [p for p in positions(e) if isinstance(subterm_at(e, p), Const) and subterm_at(e, p).name.isdigit()]
    if not spots:
        return e
    p = rng.choice(spots)
    k = int(subterm_at(e, p).name)
    return replace_at(e, p, _plus(_c(k), _c(1)))


def gen_typed(cfg: GenConfig, sig: Optional[Signature] = None) -> list[Case]:
    """``cfg.count`` closed terms of size at most ``cfg.size`` that check at their type."""
    sig = sig or default_signature()
    rng = random.Random(cfg.seed)
    seeds = [e for e in _seed_terms(frozenset(sig.consts)) if size(e) <= cfg.size]
    out: list[Case] = []
    attempts = misses = 0
    while len(out) < cfg.count and attempts < cfg.count * 100:
        attempts += 1
        origin = "built"
        if seeds and len(out) % 10 == 9:
            e = rng.choice(seeds)
            origin = "seed"
            if rng.random() < 0.5:
                e, origin = _mutate(e, rng), "mutant"
        else:
            e = _build(rng, cfg, sig)
        if size(e) > cfg.size:
            misses += 1
            # a size too small for any built object still gets the seeds that fit
            if not seeds or misses < 50:
                continue
            e, origin = rng.choice(seeds), "seed"
        misses = 0
        ty = _typed(e, cfg.mode, sig)
        if ty is None or _checks(e, ty, cfg.mode, sig) is not None:
            continue
        out.append(Case(len(out), e, ty, origin))
    return out


def _build(rng: random.Random, cfg: GenConfig, sig: Signature) -> Term:
    b = _Builder(rng, cfg)
    o: Term = Empty()
    for _ in range(rng.randint(1, min(3, cfg.depth))):
        o = b.add_method(o)
    for _ in range(rng.randint(0, 2)):
        o = b.operate(o, sig)
    return b.finish(o)


# filter-based generator -----------------------------------------------------

_RAW_TYPES = (INT, TVar("t"), TVar("t", frozenset({"a"})), TVar("t", frozenset({"b"})))


def _raw(rng: random.Random, budget: int, scope: list[str]) -> Term:
    """A random, usually ill-typed term with at most ``budget`` nodes."""
    leaves: list[Callable[[], Term]] = [lambda: Empty(), lambda: _c(rng.randint(0, 2))]
    if scope:
        leaves.append(lambda: Var(rng.choice(scope)))
    if budget <= 1:
        return rng.choice(leaves)()
    kind = rng.choice(["leaf", "lam", "app", "ext", "ext", "send", "send"])
    if kind == "leaf":
        return rng.choice(leaves)()
    if kind == "lam":
        x = rng.choice(["s", "x"])
        return Lam(x, None, _raw(rng, budget - 1, scope + [x]))
    if kind == "send":
        return Send(_raw(rng, budget - 1, scope), rng.choice(["a", "b"]))
    k = rng.randint(1, budget - 2) if budget > 2 else 1
    left = _raw(rng, k, scope)
    if kind == "app":
        return App(left, _raw(rng, max(1, budget - 1 - k), scope))
    annot = rng.choice(_RAW_TYPES + (None,))
    body = Lam("s", None, _raw(rng, max(1, budget - 2 - k), scope + ["s"]))
    return Ext(left, rng.choice(["a", "b"]), annot, body)


def gen_raw(cfg: GenConfig, count: int, max_size: int = 8) -> list[Term]:
    rng = random.Random(cfg.seed + 1)
    return [_raw(rng, rng.randint(1, max_size), []) for _ in range(count)]


def gen_filtered(cfg: GenConfig, sig: Optional[Signature] = None, max_size: int = 8,
                 samples: Optional[int] = None) -> list[Case]:
    """Sampled raw terms of size at most ``max_size`` that happen to type."""
    sig = sig or default_signature()
    out = []
    for e in gen_raw(cfg, samples or cfg.count * 20, max_size):
        ty = _typed(e, cfg.mode, sig)
        if ty is not None and _checks(e, ty, cfg.mode, sig) is None:
            out.append(Case(len(out), e, ty, "filtered"))
    return out


def shape_profile(cases: Iterable[Case]) -> Counter:
    """Constructor counts, to compare what the two generators produce."""
    c: Counter = Counter()
    for case in cases:
        stack = [case.term]
        while stack:
            x = stack.pop()
            c[type(x).__name__] += 1
            stack.extend(children(x))
        if isinstance(case.term, Send) and isinstance(case.term.obj, Ext):
            c["send-of-extension"] += 1
    return c


# shrinking ------------------------------------------------------------------

def shrink(e: Term, fails: Callable[[Term], bool], budget: int = 400) -> Term:
    """Greedy: keep the first strictly smaller candidate that still fails."""
    tries = 0
    improved = True
    while improved and tries < budget:
        improved = False
        for c in sorted(_candidates(e), key=size):
            if size(c) >= size(e):
                break
            tries += 1
            if fails(c):
                e = c
                improved = True
                break
            if tries >= budget:
                break
    return e


def _candidates(e: Term) -> list[Term]:
    out: dict[tuple, Term] = {}
    for p in positions(e):
        node = subterm_at(e, p)
        for c in children(node):
            cand = replace_at(e, p, c)
            if not free_vars(cand):
                out.setdefault(canonical_key(cand, annotations=True), cand)
        if isinstance(node, Const) and node.name.isdigit() and node.name != "0":
            cand = replace_at(e, p, _c(0))
            out.setdefault(canonical_key(cand, annotations=True), cand)
    return list(out.values())


# properties -----------------------------------------------------------------

def _sr_violation(e: Term, ty: Type, mode: Mode, sig: Signature, stepper: Stepper,
                  fuel: int = SR_FUEL) -> Optional[tuple[str, list[str]]]:
    trace: list[str] = []
    cur = e
    for i in range(fuel):
        r = stepper(cur)
        if r is None:
            return None
        rule, cur = r
        trace.append(f"#{i + 1} [{rule}] {pretty_term(cur)}")
        err = _checks(cur, ty, mode, sig)
        if err is not None:
            return f"after step {i + 1} [{rule}] the term no longer has its type: {err.rule}: {err.message}", trace
    return None


def _witness(e: Term, bad: Callable[[Term, Type], bool], mode: Mode, sig: Signature) -> Term:
    def fails(c: Term) -> bool:
        ty = _typed(c, mode, sig)
        return ty is not None and bad(c, ty)

    return shrink(e, fails)


def prop_subject_reduction(cfg: GenConfig, cases: Optional[list[Case]] = None, stepper: Stepper = step,
                           sig: Optional[Signature] = None) -> PropertyReport:
    sig = sig or default_signature()
    cases = cases if cases is not None else gen_typed(cfg, sig)
    rep = PropertyReport("subject_reduction", len(cases))
    for case in cases:
        v = _sr_violation(case.term, case.type, cfg.mode, sig, stepper)
        rep.checks += 1
        if v is not None:
            bad = lambda c, ty: _sr_violation(c, ty, cfg.mode, sig, stepper) is not None  # noqa: E731
            rep.failures.append(Failure(case.index, v[0], case.term, case.type, v[1],
                                        _witness(case.term, bad, cfg.mode, sig)))
    return rep


def _run_violation(e: Term, stepper: Stepper, fuel: int = SR_FUEL) -> Optional[tuple[str, list[str]]]:
    trace: list[str] = []
    cur = e
    for i in range(fuel + 1):
        kind = wrong_kind(focus(cur))
        if kind:
            return f"reached a wrong term ({kind}) after {i} steps", trace
        r = stepper(cur)
        if r is None:
            res = classify(cur)
            if isinstance(res, Stuck):
                return f"stuck after {i} steps at {pretty_term(res.at)}", trace
            return None
        rule, cur = r
        trace.append(f"#{i + 1} [{rule}] {pretty_term(cur)}")
    return None


def prop_no_wrong(cfg: GenConfig, cases: Optional[list[Case]] = None, stepper: Stepper = step,
                  sig: Optional[Signature] = None) -> PropertyReport:
    sig = sig or default_signature()
    cases = cases if cases is not None else gen_typed(cfg, sig)
    rep = PropertyReport("no_wrong", len(cases))
    for case in cases:
        rep.checks += 1
        v = _run_violation(case.term, stepper)
        if v is not None:
            bad = lambda c, ty: _run_violation(c, stepper) is not None  # noqa: E731
            rep.failures.append(Failure(case.index, v[0], case.term, case.type, v[1],
                                        _witness(case.term, bad, cfg.mode, sig)))
    return rep


def join(a: Term, b: Term, depth: int = JOIN_DEPTH, cap: int = JOIN_CAP) -> Optional[bool]:
    """Do a and b reach a common term within ``depth`` steps each?

    True: joined.  False: both sides were fully explored without meeting.
    None: the search hit the depth or size bound.
    """
    key = lambda e: canonical_key(e)  # noqa: E731
    seen = [{key(a)}, {key(b)}]
    fronts = [[a], [b]]
    if seen[0] & seen[1]:
        return True
    for _ in range(depth):
        for side in (0, 1):
            nxt = []
            for e in fronts[side]:
                for _, r in step_any(e):
                    k = key(r)
                    if k not in seen[side]:
                        seen[side].add(k)
                        nxt.append(r)
            fronts[side] = nxt
            if seen[0] & seen[1]:
                return True
        if not fronts[0] and not fronts[1]:
            return False
        if len(seen[0]) + len(seen[1]) > cap:
            return None
    return None


def _confluence_inputs(cfg: GenConfig, cases: list[Case]) -> list[tuple[int, Term]]:
    out = []
    for case in cases:
        cur = case.term
        for _ in range(3):
            out.append((case.index, cur))
            r = step(cur)
            if r is None:
                break
            cur = r[1]
    base = len(cases)
    out.extend((base + i, e) for i, e in enumerate(gen_raw(cfg, max(1, cfg.count // 2))))
    return out


def prop_confluence(cfg: GenConfig, cases: Optional[list[Case]] = None,
                    sig: Optional[Signature] = None) -> PropertyReport:
    """Every pair of one-step reducts joins; raw untyped terms are included."""
    sig = sig or default_signature()
    cases = cases if cases is not None else gen_typed(cfg, sig)
    inputs = _confluence_inputs(cfg, cases)
    rep = PropertyReport("confluence", len(inputs))
    for idx, e in inputs:
        reducts = {canonical_key(r): r for _, r in step_any(e)}
        for x, y in itertools.combinations(list(reducts.values()), 2):
            rep.checks += 1
            j = join(x, y)
            if j is None:
                rep.unknown += 1
            elif not j:
                rep.failures.append(Failure(idx, f"reducts {pretty_term(x)} and {pretty_term(y)} do not join", e))
    return rep


# matching laws --------------------------------------------------------------

@dataclass(frozen=True)
class MatchCase:
    index: int
    context: Context
    pool: tuple[Type, ...]


def _row_type(rng: random.Random, binder: str, labels: list[str], mode: Mode, outer: Optional[tuple[str, Type]]) -> Type:
    choices = ["int", "int", "bool", "self", "arrow"]
    if outer is not None:
        choices.append("outer")
    if mode is Mode.SUB:
        choices.append("contra")
    k = rng.choice(choices)
    pick = lambda: frozenset(m for m in labels if rng.random() < 0.3)  # noqa: E731
    if k == "int":
        return INT
    if k == "bool":
        return BOOL
    if k == "self":
        return TVar(binder, pick())
    if k == "arrow":
        return Arrow(INT, TVar(binder, pick()))
    if k == "contra":
        return Arrow(TVar(binder), INT)
    name, bound = outer
    return TVar(name, frozenset(m for m in sorted(bound.row.labels()) if rng.random() < 0.3))


def _object_type(rng: random.Random, cls: type, binder: str, labels: list[str], mode: Mode,
                 outer: Optional[tuple[str, Type]] = None) -> Pro | Obj:
    row = Row.of({m: _row_type(rng, binder, labels, mode, outer) for m in labels})
    plus = frozenset(m for m in labels if rng.random() < 0.5)
    return cls(binder, row, plus)


def _variants(rng: random.Random, base: Pro | Obj, mode: Mode, width: int) -> list[Type]:
    """Types around base: narrower, wider, with a retyped label, and as obj."""
    from .typexpr import mentioned_labels

    out: list[Type] = [base]
    labels = sorted(base.row.labels())
    for _ in range(3):
        keep = {m for m in labels if rng.random() < 0.6}
        grow = True
        while grow:
            grow = False
            for m in list(keep):
                need = mentioned_labels(base.row.get(m), base.binder) - keep
                if need:
                    keep |= need
                    grow = True
        row = Row(tuple((m, s) for m, s in base.row if m in keep))
        out.append(Pro(base.binder, row, frozenset(m for m in base.plus if m in keep)))
    extra = [m for m in LABELS[: width + 1] if m not in labels]
    if extra:
        x = extra[0]
        out.append(Pro(base.binder, base.row.extend({x: INT}), base.plus | {x}))
    if labels:
        m = rng.choice(labels)
        other = BOOL if base.row.get(m) != BOOL else INT
        entries = tuple((k, other if k == m else s) for k, s in base.row)
        out.append(Pro(base.binder, Row(entries), base.plus))
    if mode is Mode.SUB:
        out += [Obj(s.binder, s.row, s.plus) for s in list(out) if isinstance(s, Pro)]
    return out


def gen_match_cases(cfg: GenConfig, sig: Optional[Signature] = None) -> list[MatchCase]:
    """Well-formed contexts with a pool of object-types and arrows over them."""
    sig = sig or default_signature()
    rng = random.Random(cfg.seed)
    out: list[MatchCase] = []
    while len(out) < cfg.count:
        labels = sorted(rng.sample(LABELS[: cfg.width], rng.randint(1, cfg.width)))
        cls = Obj if cfg.mode is Mode.SUB and rng.random() < 0.5 else Pro
        b1 = _object_type(rng, cls, "u", labels, cfg.mode)
        g = EMPTY_CONTEXT.add_match("t1", b1)
        if rng.random() < 0.5:
            labels2 = sorted(rng.sample(LABELS[: cfg.width], rng.randint(1, cfg.width)))
            g = g.add_match("t2", _object_type(rng, Pro, "w", labels2, cfg.mode, ("t1", b1)))
        try:
            wf_context(g, cfg.mode, sig)
        except CheckError:
            continue
        base = _object_type(rng, Pro, "v", labels, cfg.mode, ("t1", b1))
        pool: list[Type] = _variants(rng, base, cfg.mode, cfg.width)
        pool += [TVar("t1", frozenset(m for m in sorted(b1.row.labels()) if rng.random() < 0.5)) for _ in range(2)]
        pool.append(TVar("t1", b1.plus))
        if cfg.mode is Mode.SUB:
            pool += [Arrow(INT, s) for s in pool[:3]]
            # arrows only match when the domain is rigid
            pool += [Arrow(s, INT) for s in pool if isinstance(s, Obj) and _rigid(g, s, sig)][:2]
        uniq: dict[tuple, Type] = {}
        for s in pool:
            try:
                kind_T(g, s, cfg.mode, sig)
            except CheckError:
                continue
            uniq.setdefault(type_key(s), s)
        out.append(MatchCase(len(out), g, tuple(uniq.values())))
    return out


def _rigid(g: Context, s: Type, sig: Signature) -> bool:
    try:
        kind_rigid(g, s, sig)
        return True
    except CheckError:
        return False


def _label_types_agree(s1: Pro | Obj, s2: Pro | Obj) -> list[str]:
    """Labels present in both rows whose types differ."""
    return [m for m, x in s1.row if s2.row.get(m) is not None
            and not row_subset(Row.of({m: x}), Row.of({m: s2.row.get(m)}), s1.binder, s2.binder)]


def _covariant_sigmas(labels: list[str]) -> list[Type]:
    """Rigid types covariant in v: v + S and constant-domain arrows into it."""
    out: list[Type] = [TVar("v")]
    for m in labels:
        out.append(TVar("v", frozenset({m})))
    out.append(Arrow(INT, TVar("v")))
    if labels:
        out.append(Arrow(BOOL, Arrow(INT, TVar("v", frozenset(labels[:1])))))
    return out


def _labels_of(g: Context, s: Type) -> Optional[frozenset[str]]:
    match s:
        case Pro() | Obj():
            return s.row.labels()
        case TVar(t, _):
            b = g.bound(t)
            return b.row.labels() if b is not None else None
    return None


def prop_matching_laws(cfg: GenConfig, cases: Optional[list[MatchCase]] = None,
                       sig: Optional[Signature] = None) -> PropertyReport:
    """Reflexivity, transitivity, uniqueness, and rigid covariant substitution."""
    sig = sig or default_signature()
    cases = cases if cases is not None else gen_match_cases(cfg, sig)
    rep = PropertyReport("matching_laws", len(cases))
    mode = cfg.mode
    for mc in cases:
        g, pool = mc.context, mc.pool
        n = len(pool)
        m = [[is_match(g, pool[i], pool[j], mode, sig) for j in range(n)] for i in range(n)]

        def fail(msg: str) -> None:
            rep.failures.append(Failure(mc.index, f"{msg} in context {g!r}"))

        for i in range(n):
            rep.checks += 1
            if not m[i][i]:
                fail(f"reflexivity fails for {pretty_type(pool[i])}")
        for i, j, k in itertools.product(range(n), repeat=3):
            if m[i][j] and m[j][k]:
                rep.checks += 1
                if not m[i][k]:
                    fail(f"transitivity fails: {pretty_type(pool[i])} <# {pretty_type(pool[j])} "
                         f"<# {pretty_type(pool[k])}")
        for i in range(n):
            targets = [pool[j] for j in range(n) if m[i][j] and isinstance(pool[j], (Pro, Obj))]
            for s1, s2 in itertools.combinations(targets, 2):
                rep.checks += 1
                bad = _label_types_agree(s1, s2)
                if bad:
                    fail(f"uniqueness fails: {pretty_type(pool[i])} matches {pretty_type(s1)} and "
                         f"{pretty_type(s2)}, which disagree on {', '.join(bad)}")
        if mode is Mode.SUB:
            _lemma_rigid_subst(rep, mc, m, sig)
    return rep


def _lemma_rigid_subst(rep: PropertyReport, mc: MatchCase, m: list[list[bool]], sig: Signature) -> None:
    g, pool = mc.context, mc.pool
    for i, j in itertools.product(range(len(pool)), repeat=2):
        if not m[i][j]:
            continue
        t1, t2 = pool[i], pool[j]
        labels = _labels_of(g, t2)
        if labels is None:
            continue
        bound = Obj("w", Row.of({lab: INT for lab in sorted(labels)}))
        gv = g.add_match("v", bound)
        for s in _covariant_sigmas(sorted(labels)):
            if not covariant("v", s):
                continue
            try:
                kind_rigid(gv, s, sig)
                s1, s2 = subst_type(s, "v", t1), subst_type(s, "v", t2)
                kind_T(g, s1, Mode.SUB, sig)
                kind_T(g, s2, Mode.SUB, sig)
            except CheckError:
                rep.skipped += 1
                continue
            rep.checks += 1
            if not is_match(g, s1, s2, Mode.SUB, sig):
                rep.failures.append(Failure(mc.index, f"substituting {pretty_type(t1)} <# {pretty_type(t2)} "
                                                      f"into {pretty_type(s)} breaks matching"))


# substitution ---------------------------------------------------------------

def prop_substitution(cfg: GenConfig, cases: Optional[list[Case]] = None,
                      sig: Optional[Signature] = None) -> PropertyReport:
    """Abstract a closed subterm u:σ to x:σ; any closed e:σ put back keeps the type."""
    sig = sig or default_signature()
    cases = cases if cases is not None else gen_typed(cfg, sig)
    by_type: dict[tuple, list[Term]] = {}
    for c in cases:
        by_type.setdefault(type_key(c.type), []).append(c.term)
    rep = PropertyReport("substitution", len(cases))
    rng = random.Random(cfg.seed)
    for case in cases:
        spots = [p for p in positions(case.term) if p and not free_vars(subterm_at(case.term, p))
                 and not isinstance(subterm_at(case.term, p), (Lam, Sel))]
        for p in rng.sample(spots, min(2, len(spots))):
            u = subterm_at(case.term, p)
            su = _typed(u, cfg.mode, sig)
            if su is None:
                rep.skipped += 1
                continue
            body = replace_at(case.term, p, Var("x0"))
            if _checks(body, case.type, cfg.mode, sig, EMPTY_CONTEXT.add_var("x0", su)) is not None:
                rep.skipped += 1
                continue
            same = by_type.get(type_key(su), [])
            for e in [u, App(Lam("y0", None, Var("y0")), u)] + same[:3]:
                rep.checks += 1
                err = _checks(subst_term(body, "x0", e), case.type, cfg.mode, sig)
                if err is not None:
                    rep.failures.append(Failure(case.index, f"x0 : {pretty_type(su)} replaced by {pretty_term(e)}: "
                                                            f"{err.rule}: {err.message}", body, case.type))
    return rep


# faults ---------------------------------------------------------------------

def _next_drops_method(e: Term) -> Optional[tuple[str, Term]]:
    """A broken Next: the rebuild forgets the method it stepped over."""
    r = step(e)
    if r is None or r[0] != NEXT:
        return r
    return r[0], _drop_rebuild(r[1])


def _drop_rebuild(e: Term) -> Term:
    match e:
        case Sel(o, m, Lam(s, a, App(f, Ext(Var(v), _, _, _)))) if v == s:
            return Sel(o, m, Lam(s, a, App(f, Var(s))), e.pos)
    for i, c in enumerate(children(e)):
        new = _drop_rebuild(c)
        if new is not c:
            from .reduction import _replace_child

            return _replace_child(e, i, new)
    return e


def _success_forgets_self(e: Term) -> Optional[tuple[str, Term]]:
    """A broken Success: the body gets the empty object instead of the receiver."""
    r = step(e)
    if r is None or r[0] != "Success":
        return r
    t = r[1]
    if isinstance(t, App) and isinstance(t.arg, App):
        return r[0], App(t.fun, Empty())
    return r


FAULTS: dict[str, Stepper] = {
    "next-drops-method": _next_drops_method,
    "success-forgets-self": _success_forgets_self,
}


# driver ---------------------------------------------------------------------

PROPERTIES = ("subject_reduction", "no_wrong", "confluence", "matching_laws", "substitution")


def run_property(name: str, cfg: GenConfig, fault: Optional[str] = None,
                 sig: Optional[Signature] = None, cases: Optional[list[Case]] = None) -> PropertyReport:
    sig = sig or default_signature()
    stepper = FAULTS[fault] if fault else step
    if name == "matching_laws":
        return prop_matching_laws(cfg, sig=sig)
    cases = cases if cases is not None else gen_typed(cfg, sig)
    if name == "subject_reduction":
        return prop_subject_reduction(cfg, cases, stepper, sig)
    if name == "no_wrong":
        return prop_no_wrong(cfg, cases, stepper, sig)
    if name == "confluence":
        return prop_confluence(cfg, cases, sig)
    if name == "substitution":
        return prop_substitution(cfg, cases, sig)
    raise KeyError(name)


def run_all(cfg: GenConfig, sig: Optional[Signature] = None) -> list[PropertyReport]:
    sig = sig or default_signature()
    cases = gen_typed(cfg, sig)
    return [run_property(p, cfg, sig=sig, cases=cases) for p in PROPERTIES]
