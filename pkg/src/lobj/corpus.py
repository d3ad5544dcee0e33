"""Loading ``.lobj`` programs and running their directives."""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .checker import EMPTY_CONTEXT, CheckError, Mode, Signature, check, infer
from .parser import CheckType, Directive, EvalTo, LobjSyntaxError, TraceLen, parse_file, pretty_term
from .reduction import DEFAULT_FUEL, Value, eval_term, format_trace, same_result
from .terms import Term, bind_constants, free_vars, subst_term
from .typexpr import canonical, free_tvars

PRELUDE_ENV = "LOBJ_PRELUDE"
BASE_CONST_TYPES = frozenset({"int", "bool", "str", "colors"})


class LoadError(Exception):
    """A program file could not be read."""


def prelude_path() -> Path:
    env = os.environ.get(PRELUDE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("lobj").joinpath("prelude.lobj")))


def load_prelude(path: Optional[str | Path] = None) -> Signature:
    return _load_prelude(str(path or prelude_path()))


@functools.lru_cache(maxsize=8)
def _load_prelude(path: str) -> Signature:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"{path}: {exc}") from exc
    sig = Signature({}, BASE_CONST_TYPES)
    _declare(sig, text)
    return sig


def _declare(sig: Signature, text: str) -> list[tuple[str, Term]]:
    """Add the declarations of an imported file to sig; return its defs."""
    src = parse_file(text, sig.const_types)
    def_names = {n for n, _ in src.defs}
    # any type name free in a declaration denotes a constant type
    extra: set[str] = set()
    for d in src.directives:
        if isinstance(d, CheckType) and d.expected is not None and d.target not in def_names:
            extra |= free_tvars(d.expected)
    if extra:
        sig.const_types = sig.const_types | frozenset(extra)
        src = parse_file(text, sig.const_types)
    for d in src.directives:
        if isinstance(d, CheckType) and d.expected is not None and d.target not in def_names:
            sig.consts[d.target] = d.expected
    return src.defs


@dataclass
class Program:
    sig: Signature
    defs: dict[str, Term] = field(default_factory=dict)  # closed, expanded
    order: list[str] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)
    path: Optional[Path] = None
    local: list[str] = field(default_factory=list)  # defs of the file itself, not of #use imports

    def expand(self, e: Term) -> Term:
        """Replace def names by their bodies and bind prelude constants."""
        for name in reversed(self.order):
            if name in free_vars(e):
                e = subst_term(e, name, self.defs[name])
        consts = set(self.sig.consts) - set(self.defs)
        return bind_constants(e, consts)

    def add_def(self, name: str, e: Term) -> None:
        if name not in self.defs:
            self.order.append(name)
        self.defs[name] = self.expand(e)


def load_program(path: str | Path, sig: Optional[Signature] = None) -> Program:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"{path}: {exc}") from exc
    return program_from_text(text, path.parent, sig, path)


def program_from_text(text: str, base: Path = Path("."), sig: Optional[Signature] = None,
                      path: Optional[Path] = None) -> Program:
    base_sig = sig if sig is not None else load_prelude()
    sig = Signature(dict(base_sig.consts), base_sig.const_types)
    src = parse_file(text, sig.const_types)
    prog = Program(sig, path=path)
    for imp in src.prelude_imports:
        ipath = (base / imp).resolve()
        try:
            itext = ipath.read_text(encoding="utf-8")
        except OSError as exc:
            raise LoadError(f"{ipath}: {exc}") from exc
        for name, e in _declare(sig, itext):
            prog.add_def(name, e)
    if src.prelude_imports:
        src = parse_file(text, sig.const_types)
    for name, e in src.defs:
        prog.add_def(name, e)
        prog.local.append(name)
    prog.directives = list(src.directives)
    return prog


# running directives ---------------------------------------------------------

@dataclass
class DirectiveResult:
    directive: Directive
    mode: Optional[str]
    ok: bool
    detail: str
    rule: Optional[str] = None

    def describe(self) -> str:
        d = self.directive
        kind = {CheckType: "check", EvalTo: "eval", TraceLen: "steps"}[type(d)]
        if isinstance(d, CheckType) and d.polarity == "reject":
            kind = "reject"
        mode = f" [{self.mode}]" if self.mode else ""
        status = "ok" if self.ok else "FAIL"
        return f"{status} line {d.line}: #{kind} {d.target}{mode}: {self.detail}"


def _target(prog: Program, name: str) -> Term:
    if name not in prog.defs:
        raise KeyError(name)
    return prog.defs[name]


def run_directive(prog: Program, d: Directive) -> list[DirectiveResult]:
    try:
        e = _target(prog, d.target)
    except KeyError:
        return [DirectiveResult(d, getattr(d, "mode", None), False, f"no definition named {d.target}")]
    if isinstance(d, CheckType):
        if d.polarity == "accept":
            mode = d.mode or "plain"
            try:
                check(EMPTY_CONTEXT, e, d.expected, Mode(mode), prog.sig)
                return [DirectiveResult(d, mode, True, "typed as expected")]
            except CheckError as err:
                return [DirectiveResult(d, mode, False, str(err), err.rule)]
        out = []
        for mode in ([d.mode] if d.mode else ["plain", "sub"]):
            try:
                s = infer(EMPTY_CONTEXT, e, Mode(mode), prog.sig)
                out.append(DirectiveResult(d, mode, False, f"unexpectedly typed: {_pretty(s)}"))
            except CheckError as err:
                out.append(DirectiveResult(d, mode, True, f"rejected by {err.rule}: {err.message}", err.rule))
        return out
    if isinstance(d, EvalTo):
        want = prog.expand(d.expected)
        outcome = eval_term(e, d.fuel or DEFAULT_FUEL)
        if not isinstance(outcome.result, Value):
            return [DirectiveResult(d, d.mode, False, f"{outcome.tag}: {pretty_term(outcome.final)}")]
        ok = same_result(outcome.final, want)
        detail = "value matches" if ok else f"got {pretty_term(outcome.final)}"
        return [DirectiveResult(d, d.mode, ok, detail)]
    if isinstance(d, TraceLen):
        n = len(eval_term(e).trace)
        return [DirectiveResult(d, None, n == d.expected_steps, f"{n} steps")]
    raise TypeError(d)


def _pretty(s) -> str:
    from .parser import pretty_type

    return pretty_type(canonical(s))


@dataclass
class FileReport:
    path: Path
    results: list[DirectiveResult] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and all(r.ok for r in self.results)


def _trace_dirs(path: Path) -> list[Path]:
    return [path.parent / "traces", path.parent.parent / "traces"]


def golden_traces(path: Path) -> list[tuple[str, Path]]:
    out = []
    for d in _trace_dirs(path):
        if d.is_dir():
            for t in sorted(d.glob(f"{path.stem}.*.trace")):
                out.append((t.name[len(path.stem) + 1:-len(".trace")], t))
    return out


def run_file(path: str | Path, sig: Optional[Signature] = None) -> FileReport:
    path = Path(path)
    rep = FileReport(path)
    try:
        prog = load_program(path, sig)
    except (LoadError, LobjSyntaxError) as exc:
        rep.error = str(exc)
        return rep
    for d in prog.directives:
        rep.results.extend(run_directive(prog, d))
    for name, tpath in golden_traces(path):
        d = TraceLen(name, -1, 0)
        if name not in prog.defs:
            rep.results.append(DirectiveResult(d, None, False, f"trace file {tpath.name} names no definition"))
            continue
        got = format_trace(eval_term(prog.defs[name]).trace)
        ok = got == tpath.read_text(encoding="utf-8")
        rep.results.append(DirectiveResult(d, None, ok, f"golden trace {tpath.name} " + ("matches" if ok else "differs")))
    return rep


def corpus_files(root: str | Path) -> list[Path]:
    root = Path(root)
    if root.is_file():
        return [root]
    return sorted(p for p in root.rglob("*.lobj") if p.name != "prelude.lobj")


def run_corpus(root: str | Path, sig: Optional[Signature] = None) -> list[FileReport]:
    return [run_file(p, sig) for p in corpus_files(root)]


@dataclass
class DefStatus:
    name: str
    type: Optional[object] = None
    error: Optional[CheckError] = None
    expected_reject: bool = False

    @property
    def ok(self) -> bool:
        return (self.error is not None) if self.expected_reject else (self.error is None)


def check_types(prog: Program, mode: Mode) -> list[DefStatus]:
    """Type each local def in mode.

    A def named by a ``#check`` for this mode is checked against that type;
    one named by a ``#reject`` for this mode is expected to fail; any other
    def has its type inferred.
    """
    declared: dict[str, object] = {}
    rejected: set[str] = set()
    for d in prog.directives:
        if not isinstance(d, CheckType):
            continue
        if d.polarity == "accept" and (d.mode or "plain") == mode.value:
            declared.setdefault(d.target, d.expected)
        elif d.polarity == "reject" and d.mode in (None, mode.value):
            rejected.add(d.target)
    out = []
    for name in prog.local:
        e = prog.defs[name]
        st = DefStatus(name, expected_reject=name in rejected)
        try:
            if name in declared:
                check(EMPTY_CONTEXT, e, declared[name], mode, prog.sig)
                st.type = canonical(declared[name])
            else:
                st.type = canonical(infer(EMPTY_CONTEXT, e, mode, prog.sig))
        except CheckError as err:
            if err.pos is None:
                err.pos = e.pos
            st.error = err
        out.append(st)
    return out

