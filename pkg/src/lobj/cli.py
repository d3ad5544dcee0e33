"""The ``lobj`` command: check, eval, repl, corpus and prop."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, TextIO

from .checker import EMPTY_CONTEXT, CheckError, Mode, infer
from .corpus import LoadError, Program, check_types, load_program, load_prelude, program_from_text, run_corpus
from .harness import FAULTS, PROPERTIES, GenConfig, run_all, run_property
from .parser import LobjSyntaxError, parse_term, pretty_term, pretty_type
from .reduction import DEFAULT_FUEL, ReductionOutcome, Wrong, eval_term, format_trace
from .typexpr import canonical

EXIT_OK, EXIT_TYPE, EXIT_SYNTAX, EXIT_IO, EXIT_FUEL, EXIT_STUCK = 0, 1, 2, 3, 4, 5


def _emit(args, obj: dict, text: str, out: Optional[TextIO] = None) -> None:
    print(json.dumps(obj) if args.json else text, file=out or sys.stdout)


def _syntax(args, exc: LobjSyntaxError) -> int:
    _emit(args, {"rule": "Syntax", "kind": "SyntaxError", "line": exc.line, "col": exc.col,
                 "message": exc.message}, f"syntax error: {exc}", sys.stderr)
    return EXIT_SYNTAX


def _io(args, exc: Exception) -> int:
    _emit(args, {"rule": "IO", "kind": "IOError", "line": 0, "col": 0, "message": str(exc)},
          f"error: {exc}", sys.stderr)
    return EXIT_IO


def _load(args, path: str) -> Program:
    p = Path(path)
    if not p.is_file():
        raise LoadError(f"{path}: no such file")
    return load_program(p)


# check ----------------------------------------------------------------------

def cmd_check(args) -> int:
    try:
        prog = _load(args, args.file)
    except LobjSyntaxError as exc:
        return _syntax(args, exc)
    except (LoadError, OSError) as exc:
        return _io(args, exc)
    for st in check_types(prog, Mode(args.mode)):
        if st.expected_reject and st.error is not None:
            _emit(args, {"def": st.name, "rejected": True, **st.error.to_json()},
                  f"{st.name} : rejected as expected by {st.error.rule}")
        elif st.expected_reject:
            _emit(args, {"def": st.name, "rule": "Reject", "kind": "UnexpectedlyTyped", "line": 0, "col": 0,
                         "message": f"typed as {pretty_type(st.type)}"},
                  f"{st.name} : {pretty_type(st.type)}, but a #reject expects no type")
            return EXIT_TYPE
        elif st.error is not None:
            err = st.error
            line, col = err.pos or (0, 0)
            _emit(args, {"def": st.name, **err.to_json()},
                  f"{st.name}: type error [{err.rule}] at {line}:{col}: {err.message}")
            return EXIT_TYPE
        else:
            _emit(args, {"def": st.name, "type": pretty_type(st.type)}, f"{st.name} : {pretty_type(st.type)}")
    return EXIT_OK


# eval -----------------------------------------------------------------------

_EXIT_BY_TAG = {"value": EXIT_OK, "wrong": EXIT_TYPE, "out-of-fuel": EXIT_FUEL, "stuck": EXIT_STUCK}


def _outcome_text(out: ReductionOutcome) -> str:
    r = out.result
    if isinstance(r, Wrong):
        return f"wrong: {r.kind}\n  at {pretty_term(r.at)}"
    if out.tag == "stuck":
        return f"stuck: {pretty_term(out.final)}\n  at {pretty_term(r.at)}"
    return f"{out.tag}: {pretty_term(out.final)}"


def _outcome_json(out: ReductionOutcome) -> dict:
    obj = {"outcome": out.tag, "term": pretty_term(out.final), "steps": len(out.trace)}
    if isinstance(out.result, Wrong):
        obj["kind"] = out.result.kind
    if out.tag in ("wrong", "stuck"):
        obj["at"] = pretty_term(out.result.at)
    return obj


def cmd_eval(args) -> int:
    try:
        if args.expr is not None:
            prog = program_from_text("", Path("."))
            term = prog.expand(parse_term(args.expr, prog.sig.const_types))
        else:
            if args.file is None:
                print("error: give a FILE or -e TERM", file=sys.stderr)
                return EXIT_IO
            prog = _load(args, args.file)
            if not prog.local:
                print(f"error: {args.file} defines nothing to evaluate", file=sys.stderr)
                return EXIT_IO
            term = prog.defs[args.name or prog.local[-1]]
    except LobjSyntaxError as exc:
        return _syntax(args, exc)
    except KeyError as exc:
        print(f"error: no definition named {exc.args[0]}", file=sys.stderr)
        return EXIT_IO
    except (LoadError, OSError) as exc:
        return _io(args, exc)
    out = eval_term(term, args.fuel)
    if args.json:
        obj = _outcome_json(out)
        if args.trace:
            obj["trace"] = format_trace(out.trace).splitlines()
        print(json.dumps(obj))
    else:
        if args.trace:
            sys.stdout.write(format_trace(out.trace))
        print(_outcome_text(out))
    return _EXIT_BY_TAG[out.tag]


# corpus ---------------------------------------------------------------------

def cmd_corpus(args) -> int:
    root = Path(args.path)
    if not root.exists():
        return _io(args, FileNotFoundError(f"{root}: no such file or directory"))
    reports = run_corpus(root)
    failed = 0
    for rep in reports:
        if rep.error:
            failed += 1
            _emit(args, {"file": str(rep.path), "ok": False, "error": rep.error}, f"FAIL {rep.path}: {rep.error}")
            continue
        bad = [r for r in rep.results if not r.ok]
        failed += bool(bad)
        if args.json:
            print(json.dumps({"file": str(rep.path), "ok": not bad, "directives": len(rep.results),
                              "failures": [r.describe() for r in bad]}))
            continue
        print(f"{'ok' if not bad else 'FAIL'} {rep.path} ({len(rep.results)} directives)")
        for r in rep.results if args.verbose else bad:
            print(f"  {r.describe()}")
    if not args.json:
        print(f"{len(reports) - failed}/{len(reports)} files passed")
    return EXIT_OK if failed == 0 else EXIT_TYPE


# prop -----------------------------------------------------------------------

def cmd_prop(args) -> int:
    cfg = GenConfig(seed=args.seed, size=args.size, count=args.count, mode=Mode(args.mode))
    if args.name == "all":
        reports = run_all(cfg)
    else:
        reports = [run_property(args.name, cfg, fault=args.fault)]
    for rep in reports:
        if args.json:
            print(json.dumps(rep.to_json()))
            continue
        print(rep.summary())
        for f in rep.failures[:5]:
            print(f"  case {f.case}: {f.message}")
            if f.witness is not None:
                print(f"    shrunk witness: {pretty_term(f.witness)}")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_TYPE


# repl -----------------------------------------------------------------------

REPL_HELP = """\
:t TERM        show the type of TERM
:e TERM        evaluate TERM
:load FILE     add the defs of FILE
:mode plain|sub
def x = TERM   add a definition
:q             quit"""


class Repl:
    def __init__(self, mode: Mode = Mode.PLAIN, fuel: int = DEFAULT_FUEL, out: Optional[TextIO] = None):
        self.mode = mode
        self.fuel = fuel
        self.out = out or sys.stdout
        self.prog = program_from_text("", Path("."), load_prelude())

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def term(self, text: str):
        return self.prog.expand(parse_term(text, self.prog.sig.const_types))

    def handle(self, line: str) -> bool:
        """Run one input line; False when the session should end."""
        line = line.strip()
        if not line or line.startswith("--"):
            return True
        try:
            return self._handle(line)
        except LobjSyntaxError as exc:
            self.say(f"syntax error: {exc}")
        except CheckError as err:
            self.say(f"type error [{err.rule}]: {err.message}")
        except (LoadError, OSError) as exc:
            self.say(f"error: {exc}")
        return True

    def _handle(self, line: str) -> bool:
        cmd, _, rest = line.partition(" ")
        rest = rest.strip()
        if cmd in (":q", ":quit"):
            return False
        if cmd in (":h", ":help"):
            self.say(REPL_HELP)
        elif cmd == ":t":
            self.say(pretty_type(canonical(infer(EMPTY_CONTEXT, self.term(rest), self.mode, self.prog.sig))))
        elif cmd == ":e":
            self.say(_outcome_text(eval_term(self.term(rest), self.fuel)))
        elif cmd == ":load":
            loaded = load_program(Path(rest.strip('"')), self.prog.sig)
            for name in loaded.order:
                self.prog.add_def(name, loaded.defs[name])
            self.prog.sig = loaded.sig
            self.say(f"loaded {len(loaded.order)} definitions")
        elif cmd == ":mode":
            self.mode = Mode(rest)
            self.say(f"mode {self.mode.value}")
        elif cmd == "def":
            name, eq, body = rest.partition("=")
            if not eq:
                raise LobjSyntaxError("expected '=' in def", 1, len(cmd) + 2)
            self.prog.add_def(name.strip(), parse_term(body.strip().rstrip(";"), self.prog.sig.const_types))
            self.say(f"defined {name.strip()}")
        else:
            self.say(f"unknown command {cmd}; :h for help")
        return True


def cmd_repl(args) -> int:
    repl = Repl(Mode(args.mode), args.fuel)
    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            print("lobj> ", end="", flush=True)
        line = sys.stdin.readline()
        if not line or not repl.handle(line):
            return EXIT_OK


# argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[m.value for m in Mode], default="plain",
                        help="type system: plain, or sub with obj-types and subsumption")
    common.add_argument("--json", action="store_true", help="one JSON object per output line")

    p = argparse.ArgumentParser(prog="lobj", description="Objects with self-inflicted extension: checker and evaluator.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="type every def of a file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("eval", parents=[common], help="evaluate the last def of a file")
    e.add_argument("file", nargs="?")
    e.add_argument("-e", "--expr", help="evaluate TERM instead of a file")
    e.add_argument("--def", dest="name", help="evaluate this def instead of the last one")
    e.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    e.add_argument("--trace", action="store_true", help="print every step")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("repl", parents=[common], help="interactive session")
    r.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    r.set_defaults(func=cmd_repl)

    cp = sub.add_parser("corpus", help="run golden .lobj files")
    csub = cp.add_subparsers(dest="action", required=True)
    run = csub.add_parser("run", parents=[common], help="run every directive under PATH")
    run.add_argument("path")
    run.add_argument("-v", "--verbose", action="store_true", help="list passing directives too")
    run.set_defaults(func=cmd_corpus)

    pr = sub.add_parser("prop", parents=[common], help="run a property on generated cases")
    pr.add_argument("name", choices=list(PROPERTIES) + ["all"])
    pr.add_argument("--seed", type=int, default=42)
    pr.add_argument("--count", type=int, default=1000)
    pr.add_argument("--size", type=int, default=12)
    pr.add_argument("--fault", choices=sorted(FAULTS), help="run against a deliberately broken evaluator")
    pr.set_defaults(func=cmd_prop)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
