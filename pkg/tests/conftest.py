from pathlib import Path

import pytest

from lobj.corpus import load_prelude, load_program, program_from_text
from lobj.parser import parse_term, parse_type

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
EXAMPLES = CORPUS / "examples"


def term(src: str):
    """Parse src with the prelude constants bound."""
    prog = program_from_text("")
    return prog.expand(parse_term(src, prog.sig.const_types))


def ty(src: str):
    return parse_type(src, load_prelude().const_types)


def example(name: str, def_name: str):
    return load_program(EXAMPLES / f"{name}.lobj").defs[def_name]


@pytest.fixture(scope="session")
def sig():
    return load_prelude()


# acceptance lines, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
