import json

import pytest

from lobj.checker import EMPTY_CONTEXT, Mode, check, is_match
from lobj.harness import (
    FAULTS,
    PROPERTIES,
    Case,
    GenConfig,
    MatchCase,
    _run_violation,
    _sr_violation,
    gen_filtered,
    gen_match_cases,
    gen_typed,
    join,
    prop_confluence,
    prop_matching_laws,
    prop_no_wrong,
    prop_subject_reduction,
    prop_substitution,
    run_property,
    shape_profile,
    shrink,
)
from lobj.parser import pretty_term
from lobj.reduction import step
from lobj.terms import App, Const, Var, size, subst_term
from lobj.typexpr import INT, TVar

from conftest import example, term, ty

EXTEND_T = "pro t.<add_n: t + n, n: int> + add_n"
SMALL = 80


def test_config_defaults_and_validation():
    cfg = GenConfig()
    assert (cfg.seed, cfg.size, cfg.width, cfg.depth, cfg.mode, cfg.count) == (42, 12, 4, 5, Mode.PLAIN, 1000)
    with pytest.raises(ValueError):
        GenConfig(size=0)
    assert GenConfig(mode="sub").mode is Mode.SUB


@pytest.mark.parametrize("mode", list(Mode))
def test_generated_cases_check(mode, sig):
    cases = gen_typed(GenConfig(count=SMALL, mode=mode), sig)
    assert len(cases) == SMALL
    for c in cases:
        assert size(c.term) <= 12
        check(EMPTY_CONTEXT, c.term, c.type, mode, sig)
    assert {c.origin for c in cases} >= {"built", "seed"}


def test_tiny_size_gives_small_objects(sig):
    cases = gen_typed(GenConfig(count=5, size=3), sig)
    assert cases and all(size(c.term) <= 3 for c in cases)
    assert any(pretty_term(c.term) == "<>" for c in cases)


def test_generation_is_reproducible(sig):
    a = gen_typed(GenConfig(count=40, seed=7), sig)
    b = gen_typed(GenConfig(count=40, seed=7), sig)
    assert [pretty_term(c.term) for c in a] == [pretty_term(c.term) for c in b]
    c = gen_typed(GenConfig(count=40, seed=8), sig)
    assert [pretty_term(x.term) for x in a] != [pretty_term(x.term) for x in c]


def test_reports_are_reproducible(sig):
    cfg = GenConfig(count=30)
    r1 = json.dumps(run_property("subject_reduction", cfg, fault="next-drops-method", sig=sig).to_json())
    r2 = json.dumps(run_property("subject_reduction", cfg, fault="next-drops-method", sig=sig).to_json())
    assert r1 == r2


def test_mutated_seed_still_types(sig):
    mutant = term(r"< <> <- add_n : t + n = \self. <self <- n : int = plus 1 1> >")
    check(EMPTY_CONTEXT, mutant, ty(EXTEND_T), Mode.PLAIN, sig)


def test_construction_beats_filtering_on_sends_of_extensions(sig):
    cfg = GenConfig(count=100)
    built = shape_profile(gen_typed(cfg, sig))
    filtered = gen_filtered(cfg, sig, samples=2000)
    assert all(size(c.term) <= 8 for c in filtered)
    assert built["Send"] > 0 and built["send-of-extension"] > 0
    per_case = built["Send"] / 100
    assert per_case > shape_profile(filtered)["Send"] / max(1, len(filtered))


# properties on fixed examples ---------------------------------------------

def test_subject_reduction_examples(sig):
    sent = example("extend", "extend_sent")
    assert _sr_violation(sent, ty("pro t.<add_n: t + n, n: int> + add_n, n"), Mode.PLAIN, sig, step) is None
    assert _sr_violation(example("flyextend", "fly_get"), INT, Mode.PLAIN, sig, step) is None
    assert _sr_violation(term("<>"), ty("pro t.<>"), Mode.PLAIN, sig, step) is None


def test_no_wrong_detector_works():
    msg, _ = _run_violation(term("<> # m"), step)
    assert "empty-sel" in msg
    assert _run_violation(term("1"), step) is None
    assert _run_violation(example("flyextend", "fly_get"), step) is None
    assert "stuck" in _run_violation(term("1 2"), step)[0]


def test_join():
    e = term(r"(\x. x) ((\y. y) z)")
    from lobj.reduction import step_any

    a, b = [r for _, r in step_any(e)]
    assert join(a, b, depth=1) is True
    assert join(term("1"), term("2")) is False
    omega = term(r"(\x. x x) (\x. x x)")
    assert join(omega, term("1"), depth=3) in (False, None)


def test_confluence_on_example_2(sig):
    cases = [Case(0, example("extend", "extend_sent"), ty(EXTEND_T), "seed")]
    rep = prop_confluence(GenConfig(count=2), cases, sig)
    assert rep.ok and rep.unknown == 0


def test_matching_examples(sig):
    p, cp = ty("obj t.<n: int, col: colors> + n"), ty("obj t.<n: int, col: colors> + n, col")
    mc = MatchCase(0, EMPTY_CONTEXT, (ty(EXTEND_T), cp, p))
    rep = prop_matching_laws(GenConfig(mode=Mode.SUB), [mc], sig)
    assert rep.ok and rep.checks > 3
    assert is_match(EMPTY_CONTEXT, cp, p, Mode.SUB) and is_match(EMPTY_CONTEXT, p, p, Mode.SUB)
    # two targets that share n must agree on its type
    g = EMPTY_CONTEXT.add_match("t1", ty("pro u.<n: int, m: int> + n"))
    pool = (TVar("t1", frozenset({"n"})), ty("pro v.<n: int> + n"), ty("pro v.<n: int, m: int> + n"))
    assert prop_matching_laws(GenConfig(), [MatchCase(0, g, pool)], sig).ok


def test_matching_generator_is_well_formed(sig):
    cases = gen_match_cases(GenConfig(count=50, mode=Mode.SUB), sig)
    assert len(cases) == 50 and all(len(mc.pool) >= 2 for mc in cases)


def test_substitution_examples(sig):
    x_plus = App(App(Const("plus"), Var("x")), Const("1"))
    check(EMPTY_CONTEXT.add_var("x", INT), x_plus, INT, Mode.PLAIN, sig)
    check(EMPTY_CONTEXT, subst_term(x_plus, "x", Const("2")), INT, Mode.PLAIN, sig)
    # the premise of the derivation for extend, with s taken to be extend itself
    body = term(r"<s <- n = 1>")
    extend = example("extend", "extend")
    check(EMPTY_CONTEXT, subst_term(body, "s", extend), ty(f"{EXTEND_T}, n"), Mode.PLAIN, sig)


# small runs of every property ------------------------------------------------

@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("name", PROPERTIES)
def test_property_small_run(name, mode, sig):
    rep = run_property(name, GenConfig(count=SMALL, mode=mode), sig=sig)
    assert rep.ok, [f.message for f in rep.failures[:3]]
    assert rep.cases > 0 and rep.checks > 0
    assert name in rep.summary()


@pytest.mark.parametrize("fault", sorted(FAULTS))
def test_faults_are_caught_with_small_witnesses(fault, sig):
    cfg = GenConfig(count=150)
    stepper = FAULTS[fault]
    cases = gen_typed(cfg, sig)
    reports = [prop_subject_reduction(cfg, cases, stepper, sig), prop_no_wrong(cfg, cases, stepper, sig)]
    failures = [f for r in reports for f in r.failures]
    assert failures
    best = min(failures, key=lambda f: size(f.witness))
    assert size(best.witness) <= 15
    # the witness fails again on its own
    w = best.witness
    from lobj.harness import _typed

    wt = _typed(w, cfg.mode, sig)
    assert wt is not None
    assert _sr_violation(w, wt, cfg.mode, sig, stepper) or _run_violation(w, stepper)


def test_shrink_is_greedy_and_bounded():
    e = term(r"plus (plus 1 2) (plus 3 4)")
    small = shrink(e, lambda c: "3" in pretty_term(c) or "0" in pretty_term(c))
    assert size(small) < size(e)
    assert shrink(e, lambda c: False) == e


def test_substitution_property_run(sig):
    cfg = GenConfig(count=60, mode=Mode.SUB)
    rep = prop_substitution(cfg, sig=sig)
    assert rep.ok and rep.checks > 0


def test_reports_do_not_depend_on_string_hashing():
    import os
    import subprocess
    import sys

    code = ("import json; from lobj.harness import GenConfig, run_all; "
            "print(json.dumps([r.to_json() for r in run_all(GenConfig(seed=7, count=40, mode='sub'))], "
            "sort_keys=True, default=str))")
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True,
                           env={**os.environ, "PYTHONHASHSEED": h}).stdout for h in ("1", "2")}
    assert len(outs) == 1
