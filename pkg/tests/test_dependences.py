"""Tests for postdominators, control dependences and data dependences."""

import random
import time
from collections.abc import Callable, Sequence

from hypothesis import given, settings
from hypothesis import strategies as st

from privslice.graph.cfg import ENTRY, EXIT, build_cfg
from privslice.graph.dependences import control_deps, data_deps, method_artifacts, postdominators
from privslice.ir.model import MethodDecl
from privslice.ir.parser import parse_text
from tests.conftest import CORPUS, load_fixture
from tests.oracles import control_dependences, def_use_pairs, immediate_postdominators
from tests.test_cfg import DIAMOND, method_of


def test_diamond_postdominators():
    """Test that both arms and the branch are postdominated by the join."""
    pdom = postdominators(build_cfg(method_of(DIAMOND)))

    assert pdom[1] == 7
    assert pdom[2] == 3
    assert pdom[3] == 7
    assert pdom[5] == 7
    assert pdom[7] == EXIT
    assert pdom[ENTRY] == 0


def test_straight_line_postdominators():
    """Test that each statement is postdominated by the next one."""
    pdom = postdominators(build_cfg(method_of(" r0 = 1\n r1 = r0\n return r1")))
    assert pdom == {ENTRY: 0, 0: 1, 1: 2, 2: EXIT}


def test_single_node():
    """Test that a lone statement is postdominated by EXIT."""
    pdom = postdominators(build_cfg(method_of(" return")))
    assert pdom[0] == EXIT


def test_diamond_control_dependences():
    """Test that only the arms depend on the branch."""
    cfg = build_cfg(method_of(DIAMOND))
    assert control_deps(cfg, postdominators(cfg)) == {(1, 2), (1, 3), (1, 5)}


def test_straight_line_has_no_control_dependences():
    """Test that a branch-free method has no control dependences."""
    cfg = build_cfg(method_of(" r0 = 1\n r1 = r0\n return r1"))
    assert control_deps(cfg, postdominators(cfg)) == set()


def test_loop_body_depends_on_loop_test():
    """Test that the loop body and the test itself depend on the test."""
    record = load_fixture("loop_accumulate").methods[0].decl
    artifacts = method_artifacts(record)

    assert artifacts.ctrl == {(4, 4), (4, 5), (4, 6), (4, 7), (4, 8)}


def test_data_dependence_on_both_operands():
    """Test that one definition used twice yields one edge."""
    method = method_of(" r0 = call a.C.f()\n r1 = r0 concat r0\n return r1")
    assert data_deps(build_cfg(method), method) == {(0, 1, "r0"), (1, 2, "r1")}


def test_redefinition_kills():
    """Test that a later definition hides an earlier one."""
    method = method_of(" r0 = 1\n r0 = 2\n r1 = r0\n return r1")
    assert (0, 2, "r0") not in data_deps(build_cfg(method), method)
    assert (1, 2, "r0") in data_deps(build_cfg(method), method)


def test_definition_in_loop_reaches_use_after_loop():
    """Test that a definition inside a loop reaches uses past the loop."""
    record = load_fixture("loop_accumulate").methods[0].decl
    deps = method_artifacts(record).data

    assert {(5, 10, "r1"), (1, 10, "r1"), (5, 5, "r1"), (7, 4, "r2")} <= deps


def test_defs_reaching():
    """Test the per-statement reaching definitions query."""
    artifacts = method_artifacts(method_of(DIAMOND))
    assert artifacts.defs_reaching(7, "r1") == [2, 5]
    assert artifacts.defs_reaching(7, "r9") == []


def test_artifacts_cache_is_bounded():
    """Test that per-method artifacts are memoized in a bounded cache."""
    method = method_of(" r0 = 1\n return r0")
    assert method_artifacts(method) is method_artifacts(method)
    assert method_artifacts.cache_info().maxsize == 256


def test_corpus_matches_oracles():
    """Test every corpus method against the brute-force dependences."""
    for name in CORPUS:
        for ref in load_fixture(name).methods:
            _check_against_oracles(ref.decl)


def test_call_with_arguments_adds_receiver_definition():
    """Test that a virtual call passing arguments defines its receiver without killing it."""
    method = method_of(" r0 = call a.C.f()\n r1 = 1\n vcall r0.put(r1)\n r2 = r0\n return r2")
    deps = data_deps(build_cfg(method), method)

    assert {(0, 2, "r0"), (0, 3, "r0"), (2, 3, "r0"), (1, 2, "r1")} <= deps
    assert method_artifacts(method).defs_reaching(3, "r0") == [0, 2]


def test_call_without_arguments_defines_nothing():
    """Test that a virtual call with no arguments leaves its receiver alone."""
    method = method_of(" r0 = call a.C.f()\n vcall r0.close()\n r1 = r0\n return r1")
    deps = data_deps(build_cfg(method), method)

    assert (0, 2, "r0") in deps
    assert (1, 2, "r0") not in deps


VARS = ("r0", "r1", "r2", "r3")
KINDS = ("const", "copy", "binop", "call", "vcall", "vcall_assign", "return", "if", "goto", "label")
SEEDED_METHODS = 50


def _method_text(
    size: int, choose: Callable[[Sequence[str]], str], number: Callable[[int, int], int]
) -> str:
    """µIR of a method with at most two branches and one jump."""
    kinds = [choose(KINDS) for _ in range(size)]
    label_count = kinds.count("label")
    ifs = gotos = 0
    lines = []
    labels_seen = 0
    for kind in kinds:
        var = choose(VARS)
        other = choose(VARS)
        if kind in ("if", "goto") and label_count == 0:
            kind = "copy"
        if kind == "if" and ifs == 2 or kind == "goto" and gotos == 1:
            kind = "const"
        match kind:
            case "const":
                lines.append(f"{var} = {number(0, 9)}")
            case "copy":
                lines.append(f"{var} = {other}")
            case "binop":
                lines.append(f"{var} = {other} + {choose(VARS)}")
            case "call":
                lines.append(f"{var} = call x.Y.f({other})")
            case "vcall":
                lines.append(f"vcall {var}.put({other})")
            case "vcall_assign":
                lines.append(f"{var} = vcall {other}.put({choose(VARS)})")
            case "return":
                lines.append(f"return {var}")
            case "if":
                ifs += 1
                lines.append(f"if {var} < {other} goto L{number(0, label_count - 1)}")
            case "goto":
                gotos += 1
                lines.append(f"goto L{number(0, label_count - 1)}")
            case "label":
                lines.append(f"L{labels_seen}:")
                labels_seen += 1
    body = "\n".join(lines)
    return f'app "r"\nclass a.B {{\n method m(0) {{\n{body}\n }}\n}}\n'


@st.composite
def random_methods(draw: st.DrawFn) -> MethodDecl:
    """Methods of up to 12 statements."""
    size = draw(st.integers(min_value=1, max_value=12))
    source = _method_text(
        size,
        lambda options: draw(st.sampled_from(options)),
        lambda low, high: draw(st.integers(low, high)),
    )
    return parse_text(source).classes[0].methods[0]


def _check_against_oracles(method: MethodDecl) -> None:
    cfg = build_cfg(method)
    pdom = postdominators(cfg)
    assert pdom == immediate_postdominators(cfg)
    assert control_deps(cfg, pdom) == control_dependences(cfg)
    assert data_deps(cfg, method) == def_use_pairs(cfg, method)


@settings(max_examples=60, deadline=None)
@given(random_methods())
def test_random_methods_match_oracles(method):
    """Test random small methods against the brute-force dependences."""
    _check_against_oracles(method)


def test_seeded_methods_match_oracles_quickly():
    """Test 50 seeded random methods against the oracles within ten seconds."""
    rng = random.Random(20240611)
    started = time.perf_counter()
    for _ in range(SEEDED_METHODS):
        source = _method_text(rng.randint(1, 12), rng.choice, rng.randint)
        _check_against_oracles(parse_text(source).classes[0].methods[0])
    assert time.perf_counter() - started < 10
