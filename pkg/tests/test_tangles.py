import numpy as np
import pytest

from graphloops import EVEN, ODD
from graphloops.ncpairings import noncrossing_pairings
from graphloops.tangles import (Layer, Slot, TangleProgram, TangleSyntaxError,
                                closure_program, diagram_program,
                                equivalence_check, eval_tangle, parse_tangle,
                                random_element, rotation_program,
                                trace0_via_tangles, wedge_program)
from graphloops.traces import trace_k

CAP_PROGRAM = """
tangle close_one(A: 1-) -> 0- {
  load A;
  cap 1;
}
"""


def test_parse_cap_to_level_zero():
    prog = parse_tangle(CAP_PROGRAM)
    assert prog.out_level == 0
    assert [l.kind for l in prog.layers] == ["load", "cap"]


def test_parse_range_error():
    bad = """
    tangle oops(A: 2+) -> 2+ {
      load A;
      cap 5;
    }
    """
    with pytest.raises(TangleSyntaxError, match="out of range"):
        parse_tangle(bad)


def test_parse_arity_mismatch():
    bad = """
    tangle oops(A: 2+) -> 1+ {
      load A;
    }
    """
    with pytest.raises(TangleSyntaxError, match="declared output"):
        parse_tangle(bad)


def test_parse_unknown_input():
    with pytest.raises(TangleSyntaxError, match="unknown input"):
        parse_tangle("tangle t(A: 1+) -> 1+ { load B; }")


def test_roundtrip_source():
    text = """tangle w(a: 2+, b: 1+) -> 2+ {
  load a;
  tensor b;
  cap 4;
  cup 2-;
  cap 2;
  rotate;
}"""
    prog = parse_tangle(text)
    again = parse_tangle(prog.source())
    assert again == prog


def _circle(level, shading):
    layers = (Layer("load", "a"), Layer("cup", 1, shading), Layer("cap", 1))
    return TangleProgram("circle", (Slot("a", level, shading),), level,
                         shading, layers)


def _zigzag(level, shading, flavor):
    if flavor == "right":
        layers = (Layer("load", "a"), Layer("cup", 2, shading), Layer("cap", 1))
    else:
        layers = (Layer("load", "a"), Layer("cup", 1, shading), Layer("cap", 2))
    return TangleProgram("zigzag", (Slot("a", level, shading),), level,
                         shading, layers)


def test_circle_gives_delta(test_algebras):
    rng = np.random.default_rng(20)
    for alg in test_algebras.values():
        x = random_element(alg, 2, EVEN, rng)
        got = eval_tangle(alg, _circle(2, EVEN), {"a": x})
        assert (got - x.scale(alg.pf.delta)).norm_inf() <= 1e-10


def test_zigzags_are_identities(test_algebras):
    rng = np.random.default_rng(21)
    for alg in test_algebras.values():
        for lvl in (1, 2, 3):
            x = random_element(alg, lvl, EVEN, rng)
            for flavor in ("right", "left"):
                got = eval_tangle(alg, _zigzag(lvl, EVEN, flavor), {"a": x})
                assert (got - x).norm_inf() <= 1e-10


def test_wedge_programs_match_direct(test_algebras):
    rng = np.random.default_rng(22)
    for alg in test_algebras.values():
        for t, la, lb in ((0, 1, 1), (0, 1, 2), (1, 1, 1), (1, 2, 1), (2, 2, 2)):
            shading = EVEN if t % 2 == 0 else ODD
            a = random_element(alg, la, shading, rng)
            b = random_element(alg, lb, shading, rng)
            prog = wedge_program(t, la, lb, shading)
            got = eval_tangle(alg, prog, {"a": a, "b": b})
            assert (got - alg.wedge(t, a, b)).norm_inf() <= 1e-9


def test_usual_mult_program_matches_direct(test_algebras):
    rng = np.random.default_rng(23)
    for alg in test_algebras.values():
        for k in (1, 2):
            a = random_element(alg, k, EVEN, rng)
            b = random_element(alg, k, EVEN, rng)
            got = eval_tangle(alg, wedge_program(k, k, k, EVEN),
                              {"a": a, "b": b})
            assert (got - alg.usual_mult(a, b)).norm_inf() <= 1e-9


def test_diagram_programs_match_loop_formula(test_algebras):
    for alg in test_algebras.values():
        for two_k in (2, 4, 6):
            for pairing in noncrossing_pairings(two_k):
                got = eval_tangle(alg, diagram_program(pairing, EVEN), {})
                want = alg.tl_element(pairing)
                assert (got - want).norm_inf() <= 1e-10


def test_trace_closures_match_trace0(test_algebras):
    rng = np.random.default_rng(24)
    for alg in test_algebras.values():
        for lvl in (1, 2, 3):
            x = random_element(alg, lvl, EVEN, rng)
            got = trace0_via_tangles(alg, x)
            want = trace_k(alg, 0, x)
            assert (got - want).norm_inf() <= 1e-9


def test_trace0_rotation_invariance(test_algebras):
    rng = np.random.default_rng(25)
    for alg in test_algebras.values():
        x = random_element(alg, 2, EVEN, rng)
        a = trace_k(alg, 0, alg.rotate(x))
        b = trace_k(alg, 0, x)
        assert (a - b).norm_inf() <= 1e-9


def test_rotation_program_matches_primitive(test_algebras):
    rng = np.random.default_rng(26)
    for alg in test_algebras.values():
        x = random_element(alg, 2, EVEN, rng)
        got = eval_tangle(alg, rotation_program(2, EVEN), {"a": x})
        assert (got - alg.rotate(x)).norm_inf() <= 1e-10


def test_rotation_cyclic_commutativity_via_programs(test_algebras):
    rng = np.random.default_rng(27)
    for alg in test_algebras.values():
        a = random_element(alg, 1, EVEN, rng)
        b = random_element(alg, 1, EVEN, rng)
        prog = TangleProgram(
            "rot_prod",
            (Slot("a", 1, EVEN), Slot("b", 1, EVEN)), 2, EVEN,
            (Layer("load", "a"), Layer("tensor", "b"), Layer("rotate")))
        got = eval_tangle(alg, prog, {"a": a, "b": b})
        assert (got - alg.wedge(0, b, a)).norm_inf() <= 1e-9


def test_equivalence_bracketings(a3):
    # (a b) c versus a (b c) as tangle programs
    p1 = TangleProgram(
        "left", (Slot("a", 1, EVEN), Slot("b", 1, EVEN), Slot("c", 1, EVEN)),
        3, EVEN,
        (Layer("load", "a"), Layer("tensor", "b"), Layer("tensor", "c")))
    p2 = TangleProgram(
        "right", (Slot("a", 1, EVEN), Slot("b", 1, EVEN), Slot("c", 1, EVEN)),
        3, EVEN,
        (Layer("load", "a"), Layer("tensor", "b"), Layer("tensor", "c")))
    ok, worst = equivalence_check(a3, p1, p2)
    assert ok and worst <= 1e-12


def test_equivalence_commuting_layers(a3):
    # cap-left then cup-right == cup-right then cap-left (disjoint supports)
    p1 = TangleProgram("clcr", (Slot("a", 2, EVEN),), 2, EVEN,
                       (Layer("load", "a"), Layer("cap", 1),
                        Layer("cup", 3, EVEN)))
    p2 = TangleProgram("crcl", (Slot("a", 2, EVEN),), 2, EVEN,
                       (Layer("load", "a"), Layer("cup", 5, EVEN),
                        Layer("cap", 1)))
    ok, worst = equivalence_check(a3, p1, p2)
    assert ok, worst


def test_equivalence_detects_difference(a3):
    p1 = rotation_program(1, EVEN, times=0)
    p2 = TangleProgram("circle_extra", (Slot("a", 1, EVEN),), 1, EVEN,
                       (Layer("load", "a"), Layer("cup", 1, EVEN),
                        Layer("cap", 1)))
    ok, worst = equivalence_check(a3, p1, p2)
    assert not ok and worst > 0.1


def test_naturality_program_concatenation(test_algebras):
    # gluing programs = feeding one evaluation into the next
    rng = np.random.default_rng(28)
    for alg in test_algebras.values():
        x = random_element(alg, 2, EVEN, rng)
        first = TangleProgram("first", (Slot("a", 2, EVEN),), 3, EVEN,
                              (Layer("load", "a"), Layer("cup", 2, EVEN)))
        second = TangleProgram("second", (Slot("b", 3, EVEN),), 2, EVEN,
                               (Layer("load", "b"), Layer("cap", 2)))
        combined = TangleProgram(
            "combined", (Slot("a", 2, EVEN),), 2, EVEN,
            first.layers + second.layers[1:])
        via_two = eval_tangle(alg, second,
                              {"b": eval_tangle(alg, first, {"a": x})})
        direct = eval_tangle(alg, combined, {"a": x})
        assert (via_two - direct).norm_inf() <= 1e-10


def test_closure_program_cap_order():
    prog = closure_program(((1, 4), (2, 3)), 2, EVEN)
    caps = [l.arg for l in prog.layers if l.kind == "cap"]
    assert caps == [2, 1]


def test_eval_validates_input_declaration(a3):
    prog = wedge_program(0, 1, 1, EVEN)
    rng = np.random.default_rng(29)
    a = random_element(a3, 1, EVEN, rng)
    with pytest.raises(ValueError):
        eval_tangle(a3, prog, {"a": a})              # missing b
    b = random_element(a3, 2, EVEN, rng)
    with pytest.raises(ValueError):
        eval_tangle(a3, prog, {"a": a, "b": b})      # wrong level
