from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsat.eigen import cq_z
from cylsat.replay import (
    DEFAULT_LENGTHS,
    WALK_STAGES,
    ScriptError,
    evaluate,
    induction_walk,
    load_scripts,
    replay,
    scan_determinants,
    select_steps,
    stage_indices,
    stage_targets,
)
from cylsat.trig import UNIT, DomainLengths, PiPoly

SCRIPTS = load_scripts()
SKEW = DomainLengths(Fraction(2), Fraction(3), Fraction(5))
DEGENERATE = DomainLengths(Fraction(1), Fraction(1), Fraction(17, 2))
# displayed vectors that no bracket of the stated operands produces
UNREACHABLE = {("corner", "alpha"), ("r1.interior", "delta"), ("r1.unit-row", "gamma")}


def step(key):
    (s,) = select_steps(SCRIPTS, key)
    return s


def item(report, kind, name):
    return next(it for it in report.items if it.kind == kind and it.name == name)


class TestEvaluator:
    def test_arithmetic(self):
        env = {"q": Fraction(5), "L1": Fraction(1, 2)}
        assert evaluate("(q+1)**2*(q-1) - L1/2", env) == Fraction(144) - Fraction(1, 4)

    @pytest.mark.parametrize("expr", ["__import__('os')", "q.real", "q**-1", "[q]", "q if q else 1", "1.5"])
    def test_rejects_anything_else(self, expr):
        with pytest.raises(ScriptError):
            evaluate(expr, {"q": Fraction(2)})

    def test_unknown_name(self):
        with pytest.raises(ScriptError):
            evaluate("r + 1", {"q": Fraction(1)})

    @given(st.integers(-20, 20), st.integers(-20, 20))
    def test_matches_python_on_polynomials(self, a, b):
        assert evaluate("a*a - 3*b + a*b**2", {"a": Fraction(a), "b": Fraction(b)}) == a * a - 3 * b + a * b ** 2


@pytest.mark.parametrize("q", range(4, 13))
def test_every_script_instantiates(q):
    for s in SCRIPTS:
        grid = s.param_grid(q)
        assert grid, s.id


def test_select_by_stage_and_unknown():
    assert {s.stage for s in select_steps(SCRIPTS, "lines")} == {"lines"}
    with pytest.raises(ScriptError):
        select_steps(SCRIPTS, "nope")


@pytest.mark.parametrize("q", [4, 7, 12])
@pytest.mark.parametrize("L", [UNIT, SKEW])
def test_unit_corner_determinant_closed_form(q, L):
    rep = replay(step("r3.unit-corner"), q, L)
    assert rep.passed
    L1, L2, L3 = L.as_tuple()
    want = Fraction(1, 4) * (q + 1) ** 2 * (q - 1) * (L1 * L2 * q * q + L1 * L2 - L2 * L3 - L1 * L3)
    got = item(rep, "det", "det(n|alpha|gamma)").detail["computed"]
    assert PiPoly.from_json(got) == PiPoly.mono(want, 2)


@pytest.mark.parametrize("q", [4, 9])
def test_edge_step_vector(q):
    rep = replay(step("r1.edge"), q, SKEW)
    assert rep.passed
    for it in rep.items:
        if it.kind == "z":
            l_val = it.params["l"]
            exp = [PiPoly.from_json(c) for c in it.detail["expected"]]
            assert exp[2] == PiPoly.mono(Fraction(l_val, 2), 1)
            assert exp[0].is_zero() and exp[1].is_zero()


@pytest.mark.parametrize("q", [4, 8])
def test_corner_determinant(q):
    rep = replay(step("corner"), q, SKEW)
    d = item(rep, "det", "det(n|alpha|gamma)")
    assert d.detail["displayed_algebra"] in ("exact", "scaled")
    assert item(rep, "verdict", "pair").ok


@pytest.mark.parametrize("q", [4, 6])
def test_base_line_coefficient(q):
    rep = replay(step("lines.base"), q, SKEW)
    assert rep.passed
    z = [PiPoly.from_json(c) for c in item(rep, "z", "alpha").detail["expected"]]
    assert z[2] == PiPoly.mono(-Fraction(q * q - 1, 8) * SKEW[2], 1)


def test_degenerate_lengths_kill_one_pair_but_not_the_step():
    rows = scan_determinants(step("r3.unit-corner"), [4], [DEGENERATE])
    by_pair = {r[6]: r for r in rows}
    assert by_pair["alpha|gamma"][7] == "0"
    assert by_pair["alpha|gamma"][8] != "0"
    assert all(r[10] for r in rows)
    assert replay(step("r3.unit-corner"), 4, DEGENERATE).passed


@pytest.mark.parametrize("L", [DomainLengths.parse(t) for t in DEFAULT_LENGTHS])
def test_failures_are_exactly_the_unreachable_displays(L):
    seen = set()
    for s in SCRIPTS:
        rep = replay(s, 5, L)
        for it in rep.failures():
            assert it.kind == "z", (s.id, it.kind, it.name)
            seen.add((s.id, it.name))
        assert all(it.ok for it in rep.items if it.kind in ("verdict", "det", "beta")), s.id
    assert seen == UNREACHABLE


def test_q_below_start_is_rejected():
    with pytest.raises(ScriptError):
        replay(step("corner"), 3, UNIT)


@pytest.mark.parametrize("q", [4, 5, 7])
def test_stages_partition_the_new_z_ids(q):
    new = set(cq_z(q + 1)) - set(cq_z(q))
    parts = [set(stage_targets(s, q)) for s in WALK_STAGES]
    assert set().union(*parts) == new
    assert sum(len(p) for p in parts) == len(new)
    assert len(stage_indices("axis", q)) == 2


def test_scripted_walk_in_stated_order_passes():
    for q in (4, 5, 6):
        assert induction_walk(q, SKEW, mode="scripted").passed


def test_scripted_walk_axis_first_fails():
    rep = induction_walk(4, UNIT, ("axis", "r3", "r12", "lines", "corner"), mode="scripted")
    assert not rep.passed
    assert rep.stages[0].missing == ["Z1(5,0,0)"]


def test_scripted_walk_corner_first_fails():
    rep = induction_walk(4, UNIT, ("corner", "r3", "r12", "axis", "lines"), mode="scripted")
    assert rep.stages[0].missing == ["Z1(5,5,5)", "Z2(5,5,5)"]


def test_walk_rejects_bad_input():
    with pytest.raises(ScriptError):
        induction_walk(3)
    with pytest.raises(ScriptError):
        induction_walk(4, mode="other")
    with pytest.raises(ScriptError):
        stage_indices("nowhere", 4)


@pytest.mark.slow
def test_full_bracket_walk_is_order_insensitive():
    rep = induction_walk(4, UNIT, ("axis", "r3", "r12", "lines", "corner"), mode="brackets")
    assert rep.passed
    assert [s.targets for s in rep.stages] == [2, 40, 80, 27, 2]
