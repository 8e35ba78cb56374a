import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsat.eigen import EigenId, SetSpec, enumerate_set
from cylsat.projector import EigenCoords, Universe, UniverseOverflow, expand
from cylsat.span import (
    BracketTable,
    SpanError,
    Subspace,
    absence_certificate,
    fl_step,
    generate_chain,
    required_cap,
    seed_space,
    start_chain,
    verify_saturation,
)
from cylsat.trig import UNIT, DomainLengths, PiPoly, divergence

SMALL = Universe(2, UNIT)
SMALL_SEED = [EigenId("Y", (1, 1, 1)), EigenId("Y", (1, 1, 1), 2), EigenId("Z", (1, 0, 0)), EigenId("Z", (0, 0, 0))]

vectors = st.lists(
    st.dictionaries(st.integers(0, 11), st.integers(-4, 4).filter(bool), max_size=5), min_size=1, max_size=10
)


@given(vectors)
def test_dimension_matches_reference_rank(rows):
    s = Subspace(SMALL)
    for r in rows:
        s.add(r)
    dense = np.array([[r.get(c, 0) for c in range(12)] for r in rows], float)
    assert s.dim == np.linalg.matrix_rank(dense)
    assert s.check_echelon()
    for r in rows:
        assert s.contains(r)


@given(vectors, st.randoms())
def test_span_does_not_depend_on_insertion_order(rows, rnd):
    a, b = Subspace(SMALL), Subspace(SMALL)
    for r in rows:
        a.add(r)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    for r in shuffled:
        b.add(r)
    assert a.dim == b.dim and a.issubset(b) and b.issubset(a)


def test_add_reports_growth():
    s = Subspace(SMALL)
    assert not s.add({})
    assert s.add({0: 2, 3: 4})
    assert not s.add({0: -1, 3: -2})
    assert s.add({3: 1})
    assert s.contains({0: 1})
    assert not s.contains({1: 1})


def test_two_independent_rows_with_vanishing_pairwise_determinant():
    # rank, not a single minor, decides membership
    s = Subspace(SMALL)
    s.add({0: 1, 1: 1, 2: 0})
    s.add({0: 0, 1: 0, 2: 1})
    assert s.dim == 2
    assert s.contains({0: 2, 1: 2, 2: -3})
    assert not s.contains({0: 1, 1: -1})


def test_coordinates_with_mixed_pi_powers_are_rejected():
    e1, e2 = SMALL.ids[0], SMALL.ids[1]
    c = EigenCoords({e1: PiPoly.mono(1, 0), e2: PiPoly.mono(1, 1)}, SMALL)
    with pytest.raises(SpanError):
        Subspace(SMALL).add(c)


def test_foreign_universe_is_rejected():
    c = EigenCoords({SMALL.ids[0]: PiPoly.mono(1)}, Universe(3, UNIT))
    with pytest.raises(SpanError):
        Subspace(SMALL).add(c)


def test_add_id_beyond_cap():
    with pytest.raises(UniverseOverflow):
        Subspace(SMALL).add_id(EigenId("Y", (3, 1, 1)))
    assert not Subspace(SMALL).contains(EigenId("Y", (3, 1, 1)))


def literal_chain(seed, universe, levels):
    table = BracketTable(universe)
    spaces = [seed_space(seed, universe)]
    for _ in range(levels):
        spaces.append(fl_step(seed, spaces[-1], table))
    return spaces


def test_semi_naive_levels_equal_literal_steps():
    u = Universe(required_cap(SMALL_SEED, 2), UNIT)
    literal = literal_chain(SMALL_SEED, u, 2)
    chain = start_chain(SMALL_SEED, u)
    chain.extend()
    chain.extend()
    for j in range(3):
        view = chain.level(j)
        assert view.dim == literal[j].dim
        assert view.materialize().issubset(literal[j])
        assert all(view.contains(r) for r in literal[j].rows())


def test_levels_are_nested_and_seed_dimension():
    levels = generate_chain(SMALL_SEED, 2, required_cap(SMALL_SEED, 2), UNIT)
    dims = [v.dim for v in levels]
    assert dims[0] == len(SMALL_SEED)
    assert dims == sorted(dims)
    for lo, hi in zip(levels, levels[1:]):
        assert lo.materialize().issubset(hi.materialize())


def test_step_contains_brackets_of_every_pair():
    u = Universe(4, UNIT)
    g0 = seed_space(SMALL_SEED, u)
    g1 = fl_step(SMALL_SEED, g0)
    table = BracketTable(u)
    for a in SMALL_SEED:
        for b in SMALL_SEED:
            assert g1.contains(table.apply(a, {u.index[b]: 1}))
    assert g0.issubset(g1)


def test_basis_rows_are_solenoidal():
    u = Universe(4, DomainLengths(Fraction(2), Fraction(3), Fraction(5)))
    g1 = fl_step(SMALL_SEED, seed_space(SMALL_SEED, u))
    for c in g1.basis():
        assert divergence(expand(c)).is_zero()


def test_bracket_cache_is_symmetric():
    t = BracketTable(Universe(4, UNIT))
    a, b = SMALL_SEED[0], SMALL_SEED[2]
    assert t.pair(a, b) == t.pair(b, a)
    assert t.evaluations == 1


def test_chain_overflow_names_the_needed_cap():
    chain = start_chain(SMALL_SEED, Universe(1, UNIT))
    with pytest.raises(UniverseOverflow) as info:
        chain.extend()
    assert info.value.required == required_cap(SMALL_SEED, 1)


def test_rectangle_seed_reaches_next_shell_in_one_step():
    seed = enumerate_set(SetSpec.parse("rect-q3"))
    u = Universe(6, UNIT, ("Y",))
    g1 = fl_step(seed, seed_space(seed, u))
    assert g1.contains(EigenId("Y", (4, 1, 1)))
    assert g1.contains(EigenId("Y", (4, 4, 4), 2))


def test_rectangle_inclusion_small_q():
    seed = enumerate_set(SetSpec.parse("rect-q3"))
    rep = verify_saturation(seed, Universe(6, UNIT, ("Y",)), [4], scope="rectangle")
    assert rep.ok
    assert rep.per_q[0].found_at == 1


def test_axial_constant_is_certified_unreachable():
    seed = enumerate_set(SetSpec.parse("thm33-minus-z000"))
    target = EigenId("Z", (0, 0, 0))
    cert = absence_certificate(target, seed, seed, Universe(8, UNIT))
    assert cert is not None and cert["pairs_checked"] > 0


def test_no_certificate_for_a_reachable_id():
    assert absence_certificate(EigenId("Y", (2, 2, 2)), SMALL_SEED, SMALL_SEED, Universe(4, UNIT)) is None
    assert absence_certificate(SMALL_SEED[0], SMALL_SEED, SMALL_SEED, Universe(4, UNIT)) is None


def test_failed_verification_names_missing_ids():
    seed = [EigenId("Y", (1, 1, 1)), EigenId("Z", (1, 1, 1))]
    rep = verify_saturation(seed, Universe(5, UNIT), [4])
    assert not rep.ok
    assert rep.per_q[0].missing
    js = rep.to_json()
    assert js["schema"] == "cylsat.saturation/1" and js["ok"] is False


@pytest.mark.parametrize("seed_count", [3, 6])
def test_generator_order_does_not_change_the_step(seed_count):
    rng = random.Random(seed_count)
    pool = enumerate_set(SetSpec.parse("cq-c1"))
    seed = rng.sample(pool, seed_count)
    u = Universe(4, UNIT)
    g0 = seed_space(seed, u)
    fwd = fl_step(seed, g0)
    back = g0.copy()
    table = BracketTable(u)
    for a in reversed(seed):
        for row in reversed(g0.rows()):
            back.add(table.apply(a, row))
    assert fwd.dim == back.dim and fwd.issubset(back)
