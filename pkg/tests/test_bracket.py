from fractions import Fraction
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsat.bracket import (
    bracket_generic,
    check_lin_indep_pair,
    check_lin_indep_triple,
    gradient_direction,
    literal_pair_criterion,
    projected_rank,
    yz_mix_closed_form,
    yz_mix_projected,
)
from cylsat.eigen import EigenId, eigenfunction, ids_at, perp_basis
from cylsat.projector import Universe
from cylsat.trig import DomainLengths
from oracles import advect_fd, inner_quad, np_field, quad_grid

SKEW = DomainLengths(Fraction(2), Fraction(3), Fraction(5))
ks = st.tuples(*[st.integers(0, 3)] * 3).filter(lambda k: sum(v == 0 for v in k) <= 1)


def ids(family, k):
    return ids_at(family, k)


@given(ks, ks, st.integers(1, 2), st.integers(1, 2), st.sampled_from([DomainLengths(1, 1, 1), SKEW]))
def test_closed_form_matches_generic(k, m, jk, jm, L):
    yk = [e for e in ids("Y", k) if e.j == jk]
    zm = [e for e in ids("Z", m) if e.j == jm]
    if not yk or not zm:
        return
    a, b = eigenfunction(yk[0], L), eigenfunction(zm[0], L)
    uni = Universe(6, L)
    assert yz_mix_projected(k, a.w, m, b.w, uni).projected == bracket_generic(a, b, uni).projected


@given(ks, ks, st.sampled_from("YZ"), st.sampled_from("YZ"))
def test_bracket_is_symmetric(k, m, fa, fb):
    if not ids(fa, k) or not ids(fb, m):
        return
    a, b = eigenfunction(ids(fa, k)[0], SKEW), eigenfunction(ids(fb, m)[0], SKEW)
    uni = Universe(6, SKEW)
    assert bracket_generic(a, b, uni).projected == bracket_generic(b, a, uni).projected


@pytest.mark.parametrize("a_id,b_id", [
    (EigenId("Y", (1, 1, 1)), EigenId("Z", (1, 2, 1))),
    (EigenId("Y", (2, 1, 0)), EigenId("Z", (0, 0, 0))),
    (EigenId("Y", (1, 1, 2), 2), EigenId("Z", (1, 0, 0))),
    (EigenId("Z", (1, 1, 1), 2), EigenId("Z", (2, 1, 1))),
])
def test_projected_bracket_against_quadrature(a_id, b_id):
    L = SKEW
    ea, eb = eigenfunction(a_id, L), eigenfunction(b_id, L)
    fa = np_field(a_id.family, a_id.k, ea.w, L.as_tuple())
    fb = np_field(b_id.family, b_id.k, eb.w, L.as_tuple())
    X, W = quad_grid(L.as_tuple(), 32)
    raw = advect_fd(fa, fb, X) + advect_fd(fb, fa, X)
    coords = bracket_generic(ea, eb, Universe(6, L)).projected
    uni = Universe(4, L)
    for eid in uni.ids:
        e = eigenfunction(eid, L)
        ev = np_field(eid.family, eid.k, e.w, L.as_tuple())(X)
        ref = inner_quad(raw, ev, W) / inner_quad(ev, ev, W)
        assert float(coords[eid]) == pytest.approx(ref, abs=1e-6), str(eid)


def test_closed_form_has_z_shape_and_one_power_of_pi():
    L = SKEW
    terms = yz_mix_closed_form((1, 2, 1), perp_basis((1, 2, 1), L)[0], (2, 1, 3), perp_basis((2, 1, 3), L)[1], L)
    assert terms
    for fam, _, z in terms:
        assert fam == "Z"
        assert all(c.is_zero() or c.as_monomial()[1] == 1 for c in z)


def test_independence_agrees_with_projected_rank():
    rng = random.Random(7)
    for _ in range(200):
        k = tuple(rng.randint(0, 4) for _ in range(3))
        if sum(v == 0 for v in k) > 1:
            continue
        L = DomainLengths(*(Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(3)))
        a = tuple(rng.randint(-3, 3) for _ in range(3))
        g = tuple(rng.randint(-3, 3) for _ in range(3))
        d = tuple(rng.randint(-3, 3) for _ in range(3))
        assert check_lin_indep_pair(a, g, k, L) == (projected_rank([a, g], k, L) == 2)
        assert check_lin_indep_triple(a, g, d, k, L) == (projected_rank([a, g, d], k, L) >= 2)


def test_gradient_vector_alone_projects_to_zero():
    L = SKEW
    k = (2, 1, 3)
    assert projected_rank([gradient_direction("Z", k, L)], k, L) == 0
    assert projected_rank([gradient_direction("Y", k, L)], k, L, "Y") == 0


def test_literal_index_column_differs_from_gradient_column():
    # for non-unit lengths det(k|a|g) and the projected rank disagree
    L = SKEW
    k = (1, 1, 1)
    a, g = (1, 0, 0), (0, 1, 0)
    w = (Fraction(1, 2), Fraction(1, 3), Fraction(-1, 5))
    assert literal_pair_criterion(a, g, k)
    found = False
    for alpha in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (3, -2, 0)]:
        for gamma in [(0, 0, 1), (1, 1, 1), (2, 3, 0)]:
            truth = projected_rank([alpha, gamma], k, L) == 2
            assert check_lin_indep_pair(alpha, gamma, k, L) == truth
            if literal_pair_criterion(alpha, gamma, k) != truth:
                found = True
    assert found
    assert gradient_direction("Z", k, L) == w


def test_zero_entry_uses_rank():
    L = DomainLengths(1, 1, 1)
    k = (2, 0, 1)
    assert not check_lin_indep_pair((1, 0, 0), (0, 0, 1), k, L)
    assert not check_lin_indep_pair((1, 0, 0), (0, 1, 0), k, L)


def test_bracket_json():
    L = SKEW
    r = yz_mix_projected((1, 1, 1), perp_basis((1, 1, 1), L)[0], (1, 0, 0), (0, 0, 1), Universe(4, L))
    js = r.to_json()
    assert set(js) == {"projected", "unprojected_terms"}
    assert np.isfinite([float(c) for _, c in r.projected.items()]).all()
