from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsat.eigen import EigenId, eigenfunction, shape_field
from cylsat.projector import (
    EigenCoords,
    ParityError,
    Universe,
    UniverseOverflow,
    expand,
    leray,
    project,
)
from cylsat.trig import DomainLengths, PiPoly, TrigScalar, TrigVectorField, divergence, gradient
from oracles import inner_quad, np_field, quad_grid

SKEW = DomainLengths(Fraction(2), Fraction(3), Fraction(5))
UNI = Universe(3, SKEW)

ks = st.tuples(*[st.integers(0, 3)] * 3)
zs = st.tuples(*[st.integers(-4, 4)] * 3).filter(any)


def raw_field(blocks, L=SKEW):
    u = TrigVectorField.zero(L)
    for fam, k, z in blocks:
        u = u + shape_field(fam, k, z, L)
    return u


fields = st.lists(st.tuples(st.sampled_from("YZ"), ks, zs), min_size=1, max_size=4).map(raw_field)


@given(st.lists(st.tuples(st.sampled_from(UNI.ids), st.fractions(-3, 3, max_denominator=5)), max_size=5))
def test_expand_then_project_is_identity(entries):
    c = EigenCoords({}, UNI)
    for e, v in entries:
        c = c + EigenCoords({e: PiPoly.mono(v, 0)}, UNI)
    assert project(expand(c), UNI) == c


@given(fields)
def test_projection_is_idempotent_and_solenoidal(u):
    pu = leray(u, UNI)
    assert leray(pu, UNI) == pu
    assert divergence(pu).is_zero()


@given(ks, st.integers(1, 5))
def test_neumann_gradients_project_to_zero(k, c):
    p = TrigScalar.monomial("CCC", k, c, 0, SKEW)
    assert len(project(gradient(p), UNI)) == 0


def test_residual_is_orthogonal_to_the_universe():
    u = raw_field([("Y", (1, 2, 1), (1, 0, 0)), ("Z", (2, 1, 1), (0, 1, 3)), ("Z", (1, 0, 0), (0, 0, 1))])
    r = u - leray(u, UNI)
    X, W = quad_grid(SKEW.as_tuple(), 16)
    rv = r.eval(X)
    for eid in UNI.ids:
        if max(eid.k) <= 2:
            ev = eigenfunction(eid, SKEW).field.eval(X)
            assert abs(inner_quad(rv, ev, W)) < 1e-9, str(eid)


def test_coordinates_match_quadrature_ratio():
    u = raw_field([("Y", (1, 1, 2), (2, -1, 1)), ("Z", (2, 1, 1), (1, 1, 1))])
    c = project(u, UNI)
    X, W = quad_grid(SKEW.as_tuple(), 16)
    uv = u.eval(X)
    for eid, coeff in c.items():
        e = eigenfunction(eid, SKEW)
        ev = np_field(eid.family, eid.k, e.w, SKEW.as_tuple())(X)
        ref = inner_quad(uv, ev, W) / inner_quad(ev, ev, W)
        assert float(coeff) == pytest.approx(ref, abs=1e-10)
    assert len(c) > 0


def test_overflow_names_the_mode():
    u = eigenfunction(EigenId("Y", (4, 1, 1)), SKEW).field
    with pytest.raises(UniverseOverflow) as info:
        project(u, UNI)
    assert info.value.required == 4
    assert "cap >= 4" in str(info.value)
    assert len(project(u, UNI, truncate=True)) == 0


def test_wrong_parity_is_rejected():
    u = TrigVectorField((TrigScalar.monomial("CCC", (1, 1, 1), 1, 0, SKEW), TrigScalar.zero(SKEW), TrigScalar.zero(SKEW)))
    with pytest.raises(ParityError):
        project(u, UNI)


def test_family_restricted_universe():
    y_only = Universe(3, SKEW, ("Y",))
    u = eigenfunction(EigenId("Z", (1, 1, 1)), SKEW).field
    with pytest.raises(UniverseOverflow):
        project(u, y_only)
    assert {e.family for e in y_only.ids} == {"Y"}


def test_coords_json_roundtrip():
    c = EigenCoords({EigenId("Y", (1, 1, 1)): PiPoly.mono(Fraction(-2, 3), 1)}, UNI)
    assert EigenCoords.from_json(c.to_json(), UNI) == c


def test_mismatched_lengths():
    u = eigenfunction(EigenId("Y", (1, 1, 1)), DomainLengths(1, 1, 1)).field
    with pytest.raises(ValueError):
        project(u, UNI)


def test_constant_axial_field_is_kept():
    one = TrigScalar.monomial("CCC", (0, 0, 0), 1, 0, SKEW)
    u = TrigVectorField((TrigScalar.zero(SKEW), TrigScalar.zero(SKEW), one))
    c = project(u, UNI)
    assert c[EigenId("Z", (0, 0, 0))] == PiPoly.mono(1, 0)
    assert np.allclose(expand(c).eval(np.array([[0.1, 0.2, 0.3]])), [[0], [0], [1]])
