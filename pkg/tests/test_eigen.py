from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylsat.eigen import (
    EigenError,
    EigenId,
    SetSpec,
    build_Y,
    build_Z,
    count_report,
    enumerate_set,
    eigenfunction,
    l_product,
    perp_basis,
    validate_eigenfunction,
)
from cylsat.trig import DomainLengths
from oracles import grad_fd, np_field

ks = st.tuples(*[st.integers(0, 6)] * 3).filter(lambda k: sum(v == 0 for v in k) <= 1)
Ls = st.tuples(*[st.integers(1, 9)] * 3, *[st.integers(1, 4)] * 3).map(
    lambda t: DomainLengths(Fraction(t[0], t[3]), Fraction(t[1], t[4]), Fraction(t[2], t[5]))
)


@pytest.mark.parametrize("name,count,stated", [("rect-q3", 81, None), ("thm33", 361, 355), ("cor310", 266, 260)])
def test_set_counts(name, count, stated):
    rep = count_report(SetSpec.parse(name))
    assert rep["count"] == count
    assert rep.get("stated_count") == stated


def test_enumeration_is_sorted_and_unique():
    ids = enumerate_set(SetSpec.parse("thm33"))
    assert ids == sorted(set(ids))
    assert EigenId("Z", (0, 0, 0)) in ids
    assert EigenId("Z", (4, 0, 0)) in ids
    assert EigenId("Z", (5, 0, 0)) not in ids
    assert len(enumerate_set(SetSpec.parse("thm33-minus-z000"))) == 360


def test_rectangle_set_is_y_only():
    assert {e.family for e in enumerate_set(SetSpec.parse("rect-q3"))} == {"Y"}


@pytest.mark.parametrize("L", [DomainLengths(1, 1, 1), DomainLengths(2, 3, 5), DomainLengths(1, 1, Fraction(17, 2))])
def test_every_base_element_validates(L):
    for eid in enumerate_set(SetSpec.parse("thm33")):
        rep = validate_eigenfunction(eigenfunction(eid, L))
        assert rep.ok, (str(eid), rep.failures)


def test_validation_flags_a_broken_field(unit):
    e = eigenfunction(EigenId("Y", (1, 2, 1)), unit)
    bad = type(e)(e.id, e.w, e.field + eigenfunction(EigenId("Y", (1, 1, 1)), unit).field, e.lam)
    rep = validate_eigenfunction(bad)
    assert "eigen_relation" in rep.failures


def test_eigenvalue_of_unit_cube_mode(unit):
    e = eigenfunction(EigenId("Y", (1, 1, 1)), unit)
    assert e.lam == 3
    assert float(e.eigenvalue) == pytest.approx(3 * np.pi ** 2)


@given(ks, Ls)
def test_perp_basis_orthogonality(k, L):
    basis = perp_basis(k, L)
    assert len(basis) == (2 if 0 not in k else 1)
    for w in basis:
        assert l_product(w, k, L) == 0
        assert all(w[i] == 0 for i in range(3) if k[i] == 0)
    if len(basis) == 2:
        assert sum(a * b for a, b in zip(*basis)) == 0


@given(ks, Ls, st.sampled_from("YZ"))
def test_numeric_divergence_and_walls(k, L, family):
    if family == "Z" and k[2] == 0:
        return
    w = perp_basis(k, L)[0]
    f = np_field(family, k, w, L.as_tuple())
    rng = np.random.default_rng(1)
    Lf = np.array([float(v) for v in L.as_tuple()])
    x = rng.random((5, 3)) * Lf * np.array([1, 1, 2])
    g = grad_fd(f, x.T.reshape(3, -1).T)
    div = g[0, 0] + g[1, 1] + g[2, 2]
    scale = 1 + np.abs(g).max()
    assert np.allclose(div, 0, atol=1e-6 * scale)
    for axis in (0, 1):
        for end in (0.0, Lf[axis]):
            xs = x.copy()
            xs[:, axis] = end
            assert np.allclose(f(xs)[axis], 0, atol=1e-9)


@given(ks, Ls, st.sampled_from("YZ"))
def test_exact_field_matches_reference_shape(k, L, family):
    if family == "Z" and k[2] == 0:
        return
    w = perp_basis(k, L)[-1]
    e = (build_Y if family == "Y" else build_Z)(k, w, L)
    x = np.random.default_rng(2).random((4, 3))
    assert np.allclose(e.field.eval(x), np_field(family, k, w, L.as_tuple())(x), atol=1e-12)


def test_special_z_fields(unit):
    e0 = eigenfunction(EigenId("Z", (0, 0, 0)), unit)
    assert np.allclose(e0.field.eval(np.array([[0.3, 0.2, 0.9]])), [[0], [0], [1]])
    assert e0.lam == 0
    e = eigenfunction(EigenId("Z", (2, 0, 0)), unit)
    assert validate_eigenfunction(e).ok


@pytest.mark.parametrize("family,k", [("Y", (0, 0, 1)), ("Y", (0, 0, 0)), ("Z", (0, 0, 1)), ("Z", (1, 0, 0, ))])
def test_multiplicity_rules(family, k):
    if family == "Z" and k[2] == 0:
        assert EigenId(family, k, 1)
        with pytest.raises(EigenError):
            EigenId(family, k, 2)
    else:
        with pytest.raises(EigenError):
            EigenId(family, k, 1)


def test_constructor_rejects_bad_vectors(unit):
    with pytest.raises(EigenError):
        build_Y((1, 1, 1), (1, 1, 1), unit)
    with pytest.raises(EigenError):
        build_Y((1, 1, 0), (1, -1, 1), unit)
    with pytest.raises(EigenError):
        build_Z((1, 0, 0), (1, 0, 0), unit)
    with pytest.raises(EigenError):
        build_Y((1, 1, 1), (0, 0, 0), unit)


def test_id_json_roundtrip():
    e = EigenId("Z", (3, 1, 2), 2)
    assert EigenId.from_json(e.to_json()) == e
    assert str(e) == "Z2(3,1,2)"


def test_unknown_selector():
    with pytest.raises(ValueError):
        SetSpec.parse("bogus")
