"""The symmetrized convection bracket and its closed form for Y-Z pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .eigen import Eigenfunction, ids_at, shape_field
from .linalg import det3, rank
from .projector import EigenCoords, Universe, _project_block, project, shape_blocks
from .trig import DomainLengths, PiPoly, TrigVectorField, advect

SignTriple = tuple[int, int, int]


def beta(w: Sequence, m: Sequence[int], signs: SignTriple, L: DomainLengths) -> PiPoly:
    """(pi/8) (s1 w1 m1/L1 + s2 w2 m2/L2 + s3 w3 m3/L3)."""
    total = sum((Fraction(signs[i]) * Fraction(w[i]) * m[i] / L[i] for i in range(3)), Fraction(0))
    return PiPoly.mono(total / 8, 1)


def _beta_value(w, m, signs, L) -> Fraction:
    return sum((Fraction(signs[i]) * Fraction(w[i]) * m[i] / L[i] for i in range(3)), Fraction(0)) / 8


@dataclass
class BracketResult:
    projected: EigenCoords
    # (shape, index, z) with z the raw per-component coefficients (PiPoly each)
    unprojected_terms: list[tuple[str, tuple, tuple[PiPoly, PiPoly, PiPoly]]] = field(default_factory=list)

    def term(self, k) -> tuple[PiPoly, PiPoly, PiPoly] | None:
        k = tuple(k)
        for _, idx, z in self.unprojected_terms:
            if idx == k:
                return z
        return None

    def to_json(self) -> dict:
        return {
            "projected": self.projected.to_json(),
            "unprojected_terms": [
                {"shape": s, "k": list(k), "z": [c.to_json() for c in z]}
                for s, k, z in self.unprojected_terms
            ],
        }


def _terms_from_field(u: TrigVectorField) -> list:
    out = []
    for (fam, k), block in sorted(shape_blocks(u).items()):
        z = tuple(PiPoly(block[i]) for i in range(3))
        if any(not c.is_zero() for c in z):
            out.append((fam, k, z))
    return out


def symmetric_advection(a: TrigVectorField, b: TrigVectorField) -> TrigVectorField:
    return advect(a, b) + advect(b, a)


def bracket_generic(a: Eigenfunction | TrigVectorField, b: Eigenfunction | TrigVectorField,
                    universe: Universe) -> BracketResult:
    """Pi((a.grad) b + (b.grad) a) through the generic trig path."""
    fa = a.field if isinstance(a, Eigenfunction) else a
    fb = b.field if isinstance(b, Eigenfunction) else b
    raw = symmetric_advection(fa, fb)
    return BracketResult(project(raw, universe), _terms_from_field(raw))


# Rows of the printed Y-Z interaction table, one list per component:
# (sign on w^m beta(w^k,m), beta sign pattern, sign on w^k beta(w^m,k), index signs for k +- m)
_P, _M = 1, -1
_TABLE = (
    (  # first component, factors S C S
        (_P, (1, 1, 1), _P, (_P, _P, _P)),
        (_M, (1, 1, 1), _P, (_M, _M, _M)),
        (_M, (1, 1, -1), _M, (_P, _P, _M)),
        (_P, (1, 1, -1), _M, (_M, _M, _P)),
        (_P, (1, -1, 1), _P, (_P, _M, _P)),
        (_M, (1, -1, 1), _P, (_M, _P, _M)),
        (_M, (1, -1, -1), _M, (_P, _M, _M)),
        (_P, (1, -1, -1), _M, (_M, _P, _P)),
    ),
    (  # second component, factors C S S
        (_P, (1, 1, 1), _P, (_P, _P, _P)),
        (_M, (1, 1, 1), _P, (_M, _M, _M)),
        (_M, (1, 1, -1), _M, (_P, _P, _M)),
        (_P, (1, 1, -1), _M, (_M, _M, _P)),
        (_M, (1, -1, 1), _P, (_P, _M, _P)),
        (_P, (1, -1, 1), _P, (_M, _P, _M)),
        (_P, (1, -1, -1), _M, (_P, _M, _M)),
        (_M, (1, -1, -1), _M, (_M, _P, _P)),
    ),
    (  # third component, factors C C C
        (_M, (1, 1, 1), _M, (_P, _P, _P)),
        (_P, (1, 1, 1), _M, (_M, _M, _M)),
        (_M, (1, 1, -1), _P, (_P, _P, _M)),
        (_P, (1, 1, -1), _P, (_M, _M, _P)),
        (_M, (1, -1, 1), _M, (_P, _M, _P)),
        (_P, (1, -1, 1), _M, (_M, _P, _M)),
        (_M, (1, -1, -1), _P, (_P, _M, _M)),
        (_P, (1, -1, -1), _P, (_M, _P, _P)),
    ),
)
# axes carrying a sine factor in each component of the Z shape
_SINE_AXES = ({0, 2}, {1, 2}, set())


def yz_mix_closed_form(k, wk, m, wm, L: DomainLengths) -> list[tuple[str, tuple, tuple[PiPoly, PiPoly, PiPoly]]]:
    """(Y^k.grad) Z^m + (Z^m.grad) Y^k from the printed table, grouped by result index.

    ``(k, wk)`` is the Y datum, ``(m, wm)`` the Z datum.  Negative index
    differences are folded with sin(-x) = -sin(x); sine factors at index
    zero drop out.  Every term has the Z shape and a single power of pi.
    """
    k = tuple(int(v) for v in k)
    m = tuple(int(v) for v in m)
    acc: dict[tuple, list[Fraction]] = {}
    for comp in range(3):
        for a_sign, bsigns, b_sign, isigns in _TABLE[comp]:
            coeff = (a_sign * Fraction(wm[comp]) * _beta_value(wk, m, bsigns, L)
                     + b_sign * Fraction(wk[comp]) * _beta_value(wm, k, bsigns, L))
            if not coeff:
                continue
            idx = []
            for ax in range(3):
                n = k[ax] + isigns[ax] * m[ax]
                if n < 0:
                    n = -n
                    if ax in _SINE_AXES[comp]:
                        coeff = -coeff
                if n == 0 and ax in _SINE_AXES[comp]:
                    coeff = 0
                idx.append(n)
            if not coeff:
                continue
            slot = acc.setdefault(tuple(idx), [Fraction(0)] * 3)
            slot[comp] += coeff
    out = []
    for idx in sorted(acc):
        z = acc[idx]
        if any(z):
            out.append(("Z", idx, tuple(PiPoly.mono(v, 1) for v in z)))
    return out


def terms_field(terms, L: DomainLengths) -> TrigVectorField:
    """Realise a list of (shape, index, z) terms as a trig field."""
    out = TrigVectorField.zero(L)
    for fam, k, z in terms:
        for i in range(3):
            for p, v in z[i].items():
                coeff = [Fraction(0)] * 3
                coeff[i] = v
                out = out + shape_field(fam, k, coeff, L, p)
    return out


def yz_mix_projected(k, wk, m, wm, universe: Universe) -> BracketResult:
    terms = yz_mix_closed_form(k, wk, m, wm, universe.L)
    return BracketResult(project(terms_field(terms, universe.L), universe), terms)


# -- independence criteria ----------------------------------------------------

def gradient_direction(family: str, k, L: DomainLengths) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficient vector (up to scale) of the gradient field inside the (family, k) block."""
    s3 = -1 if family == "Z" else 1
    return (Fraction(k[0]) / L[0], Fraction(k[1]) / L[1], s3 * Fraction(k[2]) / L[2])


def index_determinant(n, a, b) -> Fraction | PiPoly:
    """det(n | a | b) with the vectors as columns, exact."""
    return det3([[n[i], a[i], b[i]] for i in range(3)])


def projected_rank(zs: Sequence[Sequence], k, L: DomainLengths, family: str = "Z") -> int:
    """Brute-force rank of {Pi Z^k_z : z in zs} through the projector."""
    k = tuple(int(v) for v in k)
    block_ids = ids_at(family, k)
    rows = []
    for z in zs:
        blocks = shape_blocks(shape_field(family, k, z, L))
        coords = _project_block(family, k, blocks[(family, k)], L) if (family, k) in blocks else {}
        rows.append([coords.get(e, PiPoly()) for e in block_ids])
    return rank([[c.as_monomial()[0] if not c.is_zero() else 0 for c in row] for row in rows]) if rows else 0


def check_lin_indep_pair(alpha, gamma, k, L: DomainLengths, family: str = "Z") -> bool:
    """True iff Pi Z^k_alpha, Pi Z^k_gamma are independent (k with positive entries).

    Decided by det(g | alpha | gamma) != 0 where g spans the gradient
    directions of the block; see :func:`literal_pair_criterion` for the
    version with the bare index vector.  When some k_i = 0 the shape
    degenerates and the projected rank decides.
    """
    if 0 in tuple(k):
        return projected_rank([alpha, gamma], k, L, family) == 2
    g = gradient_direction(family, k, L)
    return det3([[g[i], Fraction(alpha[i]), Fraction(gamma[i])] for i in range(3)]) != 0


def check_lin_indep_triple(alpha, gamma, delta, k, L: DomainLengths, family: str = "Z") -> bool:
    if 0 in tuple(k):
        return projected_rank([alpha, gamma, delta], k, L, family) >= 2
    return (check_lin_indep_pair(alpha, gamma, k, L, family)
            or check_lin_indep_pair(alpha, delta, k, L, family)
            or check_lin_indep_pair(gamma, delta, k, L, family))


def literal_pair_criterion(alpha, gamma, k) -> bool:
    """det(k | alpha | gamma) != 0, with the index vector itself as the first column."""
    return det3([[Fraction(k[i]), Fraction(alpha[i]), Fraction(gamma[i])] for i in range(3)]) != 0


def literal_triple_criterion(alpha, gamma, delta, k) -> bool:
    return (literal_pair_criterion(alpha, gamma, k) or literal_pair_criterion(alpha, delta, k)
            or literal_pair_criterion(gamma, delta, k))
