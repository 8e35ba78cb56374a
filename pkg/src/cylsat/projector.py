"""Orthogonal projection onto the divergence-free, boundary-tangent fields.

The projection is computed by expanding in the (orthogonal) eigenfunction
system: ``coords[e] = <u, e> / <e, e>``.  Only monomials with the same
factor pattern and index as a monomial of ``e`` contribute, so the inner
products are evaluated block by block instead of over the whole universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .eigen import (
    FAMILIES,
    PATTERNS,
    SIGNS,
    EigenId,
    eigenfunction,
    ids_at,
)
from .trig import DomainLengths, PiPoly, TrigScalar, TrigVectorField, integral_weight


class UniverseOverflow(ValueError):
    """A field has content on a mode beyond the universe cap."""

    def __init__(self, mode, cap, required: int | None = None):
        self.mode = mode
        self.cap = cap
        family, k = mode
        self.required = max(max(k), required or 0)
        super().__init__(
            f"mode {family}{k} exceeds the universe cap {cap}; rerun with cap >= {self.required}"
        )


class ParityError(ValueError):
    """A component has x1/x2 sine-cosine parity that no field in H can carry."""


_PATTERN_SHAPE = {}
for _fam in FAMILIES:
    for _i, _pat in enumerate(PATTERNS[_fam]):
        _PATTERN_SHAPE[(_i, _pat)] = _fam


@dataclass(frozen=True)
class Universe:
    cap: int
    L: DomainLengths
    families: tuple[str, ...] = FAMILIES

    @cached_property
    def ids(self) -> tuple[EigenId, ...]:
        out = []
        for k in itertools.product(range(self.cap + 1), repeat=3):
            for fam in self.families:
                out.extend(ids_at(fam, k))
        return tuple(sorted(out))

    @cached_property
    def index(self) -> dict[EigenId, int]:
        return {e: i for i, e in enumerate(self.ids)}

    def __len__(self):
        return len(self.ids)

    def __contains__(self, eid: EigenId) -> bool:
        return eid in self.index

    def to_json(self) -> dict:
        return {"cap": self.cap, "lengths": [str(v) for v in self.L.as_tuple()], "size": len(self)}


@dataclass
class EigenCoords:
    """Sparse eigen-coordinates; zero entries are never stored."""

    coeffs: dict[EigenId, PiPoly] = field(default_factory=dict)
    universe: Universe | None = None

    def __post_init__(self):
        self.coeffs = {e: c for e, c in self.coeffs.items() if not c.is_zero()}
        if self.universe is not None:
            for e in self.coeffs:
                if e not in self.universe:
                    raise UniverseOverflow((e.family, e.k), self.universe.cap)

    def __getitem__(self, eid: EigenId) -> PiPoly:
        return self.coeffs.get(eid, PiPoly())

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EigenCoords):
            return NotImplemented
        return self.coeffs == other.coeffs

    def items(self):
        return sorted(self.coeffs.items())

    def __add__(self, other: "EigenCoords") -> "EigenCoords":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, PiPoly()) + c
        return EigenCoords(out, self.universe or other.universe)

    def scale(self, c) -> "EigenCoords":
        return EigenCoords({e: v * c for e, v in self.coeffs.items()}, self.universe)

    def to_json(self) -> list[dict]:
        out = []
        for e, c in self.items():
            for p, v in c.items():
                out.append({"id": e.to_json(), "coeff": str(v), "pi_pow": p})
        return out

    @classmethod
    def from_json(cls, data, universe: Universe | None = None) -> "EigenCoords":
        acc: dict[EigenId, PiPoly] = {}
        for item in data:
            e = EigenId.from_json(item["id"])
            acc[e] = acc.get(e, PiPoly()) + PiPoly.mono(Fraction(item["coeff"]), int(item["pi_pow"]))
        return cls(acc, universe)


def shape_blocks(u: TrigVectorField) -> dict[tuple[str, tuple], list[dict[int, Fraction]]]:
    """Group the monomials of ``u`` into (shape, k) blocks.

    Each block is three per-component maps ``pi_pow -> coefficient``.
    """
    blocks: dict = {}
    for i, comp in enumerate(u):
        for (factors, k, p), c in comp.terms.items():
            fam = _PATTERN_SHAPE.get((i, factors))
            if fam is None:
                raise ParityError(
                    f"component {i + 1} has factor pattern {factors} at k={k}; "
                    "its projection onto H is not a finite eigen-expansion"
                )
            block = blocks.get((fam, k))
            if block is None:
                block = blocks[(fam, k)] = [{}, {}, {}]
            slot = block[i]
            s = slot.get(p, 0) + c
            if s:
                slot[p] = s
            else:
                slot.pop(p, None)
    return blocks


def _project_block(fam: str, k: tuple, block, L: DomainLengths) -> dict[EigenId, PiPoly]:
    out = {}
    if not any(block):
        return out
    weights = [integral_weight(PATTERNS[fam][i], k, L) for i in range(3)]
    for eid in ids_at(fam, k):
        e = eigenfunction(eid, L)
        num: dict[int, Fraction] = {}
        den = Fraction(0)
        for i in range(3):
            we = e.w[i] * SIGNS[fam][i]
            if not we or not weights[i]:
                continue
            den += we * we * weights[i]
            for p, c in block[i].items():
                s = num.get(p, 0) + c * we * weights[i]
                if s:
                    num[p] = s
                else:
                    num.pop(p, None)
        if num:
            out[eid] = PiPoly({p: v / den for p, v in num.items()})
    return out


def project(u: TrigVectorField, universe: Universe, truncate: bool = False) -> EigenCoords:
    """Leray projection of ``u`` in eigen-coordinates over ``universe``.

    Content beyond the universe raises UniverseOverflow unless ``truncate``
    is set, in which case it is dropped (Galerkin truncation).
    """
    if u.L != universe.L:
        raise ValueError("field and universe use different domain lengths")
    coeffs: dict[EigenId, PiPoly] = {}
    for (fam, k), block in sorted(shape_blocks(u).items()):
        part = _project_block(fam, k, block, universe.L)
        if not part:
            continue
        if max(k) > universe.cap or fam not in universe.families:
            if truncate:
                continue
            raise UniverseOverflow((fam, k), universe.cap)
        coeffs.update(part)
    return EigenCoords(coeffs, universe)


def expand(c: EigenCoords, L: DomainLengths | None = None) -> TrigVectorField:
    if L is None:
        if c.universe is None:
            raise ValueError("domain lengths are needed to expand coordinates without a universe")
        L = c.universe.L
    acc = [dict(), dict(), dict()]
    for eid, coeff in c.items():
        e = eigenfunction(eid, L)
        for i, comp in enumerate(e.field):
            for (f, k, p0), v in comp.terms.items():
                for p, a in coeff.items():
                    key = (f, k, p0 + p)
                    s = acc[i].get(key, 0) + v * a
                    if s:
                        acc[i][key] = s
                    else:
                        acc[i].pop(key, None)
    return TrigVectorField(tuple(TrigScalar._raw(a, L) for a in acc))


def leray(u: TrigVectorField, universe: Universe) -> TrigVectorField:
    return expand(project(u, universe))
