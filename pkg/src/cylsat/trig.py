"""Exact calculus on separable sine/cosine vector fields.

A scalar is a finite sum of monomials

    c * pi**p * f1(k1*pi*x1/L1) * f2(k2*pi*x2/L2) * f3(k3*pi*x3/L3)

with ``c`` rational, ``p`` an integer and each ``f_i`` either ``S`` (sine)
or ``C`` (cosine).  The box is ``(0, L1) x (0, L2) x (0, 2*L3)`` and the
third direction is periodic.  Nothing here ever expands pi numerically
except :func:`TrigScalar.eval`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

HALF = Fraction(1, 2)

# key of one monomial: (factors, index, pi power), e.g. ("SCS", (1, 0, 4), 1)
Key = tuple


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact paths; pass a Fraction or 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class DomainLengths:
    """Side lengths of the cylinder; the periodic cell in x3 has length 2*L3."""

    L1: Fraction
    L2: Fraction
    L3: Fraction

    def __post_init__(self):
        for name in ("L1", "L2", "L3"):
            value = as_fraction(getattr(self, name))
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def parse(cls, values: Sequence) -> "DomainLengths":
        """Build from strings such as ``["1", "1", "17/2"]``."""
        if len(values) != 3:
            raise ValueError("exactly three lengths are required")
        return cls(*(Fraction(str(v)) for v in values))

    def __getitem__(self, axis: int) -> Fraction:
        return (self.L1, self.L2, self.L3)[axis]

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.L1, self.L2, self.L3)

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.as_tuple())


UNIT = DomainLengths(Fraction(1), Fraction(1), Fraction(1))


class PiPoly:
    """Exact Laurent polynomial in pi with rational coefficients.

    Used for scalar results (inner products, projection coefficients,
    bracket coefficients).  Immutable.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, Fraction] | None = None):
        c = {}
        if coeffs:
            for p, v in coeffs.items():
                if v:
                    c[int(p)] = as_fraction(v)
        self._c = c

    @classmethod
    def mono(cls, coeff, pi_pow: int = 0) -> "PiPoly":
        return cls({pi_pow: as_fraction(coeff)})

    @classmethod
    def _raw(cls, c: dict) -> "PiPoly":
        obj = cls.__new__(cls)
        obj._c = c
        return obj

    def items(self):
        return sorted(self._c.items())

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def as_monomial(self) -> tuple[Fraction, int]:
        """Return ``(c, p)`` for ``c*pi**p``; raise if not a single power."""
        if not self._c:
            return Fraction(0), 0
        if len(self._c) != 1:
            raise ValueError(f"{self} is not homogeneous in pi")
        (p, v), = self._c.items()
        return v, p

    def __add__(self, other):
        other = _to_pipoly(other)
        c = dict(self._c)
        for p, v in other._c.items():
            s = c.get(p, 0) + v
            if s:
                c[p] = s
            else:
                c.pop(p, None)
        return PiPoly._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return PiPoly._raw({p: -v for p, v in self._c.items()})

    def __sub__(self, other):
        return self + (-_to_pipoly(other))

    def __rsub__(self, other):
        return _to_pipoly(other) - self

    def __mul__(self, other):
        other = _to_pipoly(other)
        c: dict[int, Fraction] = {}
        for p, v in self._c.items():
            for q, w in other._c.items():
                s = c.get(p + q, 0) + v * w
                if s:
                    c[p + q] = s
                else:
                    c.pop(p + q, None)
        return PiPoly._raw(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _to_pipoly(other)
        v, p = other.as_monomial()
        if not v:
            raise ZeroDivisionError("division by zero PiPoly")
        return PiPoly._raw({q: w / v for q, w in ((q - p, w) for q, w in self._c.items())})

    def __eq__(self, other):
        try:
            other = _to_pipoly(other)
        except TypeError:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __float__(self):
        return float(sum(float(v) * math.pi**p for p, v in self._c.items()))

    def __repr__(self):
        if not self._c:
            return "PiPoly(0)"
        return "PiPoly(" + " + ".join(f"{v}*pi^{p}" for p, v in self.items()) + ")"

    def to_json(self) -> list[dict]:
        return [{"coeff": str(v), "pi_pow": p} for p, v in self.items()]

    @classmethod
    def from_json(cls, data: Iterable[Mapping]) -> "PiPoly":
        out = cls()
        for item in data:
            out = out + cls.mono(Fraction(item["coeff"]), int(item["pi_pow"]))
        return out


def _to_pipoly(x) -> PiPoly:
    if isinstance(x, PiPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return PiPoly.mono(x, 0)
    raise TypeError(f"cannot convert {type(x).__name__} to PiPoly")


# -- one-dimensional product tables ------------------------------------------

def _axis_product(fa: str, a: int, fb: str, b: int) -> list[tuple[str, int, int]]:
    """Expand f_a(a t) * f_b(b t) as sum of sign * f(n t) with n >= 0.

    Returned entries are (factor, index, sign); an overall factor 1/2 is
    implied.  Negative indices are folded with sin(-x) = -sin(x).
    """
    if fa == "S" and fb == "S":
        raw = [("C", a - b, 1), ("C", a + b, -1)]
    elif fa == "C" and fb == "C":
        raw = [("C", a - b, 1), ("C", a + b, 1)]
    elif fa == "S":  # S(a) C(b)
        raw = [("S", a + b, 1), ("S", a - b, 1)]
    else:  # C(a) S(b)
        raw = [("S", a + b, 1), ("S", a - b, -1)]
    out = []
    for f, n, s in raw:
        if n < 0:
            n = -n
            if f == "S":
                s = -s
        if f == "S" and n == 0:
            continue
        out.append((f, n, s))
    return out


_PRODUCT_CACHE: dict = {}


def _product_terms(fa: str, ka: tuple, fb: str, kb: tuple):
    """All (factors, index, coeff) of the product of two unit monomials."""
    key = (fa, ka, fb, kb)
    hit = _PRODUCT_CACHE.get(key)
    if hit is not None:
        return hit
    per_axis = [_axis_product(fa[i], ka[i], fb[i], kb[i]) for i in range(3)]
    acc: dict = {}
    for combo in itertools.product(*per_axis):
        factors = combo[0][0] + combo[1][0] + combo[2][0]
        index = (combo[0][1], combo[1][1], combo[2][1])
        sign = combo[0][2] * combo[1][2] * combo[2][2]
        acc[(factors, index)] = acc.get((factors, index), 0) + sign
    out = tuple((f, k, Fraction(s, 8)) for (f, k), s in acc.items() if s)
    if len(_PRODUCT_CACHE) < 2_000_000:
        _PRODUCT_CACHE[key] = out
    return out


class TrigScalar:
    """Canonical exact trigonometric scalar field on a fixed domain."""

    __slots__ = ("terms", "L", "_hash")

    def __init__(self, terms: Mapping[Key, Fraction] | None = None, L: DomainLengths = UNIT):
        clean: dict = {}
        if terms:
            for (factors, k, p), c in terms.items():
                factors = factors.upper()
                k = tuple(int(v) for v in k)
                if len(factors) != 3 or any(f not in "SC" for f in factors) or len(k) != 3:
                    raise ValueError(f"malformed monomial {(factors, k, p)}")
                if any(v < 0 for v in k):
                    raise ValueError(f"negative index {k}; fold signs before building")
                if any(f == "S" and v == 0 for f, v in zip(factors, k)):
                    continue
                key = (factors, k, int(p))
                s = clean.get(key, 0) + as_fraction(c)
                if s:
                    clean[key] = s
                else:
                    clean.pop(key, None)
        self.terms = clean
        self.L = L
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict, L: DomainLengths) -> "TrigScalar":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.L = L
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, L: DomainLengths = UNIT) -> "TrigScalar":
        return cls._raw({}, L)

    @classmethod
    def constant(cls, c, L: DomainLengths = UNIT) -> "TrigScalar":
        return cls({("CCC", (0, 0, 0), 0): as_fraction(c)}, L)

    @classmethod
    def monomial(cls, factors: str, k, coeff=1, pi_pow: int = 0, L: DomainLengths = UNIT) -> "TrigScalar":
        return cls({(factors, tuple(k), pi_pow): as_fraction(coeff)}, L)

    def normalize(self) -> "TrigScalar":
        return TrigScalar(self.terms, self.L)

    def sorted_terms(self) -> list[tuple[Key, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2]))

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "TrigScalar"):
        if self.L != other.L:
            raise ValueError("fields live on different domains")

    def __add__(self, other: "TrigScalar") -> "TrigScalar":
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return TrigScalar._raw(out, self.L)

    def __neg__(self) -> "TrigScalar":
        return TrigScalar._raw({k: -c for k, c in self.terms.items()}, self.L)

    def __sub__(self, other: "TrigScalar") -> "TrigScalar":
        return self + (-other)

    def scale(self, c, pi_pow: int = 0) -> "TrigScalar":
        c = as_fraction(c)
        if not c:
            return TrigScalar.zero(self.L)
        return TrigScalar._raw({(f, k, p + pi_pow): v * c for (f, k, p), v in self.terms.items()}, self.L)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigScalar):
            return NotImplemented
        return self.L == other.L and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.L, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "TrigScalar(0)"
        parts = [f"{c}*pi^{p}*{f}{list(k)}" for (f, k, p), c in self.sorted_terms()]
        return "TrigScalar(" + " + ".join(parts) + ")"

    def __iter__(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self.sorted_terms())

    # -- numerics ------------------------------------------------------------

    def eval(self, x) -> float:
        x = np.asarray(x, dtype=float)
        L = [float(v) for v in self.L.as_tuple()]
        total = np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
        for (factors, k, p), c in self.terms.items():
            val = float(c) * math.pi**p
            for i in range(3):
                arg = k[i] * math.pi * x[..., i] / L[i] if x.ndim > 1 else k[i] * math.pi * x[i] / L[i]
                val = val * (np.sin(arg) if factors[i] == "S" else np.cos(arg))
            total = total + val
        return total

    def to_json(self) -> list[dict]:
        return [
            {"factors": f, "k": list(k), "coeff": str(c), "pi_pow": p}
            for (f, k, p), c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], L: DomainLengths = UNIT) -> "TrigScalar":
        terms: dict = {}
        for item in data:
            key = (item["factors"], tuple(item["k"]), int(item.get("pi_pow", 0)))
            terms[key] = terms.get(key, 0) + Fraction(item["coeff"])
        return cls(terms, L)


def mono_mul(a: TrigScalar, b: TrigScalar) -> TrigScalar:
    """Exact product via product-to-sum rewriting."""
    a._check(b)
    out: dict = {}
    for (fa, ka, pa), ca in a.terms.items():
        for (fb, kb, pb), cb in b.terms.items():
            c = ca * cb
            p = pa + pb
            for f, k, s in _product_terms(fa, ka, fb, kb):
                key = (f, k, p)
                v = out.get(key, 0) + c * s
                if v:
                    out[key] = v
                else:
                    del out[key]
    return TrigScalar._raw(out, a.L)


_FLIP = {"S": "C", "C": "S"}


def diff(f: TrigScalar, axis: int) -> TrigScalar:
    """Partial derivative along ``axis`` (1, 2 or 3)."""
    i = axis - 1
    if i not in (0, 1, 2):
        raise ValueError("axis must be 1, 2 or 3")
    Li = f.L[i]
    out: dict = {}
    for (factors, k, p), c in f.terms.items():
        if k[i] == 0:
            continue
        sign = 1 if factors[i] == "S" else -1
        nf = factors[:i] + _FLIP[factors[i]] + factors[i + 1:]
        if nf[i] == "S" and k[i] == 0:
            continue
        key = (nf, k, p + 1)
        v = out.get(key, 0) + c * sign * k[i] / Li
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return TrigScalar._raw(out, f.L)


class TrigVectorField:
    """Three exact trig scalars (u1, u2, u3)."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[TrigScalar]):
        comps = tuple(components)
        if len(comps) != 3:
            raise ValueError("a vector field has three components")
        L = comps[0].L
        if any(c.L != L for c in comps):
            raise ValueError("components live on different domains")
        self.components = comps

    @property
    def L(self) -> DomainLengths:
        return self.components[0].L

    @classmethod
    def zero(cls, L: DomainLengths = UNIT) -> "TrigVectorField":
        z = TrigScalar.zero(L)
        return cls((z, z, z))

    @classmethod
    def constant(cls, v, L: DomainLengths = UNIT) -> "TrigVectorField":
        return cls(tuple(TrigScalar.constant(c, L) for c in v))

    def __getitem__(self, i: int) -> TrigScalar:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "TrigVectorField") -> "TrigVectorField":
        return TrigVectorField(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "TrigVectorField") -> "TrigVectorField":
        return TrigVectorField(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self) -> "TrigVectorField":
        return TrigVectorField(tuple(-a for a in self))

    def scale(self, c, pi_pow: int = 0) -> "TrigVectorField":
        return TrigVectorField(tuple(a.scale(c, pi_pow) for a in self))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigVectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"TrigVectorField({self.components[0]!r}, {self.components[1]!r}, {self.components[2]!r})"

    def eval(self, x) -> np.ndarray:
        return np.array([c.eval(x) for c in self.components])

    def to_json(self) -> dict:
        return {f"u{i + 1}": c.to_json() for i, c in enumerate(self.components)}

    @classmethod
    def from_json(cls, data: Mapping, L: DomainLengths = UNIT) -> "TrigVectorField":
        return cls(tuple(TrigScalar.from_json(data.get(f"u{i + 1}", []), L) for i in range(3)))


def gradient(f: TrigScalar) -> TrigVectorField:
    return TrigVectorField((diff(f, 1), diff(f, 2), diff(f, 3)))


def divergence(u: TrigVectorField) -> TrigScalar:
    return diff(u[0], 1) + diff(u[1], 2) + diff(u[2], 3)


def curl(u: TrigVectorField) -> TrigVectorField:
    return TrigVectorField((
        diff(u[2], 2) - diff(u[1], 3),
        diff(u[0], 3) - diff(u[2], 1),
        diff(u[1], 1) - diff(u[0], 2),
    ))


def laplacian(u: TrigVectorField) -> TrigVectorField:
    return TrigVectorField(tuple(
        diff(diff(c, 1), 1) + diff(diff(c, 2), 2) + diff(diff(c, 3), 3) for c in u
    ))


def directional(u: TrigVectorField, f: TrigScalar) -> TrigScalar:
    """u . grad f."""
    out = TrigScalar.zero(f.L)
    for axis in (1, 2, 3):
        if u[axis - 1].is_zero():
            continue
        d = diff(f, axis)
        if d.is_zero():
            continue
        out = out + mono_mul(u[axis - 1], d)
    return out


def advect(u: TrigVectorField, v: TrigVectorField) -> TrigVectorField:
    """(u . grad) v, componentwise."""
    return TrigVectorField(tuple(directional(u, vi) for vi in v))


# -- integrals ----------------------------------------------------------------

def _integral_1d(fa: str, a: int, fb: str, b: int, length: Fraction, periodic: bool) -> tuple[Fraction, int]:
    """Exact integral of f_a(a pi x/L) f_b(b pi x/L); returns (rational, pi power).

    Interval is (0, L) for the wall-bounded axes and (0, 2L) for the periodic one.
    """
    if fa == fb:
        if a != b:
            return Fraction(0), 0
        if fa == "S":
            return (length if periodic else length / 2), 0
        if a == 0:
            return (2 * length if periodic else length), 0
        return (length if periodic else length / 2), 0
    if periodic or a == b:
        return Fraction(0), 0
    if fa == "C":
        a, b = b, a
    # sine index a, cosine index b
    if (a + b) % 2 == 0:
        return Fraction(0), 0
    return length * Fraction(2 * a, a * a - b * b), -1


def integral_weight(factors: str, k, L: DomainLengths) -> Fraction:
    """Integral over the cell of the squared unit monomial (matched factors)."""
    w = Fraction(1)
    for i in range(3):
        v, _ = _integral_1d(factors[i], k[i], factors[i], k[i], L[i], i == 2)
        w *= v
    return w


def inner_scalar(f: TrigScalar, g: TrigScalar) -> PiPoly:
    f._check(g)
    acc: dict[int, Fraction] = {}
    # fast path for the common matched-factor case
    for (fa, ka, pa), ca in f.terms.items():
        for (fb, kb, pb), cb in g.terms.items():
            value = ca * cb
            p = pa + pb
            for i in range(3):
                v, dp = _integral_1d(fa[i], ka[i], fb[i], kb[i], f.L[i], i == 2)
                if not v:
                    value = 0
                    break
                value *= v
                p += dp
            if value:
                s = acc.get(p, 0) + value
                if s:
                    acc[p] = s
                else:
                    acc.pop(p, None)
    return PiPoly._raw(acc)


def inner(u: TrigVectorField, v: TrigVectorField) -> PiPoly:
    """Exact L2 inner product over the periodic cell."""
    total = PiPoly()
    for a, b in zip(u, v):
        total = total + inner_scalar(a, b)
    return total


def restrict(f: TrigScalar, axis: int, at_end: bool) -> TrigScalar:
    """Trace of ``f`` on the face x_axis = 0 (or = L_axis); the axis factor becomes a constant."""
    i = axis - 1
    out: dict = {}
    for (factors, k, p), c in f.terms.items():
        if factors[i] == "S":
            continue  # sin(0) = sin(k pi) = 0
        sign = (-1) ** k[i] if at_end else 1
        nf = factors[:i] + "C" + factors[i + 1:]
        nk = k[:i] + (0,) + k[i + 1:]
        key = (nf, nk, p)
        s = out.get(key, 0) + c * sign
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return TrigScalar._raw(out, f.L)
