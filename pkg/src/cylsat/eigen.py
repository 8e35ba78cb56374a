"""Stokes eigenfunctions of the cylinder under Lions boundary conditions.

Two shapes occur.  ``Y`` fields are odd in the x3-derivative sense
(sin in x3 on the third component), ``Z`` fields carry the opposite x3
parity and a sign-flipped third component:

    Y = (w1 S C C, w2 C S C,  w3 C C S)
    Z = (w1 S C S, w2 C S S, -w3 C C C)

with the k-dependent arguments ``k_i pi x_i / L_i``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

from .trig import (
    DomainLengths,
    PiPoly,
    TrigScalar,
    TrigVectorField,
    curl,
    divergence,
    laplacian,
    restrict,
)

FAMILIES = ("Y", "Z")
# factor pattern of each component, per shape
PATTERNS = {
    "Y": ("SCC", "CSC", "CCS"),
    "Z": ("SCS", "CSS", "CCC"),
}
# sign applied to w_i on component i
SIGNS = {"Y": (1, 1, 1), "Z": (1, 1, -1)}


class EigenError(ValueError):
    """An (index, w) pair violates the family rules."""


def zeros(k: Sequence[int]) -> int:
    return sum(1 for v in k if v == 0)


@dataclass(frozen=True)
class EigenId:
    family: str
    k: tuple[int, int, int]
    j: int = 1

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        if self.family not in FAMILIES:
            raise EigenError(f"unknown family {self.family!r}")
        if len(self.k) != 3 or any(v < 0 for v in self.k):
            raise EigenError(f"mode index must be three nonnegative integers, got {self.k}")
        rule = id_rule_violation(self.family, self.k, self.j)
        if rule:
            raise EigenError(rule)

    @property
    def sort_key(self):
        return (max(self.k), self.k, self.family, self.j)

    def __lt__(self, other: "EigenId"):
        return self.sort_key < other.sort_key

    def __str__(self):
        return f"{self.family}{self.j}({self.k[0]},{self.k[1]},{self.k[2]})"

    def to_json(self) -> dict:
        return {"family": self.family, "k": list(self.k), "j": self.j}

    @classmethod
    def from_json(cls, data) -> "EigenId":
        return cls(data["family"], tuple(data["k"]), int(data.get("j", 1)))


def multiplicity(family: str, k: Sequence[int]) -> int:
    """How many independent eigenfunctions of ``family`` sit at index ``k``."""
    z = zeros(k)
    if family == "Y":
        return 2 - z if z <= 1 else 0
    if k[2] == 0:
        return 1
    return 2 - z if z <= 1 else 0


def id_rule_violation(family: str, k: Sequence[int], j: int) -> str | None:
    n = multiplicity(family, k)
    if n == 0:
        if family == "Y":
            return f"Y requires #0(k) <= 1; k={tuple(k)} has #0(k)={zeros(k)}"
        return f"Z with k3 > 0 requires #0(k) <= 1; k={tuple(k)}"
    if not 1 <= j <= n:
        return f"j={j} out of range 1..{n} for {family} at k={tuple(k)}"
    return None


def ids_at(family: str, k: Sequence[int]) -> list[EigenId]:
    return [EigenId(family, tuple(k), j) for j in range(1, multiplicity(family, k) + 1)]


# -- w vectors ----------------------------------------------------------------

def l_product(x: Sequence, y: Sequence, L: DomainLengths) -> Fraction:
    """Weighted product x1 y1/L1 + x2 y2/L2 + x3 y3/L3."""
    return sum((Fraction(x[i]) * y[i] / L[i] for i in range(3)), Fraction(0))


def primitive(v: Sequence) -> tuple[int, int, int]:
    """Integer multiple of ``v`` with gcd 1 and first nonzero entry positive."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise EigenError("zero vector has no primitive form")
    ints = [x // g for x in ints]
    first = next(x for x in ints if x)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def cross(a: Sequence, b: Sequence) -> tuple:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def perp_basis(k: Sequence[int], L: DomainLengths) -> list[tuple[int, int, int]]:
    """Canonical basis of {w != 0 : (w,k)_[L] = 0, w_i = 0 where k_i = 0}.

    One vector when k has a single zero entry, two Euclidean-orthogonal
    vectors when it has none.
    """
    k = tuple(int(v) for v in k)
    z = zeros(k)
    if z >= 2:
        raise EigenError(f"#0(k)={z} >= 2: the constraint set is empty; use the special Z constructors")
    L1, L2, L3 = L.as_tuple()
    k1, k2, k3 = k
    if z == 1:
        if k1 == 0:
            return [primitive((0, L2 * k3, -L3 * k2))]
        if k2 == 0:
            return [primitive((L1 * k3, 0, -L3 * k1))]
        return [primitive((L1 * k2, -L2 * k1, 0))]
    w1 = primitive((L1 * k2, -L2 * k1, 0))
    normal = (Fraction(k1) / L1, Fraction(k2) / L2, Fraction(k3) / L3)
    w2 = primitive(cross(normal, w1))
    return [w1, w2]


def canonical_w(eid: EigenId, L: DomainLengths) -> tuple[int, int, int]:
    if eid.family == "Z" and eid.k[2] == 0:
        # the x3-independent Z fields are (0, 0, -w3 C C); (0,0,0) gives the constant (0,0,1)
        return (0, 0, -1) if eid.k == (0, 0, 0) else (0, 0, 1)
    return perp_basis(eid.k, L)[eid.j - 1]


# -- eigenfunctions -----------------------------------------------------------

@dataclass(frozen=True)
class Eigenfunction:
    id: EigenId
    w: tuple[Fraction, Fraction, Fraction]
    field: TrigVectorField = dc_field(compare=False)
    # eigenvalue / (nu * pi^2)
    lam: Fraction = dc_field(compare=False)

    @property
    def eigenvalue(self) -> PiPoly:
        """Eigenvalue per unit viscosity, i.e. lambda / nu."""
        return PiPoly.mono(self.lam, 2)

    def eigenvalue_at(self, nu: float) -> float:
        return float(nu) * float(self.eigenvalue)

    @property
    def L(self) -> DomainLengths:
        return self.field.L


def _shape_field(family: str, k, w, L: DomainLengths) -> TrigVectorField:
    comps = []
    for i in range(3):
        c = Fraction(w[i]) * SIGNS[family][i]
        comps.append(TrigScalar({(PATTERNS[family][i], tuple(k), 0): c}, L))
    return TrigVectorField(comps)


def shape_field(family: str, k, z, L: DomainLengths, pi_pow: int = 0) -> TrigVectorField:
    """Raw field with the given shape and per-component coefficients z (no sign flip)."""
    comps = [TrigScalar({(PATTERNS[family][i], tuple(k), pi_pow): Fraction(z[i])}, L) for i in range(3)]
    return TrigVectorField(comps)


def _eigen_lambda(k, L: DomainLengths) -> Fraction:
    return sum((Fraction(k[i]) / L[i]) ** 2 for i in range(3))


def _check_perp(k, w, L: DomainLengths, family: str):
    for i in range(3):
        if k[i] == 0 and w[i] != 0:
            raise EigenError(f"{family}: w_{i + 1} must vanish because k_{i + 1} = 0 (w={tuple(w)}, k={tuple(k)})")
    if l_product(w, k, L) != 0:
        raise EigenError(f"{family}: (w,k)_[L] = {l_product(w, k, L)} != 0 (divergence-free constraint)")


def build_Y(k, w, L: DomainLengths, j: int | None = None) -> Eigenfunction:
    k = tuple(int(v) for v in k)
    w = tuple(Fraction(v) for v in w)
    if zeros(k) > 1:
        raise EigenError(f"Y requires #0(k) <= 1; k={k} has #0(k)={zeros(k)}")
    if not any(w):
        raise EigenError("w must be nonzero")
    _check_perp(k, w, L, "Y")
    eid = EigenId("Y", k, j or 1)
    return Eigenfunction(eid, w, _shape_field("Y", k, w, L), _eigen_lambda(k, L))


def build_Z(k, w, L: DomainLengths, j: int | None = None) -> Eigenfunction:
    k = tuple(int(v) for v in k)
    w = tuple(Fraction(v) for v in w)
    if not any(w):
        raise EigenError("w must be nonzero")
    if k[2] == 0:
        if w[0] != 0 or w[1] != 0:
            raise EigenError(f"Z with k3 = 0 requires w = (0, 0, w3); got w={w}")
        if k == (0, 0, 0) and w != (0, 0, -1):
            raise EigenError("Z at k=(0,0,0) uses w=(0,0,-1), i.e. the constant field (0,0,1)")
    else:
        if zeros(k) > 1:
            raise EigenError(f"Z with k3 > 0 requires #0(k) <= 1; k={k}")
        _check_perp(k, w, L, "Z")
    eid = EigenId("Z", k, j or 1)
    return Eigenfunction(eid, w, _shape_field("Z", k, w, L), _eigen_lambda(k, L))


def build(family: str, k, w, L: DomainLengths, j: int | None = None) -> Eigenfunction:
    return (build_Y if family == "Y" else build_Z)(k, w, L, j)


@lru_cache(maxsize=None)
def eigenfunction(eid: EigenId, L: DomainLengths) -> Eigenfunction:
    """The canonical realisation of ``eid``."""
    return build(eid.family, eid.k, canonical_w(eid, L), L, eid.j)


# -- index sets ---------------------------------------------------------------

SELECTORS = ("thm33", "cor310", "rect_q", "cq_c", "cq_r", "custom", "thm33_minus_z000")

# element counts printed alongside the two cylinder sets in the source text
STATED_COUNTS = {"thm33": 355, "cor310": 260}


@dataclass(frozen=True)
class SetSpec:
    selector: str
    q: int | None = None
    ids: tuple[EigenId, ...] = ()

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ValueError(f"unknown set selector {self.selector!r}; choose from {SELECTORS}")
        if self.selector in ("rect_q", "cq_c", "cq_r") and (self.q is None or self.q < 0):
            raise ValueError(f"selector {self.selector} needs a bound q >= 0")

    @classmethod
    def parse(cls, text: str) -> "SetSpec":
        """Parse CLI names such as ``thm33``, ``cor310``, ``rect-q3``, ``cq-c5``."""
        t = text.strip().lower().replace("-", "_")
        for prefix in ("rect_q", "cq_c", "cq_r"):
            if t.startswith(prefix) and t != prefix:
                return cls(prefix, int(t[len(prefix):]))
        return cls(t)

    def to_json(self) -> dict:
        out: dict = {"selector": self.selector}
        if self.q is not None:
            out["q"] = self.q
        if self.selector == "custom":
            out["ids"] = [e.to_json() for e in self.ids]
        return out

    @classmethod
    def from_json(cls, data) -> "SetSpec":
        ids = tuple(EigenId.from_json(e) for e in data.get("ids", []))
        return cls(data["selector"], data.get("q"), ids)

    @property
    def name(self) -> str:
        return self.selector + ("" if self.q is None else str(self.q))


def s_r(q: int) -> list[tuple[int, int, int]]:
    return [k for k in itertools.product(range(q + 1), repeat=3) if zeros(k) <= 1]


def s_c(q: int) -> list[tuple[int, int, int]]:
    axis = [(n, 0, 0) for n in range(1, q + 1)] + [(0, n, 0) for n in range(1, q + 1)]
    return s_r(q) + axis


def cq_r(q: int) -> list[EigenId]:
    return [e for k in s_r(q) for e in ids_at("Y", k)]


def cq_y(q: int) -> list[EigenId]:
    return cq_r(q)


def cq_z(q: int) -> list[EigenId]:
    out = [e for k in s_r(q) for e in ids_at("Z", k)]
    out += [EigenId("Z", k, 1) for k in s_c(q)[len(s_r(q)):]]
    out.append(EigenId("Z", (0, 0, 0), 1))
    return out


def cq_c(q: int) -> list[EigenId]:
    return cq_y(q) + cq_z(q)


def enumerate_set(spec: SetSpec) -> list[EigenId]:
    """Deterministic, duplicate-free, sorted list of identifiers."""
    sel = spec.selector
    if sel == "thm33":
        ids = cq_c(4)
    elif sel == "thm33_minus_z000":
        ids = [e for e in cq_c(4) if e != EigenId("Z", (0, 0, 0), 1)]
    elif sel == "cor310":
        ids = cq_r(3) + cq_z(4)
    elif sel in ("rect_q", "cq_r"):
        ids = cq_r(spec.q)
    elif sel == "cq_c":
        ids = cq_c(spec.q)
    else:
        ids = list(spec.ids)
    return sorted(set(ids))


def count_report(spec: SetSpec) -> dict:
    ids = enumerate_set(spec)
    by_family = {f: sum(1 for e in ids if e.family == f) for f in FAMILIES}
    out = {"set": spec.to_json(), "count": len(ids), "by_family": by_family}
    stated = STATED_COUNTS.get(spec.selector)
    if stated is not None:
        out["stated_count"] = stated
        out["discrepancy"] = len(ids) - stated
        out["note"] = (
            "count obtained by enumerating the displayed set (index bound 4, the unbounded axis "
            "family capped at 4 as in the base step); it does not match the stated total"
            if len(ids) != stated else "count matches the stated total"
        )
    return out


def load_id_list(path: str) -> list[EigenId]:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("ids", [])
    return [EigenId.from_json(e) for e in data]


# -- validation ---------------------------------------------------------------

@dataclass
class ValidationReport:
    id: EigenId
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]

    def to_json(self) -> dict:
        return {"id": self.id.to_json(), "ok": self.ok, "checks": self.checks}


def validate_eigenfunction(e: Eigenfunction) -> ValidationReport:
    """Exact symbolic checks of divergence, boundary conditions and the eigen-relation."""
    u = e.field
    rot = curl(u)
    checks: dict[str, bool] = {}
    checks["divergence_free"] = divergence(u).is_zero()
    for axis, name in ((1, "x1"), (2, "x2")):
        for end in (False, True):
            face = f"{name}={'L' if end else '0'}"
            checks[f"normal_velocity@{face}"] = restrict(u[axis - 1], axis, end).is_zero()
            tangential = [c for c in (1, 2, 3) if c != axis]
            checks[f"tangential_curl@{face}"] = all(
                restrict(rot[c - 1], axis, end).is_zero() for c in tangential
            )
    residual = laplacian(u) + u.scale(e.lam, 2)
    checks["eigen_relation"] = residual.is_zero()
    checks["nonzero"] = not u.is_zero()
    return ValidationReport(e.id, checks)
