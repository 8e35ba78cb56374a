"""Exact subspace arithmetic over eigen-coordinates and the saturation chain.

Vectors are sparse maps from universe column to integer.  Every bracket of
two eigenfunctions is a single power of pi times rational coordinates, so the
power is divided out per vector and the elimination runs over the integers
(fraction-free, rows kept primitive).  Rows are never rewritten after they
are inserted, which lets one echelon basis serve every level of a nested
chain: level j is spanned by the rows stamped before the j-th marker.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .bracket import bracket_generic
from .eigen import EigenId, SetSpec, cq_c, cq_r, eigenfunction, enumerate_set
from .projector import EigenCoords, Universe, UniverseOverflow
from .trig import PiPoly

log = logging.getLogger(__name__)

SparseInt = dict[int, int]


class SpanError(ValueError):
    pass


def _primitive(v: SparseInt) -> SparseInt:
    g = 0
    for x in v.values():
        g = math.gcd(g, x)
        if g == 1:
            break
    if g > 1:
        v = {c: x // g for c, x in v.items()}
    return v


def rational_row(c: EigenCoords, universe: Universe) -> SparseInt:
    """Integer row proportional to ``c`` (pi power and denominators cleared)."""
    pows = set()
    vals: dict[int, Fraction] = {}
    for eid, coeff in c.coeffs.items():
        if eid not in universe:
            raise UniverseOverflow((eid.family, eid.k), universe.cap)
        for p, v in coeff.items():
            pows.add(p)
            vals[universe.index[eid]] = v
    if len(pows) > 1:
        raise SpanError(f"vector mixes powers of pi {sorted(pows)}; cannot normalise")
    return _scale_to_int(vals)


def _scale_to_int(vals: Mapping[int, Fraction]) -> SparseInt:
    den = 1
    for v in vals.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    return _primitive({c: int(v * den) for c, v in vals.items() if v})


class Subspace:
    """Echelon basis with pivots at the smallest column (EigenId order)."""

    def __init__(self, universe: Universe):
        self.universe = universe
        self._rows: dict[int, SparseInt] = {}
        self._stamp: dict[int, int] = {}
        self._order: list[int] = []

    # -- core elimination --
    def _reduce(self, v: SparseInt, limit: int | None = None) -> tuple[SparseInt, int | None]:
        """Eliminate against the rows; return (residual, leading free column or None)."""
        v = dict(v)
        heap = list(v)
        heapq.heapify(heap)
        seen = set()
        while heap:
            c = heapq.heappop(heap)
            if c in seen or c not in v:
                continue
            seen.add(c)
            row = self._rows.get(c)
            if row is None or (limit is not None and self._stamp[c] >= limit):
                return v, c
            a, b = v[c], row[c]
            g = math.gcd(a, b)
            fa, fb = b // g, a // g
            if fa != 1:
                v = {k: x * fa for k, x in v.items()}
            for k, x in row.items():
                y = v.get(k, 0) - fb * x
                if y:
                    if k not in v:
                        heapq.heappush(heap, k)
                    v[k] = y
                else:
                    v.pop(k, None)
            if len(v) > 8:
                v = _primitive(v)
        return v, None

    def _insert(self, v: SparseInt) -> bool:
        res, lead = self._reduce(v)
        if lead is None:
            return False
        res = _primitive(res)
        if res[lead] < 0:
            res = {k: -x for k, x in res.items()}
        self._rows[lead] = res
        self._stamp[lead] = len(self._order)
        self._order.append(lead)
        return True

    # -- public API --
    def add(self, v: EigenCoords | SparseInt) -> bool:
        """Insert v; True iff the rank grew."""
        if isinstance(v, EigenCoords):
            if v.universe is not None and v.universe != self.universe:
                raise SpanError("vector belongs to a different universe")
            v = rational_row(v, self.universe)
        if not v:
            return False
        return self._insert(v)

    def add_id(self, eid: EigenId) -> bool:
        if eid not in self.universe:
            raise UniverseOverflow((eid.family, eid.k), self.universe.cap)
        return self._insert({self.universe.index[eid]: 1})

    def contains(self, v: EigenCoords | SparseInt | EigenId, limit: int | None = None) -> bool:
        if isinstance(v, EigenId):
            if v not in self.universe:
                return False
            v = {self.universe.index[v]: 1}
        elif isinstance(v, EigenCoords):
            v = rational_row(v, self.universe)
        if not v:
            return True
        return self._reduce(v, limit)[1] is None

    __contains__ = contains

    @property
    def dim(self) -> int:
        return len(self._order)

    def __len__(self):
        return self.dim

    def rows(self, start: int = 0, stop: int | None = None) -> list[SparseInt]:
        return [self._rows[c] for c in self._order[start:stop]]

    def basis(self, stop: int | None = None) -> list[EigenCoords]:
        ids = self.universe.ids
        return [
            EigenCoords({ids[c]: PiPoly.mono(x) for c, x in row.items()}, self.universe)
            for row in self.rows(0, stop)
        ]

    def copy(self) -> "Subspace":
        out = Subspace(self.universe)
        out._rows = dict(self._rows)
        out._stamp = dict(self._stamp)
        out._order = list(self._order)
        return out

    def truncated(self, stop: int) -> "Subspace":
        out = Subspace(self.universe)
        for c in self._order[:stop]:
            out._rows[c] = self._rows[c]
            out._stamp[c] = self._stamp[c]
            out._order.append(c)
        return out

    def check_echelon(self) -> bool:
        return all(min(row) == c and row[c] > 0 for c, row in self._rows.items())

    def issubset(self, other: "Subspace") -> bool:
        return all(other.contains(r) for r in self.rows())


@dataclass
class LevelView:
    """G^j as a prefix of the chain's shared echelon basis."""

    space: Subspace
    level: int
    stop: int

    @property
    def dim(self) -> int:
        return self.stop

    @property
    def universe(self) -> Universe:
        return self.space.universe

    def contains(self, v) -> bool:
        return self.space.contains(v, limit=self.stop)

    __contains__ = contains

    def basis(self) -> list[EigenCoords]:
        return self.space.basis(self.stop)

    def materialize(self) -> Subspace:
        return self.space.truncated(self.stop)


class BracketTable:
    """Cache of projected brackets of canonical eigenfunction pairs as integer rows.

    Rows are kept in rational form with a common pi power removed; brackets
    are symmetric so pairs are keyed without order.
    """

    def __init__(self, universe: Universe):
        self.universe = universe
        self._cache: dict[tuple[EigenId, EigenId], dict[int, Fraction]] = {}
        self.evaluations = 0

    def pair(self, a: EigenId, b: EigenId) -> dict[int, Fraction]:
        key = (b, a) if b < a else (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        L = self.universe.L
        res = bracket_generic(eigenfunction(key[0], L), eigenfunction(key[1], L), self.universe)
        out: dict[int, Fraction] = {}
        idx = self.universe.index
        for eid, coeff in res.projected.coeffs.items():
            (p, v), = coeff.items()
            if p != 1:
                raise SpanError(f"bracket of {key[0]} and {key[1]} is not homogeneous of degree one in pi")
            out[idx[eid]] = v
        self._cache[key] = out
        self.evaluations += 1
        return out

    def apply(self, a: EigenId, row: SparseInt) -> SparseInt:
        """Integer row proportional to B(a, sum_c row[c] e_c)."""
        ids = self.universe.ids
        acc: dict[int, Fraction] = {}
        for c, x in row.items():
            for k, v in self.pair(a, ids[c]).items():
                s = acc.get(k, 0) + x * v
                if s:
                    acc[k] = s
                else:
                    acc.pop(k, None)
        return _scale_to_int(acc) if acc else {}


def seed_space(seed: Sequence[EigenId], universe: Universe) -> Subspace:
    s = Subspace(universe)
    for eid in sorted(seed):
        s.add_id(eid)
    return s


def fl_step(generators: Sequence[EigenId], E: Subspace, table: BracketTable | None = None) -> Subspace:
    """E + span{B(a, b) : a in generators, b in a basis of E}, computed literally."""
    table = table or BracketTable(E.universe)
    out = E.copy()
    for a in sorted(generators):
        for row in E.rows():
            out.add(table.apply(a, row))
    return out


@dataclass
class Chain:
    """Nested G^0 ⊆ G^1 ⊆ ... sharing one echelon basis."""

    generators: tuple[EigenId, ...]
    space: Subspace
    table: BracketTable
    markers: list[int] = field(default_factory=list)
    timings: list[float] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.markers) - 1

    def level(self, j: int) -> LevelView:
        if j < 0 or j > self.depth:
            raise IndexError(f"level {j} not computed (depth {self.depth})")
        return LevelView(self.space, j, self.markers[j])

    def dims(self) -> list[int]:
        return list(self.markers)

    def extend(self, progress: Callable[[int, int, int], None] | None = None,
               stop: Callable[[], bool] | None = None, check_every: int = 0) -> bool:
        """Compute the next level with a semi-naive step.

        Because B(a, .) is linear, only rows added at the previous level need
        new brackets.  Returns False when ``stop`` fired before the level was
        complete; the partial level is still a subspace of the true one.
        """
        t0 = time.perf_counter()
        j = self.depth
        start = self.markers[j - 1] if j > 0 else 0
        new_rows = self.space.rows(start, self.markers[j])
        total = len(new_rows) * len(self.generators)
        done = 0
        finished = True
        for row in new_rows:
            for a in self.generators:
                try:
                    self.space.add(self.table.apply(a, row))
                except UniverseOverflow as exc:
                    need = required_cap(self.generators, j + 1)
                    raise UniverseOverflow(exc.mode, exc.cap, need) from None
                done += 1
                if check_every and done % check_every == 0:
                    if progress:
                        progress(j + 1, done, total)
                    if stop and stop():
                        finished = False
                        break
            if not finished:
                break
        self.markers.append(self.space.dim)
        self.timings.append(time.perf_counter() - t0)
        return finished


def start_chain(seed: Sequence[EigenId], universe: Universe, generators: Sequence[EigenId] | None = None) -> Chain:
    space = seed_space(seed, universe)
    gens = tuple(sorted(generators if generators is not None else seed))
    return Chain(gens, space, BracketTable(universe), [space.dim], [0.0])


def generate_chain(spec: SetSpec | Sequence[EigenId], jmax: int, cap: int, L,
                   families: tuple[str, ...] | None = None, progress: Callable | None = None) -> list[LevelView]:
    """G^0..G^jmax in full (no early stopping).

    A bracket output beyond ``cap`` raises UniverseOverflow rather than
    being truncated.
    """
    ids = enumerate_set(spec) if isinstance(spec, SetSpec) else sorted(spec)
    fams = families or tuple(sorted({e.family for e in ids})) or ("Y", "Z")
    chain = start_chain(ids, Universe(cap, L, fams))
    for _ in range(jmax):
        chain.extend(progress)
    return [chain.level(j) for j in range(jmax + 1)]


def required_cap(seed: Sequence[EigenId], levels: int) -> int:
    """Largest index that can occur in G^levels: each level adds at most the largest seed index."""
    m = max((max(e.k) for e in seed), default=0)
    return m * (levels + 1)


# -- certificates of absence ---------------------------------------------------

def absence_certificate(target: EigenId, generators: Sequence[EigenId], seed: Sequence[EigenId],
                        universe: Universe) -> dict | None:
    """Proof data that ``target`` lies in no G^j, or None when the check fails.

    The target coordinate functional vanishes on span(seed) when the target
    is not a seed element.  If it also vanishes on B(a, e) for every
    generator a and every eigenfunction e whose index can reach the target
    (k_t in |k_a +- k_e| componentwise), it vanishes on B(a, v) for every v,
    so by induction on every level of the chain.
    """
    if target in set(seed):
        return None
    checked = 0
    L = universe.L
    for a in generators:
        cands = []
        for axis in range(3):
            opts = {target.k[axis] + a.k[axis], abs(target.k[axis] - a.k[axis])}
            cands.append(sorted(opts))
        for k1 in cands[0]:
            for k2 in cands[1]:
                for k3 in cands[2]:
                    k = (k1, k2, k3)
                    for e in _ids_at_index(k):
                        local = Universe(max(max(k), max(a.k), max(target.k)) + max(a.k), L)
                        coords = bracket_generic(eigenfunction(a, L), eigenfunction(e, L), local).projected
                        checked += 1
                        if not coords[target].is_zero():
                            return None
    return {"target": str(target), "pairs_checked": checked,
            "reason": "target coordinate vanishes on the seed span and on every generator bracket"}


def _ids_at_index(k):
    from .eigen import ids_at
    out = []
    for fam in ("Y", "Z"):
        out.extend(ids_at(fam, k))
    return out


# -- saturation reports ----------------------------------------------------------

@dataclass
class QVerdict:
    q: int
    level: int
    verdict: bool
    targets: int
    found_at: int | None
    missing: list[str]
    certified_absent: list[dict]
    note: str = ""

    def to_json(self) -> dict:
        return {"q": self.q, "level": self.level, "verdict": self.verdict, "targets": self.targets,
                "found_at_level": self.found_at, "missing": self.missing,
                "certified_absent": self.certified_absent, "note": self.note}


@dataclass
class SaturationReport:
    config: dict
    per_q: list[QVerdict] = field(default_factory=list)
    dims: list[int] = field(default_factory=list)
    level_complete: list[bool] = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    references: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.verdict for v in self.per_q)

    def to_json(self) -> dict:
        return {"schema": "cylsat.saturation/1", "config": self.config, "ok": self.ok,
                "per_q": [v.to_json() for v in self.per_q], "dims": self.dims,
                "level_complete": self.level_complete, "timing": self.timing, "references": self.references}


def missing_from(targets: Sequence[EigenId], s: Subspace | LevelView) -> list[EigenId]:
    """The targets not in s (exact membership)."""
    return [t for t in targets if not s.contains(t)]


def verify_inclusion(target: SetSpec | Sequence[EigenId], s: Subspace | LevelView) -> SaturationReport:
    """Single-inclusion report: every target id tested against s."""
    ids = enumerate_set(target) if isinstance(target, SetSpec) else list(target)
    t0 = time.perf_counter()
    missing = missing_from(ids, s)
    level = getattr(s, "level", None)
    name = target.name if isinstance(target, SetSpec) else "custom"
    rep = SaturationReport(config={"target": name, "cap": s.universe.cap,
                                   "lengths": [str(v) for v in s.universe.L.as_tuple()]})
    rep.per_q.append(QVerdict(-1, level if level is not None else -1, not missing, len(ids),
                              level if not missing else None, [str(t) for t in missing], []))
    rep.dims = [s.dim]
    rep.timing = {"total_s": round(time.perf_counter() - t0, 3)}
    return rep


def target_ids(family_scope: str, q: int) -> list[EigenId]:
    if family_scope == "cylinder":
        return cq_c(q)
    if family_scope == "rectangle":
        return cq_r(q)
    raise SpanError(f"unknown target scope {family_scope!r}")


def verify_saturation(seed: Sequence[EigenId], universe: Universe, q_values: Iterable[int],
                      scope: str = "cylinder", lazy: bool = True, early_stop: bool = False,
                      config: dict | None = None, progress: Callable | None = None) -> SaturationReport:
    """Check C^q ⊆ G^{q-1} for each q.

    With ``lazy`` the chain stops at the first level containing every target
    (later levels contain it too, since the chain is nested).  Targets still
    missing are tested for a certificate of absence, which settles a failure
    without building deeper levels.  ``early_stop`` additionally allows a
    level to be abandoned once all targets are inside its partial span.
    """
    seed = sorted(seed)
    t0 = time.perf_counter()
    chain = start_chain(seed, universe)
    report = SaturationReport(config=dict(config or {}))
    report.level_complete = [True]
    for q in sorted(q_values):
        targets = target_ids(scope, q)
        level = q - 1
        overflow = [t for t in targets if t not in universe]
        if overflow:
            raise UniverseOverflow((overflow[0].family, overflow[0].k), universe.cap)

        def stop(targets=targets):
            return not missing_from(targets, chain.space)

        j = 0 if lazy else level
        while True:
            while chain.depth < j:
                done = chain.extend(progress, stop if early_stop else None, check_every=500 if early_stop else 0)
                report.level_complete.append(done)
                log.info("level %d: dim %d (%.1fs)", chain.depth, chain.space.dim, chain.timings[-1])
            missing = missing_from(targets, chain.level(j))
            if not missing:
                v = QVerdict(q, level, True, len(targets), j, [], [])
                if j < level:
                    v.note = f"targets already in G^{j}, contained in G^{level}"
                break
            certs = []
            for t in missing:
                cert = absence_certificate(t, chain.generators, seed, universe)
                if cert is None:
                    certs = None
                    break
                certs.append(cert)
            if certs:
                v = QVerdict(q, level, False, len(targets), None, [str(t) for t in missing], certs,
                             f"missing ids certified absent from every level; chain stopped at G^{j}")
                break
            if j >= level:
                v = QVerdict(q, level, False, len(targets), None, [str(t) for t in missing], [])
                break
            j += 1
        report.per_q.append(v)
    report.dims = chain.dims()
    report.timing = {"total_s": round(time.perf_counter() - t0, 3),
                     "per_level_s": [round(t, 3) for t in chain.timings],
                     "bracket_evaluations": chain.table.evaluations}
    return report
