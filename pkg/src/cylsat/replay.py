"""Scripted re-computation of the induction-step bracket choices.

Each step script (``data/steps.json``) lists the operand quadruples used to
reach a target index, the z-vectors and determinants claimed for them, and
the independence argument that closes the step.  :func:`replay` recomputes
every item exactly and classifies it as ``exact``, ``scaled`` (a nonzero
multiple, which is all the span argument needs) or ``mismatch``.
"""

from __future__ import annotations

import ast
import itertools
import json
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .bracket import beta, check_lin_indep_pair, literal_pair_criterion, projected_rank, yz_mix_closed_form
from .eigen import _shape_field, l_product
from .linalg import det3
from .projector import shape_blocks
from .trig import DomainLengths, PiPoly, TrigVectorField, advect

DEFAULT_LENGTHS = (
    ("1", "1", "1"),
    ("1", "1", "17/2"),
    ("2", "3", "5"),
    ("1/2", "3/4", "2"),
    ("3", "2", "7/3"),
)
Q_RANGE = range(4, 13)

# -- arithmetic expressions over the script variables --------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


class ScriptError(ValueError):
    pass


@lru_cache(maxsize=None)
def _parse(expr: str) -> ast.expr:
    try:
        return ast.parse(expr, mode="eval").body
    except SyntaxError as exc:
        raise ScriptError(f"cannot parse {expr!r}: {exc}") from None


def evaluate(expr: str, env: Mapping[str, Fraction]) -> Fraction:
    """Exact value of an integer-polynomial expression (``+ - * / **``, names from env)."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ScriptError(f"unknown variable {node.id!r} in {expr!r}")
            return Fraction(env[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = ev(node.right)
                if exp.denominator != 1 or exp < 0:
                    raise ScriptError(f"only nonnegative integer powers allowed in {expr!r}")
                return ev(node.left) ** int(exp)
            op = _BINOPS.get(type(node.op))
            if op is not None:
                return op(ev(node.left), ev(node.right))
        raise ScriptError(f"unsupported syntax in {expr!r}")

    return ev(_parse(expr))


def _vec(exprs: Sequence[str], env) -> tuple[Fraction, Fraction, Fraction]:
    return tuple(evaluate(e, env) for e in exprs)


# -- script data ---------------------------------------------------------------

@dataclass(frozen=True)
class Reading:
    label: str
    form: str
    k: tuple[str, ...]
    wk: tuple[str, ...]
    m: tuple[str, ...]
    wm: tuple[str, ...]
    note: str = ""


@dataclass(frozen=True)
class Quadruple:
    name: str
    expected: Mapping
    readings: tuple[Reading, ...]
    betas: tuple[Mapping, ...] = ()


@dataclass(frozen=True)
class StepScript:
    id: str
    alias: str
    stage: str
    ref: str
    target: tuple[str, ...]
    params: Mapping[str, tuple[str, str]]
    quadruples: tuple[Quadruple, ...]
    determinants: tuple[Mapping, ...]
    verdict: Mapping
    forms: Mapping[str, tuple] = field(default_factory=dict, compare=False, repr=False)
    q_min: int = 4

    def quadruple(self, name: str) -> Quadruple:
        for qd in self.quadruples:
            if qd.name == name:
                return qd
        raise KeyError(name)

    def param_grid(self, q: int) -> list[dict[str, int]]:
        names = sorted(self.params)
        ranges = []
        for n in names:
            lo, hi = (int(evaluate(e, {"q": Fraction(q)})) for e in self.params[n])
            ranges.append(range(lo, hi + 1))
        return [dict(zip(names, combo)) for combo in itertools.product(*ranges)]


def _load_raw(path: str | None):
    if path is None:
        text = resources.files("cylsat").joinpath("data/steps.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def load_scripts(path: str | None = None) -> list[StepScript]:
    raw = _load_raw(path)
    forms = {name: tuple(tuple(p) for p in pairs) for name, pairs in raw["forms"].items()}
    out = []
    for s in raw["steps"]:
        quads = []
        for qd in s["quadruples"]:
            readings = []
            for r in qd["readings"]:
                if r["form"] not in forms:
                    raise ScriptError(f"{s['id']}/{qd['name']}: unknown form {r['form']!r}")
                readings.append(Reading(r["label"], r["form"], tuple(r["k"]), tuple(r["wk"]),
                                        tuple(r["m"]), tuple(r["wm"]), r.get("note", "")))
            quads.append(Quadruple(qd["name"], qd["expected"], tuple(readings), tuple(qd.get("betas", ()))))
        out.append(StepScript(
            id=s["id"], alias=s["alias"], stage=s["stage"], ref=s["ref"], target=tuple(s["target"]),
            params={k: tuple(v) for k, v in s["params"].items()}, quadruples=tuple(quads),
            determinants=tuple(s["determinants"]), verdict=s["verdict"], forms=forms,
            q_min=s.get("q_min", 4),
        ))
    return out


def select_steps(scripts: Iterable[StepScript], key: str) -> list[StepScript]:
    """Steps whose id, id prefix, stage or alias equals ``key``."""
    chosen = [s for s in scripts if key in (s.id, s.stage, s.alias) or s.id.startswith(key + ".")]
    if not chosen:
        raise ScriptError(f"no step matches {key!r}")
    return chosen


# -- recomputation -------------------------------------------------------------

# components of the Z shape that carry a sine along each axis
_Z_SINE_AXES = ({0, 2}, {1, 2}, set())


def live_components(n: Sequence[int]) -> list[int]:
    """Components of a Z-shape field at index n that are not identically zero."""
    return [i for i in range(3) if all(n[ax] != 0 for ax in _Z_SINE_AXES[i])]


def admissibility(family: str, k, w, L: DomainLengths) -> str | None:
    """Why (family, k, w) is not an eigenfunction datum, or None."""
    if not any(w):
        return "w is zero"
    if family == "Z" and k[2] == 0:
        if w[0] or w[1]:
            return f"Z with k3=0 carries only w3; w={tuple(map(str, w))} gives {'the zero field' if not w[2] else 'a truncated field'}"
        return None
    for i in range(3):
        if k[i] == 0 and w[i] != 0:
            return f"w_{i + 1} must vanish when k_{i + 1}=0"
    lp = l_product(w, k, L)
    if lp:
        return f"(w,k)_[L] = {lp} != 0"
    return None


@dataclass
class ReadingResult:
    label: str
    z: tuple[PiPoly, PiPoly, PiPoly]
    status: str
    ratio: PiPoly | None
    inadmissible: list[str]
    path: str
    note: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "status": self.status,
            "ratio": None if self.ratio is None else self.ratio.to_json(),
            "z": [c.to_json() for c in self.z],
            "inadmissible": self.inadmissible,
            "path": self.path,
            "note": self.note,
        }


def _data(reading: Reading, env, L):
    data = {"k": tuple(int(v) for v in _vec(reading.k, env)), "wk": _vec(reading.wk, env),
            "m": tuple(int(v) for v in _vec(reading.m, env)), "wm": _vec(reading.wm, env)}
    for key in ("k", "m"):
        if any(v < 0 for v in data[key]):
            raise ScriptError(f"negative index {data[key]} in reading {reading.label!r}")
    return data


def _z_from_field(u: TrigVectorField, n) -> tuple[PiPoly, PiPoly, PiPoly]:
    block = shape_blocks(u).get(("Z", tuple(n)))
    if block is None:
        return (PiPoly(), PiPoly(), PiPoly())
    return tuple(PiPoly(block[i]) for i in range(3))


def compute_reading(reading: Reading, forms, env, L: DomainLengths, n) -> tuple[tuple, list[str], str]:
    """Raw z-vector at index n for one reading, the admissibility notes, and the path used."""
    d = _data(reading, env, L)
    pairs = forms[reading.form]
    families = {}
    for a_fam, a_key, b_fam, b_key in pairs:
        families.setdefault(a_key, a_fam)
        families.setdefault(b_key, b_fam)
    problems = []
    for key in ("k", "m"):
        fam = families.get(key)
        msg = admissibility(fam, d[key], d["w" + key], L)
        if msg:
            problems.append(f"{fam}^{key}: {msg}")
    # the symmetric Y-Z mix goes through the closed form, anything else through the generic path
    sym = {(p[0], p[1], p[2], p[3]) for p in pairs}
    ykey = next((key for key, fam in families.items() if fam == "Y"), None)
    zkey = next((key for key, fam in families.items() if fam == "Z"), None)
    if ykey and zkey and ykey != zkey and sym == {("Y", ykey, "Z", zkey), ("Z", zkey, "Y", ykey)}:
        for shape, idx, z in yz_mix_closed_form(d[ykey], d["w" + ykey], d[zkey], d["w" + zkey], L):
            if idx == tuple(n):
                return z, problems, "closed-form"
        return (PiPoly(), PiPoly(), PiPoly()), problems, "closed-form"
    total = TrigVectorField.zero(L)
    for a_fam, a_key, b_fam, b_key in pairs:
        a = _shape_field(a_fam, d[a_key], d["w" + a_key], L)
        b = _shape_field(b_fam, d[b_key], d["w" + b_key], L)
        total = total + advect(a, b)
    return _z_from_field(total, n), problems, "generic"


def expected_vector(spec: Mapping, env) -> tuple[PiPoly, PiPoly, PiPoly]:
    scale = Fraction(spec["scale"])
    return tuple(PiPoly.mono(scale * evaluate(e, env), int(spec["pi"])) for e in spec["vector"])


def compare(computed: Sequence[PiPoly], expected: Sequence[PiPoly], live: Sequence[int]) -> tuple[str, PiPoly | None]:
    """Classify computed against expected on the live components."""
    a = [computed[i] for i in live]
    b = [expected[i] for i in live]
    if all(x.is_zero() for x in a) or all(y.is_zero() for y in b):
        return ("exact" if all(x.is_zero() for x in a) and all(y.is_zero() for y in b) else "mismatch"), None
    if list(a) == list(b):
        return "exact", PiPoly.mono(1)
    ratio = None
    for x, y in zip(a, b):
        if x.is_zero() != y.is_zero():
            return "mismatch", None
        if x.is_zero():
            continue
        r = x / y
        if ratio is None:
            ratio = r
        elif r != ratio:
            return "mismatch", None
    return "scaled", ratio


@dataclass
class ItemReport:
    kind: str          # "z", "beta", "det", "verdict"
    name: str
    q: int
    lengths: tuple[str, str, str]
    params: dict
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("exact", "scaled", "holds")

    def to_json(self) -> dict:
        return {"kind": self.kind, "name": self.name, "q": self.q, "lengths": list(self.lengths),
                "params": self.params, "status": self.status, "ok": self.ok, "detail": self.detail}


@dataclass
class StepReport:
    step_id: str
    alias: str
    ref: str
    items: list[ItemReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(it.ok for it in self.items)

    def failures(self) -> list[ItemReport]:
        return [it for it in self.items if not it.ok]

    def extend(self, other: "StepReport"):
        self.items.extend(other.items)

    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for it in self.items:
            counts[f"{it.kind}:{it.status}"] = counts.get(f"{it.kind}:{it.status}", 0) + 1
        return counts

    def to_json(self) -> dict:
        return {"step": self.step_id, "alias": self.alias, "ref": self.ref, "passed": self.passed,
                "summary": self.summary(), "items": [it.to_json() for it in self.items]}


def _env(q: int, params: Mapping[str, int], L: DomainLengths) -> dict[str, Fraction]:
    env = {"q": Fraction(q), "L1": L[0], "L2": L[1], "L3": L[2]}
    env.update({k: Fraction(v) for k, v in params.items()})
    return env


def _beta_items(step, qd: Quadruple, reading: Reading, env, L, q, lengths, params) -> list[ItemReport]:
    out = []
    d = _data(reading, env, L)
    for spec in qd.betas:
        want = PiPoly.mono(Fraction(spec["scale"]) * evaluate(spec["value"], env), int(spec["pi"]))
        pattern = spec["signs"]
        bad = []
        for signs in itertools.product((1, -1), repeat=3):
            if any(p != "*" and (1 if p == "+" else -1) != s for p, s in zip(pattern, signs)):
                continue
            got = beta(d[spec["w"]], d[spec["index"]], signs, L)
            if got != want:
                bad.append({"signs": signs, "got": got.to_json()})
        out.append(ItemReport("beta", f"{qd.name}:{spec['w']},{spec['index']}^{pattern}", q, lengths, params,
                              "exact" if not bad else "mismatch", {"expected": want.to_json(), "bad": bad}))
    return out


def replay(step: StepScript, q: int, L: DomainLengths, params: Mapping[str, int] | None = None) -> StepReport:
    """Recompute every quadruple, beta, determinant and the closing independence verdict."""
    if q < step.q_min:
        raise ScriptError(f"step {step.id} applies for q >= {step.q_min}")
    grid = [dict(params)] if params is not None else step.param_grid(q)
    lengths = tuple(str(v) for v in L.as_tuple())
    report = StepReport(step.id, step.alias, step.ref)
    for prm in grid:
        env = _env(q, prm, L)
        n = tuple(int(v) for v in _vec(step.target, env))
        live = live_components(n)
        chosen: dict[str, tuple] = {}
        shown: dict[str, tuple] = {}
        for qd in step.quadruples:
            exp = expected_vector(qd.expected, env)
            shown[qd.name] = exp
            results = []
            for reading in qd.readings:
                z, problems, path = compute_reading(reading, step.forms, env, L, n)
                status, ratio = compare(z, exp, live)
                results.append(ReadingResult(reading.label, z, status, ratio, problems, path, reading.note))
            hit = next((r for r in results if r.status != "mismatch"), None)
            chosen[qd.name] = (hit or results[0]).z
            report.items.append(ItemReport(
                "z", qd.name, q, lengths, prm,
                hit.status if hit else "mismatch",
                {"target": list(n), "expected": [c.to_json() for c in exp],
                 "reproduced_by": hit.label if hit else None,
                 "readings": [r.to_json() for r in results]},
            ))
            if qd.betas:
                report.items.extend(_beta_items(step, qd, qd.readings[0], env, L, q, lengths, prm))
        nvec = tuple(Fraction(v) for v in n)
        for dspec in step.determinants:
            a, b = dspec["cols"]
            got = det3([[PiPoly.mono(nvec[i]), chosen[a][i], chosen[b][i]] for i in range(3)])
            from_shown = det3([[PiPoly.mono(nvec[i]), shown[a][i], shown[b][i]] for i in range(3)])
            value = evaluate(dspec["value"], env)
            name = f"det(n|{a}|{b})"
            if dspec["kind"] == "value":
                want = PiPoly.mono(Fraction(dspec["scale"]) * value, int(dspec["pi"]))
                status, ratio = compare((got,), (want,), [0])
                algebra, _ = compare((from_shown,), (want,), [0])
                detail = {"expected": want.to_json(), "computed": got.to_json(),
                          "ratio": None if ratio is None else ratio.to_json(),
                          "from_displayed_vectors": from_shown.to_json(), "displayed_algebra": algebra}
            else:
                status = "holds" if got.is_zero() == (value == 0) else "mismatch"
                detail = {"condition": dspec["value"], "condition_value": str(value), "computed": got.to_json(),
                          "from_displayed_vectors": from_shown.to_json(),
                          "displayed_algebra": "holds" if from_shown.is_zero() == (value == 0) else "mismatch"}
            report.items.append(ItemReport("det", name, q, lengths, prm, status, detail))
        report.items.append(_verdict_item(step, chosen, n, L, q, lengths, prm))
    return report


def _numeric(z: Sequence[PiPoly]) -> tuple[Fraction, Fraction, Fraction]:
    # every z-vector here is homogeneous in pi; drop the common power
    pows = {p for c in z for p, _ in c.items()}
    if len(pows) > 1:
        raise ScriptError("z-vector is not homogeneous in pi")
    return tuple((c.as_monomial()[0] if not c.is_zero() else Fraction(0)) for c in z)


def independence(zs: Sequence[Sequence[PiPoly]], n, L: DomainLengths) -> dict:
    """How many independent projected directions the z-vectors give at index n."""
    nums = [_numeric(z) for z in zs]
    rank = projected_rank(nums, n, L)
    full = 2 if all(n) else 1
    out = {"projected_rank": rank, "needed": full, "holds": rank >= full}
    if len(nums) >= 2 and all(n):
        pairs = list(itertools.combinations(range(len(nums)), 2))
        out["pairs"] = [
            {"cols": [i, j],
             "criterion": check_lin_indep_pair(nums[i], nums[j], n, L),
             "index_vector_criterion": literal_pair_criterion(nums[i], nums[j], n)}
            for i, j in pairs
        ]
    return out


def _verdict_item(step, chosen, n, L, q, lengths, prm) -> ItemReport:
    cols = step.verdict["cols"]
    info = independence([chosen[c] for c in cols], n, L)
    info["kind"] = step.verdict["kind"]
    return ItemReport("verdict", step.verdict["kind"], q, lengths, prm, "holds" if info["holds"] else "mismatch", info)


def replay_all(scripts: Sequence[StepScript], q_values: Iterable[int], lengths: Iterable[DomainLengths]) -> list[StepReport]:
    lengths = list(lengths)
    q_values = list(q_values)
    out = []
    for step in scripts:
        agg = StepReport(step.id, step.alias, step.ref)
        for L in lengths:
            for q in q_values:
                agg.extend(replay(step, q, L))
        out.append(agg)
    return out


SCAN_HEADER = ("step", "q", "L1", "L2", "L3", "params", "pair", "det_index_vector", "det_gradient", "projected_rank", "verdict", "all_pairs_vanish")


def scan_determinants(step: StepScript, q_range: Iterable[int], L_samples: Iterable[DomainLengths]) -> list[tuple]:
    """One row per (q, L, params, column pair) with both determinant criteria and the rank verdict."""
    rows = []
    cols = step.verdict["cols"]
    for L in L_samples:
        for q in q_range:
            rep = replay(step, q, L)
            for item in rep.items:
                if item.kind != "verdict":
                    continue
                pairs = item.detail.get("pairs", [])
                env = _env(q, item.params, L)
                n = tuple(int(v) for v in _vec(step.target, env))
                zs = {}
                for z_item in rep.items:
                    if z_item.kind == "z" and z_item.params == item.params:
                        zs[z_item.name] = _chosen_numeric(z_item)
                vanish = bool(pairs) and all(not p["index_vector_criterion"] for p in pairs)
                prm = ";".join(f"{k}={v}" for k, v in sorted(item.params.items()))
                if not pairs:
                    rows.append((step.id, q, *map(str, L.as_tuple()), prm, "-", "", "",
                                 item.detail["projected_rank"], item.ok, False))
                for p in pairs:
                    a, b = (cols[i] for i in p["cols"])
                    za, zb = zs[a], zs[b]
                    d_index = det3([[Fraction(n[i]), za[i], zb[i]] for i in range(3)])
                    g = (Fraction(n[0]) / L[0], Fraction(n[1]) / L[1], -Fraction(n[2]) / L[2])
                    d_grad = det3([[g[i], za[i], zb[i]] for i in range(3)])
                    rows.append((step.id, q, *map(str, L.as_tuple()), prm, f"{a}|{b}", str(d_index), str(d_grad),
                                 item.detail["projected_rank"], item.ok, vanish))
    return rows


def _chosen_numeric(z_item: ItemReport) -> tuple[Fraction, Fraction, Fraction]:
    label = z_item.detail["reproduced_by"]
    readings = z_item.detail["readings"]
    r = next((x for x in readings if x["label"] == label), readings[0])
    return _numeric([PiPoly.from_json(c) for c in r["z"]])


# -- induction walk over the index decomposition -------------------------------

WALK_STAGES = ("r3", "r12", "axis", "lines", "corner")


def stage_indices(stage: str, q: int) -> list[tuple[int, int, int]]:
    """New indices at level q+1 handled by one stage of the induction step."""
    p = q + 1
    rng = range(0, p)
    out = []
    if stage == "r3":
        out = [(a, b, p) for a in rng for b in rng if (a == 0) + (b == 0) <= 1]
    elif stage == "r12":
        out = [(p, a, b) for a in rng for b in rng if (a == 0) + (b == 0) <= 1]
        out += [(a, p, b) for a in rng for b in rng if (a == 0) + (b == 0) <= 1]
    elif stage == "axis":
        out = [(p, 0, 0), (0, p, 0)]
    elif stage == "lines":
        out = [(p, p, a) for a in rng] + [(a, p, p) for a in rng] + [(p, a, p) for a in rng]
    elif stage == "corner":
        out = [(p, p, p)]
    else:
        raise ScriptError(f"unknown stage {stage!r}; choose from {WALK_STAGES}")
    return sorted(out)


def stage_targets(stage: str, q: int) -> list:
    from .eigen import ids_at

    return [e for n in stage_indices(stage, q) for e in ids_at("Z", n)]


@dataclass
class StageResult:
    stage: str
    targets: int
    brackets: int
    missing: list[str]

    @property
    def passed(self) -> bool:
        return not self.missing

    def to_json(self) -> dict:
        return {"stage": self.stage, "targets": self.targets, "brackets": self.brackets,
                "passed": self.passed, "missing": self.missing}


@dataclass
class WalkReport:
    q: int
    lengths: tuple
    order: tuple[str, ...]
    stages: list[StageResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages)

    def to_json(self) -> dict:
        return {"schema": "cylsat.walk/1", "q": self.q, "lengths": [str(v) for v in self.lengths],
                "order": list(self.order), "passed": self.passed, "stages": [s.to_json() for s in self.stages]}


def _scripted_rows(stage: str, q: int, L: DomainLengths, universe, scripts) -> dict[tuple, list]:
    """Projected bracket rows of the scripted quadruples for one stage, by target index.

    Only readings that are genuine symmetric brackets with admissible
    operands are used; other readings are not elements of the generation
    step and are skipped.
    """
    from .projector import project

    points: dict[tuple, list] = {}
    for step in scripts:
        if step.stage != stage or q < step.q_min:
            continue
        pairs_of = step.forms
        for prm in step.param_grid(q):
            env = _env(q, prm, L)
            n = tuple(int(v) for v in _vec(step.target, env))
            rows = points.setdefault(n, [])
            for qd in step.quadruples:
                for rd in qd.readings:
                    pairs = pairs_of[rd.form]
                    if {(a, b) for a, _, b, _ in pairs} != {("Y", "Z"), ("Z", "Y")}:
                        continue
                    d = _data(rd, env, L)
                    fams = {}
                    for a_fam, a_key, b_fam, b_key in pairs:
                        fams.setdefault(a_key, a_fam)
                        fams.setdefault(b_key, b_fam)
                    if any(admissibility(fams[key], d[key], d["w" + key], L) for key in ("k", "m")):
                        continue
                    total = TrigVectorField.zero(L)
                    for a_fam, a_key, b_fam, b_key in pairs:
                        total = total + advect(_shape_field(a_fam, d[a_key], d["w" + a_key], L),
                                               _shape_field(b_fam, d[b_key], d["w" + b_key], L))
                    rows.append(project(total, universe))
    return points


def induction_walk(q: int, L: DomainLengths | None = None, order: Sequence[str] = WALK_STAGES,
                   generators=None, mode: str = "brackets", scripts: Sequence[StepScript] | None = None) -> WalkReport:
    """Check each stage of the step q -> q+1 for the Z family.

    A stage passes when its targets lie in the span of the ids already
    known (C^q_C plus the targets of earlier stages) and a set of
    brackets applied once to span C^q_C.  The other indices those brackets
    touch must be accounted for by what is already known, so the order of
    stages can matter.

    ``mode="brackets"`` uses every mixed Y/Z pair (a generator, b in
    C^q_C) reaching a stage index.  ``mode="scripted"`` uses only the
    operand quadruples of the step scripts and checks the scripted target
    indices; the earlier stages are then taken as established in full.
    """
    from .eigen import cq_c, ids_at
    from .projector import Universe
    from .span import BracketTable, Subspace
    from .trig import UNIT

    if q < 4:
        raise ScriptError("the induction step starts at q = 4")
    if mode not in ("brackets", "scripted"):
        raise ScriptError(f"unknown walk mode {mode!r}")
    L = L or UNIT
    gens = sorted(generators if generators is not None else cq_c(4))
    base = cq_c(q)
    base_set = set(base)
    span_cap = max(q + max(max(a.k) for a in gens), 2 * q)
    universe = Universe(span_cap, L, ("Z",))
    table = BracketTable(universe)
    known = Subspace(universe)
    for e in base:
        if e.family == "Z":
            known.add_id(e)
    if mode == "scripted" and scripts is None:
        scripts = load_scripts()
    report = WalkReport(q, L.as_tuple(), tuple(order))
    for stage in order:
        work = known.copy()
        if mode == "scripted":
            # inner induction in script order (parameters increasing), with the
            # unscripted "analogous" cases taken as established
            points = _scripted_rows(stage, q, L, universe, scripts)
            for t in stage_targets(stage, q):
                if t.k not in points:
                    work.add_id(t)
            targets, missing, n_brackets = [], [], 0
            for n in points:
                local = work.copy()
                for c in points[n]:
                    local.add(c)
                n_brackets += len(points[n])
                for t in ids_at("Z", n):
                    targets.append(t)
                    if local.contains(t):
                        work.add_id(t)
                    else:
                        missing.append(t)
        else:
            targets = stage_targets(stage, q)
            idx = {t.k for t in targets}
            pairs = set()
            for a in gens:
                other = "Z" if a.family == "Y" else "Y"
                for n in idx:
                    axes = [{n[i] + a.k[i], abs(n[i] - a.k[i])} for i in range(3)]
                    for kb in itertools.product(*axes):
                        for b in ids_at(other, kb):
                            if b in base_set:
                                pairs.add((a, b) if not b < a else (b, a))
            for a, b in sorted(pairs):
                row = table.pair(a, b)
                if row:
                    work.add(_int_row(row))
            n_brackets = len(pairs)
            missing = [t for t in targets if not work.contains(t)]
        report.stages.append(StageResult(stage, len(targets), n_brackets, [str(t) for t in missing]))
        established = stage_targets(stage, q) if mode == "scripted" else [t for t in targets if t not in missing]
        for t in established:
            known.add_id(t)
    return report


def _int_row(row: Mapping[int, Fraction]) -> dict[int, int]:
    from .span import _scale_to_int

    return _scale_to_int(row)
