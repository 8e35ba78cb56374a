"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 resource or universe-cap error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

from . import __version__
from .eigen import EigenError, EigenId, SetSpec, count_report, eigenfunction, enumerate_set, load_id_list, validate_eigenfunction
from .projector import ParityError, Universe, UniverseOverflow
from .trig import DomainLengths

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

log = logging.getLogger("cylsat")


class ConfigError(ValueError):
    pass


def claims(key: str) -> list[str]:
    data = json.loads(resources.files("cylsat").joinpath("data/claims.json").read_text())
    return list(data["claims"].get(key, []))


@dataclass
class RunConfig:
    lengths: DomainLengths
    set_spec: SetSpec | None = None
    qmax: int = 5
    cap: int | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"lengths": [str(v) for v in self.lengths.as_tuple()], "qmax": self.qmax, "cap": self.cap}
        if self.set_spec is not None:
            out["set"] = self.set_spec.to_json()
        out.update(self.extra)
        return out


def parse_lengths(values) -> DomainLengths:
    try:
        L = DomainLengths.parse(values)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad lengths {values}: {exc}") from None
    return L


def parse_set(text: str, file: str | None = None) -> SetSpec:
    try:
        spec = SetSpec.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if spec.selector == "custom":
        if not file:
            raise ConfigError("--set custom needs --file with a JSON id list")
        try:
            ids = load_id_list(file)
        except (OSError, ValueError, KeyError, EigenError) as exc:
            raise ConfigError(f"cannot read id list {file}: {exc}") from None
        spec = SetSpec("custom", None, tuple(ids))
    return spec


def parse_q_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad q range {text!r}; use 4..12 or 4,5,6") from None
    if not out or min(out) < 4:
        raise ConfigError("q values must be >= 4")
    return out


def parse_id(text: str) -> EigenId:
    """``Y1(1,1,1)``, ``Z(0,0,0)`` or ``Y:1,1,1:2``."""
    t = text.strip().replace(" ", "")
    try:
        if ":" in t:
            fam, k, *rest = t.split(":")
            j = int(rest[0]) if rest else 1
        else:
            fam, tail = t[0], t[1:]
            j_text, k = tail.split("(", 1)
            j = int(j_text) if j_text else 1
            k = k.rstrip(")")
        return EigenId(fam.upper(), tuple(int(v) for v in k.split(",")), j)
    except (ValueError, IndexError, EigenError) as exc:
        raise ConfigError(f"bad eigenfunction id {text!r}: {exc}") from None


def _dump(obj, path: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _out_path(out: str | None, name: str) -> str | None:
    if out is None:
        return None
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, name)


# -- commands -------------------------------------------------------------------

def cmd_enumerate(args) -> int:
    spec = parse_set(args.set, args.file)
    rep = count_report(spec)
    rep["ids"] = [str(e) for e in enumerate_set(spec)]
    _dump(rep, args.out)
    print(f"{spec.name}: {rep['count']} ids" + (f" (stated {rep['stated_count']})" if "stated_count" in rep else ""),
          file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = parse_set(args.set, args.file)
    L = parse_lengths(args.lengths)
    reports = [validate_eigenfunction(eigenfunction(e, L)) for e in enumerate_set(spec)]
    bad = [r for r in reports if not r.ok]
    _dump({"set": spec.to_json(), "lengths": [str(v) for v in L.as_tuple()], "checked": len(reports),
           "failed": [r.to_json() for r in bad], "references": claims("eigen")}, args.out)
    print(f"validated {len(reports)} eigenfunctions, {len(bad)} failures", file=sys.stderr)
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_bracket(args) -> int:
    from .bracket import bracket_generic

    L = parse_lengths(args.lengths)
    a, b = parse_id(args.a), parse_id(args.b)
    cap = args.cap or max(max(a.k) + max(b.k), 1)
    res = bracket_generic(eigenfunction(a, L), eigenfunction(b, L), Universe(cap, L))
    _dump({"a": a.to_json(), "b": b.to_json(), "lengths": [str(v) for v in L.as_tuple()], **res.to_json()}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .span import required_cap, verify_saturation

    spec = parse_set(args.set, args.file)
    L = parse_lengths(args.lengths)
    seed = enumerate_set(spec)
    if not seed:
        raise ConfigError("the seed set is empty")
    scope = "rectangle" if spec.selector in ("rect_q", "cq_r") else "cylinder"
    families = ("Y",) if scope == "rectangle" and all(e.family == "Y" for e in seed) else ("Y", "Z")
    q_values = list(range(4, args.qmax + 1))
    if not q_values:
        raise ConfigError("--qmax must be at least 4")
    cap = args.cap if args.cap is not None else required_cap(seed, 1)
    universe = Universe(cap, L, families)
    config = RunConfig(L, spec, args.qmax, cap, args.out,
                       {"scope": scope, "lazy": not args.full, "universe_size": len(universe)}).to_json()
    report = verify_saturation(seed, universe, q_values, scope=scope, lazy=not args.full, config=config)
    report.references = claims("saturation_cor" if spec.selector == "cor310" else
                               "rectangle" if scope == "rectangle" else "saturation")
    data = report.to_json()
    timing = data.pop("timing")
    out = args.out
    _dump(data, out)
    if out:
        _dump(timing, out[:-5] + ".timing.json" if out.endswith(".json") else out + ".timing.json")
        dims_csv = out[:-5] + ".dims.csv" if out.endswith(".json") else out + ".dims.csv"
        with open(dims_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["level", "dim"])
            for j, d in enumerate(report.dims):
                w.writerow([j, d])
        if not args.no_plots:
            from .plots import plot_dims

            plot_dims(dims_csv, dims_csv[:-4] + ".png")
    for v in report.per_q:
        line = f"q={v.q}: " + ("pass" if v.verdict else "FAIL")
        if v.verdict:
            line += f" (targets in G^{v.found_at}, needed G^{v.level})"
        else:
            line += f" missing {', '.join(v.missing[:10])}" + (" ..." if len(v.missing) > 10 else "")
        print(line, file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_replay(args) -> int:
    from .replay import DEFAULT_LENGTHS, load_scripts, replay_all, scan_determinants, select_steps, SCAN_HEADER

    scripts = load_scripts(args.scripts)
    if args.all:
        chosen = scripts
    elif args.step:
        try:
            chosen = select_steps(scripts, args.step)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    else:
        raise ConfigError("give --step KEY or --all")
    qs = parse_q_range(args.q)
    lengths = [parse_lengths(args.lengths)] if args.lengths else [DomainLengths.parse(v) for v in DEFAULT_LENGTHS]
    reports = replay_all(chosen, qs, lengths)
    ok = all(r.passed for r in reports)
    summary = {"q": qs, "lengths": [[str(v) for v in L.as_tuple()] for L in lengths], "passed": ok,
               "steps": [{"step": r.step_id, "alias": r.alias, "ref": r.ref, "passed": r.passed,
                          "summary": r.summary()} for r in reports]}
    if args.out:
        _dump(summary, _out_path(args.out, "replay_summary.json"))
        for r in reports:
            _dump(r.to_json(), _out_path(args.out, f"step_{r.step_id}.json"))
        if args.scan:
            with open(_out_path(args.out, "determinant_scan.csv"), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(SCAN_HEADER)
                for step in chosen:
                    w.writerows(scan_determinants(step, qs, lengths))
    else:
        _dump(summary, None)
    for r in reports:
        line = f"{r.step_id} [{r.alias}]: " + ("pass" if r.passed else "FAIL")
        if not r.passed:
            fails = {}
            for it in r.failures():
                fails[(it.kind, it.name)] = fails.get((it.kind, it.name), 0) + 1
            line += " " + ", ".join(f"{k}/{n} x{c}" for (k, n), c in sorted(fails.items()))
        print(line, file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_walk(args) -> int:
    from .replay import WALK_STAGES, induction_walk

    L = parse_lengths(args.lengths)
    order = tuple(args.order.split(",")) if args.order else WALK_STAGES
    if sorted(order) != sorted(WALK_STAGES):
        raise ConfigError(f"--order must be a permutation of {','.join(WALK_STAGES)}")
    out = []
    ok = True
    for q in parse_q_range(args.q):
        rep = induction_walk(q, L, order, mode=args.mode)
        ok &= rep.passed
        out.append(rep.to_json())
        for s in rep.stages:
            print(f"q={q} {s.stage}: " + ("pass" if s.passed else "FAIL missing " + ", ".join(s.missing)),
                  file=sys.stderr)
    _dump({"mode": args.mode, "walks": out, "references": claims("walk")}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    from .galerkin import ExperimentConfig, GalerkinConfigError, IntegrationError, run_experiment

    if not args.steer:
        raise ConfigError("give --steer CONFIG.json")
    try:
        cfg = ExperimentConfig.load(args.steer)
    except (OSError, json.JSONDecodeError, GalerkinConfigError, TypeError) as exc:
        raise ConfigError(f"cannot load {args.steer}: {exc}") from None
    try:
        res = run_experiment(cfg)
    except IntegrationError as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except GalerkinConfigError as exc:
        raise ConfigError(str(exc)) from None
    st = res["steer"]
    summary = {k: v for k, v in res.items() if k not in ("controlled", "uncontrolled")}
    summary["references"] = claims("steering")
    out = args.out or os.path.splitext(args.steer)[0] + "_out"
    _dump(summary, _out_path(out, "steer.json"))
    paths = {"controlled": _out_path(out, "trajectory_controlled.csv"),
             "uncontrolled": _out_path(out, "trajectory_uncontrolled.csv")}
    res["controlled"].write_csv(paths["controlled"])
    res["uncontrolled"].write_csv(paths["uncontrolled"])
    if not args.no_plots:
        from .plots import plot_trajectories

        plot_trajectories(paths, _out_path(out, "trajectories.png"))
    print(f"achieved V-distance {st['distance']:.6e} (uncontrolled {st['baseline']:.6e}, ratio {st['ratio']:.3e}); "
          f"optimizer: {st['message']}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cylsat", description="Exact saturation checks for Stokes eigenfunctions in a cylinder.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def lengths(sp, default=("1", "1", "1")):
        sp.add_argument("--lengths", nargs=3, metavar=("L1", "L2", "L3"), default=list(default),
                        help="domain lengths as integers or fractions like 17/2")

    sp = sub.add_parser("enumerate", help="list an eigenfunction set")
    sp.add_argument("--set", required=True)
    sp.add_argument("--file")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("validate", help="exact divergence, boundary and eigen-relation checks")
    sp.add_argument("--set", default="thm33")
    sp.add_argument("--file")
    lengths(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("bracket", help="projected symmetric bracket of two eigenfunctions")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--cap", type=int)
    lengths(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bracket)

    sp = sub.add_parser("verify", help="check C^q inside G^(q-1) for q = 4..qmax")
    sp.add_argument("--set", required=True)
    sp.add_argument("--file")
    lengths(sp)
    sp.add_argument("--qmax", type=int, default=5)
    sp.add_argument("--cap", type=int, help="universe cap (default: twice the largest seed index)")
    sp.add_argument("--full", action="store_true", help="build every level up to q-1 instead of stopping early")
    sp.add_argument("--out")
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("replay", help="recompute the scripted induction steps")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--step")
    g.add_argument("--all", action="store_true")
    sp.add_argument("--q", default="4..12")
    sp.add_argument("--lengths", nargs=3, metavar=("L1", "L2", "L3"))
    sp.add_argument("--scripts", help="alternative step-script JSON")
    sp.add_argument("--scan", action="store_true", help="also write the determinant scan CSV")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("walk", help="stage-by-stage check of one induction step")
    sp.add_argument("--q", default="4")
    lengths(sp)
    sp.add_argument("--mode", choices=("brackets", "scripted"), default="scripted")
    sp.add_argument("--order", help="comma-separated stage order")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_walk)

    sp = sub.add_parser("simulate", help="Galerkin steering experiment")
    sp.add_argument("--steer", required=True, metavar="CONFIG")
    sp.add_argument("--out")
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UniverseOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (EigenError, ParityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
