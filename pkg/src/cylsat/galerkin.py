"""Galerkin truncation of the controlled equation and a steering demo.

The state is a coordinate vector over a finite universe of Stokes
eigenfunctions.  The coordinate ODE is

    du/dt = -nu lam u - N(u) + eta(t) - h,   N_c(u) = sum_ab T[a,b,c] u_a u_b

with T[a,b,c] the c-coordinate of the Leray projection of (e_a . grad) e_b.
The basis is orthogonal, so T[a,b,c] <e_c,e_c> = <(e_a . grad) e_b, e_c>,
which is exactly antisymmetric in (b, c); the nonlinearity is energy neutral.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .eigen import EigenId, SetSpec, eigenfunction, enumerate_set
from .projector import Universe, project
from .trig import DomainLengths, PiPoly, advect, curl, inner

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"state became non-finite at step {step} (t = {t:g})")


class GalerkinConfigError(ValueError):
    pass


def _pi_value(p: PiPoly) -> float:
    return float(p)


@dataclass
class GalerkinSystem:
    universe: Universe
    nu: float
    ids: tuple[EigenId, ...]
    lam: np.ndarray            # eigenvalues of -Laplace (nu not applied)
    gram: np.ndarray           # <e, e>
    curl_gram: np.ndarray      # <curl e, curl e>
    tensor: np.ndarray         # T[a, b, c]
    exact: dict = field(default_factory=dict, repr=False)  # (a, b, c) -> Fraction coefficient of pi
    h: np.ndarray | None = None
    gram_exact: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, eid: EigenId) -> int:
        return self.ids.index(eid)

    def nonlinear(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abc->c", u, u, self.tensor, optimize=True)

    def jacobian_t(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """(dN/du)^T v."""
        tv = self.tensor @ v  # [a, b]
        return tv @ u + tv.T @ u

    def rhs(self, u: np.ndarray, eta: np.ndarray, linear_only: bool = False) -> np.ndarray:
        out = -self.nu * self.lam * u + eta
        if self.h is not None:
            out = out - self.h
        if not linear_only:
            out = out - self.nonlinear(u)
        return out

    def energy(self, u: np.ndarray) -> float:
        return 0.5 * float(np.sum(self.gram * u * u))

    def antisymmetry_defect(self) -> Fraction:
        """max |<(e_a.grad)e_b, e_c> + <(e_a.grad)e_c, e_b>| over the exact tensor (should be 0)."""
        g = {e: self.gram_exact[i] for i, e in enumerate(self.ids)}
        worst = Fraction(0)
        for (a, b, c), v in self.exact.items():
            other = self.exact.get((a, c, b), Fraction(0))
            d = abs(v * g[self.ids[c]] + other * g[self.ids[b]])
            worst = max(worst, d)
        return worst


def assemble(universe: Universe, nu: float, h: dict[EigenId, float] | None = None) -> GalerkinSystem:
    """Exact tensor over the universe, then converted to floating point."""
    L = universe.L
    ids = universe.ids
    n = len(ids)
    efs = [eigenfunction(e, L) for e in ids]
    lam = np.array([_pi_value(ef.eigenvalue) for ef in efs])
    gram_exact = []
    for ef in efs:
        v, p = inner(ef.field, ef.field).as_monomial()
        if p != 0:
            raise GalerkinConfigError("unexpected power of pi in a Gram factor")
        gram_exact.append(v)
    gram = np.array([float(v) for v in gram_exact])
    curl_gram = np.array([_pi_value(inner(curl(ef.field), curl(ef.field))) for ef in efs])
    tensor = np.zeros((n, n, n))
    exact = {}
    idx = universe.index
    for a, ea in enumerate(efs):
        for b, eb in enumerate(efs):
            coords = project(advect(ea.field, eb.field), universe, truncate=True)
            for eid, coeff in coords.coeffs.items():
                c = idx[eid]
                v, p = coeff.as_monomial()
                if p != 1:
                    raise GalerkinConfigError("advection coefficient is not a single power of pi")
                exact[(a, b, c)] = v
                tensor[a, b, c] = float(v) * math.pi
    hv = None
    if h:
        hv = np.zeros(n)
        for eid, val in h.items():
            hv[idx[eid]] = val
    return GalerkinSystem(universe, float(nu), ids, lam, gram, curl_gram, tensor, exact, hv, gram_exact)


def v_norm(sys: GalerkinSystem, coords: np.ndarray) -> float:
    return float(math.sqrt(max(0.0, float(np.sum(sys.curl_gram * coords * coords)))))


# -- controls and integration ----------------------------------------------------

@dataclass
class ControlParam:
    """Piecewise-constant coefficients on a uniform grid over (0, T).

    ``basis`` rows are control directions in state coordinates; the control at
    time t is values[interval(t)] @ basis.
    """

    basis: np.ndarray            # (m, n)
    values: np.ndarray           # (intervals, m)
    T: float

    @classmethod
    def zero(cls, n: int, T: float, intervals: int = 1, basis: np.ndarray | None = None) -> "ControlParam":
        b = np.eye(n) if basis is None else basis
        return cls(b, np.zeros((intervals, b.shape[0])), T)

    @property
    def intervals(self) -> int:
        return self.values.shape[0]

    def eta(self, interval: int) -> np.ndarray:
        return self.values[interval] @ self.basis

    def refined(self, factor: int = 2) -> "ControlParam":
        return ControlParam(self.basis, np.repeat(self.values, factor, axis=0), self.T)


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    vnorm: np.ndarray
    distance: np.ndarray | None = None

    def final(self) -> np.ndarray:
        return self.states[-1]

    def write_csv(self, path: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "energy", "v_norm", "distance_to_target"])
            for i in range(len(self.t)):
                d = "" if self.distance is None else f"{self.distance[i]:.12e}"
                w.writerow([f"{self.t[i]:.12e}", f"{self.energy[i]:.12e}", f"{self.vnorm[i]:.12e}", d])


def _steps(T: float, dt: float) -> int:
    n = round(T / dt)
    if n <= 0 or abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise GalerkinConfigError(f"T/dt must be a positive integer (T={T}, dt={dt})")
    return n


def _step_interval(steps: int, control: ControlParam | None) -> int:
    if control is None:
        return steps
    if steps % control.intervals:
        raise GalerkinConfigError(f"{steps} steps do not split evenly into {control.intervals} control intervals")
    return steps // control.intervals


def integrate(sys: GalerkinSystem, u0: np.ndarray, control: ControlParam | None, T: float, dt: float,
              target: np.ndarray | None = None, linear_only: bool = False, keep_stages: bool = False):
    """Classical RK4 with fixed step; aborts with the step index on a non-finite state."""
    steps = _steps(T, dt)
    per = _step_interval(steps, control)
    n = sys.n
    u = np.array(u0, dtype=float)
    states = np.empty((steps + 1, n))
    states[0] = u
    stages = [] if keep_stages else None
    zero = np.zeros(n)
    for s in range(steps):
        eta = control.eta(s // per) if control is not None else zero
        k1 = sys.rhs(u, eta, linear_only)
        x2 = u + 0.5 * dt * k1
        k2 = sys.rhs(x2, eta, linear_only)
        x3 = u + 0.5 * dt * k2
        k3 = sys.rhs(x3, eta, linear_only)
        x4 = u + dt * k3
        k4 = sys.rhs(x4, eta, linear_only)
        if keep_stages:
            stages.append((u, x2, x3, x4))
        u = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise IntegrationError(s + 1, (s + 1) * dt)
        states[s + 1] = u
    t = np.linspace(0.0, steps * dt, steps + 1)
    energy = 0.5 * np.einsum("i,ti,ti->t", sys.gram, states, states)
    vn = np.sqrt(np.einsum("i,ti,ti->t", sys.curl_gram, states, states))
    dist = None
    if target is not None:
        diff = states - target
        dist = np.sqrt(np.einsum("i,ti,ti->t", sys.curl_gram, diff, diff))
    traj = Trajectory(t, states, energy, vn, dist)
    return (traj, stages) if keep_stages else traj


def _cost_and_grad(sys: GalerkinSystem, u0, control: ControlParam, T, dt, target):
    """Squared V-distance at T and its exact gradient through the RK4 scheme (discrete adjoint)."""
    traj, stages = integrate(sys, u0, control, T, dt, keep_stages=True)
    steps = len(stages)
    per = steps // control.intervals
    diff = traj.final() - target
    cost = float(np.sum(sys.curl_gram * diff * diff))
    lam = 2.0 * sys.curl_gram * diff
    grad_eta = np.zeros((control.intervals, sys.n))
    nu_lam = sys.nu * sys.lam

    def jt(x, v):
        return -nu_lam * v - sys.jacobian_t(x, v)

    for s in range(steps - 1, -1, -1):
        u, x2, x3, x4 = stages[s]
        a4 = dt / 6.0 * lam
        a3 = dt / 3.0 * lam
        a2 = dt / 3.0 * lam
        a1 = dt / 6.0 * lam
        g4 = jt(x4, a4)
        a3 = a3 + dt * g4
        g3 = jt(x3, a3)
        a2 = a2 + 0.5 * dt * g3
        g2 = jt(x2, a2)
        a1 = a1 + 0.5 * dt * g2
        g1 = jt(u, a1)
        grad_eta[s // per] += a1 + a2 + a3 + a4
        lam = lam + g1 + g2 + g3 + g4
    grad = grad_eta @ control.basis.T
    return cost, grad


@dataclass
class SteerResult:
    control: ControlParam
    distance: float
    baseline: float
    iterations: int
    evaluations: int
    message: str
    converged: bool

    def to_json(self) -> dict:
        return {"distance": self.distance, "baseline": self.baseline,
                "ratio": self.distance / self.baseline if self.baseline else 0.0,
                "iterations": self.iterations, "evaluations": self.evaluations,
                "message": self.message, "converged": self.converged,
                "intervals": self.control.intervals, "control_dim": int(self.control.basis.shape[0])}


def steer(sys: GalerkinSystem, u0: np.ndarray, target: np.ndarray, T: float, dt: float,
          control_basis: np.ndarray, intervals: int = 10, maxiter: int = 200, seed: int = 0,
          init: ControlParam | None = None, init_scale: float = 1e-3) -> SteerResult:
    """Minimise ||u(T) - target||_V over piecewise-constant controls with L-BFGS-B.

    Stagnation is reported through ``converged`` and ``message``.
    """
    m = control_basis.shape[0]
    baseline_traj = integrate(sys, u0, None, T, dt)
    diff = baseline_traj.final() - target
    baseline = v_norm(sys, diff)
    if init is not None:
        x0 = init.values.ravel().copy()
        intervals = init.intervals
    else:
        rng = np.random.default_rng(seed)
        x0 = init_scale * rng.standard_normal(intervals * m)
    shape = (intervals, m)

    def fun(x):
        ctrl = ControlParam(control_basis, x.reshape(shape), T)
        c, g = _cost_and_grad(sys, u0, ctrl, T, dt, target)
        return c, g.ravel()

    if baseline == 0.0 and not np.any(target) and not np.any(u0) and sys.h is None:
        ctrl = ControlParam(control_basis, np.zeros(shape), T)
        return SteerResult(ctrl, 0.0, 0.0, 0, 0, "target already reached", True)
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter})
    best = res.x
    if init is not None and fun(x0)[0] <= res.fun:
        best = x0
    ctrl = ControlParam(control_basis, best.reshape(shape), T)
    final = integrate(sys, u0, ctrl, T, dt).final()
    return SteerResult(ctrl, v_norm(sys, final - target), baseline, int(res.nit), int(res.nfev),
                       str(res.message), bool(res.success))


# -- control directions from the generated subspace -------------------------------

def control_basis(seed: Sequence[EigenId], universe: Universe) -> tuple[np.ndarray, dict]:
    """Rows spanning the Galerkin projection of G^1 = span(seed + brackets of seed pairs).

    Works inside the truncation: the projection of B(a, b) onto the
    universe only involves pairs whose indices can reach it.  Stops early
    once the whole universe is spanned.
    """
    from .span import Subspace, _scale_to_int

    space = Subspace(universe)
    seed = sorted(seed)
    for e in seed:
        if e in universe:
            space.add_id(e)
    info = {"from_seed": space.dim, "from_brackets": 0, "universe": len(universe)}
    if space.dim < len(universe):
        cap = universe.cap
        for i, a in enumerate(seed):
            for b in seed[i:]:
                if any(min(abs(a.k[x] - b.k[x]), a.k[x] + b.k[x]) > cap for x in range(3)):
                    continue
                L = universe.L
                coords = project(advect(eigenfunction(a, L).field, eigenfunction(b, L).field)
                                 + advect(eigenfunction(b, L).field, eigenfunction(a, L).field), universe, truncate=True)
                row = {universe.index[e]: c.as_monomial()[0] for e, c in coords.coeffs.items()}
                if row and space.add(_scale_to_int(row)):
                    info["from_brackets"] += 1
                if space.dim == len(universe):
                    break
            if space.dim == len(universe):
                break
    basis = np.zeros((space.dim, len(universe)))
    for r, row in enumerate(space.rows()):
        vec = np.zeros(len(universe))
        for c, x in row.items():
            vec[c] = x
        basis[r] = vec / np.linalg.norm(vec)
    info["dim"] = space.dim
    return basis, info


# -- experiment config -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    cap: int = 2
    lengths: tuple[str, str, str] = ("1", "1", "1")
    nu: float = 0.1
    T: float = 1.0
    dt: float = 0.01
    intervals: int = 10
    control_seed: str = "thm33"
    target: dict = field(default_factory=lambda: {"id": {"family": "Y", "k": [1, 1, 1], "j": 1}, "scale": 0.5})
    u0: list = field(default_factory=list)
    h: list = field(default_factory=list)
    maxiter: int = 200
    seed: int = 0

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known - {"optimizer"}
        if extra:
            raise GalerkinConfigError(f"unknown config keys: {sorted(extra)}")
        kw = {k: v for k, v in data.items() if k in known}
        if "optimizer" in data:
            kw["maxiter"] = int(data["optimizer"].get("maxiter", cls.maxiter))
        if "lengths" in kw:
            kw["lengths"] = tuple(str(v) for v in kw["lengths"])
        cfg = cls(**kw)
        if cfg.nu <= 0 or cfg.T <= 0 or cfg.dt <= 0:
            raise GalerkinConfigError("nu, T and dt must be positive")
        return cfg

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"cap": self.cap, "lengths": list(self.lengths), "nu": self.nu, "T": self.T, "dt": self.dt,
                "intervals": self.intervals, "control_seed": self.control_seed, "target": self.target,
                "u0": self.u0, "h": self.h, "optimizer": {"method": "L-BFGS-B", "maxiter": self.maxiter},
                "seed": self.seed}

    @property
    def L(self) -> DomainLengths:
        return DomainLengths.parse(self.lengths)


def _coords_from(items: list, sys: GalerkinSystem) -> np.ndarray:
    v = np.zeros(sys.n)
    for it in items:
        v[sys.index(EigenId.from_json(it["id"]))] += float(it.get("scale", it.get("value", 1.0)))
    return v


def run_experiment(cfg: ExperimentConfig) -> dict:
    universe = Universe(cfg.cap, cfg.L)
    sys = assemble(universe, cfg.nu)
    if cfg.h:
        sys.h = _coords_from(cfg.h, sys)
    targets = cfg.target if isinstance(cfg.target, list) else [cfg.target]
    target = _coords_from(targets, sys)
    u0 = _coords_from(cfg.u0, sys)
    seed_ids = enumerate_set(SetSpec.parse(cfg.control_seed))
    basis, info = control_basis(seed_ids, universe)
    res = steer(sys, u0, target, cfg.T, cfg.dt, basis, cfg.intervals, cfg.maxiter, cfg.seed)
    controlled = integrate(sys, u0, res.control, cfg.T, cfg.dt, target=target)
    free = integrate(sys, u0, None, cfg.T, cfg.dt, target=target)
    return {"config": cfg.to_json(), "modes": sys.n, "control_basis": info, "steer": res.to_json(),
            "controlled": controlled, "uncontrolled": free}
