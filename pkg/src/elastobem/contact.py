"""Uzawa iterations for unilateral and two-body frictional contact.

Multipliers are constant per contact element and time step. Each step vector is
laid out as [normal block | tangential block], one entry per contact element. The
contact traction is lambda_perp (-n) + lambda_par tau, so a positive normal
multiplier pushes the boundary inward.

The displacement depends affinely on the multipliers. The iteration therefore
works on that affine map, applied through its block-Toeplitz compliance, and
performs one final marching solve with the converged multipliers. The iterates
are the same as re-solving the full system in every sweep.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .assembly import (BlockToeplitzOperator, LowerToeplitz, SpaceBases, assemble_mass_Mstar,
                       assemble_mass_Mtilde, gap_moments)
from .errors import ConfigError, NonConvergenceError
from .mesh import BoundaryMesh
from .mot_solver import Factorization, SolutionHistory, factorize_S0, march
from .timebasis import TimeGrid

LAWS = ("none", "tresca", "coulomb")


@dataclass(frozen=True)
class FrictionLaw:
    """variant: 'none', 'tresca' (threshold per contact element) or 'coulomb' (coefficient).

    coulomb_timing: 'same_sweep' clamps with the freshly projected normal multipliers,
    'previous' with those of the previous iterate.
    """
    variant: str = "none"
    value: object = 0.0
    coulomb_timing: str = "same_sweep"

    def __post_init__(self):
        v = str(self.variant).lower()
        if v in ("frictionless", "no", "0"):
            v = "none"
        if v not in LAWS:
            raise ConfigError(f"unknown friction law {self.variant!r}")
        object.__setattr__(self, "variant", v)
        val = np.asarray(self.value, dtype=float)
        if np.any(~np.isfinite(val)) or np.any(val < 0):
            field_name = "F_c" if v == "coulomb" else "F"
            raise ConfigError(f"friction.{field_name} must be finite and >= 0")
        if v == "coulomb" and val.ndim != 0:
            raise ConfigError("Coulomb coefficient must be a scalar")
        if self.coulomb_timing not in ("same_sweep", "previous"):
            raise ConfigError(f"unknown coulomb_timing {self.coulomb_timing!r}")

    @classmethod
    def frictionless(cls):
        return cls("none", 0.0)

    @classmethod
    def tresca(cls, F):
        return cls("tresca", F)

    @classmethod
    def coulomb(cls, F_c, timing="same_sweep"):
        return cls("coulomb", F_c, timing)


@dataclass(frozen=True)
class UzawaConfig:
    """rho_tangential, if set, replaces rho on the tangential multipliers. A positive
    per-component step keeps the fixed points (the projection acts per component)."""
    rho: float
    eps: float
    max_iters: int = 20000
    rho_tangential: float | None = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError("uzawa.rho must be > 0")
        if self.rho_tangential is not None and not self.rho_tangential > 0:
            raise ConfigError("uzawa.rho_t must be > 0")
        if not self.eps > 0:
            raise ConfigError("uzawa.eps must be > 0")
        if int(self.max_iters) < 1:
            raise ConfigError("uzawa.max_iters must be >= 1")


@dataclass
class MultiplierField:
    """Lambda[l] = [normal (n_lam) | tangential (n_lam)] per step l."""
    Lambda: np.ndarray
    n_lam: int

    @property
    def J_perp(self) -> np.ndarray:
        return np.arange(self.n_lam)

    @property
    def J_par(self) -> np.ndarray:
        return np.arange(self.n_lam, 2 * self.n_lam)

    @property
    def normal(self) -> np.ndarray:
        return self.Lambda[:, :self.n_lam]

    @property
    def tangential(self) -> np.ndarray:
        return self.Lambda[:, self.n_lam:]


def project_pr_C(W, thresholds, J_perp, J_par) -> np.ndarray:
    """max(W_j, 0) on normal indices, clamp to [-F_j, F_j] on tangential indices."""
    W = np.asarray(W, dtype=float)
    thr = np.broadcast_to(np.asarray(thresholds, dtype=float), np.shape(J_par))
    if np.any(thr < 0):
        raise ConfigError("friction thresholds must be >= 0")
    out = W.copy()
    out[..., J_perp] = np.maximum(W[..., J_perp], 0.0)
    out[..., J_par] = np.clip(W[..., J_par], -thr, thr)
    return out


def coulomb_thresholds(Lambda, F_c) -> np.ndarray:
    """F_c times the normal multiplier of the same element (shape (..., n_lam))."""
    if isinstance(Lambda, MultiplierField):
        normal = Lambda.normal
    else:
        L = np.asarray(Lambda, dtype=float)
        normal = L[..., :L.shape[-1] // 2]
    return np.asarray(F_c, dtype=float) * np.maximum(normal, 0.0)


@dataclass
class GapField:
    """Space-time interpolant of the gap: nodal samples at t_0..t_N and r-basis increments."""
    nodal: np.ndarray
    increments: np.ndarray
    moments: np.ndarray


def interpolate_gap(gap, mesh: BoundaryMesh, bases: SpaceBases, grid: TimeGrid) -> GapField:
    """gap(t, x, y, nx, ny) -> values at contact nodes; zero elsewhere.

    The interpolant is a combination of ramp functions, so its value at t_0 is zero.
    """
    nodal = np.zeros((grid.N + 1, mesh.n_nodes))
    if gap is not None and bases.n_lam:
        nodes = np.unique(mesh.elements[bases.lam_elements].ravel())
        nn = mesh.node_normals(bases.lam_elements)
        t = grid.nodes[:, None]
        x = mesh.nodes[nodes, 0][None, :]
        y = mesh.nodes[nodes, 1][None, :]
        vals = np.broadcast_to(np.asarray(gap(t, x, y, nn[nodes, 0][None, :], nn[nodes, 1][None, :]),
                                          dtype=float), (grid.N + 1, len(nodes)))
        if not np.all(np.isfinite(vals)):
            raise ConfigError("gap function is not finite on the contact part")
        nodal[:, nodes] = vals
    nodal[0] = 0.0
    inc = np.diff(nodal, axis=0)
    return GapField(nodal, inc, gap_moments(mesh, bases, grid, nodal))


@dataclass
class ContactProblem:
    """Affine data of one contact iteration: S X = F + E Lambda, w = Mt X - G."""
    op: BlockToeplitzOperator
    fact: Factorization
    rhs: np.ndarray
    inject: np.ndarray
    inject_rows: slice
    Mtilde: LowerToeplitz
    disp_slice: slice
    G: np.ndarray
    n_lam: int
    scale: np.ndarray
    gap_nodal: np.ndarray
    _compliance: np.ndarray = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.rhs.shape[0]

    def solve(self, Lambda) -> np.ndarray:
        F = self.rhs.copy()
        if Lambda is not None:
            F[:, self.inject_rows] += Lambda @ self.inject.T
        return march(self.op, F, self.fact)

    def residual_map(self, X) -> np.ndarray:
        """w = Mt U - G for a history X (N, D)."""
        return self.Mtilde.apply(X[:, self.disp_slice]) - self.G

    def compliance(self) -> np.ndarray:
        """Blocks A[l] (2 n_lam x 2 n_lam) of the Toeplitz map Lambda -> Mt U."""
        if self._compliance is None:
            q = 2 * self.n_lam
            F = np.zeros((self.N, self.op.D, q))
            F[0, self.inject_rows, :] = self.inject
            X = march(self.op, F, self.fact)
            self._compliance = self.Mtilde.apply(X[:, self.disp_slice, :])
            del X
        return self._compliance


def _scale(mesh, bases, dt):
    lens = mesh.length[bases.lam_elements]
    return np.concatenate([lens, lens]) * dt


def unilateral_problem(op: BlockToeplitzOperator, bases: SpaceBases, grid: TimeGrid, F_u,
                       gap: GapField | None = None, fact: Factorization | None = None) -> ContactProblem:
    """F_u: load moments in the displacement rows, shape (N, 2 n_u)."""
    mesh = bases.mesh
    rhs = np.zeros((grid.N, op.D))
    rhs[:, op.layout["u"]] = F_u
    nl = bases.n_lam
    G = gap.moments if gap is not None else np.zeros((grid.N, 2 * nl))
    gn = gap.nodal if gap is not None else np.zeros((grid.N + 1, mesh.n_nodes))
    return ContactProblem(op, fact or factorize_S0(op), rhs, assemble_mass_Mstar(mesh, bases),
                          op.layout["u"], assemble_mass_Mtilde(mesh, bases, grid), op.layout["u"],
                          G, nl, _scale(mesh, bases, grid.dt), gn)


def bilateral_problem(op: BlockToeplitzOperator, bases: SpaceBases, grid: TimeGrid, F_u,
                      gap: GapField | None = None, fact: Factorization | None = None) -> ContactProblem:
    """Multipliers act on the displacement-jump rows; F_u loads the inner body rows."""
    mesh = bases.mesh
    rhs = np.zeros((grid.N, op.D))
    rhs[:, op.layout["u"]] = F_u
    nl = bases.n_lam
    node_to_ut = -np.ones(mesh.n_nodes, dtype=np.int64)
    node_to_ut[bases.ut_nodes] = np.arange(bases.n_ut)
    G = gap.moments if gap is not None else np.zeros((grid.N, 2 * nl))
    gn = gap.nodal if gap is not None else np.zeros((grid.N + 1, mesh.n_nodes))
    return ContactProblem(op, fact or factorize_S0(op), rhs,
                          assemble_mass_Mstar(mesh, bases, nodes=node_to_ut), op.layout["ut"],
                          assemble_mass_Mtilde(mesh, bases, grid, nodes=node_to_ut),
                          op.layout["ut"], G, nl, _scale(mesh, bases, grid.dt), gn)


def _toeplitz_apply(AT: np.ndarray, Lam: np.ndarray) -> np.ndarray:
    """out[n] = sum_j A[j] Lam[n - j], with AT[j] = A[j]^T; one matrix product per lag.
    Only the window of steps and the columns where Lam is nonzero enter the products:
    contact is usually active on a few elements over part of the interval."""
    N = Lam.shape[0]
    out = np.zeros((N, AT.shape[2]))
    nz = Lam != 0.0
    cols = np.flatnonzero(nz.any(axis=0))
    steps = np.flatnonzero(nz.any(axis=1))
    if cols.size == 0:
        return out
    lo, hi = int(steps[0]), int(steps[-1]) + 1
    L = Lam[lo:hi]
    A = AT
    if cols.size < Lam.shape[1]:
        L = L[:, cols]
        A = AT[:min(N - lo, AT.shape[0]), cols, :]
    for j in range(min(N - lo, A.shape[0])):
        m = min(hi - lo, N - lo - j)
        out[lo + j:lo + j + m] += L[:m] @ A[j]
    return out


def _project(W, Lprev, law: FrictionLaw, n_lam: int, thresholds=None):
    out = W.copy()
    out[:, :n_lam] = np.maximum(W[:, :n_lam], 0.0)
    if law.variant == "none":
        out[:, n_lam:] = 0.0
        return out
    if law.variant == "tresca":
        thr = np.broadcast_to(np.asarray(law.value, dtype=float), (n_lam,)) if thresholds is None \
            else thresholds
    else:
        src = out if law.coulomb_timing == "same_sweep" else Lprev
        thr = coulomb_thresholds(src, law.value)
    out[:, n_lam:] = np.clip(W[:, n_lam:], -thr, thr)
    return out


@dataclass
class UzawaResult:
    history: SolutionHistory
    multipliers: MultiplierField
    iterations: int
    trace: list

    def __iter__(self):
        return iter((self.history, self.multipliers, self.iterations, self.trace))


def uzawa(problem: ContactProblem, law: FrictionLaw, cfg: UzawaConfig, Lambda0=None,
          raise_on_failure: bool = True) -> UzawaResult:
    """Lambda <- pr_C(Lambda - rho (Mt U(Lambda) - G)) until the relative change is below eps."""
    N, nl = problem.N, problem.n_lam
    q = 2 * nl
    Lam = np.zeros((N, q)) if Lambda0 is None else np.array(Lambda0, dtype=float)
    trace = []
    if nl == 0:
        X = problem.solve(None)
        return UzawaResult(SolutionHistory(X, dict(problem.op.layout)), MultiplierField(Lam, 0), 0, trace)
    X0 = problem.solve(None)
    w0 = problem.residual_map(X0)
    del X0
    A = problem.compliance()
    AT = np.ascontiguousarray(A.transpose(0, 2, 1))
    rho_t = cfg.rho if cfg.rho_tangential is None else cfg.rho_tangential
    step = np.concatenate([np.full(nl, cfg.rho), np.full(nl, rho_t)])
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        w = w0 + _toeplitz_apply(AT, Lam)
        new = _project(Lam - step * w, Lam, law, nl)
        dn = float(np.linalg.norm(new - Lam))
        nn = float(np.linalg.norm(new))
        res = dn / nn if nn > 0 else dn
        pen = float(np.maximum(-w[:, :nl] / problem.scale[:nl], 0.0).max()) if nl else 0.0
        trace.append({"iter": it, "residual": res, "penetration": pen,
                      "min_normal": float(new[:, :nl].min()), "norm": nn})
        Lam = new
        if res <= cfg.eps:
            converged = True
            break
    if not converged and raise_on_failure:
        raise NonConvergenceError(f"Uzawa did not converge in {cfg.max_iters} iterations "
                                  f"(last relative change {trace[-1]['residual']:.3e})", trace)
    X = problem.solve(Lam)
    return UzawaResult(SolutionHistory(X, dict(problem.op.layout)), MultiplierField(Lam, nl), it, trace)


def uzawa_unilateral(problem: ContactProblem, law: FrictionLaw, cfg: UzawaConfig, **kw) -> UzawaResult:
    return uzawa(problem, law, cfg, **kw)


def uzawa_bilateral(problem: ContactProblem, law: FrictionLaw, cfg: UzawaConfig, **kw) -> UzawaResult:
    return uzawa(problem, law, cfg, **kw)


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "residual", "penetration", "min_normal", "norm"])
        for r in trace:
            w.writerow([r["iter"]] + [repr(float(r[k])) for k in ("residual", "penetration", "min_normal", "norm")])


# ---------------------------------------------------------------- optimality checks

@dataclass
class KKTReport:
    tol_c: float
    min_normal: float
    max_friction_excess: float
    max_penetration: float
    complementarity_ratio: float
    max_stick_velocity: float
    ok_feasibility: bool
    ok_nonpenetration: bool
    ok_complementarity: bool
    ok_stick_slip: bool

    @property
    def ok(self) -> bool:
        return self.ok_feasibility and self.ok_nonpenetration and self.ok_complementarity \
            and self.ok_stick_slip

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"ok": self.ok}


def element_quantities(problem: ContactProblem, X) -> tuple:
    """Element and step averages: normal displacement, gap, tangential velocity."""
    nl = problem.n_lam
    m = problem.Mtilde.apply(X[:, problem.disp_slice])
    u_perp = m[:, :nl] / problem.scale[:nl]
    g = problem.G[:, :nl] / problem.scale[:nl]
    v_par = m[:, nl:] / problem.scale[nl:]
    return u_perp, g, v_par


def kkt_check(problem: ContactProblem, result: UzawaResult, law: FrictionLaw,
              cfg: UzawaConfig) -> KKTReport:
    nl = problem.n_lam
    Lam = result.multipliers.Lambda
    lam_n, lam_t = Lam[:, :nl], Lam[:, nl:]
    u_perp, g, v_par = element_quantities(problem, result.history.X)
    tol_c = 10.0 * cfg.eps * max(float(np.abs(problem.gap_nodal).max(initial=0.0)), 1.0)
    if law.variant == "none":
        thr = np.zeros_like(lam_t)
    elif law.variant == "tresca":
        thr = np.broadcast_to(np.asarray(law.value, dtype=float), lam_t.shape)
    else:
        thr = coulomb_thresholds(Lam, law.value)
    excess = float((np.abs(lam_t) - thr).max(initial=-np.inf))
    pen = float((g - u_perp).max(initial=-np.inf))
    comp = np.abs(lam_n * (u_perp - g)).sum(axis=1)
    l1 = np.abs(Lam).sum(axis=1)
    ratio = float(np.max(comp / np.maximum(l1, 1e-300), initial=0.0))
    ok_comp = bool(np.all(comp <= tol_c * l1 + 1e-300))
    stick = np.abs(lam_t) < thr - tol_c
    vstick = float(np.abs(v_par[stick]).max(initial=0.0))
    return KKTReport(tol_c, float(lam_n.min(initial=0.0)), excess, pen, ratio, vstick,
                     bool(lam_n.min(initial=0.0) >= -1e-12 and excess <= 1e-10),
                     bool(pen <= tol_c), ok_comp, bool(vstick <= tol_c))
