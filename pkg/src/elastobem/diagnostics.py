"""Post-processing: boundary work, point traces, snapshots, sweeps and cross-checks.

Energy is the boundary work E(t) = int_0^t int_Gamma p . du/dt, which equals the
kinetic plus elastic energy for data starting at rest. With psi constant per step
and u linear per step, the work of step k is Psi_k^T M U_k exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .assembly import SpaceBases, assemble_mass_M
from .errors import GeometryError
from .mesh import BoundaryMesh
from .mot_solver import SolutionHistory
from .pipeline import RunResult, nodal_displacement, nodal_jump, run_scenario
from .scenario_io import Scenario
from .timebasis import TimeGrid


class PointLookupError(GeometryError, LookupError):
    pass


@dataclass
class EnergyHistory:
    t: np.ndarray
    E: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "E"])
            for t, e in zip(self.t, self.E):
                w.writerow([repr(float(t)), repr(float(e))])


def _mass(bases: SpaceBases) -> np.ndarray:
    M = assemble_mass_M(bases.mesh, bases)
    r, c = M.shape
    out = np.zeros((2 * r, 2 * c))
    out[:r, :c] = M
    out[r:, c:] = M
    return out


def energy_history(solution: SolutionHistory, mesh: BoundaryMesh, bases: SpaceBases,
                   grid: TimeGrid) -> EnergyHistory:
    """Cumulative boundary work at t_0..t_N. Bilateral histories add the outer body's
    work, whose boundary displacement is u minus the contact jump."""
    M = _mass(bases)
    X = solution.X
    lay = solution.layout
    U = X[:, lay["u"]]
    if "psi" in lay:
        work = np.einsum("ki,ij,kj->k", X[:, lay["psi"]], M, U)
    else:
        sel = np.concatenate([bases.ut_in_u, bases.n_u + bases.ut_in_u])
        U2 = U.copy()
        U2[:, sel] -= X[:, lay["ut"]]
        work = (np.einsum("ki,ij,kj->k", X[:, lay["psi1"]], M, U)
                + np.einsum("ki,ij,kj->k", X[:, lay["psi2"]], M, U2))
    E = np.zeros(grid.N + 1)
    E[1:] = np.cumsum(work[:grid.N])
    return EnergyHistory(grid.nodes, E)


def locate_point(mesh: BoundaryMesh, point, tol: float = 1e-9):
    """(element, local coordinate s) of a boundary point."""
    p = np.asarray(point, dtype=float)
    a = mesh.nodes[mesh.elements[:, 0]]
    b = mesh.nodes[mesh.elements[:, 1]]
    d = b - a
    s = np.clip(((p - a) * d).sum(1) / (d * d).sum(1), 0.0, 1.0)
    dist = np.hypot(*(a + s[:, None] * d - p).T)
    e = int(np.argmin(dist))
    if dist[e] > tol * max(mesh.h_max, 1.0):
        raise PointLookupError(f"point {tuple(p)} is not on the boundary mesh")
    return e, float(s[e])


def side_midpoint(mesh: BoundaryMesh, side: str) -> np.ndarray:
    ids = mesh.elements_on_side(side)
    if len(ids) == 0:
        raise PointLookupError(f"no side named {side!r}")
    lens = mesh.length[ids]
    half = 0.5 * lens.sum()
    acc = 0.0
    for e, L in zip(ids, lens):
        if acc + L >= half - 1e-14:
            s = (half - acc) / L
            a, b = mesh.nodes[mesh.elements[e]]
            return a + s * (b - a)
        acc += L
    raise PointLookupError(f"side {side!r} has no midpoint")


def trace_at_point(solution: SolutionHistory, mesh: BoundaryMesh, bases: SpaceBases, point) -> np.ndarray:
    """Displacement (ux, uy) at t_0..t_N at a boundary point or the midpoint of a named side."""
    if isinstance(point, str):
        point = side_midpoint(mesh, point)
    e, s = locate_point(mesh, point)
    nd = nodal_displacement(bases, solution.U)
    a, b = mesh.elements[e]
    return (1.0 - s) * nd[:, a] + s * nd[:, b]


def deformation_snapshot(solution: SolutionHistory, mesh: BoundaryMesh, bases: SpaceBases, step: int,
                         magnification: float = 1.0) -> dict:
    """Deformed node positions at t_step: 'inner' for the body, 'outer' for the surrounding
    body of a two-body problem (boundary displacement u minus the contact jump)."""
    if not 0 <= step <= solution.N:
        raise ValueError(f"step must be in [0, {solution.N}]")
    nd = nodal_displacement(bases, solution.U)
    out = {"inner": mesh.nodes + magnification * nd[step]}
    if "ut" in solution.layout:
        jump = nodal_jump(bases, solution.Utilde)
        out["outer"] = mesh.nodes + magnification * (nd[step] - jump[step])
    return out


def write_trace_csv(t, series, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "ux", "uy"])
        for ti, (ux, uy) in zip(t, series):
            w.writerow([repr(float(ti)), repr(float(ux)), repr(float(uy))])


def write_multiplier_csv(run: RunResult, path) -> None:
    lam = run.multipliers
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "t", "element", "lambda_normal", "lambda_tangential"])
        for k in range(lam.Lambda.shape[0]):
            for q, e in enumerate(run.bases.lam_elements):
                w.writerow([k, repr(float(run.grid.t(k))), int(e), repr(float(lam.normal[k, q])),
                            repr(float(lam.tangential[k, q]))])


def snapshot_svg(mesh: BoundaryMesh, polylines: dict, path, obstacle_y=None, size: int = 400) -> None:
    """Self-contained SVG: reference boundary in grey, deformed boundaries in black."""
    pts = [mesh.nodes] + list(polylines.values())
    allp = np.vstack(pts)
    lo, hi = allp.min(0), allp.max(0)
    if obstacle_y is not None:
        lo[1] = min(lo[1], obstacle_y)
        hi[1] = max(hi[1], obstacle_y)
    span = max(float((hi - lo).max()), 1e-12)
    pad = 0.05 * span
    lo = lo - pad
    span += 2 * pad
    sc = size / span

    def xy(p):
        return f"{(p[0] - lo[0]) * sc:.3f},{(size - (p[1] - lo[1]) * sc):.3f}"

    def poly(nodes, color, width):
        order = list(mesh.elements[:, 0]) + [mesh.elements[0, 0]]
        return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="'
                + " ".join(xy(nodes[k]) for k in order) + '"/>')

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">', poly(mesh.nodes, "#bbbbbb", 1)]
    for nodes in polylines.values():
        parts.append(poly(nodes, "#000000", 1.5))
    if obstacle_y is not None:
        a = xy((lo[0], obstacle_y))
        b = xy((lo[0] + span, obstacle_y))
        parts.append(f'<line x1="{a.split(",")[0]}" y1="{a.split(",")[1]}" x2="{b.split(",")[0]}" '
                     f'y2="{b.split(",")[1]}" stroke="#aa0000" stroke-width="2"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


@dataclass
class SweepTable:
    h: np.ndarray
    dt: np.ndarray
    energy: np.ndarray
    err2: np.ndarray
    slope: float
    monotone: bool

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "dt", "err2", "slope"])
            for h, dt, e in zip(self.h, self.dt, self.err2):
                w.writerow([repr(float(h)), repr(float(dt)), repr(float(e)), repr(float(self.slope))])


def fit_slope(h, err) -> float:
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    ok = (err > 0) & np.isfinite(err)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


def sweep_from_energies(h, dt, energies) -> SweepTable:
    """Relative final-energy error of each level against the last (finest) level."""
    h = np.asarray(h, dtype=float)
    E = np.asarray(energies, dtype=float)
    ref = E[-1]
    err2 = np.abs(E - ref) / abs(ref) if ref != 0 else np.where(E == ref, 0.0, np.inf)
    coarse = err2[:-1]
    slope = fit_slope(h[:-1], coarse)
    monotone = bool(np.all(np.diff(coarse) <= 0))
    return SweepTable(h, np.asarray(dt, dtype=float), E, err2, slope, monotone)


def convergence_sweep(sc: Scenario, hs, dt_over_h: float | None = None, quad=None,
                      on_level=None) -> SweepTable:
    """Runs the scenario at each h (coarse to fine) with dt proportional to h."""
    hs = sorted((float(h) for h in hs), reverse=True)
    if len(hs) < 3:
        raise ValueError("a convergence sweep needs at least 3 levels")
    ratio = dt_over_h if dt_over_h is not None else (sc.T / sc.N) / sc.h
    energies, dts = [], []
    for h in hs:
        lvl = sc.refined(h, ratio * h)
        run = run_scenario(lvl, quad)
        E = energy_history(run.history, run.mesh, run.bases, run.grid)
        energies.append(E.E[-1])
        dts.append(run.grid.dt)
        if on_level is not None:
            on_level(lvl, run, E)
    return sweep_from_energies(hs, dts, energies)


def history_difference(a: SolutionHistory, b: SolutionHistory, bases: SpaceBases) -> float:
    """Relative step-summed Euclidean difference of nodal displacement histories."""
    ua = nodal_displacement(bases, a.U)
    ub = nodal_displacement(bases, b.U)
    den = np.linalg.norm(ub)
    return float(np.linalg.norm(ua - ub) / den) if den > 0 else float(np.linalg.norm(ua - ub))


def compare_formulations(sc: Scenario, quad=None) -> dict:
    sym = run_scenario(sc, quad, formulation="symmetric")
    non = run_scenario(sc, quad, formulation="nonsymmetric")
    return {"relative_difference": history_difference(sym.history, non.history, non.bases),
            "symmetric": sym, "nonsymmetric": non}
