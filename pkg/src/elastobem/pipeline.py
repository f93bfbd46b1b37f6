"""End-to-end run of one scenario: assemble, factorize, iterate, post-process."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import (BlockToeplitzOperator, QuadratureConfig, SpaceBases, assemble_rhs_F,
                       build_bases, build_system)
from .contact import (ContactProblem, GapField, UzawaResult, bilateral_problem, interpolate_gap,
                      unilateral_problem, uzawa)
from .mesh import BoundaryMesh
from .mot_solver import factorize_S0
from .scenario_io import Scenario
from .timebasis import TimeGrid


@dataclass
class RunResult:
    scenario: Scenario
    mesh: BoundaryMesh
    bases: SpaceBases
    grid: TimeGrid
    op: BlockToeplitzOperator
    problem: ContactProblem
    gap: GapField
    result: UzawaResult
    timings: dict = field(default_factory=dict)

    @property
    def history(self):
        return self.result.history

    @property
    def multipliers(self):
        return self.result.multipliers


def prepare(sc: Scenario, quad: QuadratureConfig | None = None, formulation: str | None = None):
    """Assemble the system and contact data of a scenario (no iteration yet)."""
    timings = {}
    t0 = time.perf_counter()
    mesh = sc.build_mesh()
    bases = build_bases(mesh, psi_constant=sc.psi_basis == "constant")
    grid = sc.grid
    op = build_system(formulation or sc.formulation, sc.kind, mesh, sc.materials, bases, grid, quad)
    F = assemble_rhs_F(sc.load_function(mesh), mesh, bases, grid)
    gap = interpolate_gap(sc.gap_function(), mesh, bases, grid)
    timings["assembly"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    fact = factorize_S0(op)
    timings["factorization"] = time.perf_counter() - t0
    build = unilateral_problem if sc.kind == "unilateral" else bilateral_problem
    problem = build(op, bases, grid, F, gap, fact)
    return mesh, bases, grid, op, problem, gap, timings


def run_scenario(sc: Scenario, quad: QuadratureConfig | None = None, formulation: str | None = None,
                 raise_on_failure: bool = True) -> RunResult:
    mesh, bases, grid, op, problem, gap, timings = prepare(sc, quad, formulation)
    t0 = time.perf_counter()
    res = uzawa(problem, sc.friction, sc.uzawa, raise_on_failure=raise_on_failure)
    timings["uzawa"] = time.perf_counter() - t0
    return RunResult(sc, mesh, bases, grid, op, problem, gap, res, timings)


def nodal_displacement(bases: SpaceBases, U: np.ndarray) -> np.ndarray:
    """Mesh-node displacement at t_0..t_N from u increments, shape (N+1, n_nodes, 2)."""
    N = U.shape[0]
    nu = bases.n_u
    out = np.zeros((N + 1, bases.mesh.n_nodes, 2))
    vals = np.cumsum(U, axis=0)
    out[1:, bases.u_nodes, 0] = vals[:, :nu]
    out[1:, bases.u_nodes, 1] = vals[:, nu:]
    return out


def nodal_jump(bases: SpaceBases, Ut: np.ndarray) -> np.ndarray:
    """Mesh-node displacement jump at t_0..t_N from the contact-hat increments."""
    N = Ut.shape[0]
    k = bases.n_ut
    out = np.zeros((N + 1, bases.mesh.n_nodes, 2))
    vals = np.cumsum(Ut, axis=0)
    out[1:, bases.ut_nodes, 0] = vals[:, :k]
    out[1:, bases.ut_nodes, 1] = vals[:, k:]
    return out
