from __future__ import annotations

import numpy as np
import pytest

from elastobem.assembly import assemble_rhs_F, build_bases, build_system
from elastobem.kernels import MaterialParams
from elastobem.mesh import build_square_mesh
from elastobem.mot_solver import mot_solve, residuals
from elastobem.timebasis import TimeGrid, nodal_values

MAT = MaterialParams(1.0, 0.5)
SIGMA = 0.1


def top_midpoint_response(n, form):
    """Uniform pressure on the top face of the unit square, free elsewhere; h = dt = 1/n."""
    mesh = build_square_mesh(0.5, n, "neumann")
    bases = build_bases(mesh)
    grid = TimeGrid(0.5, n // 2)
    op = build_system(form, "unilateral", mesh, MAT, bases, grid)
    top = set(mesh.elements_on_side("t"))
    F = np.zeros((grid.N, op.D))
    F[:, op.layout["u"]] = assemble_rhs_F(
        lambda e, t, x, y: (0.0, -SIGMA * np.ones_like(t)) if e in top else None, mesh, bases, grid)
    hist = mot_solve(op, F)
    assert residuals(op, F, hist).max() <= 1e-14
    k = int(np.argmin(np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1] - 0.5)))
    uy = nodal_values(hist.U)[:, bases.n_u + bases.node_to_u[k]]
    return grid.nodes, uy


@pytest.mark.parametrize("form", ["symmetric", "nonsymmetric"])
def test_face_moves_with_plane_wave_velocity(form):
    # until the corner diffraction arrives (t = 0.5 / c_P) the top midpoint sees a plane P wave,
    # whose particle velocity is sigma / (rho c_P)
    errs = []
    for n in (4, 8):
        t, uy = top_midpoint_response(n, form)
        exact = -SIGMA * t / (MAT.rho * MAT.c_P)
        errs.append(np.abs(uy[1:] - exact[1:]).max() / np.abs(exact).max())
    assert errs[1] <= 0.01
    assert errs[1] < errs[0]
