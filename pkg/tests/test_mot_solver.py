from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastobem.assembly import BlockToeplitzOperator, build_bases, build_system
from elastobem.errors import SolverError
from elastobem.kernels import MaterialParams
from elastobem.mesh import build_square_mesh
from elastobem.mot_solver import dense_solve, factorize_S0, march, mot_solve, residuals
from elastobem.timebasis import TimeGrid


def random_operator(rng, N, D):
    blocks = rng.normal(size=(N, D, D))
    blocks[0] += 3 * D * np.eye(D)
    return BlockToeplitzOperator(blocks, "nonsymmetric", "unilateral", {"psi": slice(0, D // 2),
                                                                        "u": slice(D // 2, D)})


@given(st.integers(1, 7), st.integers(2, 6), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_marching_equals_whole_system_solve(N, D, seed):
    rng = np.random.default_rng(seed)
    op = random_operator(rng, N, D)
    F = rng.normal(size=(N, D))
    a = mot_solve(op, F)
    b = dense_solve(op, F)
    assert np.allclose(a.X, b.X, rtol=1e-10, atol=1e-12)
    assert residuals(op, F, a).max() <= 1e-10 * np.abs(F).max()


def test_marching_is_linear_and_causal():
    rng = np.random.default_rng(1)
    op = random_operator(rng, 6, 4)
    F = np.zeros((6, 4))
    F[3] = rng.normal(size=4)
    X = march(op, F)
    assert not X[:3].any()
    G = rng.normal(size=(6, 4))
    assert np.allclose(march(op, 2 * F - G), 2 * X - march(op, G))
    multi = march(op, np.stack([F, G], axis=-1))
    assert np.allclose(multi[..., 1], march(op, G))


def test_shorter_rhs_solves_a_prefix():
    rng = np.random.default_rng(2)
    op = random_operator(rng, 6, 3)
    F = rng.normal(size=(6, 3))
    assert np.allclose(march(op, F[:4]), march(op, F)[:4])


def test_boundary_element_system_solves():
    mat = MaterialParams(2.0, 1.0)
    mesh = build_square_mesh(0.5, 2, "neumann")
    op = build_system("symmetric", "unilateral", mesh, mat, build_bases(mesh), TimeGrid(0.4, 4))
    F = np.random.default_rng(3).normal(size=(4, op.D))
    hist = mot_solve(op, F)
    assert np.allclose(hist.X, dense_solve(op, F).X, rtol=1e-9, atol=1e-12)
    assert hist.Psi.shape == (4, op.layout["psi"].stop) and hist.U.shape[1] == op.D - op.layout["u"].start
    assert factorize_S0(op).rcond > 1e-10


def test_singular_first_block_is_reported():
    op = BlockToeplitzOperator(np.zeros((2, 3, 3)), "symmetric", "unilateral")
    with pytest.raises(SolverError, match="singular"):
        mot_solve(op, np.ones((2, 3)))
    blocks = np.ones((1, 3, 3))
    blocks[0, 2, 2] += 1e-17
    with pytest.raises(SolverError):
        factorize_S0(BlockToeplitzOperator(blocks, "symmetric", "unilateral"))


def test_incompatible_rhs_rejected():
    op = random_operator(np.random.default_rng(4), 3, 2)
    with pytest.raises(SolverError):
        march(op, np.ones((4, 2)))
    with pytest.raises(SolverError):
        march(op, np.ones((3, 5)))
