from __future__ import annotations

import numpy as np
import pytest

from elastobem.assembly import (BlockToeplitzOperator, LowerToeplitz, QuadratureConfig, assemble_mass_M,
                                assemble_mass_Mstar, assemble_mass_Mtilde, assemble_operator_block,
                                assemble_operator_blocks, assemble_rhs_F, build_bases, build_system,
                                gap_moments, load_blocks)
from elastobem.errors import AssemblyError
from elastobem.kernels import MaterialParams, time_integrated_kernel
from elastobem.mesh import build_square_mesh
from elastobem.timebasis import TimeGrid

MAT = MaterialParams(2.0, 1.0, 1.3)
MESH = build_square_mesh(0.5, 2, {"b": "contact", "r": "neumann", "t": "neumann", "l": "neumann"})
BASES = build_bases(MESH)
GX, GW = np.polynomial.legendre.leggauss(10)
GX, GW = 0.5 * (GX + 1), 0.5 * GW


def _shape_points(pieces):
    """Quadrature points of a test function given as [(element, shape(s))]."""
    out = []
    for e, f in pieces:
        p0, p1 = MESH.nodes[MESH.elements[e]]
        for s, w in zip(GX, GW):
            out.append((p0 + s * (p1 - p0), w * MESH.length[e] * f(s), e))
    return out


def _hat(node):
    pieces = []
    for e, (a, b) in enumerate(MESH.elements):
        if a == node:
            pieces.append((e, lambda s: 1 - s))
        if b == node:
            pieces.append((e, lambda s: s))
    return pieces


def _pairing(kind, test, trial, lag, dt):
    out = np.zeros((2, 2))
    for p, wp, ep in _shape_points(test):
        for q, wq, eq in _shape_points(trial):
            frames = {"n_x": MESH.normal[ep], "n_y": MESH.normal[eq]}
            out += wp * wq * time_integrated_kernel(kind, MAT, lag, dt, p, q, frames)
    return out


def test_blocks_match_integrated_pointwise_kernels():
    # separated pair, lags after both fronts have swept the whole pair
    dt, lags = 0.1, [18, 21]
    ops = assemble_operator_blocks(("V", "K", "W"), MESH, MAT, BASES, dt, 0, QuadratureConfig(far_order=8),
                                   lags=lags)
    nps, nu = BASES.n_psi, BASES.n_u
    A, B = 0, 5
    node_a, node_b = int(MESH.elements[A, 1]), int(MESH.elements[B, 1])
    pa, pb = BASES.psi_index(A, 0), BASES.psi_index(B, 0)
    ua, ub = BASES.node_to_u[node_a], BASES.node_to_u[node_b]
    psi_a, psi_b = [(A, lambda s: 1 - s)], [(B, lambda s: 1 - s)]
    for k, lag in enumerate(lags):
        checks = [("V", ops["V"][k][np.ix_([pa, nps + pa], [pb, nps + pb])], psi_a, psi_b),
                  ("K", ops["K"][k][np.ix_([pa, nps + pa], [ub, nu + ub])], psi_a, _hat(node_b)),
                  ("W", ops["W"][k][np.ix_([ua, nu + ua], [ub, nu + ub])], _hat(node_a), _hat(node_b))]
        for kind, block, test, trial in checks:
            ref = _pairing(kind, test, trial, lag, dt)
            assert np.abs(block - ref).max() <= 1e-10 * np.abs(ref).max(), (kind, lag)


def test_blocks_vanish_before_the_p_front():
    dt = 0.05
    # closest approach of elements 0 and 5 is 0.5; lags with c_P (lag + 1) dt < 0.5 see nothing
    blk = assemble_operator_block("V", MESH, MAT, BASES, dt, 3)
    rows = [BASES.psi_index(0, a) for a in range(2)]
    cols = [BASES.psi_index(5, a) for a in range(2)]
    assert not blk[np.ix_(rows, cols)].any()
    assert blk[np.ix_(rows, rows)].any()


def test_mass_matrix_is_exact():
    M = assemble_mass_M(MESH, BASES)
    ref = np.zeros_like(M)
    for node in range(MESH.n_nodes):
        m = BASES.node_to_u[node]
        for e, f in _hat(node):
            for a in range(2):
                phi = (lambda s: 1 - s) if a == 0 else (lambda s: s)
                ref[BASES.psi_index(e, a), m] += MESH.length[e] * (GW * phi(GX) * f(GX)).sum()
    assert np.abs(M - ref).max() <= 1e-12
    # the psi functions sum to one, so column sums are hat integrals
    assert np.allclose(M.sum(0), 0.5, atol=1e-12)


def test_constant_psi_mass():
    b = build_bases(MESH, psi_constant=True)
    M = assemble_mass_M(MESH, b)
    assert M.shape == (MESH.n_elements, b.n_u)
    assert np.allclose(M.sum(), MESH.length.sum())


def test_multiplier_masses_agree():
    grid = TimeGrid(1.0, 4)
    Ms = assemble_mass_Mstar(MESH, BASES, grid)
    Mt = assemble_mass_Mtilde(MESH, BASES, grid)
    nl = BASES.n_lam
    assert Ms.shape == (2 * BASES.n_u, 2 * nl)
    assert np.allclose(Mt.blocks[0, nl:], Ms[:, nl:].T)
    assert np.allclose(Mt.blocks[1, :nl], grid.dt * Ms[:, :nl].T)
    assert np.allclose(Mt.blocks[0, :nl], 0.5 * grid.dt * Ms[:, :nl].T)
    assert not Mt.blocks[1, nl:].any()


def test_lower_toeplitz_apply_matches_dense():
    rng = np.random.default_rng(0)
    op = LowerToeplitz(rng.normal(size=(5, 3, 2)))
    x = rng.normal(size=(5, 2))
    assert np.allclose(op.apply(x).ravel(), op.dense() @ x.ravel())


def test_gap_moments():
    grid = TimeGrid(1.0, 4)
    g = np.full((grid.N + 1, MESH.n_nodes), 0.3)
    mom = gap_moments(MESH, BASES, grid, g)
    assert np.allclose(mom[:, :BASES.n_lam], 0.3 * grid.dt * MESH.length[BASES.lam_elements])
    assert not mom[:, BASES.n_lam:].any()
    with pytest.raises(AssemblyError):
        gap_moments(MESH, BASES, grid, g[1:])


def test_rhs_of_uniform_traction():
    grid = TimeGrid(1.0, 4)
    F = assemble_rhs_F(lambda e, t, x, y: (2.0 * t, -1.0), MESH, BASES, grid)
    nu = BASES.n_u
    mid = (np.arange(grid.N) + 0.5) * grid.dt
    assert np.allclose(F[:, :nu].sum(1), 2.0 * mid * MESH.length.sum())
    assert np.allclose(F[:, nu:].sum(1), -MESH.length.sum())
    assert not assemble_rhs_F(None, MESH, BASES, grid).any()


@pytest.fixture(scope="module")
def systems():
    grid = TimeGrid(0.6, 6)
    return {f: build_system(f, "unilateral", MESH, MAT, BASES, grid) for f in ("symmetric", "nonsymmetric")}


def test_symmetric_system_blocks_are_symmetric(systems):
    S = systems["symmetric"].blocks
    assert np.abs(S - np.transpose(S, (0, 2, 1))).max() <= 1e-8 * np.abs(S).max()


def test_nonsymmetric_lower_row_is_mass_only(systems):
    op = systems["nonsymmetric"]
    U = op.layout["u"]
    assert not op.blocks[1:, U].any()
    assert not op.blocks[0, U, U].any()


def test_toeplitz_blocks_do_not_depend_on_horizon(systems):
    short = build_system("symmetric", "unilateral", MESH, MAT, BASES, TimeGrid(0.3, 3))
    assert np.allclose(short.blocks, systems["symmetric"].blocks[:3], rtol=0, atol=1e-15)
    assert np.allclose(systems["symmetric"].truncated(3).blocks, short.blocks)


def test_dense_is_block_lower_triangular(systems):
    op = systems["symmetric"]
    A = op.dense()
    D = op.D
    assert not np.triu(A.reshape(op.N, D, op.N, D).transpose(0, 2, 1, 3).any(axis=(2, 3)), 1).any()


def test_dump_round_trip(systems, tmp_path):
    op = systems["nonsymmetric"]
    p = tmp_path / "blocks.bin"
    op.dump(p)
    raw = p.read_bytes()
    assert np.frombuffer(raw[:16], "<i8").tolist() == [op.D, op.N]
    assert np.array_equal(load_blocks(p), op.blocks)


def test_bilateral_system_is_symmetric():
    mesh = build_square_mesh(0.5, 2, {"b": "contact_bilateral", "r": "n", "t": "n", "l": "n"})
    b = build_bases(mesh)
    op = build_system("sym", "bilateral", mesh, (MAT, MaterialParams(3.0, 1.5, 2.0)), b, TimeGrid(0.2, 2))
    S = op.blocks
    assert set(op.layout) == {"psi1", "u", "psi2", "ut"}
    assert op.D == 2 * (2 * b.n_psi + b.n_u + b.n_ut)
    assert np.abs(S - np.transpose(S, (0, 2, 1))).max() <= 1e-8 * np.abs(S).max()


def test_invalid_requests():
    grid = TimeGrid(0.2, 2)
    with pytest.raises(AssemblyError):
        build_system("mixed", "unilateral", MESH, MAT, BASES, grid)
    with pytest.raises(AssemblyError):
        build_system("sym", "bilateral", MESH, MAT, BASES, grid)
    with pytest.raises(AssemblyError):
        assemble_operator_blocks(("X",), MESH, MAT, BASES, 0.1, 1)
    with pytest.raises(AssemblyError):
        assemble_operator_block("V", MESH, MAT, BASES, 0.1, -1)
    with pytest.raises(AssemblyError):
        BlockToeplitzOperator(np.zeros((2, 3, 4)), "symmetric", "unilateral")
