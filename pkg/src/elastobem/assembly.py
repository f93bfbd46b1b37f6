"""Galerkin blocks of the energetic space-time pairings and the block-Toeplitz system.

Coefficient vectors are component-major: all x-coefficients of a space, then
all y-coefficients. Time blocks are stored as arrays of shape (N, rows, cols),
block ell coupling the unknowns of step j to the test functions of step j+ell.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._quad import pair_moments
from .errors import AssemblyError
from .kernels import MaterialParams
from .mesh import BoundaryMesh, Part
from .timebasis import TimeGrid

CONTACT_PARTS = (Part.CONTACT, Part.CONTACT_BILATERAL)


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class QuadratureConfig:
    """Gauss orders: `order` per subinterval for interacting pairs (touching pairs use
    `touching_order`), `far_order` for pairs with no front crossing and no near field."""
    order: int = 10
    touching_order: int = 16
    far_order: int = 4


@dataclass(frozen=True)
class SpaceBases:
    """Index maps of the discrete spaces on one mesh.

    psi: discontinuous linear (index 2e + a) or piecewise constant (index e) on all of Gamma.
    u: nodal hats on Gamma_Sigma, excluding nodes that touch a Dirichlet element.
    lam: constants on contact elements.
    ut: nodal hats of nodes interior to the contact part (bilateral gap unknown).
    """
    mesh: BoundaryMesh
    psi_constant: bool
    u_nodes: np.ndarray
    node_to_u: np.ndarray
    lam_elements: np.ndarray
    ut_nodes: np.ndarray
    ut_in_u: np.ndarray

    @property
    def n_psi(self) -> int:
        return self.mesh.n_elements * (1 if self.psi_constant else 2)

    @property
    def n_u(self) -> int:
        return len(self.u_nodes)

    @property
    def n_lam(self) -> int:
        return len(self.lam_elements)

    @property
    def n_ut(self) -> int:
        return len(self.ut_nodes)

    def psi_index(self, e: int, a: int) -> int:
        return e if self.psi_constant else 2 * e + a

    def u_index(self, e: int, a: int) -> int:
        return int(self.node_to_u[self.mesh.elements[e, a]])


def build_bases(mesh: BoundaryMesh, psi_constant: bool = False) -> SpaceBases:
    n = mesh.n_nodes
    dirichlet = np.zeros(n, dtype=bool)
    sigma = np.zeros(n, dtype=bool)
    contact_count = np.zeros(n, dtype=np.int64)
    degree = np.zeros(n, dtype=np.int64)
    for e, (a, b) in enumerate(mesh.elements):
        for k in (a, b):
            degree[k] += 1
            if mesh.part[e] == Part.DIRICHLET:
                dirichlet[k] = True
            else:
                sigma[k] = True
            if mesh.part[e] in CONTACT_PARTS:
                contact_count[k] += 1
    u_nodes = np.flatnonzero(sigma & ~dirichlet)
    node_to_u = -np.ones(n, dtype=np.int64)
    node_to_u[u_nodes] = np.arange(len(u_nodes))
    lam = mesh.elements_with(CONTACT_PARTS)
    ut_nodes = np.flatnonzero((contact_count == degree) & (contact_count > 0) & ~dirichlet)
    ut_in_u = node_to_u[ut_nodes]
    return SpaceBases(mesh, bool(psi_constant), u_nodes, node_to_u, lam, ut_nodes, ut_in_u)


# ---------------------------------------------------------------- operator blocks

def _pair_key(A0, eA, LA, B0, B1, scale):
    rot = np.array([[eA[0], eA[1]], [-eA[1], eA[0]]])
    p0 = rot @ (B0 - A0)
    p1 = rot @ (B1 - A0)
    return tuple(np.round(np.array([LA, p0[0], p0[1], p1[0], p1[1]]) / scale, 9)), p0, p1


def _local_moments(LA, p0, p1, mat, dt, lags, want, quad):
    touching = (min(np.hypot(*p0), np.hypot(*p1), np.hypot(p0[0] - LA, p0[1]),
                    np.hypot(p1[0] - LA, p1[1])) <= 1e-12 * LA)
    gx, gw = _gauss01(quad.touching_order if touching else quad.order)
    fx, fw = _gauss01(quad.far_order)
    out = np.zeros((len(lags), 3, 2, 2, 4))
    pair_moments(0.0, 0.0, float(LA), 0.0, float(p0[0]), float(p0[1]), float(p1[0]),
                 float(p1[1]), float(mat.c_P), float(mat.c_S), float(mat.rho), float(dt),
                 lags, want[0], want[1], want[2], gx, gw, fx, fw, out)
    return out


def assemble_operator_blocks(kinds, mesh: BoundaryMesh, mat: MaterialParams, bases: SpaceBases,
                             dt: float, n_lags: int, quad: QuadratureConfig | None = None,
                             lags=None) -> dict:
    """Galerkin blocks of V (psi x psi), K (psi x u) and W (u x u) for lags 0..n_lags-1.

    Returns {kind: array (n_lags, rows, cols)}. Pairs that are congruent under a rigid
    motion share one quadrature evaluation.
    """
    quad = quad or QuadratureConfig()
    kinds = tuple(kinds)
    for k in kinds:
        if k not in ("V", "K", "W"):
            raise AssemblyError(f"unknown operator kind {k!r}")
    lags = np.arange(n_lags, dtype=np.int64) if lags is None else np.asarray(lags, dtype=np.int64)
    L = len(lags)
    nps, nu = bases.n_psi, bases.n_u
    out = {}
    if "V" in kinds:
        out["V"] = np.zeros((L, 2 * nps, 2 * nps))
    if "K" in kinds:
        out["K"] = np.zeros((L, 2 * nps, 2 * nu))
    if "W" in kinds:
        out["W"] = np.zeros((L, 2 * nu, 2 * nu))
    nodes, elems = mesh.nodes, mesh.elements
    direction = -mesh.tangent
    has_u = np.array([(bases.node_to_u[elems[e]] >= 0).any() for e in range(mesh.n_elements)])
    scale = mesh.h_max
    cache = {}
    for A in range(mesh.n_elements):
        A0 = nodes[elems[A, 0]]
        eA = direction[A]
        LA = mesh.length[A]
        R = np.array([[eA[0], -eA[1]], [eA[1], eA[0]]])
        psiA = [bases.psi_index(A, a) for a in range(2)]
        uA = [bases.u_index(A, a) for a in range(2)]
        for B in range(mesh.n_elements):
            wv = "V" in kinds
            wk = "K" in kinds and has_u[B]
            ww = "W" in kinds and has_u[A] and has_u[B]
            if not (wv or wk or ww):
                continue
            key, p0, p1 = _pair_key(A0, eA, LA, nodes[elems[B, 0]], nodes[elems[B, 1]], scale)
            loc = cache.get(key)
            if loc is None:
                loc = _local_moments(LA, p0, p1, mat, dt, lags,
                                     ("V" in kinds, "K" in kinds, "W" in kinds), quad)
                if not np.all(np.isfinite(loc)):
                    raise AssemblyError(f"quadrature failed for element pair ({A}, {B})")
                cache[key] = loc
            # rotate the 2x2 component tensors back to the global frame
            t = loc.reshape(L, 3, 2, 2, 2, 2)
            g = np.einsum("ik,lqabkm,jm->lqabij", R, t, R, optimize=True)
            psiB = [bases.psi_index(B, b) for b in range(2)]
            uB = [bases.u_index(B, b) for b in range(2)]
            for a in range(2):
                for b in range(2):
                    for i in range(2):
                        for j in range(2):
                            if wv:
                                out["V"][:, i * nps + psiA[a], j * nps + psiB[b]] += g[:, 0, a, b, i, j]
                            if wk and uB[b] >= 0:
                                out["K"][:, i * nps + psiA[a], j * nu + uB[b]] += g[:, 1, a, b, i, j]
                            if ww and uA[a] >= 0 and uB[b] >= 0:
                                out["W"][:, i * nu + uA[a], j * nu + uB[b]] += g[:, 2, a, b, i, j]
    # V and W pairings are symmetric; average out the quadrature asymmetry
    for k in ("V", "W"):
        if k in out:
            out[k] = 0.5 * (out[k] + np.transpose(out[k], (0, 2, 1)))
    return out


def assemble_operator_block(kind: str, mesh: BoundaryMesh, mat: MaterialParams, bases: SpaceBases,
                            dt: float, ell: int, quad: QuadratureConfig | None = None) -> np.ndarray:
    """Single Galerkin block of V, K or W at time lag ell."""
    if ell < 0:
        raise AssemblyError("lag must be >= 0")
    return assemble_operator_blocks((kind,), mesh, mat, bases, dt, 0, quad, lags=[ell])[kind][0]


# ---------------------------------------------------------------- mass matrices

def assemble_mass_M(mesh: BoundaryMesh, bases: SpaceBases) -> np.ndarray:
    """Scalar pairing of psi functions with u hats, shape (n_psi, n_u); applies per component."""
    out = np.zeros((bases.n_psi, bases.n_u))
    for e in range(mesh.n_elements):
        h = mesh.length[e]
        for a in range(1 if bases.psi_constant else 2):
            for b in range(2):
                m = bases.u_index(e, b)
                if m < 0:
                    continue
                if bases.psi_constant:
                    out[e, m] += h / 2.0
                else:
                    out[bases.psi_index(e, a), m] += h / 3.0 if a == b else h / 6.0
    return out


def _component_mass(M: np.ndarray) -> np.ndarray:
    r, c = M.shape
    out = np.zeros((2 * r, 2 * c))
    out[:r, :c] = M
    out[r:, c:] = M
    return out


def assemble_mass_Mstar(mesh: BoundaryMesh, bases: SpaceBases, grid: TimeGrid | None = None,
                        nodes=None) -> np.ndarray:
    """Map from one step of multiplier coefficients [normal | tangential] to u-shaped
    moments, shape (2 n_u, 2 n_lam); the operator is block diagonal in time.

    nodes: optional node -> row index map (defaults to the u numbering)."""
    idx = bases.node_to_u if nodes is None else nodes
    nrow = bases.n_u if nodes is None else int(idx.max()) + 1
    nl = bases.n_lam
    out = np.zeros((2 * nrow, 2 * nl))
    for q, e in enumerate(bases.lam_elements):
        h = mesh.length[e]
        n = mesh.normal[e]
        tau = mesh.tangent[e]
        for k in mesh.elements[e]:
            m = idx[k]
            if m < 0:
                continue
            for i in range(2):
                out[i * nrow + m, q] += 0.5 * h * (-n[i])
                out[i * nrow + m, nl + q] += 0.5 * h * tau[i]
    return out


@dataclass
class LowerToeplitz:
    """Block lower-triangular Toeplitz operator given by its first block column."""
    blocks: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.blocks.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """x has shape (N, cols) or (N, cols, k); returns (N, rows[, k])."""
        N = x.shape[0]
        nb = min(N, self.n_steps)
        out = np.zeros((N, self.blocks.shape[1]) + x.shape[2:])
        for lag in range(nb):
            blk = self.blocks[lag]
            if not blk.any():
                continue
            out[lag:] += np.einsum("rc,nc...->nr...", blk, x[:N - lag])
        return out

    def dense(self, N: int | None = None) -> np.ndarray:
        N = self.n_steps if N is None else N
        r, c = self.blocks.shape[1:]
        out = np.zeros((N * r, N * c))
        for i in range(N):
            for j in range(i + 1):
                if i - j < self.n_steps:
                    out[i * r:(i + 1) * r, j * c:(j + 1) * c] = self.blocks[i - j]
        return out


def assemble_mass_Mtilde(mesh: BoundaryMesh, bases: SpaceBases, grid: TimeGrid,
                         nodes=None) -> LowerToeplitz:
    """Pairing of multiplier tests with the displacement increments, tangential rows
    differentiated in time, normal rows not. Rows [normal | tangential] (2 n_lam),
    columns u-shaped (2 n_u, or the `nodes` numbering)."""
    idx = bases.node_to_u if nodes is None else nodes
    ncol = bases.n_u if nodes is None else int(idx.max()) + 1
    nl = bases.n_lam
    N, dt = grid.N, grid.dt
    normal = np.zeros((nl, 2 * ncol))
    tang = np.zeros((nl, 2 * ncol))
    for q, e in enumerate(bases.lam_elements):
        h = mesh.length[e]
        n = mesh.normal[e]
        tau = mesh.tangent[e]
        for k in mesh.elements[e]:
            m = idx[k]
            if m < 0:
                continue
            for i in range(2):
                normal[q, i * ncol + m] += 0.5 * h * (-n[i])
                tang[q, i * ncol + m] += 0.5 * h * tau[i]
    blocks = np.zeros((N, 2 * nl, 2 * ncol))
    blocks[0, :nl] = 0.5 * dt * normal
    blocks[1:, :nl] = dt * normal
    blocks[0, nl:] = tang
    return LowerToeplitz(blocks)


def gap_moments(mesh: BoundaryMesh, bases: SpaceBases, grid: TimeGrid, gap_nodal) -> np.ndarray:
    """Normal-row moments of the space-time interpolant of the gap, shape (N, 2 n_lam).

    gap_nodal: array (N+1, n_nodes) of gap values at time nodes and mesh nodes."""
    g = np.asarray(gap_nodal, dtype=float)
    if g.shape != (grid.N + 1, mesh.n_nodes):
        raise AssemblyError(f"gap samples must have shape {(grid.N + 1, mesh.n_nodes)}")
    nl = bases.n_lam
    out = np.zeros((grid.N, 2 * nl))
    tavg = 0.5 * (g[:-1] + g[1:])
    for q, e in enumerate(bases.lam_elements):
        a, b = mesh.elements[e]
        out[:, q] = grid.dt * mesh.length[e] * 0.5 * (tavg[:, a] + tavg[:, b])
    return out


# ---------------------------------------------------------------- right-hand side

def assemble_rhs_F(load, mesh: BoundaryMesh, bases: SpaceBases, grid: TimeGrid,
                   order: int = 8, time_order: int = 8) -> np.ndarray:
    """u-shaped load moments per step, shape (N, 2 n_u).

    F[l, i m] = (1/dt) int_{t_l}^{t_l+1} int_Gamma f_i w_m. load(e, t, x, y) returns the
    traction (fx, fy) on element e at arrays of t, x, y (or None where no load acts).
    """
    N, dt = grid.N, grid.dt
    nu = bases.n_u
    F = np.zeros((N, 2 * nu))
    if load is None:
        return F
    sx, sw = _gauss01(order)
    tx, tw = _gauss01(time_order)
    for e in range(mesh.n_elements):
        if mesh.part[e] == Part.DIRICHLET:
            continue
        p0 = mesh.nodes[mesh.elements[e, 0]]
        p1 = mesh.nodes[mesh.elements[e, 1]]
        h = mesh.length[e]
        x = p0[0] + sx * (p1[0] - p0[0])
        y = p0[1] + sx * (p1[1] - p0[1])
        for ell in range(N):
            t = (ell + tx) * dt
            T, X = np.meshgrid(t, x, indexing="ij")
            Y = np.broadcast_to(y, X.shape)
            f = load(e, T, X, Y)
            if f is None:
                continue
            fx, fy = (np.broadcast_to(np.asarray(c, dtype=float), X.shape) for c in f)
            # time average times space weights
            wx = (tw[:, None] * fx).sum(0) * sw * h
            wy = (tw[:, None] * fy).sum(0) * sw * h
            for a, phi in ((0, 1.0 - sx), (1, sx)):
                m = bases.u_index(e, a)
                if m < 0:
                    continue
                F[ell, m] += (wx * phi).sum()
                F[ell, nu + m] += (wy * phi).sum()
    return F


# ---------------------------------------------------------------- block system

@dataclass
class BlockToeplitzOperator:
    """Lower-triangular block-Toeplitz space-time system; blocks[ell] couples step j to j + ell."""
    blocks: np.ndarray
    formulation: str
    kind: str
    layout: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=float)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise AssemblyError("blocks must have shape (N, D, D)")
        self.blocks = b
        if self.formulation not in ("symmetric", "nonsymmetric"):
            raise AssemblyError(f"unknown formulation {self.formulation!r}")
        if self.kind not in ("unilateral", "bilateral"):
            raise AssemblyError(f"unknown system kind {self.kind!r}")

    @property
    def N(self) -> int:
        return self.blocks.shape[0]

    @property
    def D(self) -> int:
        return self.blocks.shape[1]

    def dense(self, N: int | None = None) -> np.ndarray:
        return LowerToeplitz(self.blocks).dense(N)

    def truncated(self, N: int) -> "BlockToeplitzOperator":
        return BlockToeplitzOperator(self.blocks[:N].copy(), self.formulation, self.kind,
                                     dict(self.layout))

    def dump(self, path) -> None:
        dump_blocks(self, path)


def dump_blocks(op: BlockToeplitzOperator, path) -> None:
    """Binary dump: int64 D, int64 N, then N row-major float64 blocks, little-endian."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", op.D, op.N))
        fh.write(np.ascontiguousarray(op.blocks, dtype="<f8").tobytes())


def load_blocks(path) -> np.ndarray:
    with open(path, "rb") as fh:
        D, N = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(N, D, D).copy()


def build_system(formulation: str, kind: str, mesh: BoundaryMesh, mats, bases: SpaceBases,
                 grid: TimeGrid, quad: QuadratureConfig | None = None) -> BlockToeplitzOperator:
    """Compose the marching blocks.

    Unilateral unknowns per step: (psi, u). Bilateral: (psi1, u, psi2, ut) where psi1,
    psi2 are the densities of the inner and outer body, u the displacement of the inner
    body and ut the displacement jump on the contact part. The outer body shares the
    mesh with reversed orientation, so its double layer block enters with a minus sign.
    layout maps unknown names to slices of the step vector.
    """
    if formulation in ("sym", "symmetric"):
        formulation = "symmetric"
    elif formulation in ("nonsym", "nonsymmetric"):
        formulation = "nonsymmetric"
    else:
        raise AssemblyError(f"unknown formulation {formulation!r}")
    if isinstance(mats, MaterialParams):
        mats = (mats,)
    mats = tuple(mats)
    N, dt = grid.N, grid.dt
    nps, nu = 2 * bases.n_psi, 2 * bases.n_u
    Mc = _component_mass(assemble_mass_M(mesh, bases))
    sym = formulation == "symmetric"
    kinds = ("V", "K", "W") if sym else ("V", "K")
    if kind == "unilateral":
        ops = assemble_operator_blocks(kinds, mesh, mats[0], bases, dt, N, quad)
        D = nps + nu
        P, U = slice(0, nps), slice(nps, D)
        S = np.zeros((N, D, D))
        S[:, P, P] = -ops.pop("V")
        K = ops.pop("K")
        K[0] += 0.5 * Mc
        S[:, P, U] = K
        if sym:
            S[:, U, P] = np.transpose(K, (0, 2, 1))
            S[:, U, U] = -ops.pop("W")
        else:
            S[0, U, P] = Mc.T
        del K
        return BlockToeplitzOperator(S, formulation, kind, {"psi": P, "u": U})
    if kind != "bilateral":
        raise AssemblyError(f"unknown system kind {kind!r}")
    if len(mats) != 2:
        raise AssemblyError("bilateral system needs two material parameter sets")
    nut = 2 * bases.n_ut
    # restriction to the contact hats: column selection of u dofs, per component
    sel = np.concatenate([bases.ut_in_u, bases.n_u + bases.ut_in_u])
    D = 2 * nps + nu + nut
    P1 = slice(0, nps)
    U = slice(nps, nps + nu)
    P2 = slice(nps + nu, 2 * nps + nu)
    UT = slice(2 * nps + nu, D)
    S = np.zeros((N, D, D))
    o1 = assemble_operator_blocks(kinds, mesh, mats[0], bases, dt, N, quad)
    S[:, P1, P1] = -o1.pop("V")
    K1 = o1.pop("K")
    K1[0] += 0.5 * Mc
    S[:, P1, U] = K1
    if sym:
        S[:, U, P1] = np.transpose(K1, (0, 2, 1))
        S[:, U, U] = -o1.pop("W")
    else:
        S[0, U, P1] = Mc.T
    del K1, o1
    o2 = assemble_operator_blocks(kinds, mesh, mats[1], bases, dt, N, quad)
    S[:, P2, P2] = -o2.pop("V")
    K2 = -o2.pop("K")
    K2[0] += 0.5 * Mc
    # K2 now holds (-K2 + M/2)
    S[:, P2, U] = K2
    K2r = -K2[:, :, sel]
    # (K2| - M|/2)
    S[:, P2, UT] = K2r
    if sym:
        S[:, U, P2] = np.transpose(K2, (0, 2, 1))
        S[:, UT, P2] = np.transpose(K2r, (0, 2, 1))
        W2 = o2.pop("W")
        S[:, U, U] -= W2
        S[:, U, UT] = W2[:, :, sel]
        S[:, UT, U] = np.transpose(W2[:, :, sel], (0, 2, 1))
        S[:, UT, UT] = -W2[:, sel][:, :, sel]
        del W2
    else:
        S[0, U, P2] = Mc.T
        S[0, UT, P2] = -Mc[:, sel].T
    del K2, K2r, o2
    return BlockToeplitzOperator(S, formulation, kind, {"psi1": P1, "u": U, "psi2": P2, "ut": UT})
