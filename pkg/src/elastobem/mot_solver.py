"""Marching-on-in-time forward substitution through a block-Toeplitz system."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import BlockToeplitzOperator
from .errors import SolverError

DENSE_LIMIT = 4000


@dataclass(frozen=True)
class Factorization:
    lu: np.ndarray
    piv: np.ndarray
    rcond: float

    def solve(self, b: np.ndarray) -> np.ndarray:
        return sla.lu_solve((self.lu, self.piv), b, check_finite=False)


@dataclass
class SolutionHistory:
    """Per-step coefficient vectors X[l] with named slices into each step vector."""
    X: np.ndarray
    layout: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise SolverError("history must have shape (N, D)")

    @property
    def N(self) -> int:
        return self.X.shape[0]

    def part(self, name: str) -> np.ndarray:
        return self.X[:, self.layout[name]]

    @property
    def Psi(self) -> np.ndarray:
        return self.part("psi" if "psi" in self.layout else "psi1")

    @property
    def U(self) -> np.ndarray:
        return self.part("u")

    @property
    def Utilde(self) -> np.ndarray:
        return self.part("ut")


def factorize_S0(op: BlockToeplitzOperator, rcond_min: float = 1e-14) -> Factorization:
    S0 = op.blocks[0]
    if S0.shape[0] != S0.shape[1]:
        raise SolverError("S0 must be square")
    if not np.all(np.isfinite(S0)):
        raise SolverError("S0 has non-finite entries")
    lu, piv, info = sla.lapack.dgetrf(S0)
    anorm = np.abs(S0).sum(axis=0).max() if S0.size else 0.0
    if info > 0 or anorm == 0.0:
        raise SolverError("S0 is singular (zero pivot); condition estimate inf")
    rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    if rcond < rcond_min:
        raise SolverError(f"S0 is numerically singular; condition estimate {1.0 / max(rcond, 1e-300):.3e}")
    return Factorization(lu, piv, float(rcond))


def _hstack(op: BlockToeplitzOperator) -> np.ndarray:
    """[S^(0) S^(1) ... S^(N-1)] as one D x N*D array, cached on the operator."""
    hs = getattr(op, "_hstack_cache", None)
    if hs is None:
        hs = np.ascontiguousarray(op.blocks.transpose(1, 0, 2).reshape(op.D, op.N * op.D))
        op._hstack_cache = hs
    return hs


def history_term(op: BlockToeplitzOperator, X: np.ndarray, ell: int) -> np.ndarray:
    """sum_{j=1}^{ell} S^(j) X[ell - j]; X may carry trailing right-hand-side columns."""
    J = min(ell, op.N - 1)
    if J == 0:
        return np.zeros_like(X[0])
    D = op.D
    past = X[ell - J:ell][::-1]
    return _hstack(op)[:, D:(J + 1) * D] @ past.reshape((J * D,) + X.shape[2:])


def march(op: BlockToeplitzOperator, rhs, fact: Factorization | None = None) -> np.ndarray:
    """Forward substitution on raw arrays; rhs has shape (N, D) or (N, D, k)."""
    F = np.asarray(rhs, dtype=float)
    if F.shape[0] > op.N or F.shape[1] != op.D:
        raise SolverError(f"rhs shape {F.shape} incompatible with operator (N={op.N}, D={op.D})")
    fact = fact or factorize_S0(op)
    X = np.zeros_like(F)
    for ell in range(F.shape[0]):
        b = F[ell] - history_term(op, X, ell)
        # exact zeros stay exact (causality)
        if not b.any():
            continue
        X[ell] = fact.solve(b)
    return X


def mot_solve(op: BlockToeplitzOperator, rhs, fact: Factorization | None = None) -> SolutionHistory:
    """Solve S X = F step by step, reusing one factorization of S^(0)."""
    return SolutionHistory(march(op, rhs, fact), dict(op.layout))


def dense_solve(op: BlockToeplitzOperator, rhs) -> SolutionHistory:
    """Whole-system solve of the materialized lower-triangular block matrix."""
    F = np.asarray(rhs, dtype=float)
    N = F.shape[0]
    if N * op.D > DENSE_LIMIT:
        raise SolverError(f"dense solve limited to N*D <= {DENSE_LIMIT}, got {N * op.D}")
    A = op.dense(N)
    x = np.linalg.solve(A, F.reshape(N * op.D))
    return SolutionHistory(x.reshape(N, op.D), dict(op.layout))


def residuals(op: BlockToeplitzOperator, rhs, hist: SolutionHistory) -> np.ndarray:
    """Per-step residual norms of S X = F."""
    F = np.asarray(rhs, dtype=float)
    X = hist.X
    out = np.zeros(F.shape[0])
    for ell in range(F.shape[0]):
        r = F[ell] - op.blocks[0] @ X[ell] - history_term(op, X, ell)
        out[ell] = np.linalg.norm(r)
    return out
