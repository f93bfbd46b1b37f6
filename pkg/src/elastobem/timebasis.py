"""Uniform time grid with piecewise-constant (v) and ramp (r) temporal bases.

Step intervals are half-open, [t_l, t_{l+1}), so the Heaviside step is 1 at 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError("N must be an integer >= 1")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        """t_0, ..., t_N."""
        return np.arange(self.N + 1) * self.dt

    def t(self, ell: int) -> float:
        return ell * self.dt


def heaviside(x):
    return np.where(np.asarray(x) >= 0.0, 1.0, 0.0)


def basis_v(grid: TimeGrid, ell: int, t):
    """Indicator of [t_l, t_{l+1})."""
    t = np.asarray(t, dtype=float)
    out = heaviside(t - grid.t(ell)) - heaviside(t - grid.t(ell + 1))
    return out if out.ndim else float(out)


def basis_r(grid: TimeGrid, ell: int, t):
    """Ramp from 0 at t_l to 1 at t_{l+1}, constant 1 afterwards."""
    t = np.asarray(t, dtype=float)
    a = t - grid.t(ell)
    b = t - grid.t(ell + 1)
    out = (heaviside(a) * a - heaviside(b) * b) / grid.dt
    return out if out.ndim else float(out)


def basis_r_derivative(grid: TimeGrid, ell: int, t):
    return basis_v(grid, ell, t) / grid.dt


def nodal_values(increments) -> np.ndarray:
    """Values at t_0..t_N of sum_l u_l r_l from increment coefficients (axis 0 is time)."""
    inc = np.asarray(increments, dtype=float)
    out = np.zeros((inc.shape[0] + 1,) + inc.shape[1:])
    out[1:] = np.cumsum(inc, axis=0)
    return out


def evaluate_ramp_expansion(grid: TimeGrid, increments, t):
    """sum_l u_l r_l(t) by direct basis evaluation."""
    inc = np.asarray(increments, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((len(t),) + inc.shape[1:])
    for ell in range(inc.shape[0]):
        out += np.multiply.outer(basis_r(grid, ell, t), inc[ell])
    return out


def increments_from_samples(values_at_nodes) -> np.ndarray:
    """Inverse of nodal_values: coefficients from values at t_0..t_N (value at t_0 must vanish)."""
    vals = np.asarray(values_at_nodes, dtype=float)
    return np.diff(vals, axis=0)
