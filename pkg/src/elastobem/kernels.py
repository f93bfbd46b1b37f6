"""2D elastodynamic fundamental solution, its traction kernels and their time antiderivatives.

All kernels are written through two scalar wave potentials: with g_c the 2D wave
kernel of speed c and Q = c_P^2 I^2 g_P - c_S^2 I^2 g_S (I = time antiderivative),

    G = (delta g_S + grad grad Q) / rho.

A kernel at antiderivative level L replaces g by I^L g and Q by its I^L image, so
the same tensor expressions give the raw kernels (L = 0) and the time-integrated
ones used by the energetic Galerkin pairings.

Index conventions: x is the observation point, y the source point, and the
vector argument of every radial function is d = x - y. The rotation
eps = [[0, 1], [-1, 0]] maps a normal onto its tangent (tangent = eps @ normal).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._radial import wave_difference, wave_table
from .errors import ConfigError, SingularPointError

KINDS = ("V", "K", "K*", "W")
_KIND_CODE = {"G": 0, "V": 0, "T": 1, "K": 1, "K*": 2, "W": 3}


@dataclass(frozen=True)
class MaterialParams:
    c_P: float
    c_S: float
    rho: float = 1.0

    def __post_init__(self):
        if not (self.c_P > self.c_S > 0.0):
            raise ConfigError(f"need c_P > c_S > 0, got c_P={self.c_P}, c_S={self.c_S}")
        if not self.rho > 0.0:
            raise ConfigError(f"need rho > 0, got rho={self.rho}")

    @property
    def mu(self) -> float:
        return self.rho * self.c_S**2

    @property
    def lame_lambda(self) -> float:
        return self.rho * (self.c_P**2 - 2.0 * self.c_S**2)


@dataclass(frozen=True)
class KernelEval:
    value: np.ndarray
    p_front_passed: bool
    s_front_passed: bool

    @property
    def wavefront_flags(self) -> dict:
        return {"P": self.p_front_passed, "S": self.s_front_passed}


@njit(cache=True)
def _eps(i, j):
    if i == 0 and j == 1:
        return 1.0
    if i == 1 and j == 0:
        return -1.0
    return 0.0


@njit(cache=True)
def _kd(i, j):
    return 1.0 if i == j else 0.0


@njit(cache=True)
def _d3(x, D2, D3, k, a, b):
    """Third Cartesian derivative of a radial function."""
    return (_kd(k, a) * x[b] + _kd(k, b) * x[a] + _kd(a, b) * x[k]) * D2 + x[k] * x[a] * x[b] * D3


@njit(cache=True)
def _d4(x, D2, D3, D4, b, k, a, c):
    """Fourth Cartesian derivative of a radial function."""
    v = (_kd(b, k) * _kd(a, c) + _kd(b, a) * _kd(k, c) + _kd(b, c) * _kd(k, a)) * D2
    v += (_kd(b, k) * x[a] * x[c] + _kd(b, a) * x[k] * x[c] + _kd(b, c) * x[k] * x[a]
          + _kd(k, a) * x[b] * x[c] + _kd(k, c) * x[b] * x[a] + _kd(a, c) * x[b] * x[k]) * D3
    v += x[b] * x[k] * x[a] * x[c] * D4
    return v


@njit(cache=True)
def pointwise_kernel(kind, level, cP, cS, rho, t, dx, dy, nx0, nx1, ny0, ny1, out):
    """Kernel tensor at antiderivative level `level`; kind 0=G, 1=T (K), 2=K*, 3=W.

    nx is the normal at the observation point, ny at the source point.
    """
    for i in range(2):
        for j in range(2):
            out[i, j] = 0.0
    r = math.sqrt(dx * dx + dy * dy)
    if cP * t <= r:
        return
    x = np.empty(2)
    x[0] = dx
    x[1] = dy
    gP = np.zeros(5)
    gS = np.zeros(5)
    wave_table(level, cP, t, r, gP)
    wave_table(level, cS, t, r, gS)
    Q = np.empty(5)
    wave_difference(level + 2, cP, cS, t, r, Q)
    cS2 = cS * cS
    cP2 = cP * cP
    n = np.empty(2)
    tau = np.empty(2)
    nu = np.empty(2)
    sig = np.empty(2)
    n[0] = ny0
    n[1] = ny1
    nu[0] = nx0
    nu[1] = nx1
    tau[0] = n[1]
    tau[1] = -n[0]
    sig[0] = nu[1]
    sig[1] = -nu[0]
    if kind == 0:
        for i in range(2):
            for j in range(2):
                out[i, j] = (_kd(i, j) * (gS[0] + Q[1]) + x[i] * x[j] * Q[2]) / rho
        return
    if kind == 1:
        tx = tau[0] * x[0] + tau[1] * x[1]
        for k in range(2):
            ex_k = _eps(k, 0) * x[0] + _eps(k, 1) * x[1]
            for m in range(2):
                v = -cP2 * n[m] * x[k] * gP[1] - cS2 * tau[m] * ex_k * gS[1]
                acc = _eps(m, k) * tx * gS[1]
                for a in range(2):
                    for b in range(2):
                        e = _eps(m, b)
                        if e != 0.0:
                            acc += tau[a] * e * _d3(x, Q[2], Q[3], k, a, b)
                out[k, m] = v - 2.0 * cS2 * acc
        return
    if kind == 2:
        sx = sig[0] * x[0] + sig[1] * x[1]
        for i in range(2):
            for l in range(2):
                ex_l = _eps(l, 0) * x[0] + _eps(l, 1) * x[1]
                v = cP2 * nu[i] * x[l] * gP[1] + cS2 * sig[i] * ex_l * gS[1]
                acc = _eps(i, l) * sx * gS[1]
                for a in range(2):
                    e = _eps(i, a)
                    if e != 0.0:
                        for b in range(2):
                            acc += e * sig[b] * _d3(x, Q[2], Q[3], a, l, b)
                out[i, l] = v + 2.0 * cS2 * acc
        return
    # hypersingular kernel
    mu = rho * cS2
    tmp = np.zeros(5)
    wave_table(level - 2, cP, t, r, tmp)
    lapP = tmp[0] / cP2
    wave_table(level - 2, cS, t, r, tmp)
    lapS = tmp[0] / cS2
    for i in range(2):
        for m in range(2):
            # derivative of g along tau then (eps grad)_m: tau_a eps_mb d_a d_b g
            tP = 0.0
            tS = 0.0
            for a in range(2):
                for b in range(2):
                    ddP = _kd(a, b) * gP[1] + x[a] * x[b] * gP[2]
                    tP += tau[a] * _eps(m, b) * ddP
                ddS = _kd(m, a) * gS[1] + x[m] * x[a] * gS[2]
                tS += tau[a] * ddS
            v = rho * cP2 * nu[i] * (-cP2 * n[m] * lapP - 2.0 * cS2 * tP)
            v -= mu * sig[i] * (cS2 * tau[m] * lapS - 2.0 * cS2 * tS)
            acc = 0.0
            for l in range(2):
                e_il = _eps(i, l)
                if e_il == 0.0:
                    continue
                for b in range(2):
                    # d_b T_lm
                    dT = -cP2 * n[m] * (_kd(b, l) * gP[1] + x[b] * x[l] * gP[2])
                    for c in range(2):
                        dT -= cS2 * tau[m] * _eps(l, c) * (_kd(b, c) * gS[1] + x[b] * x[c] * gS[2])
                    inner = 0.0
                    for a in range(2):
                        inner += _eps(m, l) * tau[a] * (_kd(b, a) * gS[1] + x[b] * x[a] * gS[2])
                        for c in range(2):
                            e = _eps(m, c)
                            if e != 0.0:
                                inner += tau[a] * e * _d4(x, Q[2], Q[3], Q[4], b, l, a, c)
                    dT -= 2.0 * cS2 * inner
                    acc += e_il * sig[b] * dT
            out[i, m] = v + 2.0 * mu * acc


def _as_point(p) -> np.ndarray:
    return np.asarray(p, dtype=float).reshape(2)


def _eval(kind: int, level: int, mat: MaterialParams, t: float, x, y, n_x=(0.0, 0.0),
          n_y=(0.0, 0.0)) -> np.ndarray:
    x = _as_point(x)
    y = _as_point(y)
    d = x - y
    if float(np.hypot(d[0], d[1])) == 0.0:
        raise SingularPointError("kernel evaluated at x = y")
    if t < 0.0:
        return np.zeros((2, 2))
    nx = _as_point(n_x)
    ny = _as_point(n_y)
    out = np.zeros((2, 2))
    pointwise_kernel(kind, level, mat.c_P, mat.c_S, mat.rho, float(t), d[0], d[1],
                     nx[0], nx[1], ny[0], ny[1], out)
    return out


def fundamental_solution(mat: MaterialParams, t: float, x, y) -> np.ndarray:
    """Displacement Green tensor G(t, x - y)."""
    return _eval(0, 0, mat, t, x, y)


def traction_kernel_y(mat: MaterialParams, t: float, x, y, n_y) -> np.ndarray:
    """Traction of G taken at the source point y with normal n_y (double layer kernel)."""
    return _eval(1, 0, mat, t, x, y, n_y=n_y)


def traction_kernel_x(mat: MaterialParams, t: float, x, y, n_x) -> np.ndarray:
    """Traction of G taken at the observation point x with normal n_x (adjoint kernel)."""
    return _eval(2, 0, mat, t, x, y, n_x=n_x)


def hypersingular_kernel(mat: MaterialParams, t: float, x, y, n_x, n_y) -> np.ndarray:
    """Traction at x of the double layer kernel, sigma_x(sigma_y(G)^T n_y) n_x."""
    return _eval(3, 0, mat, t, x, y, n_x=n_x, n_y=n_y)


def kernel_eval(kind: str, mat: MaterialParams, t: float, x, y, n_x=(0.0, 0.0),
                n_y=(0.0, 0.0)) -> KernelEval:
    """Pointwise kernel with the wavefront classification of (t, r)."""
    code = _KIND_CODE[kind]
    value = _eval(code, 0, mat, t, x, y, n_x, n_y)
    r = float(np.linalg.norm(_as_point(x) - _as_point(y)))
    return KernelEval(value, mat.c_P * t > r, mat.c_S * t > r)


def wavefront_case(mat: MaterialParams, t: float, r: float) -> str:
    """Branch label of (t, r): 'quiet' before the P front, 'P' between fronts, 'PS' after both."""
    if mat.c_P * t <= r:
        return "quiet"
    if mat.c_S * t <= r:
        return "P"
    return "PS"


# time-integrated kernels: (level, power of 1/dt) per kind
_TI = {"V": (0, 1, 0), "K": (1, 2, 1), "K*": (2, 2, 1), "W": (3, 3, 2)}


def time_integrated_kernel(kind: str, mat: MaterialParams, lag: int, dt: float, x, y,
                           frames=None) -> np.ndarray:
    """Energetic time pairing of a kernel at time lag `lag`.

    V: second difference of I G; K, K*: second difference of I^2 T over dt;
    W: second difference of I^3 W over dt^2. Differences are taken at
    (lag+1) dt, lag dt, (lag-1) dt; nonpositive times contribute nothing.
    frames: optional dict with 'n_x' and 'n_y'.
    """
    if kind not in _TI:
        raise ConfigError(f"unknown kernel kind {kind!r}")
    if lag < 0:
        raise ConfigError("lag must be >= 0")
    frames = frames or {}
    code, level, power = _TI[kind]
    n_x = frames.get("n_x", (0.0, 0.0))
    n_y = frames.get("n_y", (0.0, 0.0))
    total = np.zeros((2, 2))
    for w, j in ((1.0, lag + 1), (-2.0, lag), (1.0, lag - 1)):
        if j <= 0:
            continue
        total += w * _eval(code, level, mat, j * dt, x, y, n_x, n_y)
    return total / dt**power
