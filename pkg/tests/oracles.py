"""Independent extended-precision references for the kernel tests.

The Green tensor is the closed-form two-front expression written directly in r, t
(not through wave potentials). Tractions come from central differences of it with
Hooke's law, and time antiderivatives from adaptive quadrature in mpmath.
"""
from __future__ import annotations

import mpmath as mp
import numpy as np

DPS = 50


def green(mat, t, d):
    """G(t, d) as a 2x2 mpmath matrix."""
    cP, cS, rho = mp.mpf(mat.c_P), mp.mpf(mat.c_S), mp.mpf(mat.rho)
    t = mp.mpf(t)
    r = mp.sqrt(d[0] ** 2 + d[1] ** 2)
    rh = [d[0] / r, d[1] / r]
    out = mp.matrix(2, 2)
    for i in range(2):
        for j in range(2):
            kd = 1 if i == j else 0
            v = mp.mpf(0)
            if cP * t > r:
                sP = mp.sqrt(cP ** 2 * t ** 2 - r ** 2)
                v += (rh[i] * rh[j] * (2 * cP ** 2 * t ** 2 - r ** 2) / (r ** 2 * sP) - kd * sP / r ** 2) / cP
            if cS * t > r:
                sS = mp.sqrt(cS ** 2 * t ** 2 - r ** 2)
                v -= (rh[i] * rh[j] * (2 * cS ** 2 * t ** 2 - r ** 2) / (r ** 2 * sS)
                      - kd * cS ** 2 * t ** 2 / (r ** 2 * sS)) / cS
            out[i, j] = v / (2 * mp.pi * rho)
    return out


_GL = np.polynomial.legendre.leggauss(48)


def _gauss(f, a, b):
    """Fixed 48-point Gauss-Legendre rule on [a, b] in mpmath arithmetic."""
    half = (b - a) / 2
    return sum(mp.mpf(w) * f(a + half * (mp.mpf(x) + 1)) for x, w in zip(*_GL)) * half


def integrated_green(mat, level, t, d):
    """I^level G(t, d) = int_0^t (t - s)^(level-1) / (level-1)! G(s, d) ds.

    Each wavefront carries an inverse square-root singularity, removed by
    s = front + u^2 on the interval starting at that front; the rule is fixed,
    so the result is a smooth function of d and may be differentiated numerically.
    """
    if level == 0:
        return green(mat, t, d)
    t = mp.mpf(t)
    r = mp.sqrt(d[0] ** 2 + d[1] ** 2)
    tP = r / mp.mpf(mat.c_P)
    tS = r / mp.mpf(mat.c_S)
    fac = mp.factorial(level - 1)
    out = mp.matrix(2, 2)
    for lo, hi in ((tP, min(tS, t)), (tS, t)):
        if hi <= lo:
            continue

        def f(u, lo=lo):
            s = lo + u * u
            return 2 * u * (t - s) ** (level - 1) * green(mat, s, d)
        out += _gauss(f, mp.mpf(0), mp.sqrt(hi - lo))
    return out / fac


def _grad(F, p, h):
    """J[m][j] = d_j F_m for a vector field F at point p."""
    J = [[0, 0], [0, 0]]
    for j in range(2):
        pp, pm = list(p), list(p)
        pp[j] += h
        pm[j] -= h
        fp, fm = F(pp), F(pm)
        for m in range(2):
            J[m][j] = (fp[m] - fm[m]) / (2 * h)
    return J


def _traction(mat, J, n):
    lam = mp.mpf(mat.lame_lambda)
    mu = mp.mpf(mat.mu)
    div = J[0][0] + J[1][1]
    return [lam * div * n[m] + mu * sum((J[m][j] + J[j][m]) * n[j] for j in range(2)) for m in range(2)]


def _mp(p):
    return [mp.mpf(float(v)) for v in p]


def kernel(kind, mat, t, x, y, n_x=(0.0, 0.0), n_y=(0.0, 0.0), level=0):
    """Kernel of the given kind ('G', 'T', 'K*', 'W') built on I^level G, as a float array."""
    with mp.workdps(DPS):
        x, y, nx, ny = _mp(x), _mp(y), _mp(n_x), _mp(n_y)
        h = mp.mpf(10) ** (-DPS // 4)

        def G(xx, yy):
            return integrated_green(mat, level, t, [xx[0] - yy[0], xx[1] - yy[1]])

        def T(xx, yy):
            # column k of G(., y) differentiated in y, traction with n_y: out[k, m]
            out = mp.matrix(2, 2)
            cache = {}

            def col(yp, k):
                key = (yp[0], yp[1])
                if key not in cache:
                    cache[key] = G(xx, yp)
                return [cache[key][a, k] for a in range(2)]
            for k in range(2):
                tr = _traction(mat, _grad(lambda yp: col(yp, k), yy, h), ny)
                for m in range(2):
                    out[k, m] = tr[m]
            return out

        if kind == "G":
            out = G(x, y)
        elif kind == "T":
            out = T(x, y)
        elif kind == "K*":
            out = mp.matrix(2, 2)
            for col in range(2):
                tr = _traction(mat, _grad(lambda xp: [G(xp, y)[a, col] for a in range(2)], x, h), nx)
                for i in range(2):
                    out[i, col] = tr[i]
        elif kind == "W":
            out = mp.matrix(2, 2)
            for m in range(2):
                tr = _traction(mat, _grad(lambda xp: [T(xp, y)[k, m] for k in range(2)], x, h), nx)
                for i in range(2):
                    out[i, m] = tr[i]
        else:
            raise ValueError(kind)
        return np.array(out.tolist(), dtype=float)


_TIME = {"V": ("G", 1, 0), "K": ("T", 2, 1), "K*": ("K*", 2, 1), "W": ("W", 3, 2)}


def time_integrated(kind, mat, lag, dt, x, y, n_x=(0.0, 0.0), n_y=(0.0, 0.0)):
    """Second time difference of the integrated kernel at lag, by adaptive quadrature."""
    base, level, power = _TIME[kind]
    total = np.zeros((2, 2))
    for w, j in ((1.0, lag + 1), (-2.0, lag), (1.0, lag - 1)):
        if j > 0:
            total += w * kernel(base, mat, j * dt, x, y, n_x, n_y, level=level)
    return total / dt ** power
