"""Repeated time antiderivatives of the 2D wave kernel and their radial derivatives.

With a = c*t, s = sqrt(a^2 - r^2) and A = acosh(a/r), the n-fold time
antiderivative of the scalar wave kernel 1/(2*pi*c*s) is H_n(a, r)/(2*pi*c^(n+1)).
Negative n are time derivatives. D denotes (1/r) d/dr at fixed a.

For n >= 2 the combination c_P^2 h_n(c_P) - c_S^2 h_n(c_S) is also provided. Late
in time each term is dominated by a piece that is the same for both speeds, so
the closed forms cancel catastrophically there; a series in (r / c t)^2 with that
piece removed analytically is used instead.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

NAN = math.nan


@njit(cache=True)
def radial_table(n, a, r, out):
    """Fill out[0..4] with H_n, D H_n, ..., D^4 H_n; zeros outside the wave cone."""
    for k in range(5):
        out[k] = 0.0
    if a <= r:
        return
    s = math.sqrt((a - r) * (a + r))
    r2 = r * r
    if n == -2:
        out[0] = (2.0 * a * a + r2) / s**5
        out[1] = (12.0 * a * a + 3.0 * r2) / s**7
        out[2] = NAN
        out[3] = NAN
        out[4] = NAN
        return
    if n == -1:
        out[0] = -a / s**3
        out[1] = -3.0 * a / s**5
        out[2] = -15.0 * a / s**7
        out[3] = NAN
        out[4] = NAN
        return
    if n == 0:
        out[0] = 1.0 / s
        out[1] = 1.0 / s**3
        out[2] = 3.0 / s**5
        out[3] = 15.0 / s**7
        out[4] = 105.0 / s**9
        return
    A = math.log((a + s) / r)
    r4 = r2 * r2
    r6 = r4 * r2
    r8 = r4 * r4
    a2 = a * a
    if n == 1:
        out[0] = A
        out[1] = -a / (r2 * s)
        out[2] = a * (2.0 * a2 - 3.0 * r2) / (r4 * s**3)
        out[3] = NAN
        out[4] = NAN
    elif n == 2:
        out[0] = a * A - s
        out[1] = -s / r2
        out[2] = (2.0 * a2 - r2) / (r4 * s)
        out[3] = -(8.0 * a2 * a2 - 12.0 * a2 * r2 + 3.0 * r4) / (r6 * s**3)
        out[4] = (48.0 * a2**3 - 120.0 * a2 * a2 * r2 + 90.0 * a2 * r4
                  - 15.0 * r6) / (r8 * s**5)
    elif n == 3:
        out[0] = (0.5 * a2 + 0.25 * r2) * A - 0.75 * a * s
        out[1] = 0.5 * A - a * s / (2.0 * r2)
        out[2] = a * s / r4
        out[3] = -a / (s * r4) - 4.0 * a * s / r6
        out[4] = -a / (s**3 * r4) + 8.0 * a / (s * r6) + 24.0 * a * s / r8
    elif n == 4:
        out[0] = (a2 * a / 6.0 + a * r2 / 4.0) * A - (11.0 * a2 / 36.0 + r2 / 9.0) * s
        out[1] = 0.5 * a * A - a2 * s / (6.0 * r2) - s / 3.0
        out[2] = s**3 / (3.0 * r4)
        out[3] = -s * (4.0 * a2 - r2) / (3.0 * r6)
        out[4] = (8.0 * a2 * a2 - 8.0 * a2 * r2 + r4) / (r8 * s)
    elif n == 5:
        out[0] = ((a2 * a2 / 24.0 + a2 * r2 / 8.0 + r4 / 64.0) * A
                  - (25.0 * a2 * a / 288.0 + 55.0 * a * r2 / 576.0) * s)
        out[1] = ((a2 / 4.0 + r2 / 16.0) * A - a2 * a * s / (24.0 * r2)
                  - 13.0 * a * s / 48.0)
        out[2] = A / 8.0 + a * s * (2.0 * a2 - 5.0 * r2) / (24.0 * r4)
        out[3] = -a * s**3 / (3.0 * r6)
        out[4] = a * s * (2.0 * a2 - r2) / r8
    else:
        for k in range(5):
            out[k] = NAN


@njit(cache=True)
def wave_table(n, c, t, r, out):
    """Radial table of the n-fold time antiderivative h_n(t, r) for wave speed c."""
    radial_table(n, c * t, r, out)
    scale = 1.0 / (2.0 * math.pi * c ** (n + 1))
    for k in range(5):
        out[k] *= scale


def _series_coefficients(n_terms: int) -> np.ndarray:
    """alpha_j, beta_j with H_n = a^(n-1) sum_j x^j (alpha_j + beta_j log(2a/r)), x = (r/a)^2.

    Uses H_n = P_n A + R_n s with A = log(2a/r) + log((1 + sqrt(1-x))/2), s = a sqrt(1-x).
    """
    P = np.polynomial.polynomial
    sig = np.zeros(n_terms)
    coef = 1.0
    for m in range(n_terms):
        sig[m] = coef
        coef *= (m - 0.5) / (m + 1)      # binom(1/2, m+1) (-1)^(m+1) from binom(1/2, m) (-1)^m
    w = 0.5 * (sig - np.eye(1, n_terms)[0])  # (sigma - 1)/2, no constant term
    lam = np.zeros(n_terms)
    power = np.eye(1, n_terms)[0]
    for i in range(1, n_terms):
        power = P.polymul(power, w)[:n_terms]
        lam[:len(power)] += (-1.0) ** (i + 1) * power / i
    # (p, q): H_n = a^(n-1) [p(x) (L + lam(x)) + q(x) sigma(x)]
    pq = {2: ([1.0], [-1.0]),
          3: ([0.5, 0.25], [-0.75]),
          4: ([1.0 / 6.0, 0.25], [-11.0 / 36.0, -1.0 / 9.0]),
          5: ([1.0 / 24.0, 1.0 / 8.0, 1.0 / 64.0], [-25.0 / 288.0, -55.0 / 576.0])}
    out = np.zeros((4, n_terms, 2))
    for n, (p, q) in pq.items():
        alpha = P.polyadd(P.polymul(p, lam), P.polymul(q, sig))[:n_terms]
        out[n - 2, :len(alpha), 0] = alpha
        out[n - 2, :len(p), 1] = p
    return out


SERIES = _series_coefficients(26)
SERIES_MIN_RATIO = 4.0


@njit(cache=True)
def _difference_series(n, cP, cS, t, r, out):
    """Series form of the c_P^2 h_n - c_S^2 h_n radial table (needs c_S t >= 4 r)."""
    yP = (r / (cP * t)) ** 2
    yS = (r / (cS * t)) ** 2
    LP = math.log(2.0 * cP * t / r)
    LS = math.log(2.0 * cS * t / r)
    for k in range(5):
        out[k] = 0.0
    out[0] = SERIES[n - 2, 0, 1] * math.log(cP / cS)
    pP = 1.0
    pS = 1.0
    for j in range(1, SERIES.shape[1]):
        pP *= yP
        pS *= yS
        al = SERIES[n - 2, j, 0]
        be = SERIES[n - 2, j, 1]
        m = 2.0 * j
        for k in range(5):
            if k > 0:
                al, be = m * al - be, m * be
                m -= 2.0
            out[k] += (pP * (al + be * LP) - pS * (al + be * LS)) / r ** (2 * k)
    scale = t ** (n - 1) / (2.0 * math.pi)
    for k in range(5):
        out[k] *= scale


@njit(cache=True)
def wave_difference(n, cP, cS, t, r, out):
    """c_P^2 h_n(c_P) - c_S^2 h_n(c_S) and its D derivatives, for 2 <= n <= 5."""
    if cS * t >= SERIES_MIN_RATIO * r:
        _difference_series(n, cP, cS, t, r, out)
        return
    tP = np.zeros(5)
    tS = np.zeros(5)
    wave_table(n, cP, t, r, tP)
    wave_table(n, cS, t, r, tS)
    for k in range(5):
        out[k] = cP * cP * tP[k] - cS * cS * tS[k]


def wave_table_py(n: int, c: float, t: float, r: float) -> np.ndarray:
    out = np.zeros(5)
    wave_table(n, c, t, r, out)
    return out
