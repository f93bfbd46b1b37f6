"""Numba quadrature core for element-pair Galerkin moments of the time-integrated kernels.

The single layer pairing integrates I G; the double layer and hypersingular
pairings are integrated by parts along the boundary so only weakly singular
kernels remain (trial derivatives are taken along the element tangent).
Every P minus S combination is evaluated in a cancellation-free form.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
NQ = 13


@njit(cache=True)
def _single(L, u, t, r, c, out):
    """c^2-scaled radial quantities of one wave, see module docstring of _radial."""
    c2 = c * c
    r2 = r * r
    r4 = r2 * r2
    out[0] = -u / (TWO_PI * r2)
    out[1] = (L / (2.0 * c2) - t * u / (2.0 * r2)) / TWO_PI
    out[2] = t * u / (TWO_PI * r4)
    out[3] = (L * t / (2.0 * c2) - t * t * u / (6.0 * r2) - u / (3.0 * c2)) / TWO_PI
    out[4] = u * u * u / (3.0 * TWO_PI * r4)
    out[5] = (L * (t * t / (4.0 * c2) + r2 / (16.0 * c2 * c2)) - t**3 * u / (24.0 * r2)
              - 13.0 * t * u / (48.0 * c2)) / TWO_PI
    out[6] = (L / (8.0 * c2 * c2) + t * u * (2.0 * t * t - 5.0 * r2 / c2) / (24.0 * r4)) / TWO_PI


@njit(cache=True)
def radial_quantities(t, r, cP, cS, q):
    """Fill q[0..12] with the quantities used by the regularized kernels.

    q0 h1_P, q1 h1_S, q2 h2_S, q3 D h2_S, q4 h3_S, q5 D h3_S, and the
    differences c_P^2 X_P - c_S^2 X_S of: q6 D h2, q7 D h3, q8 D^2 h3,
    q9 D h4, q10 D^2 h4, q11 D h5, q12 D^2 h5.
    """
    for k in range(NQ):
        q[k] = 0.0
    if cP * t <= r:
        return
    uP = math.sqrt(max(t * t - (r / cP) ** 2, 0.0))
    LP = math.log(cP * (t + uP) / r)
    q[0] = LP / (TWO_PI * cP * cP)
    tmp = np.empty(7)
    if cS * t <= r:
        _single(LP, uP, t, r, cP, tmp)
        for k in range(7):
            q[6 + k] = tmp[k]
        return
    cS2 = cS * cS
    cP2 = cP * cP
    uS = math.sqrt(max(t * t - (r / cS) ** 2, 0.0))
    LS = math.log(cS * (t + uS) / r)
    q[1] = LS / (TWO_PI * cS2)
    q[2] = (t * LS - uS) / (TWO_PI * cS2)
    q[3] = -uS / (TWO_PI * cS2 * r * r)
    q[4] = (LS * (0.5 * t * t + r * r / (4.0 * cS2)) - 0.75 * t * uS) / (TWO_PI * cS2)
    q[5] = (LS / (2.0 * cS2) - t * uS / (2.0 * r * r)) / (TWO_PI * cS2)
    r2 = r * r
    r4 = r2 * r2
    du = r2 * (1.0 / cS2 - 1.0 / cP2) / (uP + uS)
    dL = math.log(cP / cS) + math.log1p(du / (t + uS))
    # alpha(c) L differences
    iP = 1.0 / cP2
    iS = 1.0 / cS2
    q[6] = -du / (TWO_PI * r2)
    q[7] = (0.5 * (dL * iP + LS * (iP - iS)) - t * du / (2.0 * r2)) / TWO_PI
    q[8] = t * du / (TWO_PI * r4)
    q[9] = (0.5 * t * (dL * iP + LS * (iP - iS)) - t * t * du / (6.0 * r2)
            - (du * iP + uS * (iP - iS)) / 3.0) / TWO_PI
    q[10] = du * (uP * uP + uP * uS + uS * uS) / (3.0 * TWO_PI * r4)
    aP = t * t * iP / 4.0 + r2 * iP * iP / 16.0
    aS = t * t * iS / 4.0 + r2 * iS * iS / 16.0
    q[11] = (aP * dL + (aP - aS) * LS - t**3 * du / (24.0 * r2)
             - 13.0 * t * (du * iP + uS * (iP - iS)) / 48.0) / TWO_PI
    q[12] = ((dL * iP * iP + LS * (iP * iP - iS * iS)) / 8.0
             + (2.0 * t**3 * du - 5.0 * t * r2 * (du * iP + uS * (iP - iS))) / (24.0 * r4)) / TWO_PI


@njit(cache=True)
def kernel_values(want_v, want_k, want_w, cP, cS, rho, times, tw, dx, dy,
                  nuA0, nuA1, nB0, nB1, res):
    """Regularized kernel tensors at offset d = x - y summed over the time stencil.

    res rows: 0 V; 1 K (trial value); 2 K (trial tangential derivative);
    3 W (v u); 4 W (v' u); 5 W (v u'); 6 W (v' u'). Each row holds a 2x2 tensor.
    """
    for a in range(7):
        for b in range(4):
            res[a, b] = 0.0
    r = math.sqrt(dx * dx + dy * dy)
    q = np.empty(NQ)
    cS2 = cS * cS
    cP2 = cP * cP
    mu = rho * cS2
    tSx = nB1
    tSy = -nB0
    sgx = nuA1
    sgy = -nuA0
    nd = nB0 * dx + nB1 * dy
    vd = nuA0 * dx + nuA1 * dy
    for j in range(3):
        t = times[j]
        if t <= 0.0 or cP * t <= r:
            continue
        w = tw[j]
        radial_quantities(t, r, cP, cS, q)
        if want_v:
            diag = (q[1] + q[7]) / rho
            off = q[8] / rho
            res[0, 0] += w * (diag + dx * dx * off)
            res[0, 1] += w * dx * dy * off
            res[0, 2] += w * dx * dy * off
            res[0, 3] += w * (diag + dy * dy * off)
        if want_k:
            # P1_km = -n_m d_k q6 - cS^2 delta_km (n.d) q3
            e = -cS2 * nd * q[3]
            res[1, 0] += w * (-nB0 * dx * q[6] + e)
            res[1, 1] += w * (-nB1 * dx * q[6])
            res[1, 2] += w * (-nB0 * dy * q[6])
            res[1, 3] += w * (-nB1 * dy * q[6] + e)
            # P2 = -(cS^2 h2_S eps + 2 mu A2G eps^T), A2G = [I (h2_S + q9) + d d q10]/rho
            g00 = (q[2] + q[9] + dx * dx * q[10]) / rho
            g01 = dx * dy * q[10] / rho
            g11 = (q[2] + q[9] + dy * dy * q[10]) / rho
            # (A eps^T)_km = A_kl eps_ml ; eps^T = [[0,-1],[1,0]]
            res[2, 0] += w * (-2.0 * mu * g01)
            res[2, 1] += w * (-cS2 * q[2] + 2.0 * mu * g00)
            res[2, 2] += w * (cS2 * q[2] - 2.0 * mu * g11)
            res[2, 3] += w * (2.0 * mu * g01)
        if want_w:
            # E = -rho (cP^2 nu n^T h1_P + cS^2 sig tau^T h1_S)
            a = rho * cP2 * q[0]
            b = rho * cS2 * q[1]
            res[3, 0] -= w * (a * nuA0 * nB0 + b * sgx * tSx)
            res[3, 1] -= w * (a * nuA0 * nB1 + b * sgx * tSy)
            res[3, 2] -= w * (a * nuA1 * nB0 + b * sgy * tSx)
            res[3, 3] -= w * (a * nuA1 * nB1 + b * sgy * tSy)
            # B = 2 mu eps (d n^T q7 + cS^2 (n.d) q5 I); eps rows: (0,1),(-1,0)
            m00 = dx * nB0 * q[7] + cS2 * nd * q[5]
            m01 = dx * nB1 * q[7]
            m10 = dy * nB0 * q[7]
            m11 = dy * nB1 * q[7] + cS2 * nd * q[5]
            res[4, 0] += w * 2.0 * mu * m10
            res[4, 1] += w * 2.0 * mu * m11
            res[4, 2] -= w * 2.0 * mu * m00
            res[4, 3] -= w * 2.0 * mu * m01
            # C = -2 mu (nu d^T q7 + cS^2 (nu.d) q5 I) eps^T
            c00 = nuA0 * dx * q[7] + cS2 * vd * q[5]
            c01 = nuA0 * dy * q[7]
            c10 = nuA1 * dx * q[7]
            c11 = nuA1 * dy * q[7] + cS2 * vd * q[5]
            # (C eps^T)_im = C_il eps_ml: col0 = C_i1, col1 = -C_i0
            res[5, 0] -= w * 2.0 * mu * c01
            res[5, 1] += w * 2.0 * mu * c00
            res[5, 2] -= w * 2.0 * mu * c11
            res[5, 3] += w * 2.0 * mu * c10
            # A = -4 mu cS^2 h3_S I + 4 mu^2 (tr(G3) I - G3)
            h00 = (q[4] + q[11] + dx * dx * q[12]) / rho
            h01 = dx * dy * q[12] / rho
            h11 = (q[4] + q[11] + dy * dy * q[12]) / rho
            f = 4.0 * mu * mu
            dg = -4.0 * mu * cS2 * q[4]
            res[6, 0] += w * (dg + f * h11)
            res[6, 1] += w * (-f * h01)
            res[6, 2] += w * (-f * h01)
            res[6, 3] += w * (dg + f * h00)


@njit(cache=True)
def _seg_point_dist(px, py, b0x, b0y, ex, ey, L):
    """Distance from p to segment b0 + s L e, s in [0,1]; returns (dist, s_nearest, s_foot, signed)."""
    rx = px - b0x
    ry = py - b0y
    s_foot = (rx * ex + ry * ey) / L
    signed = rx * ey - ry * ex
    s = min(max(s_foot, 0.0), 1.0)
    qx = b0x + s * L * ex - px
    qy = b0y + s * L * ey - py
    return math.sqrt(qx * qx + qy * qy), s, s_foot, signed


@njit(cache=True)
def _insert(buf, n, v):
    if v > 1e-14 and v < 1.0 - 1e-14:
        buf[n] = v
        return n + 1
    return n


@njit(cache=True)
def _sort_unique(buf, n, tol):
    arr = np.sort(buf[:n])
    out = np.empty(n + 2)
    out[0] = 0.0
    k = 1
    for i in range(n):
        if arr[i] - out[k - 1] > tol:
            out[k] = arr[i]
            k += 1
    if 1.0 - out[k - 1] > tol:
        out[k] = 1.0
        k += 1
    else:
        out[k - 1] = 1.0
    return out[:k]


@njit(cache=True)
def _map(u, kind):
    """Interval map on [0,1]: 0 smoothstep, 1 cubic toward 0, 2 cubic toward 1."""
    if kind == 0:
        return u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)
    if kind == 1:
        return u * u * u, 3.0 * u * u
    v = 1.0 - u
    return 1.0 - v * v * v, 3.0 * v * v


@njit(cache=True)
def _inner_breaks(px, py, b0x, b0y, ex, ey, LB, radii, nrad, buf):
    """Breakpoints on B (unit parameter) for an observation point p."""
    n = 0
    dseg, snear, sfoot, signed = _seg_point_dist(px, py, b0x, b0y, ex, ey, LB)
    dline = abs(signed)
    for k in range(nrad):
        R = radii[k]
        if R > dline:
            h = math.sqrt((R - dline) * (R + dline)) / LB
            n = _insert(buf, n, sfoot - h)
            n = _insert(buf, n, sfoot + h)
    sing = -1.0
    if dseg < 2.0 * LB:
        if dline <= 1e-13 * LB and sfoot > -1e-14 and sfoot < 1.0 + 1e-14:
            sing = min(max(sfoot, 0.0), 1.0)
            n = _insert(buf, n, sing)
            d = 0.0
        else:
            d = dseg / LB
            n = _insert(buf, n, snear)
        if d > 0.0:
            f = 1.0
            for _ in range(12):
                off = d * f
                if off > 1.0:
                    break
                n = _insert(buf, n, snear - off)
                n = _insert(buf, n, snear + off)
                f *= 4.0
    return n, sing


@njit(cache=True)
def pair_moments(A0x, A0y, A1x, A1y, B0x, B0y, B1x, B1y, cP, cS, rho, dt, lags,
                 want_v, want_k, want_w, gx, gw, gx_far, gw_far, out):
    """Galerkin moments of one element pair for every lag in `lags`.

    out[lag_index, kind, a, b, 4] with kind 0 V, 1 K, 2 W; a is the local shape
    index on A (test), b on B (trial); shape 0 is 1-s, shape 1 is s. The last
    axis is the flattened 2x2 component tensor.
    """
    LA = math.hypot(A1x - A0x, A1y - A0y)
    LB = math.hypot(B1x - B0x, B1y - B0y)
    eAx = (A1x - A0x) / LA
    eAy = (A1y - A0y) / LA
    eBx = (B1x - B0x) / LB
    eBy = (B1y - B0y) / LB
    nuA0 = eAy
    nuA1 = -eAx
    nB0 = eBy
    nB1 = -eBx
    # pair distance range
    dmin = 1e300
    for (px, py) in ((A0x, A0y), (A1x, A1y)):
        d, _, _, _ = _seg_point_dist(px, py, B0x, B0y, eBx, eBy, LB)
        dmin = min(dmin, d)
    for (px, py) in ((B0x, B0y), (B1x, B1y)):
        d, _, _, _ = _seg_point_dist(px, py, A0x, A0y, eAx, eAy, LA)
        dmin = min(dmin, d)
    dmax = 0.0
    for (px, py) in ((A0x, A0y), (A1x, A1y)):
        for (qx, qy) in ((B0x, B0y), (B1x, B1y)):
            dmax = max(dmax, math.hypot(px - qx, py - qy))
    # touching classification: shared vertices / coincident
    tol = 1e-12 * max(LA, LB)
    touchA0 = False
    touchA1 = False
    for (qx, qy) in ((B0x, B0y), (B1x, B1y)):
        if math.hypot(A0x - qx, A0y - qy) <= tol:
            touchA0 = True
        if math.hypot(A1x - qx, A1y - qy) <= tol:
            touchA1 = True
    coincident = touchA0 and touchA1
    times = np.empty(3)
    tw = np.empty(3)
    radii = np.empty(6)
    obuf = np.empty(256)
    ibuf = np.empty(256)
    kv = np.empty((7, 4))
    ng = gx.shape[0]
    nfar = gx_far.shape[0]
    dB0 = 1.0 / LB
    dA0 = 1.0 / LA
    # shape derivative along the tangent (tangent = -element direction)
    dphiA = (dA0, -dA0)
    dphiB = (dB0, -dB0)
    for li in range(lags.shape[0]):
        m = lags[li]
        for a in range(3):
            for i in range(2):
                for j in range(2):
                    for c in range(4):
                        out[li, a, i, j, c] = 0.0
        if cP * (m + 1) * dt <= dmin:
            continue
        times[0] = (m + 1) * dt
        times[1] = m * dt
        times[2] = (m - 1) * dt
        tw[0] = 1.0
        tw[1] = -2.0
        tw[2] = 1.0
        nrad = 0
        crossing = False
        for j in range(3):
            if times[j] > 0.0:
                for c in (cP, cS):
                    R = c * times[j]
                    radii[nrad] = R
                    nrad += 1
                    if R > dmin - 1e-12 and R < dmax + 1e-12:
                        crossing = True
        near = dmin < 0.75 * max(LA, LB)
        if not crossing and not near:
            # smooth interaction: single tensor rule
            for ia in range(nfar):
                sa = gx_far[ia]
                xa = A0x + sa * LA * eAx
                ya = A0y + sa * LA * eAy
                for ib in range(nfar):
                    sb = gx_far[ib]
                    xb = B0x + sb * LB * eBx
                    yb = B0y + sb * LB * eBy
                    wgt = gw_far[ia] * gw_far[ib] * LA * LB
                    kernel_values(want_v, want_k, want_w, cP, cS, rho, times, tw,
                                  xa - xb, ya - yb, nuA0, nuA1, nB0, nB1, kv)
                    _accumulate(out, li, kv, wgt, sa, sb, dphiA, dphiB)
            continue
        # outer breakpoints on A
        no = 0
        for k in range(nrad):
            R = radii[k]
            for (qx, qy) in ((B0x, B0y), (B1x, B1y)):
                # |A0 + s LA eA - q|^2 = R^2
                rx = A0x - qx
                ry = A0y - qy
                bq = rx * eAx + ry * eAy
                cq = rx * rx + ry * ry - R * R
                disc = bq * bq - cq
                if disc >= 0.0:
                    sq = math.sqrt(disc)
                    no = _insert(obuf, no, (-bq - sq) / LA)
                    no = _insert(obuf, no, (-bq + sq) / LA)
            # tangency: signed distance to line B equals +-R with foot on B
            s0 = (A0x - B0x) * eBy - (A0y - B0y) * eBx
            ds = LA * (eAx * eBy - eAy * eBx)
            if abs(ds) > 1e-14 * LA:
                for sgn in (-1.0, 1.0):
                    s = (sgn * R - s0) / ds
                    if s > 0.0 and s < 1.0:
                        px = A0x + s * LA * eAx
                        py = A0y + s * LA * eAy
                        foot = ((px - B0x) * eBx + (py - B0y) * eBy) / LB
                        if foot > 0.0 and foot < 1.0:
                            no = _insert(obuf, no, s)
        if near and not coincident:
            # near-field splits toward the closest point of A to B
            best = 1e300
            sbest = 0.0
            for (qx, qy) in ((B0x, B0y), (B1x, B1y)):
                d, s, _, _ = _seg_point_dist(qx, qy, A0x, A0y, eAx, eAy, LA)
                if d < best:
                    best = d
                    sbest = s
            for (px, py, s) in ((A0x, A0y, 0.0), (A1x, A1y, 1.0)):
                d, _, _, _ = _seg_point_dist(px, py, B0x, B0y, eBx, eBy, LB)
                if d < best:
                    best = d
                    sbest = s
            no = _insert(obuf, no, sbest)
            dd = best / LA
            if dd > 0.0:
                f = 1.0
                for _ in range(12):
                    off = dd * f
                    if off > 1.0:
                        break
                    no = _insert(obuf, no, sbest - off)
                    no = _insert(obuf, no, sbest + off)
                    f *= 4.0
        obr = _sort_unique(obuf, no, 1e-12)
        for io in range(obr.shape[0] - 1):
            s_lo = obr[io]
            s_hi = obr[io + 1]
            okind = 0
            if not coincident:
                if touchA0 and s_lo == 0.0:
                    okind = 1
                elif touchA1 and s_hi == 1.0:
                    okind = 2
            for ia in range(ng):
                um, jac = _map(gx[ia], okind)
                sa = s_lo + (s_hi - s_lo) * um
                wa = gw[ia] * jac * (s_hi - s_lo) * LA
                if wa == 0.0:
                    continue
                xa = A0x + sa * LA * eAx
                ya = A0y + sa * LA * eAy
                ni, sing = _inner_breaks(xa, ya, B0x, B0y, eBx, eBy, LB, radii, nrad, ibuf)
                ibr = _sort_unique(ibuf, ni, 1e-13)
                for ii in range(ibr.shape[0] - 1):
                    t_lo = ibr[ii]
                    t_hi = ibr[ii + 1]
                    ikind = 0
                    if sing >= 0.0:
                        if abs(t_lo - sing) < 1e-13:
                            ikind = 1
                        elif abs(t_hi - sing) < 1e-13:
                            ikind = 2
                    for ib in range(ng):
                        vm, jb = _map(gx[ib], ikind)
                        sb = t_lo + (t_hi - t_lo) * vm
                        wb = gw[ib] * jb * (t_hi - t_lo) * LB
                        if wb == 0.0:
                            continue
                        xb = B0x + sb * LB * eBx
                        yb = B0y + sb * LB * eBy
                        kernel_values(want_v, want_k, want_w, cP, cS, rho, times, tw,
                                      xa - xb, ya - yb, nuA0, nuA1, nB0, nB1, kv)
                        _accumulate(out, li, kv, wa * wb, sa, sb, dphiA, dphiB)
    # time scalings: K over dt, W over dt^2
    for li in range(lags.shape[0]):
        for a in range(2):
            for b in range(2):
                for c in range(4):
                    out[li, 1, a, b, c] /= dt
                    out[li, 2, a, b, c] /= dt * dt


@njit(cache=True)
def _accumulate(out, li, kv, wgt, sa, sb, dphiA, dphiB):
    phA0 = 1.0 - sa
    phA1 = sa
    phB0 = 1.0 - sb
    phB1 = sb
    for a in range(2):
        pa = phA0 if a == 0 else phA1
        da = dphiA[a]
        for b in range(2):
            pb = phB0 if b == 0 else phB1
            db = dphiB[b]
            for c in range(4):
                out[li, 0, a, b, c] += wgt * pa * pb * kv[0, c]
                out[li, 1, a, b, c] += wgt * pa * (pb * kv[1, c] + db * kv[2, c])
                out[li, 2, a, b, c] += wgt * (pa * pb * kv[3, c] + da * pb * kv[4, c]
                                              + pa * db * kv[5, c] + da * db * kv[6, c])
