"""Compiled pair sums over lattice offsets (numba)."""

import math

import numba
import numpy as np

_FM = {"nnan", "ninf", "nsz", "arcp", "afn", "contract"}


@numba.njit(parallel=True, fastmath=_FM, cache=True)
def pair_sum(fp, gxp, gyp, P, ny, nx, offs, wts, ux, uy, invr, degree, thr, coef, beta, kind, block):
    """Sum ``w (G+ phi(D+) + G- phi(D-))`` over half-plane offsets.

    ``phi`` is either a closed form, selected by ``kind`` (0 gives
    ``(1 + D^2)^(-beta)``, 1 gives ``1 - (1 + D^2)^(-beta)``), or the
    polynomial ``sum_q coef[q] D^(2q)``:

    * ``degree > 0``: always the polynomial of that degree;
    * ``degree == 0``: per row and offset, the lowest degree ``n`` with
      ``max D^2 <= thr[n]``, falling back to the closed form beyond ``thr[-1]``;
    * ``degree < 0``: always the closed form.

    Each target accumulates offsets in the given order with Kahan
    compensation, so the result does not depend on the thread count.
    """
    out = np.zeros((ny, nx))
    nblk = (ny + block - 1) // block
    nthr = thr.shape[0]
    for bi in numba.prange(nblk):
        j0 = bi * block
        j1 = min(ny, j0 + block)
        comp = np.zeros((j1 - j0, nx))
        d1 = np.empty(nx)
        d2 = np.empty(nx)
        a1 = np.empty(nx)
        a2 = np.empty(nx)
        for m in range(offs.shape[0]):
            a = offs[m, 0]
            b = offs[m, 1]
            w = wts[m]
            ex = ux[m]
            ey = uy[m]
            ir = invr[m]
            for j in range(j0, j1):
                jj = j + P
                # row slices keep the inner loops free of signed index arithmetic
                f0 = fp[jj, P:P + nx]
                fm = fp[jj - b, P - a:P - a + nx]
                fq = fp[jj + b, P + a:P + a + nx]
                dmax = 0.0
                for i in range(nx):
                    t1 = (f0[i] - fm[i]) * ir
                    t2 = (f0[i] - fq[i]) * ir
                    d1[i] = t1 * t1
                    d2[i] = t2 * t2
                    dmax = max(dmax, max(d1[i], d2[i]))
                nt = degree
                if degree == 0:
                    nt = -1
                    for q in range(1, nthr):
                        if dmax <= thr[q]:
                            nt = q
                            break
                if nt > 0:
                    c = coef[nt]
                    for i in range(nx):
                        a1[i] = c
                        a2[i] = c
                    for q in range(nt - 1, -1, -1):
                        c = coef[q]
                        for i in range(nx):
                            a1[i] = a1[i] * d1[i] + c
                            a2[i] = a2[i] * d2[i] + c
                elif kind == 0:
                    for i in range(nx):
                        a1[i] = math.exp(-beta * math.log1p(d1[i]))
                        a2[i] = math.exp(-beta * math.log1p(d2[i]))
                else:
                    for i in range(nx):
                        a1[i] = -math.expm1(-beta * math.log1p(d1[i]))
                        a2[i] = -math.expm1(-beta * math.log1p(d2[i]))
                x0 = gxp[jj, P:P + nx]
                xm = gxp[jj - b, P - a:P - a + nx]
                xq = gxp[jj + b, P + a:P + a + nx]
                y0 = gyp[jj, P:P + nx]
                ym = gyp[jj - b, P - a:P - a + nx]
                yq = gyp[jj + b, P + a:P + a + nx]
                o = out[j]
                cp = comp[j - j0]
                for i in range(nx):
                    g1 = (x0[i] - xm[i]) * ex + (y0[i] - ym[i]) * ey
                    g2 = (xq[i] - x0[i]) * ex + (yq[i] - y0[i]) * ey
                    v = w * (g1 * a1[i] + g2 * a2[i]) - cp[i]
                    s = o[i] + v
                    cp[i] = (s - o[i]) - v
                    o[i] = s
    return out


@numba.njit(cache=True)
def point_sum(fp, P, j, i, offs, wts, invr, beta):
    """D3-type sum ``w (phi(D+) + phi(D-))`` with ``phi(D) = D (1+D^2)^(-beta)``
    at a single target."""
    jj = j + P
    ii = i + P
    fx = fp[jj, ii]
    s = 0.0
    c = 0.0
    for m in range(offs.shape[0]):
        a = offs[m, 0]
        b = offs[m, 1]
        ir = invr[m]
        t1 = (fx - fp[jj - b, ii - a]) * ir
        t2 = (fx - fp[jj + b, ii + a]) * ir
        v = wts[m] * (t1 * math.exp(-beta * math.log1p(t1 * t1))
                      + t2 * math.exp(-beta * math.log1p(t2 * t2))) - c
        t = s + v
        c = (t - s) - v
        s = t
    return s


@numba.njit(cache=True)
def c_alpha_min(fp, gxp, gyp, P, targets, offs, ux, uy, invr, alpha):
    """Minimum over targets and both signs of each offset of the factor
    ``1 + alpha + (3+alpha)/(1+D^2) [D grad f(x-y).yhat - D^2]``."""
    best = np.inf
    for t in range(targets.shape[0]):
        jj = targets[t, 0] + P
        ii = targets[t, 1] + P
        fx = fp[jj, ii]
        for m in range(offs.shape[0]):
            for sgn in (1, -1):
                a = sgn * offs[m, 0]
                b = sgn * offs[m, 1]
                ex = sgn * ux[m]
                ey = sgn * uy[m]
                d = (fx - fp[jj - b, ii - a]) * invr[m]
                gs = gxp[jj - b, ii - a] * ex + gyp[jj - b, ii - a] * ey
                v = 1.0 + alpha + (3.0 + alpha) / (1.0 + d * d) * (d * gs - d * d)
                if v < best:
                    best = v
    return best
