"""Compiled inner loops of the smoothers.

All kernels update ``phi`` in place and return an integer status: 0 on
success, 1 when a zero pivot or vanishing diagonal is met. The Python layer
in :mod:`mg_selseg.smoothers` turns non-zero statuses into exceptions.

Direction codes follow the coefficient names: 0 = A (east, i+1),
1 = B (west, i-1), 2 = C (north, j+1), 3 = D (south, j-1).

``ffas`` is the scaled FAS source: it enters a row multiplied by that row's
``S``. ``ctx`` is the float array ``[mu, eps_h, eps_g, hx, hy, two_nu, area, hsum]``
used only by the local (II) variants to rebuild coefficient rows; ``hsum`` is
kept current in place.
"""
import math

import numba as nb
import numpy as np

_jit = nb.njit(cache=True, nogil=True)

DI = np.array([1, -1, 0, 0], dtype=np.int64)
DJ = np.array([0, 0, 1, -1], dtype=np.int64)
OPP = np.array([1, 0, 3, 2], dtype=np.int64)


@_jit
def _heav(x, eps):
    return 0.5 + math.atan(x / eps) / math.pi


@_jit
def _dlt(x, eps):
    return eps / (math.pi * (eps * eps + x * x))


@_jit
def _dltp(x, eps):
    q = eps * eps + x * x
    return -2.0 * eps * x / (math.pi * q * q)


@_jit
def thomas(lower, diag, upper, rhs, out, cp, dp, k):
    """Solve a k x k tridiagonal system; ``lower[0]`` and ``upper[k-1]`` are ignored."""
    b = diag[0]
    if b == 0.0:
        return 1
    cp[0] = upper[0] / b
    dp[0] = rhs[0] / b
    for t in range(1, k):
        b = diag[t] - lower[t] * cp[t - 1]
        if b == 0.0:
            return 1
        cp[t] = upper[t] / b
        dp[t] = (rhs[t] - lower[t] * dp[t - 1]) / b
    out[k - 1] = dp[k - 1]
    for t in range(k - 2, -1, -1):
        out[t] = dp[t] - cp[t] * out[t + 1]
    return 0


@_jit
def arrow_solve(d0, row, col, dg, b0, b, x, k):
    """Solve the arrow system with head ``d0``, first row ``row``, first column
    ``col`` and trailing diagonal ``dg`` (all of length ``k``); ``x[0]`` is the
    head unknown and ``x[1:k+1]`` the tail."""
    piv = d0
    r = b0
    for t in range(k):
        if dg[t] == 0.0:
            return 1
        piv -= row[t] * col[t] / dg[t]
        r -= row[t] * b[t] / dg[t]
    if piv == 0.0:
        return 1
    x0 = r / piv
    x[0] = x0
    for t in range(k):
        x[t + 1] = (b[t] - col[t] * x0) / dg[t]
    return 0


@_jit
def _coef(A, B, C, D, d, i, j):
    if d == 0:
        return A[i, j]
    if d == 1:
        return B[i, j]
    if d == 2:
        return C[i, j]
    return D[i, j]


@_jit
def _point_sum(phi, A, B, C, D, S, i, j, n, m):
    """Neighbour sum and diagonal of the pixel equation with ghosts folded in."""
    s = 0.0
    dg = S[i, j]
    if i + 1 < n:
        s += A[i, j] * phi[i + 1, j]
    else:
        dg -= A[i, j]
    if i > 0:
        s += B[i, j] * phi[i - 1, j]
    else:
        dg -= B[i, j]
    if j + 1 < m:
        s += C[i, j] * phi[i, j + 1]
    else:
        dg -= C[i, j]
    if j > 0:
        s += D[i, j] * phi[i, j - 1]
    else:
        dg -= D[i, j]
    return s, dg


# ---------------------------------------------------------------- local rows


@_jit
def _gterm(phi, w, i, j, n, m, ctx):
    hx = ctx[3]
    hy = ctx[4]
    eg = ctx[2]
    ip = i + 1 if i + 1 < n else i
    im = i - 1 if i > 0 else i
    jp = j + 1 if j + 1 < m else j
    jm = j - 1 if j > 0 else j
    px = (phi[ip, j] - phi[im, j]) / (2.0 * hx)
    py = (phi[i, jp] - phi[i, jm]) / (2.0 * hy)
    return w[i, j] / math.sqrt(px * px + py * py + eg * eg)


@_jit
def refresh_row(phi, w, fit, ffas, A, B, C, D, S, f, i, j, ctx):
    n, m = phi.shape
    mu = ctx[0]
    eh = ctx[1]
    hx = ctx[3]
    hy = ctx[4]
    g0 = _gterm(phi, w, i, j, n, m, ctx)
    ge = _gterm(phi, w, i + 1, j, n, m, ctx) if i + 1 < n else g0
    gw = _gterm(phi, w, i - 1, j, n, m, ctx) if i > 0 else g0
    gn = _gterm(phi, w, i, j + 1, n, m, ctx) if j + 1 < m else g0
    gs = _gterm(phi, w, i, j - 1, n, m, ctx) if j > 0 else g0
    dl = _dlt(phi[i, j], eh)
    cx = mu * dl / (hx * hx)
    cy = mu * dl / (hy * hy)
    A[i, j] = cx * 0.5 * (g0 + ge)
    B[i, j] = cx * 0.5 * (g0 + gw)
    C[i, j] = cy * 0.5 * (g0 + gn)
    D[i, j] = cy * 0.5 * (g0 + gs)
    S[i, j] = A[i, j] + B[i, j] + C[i, j] + D[i, j]
    kappa = ctx[5] * (hx * hy * ctx[7] - ctx[6])
    f[i, j] = dl * (fit[i, j] + kappa) + ffas[i, j] * S[i, j]


@_jit
def _refresh_cross(phi, w, fit, ffas, A, B, C, D, S, f, i, j, ctx):
    n, m = phi.shape
    refresh_row(phi, w, fit, ffas, A, B, C, D, S, f, i, j, ctx)
    for d in range(4):
        ii = i + DI[d]
        jj = j + DJ[d]
        if 0 <= ii < n and 0 <= jj < m:
            refresh_row(phi, w, fit, ffas, A, B, C, D, S, f, ii, jj, ctx)


# ------------------------------------------------------------------- sweeps


@_jit
def _line_geometry(order, n, m):
    """(outer length, inner length, outer start, outer step, inner start, inner step, inner_is_j)."""
    if order == 0:
        return n, m, 0, 1, 0, 1, True
    if order == 1:
        return n, m, n - 1, -1, m - 1, -1, True
    if order == 2:
        return m, n, 0, 1, 0, 1, False
    return m, n, m - 1, -1, n - 1, -1, False


@_jit
def gslex(phi, A, B, C, D, S, f, order, local, w, fit, ffas, ctx):
    n, m = phi.shape
    nout, nin, o0, ostep, i0, istep, inner_j = _line_geometry(order, n, m)
    eh = ctx[1]
    for a in range(nout):
        o = o0 + a * ostep
        for b in range(nin):
            t = i0 + b * istep
            if inner_j:
                i = o
                j = t
            else:
                i = t
                j = o
            s, dg = _point_sum(phi, A, B, C, D, S, i, j, n, m)
            if dg == 0.0:
                return 1
            old = phi[i, j]
            phi[i, j] = (s - f[i, j]) / dg
            if local:
                ctx[7] += _heav(phi[i, j], eh) - _heav(old, eh)
                _refresh_cross(phi, w, fit, ffas, A, B, C, D, S, f, i, j, ctx)
    return 0


@_jit
def gsline(phi, A, B, C, D, S, f, local, w, fit, ffas, ctx):
    """Column-wise line Gauss-Seidel: for each j solve along i (A/B couplings)."""
    n, m = phi.shape
    lo = np.empty(n)
    dg = np.empty(n)
    up = np.empty(n)
    r = np.empty(n)
    x = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    eh = ctx[1]
    for j in range(m):
        for i in range(n):
            d = -S[i, j]
            rr = f[i, j]
            if j + 1 < m:
                rr -= C[i, j] * phi[i, j + 1]
            else:
                d += C[i, j]
            if j > 0:
                rr -= D[i, j] * phi[i, j - 1]
            else:
                d += D[i, j]
            if i == 0:
                d += B[i, j]
            if i == n - 1:
                d += A[i, j]
            lo[i] = B[i, j]
            up[i] = A[i, j]
            dg[i] = d
            r[i] = rr
        if thomas(lo, dg, up, r, x, cp, dp, n) != 0:
            return 1
        for i in range(n):
            if local:
                ctx[7] += _heav(x[i], eh) - _heav(phi[i, j], eh)
            phi[i, j] = x[i]
        if local:
            for jj in range(max(j - 1, 0), min(j + 2, m)):
                for i in range(n):
                    refresh_row(phi, w, fit, ffas, A, B, C, D, S, f, i, jj, ctx)
    return 0


@_jit
def newton(phi, A, B, C, D, S, fit, ffas, local, w, ctx):
    """Pointwise Newton on ``S phi - P + Q(phi) = 0`` in lexicographic order.

    ``Q`` carries the global area term (``two_nu = 0`` switches it off); the
    coefficient rows and the Heaviside sum are frozen unless ``local``.
    """
    n, m = phi.shape
    eh = ctx[1]
    hx = ctx[3]
    hy = ctx[4]
    two_nu = ctx[5]
    area = ctx[6]
    fdummy = np.empty((n, m)) if local else np.empty((1, 1))
    for i in range(n):
        for j in range(m):
            s, dg = _point_sum(phi, A, B, C, D, S, i, j, n, m)
            p = phi[i, j]
            dl = _dlt(p, eh)
            bracket = hx * hy * ctx[7] - area
            q = two_nu * dl * bracket
            qp = two_nu * dl * dl * hx * hy + two_nu * _dltp(p, eh) * bracket
            res = dg * p - s + dl * fit[i, j] + q + ffas[i, j] * S[i, j]
            den = dg + qp
            if abs(den) < 1e-12:
                if dg == 0.0:
                    return 1
                step = 0.5 * res / dg
            else:
                step = res / den
            phi[i, j] = p - step
            if local:
                ctx[7] += _heav(phi[i, j], eh) - _heav(p, eh)
                _refresh_cross(phi, w, fit, ffas, A, B, C, D, S, fdummy, i, j, ctx)
    return 0


@_jit
def arrow_update(phi, A, B, C, D, S, f, i, j, lag, row, col, dgv, bv, x, qi, qj):
    """Collective update of pixel (i, j) and its non-lagged neighbours.

    ``row .. qj`` are length-3 (``x`` length-4) scratch buffers.
    """
    n, m = phi.shape
    d0 = -S[i, j]
    b0 = f[i, j]
    k = 0
    for d in range(4):
        ii = i + DI[d]
        jj = j + DJ[d]
        kc = _coef(A, B, C, D, d, i, j)
        if not (0 <= ii < n and 0 <= jj < m):
            d0 += kc
            continue
        if d == lag:
            b0 -= kc * phi[ii, jj]
            continue
        row[k] = kc
        col[k] = _coef(A, B, C, D, OPP[d], ii, jj)
        dq = -S[ii, jj]
        bq = f[ii, jj]
        for e in range(4):
            if e == OPP[d]:
                continue
            pi = ii + DI[e]
            pj = jj + DJ[e]
            ke = _coef(A, B, C, D, e, ii, jj)
            if 0 <= pi < n and 0 <= pj < m:
                bq -= ke * phi[pi, pj]
            else:
                dq += ke
        dgv[k] = dq
        bv[k] = bq
        qi[k] = ii
        qj[k] = jj
        k += 1
    if arrow_solve(d0, row, col, dgv, b0, bv, x, k) != 0:
        return 1
    phi[i, j] = x[0]
    for t in range(k):
        phi[qi[t], qj[t]] = x[t + 1]
    return 0


@_jit
def hybrid1_step2(phi, A, B, C, D, S, f, smallest):
    n, m = phi.shape
    row = np.zeros(3)
    col = np.zeros(3)
    dgv = np.ones(3)
    bv = np.zeros(3)
    x = np.zeros(4)
    qi = np.zeros(3, dtype=np.int64)
    qj = np.zeros(3, dtype=np.int64)
    for j in range(m):
        for i in range(n):
            lag = smallest[i, j]
            if lag >= 0:
                if arrow_update(phi, A, B, C, D, S, f, i, j, lag, row, col, dgv, bv, x, qi, qj) != 0:
                    return 1
    return 0


@_jit
def hybrid2_subsweep(phi, A, B, C, D, S, f, smallest, lag, visits):
    """One directional sub-sweep: GSLEX on ordinary pixels, partial line
    solves on runs of pixels whose smallest coefficient is ``lag``."""
    n, m = phi.shape
    order = lag
    nout, nin, o0, ostep, i0, istep, inner_j = _line_geometry(order, n, m)
    lo = np.empty(nin)
    dg = np.empty(nin)
    up = np.empty(nin)
    r = np.empty(nin)
    x = np.empty(nin)
    cp = np.empty(nin)
    dp = np.empty(nin)
    # in-line neighbour directions: previous and next along the traversal
    if inner_j:
        dprev = 3 if istep > 0 else 2
    else:
        dprev = 1 if istep > 0 else 0
    dnext = OPP[dprev]
    for a in range(nout):
        o = o0 + a * ostep
        b = 0
        while b < nin:
            t = i0 + b * istep
            i = o if inner_j else t
            j = t if inner_j else o
            if smallest[i, j] != lag:
                s, dgg = _point_sum(phi, A, B, C, D, S, i, j, n, m)
                if dgg == 0.0:
                    return 1
                phi[i, j] = (s - f[i, j]) / dgg
                visits[i, j] += 1
                b += 1
                continue
            e = b
            while e + 1 < nin:
                tt = i0 + (e + 1) * istep
                ii = o if inner_j else tt
                jj = tt if inner_j else o
                if smallest[ii, jj] != lag:
                    break
                e += 1
            if e == b and b + 1 < nin:
                e = b + 1
            k = e - b + 1
            for q in range(k):
                tt = i0 + (b + q) * istep
                ii = o if inner_j else tt
                jj = tt if inner_j else o
                d = -S[ii, jj]
                rr = f[ii, jj]
                for dd in range(4):
                    pi = ii + DI[dd]
                    pj = jj + DJ[dd]
                    kc = _coef(A, B, C, D, dd, ii, jj)
                    inside = 0 <= pi < n and 0 <= pj < m
                    if not inside:
                        d += kc
                    elif dd == dprev and q > 0:
                        continue
                    elif dd == dnext and q < k - 1:
                        continue
                    else:
                        rr -= kc * phi[pi, pj]
                lo[q] = _coef(A, B, C, D, dprev, ii, jj)
                up[q] = _coef(A, B, C, D, dnext, ii, jj)
                dg[q] = d
                r[q] = rr
            if thomas(lo, dg, up, r, x, cp, dp, k) != 0:
                return 1
            for q in range(k):
                tt = i0 + (b + q) * istep
                ii = o if inner_j else tt
                jj = tt if inner_j else o
                phi[ii, jj] = x[q]
                visits[ii, jj] += 1
            b = e + 1
    return 0
