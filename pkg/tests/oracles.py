"""Independent brute-force references used by the test suite.

Everything here is written with explicit loops or dense matrices and shares
no code with the package under test.
"""
import math

import numpy as np

DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))  # A, B, C, D


def restrict_matrix(n, m):
    """Dense full-weighting matrix acting on row-major flattened fields."""
    nc, mc = n // 2, m // 2
    R = np.zeros((nc * mc, n * m))
    w = (0.25, 0.5, 0.25)
    for I in range(nc):
        for J in range(mc):
            row = I * mc + J
            last_i, last_j = I == nc - 1, J == mc - 1
            if not last_i and not last_j:
                for a in range(3):
                    for b in range(3):
                        R[row, (2 * I + a) * m + 2 * J + b] += w[a] * w[b]
            elif last_i and last_j:
                R[row, (n - 2) * m + m - 1] += 0.25
                R[row, (n - 1) * m + m - 2] += 0.25
                R[row, (n - 1) * m + m - 1] += 0.5
            elif last_j:
                R[row, (2 * I + 1) * m + m - 2] += 0.5
                R[row, (2 * I + 1) * m + m - 1] += 0.5
            else:
                R[row, (n - 2) * m + 2 * J + 1] += 0.5
                R[row, (n - 1) * m + 2 * J + 1] += 0.5
    return R


def restrict_dense(f):
    n, m = f.shape
    return (restrict_matrix(n, m) @ f.ravel()).reshape(n // 2, m // 2)


def interpolate_dense(c):
    """Bilinear prolongation written with 1-based indices.

    Fine pixel ``(2i, 2j)`` copies coarse ``(i, j)``; odd fine indices
    average their two coarse neighbours. A coarse index 0 falls off the grid
    and is clamped to 1.
    """
    nc, mc = c.shape
    out = np.zeros((2 * nc, 2 * mc))

    def cv(i, j):
        return c[max(i, 1) - 1, max(j, 1) - 1]

    for p in range(1, 2 * nc + 1):
        for q in range(1, 2 * mc + 1):
            i, j = p // 2, q // 2
            if p % 2 == 0 and q % 2 == 0:
                v = cv(i, j)
            elif p % 2 == 1 and q % 2 == 0:
                v = 0.5 * (cv(i, j) + cv(i + 1, j))
            elif p % 2 == 0:
                v = 0.5 * (cv(i, j) + cv(i, j + 1))
            else:
                v = 0.25 * (cv(i, j) + cv(i + 1, j) + cv(i, j + 1) + cv(i + 1, j + 1))
            out[p - 1, q - 1] = v
    return out


def operator_matrix(A, B, C, D, S):
    """Dense ``L`` with ``(L phi)_p = sum K phi_nbr - S phi_p`` and mirrored ghosts."""
    n, m = S.shape
    L = np.zeros((n * m, n * m))
    coefs = (A, B, C, D)
    for i in range(n):
        for j in range(m):
            p = i * m + j
            L[p, p] -= S[i, j]
            for (di, dj), K in zip(DIRS, coefs):
                ii, jj = i + di, j + dj
                q = ii * m + jj if (0 <= ii < n and 0 <= jj < m) else p
                L[p, q] += K[i, j]
    return L


def apply_operator_dense(phi, A, B, C, D, S, f):
    L = operator_matrix(A, B, C, D, S)
    return (L @ phi.ravel()).reshape(phi.shape) - f


def coefficients_scalar(phi, weight, mu, eps_h, eps_g):
    """Pixel-by-pixel transcription of the five-point coefficients."""
    n, m = phi.shape
    hx, hy = 1.0 / n, 1.0 / m
    G = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            ip, im = min(i + 1, n - 1), max(i - 1, 0)
            jp, jm = min(j + 1, m - 1), max(j - 1, 0)
            px = (phi[ip, j] - phi[im, j]) / (2 * hx)
            py = (phi[i, jp] - phi[i, jm]) / (2 * hy)
            G[i, j] = weight[i, j] / math.sqrt(px * px + py * py + eps_g * eps_g)
    out = {k: np.zeros((n, m)) for k in "ABCDS"}
    for i in range(n):
        for j in range(m):
            dl = eps_h / (math.pi * (eps_h**2 + phi[i, j] ** 2))
            s = mu * dl
            out["A"][i, j] = s / hx**2 * (G[i, j] + G[min(i + 1, n - 1), j]) / 2
            out["B"][i, j] = s / hx**2 * (G[i, j] + G[max(i - 1, 0), j]) / 2
            out["C"][i, j] = s / hy**2 * (G[i, j] + G[i, min(j + 1, m - 1)]) / 2
            out["D"][i, j] = s / hy**2 * (G[i, j] + G[i, max(j - 1, 0)]) / 2
            out["S"][i, j] = out["A"][i, j] + out["B"][i, j] + out["C"][i, j] + out["D"][i, j]
    return out


def tridiagonal_dense(lower, diag, upper):
    n = len(diag)
    M = np.diag(np.asarray(diag, dtype=float))
    for k in range(n - 1):
        M[k + 1, k] = lower[k]
        M[k, k + 1] = upper[k]
    return M


def block_gauss_seidel(L, f, x, blocks):
    """One pass of block Gauss-Seidel on ``L x = f`` over index blocks in order."""
    x = x.copy()
    for blk in blocks:
        blk = np.asarray(blk)
        r = f[blk] - L[blk] @ x + L[np.ix_(blk, blk)] @ x[blk]
        x[blk] = np.linalg.solve(L[np.ix_(blk, blk)], r)
    return x


def column_blocks(n, m):
    return [[i * m + j for i in range(n)] for j in range(m)]


def point_blocks(n, m, order=0):
    if order == 0:
        idx = [(i, j) for i in range(n) for j in range(m)]
    elif order == 1:
        idx = [(i, j) for i in range(n - 1, -1, -1) for j in range(m - 1, -1, -1)]
    elif order == 2:
        idx = [(i, j) for j in range(m) for i in range(n)]
    else:
        idx = [(i, j) for j in range(m - 1, -1, -1) for i in range(n - 1, -1, -1)]
    return [[i * m + j] for i, j in idx]


def vanka_blocks(smallest):
    """Hybrid 1 step II: each jump pixel with its non-lagged in-grid neighbours."""
    n, m = smallest.shape
    blocks = []
    for j in range(m):
        for i in range(n):
            lag = smallest[i, j]
            if lag < 0:
                continue
            blk = [i * m + j]
            for d, (di, dj) in enumerate(DIRS):
                ii, jj = i + di, j + dj
                if d != lag and 0 <= ii < n and 0 <= jj < m:
                    blk.append(ii * m + jj)
            blocks.append(blk)
    return blocks


def directional_blocks(smallest, lag):
    """Hybrid 2 sub-sweep ``lag``: traversal-ordered singletons and starred runs."""
    n, m = smallest.shape
    lines = []
    if lag in (0, 1):
        rows = range(n) if lag == 0 else range(n - 1, -1, -1)
        cols = list(range(m)) if lag == 0 else list(range(m - 1, -1, -1))
        for i in rows:
            lines.append([(i, j) for j in cols])
    else:
        cols = range(m) if lag == 2 else range(m - 1, -1, -1)
        rows = list(range(n)) if lag == 2 else list(range(n - 1, -1, -1))
        for j in cols:
            lines.append([(i, j) for i in rows])
    blocks = []
    for line in lines:
        k = 0
        while k < len(line):
            if smallest[line[k]] != lag:
                blocks.append([line[k]])
                k += 1
                continue
            e = k
            while e + 1 < len(line) and smallest[line[e + 1]] == lag:
                e += 1
            if e == k and k + 1 < len(line):
                e = k + 1
            blocks.append(line[k:e + 1])
            k = e + 1
    return [[i * m + j for i, j in blk] for blk in blocks]


def amplification_brute(A, B, C, D, S, lagged, q=512):
    """Max of the lagged-mode ratio over a ``q x q`` grid of ``[-pi, pi)^2`` high frequencies."""
    a = -np.pi + 2 * np.pi * np.arange(q) / q
    a1, a2 = np.meshgrid(a, a, indexing="ij")
    high = ~((a1 >= -np.pi / 2) & (a1 < np.pi / 2) & (a2 >= -np.pi / 2) & (a2 < np.pi / 2))
    terms = {
        "A": A * np.exp(1j * a1), "B": B * np.exp(-1j * a1),
        "C": C * np.exp(1j * a2), "D": D * np.exp(-1j * a2),
    }
    num = sum(terms[k] for k in "ABCD" if k in lagged)
    den = S - sum(terms[k] for k in "ABCD" if k not in lagged)
    r = np.abs(num) / np.abs(den)
    return float(r[high].max())
