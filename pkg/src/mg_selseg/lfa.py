"""Local Fourier analysis of the pointwise, line and lagged smoothers.

For frozen coefficients at one pixel, a smoother that keeps the neighbours in
``lagged`` at the old iterate and takes all others at the new one amplifies
the error mode ``exp(i(a1*i + a2*j))`` by

    |sum_{K in lagged} K e_K| / |S - sum_{K not in lagged} K e_K|

with phase factors ``e_A = exp(i a1)``, ``e_B = exp(-i a1)``,
``e_C = exp(i a2)``, ``e_D = exp(-i a2)``. Lexicographic Gauss-Seidel lags
``{A, C}`` and the column-line smoother lags ``{C}``. The smoothing rate is
the maximum over the high-frequency set ``[-pi, pi)^2 \\ [-pi/2, pi/2)^2``.
"""
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ParameterError
from .grid import Field2D
from .smoothers import LABELS, SmootherKind

LEX = frozenset("AC")
LINE = frozenset("C")


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform ``Q x Q`` samples of ``[-pi, pi)^2`` restricted to high frequencies."""

    samples_per_axis: int = 256
    alpha: np.ndarray = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = int(self.samples_per_axis)
        if q < 16:
            raise ParameterError(f"need at least 16 samples per axis, got {q}")
        a = -np.pi + 2 * np.pi * np.arange(q) / q
        a = np.unique(np.concatenate((a, [-np.pi, -np.pi / 2, 0.0, np.pi / 2])))
        a1, a2 = np.meshgrid(a, a, indexing="ij")
        low = (a1 >= -np.pi / 2) & (a1 < np.pi / 2) & (a2 >= -np.pi / 2) & (a2 < np.pi / 2)
        object.__setattr__(self, "samples_per_axis", q)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "points", np.column_stack((a1[~low], a2[~low])))

    def __len__(self):
        return len(self.points)


@nb.njit(cache=True, nogil=True)
def _amp_max(K, S, lagged, c1, s1, c2, s2):
    """Max squared ratio, argmax index and the number of singular samples."""
    best = -1.0
    arg = -1
    sing = 0
    tol = (1e-14 * S) ** 2
    for p in range(c1.size):
        # phases: A e^{i a1}, B e^{-i a1}, C e^{i a2}, D e^{-i a2}
        nr = 0.0
        ni = 0.0
        dr = S
        di = 0.0
        for k in range(4):
            if k < 2:
                cr = K[k] * c1[p]
                ci = K[k] * s1[p] * (1.0 if k == 0 else -1.0)
            else:
                cr = K[k] * c2[p]
                ci = K[k] * s2[p] * (1.0 if k == 2 else -1.0)
            if lagged[k]:
                nr += cr
                ni += ci
            else:
                dr -= cr
                di -= ci
        den = dr * dr + di * di
        if den <= tol:
            sing += 1
            continue
        r = (nr * nr + ni * ni) / den
        if r > best:
            best = r
            arg = p
    return best, arg, sing


@nb.njit(cache=True, nogil=True)
def _amp_field(K4, S, lagmask, c1, s1, c2, s2, out, sing):
    for t in range(S.size):
        b, _, s = _amp_max(K4[t], S[t], lagmask[t], c1, s1, c2, s2)
        out[t] = math.sqrt(b) if b >= 0 else np.nan
        sing[t] = s


def _tables(freq):
    p = freq.points
    return np.cos(p[:, 0]), np.sin(p[:, 0]), np.cos(p[:, 1]), np.sin(p[:, 1])


def _mask(lagged):
    if isinstance(lagged, str):
        lagged = set(lagged)
    lagged = frozenset(LABELS[x] if isinstance(x, (int, np.integer)) else str(x).upper() for x in lagged)
    if not lagged or lagged == frozenset(LABELS) or not lagged <= frozenset(LABELS):
        raise ParameterError(f"lagged set must be a non-empty proper subset of ABCD, got {sorted(lagged)}")
    return np.array([c in lagged for c in LABELS])


@dataclass(frozen=True)
class Amplification:
    value: float
    argmax: tuple
    singular_samples: int = 0

    def __float__(self):
        return self.value


def amplification(A, B, C, D, S, lagged, freq=None):
    """Rate with maximiser and singular-sample count for one coefficient tuple."""
    freq = FrequencyGrid() if freq is None else freq
    if not S > 0:
        raise ParameterError(f"S must be positive, got {S}")
    K = np.array([A, B, C, D], dtype=float)
    best, arg, sing = _amp_max(K, float(S), _mask(lagged), *_tables(freq))
    if arg < 0:
        return Amplification(float("nan"), (float("nan"), float("nan")), int(sing))
    a = freq.points[arg]
    return Amplification(math.sqrt(best), (float(a[0]), float(a[1])), int(sing))


def amp_adapted(A, B, C, D, S, lagged, freq=None):
    return amplification(A, B, C, D, S, lagged, freq).value


def amp_lex(A, B, C, D, S, freq=None):
    """Rate of pointwise lexicographic Gauss-Seidel (also used for Newton)."""
    return amplification(A, B, C, D, S, LEX, freq).value


def amp_line(A, B, C, D, S, freq=None):
    """Rate of the column-line Gauss-Seidel smoother."""
    return amplification(A, B, C, D, S, LINE, freq).value


def pixel_rates(coeffs, lagmask, freq=None):
    """``mu_hat`` per pixel; ``lagmask`` has shape ``(4, n, m)`` or ``(4,)``."""
    freq = FrequencyGrid() if freq is None else freq
    st = coeffs.stack()
    shape = st.shape[1:]
    K4 = st.reshape(4, -1).T
    S = np.asarray(coeffs.S, dtype=float).ravel()
    lm = np.asarray(lagmask, dtype=bool)
    lm = np.broadcast_to(lm.reshape(4, -1) if lm.ndim == 3 else lm[:, None], (4, S.size)).T
    # identical stencils share one evaluation
    key = np.column_stack((K4, S, lm))
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    out = np.empty(len(uniq))
    sing = np.zeros(len(uniq), dtype=np.int64)
    _amp_field(
        np.ascontiguousarray(uniq[:, :4]), np.ascontiguousarray(uniq[:, 4]),
        np.ascontiguousarray(uniq[:, 5:].astype(bool)), *_tables(freq), out, sing,
    )
    inv = inv.ravel()
    return out[inv].reshape(shape), sing[inv].reshape(shape)


def _lagmask_for(kind, casemap):
    kind = SmootherKind(kind)
    base = _mask(LINE if kind in (SmootherKind.GSLINE_I, SmootherKind.GSLINE_II, SmootherKind.HYBRID1) else LEX)
    shape = casemap.smallest.shape
    lm = np.broadcast_to(base[:, None, None], (4,) + shape).copy()
    if kind in (SmootherKind.HYBRID1, SmootherKind.HYBRID2):
        jd = casemap.in_jump_set
        for k in range(4):
            lm[k][jd] = casemap.smallest[jd] == k
    return lm


@dataclass
class LfaReport:
    mu_max: float
    mu_avg: float
    mu_max_D: float
    mu_avg_D: float
    mu_max_notD: float
    mu_avg_notD: float
    worst_pixels: list
    rate_map: Field2D
    singular_samples: int = 0

    @property
    def flagged(self):
        return self.singular_samples > 0

    def above(self, threshold):
        """Binary map of pixels whose rate exceeds ``threshold``."""
        return self.rate_map.values > threshold


def rate_report(coeffs, kind, casemap, freq=None, worst=10):
    """Grid-wide LFA of one smoother on a frozen coefficient field.

    Hybrid kinds lag only the smallest coefficient on jump pixels and fall
    back to the line (Hybrid 1) or lexicographic (Hybrid 2) rate elsewhere.
    """
    rates, sing = pixel_rates(coeffs, _lagmask_for(kind, casemap), freq)
    jd = casemap.in_jump_set

    def stats(sel):
        v = rates[sel]
        return (float(v.max()), float(v.mean())) if v.size else (0.0, 0.0)

    mx, _ = stats(np.ones_like(jd))
    avg = float(rates.sum() / rates.size)
    mxd, avd = stats(jd)
    mxn, avn = stats(~jd)
    order = np.argsort(-rates, axis=None, kind="stable")[:worst]
    rows = []
    for flat in order:
        i, j = np.unravel_index(flat, rates.shape)
        rows.append((int(i), int(j), float(rates[i, j]),
                     float(coeffs.A[i, j]), float(coeffs.B[i, j]), float(coeffs.C[i, j]), float(coeffs.D[i, j])))
    return LfaReport(mx, avg, mxd, avd, mxn, avn, rows, Field2D(rates), int(sing.sum()))
