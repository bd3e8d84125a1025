"""Smoothers for the frozen-coefficient level-set systems.

Every sweep works on the linearised system

    A*phi[i+1,j] + B*phi[i-1,j] + C*phi[i,j+1] + D*phi[i,j-1] - S*phi[i,j] = f

and updates ``phi`` in place (the array is also returned). The *global*
variants (suffix I) keep ``A..S`` and ``f`` fixed during the sweep, the
*local* ones (suffix II) rebuild the rows touched by each update and need the
owning :class:`~mg_selseg.model.LevelProblem`.

Coefficient labels are coded ``0..3`` for ``A, B, C, D``; ``-1`` means none.
"""
import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ParameterError, SingularSystemError
from .model import StencilField

LABELS = ("A", "B", "C", "D")

# L/S patterns of (A, B, C, D) for the 14 jump cases, in table order
CASE_PATTERNS = (
    "SLLS", "SLSL", "LSLS", "LSSL", "LLSS", "SSLL", "LSSS",
    "SSLS", "SLSS", "SSSL", "LLSL", "LSLL", "LLLS", "SLLL",
)
_CASE_INDEX = {p: k + 1 for k, p in enumerate(CASE_PATTERNS)}


class SmootherKind(str, enum.Enum):
    GSLEX_I = "gslex1"
    GSLEX_II = "gslex2"
    GSLINE_I = "gsline1"
    GSLINE_II = "gsline2"
    NEWT_I = "newton1"
    NEWT_II = "newton2"
    HYBRID1 = "hybrid1"
    HYBRID2 = "hybrid2"

    @property
    def is_local(self):
        return self in (SmootherKind.GSLEX_II, SmootherKind.GSLINE_II, SmootherKind.NEWT_II)


def _check(status, what):
    if status != 0:
        raise SingularSystemError(f"{what}: zero pivot or vanishing diagonal")


def _arrays(coeffs):
    return [np.ascontiguousarray(a, dtype=float) for a in (coeffs.A, coeffs.B, coeffs.C, coeffs.D, coeffs.S)]


# ------------------------------------------------------------------ solvers


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm.

    ``lower`` and ``upper`` may have length ``n - 1`` (pure off-diagonals) or
    ``n`` (row-aligned, ``lower[0]`` and ``upper[-1]`` ignored).
    """
    diag = np.asarray(diag, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if rhs.size != n or n == 0:
        raise ParameterError("diag and rhs must be non-empty and of equal length")
    lo = np.zeros(n)
    up = np.zeros(n)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.size == n - 1:
        lo[1:] = lower
    elif lower.size == n:
        lo[:] = lower
    else:
        raise ParameterError(f"lower has length {lower.size}, expected {n - 1} or {n}")
    if upper.size == n - 1:
        up[:-1] = upper
    elif upper.size == n:
        up[:] = upper
    else:
        raise ParameterError(f"upper has length {upper.size}, expected {n - 1} or {n}")
    out = np.empty(n)
    _check(K.thomas(lo, diag.copy(), up, rhs.copy(), out, np.empty(n), np.empty(n), n), "tridiagonal solve")
    return out


def solve_arrow4(matrix4, rhs4):
    """Solve a 4x4 system with dense first row and column and diagonal tail.

    Entries off the arrow pattern are ignored. Elimination of the tail gives a
    scalar Schur complement for the first unknown.
    """
    M = np.asarray(matrix4, dtype=float)
    b = np.asarray(rhs4, dtype=float)
    if M.shape != (4, 4) or b.shape != (4,):
        raise ParameterError("expected a 4x4 matrix and a length-4 right-hand side")
    x = np.empty(4)
    status = K.arrow_solve(M[0, 0], M[0, 1:].copy(), M[1:, 0].copy(), np.diag(M)[1:].copy(), b[0], b[1:].copy(), x, 3)
    _check(status, "arrow solve")
    return x


# ------------------------------------------------------- jump set and cases


@dataclass(frozen=True)
class CaseMap:
    """Membership of the jump set and the label of the smallest coefficient."""

    in_jump_set: np.ndarray
    smallest: np.ndarray
    sigma_threshold: float = 1.5

    def smallest_labels(self):
        """``smallest`` as an array of ``'A'..'D'`` strings, ``''`` for none."""
        lab = np.array(("",) + LABELS)
        return lab[self.smallest + 1]


def detect_jump_set(coeffs, sigma_threshold=1.5):
    if not sigma_threshold > 1:
        raise ParameterError(f"sigma_threshold must exceed 1, got {sigma_threshold}")
    st = coeffs.stack()
    hi = st.max(axis=0)
    lo = st.min(axis=0)
    inside = hi / np.maximum(lo, np.finfo(float).tiny) > sigma_threshold
    # argmin returns the first minimum, which is the A, B, C, D tie order
    smallest = np.where(inside, np.argmin(st, axis=0), -1).astype(np.int64)
    return CaseMap(inside, smallest, float(sigma_threshold))


def classify_case14(a, b, c, d, threshold=None):
    """Case number 1..14 of a jump pixel from its L/S pattern.

    Coefficients above the midpoint of the pixel's min and max (or above
    ``threshold`` when given) are large.
    """
    v = np.array((a, b, c, d), dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        raise ParameterError("all coefficients equal: pixel is not in the jump set")
    t = 0.5 * (lo + hi) if threshold is None else threshold
    pattern = "".join("L" if x > t else "S" for x in v)
    if pattern not in _CASE_INDEX:
        raise ParameterError(f"threshold {t:g} leaves no large/small split")
    return _CASE_INDEX[pattern]


def case_map14(coeffs, casemap):
    """Per-pixel case numbers, 0 outside the jump set."""
    st = coeffs.stack()
    lo = st.min(axis=0)
    hi = st.max(axis=0)
    large = st > 0.5 * (lo + hi)
    code = np.zeros(lo.shape, dtype=np.int64)
    for k, p in enumerate(CASE_PATTERNS):
        want = np.array([ch == "L" for ch in p])
        match = np.all(large == want[:, None, None], axis=0)
        code[match] = k + 1
    return np.where(casemap.in_jump_set, code, 0)


# --------------------------------------------------------------- superpixels


@dataclass(frozen=True)
class Superpixel:
    """A run of pixels solved together in one directional sub-sweep.

    ``line_index`` is ``i`` for lags A/B (runs along ``j``) and ``j`` for
    lags C/D (runs along ``i``); ``start <= end`` are inclusive.
    """

    lag: str
    line_index: int
    start: int
    end: int

    def __len__(self):
        return self.end - self.start + 1


def build_superpixels(casemap, lag):
    """Runs visited by the ``lag`` sub-sweep, in traversal order.

    Mirrors the compiled sweep: a singleton absorbs the next pixel along the
    traversal when one exists.
    """
    code = LABELS.index(lag) if isinstance(lag, str) else int(lag)
    sm = casemap.smallest
    n, m = sm.shape
    along_j = code in (0, 1)
    forward = code in (0, 2)
    nout, nin = (n, m) if along_j else (m, n)
    outer = range(nout) if forward else range(nout - 1, -1, -1)
    inner = list(range(nin)) if forward else list(range(nin - 1, -1, -1))
    runs = []
    for o in outer:
        line = sm[o, :] if along_j else sm[:, o]
        b = 0
        while b < nin:
            if line[inner[b]] != code:
                b += 1
                continue
            e = b
            while e + 1 < nin and line[inner[e + 1]] == code:
                e += 1
            if e == b and b + 1 < nin:
                e = b + 1
            a0, a1 = inner[b], inner[e]
            runs.append(Superpixel(LABELS[code], o, min(a0, a1), max(a0, a1)))
            b = e + 1
    return runs


# ------------------------------------------------------------------ sweeps


def _dummy_ctx(problem, phi):
    if problem is None:
        return np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)), np.array([0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    return problem.weight, problem.fit, problem.ffas, problem.context(phi)


def _need_problem(mode, problem):
    if mode not in ("global", "local"):
        raise ParameterError(f"mode must be 'global' or 'local', got {mode!r}")
    if mode == "local" and problem is None:
        raise ParameterError("local sweeps need the level problem to refresh coefficients")


def gslex_sweep(phi, coeffs, f, mode="global", problem=None, order=0):
    """One pointwise Gauss-Seidel pass.

    ``order`` selects the traversal: 0 rows of increasing ``i`` with ``j``
    ascending, 1 the reverse, 2 columns of increasing ``j`` with ``i``
    ascending, 3 the reverse. In local mode ``coeffs`` and ``f`` are updated
    in place as rows are refreshed.
    """
    _need_problem(mode, problem)
    A, B, C, D, S = _arrays(coeffs)
    f = np.ascontiguousarray(f, dtype=float)
    w, fit, ffas, ctx = _dummy_ctx(problem, phi)
    _check(K.gslex(phi, A, B, C, D, S, f, order, mode == "local", w, fit, ffas, ctx), "gslex sweep")
    return phi


def gsline_sweep(phi, coeffs, f, mode="global", problem=None):
    """Column-by-column line Gauss-Seidel: for each ``j`` solve along ``i``."""
    _need_problem(mode, problem)
    A, B, C, D, S = _arrays(coeffs)
    f = np.ascontiguousarray(f, dtype=float)
    w, fit, ffas, ctx = _dummy_ctx(problem, phi)
    _check(K.gsline(phi, A, B, C, D, S, f, mode == "local", w, fit, ffas, ctx), "gsline sweep")
    return phi


def newton_sweep(phi, coeffs, problem, mode="global"):
    """One lexicographic pass of pointwise Newton on the area-coupled equation.

    With no area term (Spencer-Chen, or ``nu = 0``) this is the GSLEX update.
    """
    _need_problem(mode, problem)
    A, B, C, D, S = _arrays(coeffs)
    ctx = problem.context(phi)
    _check(K.newton(phi, A, B, C, D, S, problem.fit, problem.ffas, mode == "local", problem.weight, ctx), "newton sweep")
    return phi


def hybrid1_sweep(phi, coeffs, f, casemap):
    """GSLINE-I followed by a 4x4 arrow solve at every jump pixel.

    Each arrow system couples the pixel with its three non-lagged neighbours,
    the lagged one being the pixel's smallest coefficient.
    """
    A, B, C, D, S = _arrays(coeffs)
    f = np.ascontiguousarray(f, dtype=float)
    w, fit, ffas, ctx = _dummy_ctx(None, phi)
    _check(K.gsline(phi, A, B, C, D, S, f, False, w, fit, ffas, ctx), "hybrid1 line step")
    _check(K.hybrid1_step2(phi, A, B, C, D, S, f, casemap.smallest), "hybrid1 arrow step")
    return phi


def hybrid2_sweep(phi, coeffs, f, casemap, visits=None):
    """Four directional sub-sweeps lagging A, B, C, D in turn.

    Pixels whose smallest coefficient is the current lag are solved in runs
    (see `build_superpixels`); all others get the GSLEX update. ``visits``
    (shape ``(4, n, m)``) accumulates per-sub-sweep update counts if given.
    """
    A, B, C, D, S = _arrays(coeffs)
    f = np.ascontiguousarray(f, dtype=float)
    if visits is None:
        visits = np.zeros((4,) + phi.shape, dtype=np.int64)
    for lag in range(4):
        _check(K.hybrid2_subsweep(phi, A, B, C, D, S, f, casemap.smallest, lag, visits[lag]), "hybrid2 sub-sweep")
    return phi


def smooth(phi, problem, kind, steps=1, sigma_threshold=1.5, bound=None):
    """Apply ``steps`` smoothing steps, reassembling the frozen system before each.

    With ``bound`` the iterate is clipped to ``[-bound, bound]`` after every
    step.
    """
    kind = SmootherKind(kind)
    for _ in range(steps):
        _step(phi, problem, kind, sigma_threshold)
        if bound is not None:
            np.clip(phi, -bound, bound, out=phi)
    return phi


def _step(phi, problem, kind, sigma_threshold):
    coeffs = problem.coefficients(phi)
    if kind in (SmootherKind.NEWT_I, SmootherKind.NEWT_II):
        newton_sweep(phi, coeffs, problem, "local" if kind.is_local else "global")
    else:
        f = problem.source(phi, coeffs)
        if kind is SmootherKind.GSLEX_I:
            gslex_sweep(phi, coeffs, f)
        elif kind is SmootherKind.GSLEX_II:
            gslex_sweep(phi, coeffs, f, "local", problem)
        elif kind is SmootherKind.GSLINE_I:
            gsline_sweep(phi, coeffs, f)
        elif kind is SmootherKind.GSLINE_II:
            gsline_sweep(phi, coeffs, f, "local", problem)
        else:
            cm = detect_jump_set(coeffs, sigma_threshold)
            if kind is SmootherKind.HYBRID1:
                hybrid1_sweep(phi, coeffs, f, cm)
            else:
                hybrid2_sweep(phi, coeffs, f, cm)


__all__ = [
    "CASE_PATTERNS", "CaseMap", "LABELS", "SmootherKind", "StencilField", "Superpixel",
    "build_superpixels", "case_map14", "classify_case14", "detect_jump_set", "gslex_sweep",
    "gsline_sweep", "hybrid1_sweep", "hybrid2_sweep", "newton_sweep", "smooth",
    "solve_arrow4", "solve_tridiagonal",
]
