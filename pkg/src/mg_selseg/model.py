"""Assembly of the Rada-Chen and Spencer-Chen selective segmentation models.

Everything here is vectorised numpy on ``(n, m)`` arrays indexed ``[i, j]``
(see :mod:`mg_selseg.grid`). The discrete equation at pixel ``(i, j)`` is

    A*phi[i+1,j] + B*phi[i-1,j] + C*phi[i,j+1] + D*phi[i,j-1] - S*phi[i,j] = f

with Neumann boundaries realised by mirrored ghost cells (a ghost equals the
pixel it mirrors).
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegionError, NumericError, ParameterError
from .grid import interpolate, restrict, spacing


class ModelKind(str, enum.Enum):
    RADA_CHEN = "rada-chen"
    SPENCER_CHEN = "spencer-chen"


@dataclass(frozen=True)
class ModelParams:
    """Model weights.

    ``sigma`` is measured in unit-square coordinates and ``beta`` multiplies
    ``|grad z|^2`` computed with the unit-square spacing.
    """

    mu: float = 0.5
    lambda1: float = 1e-4
    lambda2: float = 1e-4
    nu: float = 1.0
    theta: float = 1.0
    beta: float = 1.0
    sigma: float = 0.05
    eps_heaviside: float = 1.0
    eps_grad: float = 1e-6

    def __post_init__(self):
        for name in ("mu", "lambda1", "lambda2", "nu", "theta", "beta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ParameterError(f"{name} must be finite and non-negative, got {v}")
        for name in ("sigma", "eps_heaviside", "eps_grad"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class MarkerSet:
    """User-selected pixels as ``(i, j)`` array indices.

    Images are stored as in the file, so ``i`` is the row (downward) and
    ``j`` the column (rightward); `mg_selseg.io.load_markers` swaps the
    ``x y`` order of marker files accordingly.
    """

    points: tuple
    shape: tuple = None

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 3:
            raise ParameterError(f"k >= 3 required, got {len(pts)} marker(s)")
        if self.shape is not None:
            n, m = self.shape
            for x, y in pts:
                if not (0 <= x < n and 0 <= y < m):
                    raise ParameterError(f"marker ({x:g}, {y:g}) outside the {n}x{m} image")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def normalized(self, shape=None):
        """Marker pixel centres in unit-square coordinates, shape ``(k, 2)``."""
        n, m = shape if shape is not None else self.shape
        p = np.array(self.points)
        return np.column_stack(((p[:, 0] + 0.5) / n, (p[:, 1] + 0.5) / m))


@dataclass(frozen=True)
class StencilField:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    S: np.ndarray

    def stack(self):
        return np.stack((self.A, self.B, self.C, self.D))


def heaviside(phi, eps=1.0):
    return 0.5 + np.arctan(np.asarray(phi) / eps) / np.pi


def delta(phi, eps=1.0):
    phi = np.asarray(phi)
    return eps / (np.pi * (eps * eps + phi * phi))


def delta_prime(phi, eps=1.0):
    phi = np.asarray(phi)
    return -2.0 * eps * phi / (np.pi * (eps * eps + phi * phi) ** 2)


def cell_centres(shape):
    n, m = shape
    x = (np.arange(n) + 0.5) / n
    y = (np.arange(m) + 0.5) / m
    return np.meshgrid(x, y, indexing="ij")


def distance_map(markers, sigma, shape):
    """Product of Gaussian notches, zero at every marker and tending to 1 far away."""
    if len(markers.points) == 0:
        raise ParameterError("empty marker set")
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    x, y = cell_centres(shape)
    d = np.ones(shape)
    for xi, yi in markers.normalized(shape):
        d *= 1.0 - np.exp(-((xi - x) ** 2) / (2 * sigma**2)) * np.exp(-((yi - y) ** 2) / (2 * sigma**2))
    return d


def edge_detector(z, beta):
    """``g = 1 / (1 + beta |grad z|^2)``; central differences, one-sided at the border."""
    z = np.asarray(z, dtype=float)
    hx, hy = spacing(z.shape)
    gx = np.gradient(z, hx, axis=0) if z.shape[0] > 1 else np.zeros_like(z)
    gy = np.gradient(z, hy, axis=1) if z.shape[1] > 1 else np.zeros_like(z)
    return 1.0 / (1.0 + beta * (gx * gx + gy * gy))


def region_means(z, phi, eps=1.0):
    """Heaviside-weighted means ``(c1, c2)`` inside and outside the zero level set."""
    z = np.asarray(z, dtype=float)
    h = heaviside(phi, eps)
    hx, hy = spacing(z.shape)
    w_in = h.sum() * hx * hy
    w_out = (1.0 - h).sum() * hx * hy
    if w_in < 1e-12 or w_out < 1e-12:
        raise DegenerateRegionError(f"empty phase: inside weight {w_in:.3g}, outside weight {w_out:.3g}")
    c1 = (h * z).sum() * hx * hy / w_in
    c2 = ((1.0 - h) * z).sum() * hx * hy / w_out
    # rounding can push a mean a hair outside the data range
    lo, hi = z.min(), z.max()
    return float(np.clip(c1, lo, hi)), float(np.clip(c2, lo, hi))


def polygon_area(markers, shape=None):
    """Shoelace area of the marker polygon.

    With ``shape`` (or a shape stored on the marker set) pixel coordinates are
    mapped to the unit square first; otherwise the points are taken as given.
    """
    if isinstance(markers, MarkerSet):
        if shape is not None or markers.shape is not None:
            p = markers.normalized(shape)
        else:
            p = np.array(markers.points)
    else:
        p = np.asarray(markers, dtype=float)
    if len(p) < 3:
        raise ParameterError("k >= 3 required")
    x, y = p[:, 0], p[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if area < 1e-12:
        raise ParameterError("marker polygon is degenerate (collinear points)")
    return float(area)


def inside_polygon(markers, shape):
    """Boolean mask of cell centres inside the marker polygon (even-odd rule)."""
    x, y = cell_centres(shape)
    p = markers.normalized(shape)
    inside = np.zeros(shape, dtype=bool)
    for (x0, y0), (x1, y1) in zip(p, np.roll(p, -1, axis=0)):
        if y0 == y1:
            continue
        crosses = (y0 > y) != (y1 > y)
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xc)
    return inside


def initial_phi(markers, shape):
    """+1 inside the marker polygon, -1 outside, softened by one restrict/interpolate pass."""
    phi = np.where(inside_polygon(markers, shape), 1.0, -1.0)
    if shape[0] % 2 == 0 and shape[1] % 2 == 0 and min(shape) >= 4:
        phi = interpolate(restrict(phi))
    return phi


def _padded(a):
    return np.pad(a, 1, mode="edge")


def grad_norm(phi, eps_grad):
    """Regularised ``|grad phi|`` by central differences with mirrored ghosts."""
    hx, hy = spacing(phi.shape)
    p = _padded(phi)
    px = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2 * hx)
    py = (p[1:-1, 2:] - p[1:-1, :-2]) / (2 * hy)
    return np.sqrt(px * px + py * py + eps_grad * eps_grad)


def edge_weight(d, g, kind):
    """The image-dependent factor inside the divergence."""
    return d * g if ModelKind(kind) is ModelKind.RADA_CHEN else np.asarray(g, dtype=float)


def assemble_coefficients(phi, d, g, params, kind):
    return coefficients_from_weight(phi, edge_weight(d, g, kind), params)


def coefficients_from_weight(phi, weight, params):
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise NumericError("non-finite level set")
    hx, hy = spacing(phi.shape)
    G = weight / grad_norm(phi, params.eps_grad)
    Gp = _padded(G)
    w = params.mu * delta(phi, params.eps_heaviside)
    A = w / hx**2 * 0.5 * (G + Gp[2:, 1:-1])
    B = w / hx**2 * 0.5 * (G + Gp[:-2, 1:-1])
    C = w / hy**2 * 0.5 * (G + Gp[1:-1, 2:])
    D = w / hy**2 * 0.5 * (G + Gp[1:-1, :-2])
    return StencilField(A, B, C, D, A + B + C + D)


def fitting_term(z, d, c1, c2, params, kind):
    """Pixel-wise, phi-independent part of the source (before the delta factor)."""
    z = np.asarray(z, dtype=float)
    t = params.lambda1 * (z - c1) ** 2 - params.lambda2 * (z - c2) ** 2
    if ModelKind(kind) is ModelKind.SPENCER_CHEN:
        t = t + params.theta * np.asarray(d, dtype=float)
    return t


def area_bracket(phi, params, kind, area):
    """``2 nu (hx hy sum H - A1)`` for Rada-Chen, zero for Spencer-Chen."""
    if ModelKind(kind) is not ModelKind.RADA_CHEN:
        return 0.0
    hx, hy = spacing(phi.shape)
    return 2.0 * params.nu * (hx * hy * heaviside(phi, params.eps_heaviside).sum() - area)


def rhs(phi, z, d, c1, c2, params, kind, area=0.0):
    phi = np.asarray(phi, dtype=float)
    fit = fitting_term(z, d, c1, c2, params, kind)
    return delta(phi, params.eps_heaviside) * (fit + area_bracket(phi, params, kind, area))


def apply_operator(phi, coeffs, rhs_field):
    """``A phi_E + B phi_W + C phi_N + D phi_S - S phi - f`` with mirrored ghosts."""
    p = _padded(np.asarray(phi, dtype=float))
    return (
        coeffs.A * p[2:, 1:-1]
        + coeffs.B * p[:-2, 1:-1]
        + coeffs.C * p[1:-1, 2:]
        + coeffs.D * p[1:-1, :-2]
        - coeffs.S * p[1:-1, 1:-1]
        - rhs_field
    )


def energy(phi, z, d, g, c1, c2, params, kind, area=0.0):
    """Discrete model functional, pixel sums weighted by ``hx * hy``."""
    phi = np.asarray(phi, dtype=float)
    z = np.asarray(z, dtype=float)
    hx, hy = spacing(phi.shape)
    eps = params.eps_heaviside
    h = heaviside(phi, eps)
    length = params.mu * np.sum(edge_weight(d, g, kind) * delta(phi, eps) * grad_norm(phi, params.eps_grad))
    fit = np.sum(params.lambda1 * (z - c1) ** 2 * h + params.lambda2 * (z - c2) ** 2 * (1.0 - h))
    e = (length + fit) * hx * hy
    if ModelKind(kind) is ModelKind.RADA_CHEN:
        inside = h.sum() * hx * hy
        e += params.nu * ((inside - area) ** 2 + ((1.0 - inside) - (1.0 - area)) ** 2)
    else:
        e += params.theta * np.sum(np.asarray(d) * h) * hx * hy
    return float(e)


@dataclass
class LevelProblem:
    """Everything a smoother needs on one grid level.

    The level equations are kept in Jacobi-scaled form,

        N(phi) = (A phi_E + B phi_W + C phi_N + D phi_S - S phi - f_model) / S = ffas,

    with ``f_model = delta(phi) * (fit + bracket(phi))`` and all coefficients
    taken from ``phi``. Dividing each row by its own diagonal leaves pointwise
    and line updates untouched but keeps residuals comparable between pixels
    whose coefficients differ by many orders of magnitude, which the FAS
    coarse-grid correction relies on. ``ffas`` vanishes on the finest grid.
    """

    weight: np.ndarray
    fit: np.ndarray
    params: ModelParams
    kind: ModelKind
    area: float = 0.0
    ffas: np.ndarray = None

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        self.weight = np.ascontiguousarray(self.weight, dtype=float)
        self.fit = np.ascontiguousarray(self.fit, dtype=float)
        if self.ffas is None:
            self.ffas = np.zeros_like(self.fit)
        if not (self.weight.shape == self.fit.shape == self.ffas.shape):
            raise ParameterError("level fields must share one shape")

    @classmethod
    def from_image(cls, z, d, g, c1, c2, params, kind, area=0.0):
        return cls(edge_weight(d, g, kind), fitting_term(z, d, c1, c2, params, kind), params, kind, area)

    @property
    def shape(self):
        return self.fit.shape

    @property
    def two_nu(self):
        return 2.0 * self.params.nu if self.kind is ModelKind.RADA_CHEN else 0.0

    def coefficients(self, phi):
        return coefficients_from_weight(phi, self.weight, self.params)

    def bracket(self, phi):
        hx, hy = spacing(self.shape)
        hsum = heaviside(phi, self.params.eps_heaviside).sum()
        return self.two_nu * (hx * hy * hsum - self.area)

    def model_source(self, phi):
        return delta(phi, self.params.eps_heaviside) * (self.fit + self.bracket(phi))

    def source(self, phi, coeffs=None):
        """Right-hand side ``f`` of the frozen linear system, FAS term included."""
        coeffs = self.coefficients(phi) if coeffs is None else coeffs
        return self.model_source(phi) + self.ffas * coeffs.S

    def operator(self, phi, coeffs=None):
        """Scaled nonlinear operator ``N(phi)``."""
        coeffs = self.coefficients(phi) if coeffs is None else coeffs
        raw = apply_operator(phi, coeffs, self.model_source(phi))
        return np.divide(raw, coeffs.S, out=raw.copy(), where=coeffs.S > 0)

    def residual(self, phi, coeffs=None):
        return self.ffas - self.operator(phi, coeffs)

    def context(self, phi):
        hx, hy = spacing(self.shape)
        p = self.params
        hsum = heaviside(phi, p.eps_heaviside).sum()
        return np.array([p.mu, p.eps_heaviside, p.eps_grad, hx, hy, self.two_nu, self.area, hsum])
