"""Cell-centred grid fields, the coarsening hierarchy and intergrid transfers.

Arrays are indexed ``[i, j]`` with ``i`` running along x (the A/B neighbours
sit at ``i +/- 1``) and ``j`` along y (C/D neighbours at ``j +/- 1``). A field
of ``n`` columns and ``m`` rows is therefore stored with shape ``(n, m)``.
The domain is the unit square, so ``hx = 1/n`` and ``hy = 1/m`` on every
level.

The transfer operators transcribe the classical vertex-style formulas with
1-based indices: coarse pixel ``I`` (0-based) is centred on fine pixel
``2I + 1``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericError


def spacing(shape):
    """Return ``(hx, hy)`` for a field of the given ``(n, m)`` shape."""
    n, m = shape
    return 1.0 / n, 1.0 / m


@dataclass(frozen=True)
class Field2D:
    """A scalar field on an ``n x m`` cell-centred grid over the unit square."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 1:
            raise DimensionError(f"field must be a non-empty 2D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NumericError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def hx(self):
        return 1.0 / self.n

    @property
    def hy(self):
        return 1.0 / self.m


@dataclass(frozen=True)
class GridHierarchy:
    """Level dimensions from finest (index 0) to coarsest."""

    levels: list = field(default_factory=list)
    coarsest_size: int = 32

    def __len__(self):
        return len(self.levels)


def build_hierarchy(n, m, coarsest=32):
    """Halve ``(n, m)`` until a further halving would drop below ``coarsest``.

    Raises
    ------
    DimensionError
        If the image is smaller than ``coarsest`` or an odd dimension is met
        before the floor is reached. The message names the largest crop that
        supports the same number of levels.
    """
    if coarsest < 1:
        raise DimensionError("coarsest size must be positive")
    if min(n, m) < coarsest:
        raise DimensionError(f"image {n}x{m} is smaller than the coarsest grid {coarsest}")
    depth = int(np.floor(np.log2(min(n, m) / coarsest))) + 1
    block = 2 ** (depth - 1)
    if n % block or m % block:
        crop = (n // block * block, m // block * block)
        raise DimensionError(
            f"image {n}x{m} cannot be halved {depth - 1} times; "
            f"largest valid crop is {crop[0]}x{crop[1]}"
        )
    levels = [(n // 2**k, m // 2**k) for k in range(depth)]
    return GridHierarchy(levels=levels, coarsest_size=coarsest)


def largest_crop(n, m, coarsest=32):
    """Largest ``(n', m')`` with ``n' <= n``, ``m' <= m`` accepted by `build_hierarchy`."""
    depth = int(np.floor(np.log2(min(n, m) / coarsest))) + 1
    block = 2 ** (depth - 1)
    return n // block * block, m // block * block


def restrict(fine):
    """Full-weighting restriction to the ``(n/2, m/2)`` grid.

    Interior coarse pixels use the 9-point stencil ``[1 2 1; 2 4 2; 1 2 1]/16``
    centred on fine pixel ``(2I+1, 2J+1)``. The last coarse column and row use
    two-point averages across the boundary; the corner averages both rules.
    """
    if isinstance(fine, Field2D):
        return Field2D(restrict(fine.values))
    f = np.asarray(fine, dtype=float)
    n, m = f.shape
    if n % 2 or m % 2:
        raise DimensionError(f"restriction needs even dimensions, got {n}x{m}")
    nc, mc = n // 2, m // 2
    out = np.empty((nc, mc))

    if nc > 1 and mc > 1:
        w = (1.0, 2.0, 1.0)
        acc = np.zeros((nc - 1, mc - 1))
        for a in range(3):
            for b in range(3):
                acc += w[a] * w[b] * f[a:a + 2 * (nc - 1):2, b:b + 2 * (mc - 1):2]
        out[:-1, :-1] = acc / 16.0
    # last column (j = mc - 1): average the two fine pixels straddling the edge
    out[:-1, -1] = 0.5 * (f[1:n - 2:2, m - 2] + f[1:n - 2:2, m - 1])
    out[-1, :-1] = 0.5 * (f[n - 2, 1:m - 2:2] + f[n - 1, 1:m - 2:2])
    out[-1, -1] = 0.25 * (f[n - 2, m - 1] + f[n - 1, m - 2]) + 0.5 * f[n - 1, m - 1]
    return out


def _prolong_axis0(c):
    nc = c.shape[0]
    out = np.empty((2 * nc,) + c.shape[1:])
    out[1::2] = c
    out[2::2] = 0.5 * (c[:-1] + c[1:])
    out[0] = c[0]
    return out


def interpolate(coarse):
    """Bilinear interpolation to the ``(2n, 2m)`` grid.

    Coarse values are copied to fine pixels ``(2I+1, 2J+1)``; the pixels in
    between receive two- or four-point averages. Fine row/column 0 would need a
    coarse value outside the grid and replicates its nearest valid neighbour.
    """
    if isinstance(coarse, Field2D):
        return Field2D(interpolate(coarse.values))
    c = np.asarray(coarse, dtype=float)
    if c.ndim != 2 or min(c.shape) < 2:
        raise DimensionError(f"interpolation needs a coarse grid of at least 2x2, got {c.shape}")
    return _prolong_axis0(_prolong_axis0(c).T).T
