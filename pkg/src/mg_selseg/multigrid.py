"""Nonlinear (FAS) multigrid V-cycles and the outer segmentation loop."""
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import CoarseSolverError, DegenerateRegionError, DivergenceError, ParameterError
from .grid import Field2D, build_hierarchy, interpolate, restrict
from .model import (
    LevelProblem, ModelKind, ModelParams, distance_map, edge_detector, energy,
    initial_phi, polygon_area, region_means,
)
from .smoothers import SmootherKind, gsline_sweep, smooth


@dataclass(frozen=True)
class CycleConfig:
    """Multigrid cycle settings.

    ``phi_bound`` clips the level set to ``[-phi_bound, phi_bound]`` after
    every smoothing step and coarse-grid correction (``None`` disables it).
    Without it, pixels away from the zero level set drift without limit,
    since the fitting term keeps pushing them once the front has settled.

    ``coarse_refresh`` rebuilds the coarsest-level coefficients before every
    coarse sweep (the default); ``False`` freezes them at the coarse entry
    iterate, which keeps the coarse solve from saturating ``phi`` on some
    Spencer-Chen instances.

    ``nu1 = nu2 = 0`` is accepted here so that degenerate cycles can be
    studied; `segment` insists on at least one smoothing step.
    """

    gamma: int = 1
    nu1: int = 3
    nu2: int = 3
    coarse_iters: int = 100
    smoother: SmootherKind = SmootherKind.HYBRID2
    eta: float = 1e-4
    max_cycles: int = 50
    sigma_jump: float = 1.5
    coarsest: int = 32
    phi_bound: float = 1.0
    coarse_refresh: bool = True

    def __post_init__(self):
        object.__setattr__(self, "smoother", SmootherKind(self.smoother))
        if self.gamma < 1:
            raise ParameterError("gamma must be at least 1")
        if min(self.nu1, self.nu2, self.coarse_iters) < 0:
            raise ParameterError("smoothing and coarse iteration counts must be non-negative")
        if not self.eta > 0:
            raise ParameterError("eta must be positive")
        if self.max_cycles < 1:
            raise ParameterError("max_cycles must be at least 1")
        if not self.sigma_jump > 1:
            raise ParameterError("sigma_jump must exceed 1")
        if self.phi_bound is not None and not self.phi_bound > 0:
            raise ParameterError("phi_bound must be positive or None")

    def check_smoothing(self):
        if self.nu1 + self.nu2 < 1:
            raise ParameterError("nu1 + nu2 >= 1 required")


@dataclass
class SolveStats:
    cycles_run: int = 0
    energy_per_cycle: list = field(default_factory=list)
    rel_change_per_cycle: list = field(default_factory=list)
    residual_norm_per_cycle: list = field(default_factory=list)
    wall_time_total: float = 0.0
    phase_times: dict = field(default_factory=dict)
    converged: bool = False
    means: list = field(default_factory=list)

    @property
    def hit_max_cycles(self):
        return not self.converged


def restrict_problem(z, d, g):
    """Full-weighting restriction of the image-derived fields to the next level."""
    return restrict(z), restrict(d), restrict(g)


def _free_residual_rms(phi, problem, bound):
    r = problem.residual(phi)
    if bound is not None:
        r[np.abs(phi) >= bound] = 0.0
    return float(np.sqrt(np.mean(r * r)))


def coarse_solve(phi, problem, iters=100, bound=None, refresh=True):
    """``iters`` GSLINE-I sweeps, rebuilding coefficients before each sweep if ``refresh``.

    Raises `CoarseSolverError` when the residual grows for 10 sweeps in a row
    and its RMS exceeds ``bound`` (1 without a bound). The residual is in
    Jacobi-scaled form, i.e. measured in units of ``phi``, so that level means
    the pending correction is larger than the level set's whole range. Pixels
    held at ``bound`` are left out.
    """
    limit = 1.0 if bound is None else bound
    last = np.inf
    growth = 0
    coeffs = problem.coefficients(phi)
    for it in range(iters):
        if refresh and it > 0:
            coeffs = problem.coefficients(phi)
        gsline_sweep(phi, coeffs, problem.source(phi, coeffs))
        if bound is not None:
            np.clip(phi, -bound, bound, out=phi)
        if not np.all(np.isfinite(phi)):
            raise CoarseSolverError("coarse iterate became non-finite")
        res = _free_residual_rms(phi, problem, bound)
        growth = growth + 1 if res > last else 0
        if growth >= 10 and res > limit:
            raise CoarseSolverError(f"coarse residual grew for 10 consecutive sweeps (RMS {res:.3g})")
        last = res
    return phi


def fas_vcycle(phi, problems, config, level=0):
    """One FAS cycle starting at ``problems[level]``; updates ``phi`` in place.

    ``problems`` holds one `LevelProblem` per grid, finest first. The FAS
    source of every coarser problem is overwritten on the way down.
    """
    prob = problems[level]
    if level == len(problems) - 1:
        return coarse_solve(phi, prob, config.coarse_iters, config.phi_bound, config.coarse_refresh)
    smooth(phi, prob, config.smoother, config.nu1, config.sigma_jump, config.phi_bound)
    r = prob.residual(phi)
    if config.phi_bound is not None:
        # pixels held at the bound carry no usable residual
        r[np.abs(phi) >= config.phi_bound] = 0.0
    coarse = problems[level + 1]
    phic = restrict(phi)
    # each level's residual is divided by its own diagonal, which grows like
    # 1/h^2; both spacings double on the coarse grid
    coarse.ffas = coarse.operator(phic) + 4.0 * restrict(r)
    start = phic.copy()
    for _ in range(config.gamma):
        fas_vcycle(phic, problems, config, level + 1)
    corr = interpolate(phic - start)
    if not np.all(np.isfinite(corr)):
        raise DivergenceError(f"non-finite coarse correction at level {level}")
    if config.phi_bound is not None:
        # the bound set is left to the smoother, matching the projected residual
        corr[np.abs(phi) >= config.phi_bound] = 0.0
    phi += corr
    if config.phi_bound is not None:
        np.clip(phi, -config.phi_bound, config.phi_bound, out=phi)
    smooth(phi, prob, config.smoother, config.nu2, config.sigma_jump, config.phi_bound)
    return phi


@dataclass
class _Levels:
    z: list
    d: list
    g: list


def _prepare(z, markers, params, kind, coarsest):
    n, m = z.shape
    hier = build_hierarchy(n, m, coarsest)
    d = distance_map(markers, params.sigma, z.shape)
    g = edge_detector(z, params.beta)
    lv = _Levels([z], [d], [g])
    for _ in range(len(hier) - 1):
        zc, dc, gc = restrict_problem(lv.z[-1], lv.d[-1], lv.g[-1])
        lv.z.append(zc)
        lv.d.append(dc)
        lv.g.append(gc)
    return hier, lv


def _problems(lv, c1, c2, params, kind, area):
    return [LevelProblem.from_image(z, d, g, c1, c2, params, kind, area) for z, d, g in zip(lv.z, lv.d, lv.g)]


def segment(z, markers, params=None, kind=ModelKind.RADA_CHEN, config=None):
    """Selective segmentation of ``z`` around ``markers``.

    Returns ``(phi, mask, stats)`` with ``phi`` and the 0/1 ``mask`` as
    `Field2D` objects. A constant image raises `DegenerateRegionError`.
    """
    params = ModelParams() if params is None else params
    config = CycleConfig() if config is None else config
    config.check_smoothing()
    kind = ModelKind(kind)
    z = z.values if isinstance(z, Field2D) else np.asarray(z, dtype=float)
    if markers.shape is not None and tuple(markers.shape) != z.shape:
        raise ParameterError(f"markers were checked against {markers.shape}, image is {z.shape}")
    if np.ptp(z) <= 1e-12 * max(1.0, float(np.abs(z).max())):
        raise DegenerateRegionError("image has no contrast, so both region means coincide")
    n, m = z.shape
    for x, y in markers.points:
        if not (0 <= x < n and 0 <= y < m):
            raise ParameterError(f"marker ({x:g}, {y:g}) outside the {n}x{m} image")

    stats = SolveStats()
    t0 = time.perf_counter()
    _, lv = _prepare(z, markers, params, kind, config.coarsest)
    area = polygon_area(markers, z.shape)
    phi = initial_phi(markers, z.shape)
    c1, c2 = region_means(z, phi, params.eps_heaviside)
    stats.phase_times["setup"] = time.perf_counter() - t0

    t_cycles = time.perf_counter()
    for _ in range(config.max_cycles):
        problems = _problems(lv, c1, c2, params, kind, area)
        old = phi.copy()
        fas_vcycle(phi, problems, config)
        if not np.all(np.isfinite(phi)):
            raise DivergenceError(f"level set became non-finite in cycle {stats.cycles_run + 1}")
        rel = float(np.linalg.norm(phi - old) / max(np.linalg.norm(old), 1e-300))
        c1, c2 = region_means(z, phi, params.eps_heaviside)
        stats.cycles_run += 1
        stats.rel_change_per_cycle.append(rel)
        stats.energy_per_cycle.append(energy(phi, z, lv.d[0], lv.g[0], c1, c2, params, kind, area))
        stats.residual_norm_per_cycle.append(float(np.linalg.norm(problems[0].residual(phi))))
        stats.means.append((c1, c2))
        if rel < config.eta:
            stats.converged = True
            break
    stats.phase_times["cycles"] = time.perf_counter() - t_cycles
    stats.wall_time_total = time.perf_counter() - t0
    return Field2D(phi), Field2D((phi > 0).astype(float)), stats


def tune_smoothing(z, markers, params=None, kind=ModelKind.RADA_CHEN, config=None, nus=range(1, 7)):
    """Cycle counts for ``nu1 = nu2 = nu`` over ``nus``.

    Returns a list of dicts with keys ``nu``, ``cycles``, ``converged`` and
    ``flag``; ``nu = 0`` rows are flagged and not run. The recommended value
    is the first ``nu`` whose cycle count matches the minimum over the range.
    """
    config = CycleConfig() if config is None else config
    rows = []
    for nu in nus:
        if nu < 1:
            rows.append({"nu": int(nu), "cycles": None, "converged": False, "flag": "invalid: nu1 + nu2 >= 1 violated"})
            continue
        cfg = CycleConfig(**{**config.__dict__, "nu1": int(nu), "nu2": int(nu)})
        _, _, st = segment(z, markers, params, kind, cfg)
        rows.append({"nu": int(nu), "cycles": st.cycles_run, "converged": st.converged, "flag": ""})
    valid = [r for r in rows if r["cycles"] is not None]
    if valid:
        best = min(r["cycles"] for r in valid)
        for r in valid:
            if r["cycles"] == best:
                r["flag"] = "recommended"
                break
    return rows
