"""Multigrid solvers with adaptive smoothers for selective level-set segmentation."""
from .errors import (
    CoarseSolverError, DegenerateRegionError, DimensionError, DivergenceError,
    FormatError, NumericError, ParameterError, SelSegError, SingularSystemError,
)
from .grid import Field2D, GridHierarchy, build_hierarchy, interpolate, restrict
from .model import LevelProblem, MarkerSet, ModelKind, ModelParams, StencilField
from .lfa import FrequencyGrid, rate_report
from .multigrid import CycleConfig, SolveStats, segment
from .smoothers import SmootherKind

__version__ = "0.1.0"
