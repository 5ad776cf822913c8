"""Closed-form distances along the fast-diffusion / porous-medium Fokker-Planck
flow, their high-dimensional cutoff scans, and independent numerical oracles.
"""

from .barenblatt import (
    ModelParams,
    Regime,
    asymptotic_targets,
    density_at,
    lm_norm,
    moment,
    moment_gap,
    params_from_alpha,
    params_from_m,
    support_radius,
)
from .cutoff import Metric, ScheduleSpec, Side, critical_time, scan, sup_distance, trend_fit
from .divergences import DivergenceReport, distance_report, entropy_flow, fisher_flow, w2_sq_flow
from .dynamics import flow_state, scale_factor, solution_density
from .errors import (
    ConstraintError,
    ConvergenceError,
    DomainError,
    FdCutoffError,
    InfiniteMoment,
    InsufficientData,
    PreconditionError,
    ResolutionError,
    StabilityError,
    UnsupportedSize,
)

__version__ = "0.1.0"
