"""Numerical toolkit for ARCH(infinity) processes.

The model is ``X(k) = s(k) xi(k)`` with ``s(k) = a + sum_{j>=1} b(j) X(k-j)``
and i.i.d. non-negative shocks ``xi``. The package computes the resolvent
``z`` of the kernel ``b``, decides the second-order stationarity conditions,
evaluates the autocovariance ``rho`` and checks its decay against the
kernel, and simulates paths for Monte Carlo cross-validation.
"""

from .asymptotics import (
    DecayDiagnostics,
    PeriodicConstants,
    RatioKind,
    bound_ratio_sup,
    diagnose,
    geometric_fit,
    loglog_slope,
    periodic2_constants,
    periodic3_constants,
    periodic_limits,
    ratio_limit_check,
)
from .autocovariance import AutocovReport, chi_z, rho, variation_of_parameters_rho, yule_walker_residual
from .errors import (
    ArchInftyError,
    DegenerateKernelWarning,
    DomainError,
    HorizonError,
    NoStationarySolutionError,
    StationarityError,
    TheoremNotApplicableError,
    TruncationWarning,
)
from .interval import Interval, Verdict
from .kernel import (
    Geometric,
    KernelSpec,
    LogModulatedPowerLaw,
    PeriodicPowerLaw,
    PowerLaw,
    Table,
    corrected_kernel_sum,
    kernel_from_dict,
    kernel_sum,
    load_table_csv,
    squared_kernel_sum,
    weighted_kernel_sum,
    wr_diagnostic,
)
from .resolvent import (
    ResolventSeries,
    compute_resolvent,
    kernel_from_resolvent,
    resolvent_sum_identity,
    ulm_iteration,
    ztransform_check,
)
from .simulate import (
    Exponential,
    Gamma,
    LogNormal,
    PathConfig,
    ScaledBernoulli,
    SimResult,
    Uniform,
    empirical_autocovariance,
    simulate,
    simulate_path,
)
from .stationarity import MomentSpec, StationarityReport, check_stationarity, compute_omega, process_scalars

__all__ = [
    "DecayDiagnostics",
    "PeriodicConstants",
    "RatioKind",
    "bound_ratio_sup",
    "diagnose",
    "geometric_fit",
    "loglog_slope",
    "periodic2_constants",
    "periodic3_constants",
    "periodic_limits",
    "ratio_limit_check",
    "AutocovReport",
    "chi_z",
    "rho",
    "variation_of_parameters_rho",
    "yule_walker_residual",
    "ArchInftyError",
    "DegenerateKernelWarning",
    "DomainError",
    "HorizonError",
    "NoStationarySolutionError",
    "StationarityError",
    "TheoremNotApplicableError",
    "TruncationWarning",
    "Interval",
    "Verdict",
    "Geometric",
    "KernelSpec",
    "LogModulatedPowerLaw",
    "PeriodicPowerLaw",
    "PowerLaw",
    "Table",
    "corrected_kernel_sum",
    "kernel_from_dict",
    "kernel_sum",
    "load_table_csv",
    "squared_kernel_sum",
    "weighted_kernel_sum",
    "wr_diagnostic",
    "ResolventSeries",
    "compute_resolvent",
    "kernel_from_resolvent",
    "resolvent_sum_identity",
    "ulm_iteration",
    "ztransform_check",
    "Exponential",
    "Gamma",
    "LogNormal",
    "PathConfig",
    "ScaledBernoulli",
    "SimResult",
    "Uniform",
    "empirical_autocovariance",
    "simulate",
    "simulate_path",
    "MomentSpec",
    "StationarityReport",
    "check_stationarity",
    "compute_omega",
    "process_scalars",
]

__version__ = "0.1.0"
