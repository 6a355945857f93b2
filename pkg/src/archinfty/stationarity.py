"""Second-order stationarity conditions and the process-level moments.

With ``sigma2 = lambda2 - lambda1**2`` and ``B = sum_j b(j)``, a weakly
stationary solution exists iff

    (S1)  lambda1 * B < 1,
    (S2)  Omega = (sigma / lambda1) * (sum_{j>=1} z(j)**2) ** 0.5 < 1.

Three sufficient conditions are also evaluated: ``con2`` (``sqrt(lambda2) B < 1``),
``con3`` (``lambda2 < lambda1**2 + (1 - lambda1 B)**2 / sum b**2``) and
``newcondbetter`` (``lambda1 B < (1 - Q/B**2) / (1 + Q/B**2)`` with ``Q = sum b**2``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, NoStationarySolutionError
from .interval import Interval, Verdict, below
from .kernel import KernelSpec, kernel_sum, squared_kernel_sum, weighted_kernel_sum
from .resolvent import ResolventSeries, compute_resolvent, series_tail

__all__ = [
    "MomentSpec",
    "OmegaEstimate",
    "StationarityReport",
    "ProcessScalars",
    "check_s1",
    "compute_omega",
    "check_s2",
    "check_con2",
    "check_con3",
    "check_newcondbetter",
    "process_scalars",
    "check_stationarity",
    "z_square_tail",
]

DEFAULT_N = 20_000


@dataclass(frozen=True)
class MomentSpec:
    """Shock moments ``lambda1 = E xi``, ``lambda2 = E xi**2`` and the intercept ``a``."""

    lambda1: float
    lambda2: float
    a: float = 1.0

    def __post_init__(self):
        if not (self.lambda1 > 0 and math.isfinite(self.lambda1)):
            raise DomainError(f"lambda1 must be positive and finite, got {self.lambda1}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"a must be positive and finite, got {self.a}")
        if not math.isfinite(self.lambda2) or self.lambda2 < self.lambda1**2:
            raise DomainError(
                f"lambda2 = {self.lambda2} violates Jensen's inequality lambda2 >= lambda1**2 = {self.lambda1**2}"
            )
        if self.sigma2 <= 0:
            raise DomainError("shock variance must be positive (degenerate shocks are not admissible)")

    @property
    def sigma2(self) -> float:
        return self.lambda2 - self.lambda1**2

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @classmethod
    def from_variance(cls, lambda1: float, sigma2: float, a: float = 1.0) -> "MomentSpec":
        return cls(lambda1, sigma2 + lambda1**2, a)


def _b_interval(kernel: KernelSpec, N: int) -> Interval:
    return weighted_kernel_sum(kernel, 1.0, max(N, 1))


def _q_interval(kernel: KernelSpec, N: int) -> Interval:
    return squared_kernel_sum(kernel, max(N, 1))


def check_s1(kernel: KernelSpec, moments: MomentSpec, N: int = DEFAULT_N) -> tuple:
    """Verdict on ``lambda1 B < 1`` and the interval for ``lambda1 B``."""
    lb = _b_interval(kernel, N).scale(moments.lambda1)
    return below(lb, 1.0), lb


def z_square_tail(z: np.ndarray, window: int = 10) -> float:
    """Heuristic estimate of ``sum_{n>N} z(n)**2`` from the trailing terms.

    See :func:`series_tail`; returns ``inf`` when neither extrapolation converges.
    """
    z = np.asarray(z, dtype=float)
    return series_tail(z * z, window)


@dataclass(frozen=True)
class OmegaEstimate:
    """Interval for ``Omega`` and the square sum ``sum_{j>=1} z(j)**2`` behind it.

    ``lower`` uses the partial sum to N. ``upper`` adds the extrapolated tail,
    capped by the rigorous bounds ``lambda1**2 Q / (1 - lambda1 B)**2`` and
    ``lambda1**2 B**2 / (1 - lambda1**2 B**2)``. ``heuristic`` is True when
    the extrapolation, not a rigorous bound, sets the upper end.
    """

    interval: Interval
    zsq_partial: float
    zsq_upper: float
    heuristic: bool

    @property
    def lower(self) -> float:
        return self.interval.lower

    @property
    def upper(self) -> float:
        return self.interval.upper

    @property
    def value(self) -> float:
        """Best point estimate (upper end, which includes the tail estimate)."""
        return self.interval.upper


def _rigorous_zsq_bound(kernel: KernelSpec, lambda1: float, N: int) -> float:
    lb = _b_interval(kernel, N).upper * lambda1
    if not lb < 1:
        return math.inf
    q = _q_interval(kernel, N).upper
    return min(lambda1**2 * q / (1.0 - lb) ** 2, lb**2 / (1.0 - lb**2))


def compute_omega(rs: ResolventSeries, moments: MomentSpec) -> OmegaEstimate:
    """Bracket ``Omega`` from a computed resolvent."""
    scale = moments.sigma / moments.lambda1
    partial = float(np.sum(rs.z[1:] ** 2))
    heur = partial + z_square_tail(rs.z)
    rig = _rigorous_zsq_bound(rs.kernel, rs.lambda1, rs.N) if rs.kernel is not None else math.inf
    upper = min(heur, rig)
    if rs.kernel is not None and rs.kernel.is_degenerate:
        upper = partial
    if upper < partial:
        upper = partial
    return OmegaEstimate(
        Interval(scale * math.sqrt(partial), scale * math.sqrt(upper)),
        partial,
        upper,
        heuristic=heur < rig,
    )


def check_s2(omega: OmegaEstimate) -> Verdict:
    return below(omega.interval, 1.0)


def check_con2(kernel: KernelSpec, moments: MomentSpec, N: int = DEFAULT_N) -> Verdict:
    """``sqrt(lambda2) * B < 1``."""
    return below(_b_interval(kernel, N).scale(math.sqrt(moments.lambda2)), 1.0)


def check_con3(kernel: KernelSpec, moments: MomentSpec, N: int = DEFAULT_N) -> Verdict:
    """``lambda2 < lambda1**2 + (1 - lambda1 B)**2 / Q``, decided as ``sigma2 Q < (1 - lambda1 B)**2``.

    Requires ``lambda1 B < 1`` (the condition is stated under it); a zero kernel
    holds vacuously.
    """
    if kernel.is_degenerate:
        return Verdict.HOLDS
    s1, lb = check_s1(kernel, moments, N)
    if s1 is Verdict.FAILS:
        return Verdict.FAILS
    q = _q_interval(kernel, N)
    lhs = q.scale(moments.sigma2)
    margin = Interval(max(0.0, 1.0 - lb.upper) ** 2, max(0.0, 1.0 - lb.lower) ** 2)
    if s1 is Verdict.INDETERMINATE:
        # without (S1) the condition cannot hold; with it, it may
        return Verdict.FAILS if lhs.lower >= margin.upper else Verdict.INDETERMINATE
    if lhs.upper < margin.lower:
        return Verdict.HOLDS
    if lhs.lower >= margin.upper:
        return Verdict.FAILS
    return Verdict.INDETERMINATE


def check_newcondbetter(kernel: KernelSpec, moments: MomentSpec, N: int = DEFAULT_N) -> Verdict:
    """``lambda1 B < (1 - Q/B**2) / (1 + Q/B**2)``; a zero kernel FAILS (``0 < 0`` is false)."""
    if kernel.is_degenerate:
        return Verdict.FAILS
    b = _b_interval(kernel, N)
    q = _q_interval(kernel, N)
    # the threshold decreases in t = Q/B**2
    t_lo = q.lower / b.upper**2 if math.isfinite(b.upper) else 0.0
    t_hi = q.upper / b.lower**2
    thr = Interval((1 - t_hi) / (1 + t_hi), (1 - t_lo) / (1 + t_lo))
    lb = b.scale(moments.lambda1)
    if lb.upper < thr.lower:
        return Verdict.HOLDS
    if lb.lower >= thr.upper:
        return Verdict.FAILS
    return Verdict.INDETERMINATE


@dataclass(frozen=True)
class ProcessScalars:
    mean_x: float
    e_nu_sq: float
    var_x: float
    var_x_closed_form: float


def process_scalars(kernel: KernelSpec, moments: MomentSpec, rs: ResolventSeries,
                    omega: Optional[OmegaEstimate] = None, N: int = DEFAULT_N) -> ProcessScalars:
    """Mean, ``E[nu(0)**2]`` and variance of the stationary process.

    ``var_x`` is ``E[nu**2] * sum_{j>=0} z(j)**2``; ``var_x_closed_form`` is
    ``(a sigma / (1 - lambda1 B))**2 (1 + lambda1**2 Omega**2 / sigma2) / (1 - Omega**2)``.
    Both use the same tail-corrected square sum.

    Raises
    ------
    NoStationarySolutionError
        If (S1) or (S2) does not hold.
    """
    s1, _ = check_s1(kernel, moments, N)
    if s1 is not Verdict.HOLDS:
        raise NoStationarySolutionError(f"(S1) lambda1 * B < 1 is {s1}")
    if omega is None:
        omega = compute_omega(rs, moments)
    s2 = check_s2(omega)
    if s2 is not Verdict.HOLDS:
        raise NoStationarySolutionError(f"(S2) Omega < 1 is {s2} (Omega in [{omega.lower:.6g}, {omega.upper:.6g}])")
    B = kernel_sum(kernel, N=max(N, 1))
    lam, a, sig2 = moments.lambda1, moments.a, moments.sigma2
    base = (a / (1.0 - lam * B)) ** 2 * sig2
    om2 = omega.value**2
    e_nu_sq = base / (1.0 - om2)
    var_x = e_nu_sq * (1.0 + omega.zsq_upper)
    closed = base * (1.0 + lam**2 * om2 / sig2) / (1.0 - om2)
    return ProcessScalars(a * lam / (1.0 - lam * B), e_nu_sq, var_x, closed)


@dataclass
class StationarityReport:
    s1: Verdict
    omega: Interval
    s2: Verdict
    con2: Verdict
    con3: Verdict
    newcondbetter: Verdict
    mean_x: float = math.nan
    e_nu_sq: float = math.nan
    var_x: float = math.nan
    omega_heuristic: bool = False
    notes: list = field(default_factory=list)

    @property
    def stationary(self) -> bool:
        return self.s1 is Verdict.HOLDS and self.s2 is Verdict.HOLDS

    def to_dict(self) -> dict:
        def num(x):
            return None if not math.isfinite(x) else float(x)

        return {
            "s1": str(self.s1),
            "omega_lower": num(self.omega.lower),
            "omega_upper": num(self.omega.upper),
            "s2": str(self.s2),
            "con2": str(self.con2),
            "con3": str(self.con3),
            "newcondbetter": str(self.newcondbetter),
            "mean_x": num(self.mean_x),
            "e_nu_sq": num(self.e_nu_sq),
            "var_x": num(self.var_x),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def check_stationarity(kernel: KernelSpec, moments: MomentSpec, N: int = DEFAULT_N,
                       rs: Optional[ResolventSeries] = None) -> StationarityReport:
    """Evaluate every condition and, when stationary, the process scalars."""
    s1, _ = check_s1(kernel, moments, N)
    con2 = check_con2(kernel, moments, N)
    con3 = check_con3(kernel, moments, N)
    ncb = check_newcondbetter(kernel, moments, N)
    if s1 is Verdict.FAILS:
        inf = Interval(math.inf, math.inf)
        return StationarityReport(s1, inf, Verdict.FAILS, con2, con3, ncb,
                                  notes=["lambda1 * B >= 1: Omega is infinite"])
    if rs is None:
        rs = compute_resolvent(kernel, moments.lambda1, N)
    omega = compute_omega(rs, moments)
    s2 = check_s2(omega)
    report = StationarityReport(s1, omega.interval, s2, con2, con3, ncb, omega_heuristic=omega.heuristic)
    if s1 is Verdict.HOLDS and s2 is Verdict.HOLDS:
        ps = process_scalars(kernel, moments, rs, omega, N)
        report.mean_x, report.e_nu_sq, report.var_x = ps.mean_x, ps.e_nu_sq, ps.var_x
    if omega.heuristic:
        report.notes.append("Omega upper end uses an extrapolated tail of sum z**2")
    return report
