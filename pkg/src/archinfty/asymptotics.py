"""Decay-rate diagnostics for ``z``, ``chi_z`` and ``rho``.

Ratio limits for kernels in W(r)::

    z(n) / b(n)      -> lambda1 / (1 - lambda1 sum_j b(j) r**-j)**2
    chi_z(n) / z(n)  -> 1 / (1 - lambda1 sum_j b(j) r**j)
    rho(n) / b(n)    -> E[nu**2] * lambda1 / ((1 - lambda1 sum_j b(j) r**j) (1 - lambda1 sum_j b(j) r**-j)**2)

plus log-log slopes, geometric-rate fits, running-supremum bound checks and
closed-form constants for periodically modulated power-law kernels, whose
subsequential limits differ by residue class.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .autocovariance import AutocovReport, chi_series, rho as rho_report
from ._io import open_text_out
from .errors import DomainError, TheoremNotApplicableError
from .kernel import KernelSpec, PeriodicPowerLaw, kernel_sum, wr_diagnostic, weighted_kernel_sum
from .resolvent import ResolventSeries, compute_resolvent
from .stationarity import MomentSpec, process_scalars

__all__ = [
    "RatioKind",
    "RatioCheck",
    "ratio_limit_check",
    "ratio_target",
    "PeriodicConstants",
    "periodic2_constants",
    "periodic3_constants",
    "period3_polynomials",
    "periodic_limits",
    "residue_sum_corrected",
    "SlopeResult",
    "loglog_slope",
    "GeometricFit",
    "geometric_fit",
    "bound_ratio_sup",
    "DecayDiagnostics",
    "diagnose",
    "write_ratio_csv",
]

SUPERPOLYNOMIAL_FLOOR = -50.0


class RatioKind(str, enum.Enum):
    Z_OVER_B = "Z_OVER_B"
    CHI_OVER_Z = "CHI_OVER_Z"
    RHO_OVER_B = "RHO_OVER_B"


def _sums_for(kernel: KernelSpec, lambda1: float, r: float, N: int) -> tuple:
    """``lambda1 sum b r**-j`` (checked below 1) and ``lambda1 sum b r**j``."""
    hyp = weighted_kernel_sum(kernel, 1.0 / r, max(N, 1)).scale(lambda1)
    if not hyp.upper < 1:
        raise TheoremNotApplicableError(
            f"lambda1 * sum b(j) r**-j lies in [{hyp.lower:.6g}, {hyp.upper:.6g}] with r={r}; it must be below 1"
        )
    s_minus = lambda1 * kernel_sum(kernel, 1.0 / r, N=max(N, 1))
    s_plus = lambda1 * kernel_sum(kernel, r, N=max(N, 1))
    return s_minus, s_plus


def ratio_target(kind: RatioKind, kernel: KernelSpec, lambda1: float, r: float = 1.0,
                 e_nu_sq: Optional[float] = None, N: int = 100_000) -> float:
    """Theoretical limit of the chosen ratio.

    The sums over ``b`` start at ``j = 1``. At ``r = 1`` the ``RHO_OVER_B``
    target reduces to ``lambda1 E[nu**2] / (1 - lambda1 B)**3``.
    """
    kind = RatioKind(kind)
    s_minus, s_plus = _sums_for(kernel, lambda1, r, N)
    if kind is RatioKind.Z_OVER_B:
        return lambda1 / (1.0 - s_minus) ** 2
    if kind is RatioKind.CHI_OVER_Z:
        return 1.0 / (1.0 - s_plus)
    if e_nu_sq is None:
        raise DomainError("RHO_OVER_B needs e_nu_sq")
    return e_nu_sq * lambda1 / ((1.0 - s_plus) * (1.0 - s_minus) ** 2)


@dataclass
class RatioCheck:
    """Empirical limit (median over a window) against its target."""

    kind: str
    empirical: float
    target: float
    rel_err: float
    window: tuple
    n: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    per_residue: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("n", "ratio")}
        d["window"] = list(self.window)
        return d


def _window(hi: int, window, frac: float = 0.2) -> tuple:
    if window is None:
        lo = max(1, int(math.ceil(hi * (1.0 - frac))))
        return lo, hi
    lo, w_hi = int(window[0]), int(window[1])
    if lo < 1 or w_hi > hi or lo > w_hi:
        raise DomainError(f"window {window} must lie within [1, {hi}]")
    return lo, w_hi


def ratio_limit_check(
    kind: Union[RatioKind, str],
    kernel: KernelSpec,
    moments: MomentSpec,
    rs: ResolventSeries,
    r: float = 1.0,
    window: Optional[tuple] = None,
    period: Optional[int] = None,
    report: Optional[AutocovReport] = None,
) -> RatioCheck:
    """Compare the trailing-window median of a ratio with its theoretical limit.

    Parameters
    ----------
    kind
        Which ratio: ``z/b``, ``chi/z`` or ``rho/b``.
    r
        Decay parameter of the W(r) class, in ``(0, 1]``.
    window
        Inclusive ``(lo, hi)`` index range. Defaults to the trailing 20% of
        the available horizon (``N`` for ``z/b``, ``K`` for lag-based ratios).
    period
        When given, medians per residue class ``n % period`` are also reported.
    report
        Precomputed autocovariance; built with ``K = N // 2`` otherwise.

    Raises
    ------
    TheoremNotApplicableError
        If ``lambda1 sum b(j) r**-j < 1`` is not established or ``b`` vanishes
        on the window.
    """
    kind = RatioKind(kind)
    if not 0 < r <= 1:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    lam = moments.lambda1
    e_nu_sq = None
    if kind is RatioKind.Z_OVER_B:
        hi = rs.N
    else:
        if report is None:
            if kind is RatioKind.CHI_OVER_Z:
                chi, _ = chi_series(rs, rs.N // 2)
            else:
                report = rho_report(kernel, moments, rs, rs.N // 2)
        if report is not None:
            chi = report.chi
            e_nu_sq = report.e_nu_sq
        hi = len(chi) - 1
    lo, hi = _window(hi, window)
    n = np.arange(lo, hi + 1)
    b = kernel(n)
    if kind is RatioKind.CHI_OVER_Z:
        den = rs.z[n]
        num = chi[n]
    else:
        den = b
        num = rs.z[n] if kind is RatioKind.Z_OVER_B else e_nu_sq * chi[n]
    mask = den > 0
    if not mask.any():
        raise TheoremNotApplicableError("denominator vanishes on the whole window")
    if kind is not RatioKind.CHI_OVER_Z and period is None and not mask.all():
        raise TheoremNotApplicableError("b(n) vanishes inside the window; declare a period")
    if kind is RatioKind.RHO_OVER_B and e_nu_sq is None:
        e_nu_sq = process_scalars(kernel, moments, rs, N=rs.N).e_nu_sq
    target = ratio_target(kind, kernel, lam, r, e_nu_sq, N=max(rs.N, 100_000))
    ratio = np.where(mask, num / np.where(mask, den, 1.0), np.nan)
    empirical = float(np.nanmedian(ratio))
    per = None
    if period:
        per = {}
        for s in range(period):
            sel = (n % period == s) & mask
            per[s] = float(np.median(ratio[sel])) if sel.any() else math.nan
    return RatioCheck(kind.value, empirical, target, abs(empirical - target) / abs(target),
                      (lo, hi), n, ratio, per)


# ---------------------------------------------------------------------------
# periodic kernels


def residue_sum_corrected(scale: float, p: int, i: int, alpha: float, M: int) -> float:
    """``scale * sum_{m>=0} (p m + i + 1)**-alpha`` from ``M`` terms plus a midpoint tail integral."""
    m = np.arange(M, dtype=float)
    head = float(np.sum((p * m + i + 1.0) ** (-alpha)))
    tail = (p * (M - 0.5) + i + 1.0) ** (1.0 - alpha) / (p * (alpha - 1.0))
    return scale * (head + tail)


@dataclass
class PeriodicConstants:
    """Closed-form constants for a periodically modulated ``n**-alpha`` kernel.

    ``z_limits[s]`` and ``chi_limits[s]`` are the limits of ``z(n) n**alpha``
    and ``chi_z(n) n**alpha`` along ``n % p == s``. ``z_over_b[s]`` and
    ``chi_over_b[s]`` divide by the kernel scale of that residue class.
    """

    p: int
    lambda1: float
    S: list
    z_sums: list
    z_limits: list
    chi_limits: list
    z_over_b: list
    chi_over_b: list
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if not math.isfinite(float(x)) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _circulant(v: np.ndarray) -> np.ndarray:
    p = len(v)
    idx = (np.arange(p)[:, None] - np.arange(p)[None, :]) % p
    return v[idx]


def periodic_limits(kernel: PeriodicPowerLaw, lambda1: float) -> tuple:
    """Residue-class limits by a linear-algebra route independent of the printed formulas.

    With ``A_s`` the kernel scale on ``n % p == s`` and ``B_s = lambda1 sum_{j % p == s} b(j)``,
    the residue z-sums are ``Z = (I - C_B)^-1 e0`` and the limits of ``z(n) n**alpha``
    are ``w = lambda1 (I - C_B)^-2 C_A e0`` (``C_v`` the circulant of ``v``).
    ``chi_z(n) n**alpha`` tends to ``sum_s Z_s w_{(s + n) % p}``.

    Returns ``(Z, w, chi_limits)`` indexed by residue of ``n``.
    """
    p = kernel.period
    # residue s of n collects j with (j - 1) % p == (s - 1) % p
    A = np.array([kernel.scales[(s - 1) % p] for s in range(p)])
    B = np.array([lambda1 * kernel.residue_sum((s - 1) % p) for s in range(p)])
    if not B.sum() < 1:
        raise TheoremNotApplicableError(f"lambda1 * B = {B.sum():.6g} must be below 1")
    I = np.eye(p)
    e0 = I[:, 0]
    M = np.linalg.inv(I - _circulant(B))
    Z = M @ e0
    w = lambda1 * M @ M @ _circulant(A) @ e0
    chi = np.array([sum(Z[s] * w[(s + k) % p] for s in range(p)) for k in range(p)])
    return Z, w, chi


def periodic2_constants(a0: float, a1: float, alpha: float = 2.0, lambda1: float = 1.0) -> PeriodicConstants:
    """Constants for ``b(2m+1) = a0 (2m+1)**-alpha``, ``b(2m+2) = a1 (2m+2)**-alpha``.

    ``S_i = lambda1 sum_m b(2m+i+1)``, ``Lambda = ((1-S1)**2 - S0**2)**-2``,
    ``T0 = 2 Lambda S0 (1-S1)``, ``T1 = Lambda (S0**2 + (1-S1)**2)``,
    ``d0 = lambda1 (a0 T0 + a1 T1)`` (even ``n``), ``d1 = lambda1 (a1 T0 + a0 T1)`` (odd ``n``),
    ``tau0 = T0 Z_even + T1 Z_odd``, ``tau1 = T1 Z_even + T0 Z_odd``. The
    limits of ``chi_z/b`` along even and odd lags are ``lambda1 ((a0/a1) tau0 + tau1)``
    and ``lambda1 ((a1/a0) tau0 + tau1)``.
    """
    if a0 <= 0 or a1 <= 0:
        raise DomainError("a0 and a1 must be positive")
    kern = PeriodicPowerLaw((a0, a1), alpha)
    S0 = lambda1 * kern.residue_sum(0)
    S1 = lambda1 * kern.residue_sum(1)
    if not S0 + S1 < 1:
        raise TheoremNotApplicableError(f"S0 + S1 = {S0 + S1:.6g} must be below 1")
    den = (1.0 - S1) ** 2 - S0**2
    Lam = den**-2
    T0 = Lam * 2.0 * S0 * (1.0 - S1)
    T1 = Lam * (S0**2 + (1.0 - S1) ** 2)
    d0 = lambda1 * (a0 * T0 + a1 * T1)
    d1 = lambda1 * (a1 * T0 + a0 * T1)
    Z_even = (1.0 - S1) / den
    Z_odd = S0 / den
    tau0 = T0 * Z_even + T1 * Z_odd
    tau1 = T1 * Z_even + T0 * Z_odd
    chi_even = lambda1 * (a0 * tau0 + a1 * tau1)
    chi_odd = lambda1 * (a0 * tau1 + a1 * tau0)
    return PeriodicConstants(
        p=2,
        lambda1=lambda1,
        S=[S0, S1],
        z_sums=[Z_even, Z_odd],
        z_limits=[d0, d1],
        chi_limits=[chi_even, chi_odd],
        z_over_b=[d0 / a1, d1 / a0],
        chi_over_b=[chi_even / a1, chi_odd / a0],
        extra={
            "Lambda": Lam, "T0": T0, "T1": T1, "d0": d0, "d1": d1, "tau0": tau0, "tau1": tau1,
            "ratio_even": chi_even / a1, "ratio_odd": chi_odd / a0,
            "a0": a0, "a1": a1, "alpha": alpha,
        },
    )


def period3_polynomials(S0: float, S1: float) -> tuple:
    """Denominator ``1 - S0**3 - 3 S0 S1 - S1**3`` and the quartics ``[d0, d1, d2]``."""
    den = 1.0 - S0**3 - 3.0 * S0 * S1 - S1**3
    d0 = S0**4 + 2 * S1 * (1 - S0**3) + 2 * S0 * (1 - S1**3) + 3 * (S0**2 + S1**2) + S1**4
    d1 = 1 + 2 * S0**3 * (1 - S1) + 2 * S1 + 2 * S1**3 + S1**4 + 3 * S0**2 * (1 + S1**2)
    d2 = 1 + 2 * S1**3 * (1 - S0) + 2 * S0 + 2 * S0**3 + S0**4 + 3 * S1**2 * (1 + S0**2)
    return den, [d0, d1, d2]


def periodic3_constants(lambda1: float, M: Optional[int] = None) -> PeriodicConstants:
    """Constants for ``b(n) = n**-2`` off multiples of 3 and ``b(3m) = 0``.

    ``K = lambda1 / (1 - S0**3 - 3 S0 S1 - S1**3)**2`` and ``d0, d1, d2`` are
    quartic polynomials in ``S0, S1``; ``z(n) n**2`` tends to ``K d_{n % 3}``.
    ``c_i`` are the cyclic combinations of ``d`` with the residue z-sums;
    ``chi_z(n) n**2`` tends to ``K c_{n % 3}`` (the factor ``K`` is kept
    separate so that ``c`` matches the polynomial expressions).

    ``M`` switches the residue sums from Hurwitz zeta to ``M``-term partial
    sums with a tail correction.
    """
    if not 0 < lambda1 < 27.0 / (4.0 * math.pi**2):
        raise TheoremNotApplicableError(f"lambda1 = {lambda1} must lie in (0, 27/(4 pi**2))")
    if M is None:
        kern = PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0)
        S0, S1 = lambda1 * kern.residue_sum(0), lambda1 * kern.residue_sum(1)
    else:
        S0 = lambda1 * residue_sum_corrected(1.0, 3, 0, 2.0, M)
        S1 = lambda1 * residue_sum_corrected(1.0, 3, 1, 2.0, M)
    if not (S0 > 0 and S1 > 0 and S0 + S1 < 1):
        raise TheoremNotApplicableError("need S0 > 0, S1 > 0 and S0 + S1 < 1")
    den, d = period3_polynomials(S0, S1)
    K = lambda1 / den**2
    # residue z-sums from Z = e0 + C_B Z, residue s of n collecting S_{(s-1) % 3}
    Bv = np.array([0.0, S0, S1])
    Z = np.linalg.solve(np.eye(3) - _circulant(Bv), np.eye(3)[:, 0])
    c = [sum(d[(i + s) % 3] * Z[s] for s in range(3)) for i in range(3)]
    scales = [0.0, 1.0, 1.0]  # kernel scale on n % 3 == 0, 1, 2
    zl = [K * v for v in d]
    cl = [K * v for v in c]
    return PeriodicConstants(
        p=3,
        lambda1=lambda1,
        S=[S0, S1, 0.0],
        z_sums=list(Z),
        z_limits=zl,
        chi_limits=cl,
        z_over_b=[zl[s] / scales[s] if scales[s] else math.inf for s in range(3)],
        chi_over_b=[cl[s] / scales[s] if scales[s] else math.inf for s in range(3)],
        extra={
            "K": K, "d": d, "c": c,
            "z_liminf": K * min(d), "z_limsup": K * max(d),
            "chi_liminf": K * min(c), "chi_limsup": K * max(c),
            "B": 4.0 * math.pi**2 / 27.0, "Q": 8.0 * math.pi**4 / 729.0,
        },
    )


# ---------------------------------------------------------------------------
# slopes, fits and bounds


def _as_seq(seq, hi: int) -> np.ndarray:
    if callable(seq):
        return np.asarray(seq(np.arange(hi + 1)), dtype=float)
    return np.asarray(seq, dtype=float)


@dataclass
class SlopeResult:
    slope: float
    residual: float
    window: tuple
    n_used: int
    excluded: int
    superpolynomial: bool


def loglog_slope(seq, window: Optional[tuple] = None, running_max: bool = False,
                 floor: float = SUPERPOLYNOMIAL_FLOOR) -> SlopeResult:
    """Least-squares slope of ``log seq(n)`` against ``log n`` over a window.

    ``seq`` is indexed by ``n`` (entry 0 is never used). The default window
    is the trailing dyadic block ``[N/2, N]``. With ``running_max`` the fit
    uses ``sup_{m >= n} seq(m)`` within the window, the envelope that governs
    a limsup statement. Slopes below ``floor`` are flagged superpolynomial.
    ``residual`` is the root-mean-square deviation of the fit.
    """
    s = np.asarray(seq, dtype=float)
    N = len(s) - 1
    lo, hi = (max(1, N // 2), N) if window is None else (int(window[0]), int(window[1]))
    if lo < 1 or hi > N or hi <= lo:
        raise DomainError(f"window ({lo}, {hi}) must satisfy 1 <= lo < hi <= {N}")
    n = np.arange(lo, hi + 1)
    v = s[lo : hi + 1]
    if running_max:
        v = np.maximum.accumulate(v[::-1])[::-1]
    keep = v > 0
    if keep.sum() < 2:
        raise DomainError("fewer than two positive entries in the window")
    x, y = np.log(n[keep]), np.log(v[keep])
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))
    slope = float(coef[0])
    return SlopeResult(slope, resid, (lo, hi), int(keep.sum()), int((~keep).sum()), slope < floor)


@dataclass
class GeometricFit:
    rate: float
    c: float
    residual: float
    max_positive_residual: float
    ok: bool
    window: tuple


def geometric_fit(seq, window: Optional[tuple] = None, tol: float = 0.05) -> GeometricFit:
    """Fit ``log seq(k) ~ log c + k log rate`` over a window.

    ``ok`` is True iff ``rate < 1`` and every point lies below the fitted line
    by at most ``tol`` in log scale, so that ``seq(k) <= c e**tol rate**k``
    holds on the window. The default window is lags ``[N/10, N]``.
    """
    s = np.asarray(seq, dtype=float)
    N = len(s) - 1
    lo, hi = (max(0, N // 10), N) if window is None else (int(window[0]), int(window[1]))
    if lo < 0 or hi > N or hi <= lo:
        raise DomainError(f"window ({lo}, {hi}) must satisfy 0 <= lo < hi <= {N}")
    k = np.arange(lo, hi + 1)
    v = s[lo : hi + 1]
    if np.any(v <= 0):
        raise DomainError("geometric_fit needs a positive sequence on the window")
    y = np.log(v)
    slope, icpt = np.polyfit(k, y, 1)
    res = y - (icpt + slope * k)
    rate = float(math.exp(slope))
    maxpos = float(max(res.max(), 0.0))
    return GeometricFit(rate, float(math.exp(icpt)), float(np.sqrt(np.mean(res**2))), maxpos,
                        bool(rate < 1 and maxpos < tol), (lo, hi))


def bound_ratio_sup(seq, gamma: Union[Callable, Sequence[float]], window: Optional[tuple] = None) -> tuple:
    """Supremum of ``seq(n) / gamma(n)`` over a window and the index attaining it.

    ``gamma`` is a callable on integer arrays or an array indexed like ``seq``.
    Returns ``(sup_ratio, argmax, running)`` where ``running[i]`` is the
    supremum over ``n >= lo + i`` within the window (a tail-sup profile).
    """
    s = np.asarray(seq, dtype=float)
    N = len(s) - 1
    lo, hi = (0, N) if window is None else (int(window[0]), int(window[1]))
    n = np.arange(lo, hi + 1)
    g = np.asarray(gamma(n), dtype=float) if callable(gamma) else np.asarray(gamma, dtype=float)[lo : hi + 1]
    if np.any(g <= 0):
        raise DomainError("gamma must be positive on the window")
    ratio = s[lo : hi + 1] / g
    i = int(np.argmax(ratio))
    running = np.maximum.accumulate(ratio[::-1])[::-1]
    return float(ratio[i]), int(n[i]), running


# ---------------------------------------------------------------------------
# bundle


@dataclass
class DecayDiagnostics:
    ratio_series: dict
    theoretical_limits: dict
    loglog_slope: dict
    geo_fit: dict
    verdicts: dict

    def to_dict(self) -> dict:
        d = {
            "theoretical_limits": self.theoretical_limits,
            "empirical_limits": {k: v["empirical"] for k, v in self.ratio_series.items()},
            "loglog_slope": self.loglog_slope,
            "geo_fit": self.geo_fit,
            "verdicts": self.verdicts,
        }
        return _jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def write_ratio_csv(path, n: np.ndarray, ratio: np.ndarray) -> None:
    with open_text_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "ratio"])
        for a, b in zip(n, ratio):
            w.writerow([int(a), repr(float(b))])


def diagnose(kernel: KernelSpec, moments: MomentSpec, N: int = 10_000, K: Optional[int] = None,
             r: float = 1.0, rs: Optional[ResolventSeries] = None, period: Optional[int] = None) -> DecayDiagnostics:
    """Run every decay diagnostic that applies to the model.

    Ratio checks whose hypothesis fails are recorded as ``NOT_APPLICABLE``
    instead of raising.
    """
    if rs is None:
        rs = compute_resolvent(kernel, moments.lambda1, N)
    K = rs.N // 2 if K is None else K
    rep = rho_report(kernel, moments, rs, K)
    series, limits, verdicts = {}, {}, {}
    n_wr = min(rs.N, 4000)
    try:
        wr = wr_diagnostic(kernel, r, n_wr, m_grid=[max(1, n_wr // 64), max(1, n_wr // 16), max(1, n_wr // 4)])
        verdicts["kernel_in_W(r)"] = wr.verdict
    except DomainError:
        verdicts["kernel_in_W(r)"] = "INCONSISTENT"
    in_class = verdicts["kernel_in_W(r)"] == "CONSISTENT"
    for kind in RatioKind:
        try:
            chk = ratio_limit_check(kind, kernel, moments, rs, r=r, period=period, report=rep)
        except TheoremNotApplicableError as exc:
            verdicts[kind.value] = "NOT_APPLICABLE"
            series[kind.value] = {"empirical": None, "reason": str(exc)}
            continue
        series[kind.value] = {"empirical": chk.empirical, "n": chk.n, "ratio": chk.ratio,
                              "per_residue": chk.per_residue}
        limits[kind.value] = chk.target
        if not in_class:
            # the limit theorems assume b in W(r); a mismatch is then expected
            verdicts[kind.value] = "HYPOTHESIS_UNVERIFIED"
        else:
            verdicts[kind.value] = "AGREES" if chk.rel_err < 0.02 else "DIFFERS"
    slope = loglog_slope(rep.rho, window=(max(1, K // 2), K))
    limsup = loglog_slope(rep.rho, window=(max(1, K // 2), K), running_max=True)
    try:
        gf = geometric_fit(rep.rho, window=(max(1, K // 10), K))
        geo = asdict(gf)
        verdicts["geometric"] = "GEOMETRIC" if gf.ok else "NOT_GEOMETRIC"
    except DomainError as exc:
        geo = {"ok": False, "reason": str(exc)}
        verdicts["geometric"] = "NOT_GEOMETRIC"
    verdicts["superpolynomial"] = slope.superpolynomial
    return DecayDiagnostics(
        ratio_series=series,
        theoretical_limits=limits,
        loglog_slope={"slope": slope.slope, "residual": slope.residual, "window": slope.window,
                      "limsup_slope": limsup.slope},
        geo_fit=geo,
        verdicts=verdicts,
    )
