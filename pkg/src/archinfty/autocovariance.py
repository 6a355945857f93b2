"""Autocovariance of the stationary ARCH(inf) process.

``rho(k) = E[nu(0)**2] * chi_z(k)`` with ``chi_z(k) = sum_{j>=0} z(j) z(j + |k|)``.
Two independent checks are provided: the Yule-Walker representation
``rho(k) = lambda1 sum_{j<k} b(k - j) rho(|j|)`` and a variation-of-parameters
recomputation driven by the forcing ``f(k) = lambda1 sum_{j>=1} b(k + j + 1) rho(j)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from ._io import open_text_out
from .errors import DomainError, HorizonError
from .kernel import KernelSpec
from .resolvent import ResolventSeries
from .stationarity import MomentSpec, compute_omega, process_scalars

__all__ = [
    "chi_z",
    "chi_series",
    "AutocovReport",
    "rho",
    "yule_walker_residual",
    "variation_of_parameters_rho",
    "YuleWalkerResult",
]

_TAIL_REL = 1e-9


def chi_z(rs: ResolventSeries, k: int) -> float:
    """``sum_{j=0}^{N-|k|} z(j) z(j+|k|)``; raises :class:`HorizonError` if ``|k| > N``."""
    k = abs(int(k))
    if k > rs.N:
        raise HorizonError(f"lag {k} exceeds the resolvent horizon N={rs.N}")
    z = rs.z
    return float(np.dot(z[: rs.N + 1 - k], z[k:]))


def chi_series(rs: ResolventSeries, K: int) -> tuple:
    """``chi_z(0..K)`` and a per-lag truncation flag.

    The flag is set when the last summand ``z(N-k) z(N)`` is not negligible
    relative to the partial sum.
    """
    if K > rs.N:
        raise HorizonError(f"lag {K} exceeds the resolvent horizon N={rs.N}")
    z = rs.z
    N = rs.N
    if (K + 1) * (N + 1) <= 4_000_000:
        chi = np.array([np.dot(z[: N + 1 - k], z[k:]) for k in range(K + 1)])
    else:
        # full correlation: entry N + k holds sum_j z(j + k) z(j)
        corr = fftconvolve(z, z[::-1])
        chi = np.maximum(corr[N : N + K + 1], 0.0)
    last = z[N - np.arange(K + 1)] * z[N]
    flags = last > _TAIL_REL * np.maximum(chi, np.finfo(float).tiny)
    return chi, flags


@dataclass
class AutocovReport:
    """Autocovariance over lags ``0..K`` with the scalars it was built from."""

    rho: np.ndarray
    chi: np.ndarray
    e_nu_sq: float
    N: int
    tail_flag: np.ndarray
    var_x: float = math.nan
    mean_x: float = math.nan

    @property
    def K(self) -> int:
        return len(self.rho) - 1

    def at(self, k: int) -> float:
        """``rho(k)`` for any integer lag, using symmetry for negative lags."""
        k = abs(int(k))
        if k > self.K:
            raise HorizonError(f"lag {k} exceeds the report horizon K={self.K}")
        return float(self.rho[k])

    def to_csv(self, path) -> None:
        with open_text_out(path) as fh:
            w = csv.writer(fh)
            w.writerow(["lag", "rho", "chi", "tail_flag"])
            for k in range(self.K + 1):
                w.writerow([k, repr(float(self.rho[k])), repr(float(self.chi[k])), int(self.tail_flag[k])])

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "K": self.K,
            "e_nu_sq": self.e_nu_sq,
            "mean_x": self.mean_x,
            "var_x": self.var_x,
            "lags": [
                {"lag": k, "rho": float(self.rho[k]), "chi": float(self.chi[k]), "tail_flag": bool(self.tail_flag[k])}
                for k in range(self.K + 1)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def rho(kernel: KernelSpec, moments: MomentSpec, rs: ResolventSeries, K: int,
        allow_long_lags: bool = False) -> AutocovReport:
    """Autocovariance ``rho(0..K)`` of the stationary solution.

    Parameters
    ----------
    kernel, moments
        Model specification.
    rs
        Resolvent computed for ``kernel`` and ``moments.lambda1``.
    K
        Largest lag. Must satisfy ``K <= N/2`` unless ``allow_long_lags`` is set,
        so that every ``chi_z(k)`` keeps at least half of its summands.

    Raises
    ------
    NoStationarySolutionError
        If (S1) or (S2) does not hold.
    """
    if K < 0:
        raise DomainError(f"K must be non-negative, got {K}")
    if not allow_long_lags and 2 * K > rs.N:
        raise HorizonError(f"K={K} exceeds N/2={rs.N // 2}; pass allow_long_lags to override")
    omega = compute_omega(rs, moments)
    ps = process_scalars(kernel, moments, rs, omega, N=rs.N)
    chi, flags = chi_series(rs, K)
    return AutocovReport(ps.e_nu_sq * chi, chi, ps.e_nu_sq, rs.N, flags, ps.var_x, ps.mean_x)


@dataclass
class YuleWalkerResult:
    residual: np.ndarray
    max_residual: float
    tail_estimate: float
    J: int


def yule_walker_residual(report: AutocovReport, kernel: KernelSpec, moments: MomentSpec,
                         J: Optional[int] = None) -> YuleWalkerResult:
    """Residuals ``|rho(k) - lambda1 sum_{j=-J}^{k-1} b(k-j) rho(|j|)|`` for ``k = 1..K``.

    The history is cut at ``-J`` (default ``J = K``). ``tail_estimate`` bounds
    the omitted part by ``lambda1 * rho(J) * sum_{i > k + J} b(i)`` at the
    worst lag.
    """
    K = report.K
    J = K if J is None else int(J)
    if J > K:
        raise HorizonError(f"J={J} exceeds the report horizon K={K}")
    lam = moments.lambda1
    b = np.concatenate([[0.0], kernel.values(K + J)])
    # history rho(|j|) for j = -J..K-1
    hist = np.concatenate([report.rho[J:0:-1], report.rho[:K]])
    res = np.zeros(K + 1)
    for k in range(1, K + 1):
        # j runs over -J..k-1, b index k - j runs over k + J..1
        h = hist[: J + k]
        w = b[k + J : 0 : -1]
        res[k] = abs(report.rho[k] - lam * np.dot(w, h))
    tail = lam * report.rho[J] * kernel.tail_bound(J + 1) if J >= 0 else math.inf
    return YuleWalkerResult(res, float(res[1:].max()) if K >= 1 else 0.0, float(tail), J)


def variation_of_parameters_rho(report: AutocovReport, kernel: KernelSpec, moments: MomentSpec,
                                rs: ResolventSeries, J: Optional[int] = None) -> tuple:
    """Recompute ``rho`` as ``z(k) rho(0) + sum_{j<k} z(k-1-j) f(j)``.

    ``f(k) = lambda1 sum_{j=1}^{J} b(k+j+1) rho(j)`` with ``J`` defaulting to
    ``max(K, N // 2)``. Lags beyond ``K`` come from ``e_nu_sq * chi_z`` on the
    same resolvent. Returns ``(rho_vp, discrepancy)`` where the discrepancy is
    ``max_k |rho_vp(k) - rho(k)| / rho(0)``.
    """
    K = report.K
    if K > rs.N:
        raise HorizonError(f"K={K} exceeds the resolvent horizon N={rs.N}")
    J = max(K, rs.N // 2) if J is None else int(J)
    if J < 0 or J > rs.N:
        raise HorizonError(f"J={J} must lie in [0, N={rs.N}]")
    lam = moments.lambda1
    b = np.concatenate([[0.0], kernel.values(K + J + 1)])
    r = report.rho
    if J > K:
        hist = report.e_nu_sq * chi_series(rs, J)[0]
        hist[: K + 1] = r
    else:
        hist = r
    f = np.array([lam * np.dot(b[k + 2 : k + J + 2], hist[1 : J + 1]) for k in range(K)])
    z = rs.z
    vp = np.empty(K + 1)
    vp[0] = r[0]
    for k in range(1, K + 1):
        vp[k] = z[k] * r[0] + np.dot(z[k - 1 :: -1][:k], f[:k])
    disc = float(np.max(np.abs(vp - r)) / r[0]) if r[0] > 0 else float(np.max(np.abs(vp - r)))
    return vp, disc
