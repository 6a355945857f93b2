"""The resolvent ``z`` of the ARCH(inf) kernel and the identities it satisfies.

``z`` solves the Volterra summation equation

    z(0) = 1,    z(n) = lambda1 * sum_{j=0}^{n-1} b(n - j) z(j),   n >= 1,

equivalently ``sum_j z(j) x**j = 1 / psi(x)`` with
``psi(x) = 1 - lambda1 * sum_{j>=1} b(j) x**j``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import fftconvolve

from ._io import open_text_out
from .errors import DomainError, StationarityError, TruncationWarning
from .interval import Interval
from .kernel import KernelSpec, kernel_sum, weighted_kernel_sum

__all__ = [
    "ResolventSeries",
    "compute_resolvent",
    "volterra_solve",
    "SumIdentity",
    "resolvent_sum_identity",
    "ztransform_check",
    "ULMResult",
    "ulm_iteration",
    "kernel_from_resolvent",
    "recursion_residual",
]

# direct O(N^2) below this horizon, FFT divide-and-conquer above
DIRECT_CUTOFF = 20_000
_LEAF = 128


def volterra_solve(f: np.ndarray, g: np.ndarray, method: str = "auto") -> np.ndarray:
    """Solve ``y(n) = f(n) + sum_{k=0}^{n-1} g(n-k) y(k)`` for ``n = 0..len(f)-1``.

    ``g[d]`` is the kernel at lag ``d >= 1``; ``g[0]`` is ignored. The
    ``"fft"`` method is an online (divide-and-conquer) convolution costing
    ``O(N log^2 N)``; ``"direct"`` is the plain ``O(N^2)`` recursion.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    N = len(f) - 1
    if len(g) < N + 1:
        raise DomainError("kernel array shorter than the horizon")
    if method == "auto":
        method = "direct" if N <= DIRECT_CUTOFF else "fft"
    y = np.zeros(N + 1)
    if method == "direct":
        y[0] = f[0]
        for n in range(1, N + 1):
            y[n] = f[n] + np.dot(g[n:0:-1], y[:n])
        return y
    if method != "fft":
        raise DomainError(f"unknown method '{method}'")

    acc = f.copy()

    def solve(lo, hi):
        if hi - lo <= _LEAF:
            for n in range(lo, hi):
                y[n] = acc[n] + np.dot(g[n - lo : 0 : -1], y[lo:n]) if n > lo else acc[n]
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        # contribution of y[lo:mid] to targets n in [mid, hi) sits at index n - lo - 1
        c = fftconvolve(y[lo:mid], g[1 : hi - lo])
        acc[mid:hi] += c[mid - lo - 1 : hi - lo - 1]
        solve(mid, hi)

    solve(0, N + 1)
    return y


@dataclass(frozen=True)
class ResolventSeries:
    """``z(0..N)`` together with the data that produced it.

    ``b`` holds ``b(1..N)`` (see the indexing contract in :mod:`archinfty.kernel`).
    """

    z: np.ndarray
    lambda1: float
    b: np.ndarray
    kernel: Optional[KernelSpec] = None

    @property
    def N(self) -> int:
        return len(self.z) - 1

    def weighted_sum(self, weight: float = 1.0, start: int = 0) -> float:
        """Partial sum ``sum_{n=start}^{N} z(n) weight**n``."""
        n = np.arange(start, self.N + 1)
        return float(np.sum(self.z[start:] * np.power(weight, n)))

    def tail_flag(self, weight: float = 1.0, rel: float = 1e-9) -> bool:
        """True when the extrapolated tail of ``sum z(n) weight**n`` exceeds ``rel`` of the partial sum."""
        n = np.arange(self.N + 1)
        terms = self.z * np.power(weight, n)
        return bool(series_tail(terms) > rel * float(terms.sum()))

    def to_csv(self, path) -> None:
        with open_text_out(path) as fh:
            w = csv.writer(fh)
            w.writerow(["n", "z"])
            for n, v in enumerate(self.z):
                w.writerow([n, repr(float(v))])


def series_tail(t: np.ndarray, window: int = 10) -> float:
    """Heuristic estimate of ``sum_{n>N} t(n)`` for a non-negative sequence ``t(0..N)``.

    Takes the larger of a geometric extrapolation (worst one-step ratio over
    the last ``window`` terms) and a power-law extrapolation (log-log slope
    over the trailing half of the horizon). Returns ``inf`` when neither
    extrapolation converges.
    """
    t = np.asarray(t, dtype=float)
    N = len(t) - 1
    if N < 2:
        return math.inf if N >= 1 and t[-1] > 0 else 0.0
    tail_idx = np.arange(max(1, N - window), N + 1)
    pos = tail_idx[t[tail_idx] > 0]
    if len(pos) == 0:
        return 0.0
    tN = float(t[pos[-1]])
    if len(pos) >= 2:
        steps = np.diff(pos)
        q = float(np.max((t[pos[1:]] / t[pos[:-1]]) ** (1.0 / steps)))
    else:
        q = 1.0
    geo = tN * q / (1.0 - q) if q < 1 else math.inf
    # power law: t(n) ~ C n**-beta, tail ~ t(N) N / (beta - 1)
    idx = np.arange(max(1, N // 2), N + 1)
    idx = idx[t[idx] > 0]
    if len(idx) >= 2 and idx[-1] > idx[0]:
        beta = -np.polyfit(np.log(idx), np.log(t[idx]), 1)[0]
        pw = tN * N / (beta - 1) if beta > 1 else math.inf
    else:
        pw = math.inf
    if math.isinf(geo) and math.isinf(pw):
        return math.inf
    return max(x for x in (geo, pw) if math.isfinite(x))


def _kernel_array(kernel: Union[KernelSpec, np.ndarray, Iterable[float]], N: int):
    if isinstance(kernel, KernelSpec):
        return kernel.values(N), kernel
    b = np.asarray(kernel, dtype=float)
    if len(b) < N:
        b = np.concatenate([b, np.zeros(N - len(b))])
    if np.any(b < 0):
        raise DomainError("kernel values must be non-negative")
    return b[:N], None


def compute_resolvent(
    kernel: Union[KernelSpec, np.ndarray], lambda1: float, N: int, method: str = "auto"
) -> ResolventSeries:
    """Compute ``z(0..N)`` for the kernel ``b`` and shock mean ``lambda1``.

    ``kernel`` is a :class:`KernelSpec` or an array ``b(1..M)`` (zero-padded
    beyond ``M``).
    """
    if N < 0:
        raise DomainError(f"N must be non-negative, got {N}")
    if not lambda1 > 0:
        raise DomainError(f"lambda1 must be positive, got {lambda1}")
    b, spec = _kernel_array(kernel, N)
    f = np.zeros(N + 1)
    f[0] = 1.0
    g = np.concatenate([[0.0], lambda1 * b])
    z = volterra_solve(f, g, method)
    z.flags.writeable = False
    b = b.copy()
    b.flags.writeable = False
    return ResolventSeries(z=z, lambda1=float(lambda1), b=b, kernel=spec)


def recursion_residual(rs: ResolventSeries) -> float:
    """``max_n |z(n) - lambda1 sum_{j<n} b(n-j) z(j)|`` evaluated by the direct sum."""
    z, b = rs.z, rs.b
    worst = 0.0
    for n in range(1, rs.N + 1):
        rhs = rs.lambda1 * np.dot(b[n - 1 :: -1], z[:n])
        worst = max(worst, abs(z[n] - rhs))
    return worst


def kernel_from_resolvent(z: np.ndarray, lambda1: float, method: str = "auto") -> np.ndarray:
    """Recover ``b(1..N)`` from ``z(0..N)`` by inverting the resolvent recursion.

    ``b(n) = (z(n) - lambda1 sum_{j=1}^{n-1} b(n-j) z(j)) / lambda1``.
    """
    z = np.asarray(z, dtype=float)
    if len(z) == 0 or z[0] != 1.0:
        raise DomainError("resolvent must start with z(0) = 1")
    if not lambda1 > 0:
        raise DomainError(f"lambda1 must be positive, got {lambda1}")
    f = z.copy()
    f[0] = 0.0
    g = -z
    beta = volterra_solve(f, g, method)
    return beta[1:] / lambda1


def load_resolvent_csv(path) -> np.ndarray:
    """Read ``z`` from a CSV with header ``n,z`` and consecutive ``n = 0, 1, ...``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["n", "z"]:
            raise DomainError(f"{path}:1: expected header 'n,z', got {header}")
        z = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                n, v = int(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            if n != len(z):
                raise DomainError(f"{path}:{lineno}: expected n = {len(z)}, got {n}")
            z.append(v)
    return np.asarray(z)


def _require_below(rs: ResolventSeries, weight: float, threshold: float, what: str) -> Interval:
    if rs.kernel is not None:
        s = weighted_kernel_sum(rs.kernel, weight, max(rs.N, 1)).scale(rs.lambda1)
    else:
        val = rs.lambda1 * float(np.sum(rs.b * np.power(weight, np.arange(1, rs.N + 1))))
        s = Interval(val, val)
    if not s.upper < threshold:
        raise StationarityError(
            f"{what}: lambda1 * sum b(j) {weight:g}**j lies in [{s.lower:.6g}, {s.upper:.6g}], "
            f"not provably below {threshold:g}"
        )
    return s


def _weighted_b(rs: ResolventSeries, weight: float) -> float:
    if rs.kernel is not None:
        return kernel_sum(rs.kernel, weight, 1, N=max(rs.N, 1))
    return float(np.sum(rs.b * np.power(weight, np.arange(1, rs.N + 1))))


@dataclass
class SumIdentity:
    lhs: float
    rhs: float
    residual: float
    truncated: bool


def resolvent_sum_identity(rs: ResolventSeries, r_inv: float = 1.0) -> SumIdentity:
    """Compare ``sum_n z(n) r_inv**n`` (truncated at N) with ``1 / (1 - lambda1 sum_j b(j) r_inv**j)``.

    Raises :class:`StationarityError` unless the weighted kernel sum is
    provably below 1. ``truncated`` flags a horizon too short for the partial
    sum to have converged.
    """
    _require_below(rs, r_inv, 1.0, "resolvent_sum_identity")
    lhs = rs.weighted_sum(r_inv)
    rhs = 1.0 / (1.0 - rs.lambda1 * _weighted_b(rs, r_inv))
    return SumIdentity(lhs, rhs, abs(lhs - rhs), rs.tail_flag(r_inv))


def ztransform_check(rs: ResolventSeries, lambda_grid: Iterable[complex]) -> float:
    """Max of ``|psi(x) D(x) - 1|`` over the grid, with ``psi`` and ``D`` truncated at N.

    ``psi(x) = 1 - lambda1 sum_{j=1}^N b(j) x**j`` and ``D(x) = sum_{j=0}^N z(j) x**j``.
    """
    grid = np.atleast_1d(np.asarray(list(lambda_grid), dtype=complex))
    R = float(np.max(np.abs(grid))) if grid.size else 0.0
    if R > 0:
        _require_below(rs, R, 1.0, "ztransform_check")
    psi_coef = np.concatenate([[1.0], -rs.lambda1 * rs.b])
    psi = P.polyval(grid, psi_coef)
    D = P.polyval(grid, rs.z)
    return float(np.max(np.abs(psi * D - 1.0))) if grid.size else 0.0


@dataclass
class ULMResult:
    """Upper and lower bounding sequences ``U_1..U_m``, ``L_1..L_m`` and their common limit."""

    U: np.ndarray
    L: np.ndarray
    target: float
    tail_warning: bool

    @property
    def gap(self) -> np.ndarray:
        return np.abs(self.U - self.L)


def ulm_iteration(rs: ResolventSeries, r: float, m_max: int) -> ULMResult:
    """Run the alternating bound iteration

        U_1 = 1,  L_m = 1 - (sum_{j>=1} z(j) r**j) U_m,  U_{m+1} = 1 - (sum_{j=1}^m z(j) r**j) L_m,

    whose common limit is ``1 - lambda1 sum_j b(j) r**j``. Requires
    ``lambda1 sum_j b(j) r**-j < 1/2``. The infinite sum uses the whole
    computed horizon; ``tail_warning`` is set (and a
    :class:`TruncationWarning` issued) when ``z(N) r**N`` exceeds ``1e-9``
    of that sum.
    """
    if not 0 < r <= 1:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    if m_max < 1 or m_max > rs.N:
        raise DomainError(f"m_max must lie in [1, N={rs.N}], got {m_max}")
    _require_below(rs, 1.0 / r, 0.5, "ulm_iteration")
    terms = rs.z[1:] * np.power(r, np.arange(1, rs.N + 1))
    partial = np.cumsum(terms)
    s_inf = float(partial[-1]) if len(partial) else 0.0
    tail_warning = bool(len(terms) and terms[-1] > 1e-9 * s_inf)
    if tail_warning:
        warnings.warn("resolvent horizon may be too short for sum z(j) r**j", TruncationWarning, stacklevel=2)
    U = np.empty(m_max)
    L = np.empty(m_max)
    U[0] = 1.0
    for m in range(1, m_max + 1):
        L[m - 1] = 1.0 - s_inf * U[m - 1]
        if m < m_max:
            U[m] = 1.0 - partial[m - 1] * L[m - 1]
    target = 1.0 - rs.lambda1 * _weighted_b(rs, r)
    return ULMResult(U=U, L=L, target=target, tail_warning=tail_warning)
