"""Memory kernels ``b(j)``, their weighted sums and W(r)-class diagnostics.

Indexing contract
-----------------
A kernel is defined for ``j >= 1`` only. ``spec.values(n)`` returns the
array ``[b(1), b(2), ..., b(n)]``, so ``values(n)[i] == b(i + 1)``. Every
other module that stores kernel values in an array follows this contract;
index 0 of a kernel is never evaluated.

Periodic kernels use the convention ``b(p*m + i + 1) = scales[i] * (p*m + i + 1)**-alpha``,
i.e. ``scales[i]`` weights the indices with ``(j - 1) % p == i``. With
``scales=(0.5, 0.25)`` this is the two-periodic counterexample kernel
(``b`` odd-indexed ``0.5 j**-2``, even-indexed ``0.25 j**-2``) and with
``scales=(1, 1, 0)`` the period-3 kernel that vanishes on multiples of 3.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import special

from .errors import DegenerateKernelWarning, DomainError
from .interval import Interval

__all__ = [
    "KernelSpec",
    "PowerLaw",
    "Geometric",
    "PeriodicPowerLaw",
    "LogModulatedPowerLaw",
    "Table",
    "eval_kernel",
    "weighted_kernel_sum",
    "squared_kernel_sum",
    "corrected_kernel_sum",
    "kernel_sum",
    "WrReport",
    "wr_diagnostic",
    "load_table_csv",
    "kernel_from_dict",
]


def _weighted_powers(vals: np.ndarray, start: int, weight: float, power: int) -> np.ndarray:
    """Return ``vals**power * weight**j`` for ``j = start, start+1, ...`` without overflow."""
    vp = vals**power if power != 1 else np.asarray(vals, dtype=float)
    if weight == 1.0:
        return vp
    j = np.arange(start, start + len(vals), dtype=float)
    out = np.zeros_like(vp)
    pos = vp > 0
    out[pos] = np.exp(np.log(vp[pos]) + j[pos] * math.log(weight))
    return out


def _power_tail_bound(c: float, alpha: float, n: int, weight: float) -> float:
    """Bound ``sum_{j>n} c j**-alpha weight**j`` for ``n >= 1``."""
    if c == 0.0:
        return 0.0
    if weight > 1.0:
        return math.inf
    bound = math.inf
    if alpha > 1.0:
        bound = c * n ** (1.0 - alpha) / (alpha - 1.0)
    if weight < 1.0:
        # terms are at most c (n+1)**-alpha weight**j
        geo = c * (n + 1) ** (-alpha) * weight ** (n + 1) / (1.0 - weight)
        bound = min(bound, geo)
    return bound


class KernelSpec:
    """Base class for kernel families.

    Subclasses implement ``__call__`` (vectorised over integer ``j >= 1``),
    ``tail_bound`` and optionally ``exact_sum``.
    """

    def __call__(self, j):
        raise NotImplementedError

    def values(self, n: int) -> np.ndarray:
        """Return ``b(1..n)`` as a float array of length ``n``."""
        if n <= 0:
            return np.zeros(0)
        return np.asarray(self(np.arange(1, n + 1)), dtype=float)

    def tail_bound(self, n: int, weight: float = 1.0, power: int = 1) -> float:
        """Rigorous upper bound on ``sum_{j>n} b(j)**power * weight**j``."""
        raise NotImplementedError

    def tail_estimate(self, n: int, power: int = 1) -> float:
        """Asymptotic estimate of ``sum_{j>n} b(j)**power`` (defaults to the bound)."""
        return self.tail_bound(n, 1.0, power)

    def exact_sum(self, weight: float = 1.0, power: int = 1) -> Optional[float]:
        """Closed form of ``sum_{j>=1} b(j)**power * weight**j`` when one is known."""
        return None

    @property
    def is_degenerate(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(KernelSpec):
    """``b(j) = c * j**-alpha``."""

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"PowerLaw scale must be positive, got {self.c}")
        if not self.alpha > 1:
            raise DomainError(f"PowerLaw exponent must exceed 1, got {self.alpha}")

    def __call__(self, j):
        return self.c * np.asarray(j, dtype=float) ** (-self.alpha)

    def tail_bound(self, n, weight=1.0, power=1):
        return _power_tail_bound(self.c**power, self.alpha * power, n, weight)

    def tail_estimate(self, n, power=1):
        # Euler-Maclaurin: integral from n + 1/2
        s = self.alpha * power
        return self.c**power * (n + 0.5) ** (1.0 - s) / (s - 1.0)

    def tail_sum_exact(self, n: int, weight: float = 1.0, power: int = 1) -> float:
        s = self.alpha * power
        cp = self.c**power
        if weight > 1.0:
            return math.inf
        if weight == 1.0:
            return cp * float(special.zeta(s, n + 1))
        import mpmath

        return cp * float(weight ** (n + 1) * mpmath.lerchphi(weight, s, n + 1))

    def exact_sum(self, weight=1.0, power=1):
        return self.tail_sum_exact(0, weight, power)

    def to_dict(self):
        return {"family": "powerlaw", "c": self.c, "alpha": self.alpha}


@dataclass(frozen=True)
class Geometric(KernelSpec):
    """``b(j) = c * q**j`` with ``0 < q < 1``."""

    c: float
    q: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"Geometric scale must be positive, got {self.c}")
        if not 0 < self.q < 1:
            raise DomainError(f"Geometric ratio must lie in (0, 1), got {self.q}")

    def __call__(self, j):
        return self.c * self.q ** np.asarray(j, dtype=float)

    def tail_sum_exact(self, n: int, weight: float = 1.0, power: int = 1) -> float:
        x = self.q**power * weight
        if x >= 1.0:
            return math.inf
        return self.c**power * x ** (n + 1) / (1.0 - x)

    def tail_bound(self, n, weight=1.0, power=1):
        return self.tail_sum_exact(n, weight, power)

    def exact_sum(self, weight=1.0, power=1):
        return self.tail_sum_exact(0, weight, power)

    def to_dict(self):
        return {"family": "geometric", "c": self.c, "q": self.q}


@dataclass(frozen=True)
class PeriodicPowerLaw(KernelSpec):
    """``b(j) = scales[(j - 1) % p] * j**-alpha`` with period ``p = len(scales)``."""

    scales: tuple
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if len(self.scales) < 2:
            raise DomainError("PeriodicPowerLaw needs a period of at least 2")
        if any(s < 0 for s in self.scales):
            raise DomainError("PeriodicPowerLaw scales must be non-negative")
        if not self.alpha > 1:
            raise DomainError(f"PeriodicPowerLaw exponent must exceed 1, got {self.alpha}")
        if self.is_degenerate:
            warnings.warn("all periodic scales are zero", DegenerateKernelWarning, stacklevel=3)

    @property
    def period(self) -> int:
        return len(self.scales)

    @property
    def is_degenerate(self):
        return not any(self.scales)

    def __call__(self, j):
        j = np.asarray(j)
        a = np.asarray(self.scales)[(j - 1) % self.period]
        return a * np.asarray(j, dtype=float) ** (-self.alpha)

    def tail_bound(self, n, weight=1.0, power=1):
        return _power_tail_bound(max(self.scales) ** power, self.alpha * power, n, weight)

    def tail_estimate(self, n, power=1):
        s = self.alpha * power
        mean_scale = float(np.mean(np.asarray(self.scales) ** power))
        return mean_scale * (n + 0.5) ** (1.0 - s) / (s - 1.0)

    def residue_sum(self, i: int, power: int = 1) -> float:
        """``sum_{m>=0} b(p*m + i + 1)**power`` via the Hurwitz zeta function."""
        p, s = self.period, self.alpha * power
        return self.scales[i] ** power * p ** (-s) * float(special.zeta(s, (i + 1) / p))

    def exact_sum(self, weight=1.0, power=1):
        if weight != 1.0:
            return None
        return sum(self.residue_sum(i, power) for i in range(self.period))

    def to_dict(self):
        return {"family": "periodic", "scales": list(self.scales), "alpha": self.alpha}


@dataclass(frozen=True)
class LogModulatedPowerLaw(KernelSpec):
    """``b(j) = c * j**-alpha * log(j + 2)**gamma``.

    Summable when ``alpha > 1``, or ``alpha == 1`` and ``gamma < -1``.
    """

    c: float
    alpha: float
    gamma: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("LogModulatedPowerLaw scale must be positive")
        if not (self.alpha > 1 or (self.alpha == 1 and self.gamma < -1)):
            raise DomainError("LogModulatedPowerLaw needs alpha > 1, or alpha == 1 with gamma < -1")

    def __call__(self, j):
        j = np.asarray(j, dtype=float)
        return self.c * j ** (-self.alpha) * np.log(j + 2.0) ** self.gamma

    def tail_bound(self, n, weight=1.0, power=1):
        c, a, g = self.c**power, self.alpha * power, self.gamma * power
        if weight > 1.0:
            return math.inf
        L = math.log(n + 2.0)
        if g <= 0:
            if a > 1:
                bound = c * L**g * n ** (1.0 - a) / (a - 1.0)
            else:
                # x**-1 <= (1 + 2/n) (x + 2)**-1 on [n, inf)
                bound = c * (1.0 + 2.0 / n) * L ** (g + 1.0) / (-g - 1.0)
        else:
            # log(x+2) <= L + log(x/n); bounding integrand must decrease on [n, inf)
            if a * L <= g:
                return math.inf
            k = a - 1.0
            upper_gamma = float(special.gamma(g + 1.0) * special.gammaincc(g + 1.0, k * L))
            bound = c * n ** (1.0 - a) * math.exp(k * L) * k ** (-g - 1.0) * upper_gamma
        if weight < 1.0:
            first = float(self(n + 1)) ** power
            geo = first * weight ** (n + 1) / (1.0 - weight) if g <= 0 else math.inf
            bound = min(bound, geo)
        return bound

    def to_dict(self):
        return {"family": "logpower", "c": self.c, "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class Table(KernelSpec):
    """Tabulated ``b(1..M) = values`` followed by a tail rule for ``j > M``.

    ``tail`` is ``None`` (zero beyond the table), a :class:`PowerLaw` or a
    :class:`Geometric` evaluated at the absolute index ``j``.
    """

    entries: tuple = field(default=())
    tail: Optional[Union[PowerLaw, Geometric]] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in np.ravel(self.entries))
        object.__setattr__(self, "entries", vals)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise DomainError("Table values must be finite and non-negative")
        if self.tail is not None and not isinstance(self.tail, (PowerLaw, Geometric)):
            raise DomainError("Table tail must be None, PowerLaw or Geometric")
        if self.is_degenerate:
            warnings.warn("kernel is identically zero", DegenerateKernelWarning, stacklevel=3)

    @property
    def M(self) -> int:
        return len(self.entries)

    @property
    def is_degenerate(self):
        return self.tail is None and not any(self.entries)

    def __call__(self, j):
        j = np.asarray(j)
        scalar = j.ndim == 0
        j = np.atleast_1d(j)
        out = np.zeros(j.shape, dtype=float)
        inside = j <= self.M
        if self.M:
            out[inside] = np.asarray(self.entries)[j[inside] - 1]
        if self.tail is not None and (~inside).any():
            out[~inside] = self.tail(j[~inside])
        return out[0] if scalar else out

    def tail_bound(self, n, weight=1.0, power=1):
        extra = 0.0
        if n < self.M:
            rest = np.asarray(self.entries[n:])
            extra = float(_weighted_powers(rest, n + 1, weight, power).sum())
        if self.tail is None:
            return extra
        return extra + self.tail.tail_bound(max(n, self.M), weight, power)

    def tail_estimate(self, n, power=1):
        if n >= self.M and self.tail is not None:
            return self.tail.tail_estimate(n, power)
        return self.tail_bound(n, 1.0, power)

    def exact_sum(self, weight=1.0, power=1):
        table = float(_weighted_powers(np.asarray(self.entries), 1, weight, power).sum())
        if self.tail is None:
            return table
        return table + self.tail.tail_sum_exact(self.M, weight, power)

    def to_dict(self):
        d = {"family": "table", "values": list(self.entries)}
        d["tail"] = self.tail.to_dict() if self.tail is not None else {"family": "zero"}
        return d


def eval_kernel(spec: KernelSpec, j: int) -> float:
    """Evaluate ``b(j)`` for a single index ``j >= 1``."""
    if int(j) != j or j < 1:
        raise DomainError(f"kernel index must be a positive integer, got {j}")
    return float(spec(int(j)))


def weighted_kernel_sum(spec: KernelSpec, r_inv: float, N: int, tail: bool = True) -> Interval:
    """Bracket ``sum_{j>=1} b(j) * r_inv**j``.

    The lower end is the partial sum to ``N``; with ``tail=True`` the upper
    end adds a rigorous tail bound (integral test for power laws, exact
    geometric series for geometric tails). A divergent tail gives
    ``upper = inf``. ``r_inv = 1`` brackets ``B = sum_j b(j)``.
    """
    return _bracket(spec, N, r_inv, 1, tail)


def squared_kernel_sum(spec: KernelSpec, N: int, tail: bool = True) -> Interval:
    """Bracket ``sum_{j>=1} b(j)**2`` with the same tail policy."""
    return _bracket(spec, N, 1.0, 2, tail)


def _bracket(spec, N, weight, power, tail):
    if N < 1:
        raise DomainError(f"N must be at least 1, got {N}")
    if weight <= 0:
        raise DomainError(f"weight must be positive, got {weight}")
    terms = _weighted_powers(spec.values(N), 1, weight, power)
    lower = float(terms.sum())
    if not tail:
        return Interval(lower, lower)
    # pairwise summation of non-negative terms: relative error below a few eps * log2(count)
    count = int(np.count_nonzero(terms))
    slack = 4.0 * np.finfo(float).eps * math.log2(count) if count > 1 else 0.0
    return Interval(lower * (1.0 - slack), (lower + spec.tail_bound(N, weight, power)) * (1.0 + slack))


def corrected_kernel_sum(spec: KernelSpec, N: int, power: int = 1) -> float:
    """Partial sum of ``b(j)**power`` to ``N`` plus an asymptotic tail correction.

    For power-law families the correction is ``mean_scale * (N + 1/2)**(1 - s) / (s - 1)``,
    which removes the leading ``O(N**(1-s))`` truncation error.
    """
    lower = float(_weighted_powers(spec.values(N), 1, 1.0, power).sum())
    return lower + spec.tail_estimate(N, power)


def kernel_sum(spec: KernelSpec, weight: float = 1.0, power: int = 1, N: int = 100_000) -> float:
    """Best point value of ``sum_j b(j)**power * weight**j``.

    Uses the closed form when the family has one, otherwise the midpoint of
    the rigorous bracket at horizon ``N``.
    """
    exact = spec.exact_sum(weight, power)
    if exact is not None:
        return exact
    return _bracket(spec, N, weight, power, True).mid


@dataclass
class WrReport:
    """Finite-horizon evidence about membership of a sequence in W(r).

    The verdict is heuristic: it never certifies membership, it only says
    whether the data at this horizon look like a W(r) sequence.
    """

    r: float
    N: int
    ratios: np.ndarray
    ratio_deviation: float
    weighted_partial_sums: np.ndarray
    summability_increment: float
    m_grid: list
    convolution_stats: np.ndarray
    verdict: str
    reasons: list

    @property
    def consistent(self) -> bool:
        return self.verdict == "CONSISTENT"


def wr_diagnostic(
    seq: Union[Callable, Sequence[float], np.ndarray],
    r: float,
    N: int,
    m_grid: Sequence[int],
    start: int = 1,
    ratio_tol: float = 0.01,
    sum_tol: float = 0.01,
    conv_tol: float = 0.5,
    window_frac: float = 0.1,
) -> WrReport:
    """Heuristic check of the W(r) conditions on ``seq(start..N)``.

    Parameters
    ----------
    seq : callable or array
        ``seq(n)`` for integer ``n``; an array is indexed directly by ``n``.
    r : float
        Candidate rate in ``(0, 1]``.
    N : int
        Horizon; must exceed ``2 * max(m_grid)``.
    m_grid : sequence of int
        Values of ``m`` for the normalised convolution statistic
        ``max_{2m<=n<=N} seq(n)**-1 * sum_{i=m}^{n-m} seq(n-i) seq(i)``.

    Returns
    -------
    WrReport
        CONSISTENT when (i) ``r * seq(n-1)/seq(n)`` stays within ``ratio_tol``
        of 1 on the trailing ``window_frac`` of the horizon, (ii) the partial
        sums of ``seq(i) r**-i`` grow by less than ``sum_tol`` (relative) over
        the second half of the horizon, and (iii) the convolution statistic
        decreases along ``m_grid`` and ends below ``conv_tol``.
    """
    if not 0 < r <= 1:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    m_grid = sorted(int(m) for m in m_grid)
    if not m_grid or m_grid[0] < start:
        raise DomainError("m_grid must be non-empty with entries >= start")
    if N <= 2 * m_grid[-1]:
        raise DomainError("N must exceed 2 * max(m_grid)")
    n = np.arange(start, N + 1)
    if callable(seq):
        g = np.asarray(seq(n), dtype=float)
    else:
        g = np.asarray(seq, dtype=float)[start : N + 1]
    if len(g) != len(n):
        raise DomainError("sequence shorter than the horizon")
    reasons = []
    if not np.all(g > 0):
        bad = int(np.argmax(~(g > 0)))
        if np.any(g < 0) or np.any(g[bad:] > 0) or bad == 0:
            raise DomainError(f"sequence must be positive; seq({int(n[bad])}) = {g[bad]}")
        # a positive sequence that underflows to zero decays faster than any r**n
        N = int(n[bad - 1])
        n, g = n[:bad], g[:bad]
        reasons.append(f"sequence underflows to zero after n={N}")
        if N <= 2 * m_grid[-1]:
            return WrReport(r, N, np.array([]), math.inf, np.array([]), math.nan, m_grid,
                            np.array([]), "INCONSISTENT", reasons)

    w0 = max(1, int(len(g) * (1 - window_frac)))
    ratios = g[w0 - 1 : -1] / g[w0:]
    deviation = float(np.max(np.abs(r * ratios - 1.0)))
    if deviation > ratio_tol:
        reasons.append(f"ratio seq(n-1)/seq(n) deviates from 1/r by {deviation:.3g}")

    logw = np.log(g) - n * math.log(r)
    partial = np.cumsum(np.exp(logw))
    half = len(partial) // 2
    increment = float((partial[-1] - partial[half]) / partial[-1])
    if increment > sum_tol:
        reasons.append(f"weighted partial sums still growing ({increment:.3g} over last half)")

    # Normalised convolution is invariant under g -> g * r**n, so use g directly.
    full = np.zeros(N + 1)
    full[start:] = g
    stats = []
    for m in m_grid:
        gm = full.copy()
        gm[:m] = 0.0
        conv = np.convolve(gm, gm)[: N + 1]
        idx = np.arange(2 * m, N + 1)
        stats.append(float(np.max(conv[idx] / full[idx])))
    stats = np.asarray(stats)
    if len(stats) > 1 and not np.all(np.diff(stats) < 0):
        reasons.append("convolution statistic does not decrease along m_grid")
    if stats[-1] > conv_tol:
        reasons.append(f"convolution statistic {stats[-1]:.3g} at m={m_grid[-1]} exceeds {conv_tol}")

    return WrReport(
        r=r,
        N=N,
        ratios=ratios,
        ratio_deviation=deviation,
        weighted_partial_sums=partial,
        summability_increment=increment,
        m_grid=m_grid,
        convolution_stats=stats,
        verdict="INCONSISTENT" if reasons else "CONSISTENT",
        reasons=reasons,
    )


def load_table_csv(path, tail: Optional[Union[PowerLaw, Geometric]] = None) -> Table:
    """Load a tabulated kernel from a CSV with header ``index,value``.

    Indices are 1-based and strictly increasing; skipped indices are zero.
    Any malformed row raises :class:`DomainError` naming the line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["index", "value"]:
            raise DomainError(f"{path}:1: expected header 'index,value', got {header}")
        entries = []
        last = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                idx = int(row[0])
                val = float(row[1])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            if idx <= last:
                raise DomainError(f"{path}:{lineno}: index {idx} not strictly increasing (>= 1)")
            if not math.isfinite(val) or val < 0:
                raise DomainError(f"{path}:{lineno}: value must be finite and non-negative")
            entries.append((idx, val))
            last = idx
    vals = np.zeros(last)
    for idx, val in entries:
        vals[idx - 1] = val
    return Table(tuple(vals), tail)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise DomainError(f"{where}: missing field '{key}'")
    return d[key]


def kernel_from_dict(d: dict, where: str = "kernel") -> KernelSpec:
    """Build a kernel from its JSON dictionary form (see ``KernelSpec.to_dict``)."""
    if not isinstance(d, dict):
        raise DomainError(f"{where}: expected an object")
    family = str(_require(d, "family", where)).lower()
    try:
        if family == "powerlaw":
            return PowerLaw(float(_require(d, "c", where)), float(_require(d, "alpha", where)))
        if family == "geometric":
            return Geometric(float(_require(d, "c", where)), float(_require(d, "q", where)))
        if family == "periodic":
            return PeriodicPowerLaw(tuple(_require(d, "scales", where)), float(_require(d, "alpha", where)))
        if family == "logpower":
            return LogModulatedPowerLaw(
                float(_require(d, "c", where)), float(_require(d, "alpha", where)), float(_require(d, "gamma", where))
            )
        if family == "table":
            tail = d.get("tail")
            tail_spec = None
            if tail is not None and str(tail.get("family", "zero")).lower() != "zero":
                tail_spec = kernel_from_dict(tail, where + ".tail")
                if not isinstance(tail_spec, (PowerLaw, Geometric)):
                    raise DomainError(f"{where}.tail: must be zero, powerlaw or geometric")
            if "csv" in d:
                return load_table_csv(d["csv"], tail_spec)
            return Table(tuple(_require(d, "values", where)), tail_spec)
    except DomainError as exc:
        if str(exc).startswith(where):
            raise
        raise DomainError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{where}: {exc}") from None
    raise DomainError(f"{where}.family: unknown kernel family '{family}'")
