"""Monte Carlo simulation of the ARCH(inf) recursion.

    X(k) = s(k) xi(k),    s(k) = a + sum_{j=1}^{M} b(j) X(k - j)

with i.i.d. non-negative shocks ``xi``, history truncated at lag ``M`` and
started at the stationary mean. Each path draws from its own stream, derived
from ``(seed, path_index)``, so multi-path runs are reproducible regardless of
how paths are scheduled across workers.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._io import open_text_out
from .errors import DomainError, NoStationarySolutionError, SimulationOverflowError
from .interval import Verdict
from .kernel import KernelSpec
from .stationarity import MomentSpec, check_stationarity

__all__ = [
    "ShockSpec",
    "ScaledBernoulli",
    "Exponential",
    "LogNormal",
    "Uniform",
    "Gamma",
    "Degenerate",
    "shock_from_dict",
    "PathConfig",
    "SimResult",
    "simulate_path",
    "empirical_autocovariance",
    "simulate",
    "write_path_csv",
    "worker_count",
]


class ShockSpec:
    """Distribution of the non-negative shocks ``xi``."""

    @property
    def lambda1(self) -> float:
        raise NotImplementedError

    @property
    def lambda2(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def moments(self, a: float = 1.0) -> MomentSpec:
        return MomentSpec(self.lambda1, self.lambda2, a)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = type(self).__name__.lower()
        return d


def _check_positive_mean(s: ShockSpec):
    if not s.lambda1 > 0:
        raise DomainError(f"{type(s).__name__} must have a positive mean")


@dataclass(frozen=True)
class ScaledBernoulli(ShockSpec):
    """``xi = hi`` with probability ``p``, else ``lo``."""

    p: float
    hi: float
    lo: float = 0.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if self.lo < 0 or self.hi <= self.lo:
            raise DomainError("need 0 <= lo < hi")
        _check_positive_mean(self)

    @property
    def lambda1(self):
        return self.p * self.hi + (1 - self.p) * self.lo

    @property
    def lambda2(self):
        return self.p * self.hi**2 + (1 - self.p) * self.lo**2

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p, self.hi, self.lo)


@dataclass(frozen=True)
class Exponential(ShockSpec):
    mean: float = 1.0

    def __post_init__(self):
        if not self.mean > 0:
            raise DomainError(f"mean must be positive, got {self.mean}")

    @property
    def lambda1(self):
        return self.mean

    @property
    def lambda2(self):
        return 2.0 * self.mean**2

    def sample(self, rng, size):
        return rng.exponential(self.mean, size)


@dataclass(frozen=True)
class LogNormal(ShockSpec):
    """``xi = exp(mu + s N(0, 1))``."""

    mu: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")

    @property
    def lambda1(self):
        return math.exp(self.mu + 0.5 * self.s**2)

    @property
    def lambda2(self):
        return math.exp(2 * self.mu + 2 * self.s**2)

    def sample(self, rng, size):
        return rng.lognormal(self.mu, self.s, size)


@dataclass(frozen=True)
class Uniform(ShockSpec):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.lo < 0 or self.hi <= self.lo:
            raise DomainError("need 0 <= lo < hi")

    @property
    def lambda1(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def lambda2(self):
        return (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)


@dataclass(frozen=True)
class Gamma(ShockSpec):
    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("shape and scale must be positive")

    @property
    def lambda1(self):
        return self.shape * self.scale

    @property
    def lambda2(self):
        return self.shape * (self.shape + 1) * self.scale**2

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class Degenerate(ShockSpec):
    """Constant shocks. Zero variance is outside the model; for testing only."""

    value: float = 1.0

    @property
    def lambda1(self):
        return self.value

    @property
    def lambda2(self):
        return self.value**2

    def moments(self, a: float = 1.0) -> MomentSpec:
        raise DomainError("degenerate shocks have zero variance and no moment specification")

    def sample(self, rng, size):
        return np.full(size, float(self.value))


_FAMILIES = {
    "scaledbernoulli": ScaledBernoulli,
    "bernoulli": ScaledBernoulli,
    "exponential": Exponential,
    "lognormal": LogNormal,
    "uniform": Uniform,
    "gamma": Gamma,
}


def shock_from_dict(d: dict, where: str = "shocks") -> ShockSpec:
    """Build a shock distribution from ``{"family": name, **params}``."""
    if not isinstance(d, dict) or "family" not in d:
        raise DomainError(f"{where}: expected an object with a 'family' field")
    fam = str(d["family"]).lower()
    if fam not in _FAMILIES:
        raise DomainError(f"{where}.family: unknown shock family '{d['family']}' (choose from {sorted(_FAMILIES)})")
    params = {k: float(v) for k, v in d.items() if k != "family"}
    try:
        return _FAMILIES[fam](**params)
    except TypeError as exc:
        raise DomainError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class PathConfig:
    """Simulation plumbing: truncation lag ``M``, burn-in, length ``T``, seed and path count.

    ``burn_in`` defaults to ``10 * M``.
    """

    M: int
    T: int
    seed: int = 0
    n_paths: int = 1
    burn_in: Optional[int] = None

    def __post_init__(self):
        if self.M < 1:
            raise DomainError(f"M must be at least 1, got {self.M}")
        if self.T < 1:
            raise DomainError(f"T must be at least 1, got {self.T}")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be at least 1, got {self.n_paths}")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 10 * self.M)
        if self.burn_in < self.M:
            raise DomainError(f"burn_in ({self.burn_in}) must be at least M ({self.M})")

    def rng(self, path_index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(path_index),))
        return np.random.Generator(np.random.PCG64(ss))


def _stationary_mean(b: np.ndarray, lambda1: float, a: float) -> float:
    lb = lambda1 * float(b.sum())
    if not lb < 1:
        raise NoStationarySolutionError(f"lambda1 * sum_{{j<=M}} b(j) = {lb:.6g} is not below 1")
    return a * lambda1 / (1.0 - lb)


def simulate_path(kernel: KernelSpec, shocks: ShockSpec, a: float, cfg: PathConfig,
                  path_index: int = 0, require_stationary: bool = True) -> np.ndarray:
    """Simulate ``X(1..T)`` after discarding ``burn_in`` steps.

    Parameters
    ----------
    require_stationary
        Refuse to run unless (S2) is established. Only the deterministic-shock
        tests switch this off.

    Raises
    ------
    NoStationarySolutionError
        If the model has no weakly stationary solution.
    SimulationOverflowError
        If the path leaves the finite range.
    """
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if require_stationary:
        rep = check_stationarity(kernel, shocks.moments(a), N=max(4 * cfg.M, 2000))
        if rep.s2 is not Verdict.HOLDS or rep.s1 is not Verdict.HOLDS:
            raise NoStationarySolutionError(f"refusing to simulate: s1={rep.s1}, s2={rep.s2}")
    return _run_path(kernel.values(cfg.M), shocks, a, cfg, path_index)


def _run_path(b: np.ndarray, shocks: ShockSpec, a: float, cfg: PathConfig, path_index: int) -> np.ndarray:
    M = cfg.M
    total = cfg.burn_in + cfg.T
    x = np.empty(M + total)
    x[:M] = _stationary_mean(b, shocks.lambda1, a)
    xi = shocks.sample(cfg.rng(path_index), total)
    brev = np.ascontiguousarray(b[::-1])
    dot = np.dot
    if M == 1:
        b1 = float(b[0])
        prev = x[0]
        for k in range(total):
            prev = (a + b1 * prev) * xi[k]
            x[M + k] = prev
    else:
        for k in range(total):
            x[M + k] = (a + dot(brev, x[k : k + M])) * xi[k]
    out = x[M + cfg.burn_in :]
    if not np.all(np.isfinite(out)):
        raise SimulationOverflowError("simulated path overflowed")
    return out


@dataclass
class SimResult:
    """Empirical mean and autocovariance with batch-means standard errors."""

    empirical_mean: float
    mean_se: float
    rho_hat: np.ndarray
    se: np.ndarray
    T: int
    n_batches: int
    config: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.rho_hat) - 1

    def to_csv(self, path) -> None:
        with open_text_out(path) as fh:
            w = csv.writer(fh)
            w.writerow(["lag", "rho_hat", "se"])
            for k in range(self.K + 1):
                w.writerow([k, repr(float(self.rho_hat[k])), repr(float(self.se[k]))])

    def to_dict(self) -> dict:
        return {
            "empirical_mean": self.empirical_mean,
            "mean_se": self.mean_se,
            "T": self.T,
            "n_batches": self.n_batches,
            "rho_hat": [float(v) for v in self.rho_hat],
            "se": [float(v) for v in self.se],
            "config": self.config,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _acov(xc: np.ndarray, K: int) -> np.ndarray:
    """Biased (divide by length) autocovariance of a centred series."""
    n = len(xc)
    if K <= 200:
        return np.array([np.dot(xc[: n - k], xc[k:]) for k in range(K + 1)]) / n
    size = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(xc, size)
    return np.fft.irfft(f * np.conj(f), size)[: K + 1] / n


def _batch_stats(x: np.ndarray, K: int, n_batches: int, mean: float) -> tuple:
    L = len(x) // n_batches
    if L <= K:
        raise DomainError(f"batches of length {L} are too short for lag {K}")
    acovs = np.empty((n_batches, K + 1))
    means = np.empty(n_batches)
    for i in range(n_batches):
        seg = x[i * L : (i + 1) * L]
        means[i] = seg.mean()
        acovs[i] = _acov(seg - mean, K)
    return means, acovs


def empirical_autocovariance(X: np.ndarray, K: int, n_batches: int = 32) -> SimResult:
    """Biased autocovariance estimate ``(1/T) sum (X(n) - Xbar)(X(n+k) - Xbar)`` for lags ``0..K``.

    Standard errors come from ``n_batches`` non-overlapping batches, each
    centred at the global mean.

    Raises
    ------
    DomainError
        If ``T <= 10 K``.
    """
    X = np.asarray(X, dtype=float)
    T = len(X)
    if K < 0 or T <= 10 * K or T < 2:
        raise DomainError(f"need T > 10 K, got T={T}, K={K}")
    mean = float(X.mean())
    rho_hat = _acov(X - mean, K)
    means, acovs = _batch_stats(X, K, n_batches, mean)
    return SimResult(
        empirical_mean=mean,
        mean_se=float(means.std(ddof=1) / math.sqrt(n_batches)),
        rho_hat=rho_hat,
        se=acovs.std(axis=0, ddof=1) / math.sqrt(n_batches),
        T=T,
        n_batches=n_batches,
    )


def worker_count(n_tasks: int) -> int:
    """Workers to use: ``ARCHINFTY_THREADS`` if set, else the CPU count, capped by tasks."""
    env = os.environ.get("ARCHINFTY_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"ARCHINFTY_THREADS must be an integer, got '{env}'") from None
        if cap < 1:
            raise DomainError("ARCHINFTY_THREADS must be at least 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _path_task(args):
    b, shocks, a, cfg, i, K, n_batches = args
    x = _run_path(b, shocks, a, cfg, i)
    mean = float(x.mean())
    means, acovs = _batch_stats(x, K, n_batches, mean)
    return mean, _acov(x - mean, K), means, acovs


def simulate(kernel: KernelSpec, shocks: ShockSpec, a: float, cfg: PathConfig, K: int,
             n_batches: int = 32) -> SimResult:
    """Simulate ``cfg.n_paths`` paths and pool their autocovariance estimates.

    The pooled estimate is the average over paths; standard errors use all
    ``n_paths * n_batches`` batches. Results are combined in path order, so
    they do not depend on the number of workers.
    """
    if cfg.T <= 10 * K:
        raise DomainError(f"need T > 10 K, got T={cfg.T}, K={K}")
    rep = check_stationarity(kernel, shocks.moments(a), N=max(4 * cfg.M, 2000))
    if rep.s1 is not Verdict.HOLDS or rep.s2 is not Verdict.HOLDS:
        raise NoStationarySolutionError(f"refusing to simulate: s1={rep.s1}, s2={rep.s2}")
    b = kernel.values(cfg.M)
    tasks = [(b, shocks, a, cfg, i, K, n_batches) for i in range(cfg.n_paths)]
    workers = worker_count(cfg.n_paths)
    if workers == 1:
        results = [_path_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_path_task, tasks))
    means = np.array([r[0] for r in results])
    rho_hat = np.mean([r[1] for r in results], axis=0)
    bmeans = np.concatenate([r[2] for r in results])
    bacovs = np.concatenate([r[3] for r in results])
    nb = len(bmeans)
    config = {"M": cfg.M, "T": cfg.T, "seed": cfg.seed, "n_paths": cfg.n_paths, "burn_in": cfg.burn_in,
              "a": a, "kernel": kernel.to_dict(), "shocks": shocks.to_dict()}
    return SimResult(
        empirical_mean=float(means.mean()),
        mean_se=float(bmeans.std(ddof=1) / math.sqrt(nb)),
        rho_hat=rho_hat,
        se=bacovs.std(axis=0, ddof=1) / math.sqrt(nb),
        T=cfg.T,
        n_batches=nb,
        config=config,
    )


def write_path_csv(path, X: np.ndarray) -> None:
    with open_text_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["k", "x"])
        for k, v in enumerate(X, start=1):
            w.writerow([k, repr(float(v))])
