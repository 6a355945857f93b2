"""
Geometric versus polynomial memory
==================================

A geometric kernel yields a geometrically decaying autocovariance. A
power-law kernel yields one that decays like the kernel itself, and the
ratio rho(n)/b(n) settles to an explicit constant.
"""

from archinfty import (
    Geometric,
    MomentSpec,
    PowerLaw,
    compute_resolvent,
    diagnose,
    geometric_fit,
    loglog_slope,
    rho,
)

geo = Geometric(c=1.0, q=0.5)
m_geo = MomentSpec.from_variance(0.5, 0.25)
ac_geo = rho(geo, m_geo, compute_resolvent(geo, 0.5, 400), K=150)
fit = geometric_fit(ac_geo.rho, window=(15, 150))
print(f"geometric kernel: rate {fit.rate:.6f}, ok={fit.ok}")

pl = PowerLaw(c=0.1, alpha=3.0)
m_pl = MomentSpec(1.0, 2.0)
ac_pl = rho(pl, m_pl, compute_resolvent(pl, 1.0, 10_000), K=5000)
print(f"power-law kernel: geometric fit ok={geometric_fit(ac_pl.rho, window=(500, 5000)).ok}, "
      f"log-log slope {loglog_slope(ac_pl.rho).slope:.4f}")

diag = diagnose(pl, m_pl, N=10_000)
for kind, target in diag.theoretical_limits.items():
    emp = diag.ratio_series[kind]["empirical"]
    print(f"{kind:>11s}: empirical {emp:.5f}  limit {target:.5f}  -> {diag.verdicts[kind]}")
