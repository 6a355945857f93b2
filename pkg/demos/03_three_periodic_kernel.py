"""
A kernel that vanishes on multiples of three
============================================

b(n) = n**-2 unless 3 divides n, in which case b(n) = 0. Here
liminf b(n) n**2 = 0, yet the autocovariance stays of order n**-2 along
every residue class. A one-sided lower bound on rho therefore says nothing
about b.
"""

import math

import numpy as np

from archinfty import (
    MomentSpec,
    PeriodicPowerLaw,
    bound_ratio_sup,
    check_stationarity,
    compute_resolvent,
    periodic3_constants,
    rho,
)
from archinfty.kernel import corrected_kernel_sum

kernel = PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0)
print("sum b   ", corrected_kernel_sum(kernel, 10**5), "vs 4 pi^2/27 =", 4 * math.pi**2 / 27)
print("sum b^2 ", corrected_kernel_sum(kernel, 10**5, power=2), "vs 8 pi^4/729 =", 8 * math.pi**4 / 729)

# lambda2 * B**2 < 1 is enough for stationarity here
lam1 = 0.5
lam2 = 0.4
report = check_stationarity(kernel, MomentSpec(lam1, lam2), N=20_000)
print("s1, s2, con2, newcondbetter:", report.s1, report.s2, report.con2, report.newcondbetter)

pc = periodic3_constants(lam1)
print("K =", pc.extra["K"])
print("d =", np.round(pc.extra["d"], 5), " c =", np.round(pc.extra["c"], 5))
print("liminf z(n) n^2  =", pc.extra["z_liminf"], " limsup =", pc.extra["z_limsup"])

N = 40_000
rs = compute_resolvent(kernel, lam1, N)
ac = rho(kernel, MomentSpec(lam1, lam2), rs, K=N // 2)
lo, hi = N // 4, N // 2
sup, arg, _ = bound_ratio_sup(ac.rho, lambda k: k.astype(float) ** -2.0, window=(lo, hi))
n = np.arange(lo, hi + 1)
inf_ratio = np.min(ac.rho[n] * n.astype(float) ** 2)
print(f"rho(n) n^2 on [{lo}, {hi}]: between {inf_ratio:.4f} and {sup:.4f}")
print("b(n) n^2 on the same window has minimum", np.min(kernel(n) * n.astype(float) ** 2))
