"""
A two-periodic kernel
=====================

b(n) = 0.5 n**-2 for odd n and 0.25 n**-2 for even n. The ratio z(n)/b(n)
has two different limits along even and odd n, so no single constant can
describe the asymptotics. The closed-form constants are compared with a
resolvent computed to n = 200000.
"""

import numpy as np

from archinfty import PeriodicPowerLaw, compute_resolvent, periodic2_constants

pc = periodic2_constants(a0=0.5, a1=0.25, alpha=2.0, lambda1=1.0)
for key in ("Lambda", "T0", "T1", "d0", "d1", "tau0", "tau1", "ratio_even", "ratio_odd"):
    print(f"{key:>10s} = {pc.extra[key]:.6f}")

# a single-constant asymptotic would force 4 d0 = 2 d1
print("4 d0 =", 4 * pc.extra["d0"], " 2 d1 =", 2 * pc.extra["d1"])

N = 200_000
z = compute_resolvent(PeriodicPowerLaw((0.5, 0.25), 2.0), 1.0, N).z
n = np.arange(N // 2, N + 1)
scaled = z[n] * n.astype(float) ** 2
for parity, name in ((0, "even"), (1, "odd")):
    numeric = np.median(scaled[n % 2 == parity])
    print(f"z(n) n^2 on {name:4s} n: numeric {numeric:.5f}  closed form {pc.z_limits[parity]:.5f}")
