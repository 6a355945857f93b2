"""
Alternating bounds on the limit constant
========================================

The iteration U_1 = 1, L_m = 1 - S U_m, U_{m+1} = 1 - S_m L_m brackets
1 - lambda1 sum b(j) from both sides, where S sums z(j) and S_m is its
partial sum. The gap at step m is roughly the tail sum_{j>=m} z(j). It
closes fast for a single lag and slowly for a heavy kernel.
"""

from archinfty import PowerLaw, Table, compute_resolvent, ulm_iteration

cases = [
    ("single lag 0.4", Table((0.4,))),
    ("0.05 n^-3", PowerLaw(0.05, 3.0)),
    ("0.05 n^-5", PowerLaw(0.05, 5.0)),
]
for name, kernel in cases:
    res = ulm_iteration(compute_resolvent(kernel, 1.0, 20_000), 1.0, 400)
    gaps = ", ".join(f"m={m}: {res.gap[m - 1]:.1e}" for m in (10, 50, 200, 400))
    print(f"{name:>15s}  target {res.target:.10f}  gap {gaps}")
