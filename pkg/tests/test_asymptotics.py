import csv
import io
import json
import math
import warnings

import numpy as np
import pytest

from archinfty.asymptotics import (
    RatioKind,
    bound_ratio_sup,
    diagnose,
    geometric_fit,
    loglog_slope,
    period3_polynomials,
    periodic2_constants,
    periodic3_constants,
    periodic_limits,
    ratio_limit_check,
    ratio_target,
    residue_sum_corrected,
    write_ratio_csv,
)
from archinfty.autocovariance import rho
from archinfty.errors import DomainError, TheoremNotApplicableError
from archinfty.kernel import Geometric, PeriodicPowerLaw, PowerLaw, Table
from archinfty.resolvent import compute_resolvent
from archinfty.stationarity import MomentSpec

from oracles import residue_power_sum, zeta

UNIT = MomentSpec(1.0, 2.0)
CUBIC = PowerLaw(0.1, 3.0)


@pytest.fixture(scope="module")
def cubic_rs():
    return compute_resolvent(CUBIC, 1.0, 10000)


class TestRatioLimits:
    def test_targets_closed_form(self):
        s = 0.1 * zeta(3)
        assert ratio_target(RatioKind.Z_OVER_B, CUBIC, 1.0) == pytest.approx(1 / (1 - s) ** 2, rel=1e-12)
        assert ratio_target(RatioKind.CHI_OVER_Z, CUBIC, 1.0) == pytest.approx(1 / (1 - s), rel=1e-12)
        assert ratio_target(RatioKind.RHO_OVER_B, CUBIC, 1.0, e_nu_sq=3.0) == pytest.approx(3 / (1 - s) ** 3, rel=1e-12)

    def test_weighted_targets(self):
        spec = Geometric(0.1, 0.5)
        r = 0.8
        s_minus = 0.1 * (0.5 / r) / (1 - 0.5 / r)
        s_plus = 0.1 * (0.5 * r) / (1 - 0.5 * r)
        assert ratio_target("Z_OVER_B", spec, 1.0, r) == pytest.approx(1 / (1 - s_minus) ** 2, rel=1e-12)
        assert ratio_target("CHI_OVER_Z", spec, 1.0, r) == pytest.approx(1 / (1 - s_plus), rel=1e-12)

    def test_hypothesis_failure(self):
        with pytest.raises(TheoremNotApplicableError):
            ratio_target(RatioKind.Z_OVER_B, Geometric(0.5, 0.5), 1.0, r=0.5)

    @pytest.mark.parametrize("kind", list(RatioKind))
    def test_cubic_power_law(self, cubic_rs, kind):
        chk = ratio_limit_check(kind, CUBIC, UNIT, cubic_rs, window=(3600, 4400))
        assert chk.rel_err < 0.02

    def test_error_shrinks_outward(self, cubic_rs):
        near = ratio_limit_check(RatioKind.Z_OVER_B, CUBIC, UNIT, cubic_rs, window=(400, 600))
        far = ratio_limit_check(RatioKind.Z_OVER_B, CUBIC, UNIT, cubic_rs, window=(8000, 10000))
        assert far.rel_err < near.rel_err

    def test_zero_window_guard(self):
        spec = Table((0.3, 0.1))
        rs = compute_resolvent(spec, 1.0, 100)
        with pytest.raises(TheoremNotApplicableError):
            ratio_limit_check(RatioKind.Z_OVER_B, spec, UNIT, rs)

    def test_two_periodic_per_residue(self):
        spec = PeriodicPowerLaw((0.5, 0.25), 2.0)
        rs = compute_resolvent(spec, 1.0, 20000)
        chk = ratio_limit_check(RatioKind.Z_OVER_B, spec, UNIT, rs, period=2)
        pc = periodic2_constants(0.5, 0.25)
        assert chk.per_residue[0] == pytest.approx(pc.z_over_b[0], rel=0.02)
        assert chk.per_residue[1] == pytest.approx(pc.z_over_b[1], rel=0.02)

    def test_total_autocovariance_identity(self):
        # sum over all integer lags of rho equals E[nu**2] (sum z)**2
        spec = Table((0.5,))
        rs = compute_resolvent(spec, 1.0, 400)
        rep = rho(spec, UNIT, rs, 200)
        total = rep.rho[0] + 2 * rep.rho[1:].sum()
        assert total == pytest.approx(rep.e_nu_sq * rs.z.sum() ** 2, rel=1e-12)
        assert total == pytest.approx(24.0, rel=1e-12)


class TestPeriodic2:
    REFERENCE = {"Lambda": 5.55073, "T0": 6.14391, "T1": 6.58015, "d0": 4.71699,
                 "d1": 4.82605, "tau0": 22.5498, "ratio_even": 67.9375, "ratio_odd": 34.1128}

    def test_reference_values(self):
        pc = periodic2_constants(0.5, 0.25, lambda1=1.0)
        for key, ref in self.REFERENCE.items():
            assert pc.extra[key] == pytest.approx(ref, rel=1e-4), key

    def test_sums(self):
        pc = periodic2_constants(0.5, 0.25)
        assert pc.S[0] == pytest.approx(math.pi**2 / 16, rel=1e-14)
        assert pc.S[1] == pytest.approx(math.pi**2 / 96, rel=1e-14)

    def test_internal_identities(self):
        pc = periodic2_constants(0.5, 0.25)
        e = pc.extra
        assert e["d0"] == pytest.approx(0.5 * e["T0"] + 0.25 * e["T1"], rel=1e-12)
        assert e["tau0"] == pytest.approx(e["T0"] * pc.z_sums[0] + e["T1"] * pc.z_sums[1], rel=1e-12)
        assert sum(pc.z_sums) == pytest.approx(1 / (1 - sum(pc.S)), rel=1e-12)

    def test_refutation_margin(self):
        e = periodic2_constants(0.5, 0.25).extra
        assert abs(4 * e["d0"] - 2 * e["d1"]) > 5

    def test_symmetric_case(self):
        pc = periodic2_constants(0.3, 0.3)
        assert pc.extra["d0"] == pytest.approx(pc.extra["d1"], rel=1e-13)

    def test_matches_circulant_route(self):
        for a0, a1, lam in ((0.5, 0.25, 1.0), (0.2, 0.6, 0.7)):
            pc = periodic2_constants(a0, a1, lambda1=lam)
            Z, w, chi = periodic_limits(PeriodicPowerLaw((a0, a1), 2.0), lam)
            assert np.allclose(pc.z_sums, Z, rtol=1e-12)
            assert np.allclose(pc.z_limits, w, rtol=1e-12)
            assert np.allclose(pc.chi_limits, chi, rtol=1e-12)

    def test_numeric_resolvent(self):
        spec = PeriodicPowerLaw((0.5, 0.25), 2.0)
        N = 200000
        z = compute_resolvent(spec, 1.0, N).z
        pc = periodic2_constants(0.5, 0.25)
        n = np.arange(N - 2000, N + 1)
        zn2 = z[n] * n.astype(float) ** 2
        assert np.median(zn2[n % 2 == 0]) == pytest.approx(pc.extra["d0"], rel=0.02)
        assert np.median(zn2[n % 2 == 1]) == pytest.approx(pc.extra["d1"], rel=0.02)

    def test_numeric_resolvent_away_from_unit_mean(self):
        # d_i carry a factor lambda1, invisible at lambda1 = 1
        N = 200000
        z = compute_resolvent(PeriodicPowerLaw((0.2, 0.6), 2.0), 0.7, N).z
        pc = periodic2_constants(0.2, 0.6, lambda1=0.7)
        n = np.arange(N - 2000, N + 1)
        zn2 = z[n] * n.astype(float) ** 2
        assert np.median(zn2[n % 2 == 0]) == pytest.approx(pc.z_limits[0], rel=0.02)
        assert np.median(zn2[n % 2 == 1]) == pytest.approx(pc.z_limits[1], rel=0.02)

    def test_hypothesis_guard(self):
        with pytest.raises(TheoremNotApplicableError):
            periodic2_constants(0.5, 0.25, lambda1=1.5)

    def test_json(self):
        d = json.loads(periodic2_constants(0.5, 0.25).to_json())
        assert d["p"] == 2 and len(d["chi_over_b"]) == 2


class TestPeriodic3:
    def test_sums_and_positivity(self):
        pc = periodic3_constants(0.5)
        assert pc.S[0] == pytest.approx(0.5 * residue_power_sum(3, 0, 2.0), rel=1e-14)
        assert pc.S[1] == pytest.approx(0.5 * residue_power_sum(3, 1, 2.0), rel=1e-14)
        assert pc.S[2] == 0.0
        e = pc.extra
        assert all(math.isfinite(v) for v in [e["K"], *e["d"], *e["c"]])
        assert e["z_liminf"] > 0 and e["chi_liminf"] > 0

    def test_partial_sum_route(self):
        a = periodic3_constants(0.5)
        b = periodic3_constants(0.5, M=10**6)
        assert np.allclose(a.S, b.S, rtol=1e-12)

    def test_residue_sum_corrected_against_hurwitz(self):
        assert residue_sum_corrected(1.0, 3, 1, 2.0, 10**5) == pytest.approx(residue_power_sum(3, 1, 2.0), rel=1e-12)

    def test_degenerate_polynomials(self):
        den, d = period3_polynomials(0.0, 0.0)
        assert den == 1.0 and d == [0.0, 1.0, 1.0]

    def test_matches_circulant_route(self):
        pc = periodic3_constants(0.5)
        Z, w, chi = periodic_limits(PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0), 0.5)
        assert np.allclose(pc.z_sums, Z, rtol=1e-12)
        assert np.allclose(pc.z_limits, w, rtol=1e-12)
        assert np.allclose(pc.chi_limits, chi, rtol=1e-12)

    def test_numeric_resolvent(self):
        N = 300000
        spec = PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0)
        z = compute_resolvent(spec, 0.5, N).z
        pc = periodic3_constants(0.5)
        n = np.arange(N - 3000, N + 1)
        zn2 = z[n] * n.astype(float) ** 2
        for s in range(3):
            assert np.median(zn2[n % 3 == s]) == pytest.approx(pc.z_limits[s], rel=0.03)

    def test_hypothesis_guard(self):
        with pytest.raises(TheoremNotApplicableError):
            periodic3_constants(0.7)


class TestSlopes:
    def test_inverse_square(self):
        n = np.arange(10001, dtype=float)
        seq = np.zeros_like(n)
        seq[1:] = n[1:] ** -2.0
        res = loglog_slope(seq)
        assert res.slope == pytest.approx(-2.0, abs=1e-12) and res.residual < 1e-6

    def test_oscillating(self):
        n = np.arange(10001, dtype=float)
        seq = (2 + np.cos(n * np.pi)) * np.where(n > 0, n, 1) ** -3.0
        res = loglog_slope(seq, window=(1000, 10000))
        assert abs(res.slope + 3) < 0.05
        assert abs(loglog_slope(seq, window=(1000, 10000), running_max=True).slope + 3) < 0.05

    def test_excluded_points_reported(self):
        seq = np.array([0, 1.0, 0.0, 1 / 9, 1 / 16])
        res = loglog_slope(seq, window=(1, 4))
        assert res.excluded == 1 and res.slope == pytest.approx(-2.0, abs=1e-12)

    def test_all_excluded(self):
        with pytest.raises(DomainError):
            loglog_slope(np.zeros(20), window=(5, 10))

    def test_superpolynomial(self):
        assert loglog_slope(0.5 ** np.arange(2001)).superpolynomial

    def test_rho_of_cubic(self, cubic_rs):
        rep = rho(CUBIC, UNIT, cubic_rs, 5000)
        assert abs(loglog_slope(rep.rho).slope + 3) < 0.1


class TestGeometricFit:
    def test_exact(self):
        fit = geometric_fit(8 * 0.5 ** np.arange(60))
        assert fit.rate == pytest.approx(0.5, rel=1e-10)
        assert fit.c == pytest.approx(8.0, rel=1e-10)
        assert fit.residual < 1e-10 and fit.ok

    def test_polynomial(self):
        n = np.arange(1, 10002, dtype=float)
        seq = np.concatenate([[1.0], n ** -2.0])
        assert not geometric_fit(seq, window=(100, 1000)).ok
        assert not geometric_fit(seq, window=(1000, 10000)).ok

    def test_geometric_kernel_rho(self):
        spec = Geometric(1.0, 0.5)
        m = MomentSpec.from_variance(0.5, 0.25)
        rep = rho(spec, m, compute_resolvent(spec, 0.5, 400), 150)
        fit = geometric_fit(rep.rho, window=(15, 100))
        assert fit.ok and fit.rate < 1
        assert fit.rate == pytest.approx(0.75, rel=1e-6)

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            geometric_fit(np.array([1.0, 0.0, 0.5]), window=(0, 2))


class TestBoundRatio:
    def test_identity(self):
        seq = 1.0 / np.arange(1, 50)
        sup, _, running = bound_ratio_sup(seq, seq)
        assert sup == 1.0 and np.all(running == 1.0)

    def test_single_lag(self):
        spec = Table((0.5,))
        rep = rho(spec, UNIT, compute_resolvent(spec, 1.0, 200), 50)
        sup, _, _ = bound_ratio_sup(rep.rho, lambda n: (4 / 3) * 0.5**n)
        assert sup == pytest.approx(6.0, rel=1e-12)

    def test_three_periodic_one_sided(self):
        spec = PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0)
        m = MomentSpec(0.5, 0.35)
        rep = rho(spec, m, compute_resolvent(spec, 0.5, 40000), 20000)
        n = np.arange(1, 20001)
        lo = 10000
        sup, _, _ = bound_ratio_sup(rep.rho, lambda k: k.astype(float) ** -2.0, window=(lo, 20000))
        assert 0 < sup < math.inf
        b = spec(n)
        assert np.min(b[lo - 1 :] * n[lo - 1 :].astype(float) ** 2) == 0.0

    def test_nonpositive_gamma(self):
        with pytest.raises(DomainError):
            bound_ratio_sup(np.ones(5), np.zeros(5))


class TestDiagnose:
    def test_cubic(self, cubic_rs):
        diag = diagnose(CUBIC, UNIT, rs=cubic_rs)
        v = diag.verdicts
        assert v["kernel_in_W(r)"] == "CONSISTENT"
        assert v["Z_OVER_B"] == v["CHI_OVER_Z"] == v["RHO_OVER_B"] == "AGREES"
        assert v["geometric"] == "NOT_GEOMETRIC"
        d = json.loads(diag.to_json())
        assert abs(d["loglog_slope"]["slope"] + 3) < 0.1

    def test_geometric_kernel(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            diag = diagnose(Geometric(1.0, 0.5), MomentSpec.from_variance(0.5, 0.25), N=400)
        assert diag.verdicts["geometric"] == "GEOMETRIC"
        assert diag.verdicts["Z_OVER_B"] in ("HYPOTHESIS_UNVERIFIED", "NOT_APPLICABLE")

    def test_ratio_csv(self):
        buf = io.StringIO()
        write_ratio_csv(buf, np.array([1, 2]), np.array([0.5, 0.25]))
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows == [["n", "ratio"], ["1", "0.5"], ["2", "0.25"]]
