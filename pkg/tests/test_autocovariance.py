import csv
import io
import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from archinfty.autocovariance import chi_series, chi_z, rho, variation_of_parameters_rho, yule_walker_residual
from archinfty.errors import HorizonError, NoStationarySolutionError
from archinfty.kernel import Geometric, PeriodicPowerLaw, PowerLaw, Table
from archinfty.resolvent import compute_resolvent
from archinfty.stationarity import MomentSpec, process_scalars

from oracles import brute_chi, brute_resolvent

SINGLE = Table((0.5,))
UNIT = MomentSpec(1.0, 2.0)


def zero_kernel():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Table(())


def single_lag_report(K=10, N=200):
    rs = compute_resolvent(SINGLE, 1.0, N)
    return rho(SINGLE, UNIT, rs, K), rs


class TestChi:
    def test_single_lag(self):
        rs = compute_resolvent(SINGLE, 1.0, 200)
        assert chi_z(rs, 0) == pytest.approx(4 / 3, rel=1e-15)
        assert chi_z(rs, 2) == pytest.approx(1 / 3, rel=1e-15)
        assert chi_z(rs, -2) == chi_z(rs, 2)

    def test_zero_kernel(self):
        rs = compute_resolvent(zero_kernel(), 1.0, 10)
        assert chi_z(rs, 0) == 1.0 and chi_z(rs, 3) == 0.0

    def test_out_of_horizon(self):
        rs = compute_resolvent(SINGLE, 1.0, 10)
        with pytest.raises(HorizonError):
            chi_z(rs, 11)

    def test_series_matches_brute_force(self):
        rs = compute_resolvent(PowerLaw(0.2, 2.5), 1.0, 400)
        chi, _ = chi_series(rs, 50)
        z = brute_resolvent(PowerLaw(0.2, 2.5).values(400).tolist(), 1.0, 400)
        assert np.allclose(chi, [brute_chi(z, k) for k in range(51)], rtol=1e-13)

    def test_fft_path_matches_direct(self):
        rs = compute_resolvent(PowerLaw(0.2, 2.5), 1.0, 40000)
        chi, _ = chi_series(rs, 150)  # (K+1)(N+1) above the direct threshold
        direct = [chi_z(rs, k) for k in (0, 1, 75, 150)]
        assert np.allclose(chi[[0, 1, 75, 150]], direct, rtol=1e-12)

    def test_tail_flag(self):
        _, flags = chi_series(compute_resolvent(PowerLaw(0.2, 1.5), 1.0, 100), 10)
        assert flags.all()
        _, flags = chi_series(compute_resolvent(SINGLE, 1.0, 200), 10)
        assert not flags.any()

    def test_two_periodic_ratio_to_kernel(self):
        spec = PeriodicPowerLaw((0.5, 0.25), 2.0)
        rs = compute_resolvent(spec, 1.0, 200000)
        b = spec.values(200000)
        for k, target in ((20000, 67.9375), (20001, 34.1128)):
            assert chi_z(rs, k) / b[k - 1] == pytest.approx(target, rel=0.02)


class TestRho:
    def test_single_lag(self):
        rep, _ = single_lag_report()
        assert np.allclose(rep.rho, 8 * 0.5 ** np.arange(11), rtol=1e-13)
        assert rep.e_nu_sq == pytest.approx(6.0, rel=1e-13)
        assert rep.at(-3) == rep.at(3)

    def test_iid(self):
        rep = rho(zero_kernel(), UNIT, compute_resolvent(zero_kernel(), 1.0, 20), 5)
        assert rep.rho.tolist() == [1, 0, 0, 0, 0, 0]

    def test_refuses_nonstationary(self):
        spec = Table((0.6,))
        with pytest.raises(NoStationarySolutionError):
            rho(spec, MomentSpec(1.0, 4.0), compute_resolvent(spec, 1.0, 100), 5)

    def test_lag_horizon(self):
        rs = compute_resolvent(SINGLE, 1.0, 20)
        with pytest.raises(HorizonError):
            rho(SINGLE, UNIT, rs, 11)
        assert rho(SINGLE, UNIT, rs, 15, allow_long_lags=True).K == 15

    @settings(max_examples=20, deadline=None)
    @given(head=st.lists(st.floats(0.0, 0.2), min_size=1, max_size=5),
           c=st.floats(1e-3, 0.1), q=st.floats(0.1, 0.7), lam1=st.floats(0.5, 1.5))
    def test_rho0_equals_variance(self, head, c, q, lam1):
        spec = Table(tuple(head), tail=Geometric(c, q))
        if lam1 * (sum(head) + c * q / (1 - q)) >= 0.9:
            return
        m = MomentSpec.from_variance(lam1, 0.2 * lam1**2)
        rs = compute_resolvent(spec, lam1, 2000)
        try:
            ps = process_scalars(spec, m, rs)
        except NoStationarySolutionError:
            return
        rep = rho(spec, m, rs, 20)
        assert rep.rho[0] == pytest.approx(ps.var_x, rel=1e-10)
        assert np.all(rep.rho >= 0)
        assert rep.chi[0] >= 1.0

    def test_summable(self):
        spec = PowerLaw(0.1, 3.0)
        rep = rho(spec, UNIT, compute_resolvent(spec, 1.0, 5000), 2000)
        partial = np.cumsum(rep.rho)
        assert partial[-1] - partial[1000] < 1e-5 * partial[-1]

    def test_csv_and_json(self):
        rep, _ = single_lag_report(K=3)
        buf = io.StringIO()
        rep.to_csv(buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["lag", "rho", "chi", "tail_flag"]
        assert [float(r[1]) for r in rows[1:]] == pytest.approx([8, 4, 2, 1], rel=1e-13)
        d = json.loads(rep.to_json())
        assert d["K"] == 3 and d["lags"][2]["rho"] == pytest.approx(2.0)
        assert d["var_x"] == pytest.approx(8.0)


class TestYuleWalker:
    def test_single_lag(self):
        rep, _ = single_lag_report(K=30)
        assert yule_walker_residual(rep, SINGLE, UNIT).max_residual < 1e-12

    def test_zero_kernel(self):
        rep = rho(zero_kernel(), UNIT, compute_resolvent(zero_kernel(), 1.0, 20), 5)
        assert yule_walker_residual(rep, zero_kernel(), UNIT).max_residual == 0.0

    def test_power_law(self):
        spec = PowerLaw(0.1, 3.0)
        rep = rho(spec, UNIT, compute_resolvent(spec, 1.0, 5000), 200)
        res = yule_walker_residual(rep, spec, UNIT)
        assert res.max_residual < 1e-4
        assert res.J == 200 and res.tail_estimate > 0

    def test_history_cut_too_long(self):
        rep, _ = single_lag_report(K=5)
        with pytest.raises(HorizonError):
            yule_walker_residual(rep, SINGLE, UNIT, J=6)


class TestVariationOfParameters:
    def test_single_lag(self):
        rep, rs = single_lag_report(K=10)
        vp, disc = variation_of_parameters_rho(rep, SINGLE, UNIT, rs)
        assert vp[1] == pytest.approx(4.0, rel=1e-14)
        assert disc < 1e-14

    def test_zero_kernel(self):
        rs = compute_resolvent(zero_kernel(), 1.0, 20)
        rep = rho(zero_kernel(), UNIT, rs, 5)
        vp, disc = variation_of_parameters_rho(rep, zero_kernel(), UNIT, rs)
        assert vp[1:].tolist() == [0.0] * 5 and disc == 0.0

    def test_geometric(self):
        spec = Geometric(1.0, 0.5)
        m = MomentSpec.from_variance(0.5, 0.25)
        rs = compute_resolvent(spec, 0.5, 600)
        rep = rho(spec, m, rs, 300)
        _, disc = variation_of_parameters_rho(rep, spec, m, rs, J=300)
        assert disc < 1e-8
