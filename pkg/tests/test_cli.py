import csv
import io
import json

import pytest

from archinfty.cli import EXIT_HYPOTHESIS, EXIT_OK, EXIT_USAGE, main, parse_shorthand

SINGLE = ["--kernel", "table:0.5", "--lambda1", "1", "--lambda2", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestShorthand:
    def test_power_law(self):
        assert parse_shorthand("powerlaw:c=0.1,alpha=3") == {"family": "powerlaw", "c": 0.1, "alpha": 3.0}

    def test_lists(self):
        assert parse_shorthand("periodic:scales=0.5/0.25,alpha=2")["scales"] == [0.5, 0.25]
        assert parse_shorthand("table:0.5/0.25")["values"] == [0.5, 0.25]
        assert parse_shorthand("table:values=0.4")["values"] == [0.4]


class TestCheck:
    def test_single_lag(self, capsys):
        code, out, _ = run(capsys, "check", *SINGLE)
        d = json.loads(out)
        assert code == EXIT_OK
        assert (d["s1"], d["s2"], d["con3"]) == ("HOLDS", "HOLDS", "FAILS")
        assert d["var_x"] == pytest.approx(8.0)

    def test_explosive(self, capsys):
        code, out, _ = run(capsys, "check", "--kernel", "table:1.2", "--lambda1", "1", "--lambda2", "2")
        assert code == EXIT_HYPOTHESIS
        assert json.loads(out)["s1"] == "FAILS"

    def test_missing_moments(self, capsys):
        code, _, err = run(capsys, "check", "--kernel", "table:0.5")
        assert code == EXIT_USAGE and "moments" in err


class TestAutocov:
    def test_single_lag_csv(self, capsys):
        code, out, _ = run(capsys, "autocov", *SINGLE, "-K", "5")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK
        assert [float(r["rho"]) for r in rows] == pytest.approx([8, 4, 2, 1, 0.5, 0.25], rel=1e-12)

    def test_out_dir(self, capsys, tmp_path):
        code, _, _ = run(capsys, "autocov", *SINGLE, "-K", "3", "--out", str(tmp_path))
        assert code == EXIT_OK
        d = json.loads((tmp_path / "autocov.json").read_text())
        assert d["yule_walker_max_residual"] < 1e-12
        assert (tmp_path / "autocov.csv").read_text().startswith("lag,rho,chi,tail_flag")

    def test_nonstationary(self, capsys):
        code, _, err = run(capsys, "autocov", "--kernel", "table:0.9", "--lambda1", "1", "--sigma2", "1")
        assert code == EXIT_HYPOTHESIS and "hypothesis" in err


class TestSpecFile:
    def write(self, tmp_path, obj):
        p = tmp_path / "run.json"
        p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
        return str(p)

    def test_flags_override(self, capsys, tmp_path):
        path = self.write(tmp_path, {"version": 1, "kernel": {"family": "table", "values": [0.5]},
                                     "moments": {"lambda1": 1, "lambda2": 2}, "lags": 2})
        code, out, _ = run(capsys, "autocov", "--spec", path, "-K", "4")
        assert code == EXIT_OK and len(out.strip().splitlines()) == 6

    def test_missing_version(self, capsys, tmp_path):
        path = self.write(tmp_path, {"kernel": {"family": "table", "values": [0.5]}})
        code, _, err = run(capsys, "check", "--spec", path)
        assert code == EXIT_USAGE and "version" in err

    def test_bad_version(self, capsys, tmp_path):
        path = self.write(tmp_path, {"version": 7, "kernel": {"family": "table", "values": [0.5]}})
        assert run(capsys, "check", "--spec", path)[0] == EXIT_USAGE

    def test_syntax_error_location(self, capsys, tmp_path):
        path = self.write(tmp_path, '{"version": 1,\n "kernel": }')
        code, _, err = run(capsys, "check", "--spec", path)
        assert code == EXIT_USAGE and ":2:" in err

    def test_bad_field(self, capsys, tmp_path):
        path = self.write(tmp_path, {"version": 1, "kernel": {"family": "powerlaw", "c": 0.1}})
        code, _, err = run(capsys, "check", "--spec", path, "--lambda1", "1", "--lambda2", "2")
        assert code == EXIT_USAGE and "alpha" in err

    def test_table_csv_relative_to_spec(self, capsys, tmp_path):
        (tmp_path / "b.csv").write_text("index,value\n1,0.5\n")
        path = self.write(tmp_path, {"version": 1, "kernel": {"family": "table", "csv": "b.csv"},
                                     "moments": {"lambda1": 1, "sigma2": 1}})
        code, out, _ = run(capsys, "check", "--spec", path)
        assert code == EXIT_OK and json.loads(out)["e_nu_sq"] == pytest.approx(6.0)


class TestOtherCommands:
    def test_resolvent(self, capsys):
        code, out, _ = run(capsys, "resolvent", "--kernel", "table:0.5", "--lambda1", "1", "-N", "4")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK and [float(r["z"]) for r in rows] == [1, 0.5, 0.25, 0.125, 0.0625]

    def test_resolvent_json_round_trip(self, capsys):
        code, out, _ = run(capsys, "resolvent", "--kernel", "geometric:c=1,q=0.5", "--lambda1", "0.5",
                           "-N", "3", "--format", "json")
        d = json.loads(out)
        assert d["z"] == pytest.approx([1, 0.25, 0.1875, 0.140625], rel=1e-15)
        assert d["kernel"]["family"] == "geometric"

    def test_diagnose(self, capsys, tmp_path):
        code, out, _ = run(capsys, "diagnose", "--kernel", "powerlaw:c=0.1,alpha=3", "--lambda1", "1",
                           "--lambda2", "2", "-N", "4000", "--out", str(tmp_path))
        d = json.loads((tmp_path / "diagnostics.json").read_text())
        assert code == EXIT_OK
        assert d["verdicts"]["Z_OVER_B"] == "AGREES"
        assert (tmp_path / "ratio_z_over_b.csv").exists()

    def test_simulate_deterministic(self, capsys, tmp_path):
        argv = ["simulate", "--kernel", "table:0.5", "--shocks", "exponential:mean=1", "-M", "1",
                "-T", "20000", "-K", "3", "--seed", "5", "--format", "json"]
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second
        assert json.loads(first)["config"]["seed"] == 5

    def test_simulate_dump_path(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--kernel", "table:0.5", "--shocks", "exponential:mean=1",
                         "-M", "1", "-T", "2000", "-K", "3", "--out", str(tmp_path), "--dump-path")
        assert code == EXIT_OK
        assert (tmp_path / "path.csv").read_text().startswith("k,x")
        assert (tmp_path / "simulation.csv").exists()

    def test_simulate_refuses(self, capsys):
        code, _, _ = run(capsys, "simulate", "--kernel", "table:0.9", "--shocks", "exponential:mean=1",
                         "-M", "1", "-T", "2000", "-K", "3")
        assert code == EXIT_HYPOTHESIS

    @pytest.mark.parametrize("example", ["single_lag", "periodic2", "periodic3"])
    def test_reproduce(self, capsys, example):
        code, out, _ = run(capsys, "reproduce", example, "--format", "json")
        d = json.loads(out)
        assert code == EXIT_OK and d["ok"]

    def test_reproduce_table(self, capsys):
        code, out, _ = run(capsys, "reproduce", "PERIODIC2", "-N", "20000")
        assert "Lambda" in out and "tau0" in out

    def test_usage_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["check", "--bogus"])
        assert exc.value.code == EXIT_USAGE
        code, _, err = run(capsys, "check", "--kernel", "nosuch:x=1", "--lambda1", "1", "--lambda2", "2")
        assert code == EXIT_USAGE and "nosuch" in err
