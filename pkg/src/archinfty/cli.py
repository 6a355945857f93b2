"""Command-line front end.

Exit status: 0 on success, 1 on usage errors (bad flags, unreadable or
invalid spec files), 2 when a hypothesis or stationarity condition fails.

Kernels and shocks can be given as JSON spec files or as shorthand strings::

    table:0.5            b(1) = 0.5
    table:0.3/0.2        b(1) = 0.3, b(2) = 0.2
    powerlaw:c=0.1,alpha=3
    geometric:c=1,q=0.5
    periodic:scales=0.5/0.25,alpha=2
    logpower:c=0.1,alpha=3,gamma=1
    exponential:mean=1   (shocks)
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .asymptotics import diagnose, periodic2_constants, periodic3_constants, write_ratio_csv
from .autocovariance import rho, variation_of_parameters_rho, yule_walker_residual
from .errors import ArchInftyError, DomainError, StationarityError, TheoremNotApplicableError
from .interval import Verdict
from .kernel import PeriodicPowerLaw, Table, corrected_kernel_sum, kernel_from_dict
from .resolvent import compute_resolvent
from .simulate import PathConfig, shock_from_dict, simulate, simulate_path, write_path_csv
from .stationarity import MomentSpec, check_stationarity, compute_omega, process_scalars

log = logging.getLogger("archinfty")

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS = 0, 1, 2
SPEC_VERSIONS = (1,)


class UsageError(Exception):
    """Bad command-line input or spec file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# spec loading


def _num(text: str):
    if "/" in text:
        return [float(t) for t in text.split("/") if t]
    return float(text)


def parse_shorthand(text: str) -> dict:
    """Turn ``family:k=v,k=v`` into ``{"family": ..., k: v}``; ``/`` separates list items."""
    fam, _, rest = text.partition(":")
    fam = fam.strip().lower()
    if not fam:
        raise UsageError(f"empty family in '{text}'")
    d: dict = {"family": fam}
    rest = rest.strip()
    if not rest:
        return d
    if fam == "table" and "=" not in rest:
        d["values"] = [float(t) for t in rest.replace(",", "/").split("/") if t]
        return d
    for item in rest.split(","):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"expected key=value in '{item}' of '{text}'")
        key = key.strip()
        if key in ("csv", "path"):
            d["csv"] = val.strip()
            continue
        try:
            v = _num(val.strip())
        except ValueError:
            raise UsageError(f"'{key}' in '{text}' is not numeric: {val}") from None
        if key in ("values", "scales") and not isinstance(v, list):
            v = [v]
        d[key] = v
    return d


def load_spec_file(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read spec file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise UsageError(f"{path}: top level must be an object")
    if "version" not in spec:
        raise UsageError(f"{path}: missing field 'version'")
    if spec["version"] not in SPEC_VERSIONS:
        raise UsageError(f"{path}: field 'version': unsupported value {spec['version']!r}")
    return spec


def build_run(args) -> dict:
    """Merge the spec file (if any) with flags; flags win."""
    spec = load_spec_file(args.spec) if getattr(args, "spec", None) else {"version": 1}
    base = Path(args.spec).parent if getattr(args, "spec", None) else Path(".")
    if getattr(args, "kernel", None):
        spec["kernel"] = parse_shorthand(args.kernel)
    if getattr(args, "shocks", None):
        spec["shocks"] = parse_shorthand(args.shocks)
    mom = dict(spec.get("moments", {}))
    for key in ("lambda1", "lambda2", "sigma2", "a"):
        v = getattr(args, key, None)
        if v is not None:
            mom[key] = v
    if mom:
        spec["moments"] = mom
    for key, attr in (("horizon", "horizon"), ("lags", "lags"), ("seed", "seed"), ("r", "r"), ("period", "period")):
        v = getattr(args, attr, None)
        if v is not None:
            spec[key] = v
    sim = dict(spec.get("simulation", {}))
    for key, attr in (("M", "trunc"), ("T", "length"), ("n_paths", "paths"), ("burn_in", "burn_in")):
        v = getattr(args, attr, None)
        if v is not None:
            sim[key] = v
    spec["simulation"] = sim

    if "kernel" not in spec:
        raise UsageError("no kernel given (use --kernel or a spec file with a 'kernel' field)")
    kd = dict(spec["kernel"])
    if "csv" in kd and not os.path.isabs(kd["csv"]):
        kd["csv"] = str(base / kd["csv"])
    try:
        kernel = kernel_from_dict(kd)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    shocks = None
    if "shocks" in spec:
        try:
            shocks = shock_from_dict(spec["shocks"])
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    moments = None
    a = float(mom.get("a", 1.0))
    if "lambda1" in mom:
        try:
            if "lambda2" in mom:
                moments = MomentSpec(float(mom["lambda1"]), float(mom["lambda2"]), a)
            elif "sigma2" in mom:
                moments = MomentSpec.from_variance(float(mom["lambda1"]), float(mom["sigma2"]), a)
        except DomainError as exc:
            raise UsageError(f"moments: {exc}") from None
    elif shocks is not None:
        moments = shocks.moments(a)
    lam = float(mom["lambda1"]) if "lambda1" in mom else (moments.lambda1 if moments else None)
    return {"spec": spec, "kernel": kernel, "shocks": shocks, "moments": moments, "a": a, "lambda1": lam}


def _need_moments(run) -> MomentSpec:
    if run["moments"] is None:
        raise UsageError("moments: give lambda2 or sigma2 together with lambda1 (or --shocks)")
    return run["moments"]


def _get(run, key, default):
    v = run["spec"].get(key)
    return default if v is None else v


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, out: Optional[str], fmt: str):
        self.dir = Path(out) if out else None
        self.fmt = fmt
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, stem: str, obj_json: Optional[dict] = None, csv_writer=None):
        """Write ``stem.json`` (and ``stem.csv``) under the output dir, or print one format."""
        text = json.dumps(obj_json, indent=2, default=_json_default)
        if self.dir:
            # a directory receives every artifact the command produces
            (self.dir / f"{stem}.json").write_text(text + "\n")
            if csv_writer is not None:
                csv_writer(self.dir / f"{stem}.csv")
        elif self.fmt == "csv" and csv_writer is not None:
            csv_writer(sys.stdout)
        else:
            sys.stdout.write(text + "\n")

    def file(self, name: str) -> Optional[Path]:
        return self.dir / name if self.dir else None


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, Verdict):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


# ---------------------------------------------------------------------------
# commands


def cmd_resolvent(args, out: Output) -> int:
    run = build_run(args)
    lam = run["lambda1"]
    if lam is None:
        raise UsageError("resolvent needs --lambda1 (or moments in the spec file)")
    N = int(_get(run, "horizon", 1000))
    rs = compute_resolvent(run["kernel"], lam, N)
    out.emit("resolvent", {"lambda1": lam, "N": N, "kernel": run["kernel"].to_dict(), "z": rs.z.tolist()},
             rs.to_csv)
    return EXIT_OK


def cmd_check(args, out: Output) -> int:
    run = build_run(args)
    m = _need_moments(run)
    N = int(_get(run, "horizon", 20_000))
    rep = check_stationarity(run["kernel"], m, N)
    d = rep.to_dict()
    out.emit("stationarity", d, None)
    return EXIT_OK if rep.stationary else EXIT_HYPOTHESIS


def cmd_autocov(args, out: Output) -> int:
    run = build_run(args)
    m = _need_moments(run)
    K = int(_get(run, "lags", 20))
    N = int(_get(run, "horizon", max(20_000, 2 * K)))
    rs = compute_resolvent(run["kernel"], m.lambda1, N)
    rep = rho(run["kernel"], m, rs, K)
    d = rep.to_dict()
    if K >= 1:
        d["yule_walker_max_residual"] = yule_walker_residual(rep, run["kernel"], m).max_residual
        d["variation_of_parameters_discrepancy"] = variation_of_parameters_rho(rep, run["kernel"], m, rs)[1]
    out.emit("autocov", d, rep.to_csv)
    return EXIT_OK


def cmd_diagnose(args, out: Output) -> int:
    run = build_run(args)
    m = _need_moments(run)
    N = int(_get(run, "horizon", 10_000))
    K = _get(run, "lags", None)
    r = float(_get(run, "r", 1.0))
    period = _get(run, "period", None)
    rs = compute_resolvent(run["kernel"], m.lambda1, N)
    diag = diagnose(run["kernel"], m, rs=rs, K=None if K is None else int(K), r=r, period=period)
    if out.dir:
        for kind, s in diag.ratio_series.items():
            if s.get("empirical") is not None:
                write_ratio_csv(out.dir / f"ratio_{kind.lower()}.csv", s["n"], s["ratio"])
    out.emit("diagnostics", diag.to_dict(), None)
    return EXIT_OK


def cmd_simulate(args, out: Output) -> int:
    run = build_run(args)
    if run["shocks"] is None:
        raise UsageError("simulate needs --shocks (e.g. exponential:mean=1) or a 'shocks' field")
    sim = run["spec"]["simulation"]
    try:
        cfg = PathConfig(
            M=int(sim.get("M", 64)),
            T=int(sim.get("T", 100_000)),
            seed=int(_get(run, "seed", 0)),
            n_paths=int(sim.get("n_paths", 1)),
            burn_in=None if sim.get("burn_in") is None else int(sim["burn_in"]),
        )
    except DomainError as exc:
        raise UsageError(f"simulation: {exc}") from None
    K = int(_get(run, "lags", 20))
    res = simulate(run["kernel"], run["shocks"], run["a"], cfg, K)
    out.emit("simulation", res.to_dict(), res.to_csv)
    if getattr(args, "dump_path", False):
        x = simulate_path(run["kernel"], run["shocks"], run["a"], cfg, 0)
        target = out.file("path.csv") or Path("path.csv")
        write_path_csv(target, x)
    return EXIT_OK


def _row(name, reference, computed):
    rel = abs(computed - reference) / abs(reference) if reference not in (None, 0) else None
    return {"name": name, "reference": reference, "computed": computed, "rel_err": rel}


def _reproduce_periodic2(N: int) -> tuple:
    pc = periodic2_constants(0.5, 0.25, 2.0, 1.0)
    e = pc.extra
    rows = [
        _row("S0", math.pi**2 / 16, pc.S[0]),
        _row("S1", math.pi**2 / 96, pc.S[1]),
        _row("Lambda", 5.55073, e["Lambda"]),
        _row("T0", 6.14391, e["T0"]),
        _row("T1", 6.58015, e["T1"]),
        _row("d0", 4.71699, e["d0"]),
        _row("d1", 4.82605, e["d1"]),
        _row("tau0", 22.5498, e["tau0"]),
        _row("chi/b even", 67.9375, e["ratio_even"]),
        _row("chi/b odd", 34.1128, e["ratio_odd"]),
        _row("4 d0", 18.868, 4 * e["d0"]),
        _row("2 d1", 9.652, 2 * e["d1"]),
    ]
    ok = all(r["rel_err"] < 1e-4 for r in rows)
    kern = PeriodicPowerLaw((0.5, 0.25), 2.0)
    rs = compute_resolvent(kern, 1.0, N)
    n = np.arange(N // 2, N + 1)
    scaled = rs.z[n] * n.astype(float) ** 2
    for s, name in ((0, "z(n) n^2, n even"), (1, "z(n) n^2, n odd")):
        num = float(np.median(scaled[n % 2 == s]))
        rows.append({"name": name + f" (N={N})", "reference": pc.z_limits[s], "computed": num,
                     "rel_err": abs(num - pc.z_limits[s]) / pc.z_limits[s]})
        ok = ok and rows[-1]["rel_err"] < 0.02
    ok = ok and abs(4 * e["d0"] - 2 * e["d1"]) > 5
    return rows, ok, pc.to_dict()


def _reproduce_periodic3(N: int) -> tuple:
    lam = 0.5
    pc = periodic3_constants(lam)
    pcm = periodic3_constants(lam, M=100_000)
    kern = PeriodicPowerLaw((1.0, 1.0, 0.0), 2.0)
    rows = [
        _row("sum b", 4 * math.pi**2 / 27, corrected_kernel_sum(kern, 100_000)),
        _row("sum b^2", 8 * math.pi**4 / 729, corrected_kernel_sum(kern, 100_000, power=2)),
        _row("S0 (partial sums)", pc.S[0], pcm.S[0]),
        _row("S1 (partial sums)", pc.S[1], pcm.S[1]),
    ]
    e = pc.extra
    finite = all(math.isfinite(v) for v in [e["K"], *e["d"], *e["c"]])
    for i in range(3):
        rows.append({"name": f"d{i}", "reference": None, "computed": e["d"][i], "rel_err": None})
    for i in range(3):
        rows.append({"name": f"c{i}", "reference": None, "computed": e["c"][i], "rel_err": None})
    rows.append({"name": "K", "reference": None, "computed": e["K"], "rel_err": None})
    rows.append({"name": "liminf z(n) n^2 = K min d", "reference": None, "computed": e["z_liminf"], "rel_err": None})
    rows.append({"name": "liminf chi(n) n^2 = K min c", "reference": None, "computed": e["chi_liminf"], "rel_err": None})
    rs = compute_resolvent(kern, lam, N)
    n = np.arange(N // 2, N + 1)
    scaled = rs.z[n] * n.astype(float) ** 2
    ok = finite and e["z_liminf"] > 0 and e["chi_liminf"] > 0
    ok = ok and all(r["rel_err"] < 1e-6 for r in rows[:4])
    for s in range(3):
        num = float(np.median(scaled[n % 3 == s]))
        rows.append({"name": f"z(n) n^2, n%3={s} (N={N})", "reference": pc.z_limits[s], "computed": num,
                     "rel_err": abs(num - pc.z_limits[s]) / pc.z_limits[s]})
        ok = ok and rows[-1]["rel_err"] < 0.03
    return rows, ok, pc.to_dict()


def _reproduce_single_lag() -> tuple:
    kern = Table((0.5,))
    m = MomentSpec.from_variance(1.0, 1.0, 1.0)
    rs = compute_resolvent(kern, 1.0, 200)
    rep = check_stationarity(kern, m, 200, rs=rs)
    ac = rho(kern, m, rs, 10)
    ps = process_scalars(kern, m, rs, compute_omega(rs, m), N=200)
    rows = [
        _row("Omega", 1 / math.sqrt(3), rep.omega.upper),
        _row("E[nu^2]", 6.0, rep.e_nu_sq),
        _row("mean", 2.0, rep.mean_x),
        _row("rho(0) via chi", 8.0, float(ac.rho[0])),
        _row("var via sum z^2", 8.0, ps.var_x),
        _row("var via Omega", 8.0, ps.var_x_closed_form),
        _row("rho(1)", 4.0, float(ac.rho[1])),
        _row("rho(5)", 0.25, float(ac.rho[5])),
    ]
    ok = all(r["rel_err"] < 1e-12 for r in rows)
    return rows, ok, rep.to_dict()


def cmd_reproduce(args, out: Output) -> int:
    ex = args.example.upper()
    if ex == "PERIODIC2":
        rows, ok, extra = _reproduce_periodic2(int(args.horizon or 200_000))
    elif ex == "PERIODIC3":
        rows, ok, extra = _reproduce_periodic3(int(args.horizon or 300_000))
    else:
        rows, ok, extra = _reproduce_single_lag()
    width = max(len(r["name"]) for r in rows)
    lines = [f"{'constant':<{width}}  {'reference':>14}  {'computed':>14}  {'rel_err':>10}"]
    for r in rows:
        ref = "" if r["reference"] is None else f"{r['reference']:.8g}"
        rel = "" if r["rel_err"] is None else f"{r['rel_err']:.2e}"
        lines.append(f"{r['name']:<{width}}  {ref:>14}  {r['computed']:>14.8g}  {rel:>10}")
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    table = "\n".join(lines)
    payload = {"example": ex, "rows": rows, "ok": ok, "constants": extra}
    if out.dir:
        print(table)
        (out.dir / f"reproduce_{ex.lower()}.json").write_text(json.dumps(payload, indent=2, default=_json_default) + "\n")
    elif out.fmt == "json":
        sys.stdout.write(json.dumps(payload, indent=2, default=_json_default) + "\n")
    else:
        print(table)
    return EXIT_OK if ok else EXIT_HYPOTHESIS


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, fmt_default: str):
    p.add_argument("--spec", metavar="FILE", help="JSON spec file (flags override its fields)")
    p.add_argument("--out", metavar="DIR", help="directory for output artifacts (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt_default, help="stdout/file format")
    p.add_argument("--horizon", "-N", type=int, metavar="N", help="resolvent truncation horizon")
    p.add_argument("--lags", "-K", type=int, metavar="K", help="largest autocovariance lag")
    p.add_argument("--seed", type=int, metavar="S", help="random seed")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _model(p: argparse.ArgumentParser):
    p.add_argument("--kernel", metavar="SPEC", help="kernel shorthand, e.g. 'powerlaw:c=0.1,alpha=3'")
    p.add_argument("--lambda1", type=float, help="E[xi]")
    p.add_argument("--lambda2", type=float, help="E[xi^2]")
    p.add_argument("--sigma2", type=float, help="Var[xi] (alternative to --lambda2)")
    p.add_argument("--a", type=float, help="intercept (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="archinfty", description="ARCH(inf) resolvent, stationarity and autocovariance tools")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("resolvent", help="compute z(0..N)")
    _common(p, "csv")
    _model(p)
    p.set_defaults(func=cmd_resolvent)

    p = sub.add_parser("check", help="evaluate the stationarity conditions")
    _common(p, "json")
    _model(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("autocov", help="autocovariance rho(0..K)")
    _common(p, "csv")
    _model(p)
    p.set_defaults(func=cmd_autocov)

    p = sub.add_parser("diagnose", help="decay-rate diagnostics")
    _common(p, "json")
    _model(p)
    p.add_argument("--r", type=float, help="W(r) rate parameter in (0, 1] (default 1)")
    p.add_argument("--period", type=int, help="report per-residue medians for this period")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("simulate", help="Monte Carlo paths and empirical autocovariance")
    _common(p, "csv")
    _model(p)
    p.add_argument("--shocks", metavar="SPEC", help="shock shorthand, e.g. 'exponential:mean=1'")
    p.add_argument("--trunc", "-M", type=int, help="history truncation lag M")
    p.add_argument("--length", "-T", type=int, help="path length T after burn-in")
    p.add_argument("--paths", type=int, help="number of independent paths")
    p.add_argument("--burn-in", dest="burn_in", type=int, help="burn-in steps (default 10 M)")
    p.add_argument("--dump-path", action="store_true", help="also write the first path as k,x CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="recompute a reference example")
    p.add_argument("example", type=str.upper, choices=("PERIODIC2", "PERIODIC3", "SINGLE_LAG"))
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="'csv' prints a table")
    p.add_argument("--horizon", "-N", type=int, metavar="N", help="horizon of the numeric cross-check")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = Output(getattr(args, "out", None), args.format)
        return args.func(args, out)
    except UsageError as exc:
        print(f"archinfty: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StationarityError, TheoremNotApplicableError) as exc:
        print(f"archinfty: hypothesis not satisfied: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ArchInftyError as exc:
        print(f"archinfty: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
