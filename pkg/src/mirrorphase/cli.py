"""Command-line front end.

Every option can also come from a flat JSON file given with ``--config``;
keys are the long option names with underscores. Explicit flags win over
the file, which wins over built-in defaults.

Exit status: 0 success, 1 oracle failure, 2 invalid input, 3 numerical
non-convergence or nothing found by a search.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import explore, kernel, oracle, phase, units
from .errors import ConvergenceError, DomainError, InconsistencyError, OracleError, SearchError
from .kernel import TruncationPolicy
from .units import LabSetup, ReducedSetup, Scenario

EXIT_OK, EXIT_ORACLE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_COLUMNS = ("axis", "axis_value", "delta_phi", "delta_phi_abs", "A", "B", "A0", "B0",
                 "n_used", "tail_est", "converged")

_SI_KEYS = ("omega0_hz", "accel_si", "z0_m", "L_m")
_DIMLESS_KEYS = ("alpha", "inv_alpha", "zeta", "lam")


class UsageError(DomainError):
    pass


# ---------------------------------------------------------------------------
# formatting


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_table(columns: Sequence[str], rows: List[Sequence[Any]], fmt: str, out: Optional[str],
                meta: Optional[Dict[str, Any]] = None) -> None:
    if fmt == "json":
        doc = dict(meta or {})
        doc["columns"] = list(columns)
        doc["rows"] = [dict(zip(columns, (_jsonable(x) for x in r))) for r in rows]
        _emit(json.dumps(doc, indent=2) + "\n", out)
    else:
        _emit(_csv_text(columns, rows), out)


def write_record(rec: Dict[str, Any], fmt: str, out: Optional[str]) -> None:
    if fmt == "json":
        _emit(json.dumps(_jsonable(rec), indent=2) + "\n", out)
    elif fmt == "csv":
        _emit(_csv_text(list(rec), [list(rec.values())]), out)
    else:
        width = max(len(k) for k in rec)
        _emit("".join(f"{k:<{width}}  {_fmt(v)}\n" for k, v in rec.items()), out)


def read_csv_table(text: str) -> List[Dict[str, str]]:
    """Parse CSV emitted by this module (used for round-trip checks)."""
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------------------
# parser


def _parse_bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("setup (dimensionless)")
    g.add_argument("--scenario", choices=["free", "single", "double"], default=None)
    g.add_argument("--alpha", type=float, default=None, help="a/(omega0 c)")
    g.add_argument("--inv-alpha", type=float, default=None, help="omega0 c/a")
    g.add_argument("--zeta", type=float, default=None, help="omega0 z0/c")
    g.add_argument("--lam", type=float, default=None, help="omega0 L/c")
    s = p.add_argument_group("setup (SI)")
    s.add_argument("--omega0-hz", type=float, default=None, help="detector gap omega0 in s^-1 (angular)")
    s.add_argument("--accel-si", type=float, default=None, help="proper acceleration in m/s^2")
    s.add_argument("--z0-m", type=float, default=None, help="detector-mirror distance in m")
    s.add_argument("--L-m", dest="L_m", type=float, default=None, help="mirror separation in m")
    d = p.add_argument_group("detector")
    d.add_argument("--theta", type=float, default=None, help="initial Bloch angle in rad (default pi/4)")
    d.add_argument("--theta-deg", type=float, default=None, help="initial Bloch angle in degrees")
    d.add_argument("--kappa", type=float, default=None, help="dimensionless coupling (default 1)")
    t = p.add_argument_group("truncation")
    t.add_argument("--max-n", type=int, default=None, help="fixed number of image pairs")
    t.add_argument("--adaptive", action="store_true", default=None, help="adaptive truncation (default)")
    t.add_argument("--rel-tol", type=float, default=None, help="adaptive relative tolerance (default 1e-8)")
    t.add_argument("--hard-cap", type=int, default=None, help="largest number of image pairs (default 2e6)")
    o = p.add_argument_group("output")
    o.add_argument("--constants", choices=["codata", "paper"], default=None)
    o.add_argument("--format", choices=["text", "csv", "json"], default=None)
    o.add_argument("--out", default=None, help="write output to this path instead of stdout")
    o.add_argument("--config", default=None, help="flat JSON file with option values")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="mirrorphase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("phase", parents=[common], help="phase difference at one parameter point")

    sw = sub.add_parser("sweep", parents=[common], help="phase difference along one axis")
    sw.add_argument("--axis", default=None, help="alpha, invAlpha, zeta or lam")
    sw.add_argument("--from", dest="from_", type=float, default=None)
    sw.add_argument("--to", type=float, default=None)
    sw.add_argument("--points", type=int, default=None)
    sw.add_argument("--log", action="store_true", default=None, help="logarithmic grid")
    sw.add_argument("--workers", type=int, default=None)

    se = sub.add_parser("search", parents=[common], help="smallest detectable acceleration")
    se.add_argument("--floor", type=float, default=None, help="detectability floor in rad (default 5.27e-6)")
    se.add_argument("--zeta-min", type=float, default=None)
    se.add_argument("--zeta-max", type=float, default=None)
    se.add_argument("--lam-min", type=float, default=None)
    se.add_argument("--lam-max", type=float, default=None)
    se.add_argument("--alpha-min", type=float, default=None)
    se.add_argument("--alpha-max", type=float, default=None)
    se.add_argument("--tol-decades", type=float, default=None)

    cv = sub.add_parser("converge", parents=[common], help="brute-force phase against truncation")
    cv.add_argument("--max-n-grid", default=None, help="start:stop:step or comma list")
    cv.add_argument("--plateau-tol", type=float, default=None)

    sub.add_parser("oracle", parents=[common], help="run the independent numerical checks")

    ev = sub.add_parser("evolve", parents=[common], help="density-matrix trajectory")
    ev.add_argument("--tau-max", type=float, default=None, help="final proper time (s, or 1/omega0 units)")
    ev.add_argument("--tau-points", type=int, default=None)
    ev.add_argument("--lamb-shift", type=float, default=None)

    un = sub.add_parser("units", parents=[common], help="unit conversions and lab-scale numbers")
    un.add_argument("--delta-t", type=float, default=None, help="temperature step in K")
    un.add_argument("--delta-x", type=float, default=None, help="distance of the temperature step in m")
    un.add_argument("--mass", type=float, default=None, help="atom mass in kg (default hydrogen)")
    un.add_argument("--speed", type=float, default=None, help="atom speed in m/s (default 1e3)")
    un.add_argument("--path-diff", type=float, default=None, help="path difference in m")
    return parser


DEFAULTS: Dict[str, Any] = {
    "scenario": "free", "kappa": 1.0, "constants": "codata", "rel_tol": 1e-8, "hard_cap": 2 * 10**6,
    "axis": "zeta", "points": 64, "log": False, "workers": 1,
    "floor": explore.DETECTABILITY_FLOOR, "alpha_min": 1e-10, "alpha_max": 1e-2, "tol_decades": 0.1,
    "plateau_tol": 1e-3, "tau_points": 101, "lamb_shift": 0.0,
    "mass": units.HYDROGEN_MASS, "speed": 1.0e3,
}

_FORMAT_DEFAULT = {"sweep": "csv", "converge": "csv", "evolve": "csv"}


def _subparser(parser, name):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def resolve_settings(parser: argparse.ArgumentParser, args: argparse.Namespace) -> Dict[str, Any]:
    """Merge settings; explicit flags beat the JSON config file, which beats defaults."""
    sp = _subparser(parser, args.command)
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    cfg: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a flat JSON object")
    out = {k: DEFAULTS.get(k) for k in actions}
    out["format"] = _FORMAT_DEFAULT.get(args.command, "text")
    for key, val in cfg.items():
        dest = "from_" if key == "from" else key
        if dest not in actions:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        act = actions[dest]
        try:
            if val is None:
                continue
            if isinstance(act, argparse._StoreTrueAction):
                val = _parse_bool(val)
            elif act.type is not None:
                val = act.type(val)
            if act.choices is not None and val not in act.choices:
                raise ValueError(f"must be one of {sorted(act.choices)}")
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad config value for {key}: {exc}") from None
        out[dest] = val
    for dest in actions:
        v = getattr(args, dest, None)
        if v is not None:
            out[dest] = v
    out["command"] = args.command
    return out


def resolve_theta(s) -> float:
    if s.get("theta") is not None and s.get("theta_deg") is not None:
        raise UsageError("give --theta or --theta-deg, not both")
    if s.get("theta_deg") is not None:
        return math.radians(s["theta_deg"])
    return math.pi / 4 if s.get("theta") is None else s["theta"]


def resolve_policy(s) -> TruncationPolicy:
    if s.get("max_n") is not None:
        if s.get("adaptive"):
            raise UsageError("--adaptive and --max-n are mutually exclusive")
        cap = max(int(s["hard_cap"]), int(s["max_n"]))
        return TruncationPolicy.fixed(s["max_n"], hard_cap=cap, rel_tol=s["rel_tol"])
    return TruncationPolicy.adaptive(rel_tol=s["rel_tol"], hard_cap=int(s["hard_cap"]))


def uses_si(s) -> bool:
    si = [k for k in _SI_KEYS if s.get(k) is not None]
    dl = [k for k in _DIMLESS_KEYS if s.get(k) is not None]
    if si and dl:
        raise UsageError(f"SI inputs {si} cannot be mixed with dimensionless inputs {dl}")
    return bool(si)


def resolve_setup(s, require_alpha: bool = True, overrides: Optional[Dict[str, float]] = None):
    """``(ReducedSetup, omega0 or None, constants)`` from merged settings."""
    consts = units.constants_profile(s["constants"])
    scenario = Scenario.parse(s["scenario"])
    theta = resolve_theta(s)
    kappa = s["kappa"]
    ov = dict(overrides or {})
    if uses_si(s):
        if s.get("omega0_hz") is None:
            raise UsageError("SI input needs --omega0-hz")
        if s.get("accel_si") is None and "alpha" not in ov:
            raise UsageError("SI input needs --accel-si")
        lab = LabSetup(omega0=s["omega0_hz"], a=s.get("accel_si") or 0.0, scenario=scenario,
                       z0=s.get("z0_m"), L=s.get("L_m"), kappa=kappa, theta=theta)
        red = units.reduce(lab, consts)
        if ov:
            red = red.with_(**ov)
        omega0 = lab.omega0
    else:
        if s.get("alpha") is not None and s.get("inv_alpha") is not None:
            raise UsageError("give --alpha or --inv-alpha, not both")
        alpha = s.get("alpha")
        if s.get("inv_alpha") is not None:
            if not s["inv_alpha"] > 0:
                raise UsageError("inv-alpha must be > 0")
            alpha = 1.0 / s["inv_alpha"]
        alpha = ov.pop("alpha", alpha)
        if alpha is None:
            raise UsageError("need --alpha or --inv-alpha")
        zeta = ov.pop("zeta", s.get("zeta"))
        lam = ov.pop("lam", s.get("lam"))
        red = ReducedSetup(alpha=alpha, scenario=scenario, zeta=zeta if scenario is not Scenario.FREE else None,
                           lam=lam if scenario is Scenario.DOUBLE else None, kappa=kappa, theta=theta)
        omega0 = None
    if require_alpha and not red.alpha > 0:
        raise UsageError("alpha must be > 0 for the accelerated branch")
    return red, omega0, consts


# ---------------------------------------------------------------------------
# commands


def _diag_record(d) -> Dict[str, Any]:
    return {"n_used": d.n_used, "tail_est": d.tail_estimate, "converged": d.converged}


def cmd_phase(s) -> int:
    setup, _, _ = resolve_setup(s)
    r = phase.phase_difference(setup, resolve_policy(s))
    k = setup.kappa
    gp, gm = kernel.gamma_rates(r.rates)
    rec = {
        "scenario": setup.scenario.value, "alpha": setup.alpha, "zeta": setup.zeta, "lam": setup.lam,
        "theta": setup.theta, "kappa": k,
        "phi_accel": r.phi_accel, "phi_inertial": r.phi_inertial,
        "delta_phi": r.delta_phi, "delta_phi_abs": r.delta_phi_abs,
        "A": k * r.rates.A, "B": k * r.rates.B, "A0": k * r.rates.A0, "B0": k * r.rates.B0,
        "gamma_plus": k * gp, "gamma_minus": k * gm,
    }
    rec.update(_diag_record(r.rates.diagnostics))
    write_record(rec, s["format"], s["out"])
    return EXIT_OK


def _sweep_spec(s) -> explore.SweepSpec:
    axis = explore.parse_axis(s["axis"])
    if s.get("from_") is None or s.get("to") is None:
        raise UsageError("sweep needs --from and --to")
    grid = explore.make_grid(s["from_"], s["to"], s["points"], s["log"])
    first = float(grid[0])
    key = {"invAlpha": "alpha", "alpha": "alpha", "zeta": "zeta", "lam": "lam"}[axis]
    val = 1.0 / first if axis == "invAlpha" else first
    if axis == "invAlpha" and not first > 0:
        raise UsageError("invAlpha grid must be positive")
    # the swept parameter need not be supplied as a fixed value
    base, _, _ = resolve_setup(s, overrides={key: val})
    return explore.SweepSpec(axis, grid, base, resolve_policy(s))


def cmd_sweep(s) -> int:
    spec = _sweep_spec(s)
    table = explore.sweep(spec, workers=max(1, int(s["workers"])))
    rows = [[spec.axis] + list(vars(r).values()) for r in table.rows]
    write_table(SWEEP_COLUMNS, rows, "json" if s["format"] == "json" else "csv", s["out"],
                meta={"axis": spec.axis, "failures": table.failures})
    try:
        x, v = explore.find_peak(table)
        print(f"peak {spec.axis}={x!r} |delta_phi|={v!r}", file=sys.stderr)
    except SearchError:
        print("no converged rows", file=sys.stderr)
    if table.failures:
        print(f"warning: {table.failures} row(s) did not converge", file=sys.stderr)
    return EXIT_OK


def cmd_search(s) -> int:
    scenario = Scenario.parse(s["scenario"])
    if uses_si(s):
        raise UsageError("search takes dimensionless bounds only")
    zb = None
    if scenario is not Scenario.FREE:
        zmax = s.get("zeta_max")
        if zmax is None:
            if scenario is Scenario.SINGLE:
                raise UsageError("single-mirror search needs --zeta-max")
        else:
            zb = (s.get("zeta_min") or 0.0, zmax)
    lam_bounds = None
    if scenario is Scenario.DOUBLE and s.get("lam") is None:
        if s.get("lam_min") is None or s.get("lam_max") is None:
            raise UsageError("double-mirror search needs --lam or --lam-min/--lam-max")
        lam_bounds = (s["lam_min"], s["lam_max"])
    res = explore.min_acceleration_search(
        scenario, floor=s["floor"], zeta_bounds=zb, lam=s.get("lam"), lam_bounds=lam_bounds,
        alpha_bracket=(s["alpha_min"], s["alpha_max"]), theta=resolve_theta(s), kappa=s["kappa"],
        policy=resolve_policy(s), tol_decades=s["tol_decades"])
    write_record(dict(vars(res)), s["format"], s["out"])
    return EXIT_OK if res.feasible else EXIT_NUMERIC


def parse_int_grid(spec: str) -> List[int]:
    """``"1e5:1e6:1e5"`` (inclusive) or ``"1000,2000,5000"``."""
    try:
        if ":" in spec:
            a, b, c = (float(x) for x in spec.split(":"))
            if not c > 0:
                raise ValueError("step must be > 0")
            n = int(math.floor((b - a) / c + 1e-9)) + 1
            return [int(round(a + i * c)) for i in range(n)]
        return [int(float(x)) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer grid {spec!r}: {exc}") from None


def cmd_converge(s) -> int:
    if s.get("max_n_grid") is None:
        raise UsageError("converge needs --max-n-grid")
    s = dict(s)
    if s.get("scenario") in (None, "free") and s.get("lam") is not None:
        s["scenario"] = "double"
    setup, _, _ = resolve_setup(s)
    rep = explore.convergence_study(setup, parse_int_grid(s["max_n_grid"]), s["plateau_tol"])
    write_table(("max_n", "delta_phi"), [list(r) for r in rep.rows], "json" if s["format"] == "json" else "csv",
                s["out"], meta={"plateau_n": rep.plateau_n, "plateau_tol": rep.plateau_tol})
    print(f"plateau_n {rep.plateau_n}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(s) -> int:
    checks = oracle.run_oracle_suite()
    fmt = s["format"]
    if fmt == "json":
        doc = [dict(name=c.name, value=c.value, reference=c.reference, error=c.error, tol=c.tol,
                    passed=c.passed) for c in checks]
        _emit(json.dumps(_jsonable(doc), indent=2) + "\n", s["out"])
    elif fmt == "csv":
        _emit(_csv_text(("name", "value", "reference", "error", "tol", "passed"),
                        [(c.name, c.value, c.reference, c.error, c.tol, c.passed) for c in checks]), s["out"])
    else:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<28} err={c.error:.3e} tol={c.tol:.0e}" for c in checks]
        _emit("\n".join(lines) + "\n", s["out"])
    return EXIT_OK if all(c.passed for c in checks) else EXIT_ORACLE


def cmd_evolve(s) -> int:
    if s.get("tau_max") is None:
        raise UsageError("evolve needs --tau-max")
    if s["tau_max"] < 0:
        raise UsageError("tau-max must be >= 0")
    setup, omega0, _ = resolve_setup(s)
    coeffs = kernel.rate_coefficients(setup, resolve_policy(s))
    state = phase.DetectorState(setup.theta, omega0 or 1.0, s["lamb_shift"])
    npts = 1 if s["tau_max"] == 0 else max(2, int(s["tau_points"]))
    rows = []
    for tau in np.linspace(0.0, s["tau_max"], npts):
        snap = phase.density_matrix(state, coeffs, float(tau), kappa=setup.kappa)
        r = snap.rho
        rows.append([float(tau), r[0, 0].real, r[0, 1].real, r[0, 1].imag, snap.coherence])
    write_table(("tau", "rho11", "re_rho12", "im_rho12", "coherence"), rows,
                "json" if s["format"] == "json" else "csv", s["out"])
    return EXIT_OK


def cmd_units(s) -> int:
    consts = units.constants_profile(s["constants"])
    rec: Dict[str, Any] = {"constants": consts.name, "c": consts.c}
    have_setup = any(s.get(k) is not None for k in _SI_KEYS + _DIMLESS_KEYS)
    if have_setup:
        red, omega0, _ = resolve_setup(s, require_alpha=False)
        rec.update(alpha=red.alpha, zeta=red.zeta, lam=red.lam)
        if omega0 is not None:
            a = red.alpha * omega0 * consts.c
            rec.update(omega0=omega0, accel_si=a, unruh_temperature_K=units.unruh_temperature(a, consts))
    if s.get("delta_t") is not None or s.get("delta_x") is not None:
        if s.get("delta_t") is None or s.get("delta_x") is None:
            raise UsageError("thermal gradient needs both --delta-t and --delta-x")
        rec["gradient_accel_si"] = units.thermal_gradient_acceleration(s["delta_t"], s["delta_x"], s["mass"], consts)
    rec["de_broglie_m"] = units.de_broglie_wavelength(s["mass"], s["speed"], consts)
    if s.get("path_diff") is not None:
        rec["fringe_phase"] = units.fringe_phase_from_path(s["path_diff"], s["mass"], s["speed"], consts)
    write_record(rec, s["format"], s["out"])
    return EXIT_OK


COMMANDS = {"phase": cmd_phase, "sweep": cmd_sweep, "search": cmd_search, "converge": cmd_converge,
            "oracle": cmd_oracle, "evolve": cmd_evolve, "units": cmd_units}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    try:
        settings = resolve_settings(parser, args)
        return COMMANDS[args.command](settings)
    except (DomainError, InconsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SearchError as exc:
        print(f"search error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
