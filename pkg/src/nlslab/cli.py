"""Command-line front end.

Settings come from an optional TOML file plus flags, with flags winning.
Every JSON report embeds the fully-merged settings and their SHA-256 hash,
so identical inputs are recognizable from the output alone and reruns are
byte-identical. Numeric cells in JSON and CSV use Python's repr, which
round-trips doubles exactly.

Exit codes: 0 success, 1 numerical failure (machine-readable error object
on stderr), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import acceptance
from .bifurcation import PSTAR_LEADING, branch_continue, find_pstar, r_coefficient
from .errors import NlsLabError
from .evolve2d import Perturbation, run_growth_experiment
from .grid import Field, Grid1D, write_field
from .groundstate import solve_ground_asymptotic
from .linearized import assemble, spectrum_for_period
from .potential import PotentialSpec, linear_ground

_DEFAULT_X_OFF = 1e-2


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------- settings


def _load_toml(path: str) -> dict:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    flat = {}
    for key in ("p", "omega", "omega_minus_lambda", "L", "L_over_Lc", "tol"):
        if key in data:
            flat[key] = data[key]
    pot = data.get("potential", {})
    for key in ("family", "depth", "amplitude", "width", "file"):
        if key in pot:
            flat[f"potential_{key}"] = pot[key]
    grid = data.get("grid", {})
    for key, dest in (("n", "n"), ("x", "half_width"), ("ny", "ny")):
        if key in grid:
            flat[dest] = grid[key]
    return flat


def _merged_settings(args: argparse.Namespace) -> dict:
    settings = {
        "potential_family": "poschl_teller",
        "potential_depth": 2.0,
        "potential_amplitude": None,
        "potential_width": None,
        "potential_file": None,
        "p": 3.0,
        "omega": None,
        "omega_minus_lambda": None,
        "L": None,
        "L_over_Lc": None,
        "n": 1024,
        "half_width": 20.0,
        "ny": 64,
        "tol": 1e-11,
    }
    if getattr(args, "config", None):
        settings.update(_load_toml(args.config))
    for key in settings:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _potential_from(settings: dict) -> PotentialSpec:
    if settings["potential_file"]:
        path = Path(settings["potential_file"])
        if path.suffix == ".json":
            return PotentialSpec.from_json(path.read_text())
        return PotentialSpec.from_csv(path)
    family = settings["potential_family"]
    if family == "poschl_teller":
        return PotentialSpec.poschl_teller(settings["potential_depth"])
    if family == "gaussian":
        if settings["potential_amplitude"] is None or settings["potential_width"] is None:
            raise _UsageError("gaussian potential needs amplitude and width")
        return PotentialSpec.gaussian(
            settings["potential_amplitude"], settings["potential_width"]
        )
    raise _UsageError(f"unknown potential family {family!r}")


class Workspace:
    """Validated settings resolved into model objects."""

    def __init__(self, settings: dict, need_period: bool = False):
        if settings["omega"] is not None and settings["omega_minus_lambda"] is not None:
            raise _UsageError("give only one of omega / omega-minus-lambda")
        if settings["L"] is not None and settings["L_over_Lc"] is not None:
            raise _UsageError("give only one of L / L-over-Lc")
        if need_period and settings["L"] is None and settings["L_over_Lc"] is None:
            raise _UsageError("this command needs L or L-over-Lc")
        for key in ("n", "ny"):
            if not _power_of_two(int(settings[key])):
                raise _UsageError(f"grid size {key}={settings[key]} is not a power of two")
        self.settings = settings
        self.spec = _potential_from(settings)
        self.p = float(settings["p"])
        self.grid = Grid1D(n=int(settings["n"]), half_width=float(settings["half_width"]))
        self.ny = int(settings["ny"])
        self.tol = float(settings["tol"])

    @property
    def omega(self) -> float:
        lg = linear_ground(self.spec, self.grid)
        if self.settings["omega"] is not None:
            return float(self.settings["omega"])
        x_off = self.settings["omega_minus_lambda"]
        if x_off is None:
            x_off = _DEFAULT_X_OFF
        return lg.lambda_star + float(x_off)

    def period(self, critical: float) -> float:
        if self.settings["L"] is not None:
            return float(self.settings["L"])
        return float(self.settings["L_over_Lc"]) * critical

    def echo(self, command: str, extra: dict | None = None) -> dict:
        out = {
            "command": command,
            "potential": json.loads(self.spec.to_json()),
            "p": self.p,
            "omega": self.settings["omega"],
            "omega_minus_lambda": self.settings["omega_minus_lambda"],
            "L": self.settings["L"],
            "L_over_Lc": self.settings["L_over_Lc"],
            "grid": {
                "n": self.grid.n,
                "half_width": self.grid.half_width,
                "ny": self.ny,
            },
            "tol": self.tol,
        }
        if extra:
            out.update(extra)
        return out


# ------------------------------------------------------------------ output


def _finalize(value):
    if isinstance(value, dict):
        return {k: _finalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finalize(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _emit_json(report: dict, out: str) -> None:
    text = json.dumps(_finalize(report), sort_keys=True, indent=2) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _report(echo: dict, result: dict) -> dict:
    canonical = json.dumps(_finalize(echo), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return {"config": echo, "config_hash": digest, "result": result}


def _write_csv(path: str, header: list[str], rows) -> None:
    def _cell(v):
        if v is None:
            return ""
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return v

    def _dump(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])

    if path == "-":
        _dump(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            _dump(fh)


# ------------------------------------------------------------- subcommands


def _cmd_linear_spectrum(args) -> int:
    ws = Workspace(_merged_settings(args))
    lg = linear_ground(ws.spec, ws.grid)
    result = {
        "lambda_star": lg.lambda_star,
        "gap": lg.gap,
        "psi_star_max": float(np.max(np.abs(lg.psi_star))),
    }
    if args.dump_psi:
        write_field(args.dump_psi, Field(lg.psi_star, ws.grid))
    _emit_json(_report(ws.echo("linear-spectrum"), result), args.out)
    return 0


def _cmd_ground(args) -> int:
    ws = Workspace(_merged_settings(args))
    gs = solve_ground_asymptotic(ws.spec, ws.omega, ws.p, ws.grid, tol=ws.tol)
    result = {
        "omega": gs.omega,
        "p": gs.p,
        "residual": gs.residual,
        "seed_error": gs.seed_error,
        "q1": gs.q1,
        "phi_max": float(np.max(gs.phi)),
    }
    if args.dump_phi:
        write_field(args.dump_phi, Field(gs.phi, ws.grid))
    _emit_json(_report(ws.echo("ground"), result), args.out)
    return 0


def _cmd_critical_period(args) -> int:
    ws = Workspace(_merged_settings(args))
    gs = solve_ground_asymptotic(ws.spec, ws.omega, ws.p, ws.grid, tol=ws.tol)
    lam = assemble(gs, ws.spec).internal[0]
    result = {
        "omega": gs.omega,
        "lambda_omega": lam,
        "critical_period": lam**-0.5,
    }
    _emit_json(_report(ws.echo("critical-period"), result), args.out)
    return 0


def _cmd_transverse(args) -> int:
    ws = Workspace(_merged_settings(args), need_period=True)
    gs = solve_ground_asymptotic(ws.spec, ws.omega, ws.p, ws.grid, tol=ws.tol)
    asm = assemble(gs, ws.spec)
    period = ws.period(asm.internal[0] ** -0.5)
    samples = args.curve_samples if args.curve else 0
    ts = spectrum_for_period(asm, period, curve_samples=samples)
    result = {
        "omega": gs.omega,
        "lambda_omega": ts.lambda_omega,
        "critical_period": ts.critical_period,
        "period": ts.period,
        "mu_star": ts.mu_star,
        "unstable_count": ts.unstable_count,
        "verdict": ts.verdict,
        "mode_table": [[n, a, mu] for n, a, mu in ts.mode_table],
    }
    if args.curve:
        _write_csv(args.curve, ["a", "mu"], [(a, mu) for a, mu in ts.mu_curve])
    _emit_json(
        _report(ws.echo("transverse", {"curve_samples": samples}), result), args.out
    )
    return 0


def _cmd_bifurcation(args) -> int:
    ws = Workspace(_merged_settings(args))
    report = r_coefficient(ws.spec, ws.p, ws.omega, ws.grid)
    _emit_json(_report(ws.echo("bifurcation"), dict(report.as_dict())), args.out)
    return 0


def _cmd_pstar(args) -> int:
    ws = Workspace(_merged_settings(args))
    lo, hi = args.bracket
    root = find_pstar(
        ws.spec, ws.grid, bracket=(lo, hi), edge_offset=args.eps, tol=args.tol_p
    )
    result = {
        "pstar": root,
        "closed_form_root": PSTAR_LEADING,
        "bracket": [lo, hi],
        "edge_offset": args.eps,
    }
    extra = {"bracket": [lo, hi], "edge_offset": args.eps, "tol_p": args.tol_p}
    _emit_json(_report(ws.echo("pstar", extra), result), args.out)
    return 0


def _cmd_branch(args) -> int:
    ws = Workspace(_merged_settings(args))
    if ws.grid.n * ws.ny > 4096:
        raise _UsageError(
            f"branch continuation is dense; n*ny = {ws.grid.n * ws.ny} exceeds 4096"
        )
    if args.steps < 1 or args.amax <= 0:
        raise _UsageError("branch needs amax > 0 and steps >= 1")
    amplitudes = [args.amax * (k + 1) / args.steps for k in range(args.steps)]
    points = branch_continue(
        ws.spec, ws.p, ws.omega, ws.grid, amplitudes, ny=ws.ny, tol=ws.tol
    )
    _write_csv(
        args.out,
        ["a", "omega_a", "q2", "lambda2"],
        [(pt.amplitude, pt.omega, pt.norm2, pt.lambda2) for pt in points],
    )
    return 0


def _cmd_evolve(args) -> int:
    ws = Workspace(_merged_settings(args), need_period=True)
    gs = solve_ground_asymptotic(ws.spec, ws.omega, ws.p, ws.grid, tol=ws.tol)
    asm = assemble(gs, ws.spec)
    period = ws.period(asm.internal[0] ** -0.5)
    ts = spectrum_for_period(asm, period)
    pert = Perturbation(delta=args.delta, mode=args.mode)
    experiment = run_growth_experiment(
        gs,
        ts,
        ws.spec,
        ws.ny,
        pert,
        dt=args.dt,
        record_every=args.record_every,
        eps1=args.eps1,
        t_end=args.tend,
    )
    record = experiment.record
    _write_csv(
        args.out,
        ["t", "Q", "E", "m0", "m1", "m2", "orbital_distance"],
        record.rows(),
    )
    if args.dump_final:
        write_field(args.dump_final, record.final_state.field)
    if args.fit_json:
        fit = experiment.fit
        result = {
            "status": fit.status,
            "mu": fit.mu,
            "r2": fit.r2,
            "npoints": fit.npoints,
            "mu_star": ts.mu_star,
            "window": list(fit.window),
        }
        extra = {
            "delta": args.delta,
            "mode": args.mode,
            "dt": args.dt,
            "t_end": args.tend,
            "record_every": args.record_every,
            "eps1": args.eps1,
        }
        _emit_json(_report(ws.echo("evolve", extra), result), args.fit_json)
    return 0


def _parse_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad numeric list {text!r}") from exc


def _sweep_row(ws: Workspace, p: float, x_off: float, period_entry: tuple[str, float]):
    lg = linear_ground(ws.spec, ws.grid)
    omega = lg.lambda_star + x_off
    gs = solve_ground_asymptotic(ws.spec, omega, p, ws.grid, tol=ws.tol)
    asm = assemble(gs, ws.spec)
    critical = asm.internal[0] ** -0.5
    kind, value = period_entry
    period = value * critical if kind == "relative" else value
    ts = spectrum_for_period(asm, period)
    at_critical = abs(period / critical - 1.0) < 1e-9
    r_value = None
    verdict = ts.verdict
    if at_critical:
        rep = r_coefficient(ws.spec, p, omega, ws.grid)
        r_value = rep.r_coefficient
        verdict = rep.verdict
    return (p, omega, period, critical, ts.mu_star, r_value, verdict)


def _cmd_sweep(args) -> int:
    ws = Workspace(_merged_settings(args))
    p_values = _parse_list(args.p_list)
    x_values = _parse_list(args.x_list)
    if (args.L_list is None) == (args.L_rel_list is None):
        raise _UsageError("give exactly one of --L-list / --L-rel-list")
    if args.L_list is not None:
        periods = [("absolute", v) for v in _parse_list(args.L_list)]
    else:
        periods = [("relative", v) for v in _parse_list(args.L_rel_list)]
    tasks = [
        (p, x, entry) for p in p_values for x in x_values for entry in periods
    ]

    workers = int(os.environ.get("NLS_LAB_THREADS", "0")) or min(4, os.cpu_count() or 1)

    def run(task):
        p, x, entry = task
        try:
            return _sweep_row(ws, p, x, entry)
        except NlsLabError as exc:
            return (p, None, None, None, None, None, f"error:{exc.kind}")
        except ValueError:
            return (p, None, None, None, None, None, "error:invalid_value")

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run, tasks))
    _write_csv(args.out, ["p", "omega", "L", "L_c", "mu_star", "R", "verdict"], rows)
    return 0


def _cmd_verify(args) -> int:
    results = acceptance.run_all(echo=print)
    return 0 if all(r.passed for r in results) else 1


# -------------------------------------------------------------------- main


def _add_common(sub: argparse.ArgumentParser, period: bool = False) -> None:
    sub.add_argument("--config", help="TOML settings file; flags override it")
    sub.add_argument("--potential-family", dest="potential_family")
    sub.add_argument("--depth", dest="potential_depth", type=float)
    sub.add_argument("--amplitude", dest="potential_amplitude", type=float)
    sub.add_argument("--width", dest="potential_width", type=float)
    sub.add_argument("--potential-file", dest="potential_file")
    sub.add_argument("--p", type=float)
    sub.add_argument("--omega", type=float)
    sub.add_argument("--omega-minus-lambda", dest="omega_minus_lambda", type=float)
    if period:
        sub.add_argument("--L", dest="L", type=float)
        sub.add_argument("--L-over-Lc", dest="L_over_Lc", type=float)
    sub.add_argument("--n", type=int)
    sub.add_argument("--X", dest="half_width", type=float)
    sub.add_argument("--ny", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--out", default="-", help="output path, - for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlslab",
        description="Standing waves on a line crossed with a circle: "
        "profiles, spectra, bifurcations, and split-step dynamics.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("linear-spectrum", help="bound state of the linear well")
    _add_common(sub)
    sub.add_argument("--dump-psi", help="write psi* in the NLSF field format")
    sub.set_defaults(func=_cmd_linear_spectrum)

    sub = subs.add_parser("ground", help="stationary line profile")
    _add_common(sub)
    sub.add_argument("--dump-phi", help="write phi in the NLSF field format")
    sub.set_defaults(func=_cmd_ground)

    sub = subs.add_parser("critical-period", help="lambda_omega and L_c")
    _add_common(sub)
    sub.set_defaults(func=_cmd_critical_period)

    sub = subs.add_parser("transverse", help="per-mode growth rates on a torus")
    _add_common(sub, period=True)
    sub.add_argument("--curve", help="CSV path for a sampled mu(a) curve")
    sub.add_argument("--curve-samples", type=int, default=200)
    sub.set_defaults(func=_cmd_transverse)

    sub = subs.add_parser("bifurcation", help="branch coefficients and R at L_c")
    _add_common(sub)
    sub.set_defaults(func=_cmd_bifurcation)

    sub = subs.add_parser("pstar", help="sign change of R in the exponent")
    _add_common(sub)
    sub.add_argument("--bracket", nargs=2, type=float, default=[4.0, 4.3])
    sub.add_argument("--eps", type=float, default=1e-3, help="omega - lambda* offset")
    sub.add_argument("--tol-p", type=float, default=1e-3)
    sub.set_defaults(func=_cmd_pstar)

    sub = subs.add_parser("branch", help="continue the symmetry-broken branch")
    _add_common(sub)
    sub.add_argument("--amax", type=float, default=0.05)
    sub.add_argument("--steps", type=int, default=6)
    sub.set_defaults(func=_cmd_branch)

    sub = subs.add_parser("evolve", help="split-step run with mode tracking")
    _add_common(sub, period=True)
    sub.add_argument("--delta", type=float, default=1e-5)
    sub.add_argument("--mode", type=int, default=1)
    sub.add_argument("--dt", type=float, default=1e-3)
    sub.add_argument("--tend", type=float, default=None)
    sub.add_argument("--record-every", type=int, default=100)
    sub.add_argument("--eps1", type=float, default=1e-2)
    sub.add_argument("--dump-final", help="write the final field (NLSF)")
    sub.add_argument("--fit-json", help="write the growth-fit report (JSON)")
    sub.set_defaults(func=_cmd_evolve)

    sub = subs.add_parser("sweep", help="phase-diagram rows over (p, omega, L)")
    _add_common(sub)
    sub.add_argument("--p-list", required=True, help="comma-separated exponents")
    sub.add_argument("--x-list", required=True, help="comma-separated omega - lambda*")
    sub.add_argument("--L-list", dest="L_list", help="comma-separated periods")
    sub.add_argument(
        "--L-rel-list", dest="L_rel_list", help="comma-separated L/L_c ratios"
    )
    sub.set_defaults(func=_cmd_sweep)

    sub = subs.add_parser("verify", help="run the acceptance suite")
    sub.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NlsLabError as exc:
        payload = {"error_kind": exc.kind, "context": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    except ValueError as exc:
        payload = {"error_kind": "invalid_value", "context": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
