"""Command line front end.

Subcommands: check-classicality, simulate, noise-test, entanglement-scan,
oracle-verify, plan-experiment. Exit codes: 0 success, 2 usage or parse
error, 3 physics-constraint rejection.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .dynamics import build_dynamics, propagate_grid
from .entanglement import entanglement_onset
from .errors import PhysicsRejection
from .experiment import parse_config_text, plan_experiment
from .fock import covariance_of, gate_identity_check, moments_numeric, trotter_evolve, vacuum_state
from .noise import run_noise_test
from .phasespace import TOL_PSD
from .sampling import random_physical_cov
from .screens import (
    DisplacementScreen,
    is_classical,
    moments_from_displacement,
    moments_with_coupling,
    screen_from_text,
)
from .states import vacuum_cov


def _screen_from_args(args) -> DisplacementScreen:
    """Resolve the screen selection flags; identity maps to zero sigmas."""
    if getattr(args, "screen_file", None):
        with open(args.screen_file) as fh:
            screen = screen_from_text(fh.read())
        return screen if screen is not None else DisplacementScreen(0.0, 0.0, 0.0)
    if getattr(args, "family", None) == "identity":
        return DisplacementScreen(0.0, 0.0, 0.0)
    return DisplacementScreen(args.sxx, args.spp, args.sxp)


def _dynamics_from_args(args):
    screen = _screen_from_args(args)
    moments = moments_from_displacement(screen)
    if getattr(args, "g", None) is not None:
        moments = moments_with_coupling(moments.Y, args.g)
    return build_dynamics(moments)


def _initial_covariance(args, rng):
    if args.gamma0 == "vacuum":
        return vacuum_cov()
    return random_physical_cov(rng)


def _write_output(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".entnoise-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(payload, fmt: str) -> str:
    """payload is either a dict (document) or a list of dicts (table)."""
    if fmt == "json":
        return json.dumps(payload, indent=2, default=float)
    buf = io.StringIO()
    if isinstance(payload, dict):
        writer = csv.writer(buf)
        writer.writerow(["key", "value"])
        flat = json.loads(json.dumps(payload, default=float))

        def emit(prefix, value):
            if isinstance(value, dict):
                for k, v in value.items():
                    emit(f"{prefix}.{k}" if prefix else k, v)
            elif isinstance(value, list):
                writer.writerow([prefix, "; ".join(map(str, value))])
            else:
                writer.writerow([prefix, value])

        emit("", flat)
    else:
        if not payload:
            return ""
        writer = csv.DictWriter(buf, fieldnames=list(payload[0].keys()))
        writer.writeheader()
        for row in payload:
            writer.writerow(row)
    return buf.getvalue()


def _add_screen_flags(parser, with_g=True):
    parser.add_argument("--screen-file", help="screen spec as a key-value text block")
    parser.add_argument("--family", choices=["identity", "displacement"],
                        default="displacement")
    parser.add_argument("--sxx", type=float, default=0.0,
                        help="displacement variance driving x (sigma_uu)")
    parser.add_argument("--spp", type=float, default=0.0,
                        help="displacement variance driving p (sigma_vv)")
    parser.add_argument("--sxp", type=float, default=0.0,
                        help="displacement covariance (sigma_uv)")
    if with_g:
        parser.add_argument("--g", type=float, default=None,
                            help="coupling strength (default: the screen's own eta)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entnoise",
        description="Screened-exchange oscillator simulations and experiment budgeting",
    )
    parser.add_argument("--version", action="version", version=f"entnoise {__version__}")
    parser.add_argument("--tol", type=float, default=TOL_PSD,
                        help="PSD decision tolerance (default 1e-10)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed for random inputs")
    parser.add_argument("--omega-convention", choices=["hz-cycles", "rad-s"],
                        default="hz-cycles", help="how frequency figures are interpreted")
    parser.add_argument("--output", default=None, help="write to this path (atomic)")
    parser.add_argument("--format", choices=["json", "csv"], default=None,
                        help="output format (default: json for reports, csv for tables)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-classicality", help="decide whether a screen forbids entanglement")
    _add_screen_flags(p)

    p = sub.add_parser("simulate", help="covariance trajectory under the screened dynamics")
    _add_screen_flags(p)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=501)
    p.add_argument("--gamma0", choices=["vacuum", "random"], default="vacuum")

    p = sub.add_parser("noise-test", help="excess momentum-noise rate against the bound")
    _add_screen_flags(p)
    p.add_argument("--t-max", type=float, default=0.3)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--gamma0", choices=["vacuum", "random"], default="vacuum")

    p = sub.add_parser("entanglement-scan",
                       help="entanglement onset versus isotropic screen strength")
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--s-min", type=float, default=0.0)
    p.add_argument("--s-max", type=float, default=None,
                   help="default: 1.5 |g| (just past the classical boundary)")
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--t-max", type=float, default=25.0)
    p.add_argument("--grid", type=int, default=2000)

    p = sub.add_parser("oracle-verify",
                       help="cross-validate the Gaussian formulas against the circuit oracle")
    p.add_argument("--dim", type=int, default=12, help="Fock truncation per mode")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--steps", type=int, nargs="+", default=[8, 16, 32])

    p = sub.add_parser("plan-experiment", help="budget a torsion-pendulum configuration")
    p.add_argument("--config", required=True, help="key-value or JSON config file")

    return parser


def _cmd_check_classicality(args):
    screen = _screen_from_args(args)
    moments = moments_from_displacement(screen)
    g = args.g if args.g is not None else moments.eta
    ok, lam = is_classical(moments.Y, g, tol_psd=args.tol)
    return {
        "screen": {"sigma_uu": screen.sigma_uu, "sigma_vv": screen.sigma_vv,
                   "sigma_uv": screen.sigma_uv},
        "g": g,
        "classical": bool(ok),
        "verdict": "classical" if ok else "non-classical",
        "certificate_min_eigenvalue": lam,
    }, "json"


def _cmd_simulate(args, rng):
    dyn = _dynamics_from_args(args)
    gamma0 = _initial_covariance(args, rng)
    times = np.linspace(0.0, args.t_max, args.grid)
    gammas = propagate_grid(gamma0, dyn, times)
    labels = [f"g{i + 1}{j + 1}" for i in range(4) for j in range(i, 4)]
    rows = []
    for t, gamma in zip(times, gammas):
        row = {"time": t}
        row.update({lab: gamma[i, j]
                    for lab, (i, j) in zip(labels, [(i, j) for i in range(4)
                                                    for j in range(i, 4)])})
        rows.append(row)
    return rows, "csv"


def _cmd_noise_test(args, rng):
    dyn = _dynamics_from_args(args)
    gamma0 = _initial_covariance(args, rng)
    report = run_noise_test(dyn, gamma0, args.t_max, args.grid)
    return list(report.rows()), "csv"


def _cmd_entanglement_scan(args):
    s_max = args.s_max if args.s_max is not None else 1.5 * abs(args.g)
    rows = []
    for s in np.linspace(args.s_min, s_max, args.steps):
        moments = moments_with_coupling(np.diag([2.0 * s, 2.0 * s]), args.g)
        ok, lam = is_classical(moments.Y, args.g, tol_psd=args.tol)
        onset = entanglement_onset(
            build_dynamics(moments), vacuum_cov(), args.t_max, grid=args.grid,
            tol_psd=args.tol,
        )
        rows.append({
            "screen_strength": s,
            "classical": bool(ok),
            "certificate_min_eigenvalue": lam,
            "onset_time": "" if onset is None else onset,
        })
    return rows, "csv"


def _cmd_oracle_verify(args):
    from .dynamics import propagate

    d = args.dim
    rows = []
    for label, screen in [
        ("identity", DisplacementScreen(0.0, 0.0, 0.0)),
        ("isotropic-0.25", DisplacementScreen(0.25, 0.25, 0.0)),
        ("anisotropic", DisplacementScreen(0.4, 0.1, 0.1)),
    ]:
        target = propagate(vacuum_cov(), build_dynamics(moments_from_displacement(screen)), args.t)
        oracle_screen = None if label == "identity" else screen
        for n in args.steps:
            state = trotter_evolve(vacuum_state((d, d)), oracle_screen, args.t, n, n_nodes=13)
            dev = float(np.max(np.abs(covariance_of(state) - target)))
            rows.append({"check": "trotter-covariance", "screen": label,
                         "parameter": n, "deviation": dev})
        closed = moments_from_displacement(screen)
        numeric = moments_numeric(oracle_screen, dim=max(d, 24), n_nodes=17)
        rows.append({"check": "screen-moments", "screen": label, "parameter": max(d, 24),
                     "deviation": float(np.max(np.abs(numeric.Y - closed.Y)))})
    rows.append({"check": "gate-identity", "screen": "none", "parameter": d,
                 "deviation": gate_identity_check(0.1, d)})
    return rows, "csv"


def _cmd_plan_experiment(args):
    try:
        with open(args.config) as fh:
            fields = parse_config_text(fh.read())
    except FileNotFoundError:
        raise PhysicsRejection(f"config file not found: {args.config}") from None
    plan = plan_experiment(fields)
    plan["selected_convention"] = args.omega_convention
    plan["selected_report"] = plan["reports"][args.omega_convention]
    return plan, "json"


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rng = np.random.default_rng(args.seed)
    try:
        if args.command == "check-classicality":
            payload, natural = _cmd_check_classicality(args)
        elif args.command == "simulate":
            payload, natural = _cmd_simulate(args, rng)
        elif args.command == "noise-test":
            payload, natural = _cmd_noise_test(args, rng)
        elif args.command == "entanglement-scan":
            payload, natural = _cmd_entanglement_scan(args)
        elif args.command == "oracle-verify":
            payload, natural = _cmd_oracle_verify(args)
        elif args.command == "plan-experiment":
            payload, natural = _cmd_plan_experiment(args)
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command}")
    except PhysicsRejection as exc:
        print(f"physics constraint rejected: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    fmt = args.format if args.format is not None else natural
    _write_output(_render(payload, fmt), args.output)
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
