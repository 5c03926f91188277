"""Command-line front end.

Subcommands construct waves, reproduce the index scan, dump spectra and
Krein reports, and run evolution experiments, writing reproducible CSV
and JSON artifacts.  Every artifact starts with a provenance header
(tool version, full parameter set, timestamp); identical arguments and
seeds reproduce byte-identical bodies apart from the timestamp line.

Exit codes: 0 success, 1 domain or validation error, 2 numerical
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, evolve as evolve_mod, indices, linop, wave as wave_mod
from .errors import DomainError, MchError, NumericalError
from .field import PeriodicGrid, PeriodicField, fractional_shift, sample_wave
from .wave import profile

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64


class UsageExit(SystemExit):
    def __init__(self, message: str):
        print(f"usage error: {message}", file=sys.stderr)
        super().__init__(EXIT_USAGE)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64 instead of argparse's default 2
        self.print_usage(sys.stderr)
        raise UsageExit(message)


def parse_length(text: str) -> float:
    """Parse a length; a trailing 'pi' means multiples of pi ('6pi', 'pi')."""
    s = text.strip().lower()
    if s.endswith("pi"):
        head = s[:-2]
        factor = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head)
        return factor * math.pi
    return float(s)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _provenance(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return {
        "tool_version": __version__,
        "command": args.command,
        "parameters": {k: (_fmt(v) if isinstance(v, float) else v) for k, v in params.items()},
    }


def write_json(path: Path, payload: dict, args: argparse.Namespace) -> None:
    body = dict(_provenance(args))
    body["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    body.update(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    # indent=1 keeps the timestamp on its own line, so byte comparisons
    # can exclude exactly that line.
    path.write_text(json.dumps(body, indent=1, sort_keys=False) + "\n")


def write_csv(path: Path, header: list[str], rows: list[list], args: argparse.Namespace) -> None:
    lines = []
    prov = _provenance(args)
    lines.append(f"# tool_version: {prov['tool_version']}")
    lines.append(f"# command: {prov['command']}")
    for key, val in prov["parameters"].items():
        lines.append(f"# {key}: {val}")
    lines.append(f"# timestamp: {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _spectral_payload(rep: linop.SpectralReport) -> dict:
    if np.iscomplexobj(rep.eigenvalues):
        eig = {
            "eigenvalues_re": [float(v) for v in rep.eigenvalues.real],
            "eigenvalues_im": [float(v) for v in rep.eigenvalues.imag],
        }
    else:
        eig = {"eigenvalues": [float(v) for v in rep.eigenvalues]}
    return {
        **eig,
        "n_neg": rep.n_neg,
        "z_dim": rep.z_dim,
        "tol": rep.tol,
        "near_zero_gap": rep.near_zero_gap,
        "grid": {"L": rep.grid.L, "n": rep.grid.n},
    }


def cmd_wave(args: argparse.Namespace) -> int:
    p = wave_mod.wave_params(args.k, args.L)
    rep = wave_mod.validity(args.k, args.L, n=args.n)
    if not rep.all_ok:
        print(f"invalid wave at (k={args.k}, L={args.L}): "
              f"ineq_i={rep.ineq_i_value!r} ineq_ii_margin={rep.ineq_ii_margin!r}")
        return EXIT_DOMAIN
    residual = wave_mod.ode_residual(p, n=max(args.n, 512))
    sn = wave_mod.snoidal_form(p)
    grid = PeriodicGrid(p.L, args.n)
    phi = sample_wave(p, grid)
    payload = {
        "wave": dataclasses.asdict(p),
        "snoidal": dataclasses.asdict(sn),
        "validity": dataclasses.asdict(rep),
        "ode_residual": residual,
        "profile": {
            "grid": {"L": grid.L, "n": grid.n},
            "x": [float(v) for v in grid.nodes],
            "values": [float(v) for v in phi.values],
        },
    }
    out = Path(args.out_dir) / "wave.json"
    write_json(out, payload, args)
    write_csv(Path(args.out_dir) / "wave_profile.csv", ["x", "value"],
              [[float(x), float(v)] for x, v in zip(grid.nodes, phi.values)], args)
    print(f"wave (k={p.k}, L={p.L}): a={p.a:.6g} b={p.b:.6g} c={p.c:.6g} A={p.A:.6g} "
          f"residual={residual:.3e} -> {out}")
    return EXIT_OK


def _scan_cell(task):
    k, L, h, n_quad = task
    if not wave_mod.validity(k, L, n=n_quad).all_ok:
        return indices.IndexSample(k, L, math.nan, False,
                                   math.nan, math.nan, math.nan, math.nan)
    try:
        return indices.stability_index(k, L, h=h, n_quad=n_quad)
    except MchError:
        return indices.IndexSample(k, L, math.nan, False,
                                   math.nan, math.nan, math.nan, math.nan)


def cmd_scan(args: argparse.Namespace) -> int:
    ks = np.linspace(args.k_min, args.k_max, args.nk) if args.nk > 1 else [args.k_min]
    Ls = np.linspace(args.L_min, args.L_max, args.nL) if args.nL > 1 else [args.L_min]
    tasks = [(float(k), float(L), args.h, args.n_quad) for k in ks for L in Ls]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            samples = list(pool.map(_scan_cell, tasks, chunksize=8))
    else:
        samples = [_scan_cell(t) for t in tasks]
    vals = np.array([s.I for s in samples if s.valid])
    summary = {
        "min_I": float(np.min(vals)) if vals.size else math.nan,
        "max_I": float(np.max(vals)) if vals.size else math.nan,
        "count_positive": int(np.sum(vals > 0)) if vals.size else 0,
        "count_invalid": sum(1 for s in samples if not s.valid),
        "count_cells": len(samples),
    }
    out_csv = Path(args.out_dir) / "scan.csv"
    write_csv(out_csv,
              ["k", "L", "I", "valid", "dA_dk", "dc_dk", "dV_dk", "dF_dk"],
              [[s.k, s.L, s.I, int(s.valid), s.dA_dk, s.dc_dk, s.dV_dk, s.dF_dk]
               for s in samples], args)
    out_json = Path(args.out_dir) / "scan_summary.json"
    write_json(out_json, summary, args)
    print(f"scan {args.nk}x{args.nL}: max I = {summary['max_I']!r} "
          f"({summary['count_invalid']} invalid cells) -> {out_csv}")
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    p = indices.constant_or_wave(args.k, args.L)
    grid = PeriodicGrid(p.L, args.n)
    phi, _, phi2 = profile(p, grid.nodes)
    fld, fld2 = PeriodicField(grid, phi), PeriodicField(grid, phi2)
    op = linop.assemble_l(fld, fld2, p.c)
    full = linop.spectrum(op, tol=args.tol)
    restr = linop.restricted_spectrum(op, tol=args.tol)
    payload = {
        "wave": dataclasses.asdict(p),
        "spectrum": _spectral_payload(full),
        "restricted_spectrum": _spectral_payload(restr),
    }
    try:
        pair = linop.inv_one_pairing(op, tol=args.tol,
                                     allow_multi_kernel=args.allow_multi_kernel)
        payload["pairing"] = dataclasses.asdict(pair)
    except MchError as exc:
        payload["pairing_error"] = str(exc)
    if args.evolution:
        dxl = linop.assemble_dxl(fld, fld2, p.c)
        payload["evolution_spectrum"] = _spectral_payload(
            linop.restricted_spectrum(dxl, tol=args.tol))
    out = Path(args.out_dir) / "spectrum.json"
    write_json(out, payload, args)
    print(f"spectrum (k={args.k}, L={args.L}, n={args.n}): n(L)={full.n_neg} "
          f"z(L)={full.z_dim} n(L|Y0)={restr.n_neg} z(L|Y0)={restr.z_dim} -> {out}")
    return EXIT_OK


def cmd_krein(args: argparse.Namespace) -> int:
    rep = indices.krein_index(args.k, (args.L_min, args.L_max), n=args.n)
    payload = {"krein": dataclasses.asdict(rep)}
    out = Path(args.out_dir) / "krein.json"
    write_json(out, payload, args)
    print(f"krein (k={args.k}): classification={rep.classification} "
          f"K_Ham={rep.K_Ham} L*={rep.L_star!r} -> {out}")
    return EXIT_OK


def _run_report_rows(report) -> list[list]:
    rows = []
    for i, t in enumerate(report.times):
        rho = report.rho[i] if report.rho is not None else math.nan
        rows.append([float(t), float(rho), float(report.drift_E[i]),
                     float(report.drift_F[i]), float(report.drift_V[i])])
    return rows


def cmd_evolve(args: argparse.Namespace) -> int:
    p = wave_mod.wave_params(args.k, args.L)
    grid = PeriodicGrid(p.L, args.n)
    u0 = sample_wave(p, grid)
    dt = args.dt if args.dt is not None else evolve_mod.suggested_dt(u0, speed=p.c)
    cfg = evolve_mod.EvolutionConfig(dt=dt, t_end=args.t_end,
                                     monitor_every=args.monitor_every)
    traj, report = evolve_mod.run(u0, cfg, reference=p)
    prop_err = 0.0
    for t, fld in zip(traj.times, traj.fields):
        exact = fractional_shift(u0, -p.c * t)
        prop_err = max(prop_err, float(np.max(np.abs(fld.values - exact.values))))
    out_csv = Path(args.out_dir) / "evolve.csv"
    write_csv(out_csv, ["t", "rho", "drift_E", "drift_F", "drift_V"],
              _run_report_rows(report), args)
    summary = {
        "terminated": report.terminated,
        "dt": dt,
        "max_propagation_error": prop_err,
        "max_drift_E": float(np.max(np.abs(report.drift_E))),
        "max_drift_F": float(np.max(np.abs(report.drift_F))),
        "max_drift_V": float(np.max(np.abs(report.drift_V))),
    }
    write_json(Path(args.out_dir) / "evolve_summary.json", summary, args)
    print(f"evolve (k={args.k}, L={args.L}, n={args.n}, t_end={args.t_end}): "
          f"{report.terminated}, propagation error {prop_err:.3e} -> {out_csv}")
    return EXIT_OK if report.terminated == evolve_mod.TERMINATED_COMPLETED else EXIT_NUMERICAL


def cmd_orbit(args: argparse.Namespace) -> int:
    p = wave_mod.wave_params(args.k, args.L)
    grid = PeriodicGrid(p.L, args.n)
    u0 = sample_wave(p, grid)
    dt = args.dt if args.dt is not None else evolve_mod.suggested_dt(u0, speed=p.c)
    cfg = evolve_mod.EvolutionConfig(dt=dt, t_end=args.t_end,
                                     monitor_every=args.monitor_every)
    report = evolve_mod.orbital_experiment(p, args.delta, args.seed, cfg, n=args.n,
                                           rho_factor=args.rho_factor)
    out_csv = Path(args.out_dir) / "orbit.csv"
    write_csv(out_csv, ["t", "rho", "drift_E", "drift_F", "drift_V"],
              _run_report_rows(report), args)
    sup_rho = float(np.max(report.rho)) if report.rho is not None and report.rho.size else math.nan
    summary = {
        "terminated": report.terminated,
        "dt": dt,
        "delta": args.delta,
        "seed": args.seed,
        "sup_rho": sup_rho,
        "sup_rho_over_delta": sup_rho / args.delta if args.delta > 0 else math.nan,
    }
    write_json(Path(args.out_dir) / "orbit_summary.json", summary, args)
    print(f"orbit (k={args.k}, L={args.L}, delta={args.delta}, seed={args.seed}): "
          f"{report.terminated}, sup rho = {sup_rho:.6e} -> {out_csv}")
    return EXIT_OK if report.terminated == evolve_mod.TERMINATED_COMPLETED else EXIT_NUMERICAL


def cmd_check(args: argparse.Namespace) -> int:
    """Quick property-suite runner; prints one PASS/FAIL line per check."""
    from .elliptic import complete_e, complete_k, jacobi

    checks: list[tuple[str, bool]] = []

    def run_check(name: str, fn) -> None:
        try:
            ok = bool(fn())
        except MchError as exc:
            print(f"FAIL {name}: {exc}")
            checks.append((name, False))
            return
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        checks.append((name, ok))

    def legendre() -> bool:
        worst = 0.0
        for k in (0.1, 0.5, 0.9):
            kp = math.sqrt(1.0 - k * k)
            worst = max(worst, abs(
                complete_e(k) * complete_k(kp) + complete_e(kp) * complete_k(k)
                - complete_k(k) * complete_k(kp) - math.pi / 2.0))
        return worst < 1e-10

    def jacobi_identities() -> bool:
        rng = np.random.default_rng(0)
        u = rng.uniform(-10, 10, 200)
        k = 0.7
        sn, cn, dn = jacobi(u, k)
        return (np.max(np.abs(sn * sn + cn * cn - 1.0)) < 1e-12
                and np.max(np.abs(k * k * sn * sn + dn * dn - 1.0)) < 1e-12)

    def wave_residual() -> bool:
        p = wave_mod.wave_params(0.5, 6.0 * math.pi)
        return wave_mod.ode_residual(p, 512) < 1e-8

    def constant_counts() -> bool:
        p = wave_mod.constant_wave(2.0 * math.pi)
        grid = PeriodicGrid(p.L, 128)
        phi, _, phi2 = profile(p, grid.nodes)
        op = linop.assemble_l(PeriodicField(grid, phi), PeriodicField(grid, phi2), p.c)
        rep = linop.spectrum(op)
        return rep.n_neg == 1 and rep.z_dim == 2

    def wave_spectral_counts() -> bool:
        rep = indices.morse_check(0.5, 6.0 * math.pi)
        return (rep.n_L == 1 and rep.z_L == 1
                and rep.n_identity_holds and rep.z_identity_holds)

    def snoidal_dnoidal_agreement() -> bool:
        p = wave_mod.wave_params(0.5, 6.0 * math.pi)
        sn_form = wave_mod.snoidal_form(p)
        x = np.arange(512) * (p.L / 512)
        sn = jacobi(2.0 * complete_k(p.k) * x / p.L, p.k)[0]
        diff = sn_form.alpha + sn_form.beta * sn * sn - profile(p, x)[0]
        return float(np.max(np.abs(diff))) < 1e-12

    def semidistance_on_translates() -> bool:
        from .field import semidistance
        p = wave_mod.wave_params(0.5, 6.0 * math.pi)
        grid = PeriodicGrid(p.L, 256)
        phi = sample_wave(p, grid)
        rho, _ = semidistance(fractional_shift(phi, 2.3), p)
        return rho < 1e-9

    def conservation_short_run() -> bool:
        p = wave_mod.wave_params(0.5, 6.0 * math.pi)
        grid = PeriodicGrid(p.L, 256)
        u0 = sample_wave(p, grid)
        cfg = evolve_mod.EvolutionConfig(dt=evolve_mod.suggested_dt(u0, speed=p.c),
                                         t_end=2.0, monitor_every=10**9)
        _, rep = evolve_mod.run(u0, cfg)
        drifts = [rep.drift_E[-1], rep.drift_F[-1], rep.drift_V[-1]]
        return rep.terminated == "completed" and max(abs(d) for d in drifts) < 1e-10

    def index_negative_spots() -> bool:
        return (indices.stability_index(0.1, 5.0 * math.pi).I < 0.0
                and indices.stability_index(0.5, 8.0 * math.pi).I < 0.0)

    run_check("legendre_relation", legendre)
    run_check("jacobi_identities", jacobi_identities)
    run_check("wave_ode_residual", wave_residual)
    run_check("snoidal_dnoidal_agreement", snoidal_dnoidal_agreement)
    run_check("constant_case_counts", constant_counts)
    run_check("morse_identities_at_wave", wave_spectral_counts)
    run_check("semidistance_on_translates", semidistance_on_translates)
    run_check("conservation_short_run", conservation_short_run)
    run_check("index_negative_spots", index_negative_spots)
    failed = [name for name, ok in checks if not ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mchwave", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out-dir", default=".", help="artifact directory")

    sp = sub.add_parser("wave", help="construct one wave and report residual/validity")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--L", type=parse_length, required=True)
    sp.add_argument("--n", type=int, default=256)
    add_common(sp)
    sp.set_defaults(func=cmd_wave)

    sp = sub.add_parser("scan", help="stability-index grid scan")
    sp.add_argument("--k-min", type=float, required=True)
    sp.add_argument("--k-max", type=float, required=True)
    sp.add_argument("--L-min", type=parse_length, required=True)
    sp.add_argument("--L-max", type=parse_length, required=True)
    sp.add_argument("--nk", type=int, default=20)
    sp.add_argument("--nL", type=int, default=20)
    sp.add_argument("--h", type=float, default=None, help="FD step (default: adaptive)")
    sp.add_argument("--n-quad", type=int, default=256)
    sp.add_argument("--workers", type=int, default=1)
    add_common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("spectrum", help="linearized-operator spectra and counts")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--L", type=parse_length, required=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--allow-multi-kernel", action="store_true")
    sp.add_argument("--evolution", action="store_true",
                    help="also dump the complex spectrum of the evolution operator on Y0")
    add_common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("krein", help="zero-mean branch, d''(c) and Krein index")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--L-min", type=parse_length, required=True)
    sp.add_argument("--L-max", type=parse_length, required=True)
    sp.add_argument("--n", type=int, default=256)
    add_common(sp)
    sp.set_defaults(func=cmd_krein)

    sp = sub.add_parser("evolve", help="propagate the exact wave; conservation check")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--L", type=parse_length, required=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--t-end", type=float, default=5.0)
    sp.add_argument("--monitor-every", type=int, default=20)
    add_common(sp)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("orbit", help="orbital-stability experiment")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--L", type=parse_length, required=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--delta", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--t-end", type=float, default=50.0)
    sp.add_argument("--monitor-every", type=int, default=25)
    sp.add_argument("--rho-factor", type=float, default=50.0)
    add_common(sp)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("check", help="run the quick property suite")
    add_common(sp)
    sp.set_defaults(func=cmd_check)
    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageExit:
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
