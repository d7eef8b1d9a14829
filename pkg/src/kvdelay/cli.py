"""Command-line entry point.

Subcommands:
  check     hypothesis report for a config (exit 0 holds, 2 violated, 1 invalid)
  simulate  time-domain run, energy CSV + manifest
  spectrum  eigenvalues of the augmented generator, CSV + JSON
  sweep     resolvent-norm sweep along the imaginary axis, CSV + JSON
  verdict   simulate + spectrum + sweep and the combined verdict JSON

All outputs are deterministic (17 significant digits, '\\n' line endings)
and written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .analysis import scenario_verdict
from .assembly import assemble_generator
from .mesh import build_mesh
from .model import (
    ConfigError,
    WaveConfig,
    check_hypothesis,
    config_hash,
    load_config,
)
from .spectral import (
    lambda_cut,
    resolvent_sweep,
    spectrum,
    write_spectrum,
    write_sweep,
)
from .timestepper import simulate

__all__ = ["main", "run_command"]

DEFAULT_N_ELEMENTS = 200
DEFAULT_N_RHO = 32
DEFAULT_SWEEP_N_RHO = 48
DEFAULT_SWEEP_POINTS = 40
DEFAULT_SWEEP_LMIN = 5.0
DEFAULT_SPECTRUM_N = 100


def _atomic(path: Path, write_fn) -> None:
    """write_fn receives a temporary path; the result replaces `path`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        write_fn(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    def w(tmp: Path):
        with open(tmp, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    _atomic(path, w)


def _manifest(cfg: WaveConfig, resolution: dict, outputs: list) -> dict:
    return {
        "config_hash": config_hash(cfg),
        "resolution": resolution,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
    }


def _default_dt(cfg: WaveConfig) -> float:
    return cfg.tau / 32.0


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    report = check_hypothesis(cfg)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if report.holds else 2


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    dt = args.dt if args.dt is not None else _default_dt(cfg)
    T = args.T if args.T is not None else 20.0 * cfg.tau
    series = simulate(cfg, args.n, dt, T, path=args.path, n_rho=args.n_rho)
    out = Path(args.out)
    energy = out / "energy.csv"
    _atomic(energy, series.to_csv)
    manifest = out / "manifest.json"
    _write_json(
        manifest,
        _manifest(
            cfg,
            {"n_elements": args.n, "n_rho": args.n_rho, "dt": dt, "T": T, "path": args.path},
            [energy, manifest],
        ),
    )
    return 0


def _cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    gen = assemble_generator(cfg, build_mesh(cfg, args.n), args.n_rho)
    report = spectrum(gen)
    out = Path(args.out)
    csv_p, json_p = out / "spectrum.csv", out / "spectrum.json"
    _atomic(csv_p, lambda tmp: write_spectrum(report, tmp, tmp.with_suffix(".json.tmp")))
    # write_spectrum writes both files; redo json atomically for clarity
    _write_json(json_p, report.to_dict())
    _cleanup_stray(csv_p)
    return 0


def _cleanup_stray(csv_p: Path) -> None:
    stray = csv_p.with_suffix(".json.tmp")
    for p in csv_p.parent.glob("*.json.tmp"):
        p.unlink(missing_ok=True)
    if stray.exists():
        stray.unlink()


def _run_sweep(cfg: WaveConfig, n: int, n_rho: int, lmin, lmax, points):
    gen = assemble_generator(cfg, build_mesh(cfg, n), n_rho)
    cut = lambda_cut(cfg, n)
    lmax = lmax if lmax is not None else cut
    return resolvent_sweep(gen, lmin, lmax, points, cut=cut), gen


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    sweep, _ = _run_sweep(cfg, args.n, args.n_rho, args.lmin, args.lmax, args.points)
    out = Path(args.out)
    _atomic(out / "sweep.csv", lambda tmp: write_sweep(sweep, tmp, tmp.with_suffix(".json.tmp")))
    _write_json(out / "sweep.json", sweep.to_dict())
    _cleanup_stray(out / "sweep.csv")
    return 0


def _cmd_verdict(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    dt = _default_dt(cfg)
    T = 20.0 * cfg.tau

    def do_spectrum():
        gen = assemble_generator(cfg, build_mesh(cfg, args.spectrum_n), args.n_rho)
        return spectrum(gen)

    def do_sweep():
        sweep, _ = _run_sweep(
            cfg, args.n, args.sweep_n_rho, DEFAULT_SWEEP_LMIN, None, args.points
        )
        return sweep

    # spectrum and sweep are data-independent after assembly; run concurrently
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_spec = pool.submit(do_spectrum)
        fut_sweep = pool.submit(do_sweep)
        series = simulate(cfg, args.n, dt, T, path="history", n_rho=args.n_rho)
        spec_report = fut_spec.result()
        sweep = fut_sweep.result()

    verdict = scenario_verdict(cfg, series, sweep, spec_report)
    outputs = []
    energy = out / "energy.csv"
    _atomic(energy, series.to_csv)
    outputs.append(energy)
    _atomic(out / "spectrum.csv", lambda tmp: write_spectrum(spec_report, tmp, tmp.with_suffix(".json.tmp")))
    _write_json(out / "spectrum.json", spec_report.to_dict())
    _cleanup_stray(out / "spectrum.csv")
    outputs += [out / "spectrum.csv", out / "spectrum.json"]
    _atomic(out / "sweep.csv", lambda tmp: write_sweep(sweep, tmp, tmp.with_suffix(".json.tmp")))
    _write_json(out / "sweep.json", sweep.to_dict())
    _cleanup_stray(out / "sweep.csv")
    outputs += [out / "sweep.csv", out / "sweep.json"]
    _write_json(out / "verdict.json", verdict)
    outputs.append(out / "verdict.json")
    manifest = out / "manifest.json"
    _write_json(
        manifest,
        _manifest(
            cfg,
            {
                "n_elements": args.n,
                "n_rho": args.n_rho,
                "sweep_n_rho": args.sweep_n_rho,
                "spectrum_n": args.spectrum_n,
                "dt": dt,
                "T": T,
            },
            outputs + [manifest],
        ),
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kvdelay",
        description="1-D wave equation with piecewise Kelvin-Voigt damping and delayed feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="hypothesis report for a config")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("simulate", help="time-domain energy run")
    p.add_argument("config")
    p.add_argument("--n", type=int, default=DEFAULT_N_ELEMENTS)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--n-rho", type=int, default=DEFAULT_N_RHO)
    p.add_argument("--path", choices=("history", "rhogrid"), default="history")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("spectrum", help="eigenvalues of the augmented generator")
    p.add_argument("config")
    p.add_argument("--n", type=int, default=DEFAULT_SPECTRUM_N)
    p.add_argument("--n-rho", type=int, default=DEFAULT_N_RHO)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("sweep", help="resolvent-norm sweep")
    p.add_argument("config")
    p.add_argument("--n", type=int, default=DEFAULT_N_ELEMENTS)
    p.add_argument("--n-rho", type=int, default=DEFAULT_SWEEP_N_RHO)
    p.add_argument("--lmin", type=float, default=DEFAULT_SWEEP_LMIN)
    p.add_argument("--lmax", type=float, default=None)
    p.add_argument("--points", type=int, default=DEFAULT_SWEEP_POINTS)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("verdict", help="simulate + spectrum + sweep + verdict")
    p.add_argument("config")
    p.add_argument("--n", type=int, default=DEFAULT_N_ELEMENTS)
    p.add_argument("--n-rho", type=int, default=DEFAULT_N_RHO)
    p.add_argument("--sweep-n-rho", type=int, default=DEFAULT_SWEEP_N_RHO)
    p.add_argument("--spectrum-n", type=int, default=DEFAULT_SPECTRUM_N)
    p.add_argument("--points", type=int, default=DEFAULT_SWEEP_POINTS)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_verdict)
    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
