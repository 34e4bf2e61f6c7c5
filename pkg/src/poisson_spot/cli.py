"""Command-line entry point: ``poisson-spot <subcommand> [options]``.

Exit status 0 on success, 1 when a computation fails, 2 for usage errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import cli_io
from .coherent import coherent_gouy_difference, coherent_profile
from .core import PoissonSpotError, free_params, slit_params
from .decoherent import decoherent_profile, gouy_partial
from .detector_fit import (
    FITTABLE,
    convolve_detector,
    model_profile,
    nonlinear_fit,
    synthetic_dataset,
)
from .profiles import Normalization, normalize

ORACLE_CHECKS = ("free", "slit", "coherent", "decoherent", "babinet")


class UsageError(Exception):
    pass


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _config(args) -> cli_io.RunConfig:
    if args.config is None:
        raise UsageError("--config is required for this subcommand")
    return cli_io.load_config(args.config)


def _grid(args, run: cli_io.RunConfig):
    spec = getattr(args, "grid", None)
    if spec is not None:
        try:
            lo, hi, n = cli_io.parse_range(spec, cli_io.LENGTH, "--grid", default_unit="um")
        except (cli_io.ConfigError, ValueError) as exc:
            raise UsageError(f"bad --grid: {exc}") from None
        return cli_io.grid_points(lo, hi, n)
    if run.grid is not None:
        return cli_io.grid_points(*run.grid)
    return None


def _norm(args, run):
    return Normalization.parse(args.norm) if args.norm is not None else run.normalization


def _gouy_flag(args, run):
    return run.include_gouy and not args.no_gouy


def _require_ell(run):
    ell = run.ell
    if ell is None:
        raise UsageError("config needs 'ell' or 'ell0' for this subcommand")
    return ell


def cmd_coherent(args) -> int:
    run = _config(args)
    profile = coherent_profile(run.physical, _grid(args, run), _gouy_flag(args, run), _norm(args, run))
    _emit(cli_io.profile_csv(profile), args.out or run.outputs.get("profile_out"))
    return 0


def cmd_decoherent(args) -> int:
    run = _config(args)
    ell = _require_ell(run)
    profile = decoherent_profile(run.physical, ell, _grid(args, run), _gouy_flag(args, run),
                                 _norm(args, run))
    _emit(cli_io.profile_csv(profile), args.out or run.outputs.get("profile_out"))
    return 0


def cmd_gouy(args) -> int:
    run = _config(args)
    cfg = run.physical
    rows = [
        ("mu_free", free_params(cfg, cfg.t + cfg.tau).mu_f),
        ("mu_slit", slit_params(cfg).mu_s),
        ("mu_coherent", coherent_gouy_difference(cfg)),
    ]
    ell = run.ell
    if ell is not None:
        mu = gouy_partial(cfg, ell)
        rows += [("mu_partial", mu), ("abs_mu_partial", abs(mu)), ("ell_m", ell)]
    text = "quantity,value\n" + "".join(f"{k},{cli_io.format_float(v)}\n" for k, v in rows)
    _emit(text, args.out)
    return 0


def cmd_convolve(args) -> int:
    run = _config(args)
    profile = cli_io.load_profile(args.profile)
    det = run.detector
    if args.sigma_d is not None:
        det = type(det)(args.sigma_d * cli_io.UM)
    out = convolve_detector(profile, det, resample=args.resample)
    if args.norm is not None:
        out = normalize(out, Normalization.parse(args.norm))
    _emit(cli_io.profile_csv(out), args.out or run.outputs.get("profile_out"))
    return 0


def cmd_fit(args) -> int:
    run = _config(args)
    if args.data is None:
        raise UsageError("fit needs --data")
    data = cli_io.load_dataset(args.data)
    free = tuple(args.free) if args.free else run.fit_free
    if "ell" in free and run.coherence is None and "ell" not in run.fit_bounds:
        raise UsageError("fitting ell needs 'ell_bounds' in the config")
    missing = [p for p in free if p not in run.fit_bounds]
    if missing:
        raise UsageError(f"free parameter(s) {missing} need '<name>_bounds' in the config")
    ell = run.ell
    if ell is None:
        lo, hi = run.fit_bounds["ell"]
        ell = math.sqrt(lo * hi)
    result = nonlinear_fit(run.physical, data, free, run.fit_bounds, ell=ell,
                           sigma_d=run.detector.sigma_d, include_gouy=_gouy_flag(args, run))
    _emit(cli_io.fit_report(result), args.out or run.outputs.get("fit_out"))
    residuals_out = args.residuals or run.outputs.get("residuals_out")
    if residuals_out:
        model = model_profile(run.physical, result.ell, result.sigma_d, data.xs,
                              include_gouy=_gouy_flag(args, run))
        cli_io.write_residuals(residuals_out, data, model.values, result)
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    run = _config(args)
    cfg = run.physical
    q = oracle.QuadratureSpec()
    grid = _grid(args, run)
    if args.check == "free":
        value = oracle.compare_free(cfg, cfg.t + cfg.tau, grid, q)
    elif args.check == "slit":
        value = oracle.compare_slit(cfg, grid, q)
    elif args.check == "coherent":
        value = oracle.compare_coherent(cfg, grid, q)
    elif args.check == "decoherent":
        value = oracle.compare_decoherent(cfg, _require_ell(run), grid, q)
    else:
        from .coherent import default_grid

        value = oracle.oracle_babinet_identity(cfg, default_grid(cfg, 201) if grid is None else grid, q)
    _emit(f"check,max_deviation\n{args.check},{cli_io.format_float(value)}\n", args.out)
    return 0


def cmd_synth(args) -> int:
    run = _config(args)
    ell = _require_ell(run)
    lo, hi, n = cli_io.parse_range(args.grid or "-200:200:81", cli_io.LENGTH, "--grid",
                                   default_unit="um")
    rng = np.random.default_rng(args.seed)
    data = synthetic_dataset(run.physical, ell, run.detector.sigma_d, cli_io.grid_points(lo, hi, n),
                             args.a, args.b, noise_fraction=args.noise, rng=rng,
                             with_errors=args.noise > 0)
    if args.out is None:
        raise UsageError("synth needs --out")
    cli_io.write_dataset(args.out, data)
    return 0


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if args.out is None:
        raise UsageError("plot needs --out")
    matplotlib.rcParams["svg.hashsalt"] = "poisson-spot"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in args.profiles:
        profile = cli_io.load_profile(path)
        ax.plot(profile.xs / cli_io.UM, profile.values, label=Path(path).stem, linewidth=1.2)
    ax.set_xlabel("x (um)")
    ax.set_ylabel("intensity")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poisson-spot",
                                     description="Matter-wave Poisson spot with Gouy phase and decoherence.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True, shape=True):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--out", help="output path (default: stdout)")
        if grid:
            p.add_argument("--grid", help="screen grid MIN:MAX:N, positions in um unless suffixed")
        if shape:
            p.add_argument("--no-gouy", action="store_true", help="drop the Gouy phase from the cosine")
            p.add_argument("--norm", choices=("raw", "peak", "area"), help="profile normalization")

    common(sub.add_parser("coherent", help="coherent intensity profile"))
    common(sub.add_parser("decoherent", help="partially coherent intensity profile"))
    common(sub.add_parser("gouy", help="Gouy phases"), grid=False, shape=False)

    p = sub.add_parser("convolve", help="smooth a profile CSV with the detector aperture")
    common(p, grid=False, shape=False)
    p.add_argument("profile")
    p.add_argument("--sigma-d", type=float, help="detector width in um (overrides config)")
    p.add_argument("--resample", action="store_true", help="resample non-uniform grids first")
    p.add_argument("--norm", choices=("raw", "peak", "area"))

    p = sub.add_parser("fit", help="fit the model to a count-rate CSV")
    common(p, grid=False)
    p.add_argument("--data", help="dataset CSV (x_um,rate[,rate_err])")
    p.add_argument("--free", action="append", choices=FITTABLE, help="free parameter (repeatable)")
    p.add_argument("--residuals", help="residuals CSV path")

    p = sub.add_parser("oracle", help="compare closed forms with brute-force quadrature")
    common(p, shape=False)
    p.add_argument("check", choices=ORACLE_CHECKS)

    p = sub.add_parser("synth", help="write a synthetic count-rate dataset")
    common(p, shape=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.01, help="noise sigma as a fraction of the range")
    p.add_argument("--a", type=float, default=40465.09)
    p.add_argument("--b", type=float, default=-466.29)

    p = sub.add_parser("plot", help="render profile CSVs to SVG")
    p.add_argument("profiles", nargs="+")
    p.add_argument("--out", help="SVG output path")
    return parser


COMMANDS = {
    "coherent": cmd_coherent, "decoherent": cmd_decoherent, "gouy": cmd_gouy,
    "convolve": cmd_convolve, "fit": cmd_fit, "oracle": cmd_oracle, "synth": cmd_synth,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, cli_io.ConfigError) as exc:
        print(f"poisson-spot {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (PoissonSpotError, ValueError, OSError) as exc:
        print(f"poisson-spot {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
