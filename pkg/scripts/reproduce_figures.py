"""Write the coherent and partially coherent demonstration profiles and the
phase-versus-flight-time curves as CSV plus SVG plots.

    python scripts/reproduce_figures.py --out figures
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from poisson_spot import PhysicalConfig, coherent_profile, decoherent_profile, gouy_partial
from poisson_spot.cli_io import write_profile
from poisson_spot.profiles import symmetric_grid

D2 = dict(mass=3.34e-27, sigma0=50e-6, beta=60e-6)


def save(fig, path):
    matplotlib.rcParams["svg.hashsalt"] = "poisson-spot"
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--out", default="figures")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cfg = PhysicalConfig(t=20e-3, tau=40e-3, **D2)
    xs = symmetric_grid(400e-6, 801)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for gouy, style in ((True, "-"), (False, ":")):
        p = coherent_profile(cfg, xs, include_gouy=gouy, norm="peak")
        write_profile(out / f"coherent_gouy_{gouy}.csv", p)
        ax.plot(xs * 1e6, p.values, style, color="k", label=f"Gouy phase {'on' if gouy else 'off'}")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("I / max I")
    ax.legend()
    save(fig, out / "coherent.svg")

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for gouy, style in ((True, "-"), (False, ":")):
        p = decoherent_profile(cfg, 100e-6, xs, include_gouy=gouy, norm="peak")
        write_profile(out / f"decoherent_gouy_{gouy}.csv", p)
        ax.plot(xs * 1e6, p.values, style, color="k", label=f"Gouy phase {'on' if gouy else 'off'}")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("I_l / max I_l")
    ax.legend()
    save(fig, out / "decoherent.svg")

    taus = np.linspace(0.5e-3, 40e-3, 80)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    rows = ["tau_ms,mu_ell_1m,mu_ell_100um"]
    curves = {}
    for ell in (1.0, 100e-6):
        curves[ell] = [gouy_partial(PhysicalConfig(t=20e-3, tau=tau, **D2), ell) for tau in taus]
    for tau, a, b in zip(taus, curves[1.0], curves[100e-6]):
        rows.append(f"{tau * 1e3!r},{a!r},{b!r}")
    (out / "gouy_vs_tau.csv").write_text("\n".join(rows) + "\n")
    ax.plot(taus * 1e3, curves[1.0], "-", color="k", label="l = 1 m")
    ax.plot(taus * 1e3, curves[100e-6], ":", color="k", label="l = 100 um")
    ax.set_xlabel("tau (ms)")
    ax.set_ylabel("mu_l (rad)")
    ax.legend()
    save(fig, out / "gouy_vs_tau.svg")
    print(f"wrote figures to {out}/")


if __name__ == "__main__":
    main()
