"""Monte-Carlo round trip of the detector fit on synthetic apparatus data.

Reports how often each parameter is recovered, and shows that the total
blur sqrt(s^2 + sigma_d^2), s = hbar*tau/(m*ell), is what the data pin down.

    python scripts/fit_monte_carlo.py --trials 100 --seed 9
"""
import argparse
import math
import time
import warnings

import numpy as np

from poisson_spot import PhysicalConfig, nonlinear_fit
from poisson_spot.detector_fit import screen_blur_width, synthetic_dataset

CFG = PhysicalConfig(mass=3.34e-27, sigma0=51e-6, beta=60e-6, t=1.4e-3, tau=0.606e-3)
ELL, SIGMA_D, A, B = 0.3369e-6, 3.96e-6, 40465.09, -466.29


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--noise", type=float, default=0.01)
    parser.add_argument("--free", nargs="+", default=["ell", "sigma_d"], choices=["ell", "sigma_d"])
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    xs = np.linspace(-200e-6, 200e-6, 81)
    bounds = {"ell": (ELL / 10, ELL * 10), "sigma_d": (SIGMA_D / 10, SIGMA_D * 10)}
    total = math.hypot(screen_blur_width(CFG, ELL), SIGMA_D)
    counts = dict(ell=0, sigma_d=0, ab=0, all=0)
    blur_errors = []
    start = time.perf_counter()
    for _ in range(args.trials):
        data = synthetic_dataset(CFG, ELL, SIGMA_D, xs, A, B, args.noise, rng=rng, with_errors=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fit = nonlinear_fit(CFG, data, set(args.free), bounds, ell=ELL, sigma_d=SIGMA_D)
        ok_ell = abs(fit.ell / ELL - 1) < 0.05
        ok_sd = abs(fit.sigma_d / SIGMA_D - 1) < 0.05
        ok_ab = abs(fit.a - A) < 3 * fit.a_err and abs(fit.b - B) < 3 * fit.b_err
        counts["ell"] += ok_ell
        counts["sigma_d"] += ok_sd
        counts["ab"] += ok_ab
        counts["all"] += ok_ell and ok_sd and ok_ab
        blur_errors.append(math.hypot(screen_blur_width(CFG, fit.ell), fit.sigma_d) / total - 1)
    elapsed = time.perf_counter() - start
    print(f"trials {args.trials}, free {args.free}, {elapsed:.1f} s")
    for key, value in counts.items():
        print(f"  within tolerance [{key}]: {value}/{args.trials}")
    print(f"  total blur relative error: median {np.median(np.abs(blur_errors)):.3%}")


if __name__ == "__main__":
    main()
