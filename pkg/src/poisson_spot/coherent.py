"""Fully coherent Babinet intensity behind a Gaussian obstacle."""
from __future__ import annotations

import math

import numpy as np

from .core import ConsistencyError, PhysicalConfig, free_params, slit_params
from .profiles import IntensityProfile, Normalization, check_grid, normalize, symmetric_grid

# negative values larger than this multiple of eps * (sum of term magnitudes)
# cannot come from rounding
_ROUNDOFF_FACTOR = 64.0


def coherent_gouy_difference(cfg: PhysicalConfig) -> float:
    """Gouy phase of the slit packet relative to the free packet, ``mu_s - mu_f``.

    Closed form; the denominator is strictly positive so ``atan`` is safe.
    """
    t, tau, tau0 = cfg.t, cfg.tau, free_params(cfg, cfg.t).tau0
    num = tau * (tau0**2 + t * (t + tau))
    den = tau0 * tau**2 + (cfg.beta / cfg.sigma0) ** 2 * tau0 * ((t + tau) ** 2 + tau0**2)
    return -0.5 * math.atan(num / den)


def _check_nonnegative(values, scale, what):
    floor = -_ROUNDOFF_FACTOR * np.finfo(float).eps * scale
    bad = values < floor
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConsistencyError(
            f"{what} produced a negative intensity {values.flat[i]!r} beyond rounding"
        )


def coherent_intensity(cfg: PhysicalConfig, x, include_gouy: bool = True):
    """``|psi_free(x, t+tau) - psi_slit(x)|**2`` written as the three-term closed form.

    With ``include_gouy=False`` the phase difference is dropped from the
    interference cosine and nothing else changes.
    """
    x = np.asarray(x, dtype=float)
    fp = free_params(cfg, cfg.t + cfg.tau)
    sp = slit_params(cfg)
    b, r, B, R = fp.b, fp.r, sp.B, sp.R
    mu = coherent_gouy_difference(cfg) if include_gouy else 0.0
    x2 = x * x
    free_term = np.exp(-x2 / b**2) / (math.sqrt(math.pi) * b)
    slit_term = np.exp(-x2 / B**2) / (math.sqrt(math.pi) * B)
    cross_amp = 2.0 / math.sqrt(math.pi * b * B) * np.exp(-(0.5 / b**2 + 0.5 / B**2) * x2)
    phase = cfg.mass * x2 / (2.0 * cfg.hbar) * (1.0 / R - 1.0 / r) + mu
    values = free_term + slit_term - cross_amp * np.cos(phase)
    _check_nonnegative(values, free_term + slit_term + cross_amp, "coherent intensity")
    return values


def default_grid(cfg: PhysicalConfig, points: int = 2001, blur: float = 0.0) -> np.ndarray:
    """``points`` samples over +-5 times the larger of the free and slit widths.

    ``blur`` is the standard deviation of any extra Gaussian smoothing of the
    intensity; it widens the window accordingly.
    """
    width = max(free_params(cfg, cfg.t + cfg.tau).b, slit_params(cfg).B)
    return symmetric_grid(5.0 * math.sqrt(width**2 + 2.0 * blur**2), points)


def coherent_profile(cfg: PhysicalConfig, grid=None, include_gouy: bool = True,
                     norm=Normalization.RAW) -> IntensityProfile:
    xs = default_grid(cfg) if grid is None else check_grid(grid)
    values = coherent_intensity(cfg, xs, include_gouy)
    profile = IntensityProfile(
        xs, values, Normalization.RAW,
        meta={"model": "coherent", "include_gouy": include_gouy, "config": cfg},
    )
    return normalize(profile, norm)
