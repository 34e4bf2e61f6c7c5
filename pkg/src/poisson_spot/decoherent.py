"""Partially coherent Poisson-spot intensity and the generalized Gouy phase.

Loss of coherence acts between the obstacle and the screen: off-diagonal
elements of the density matrix at the obstacle plane are damped by
``exp(-(x0 - x0')**2 / (2 ell**2))`` during the flight time ``tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coherent import _check_nonnegative, default_grid
from .core import PhysicalConfig, free_params
from .profiles import IntensityProfile, Normalization, check_grid, normalize


class CoherenceMode(str, Enum):
    DIRECT_ELL = "direct_ell"
    EVOLVED_ELL = "evolved_ell"


@dataclass(frozen=True)
class CoherenceModel:
    """How the coherence length at the screen is obtained.

    ``direct_ell`` uses ``ell`` as given. ``evolved_ell`` starts from ``ell0``
    at the obstacle and shrinks it at rate ``lambda_rate`` (1/(m^2 s)).
    """

    ell0: float = math.inf
    lambda_rate: float = 0.0
    mode: CoherenceMode = CoherenceMode.DIRECT_ELL
    ell: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", CoherenceMode(self.mode))
        if not self.ell0 > 0:
            raise ValueError("ell0 must be positive")
        if not (self.lambda_rate >= 0 and math.isfinite(self.lambda_rate)):
            raise ValueError("lambda_rate must be finite and >= 0")
        if self.mode is CoherenceMode.DIRECT_ELL and not (self.ell is not None and self.ell > 0):
            raise ValueError("direct_ell mode requires a positive ell")


@dataclass(frozen=True)
class DecoherentParams:
    eta: float
    eta_prime: float
    alpha: float
    delta: float
    C: float
    ell: float


def coherence_length(model: CoherenceModel, tau: float) -> float:
    """Coherence length after a decohering flight of duration ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if model.mode is CoherenceMode.DIRECT_ELL:
        return model.ell
    ell0 = model.ell0
    if math.isinf(ell0):
        if model.lambda_rate == 0 or tau == 0:
            return math.inf
        return math.sqrt(1.5 / (model.lambda_rate * tau))
    return ell0 / math.sqrt(1.0 + (2.0 * model.lambda_rate * tau / 3.0) * ell0**2)


def _check_ell(ell):
    if not ell > 0:
        raise ValueError(f"coherence length must be positive, got {ell!r}")


def _screen_geometry(cfg: PhysicalConfig):
    fp = free_params(cfg, cfg.t)
    bt, rt = fp.b, fp.r
    # (m/2hbar)(1/r + 1/tau): combined quadratic phase rate of packet and propagator
    p = cfg.mass / (2.0 * cfg.hbar) * (1.0 / rt + 1.0 / cfg.tau)
    return fp, bt, rt, p


def decoherent_params(cfg: PhysicalConfig, ell: float) -> DecoherentParams:
    _check_ell(ell)
    m, hbar, tau, beta = cfg.mass, cfg.hbar, cfg.tau, cfg.beta
    _, bt, rt, p = _screen_geometry(cfg)
    inv_l2 = 1.0 / ell**2
    eta = bt**2 * ((0.5 / bt**2) * (0.5 / bt**2 + inv_l2) + p * p)
    half_b0 = 0.5 / bt**2 + 0.5 / beta**2
    eta_prime = (beta**2 * bt**2 / (beta**2 + bt**2)) * (p * p + half_b0 * (half_b0 + inv_l2))
    # real part of the determinant of the free x slit cross-term quadratic form
    d_re = ((beta**2 + bt**2) / (4.0 * beta**2 * bt**2)) * (1.0 / bt**2 + inv_l2) \
        + inv_l2 / (4.0 * bt**2) + p * p
    C = 4.0 * hbar**2 * tau**2 * (
        m**2 / (16.0 * hbar**2 * beta**4) * (1.0 / rt + 1.0 / tau) ** 2 + d_re**2
    )
    mix = 1.0 / bt**2 + 0.5 / beta**2
    alpha = m**2 / C * mix * d_re
    delta = m**3 / (4.0 * hbar * beta**2 * C) * mix * (1.0 / rt + 1.0 / tau)
    return DecoherentParams(eta=eta, eta_prime=eta_prime, alpha=alpha, delta=delta, C=C, ell=ell)


def gouy_partial(cfg: PhysicalConfig, ell: float) -> float:
    """Generalized Gouy phase of a partially coherent packet.

    Tends to :func:`~poisson_spot.coherent.coherent_gouy_difference` for
    ``ell -> inf`` and to 0 for ``ell -> 0``. Negative for physical inputs.
    """
    _check_ell(ell)
    tau, beta, s0 = cfg.tau, cfg.beta, cfg.sigma0
    fp = free_params(cfg, cfg.t)
    bt, rt, tau0 = fp.b, fp.r, fp.tau0
    a1 = beta**2 * tau0 / (s0**2 * rt * tau) * (rt + tau) ** 2
    a2 = rt * tau / tau0 * (1.0 + beta**2 / bt**2) * (s0 / bt) ** 2
    # s0**2/ell**2 overflows harmlessly to inf for tiny ell; atan(0) = 0
    with np.errstate(over="ignore"):
        a3 = rt * tau / tau0 * (1.0 + 2.0 * beta**2 / bt**2) * np.float64(s0 / ell) ** 2
    return float(-0.5 * np.arctan((rt + tau) / (a1 + a2 + a3)))


def decoherent_intensity(cfg: PhysicalConfig, ell: float, x, include_gouy: bool = True):
    """Partially coherent intensity at the screen.

    The overall constant is fixed to ``m / (2 pi hbar tau)``, which makes the
    ``ell -> inf`` limit coincide with :func:`coherent_intensity`.
    """
    x = np.asarray(x, dtype=float)
    m, hbar, tau, beta = cfg.mass, cfg.hbar, cfg.tau, cfg.beta
    dp = decoherent_params(cfg, ell)
    bt = free_params(cfg, cfg.t).b
    mu = gouy_partial(cfg, ell) if include_gouy else 0.0
    x2 = x * x
    k = m**2 / (4.0 * hbar**2 * tau**2)
    free_term = math.sqrt(math.pi / dp.eta) * np.exp(-k * x2 / dp.eta)
    slit_term = math.sqrt(math.pi / dp.eta_prime) * np.exp(-k * x2 / dp.eta_prime)
    cross_pref = 2.0 * math.sqrt(2.0 * math.pi * hbar * tau) / (
        dp.C * bt**4 / (1.0 + (bt / beta) ** 2)
    ) ** 0.25
    cross = cross_pref * np.exp(-dp.alpha * x2)
    values = free_term + slit_term - cross * np.cos(dp.delta * x2 + mu)
    _check_nonnegative(values, free_term + slit_term + cross, "partially coherent intensity")
    return m / (2.0 * math.pi * hbar * tau) * values


def decoherent_profile(cfg: PhysicalConfig, ell: float, grid=None, include_gouy: bool = True,
                       norm=Normalization.RAW) -> IntensityProfile:
    if grid is None:
        xs = default_grid(cfg, blur=cfg.hbar * cfg.tau / (cfg.mass * ell) if math.isfinite(ell) else 0.0)
    else:
        xs = check_grid(grid)
    values = decoherent_intensity(cfg, ell, xs, include_gouy)
    profile = IntensityProfile(
        xs, values, Normalization.RAW,
        meta={"model": "decoherent", "ell": ell, "include_gouy": include_gouy, "config": cfg},
    )
    return normalize(profile, norm)
