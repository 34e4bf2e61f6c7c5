"""Gaussian wavepacket propagation: free flight and a Gaussian slit.

Everything is in SI units. Curvature parameters ``r`` and ``R`` carry
units of time: the quadratic phase of a packet is ``m x**2 / (2 hbar r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HBAR = 1.054571817e-34  # J s


class PoissonSpotError(Exception):
    """Base class for errors raised by this package."""


class ConsistencyError(PoissonSpotError):
    """A closed form produced a value it analytically cannot take."""


@dataclass(frozen=True)
class PhysicalConfig:
    """Apparatus parameters.

    Attributes
    ----------
    mass : float
        Particle mass (kg).
    sigma0 : float
        Initial packet width at the source (m).
    beta : float
        Width of the Gaussian slit / obstacle (m).
    t : float
        Flight time source -> obstacle (s).
    tau : float
        Flight time obstacle -> screen (s).
    hbar : float
        Reduced Planck constant (J s).
    """

    mass: float
    sigma0: float
    beta: float
    t: float
    tau: float
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("mass", "sigma0", "beta", "t", "tau", "hbar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class FreeBeamParams:
    b: float
    r: float
    mu_f: float
    tau0: float


@dataclass(frozen=True)
class SlitBeamParams:
    B: float
    R: float
    mu_s: float


def characteristic_time(cfg: PhysicalConfig) -> float:
    """Aging time ``m sigma0**2 / hbar`` of the initial packet."""
    return cfg.mass * cfg.sigma0**2 / cfg.hbar


def free_params(cfg: PhysicalConfig, elapsed: float) -> FreeBeamParams:
    """Width, curvature and Gouy phase after free flight of duration ``elapsed``."""
    if elapsed < 0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed!r}")
    tau0 = characteristic_time(cfg)
    s = elapsed / tau0
    b = cfg.sigma0 * math.sqrt(1.0 + s * s)
    r = math.inf if elapsed == 0 else elapsed + tau0 * (tau0 / elapsed)
    mu_f = -0.5 * math.atan(s)
    return FreeBeamParams(b=b, r=r, mu_f=mu_f, tau0=tau0)


def slit_params(cfg: PhysicalConfig) -> SlitBeamParams:
    """Width, curvature and Gouy phase at the screen behind the Gaussian slit.

    The Gouy phase uses ``atan2`` on the (always positive) numerator and the
    signed denominator, so it stays continuous where the denominator
    ``1 - t tau sigma0**2 / (tau0**2 beta**2)`` changes sign.
    """
    m, hbar, t, tau, beta, s0 = cfg.mass, cfg.hbar, cfg.t, cfg.tau, cfg.beta, cfg.sigma0
    fp = free_params(cfg, t)
    bt, rt, tau0 = fp.b, fp.r, fp.tau0
    k = 1.0 / beta**2 + 1.0 / bt**2
    p = 1.0 / tau + 1.0 / rt
    common = k * k + (m / hbar) ** 2 * p * p
    B = math.sqrt(common / ((m / (hbar * tau)) ** 2 * k))
    R = tau * common / (k * k + t / (s0**2 * bt**2) * p)
    num = t + tau * (1.0 + s0**2 / beta**2)
    den = tau0 * (1.0 - t * tau * s0**2 / (tau0**2 * beta**2))
    mu_s = -0.5 * math.atan2(num, den)
    return SlitBeamParams(B=B, R=R, mu_s=mu_s)


def obstacle_plane_params(cfg: PhysicalConfig) -> SlitBeamParams:
    """Slit parameters just behind the obstacle plane (zero flight time after it).

    Only the width is changed by the transmission mask; curvature and phase
    are those of the free packet at time ``t``.
    """
    fp = free_params(cfg, cfg.t)
    B = math.sqrt(fp.b**2 * cfg.beta**2 / (cfg.beta**2 + fp.b**2))
    return SlitBeamParams(B=B, R=fp.r, mu_s=fp.mu_f)


def gaussian_amplitude(x, width, curvature, phase, mass, hbar):
    """Unit-norm Gaussian ``(pi w^2)^(-1/4) exp(-x^2/2w^2 + i m x^2/(2 hbar R) + i phase)``."""
    x = np.asarray(x, dtype=float)
    inv_r = 0.0 if math.isinf(curvature) else 1.0 / curvature
    envelope = np.exp(-(x**2) / (2.0 * width**2)) / math.sqrt(width * math.sqrt(math.pi))
    return envelope * np.exp(1j * (mass * x**2 * inv_r / (2.0 * hbar) + phase))


def psi_free(cfg: PhysicalConfig, x, elapsed: float):
    """Freely propagated packet at transverse position(s) ``x``."""
    fp = free_params(cfg, elapsed)
    return gaussian_amplitude(x, fp.b, fp.r, fp.mu_f, cfg.mass, cfg.hbar)


def psi_slit(cfg: PhysicalConfig, x):
    """Packet at the screen after the Gaussian slit, normalized to unit norm."""
    sp = slit_params(cfg)
    return gaussian_amplitude(x, sp.B, sp.R, sp.mu_s, cfg.mass, cfg.hbar)
