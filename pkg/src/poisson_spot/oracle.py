"""Brute-force quadrature of the propagation integrals.

These routines integrate the free-particle propagator numerically
(composite Simpson on uniform nodes) and never use the closed-form widths,
curvatures or phases at the screen. Closed-form quantities appear only to
size the integration domain and node spacing.

Node spacing is the smaller of an oscillation bound,
``2 pi / (points_per_oscillation * max |d phase/dx|)``, and an envelope bound,
``4 * width / points_per_oscillation``. The domain is truncated at
``half_width_sigmas`` local widths; for Gaussian-damped integrands the
truncation error is of order ``erfc(half_width_sigmas / sqrt(2))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    ConsistencyError,
    PhysicalConfig,
    PoissonSpotError,
    free_params,
    gaussian_amplitude,
    obstacle_plane_params,
)

_CHUNK = 1 << 21  # matrix elements per block


class QuadratureError(PoissonSpotError):
    """The requested accuracy needs more nodes than the spec allows."""

    def __init__(self, required: int, cap: int, what: str = "integral"):
        super().__init__(f"{what} needs {required} nodes per axis, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class QuadratureSpec:
    half_width_sigmas: float = 10.0
    points_per_oscillation: float = 16.0
    max_points: int = 400_001

    def __post_init__(self):
        if self.half_width_sigmas < 6:
            raise ValueError("half_width_sigmas must be >= 6")
        if self.points_per_oscillation < 8:
            raise ValueError("points_per_oscillation must be >= 8")
        if self.max_points < 3:
            raise ValueError("max_points must be >= 3")

    def refined(self) -> "QuadratureSpec":
        """Same spec with twice the oscillation sampling."""
        return replace(self, points_per_oscillation=2 * self.points_per_oscillation,
                       max_points=2 * self.max_points)


def simpson_weights(n: int, h: float) -> np.ndarray:
    if n < 3 or n % 2 == 0:
        raise ValueError("composite Simpson needs an odd number of nodes >= 3")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def required_nodes(half_width: float, omega_max: float, envelope: float,
                   spec: QuadratureSpec) -> int:
    """Odd node count for a symmetric domain ``[-half_width, half_width]``."""
    ppo = spec.points_per_oscillation
    h = 4.0 * envelope / ppo
    if omega_max > 0:
        h = min(h, 2.0 * math.pi / (ppo * omega_max))
    intervals = max(64, math.ceil(2.0 * half_width / h))
    intervals += intervals % 2
    return intervals + 1


def _nodes(half_width, omega_max, envelope, spec, what):
    n = required_nodes(half_width, omega_max, envelope, spec)
    if n > spec.max_points:
        raise QuadratureError(n, spec.max_points, what)
    xs = np.linspace(-half_width, half_width, n)
    half = n // 2
    xs[n - half:] = -xs[:half][::-1]
    xs[half] = 0.0
    return xs, simpson_weights(n, xs[1] - xs[0])


def _propagate(values_times_weights, nodes, x, mass, hbar, elapsed):
    """Sum of ``K(x - node) * value * weight`` for the free propagator ``K``."""
    a = mass / (2.0 * hbar * elapsed)
    pref = math.sqrt(mass / (2.0 * math.pi * hbar * elapsed)) * complex(math.cos(-math.pi / 4),
                                                                       math.sin(-math.pi / 4))
    out = np.empty(x.shape, dtype=complex)
    rows = max(1, _CHUNK // nodes.size)
    for start in range(0, x.size, rows):
        xi = x[start:start + rows, None]
        kernel = np.exp(1j * (a * (xi - nodes[None, :]) ** 2))
        out[start:start + rows] = kernel @ values_times_weights
    return pref * out


def initial_amplitude(cfg: PhysicalConfig, x):
    """Source packet: unit-norm Gaussian of width ``sigma0`` with flat phase."""
    x = np.asarray(x, dtype=float)
    return (np.exp(-(x**2) / (2.0 * cfg.sigma0**2)) / math.sqrt(cfg.sigma0 * math.sqrt(math.pi))
            ).astype(complex)


def oracle_psi_free(cfg: PhysicalConfig, x, elapsed: float, q: QuadratureSpec = QuadratureSpec()):
    """Free propagation of the source packet by direct quadrature."""
    if elapsed < 0:
        raise ValueError("elapsed must be >= 0")
    x = np.asarray(x, dtype=float)
    if elapsed == 0:
        return initial_amplitude(cfg, x)
    flat = x.ravel()
    half = q.half_width_sigmas * cfg.sigma0
    omega = cfg.mass * (np.max(np.abs(flat)) + half) / (cfg.hbar * elapsed)
    x0, w = _nodes(half, omega, cfg.sigma0, q, "free propagation")
    src = initial_amplitude(cfg, x0) * w
    return _propagate(src, x0, flat, cfg.mass, cfg.hbar, elapsed).reshape(x.shape)


def _through_masks(cfg, x, masks, width, q):
    """Propagate the packet at time ``t`` through each mask and on for ``tau``.

    Returns the screen amplitudes and the squared norms just behind the
    masks, all on a common set of mask-plane nodes.
    """
    flat = np.asarray(x, dtype=float).ravel()
    fp_t = free_params(cfg, cfg.t)
    half = q.half_width_sigmas * width
    omega = cfg.mass * (np.max(np.abs(flat)) + half) / (cfg.hbar * cfg.tau) \
        + cfg.mass * half / (cfg.hbar * fp_t.r)
    xj, wj = _nodes(half, omega, min(width, cfg.beta), q, "slit-plane propagation")
    psi_t = oracle_psi_free(cfg, xj, cfg.t, q)
    amps, norms = [], []
    for mask in masks:
        field = mask(xj) * psi_t
        norms.append(float(np.sum(wj * np.abs(field) ** 2)))
        amps.append(_propagate(field * wj, xj, flat, cfg.mass, cfg.hbar, cfg.tau))
    return amps, norms


def _slit_mask(cfg):
    return lambda xj: np.exp(-(xj**2) / (2.0 * cfg.beta**2))


def oracle_psi_slit(cfg: PhysicalConfig, x, q: QuadratureSpec = QuadratureSpec(),
                    physical_transmission: bool = False):
    """Amplitude at the screen behind the Gaussian slit by nested quadrature.

    By default the result is rescaled to unit norm, the convention of
    :func:`~poisson_spot.core.psi_slit`. With ``physical_transmission=True``
    the transmitted amplitude is returned as is (norm below one).
    """
    x = np.asarray(x, dtype=float)
    width = obstacle_plane_params(cfg).B
    (amp,), (norm2,) = _through_masks(cfg, x, [_slit_mask(cfg)], width, q)
    if not physical_transmission:
        amp = amp / math.sqrt(norm2)
    return amp.reshape(x.shape)


def oracle_coherent_intensity(cfg: PhysicalConfig, x, q: QuadratureSpec = QuadratureSpec()):
    """``|psi_free - psi_slit|**2`` from the two quadrature amplitudes (unit-norm slit)."""
    x = np.asarray(x, dtype=float)
    diff = oracle_psi_free(cfg, x, cfg.t + cfg.tau, q) - oracle_psi_slit(cfg, x, q)
    return np.abs(diff) ** 2


def babinet_amplitudes(cfg: PhysicalConfig, x, q: QuadratureSpec = QuadratureSpec()):
    """Physical screen amplitudes behind the slit and behind the complementary obstacle."""
    x = np.asarray(x, dtype=float)
    width = free_params(cfg, cfg.t).b
    slit = _slit_mask(cfg)
    (a_slit, a_obst), _ = _through_masks(cfg, x, [slit, lambda xj: 1.0 - slit(xj)], width, q)
    return a_slit.reshape(x.shape), a_obst.reshape(x.shape)


def oracle_babinet_identity(cfg: PhysicalConfig, grid, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Max deviation of slit + obstacle amplitudes from the unobstructed packet.

    Relative to the peak magnitude of the free amplitude on ``grid``.
    """
    x = np.asarray(grid, dtype=float)
    a_slit, a_obst = babinet_amplitudes(cfg, x, q)
    free = oracle_psi_free(cfg, x, cfg.t + cfg.tau, q)
    return float(np.max(np.abs(a_slit + a_obst - free)) / np.max(np.abs(free)))


def obstacle_amplitude(cfg: PhysicalConfig, y):
    """Amplitude just behind the obstacle, unit-norm free minus unit-norm slit packet."""
    fp = free_params(cfg, cfg.t)
    op = obstacle_plane_params(cfg)
    return (gaussian_amplitude(y, fp.b, fp.r, fp.mu_f, cfg.mass, cfg.hbar)
            - gaussian_amplitude(y, op.B, op.R, op.mu_s, cfg.mass, cfg.hbar))


def oracle_decoherent_intensity(cfg: PhysicalConfig, ell: float, x,
                                q: QuadratureSpec = QuadratureSpec()):
    """Partially coherent screen intensity by double quadrature over the obstacle plane.

    Integrates over centre ``u = (x0 + x0')/2`` and separation ``v = x0 - x0'``,
    so the coherence damping confines ``v`` to ``half_width_sigmas * ell``.
    Normalized with ``m / (2 pi hbar tau)`` like
    :func:`~poisson_spot.decoherent.decoherent_intensity`.
    """
    if not ell > 0:
        raise ValueError("coherence length must be positive")
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    m, hbar, tau = cfg.mass, cfg.hbar, cfg.tau
    fp = free_params(cfg, cfg.t)
    b0 = obstacle_plane_params(cfg).B
    k0 = m / (2.0 * hbar * tau)
    kr = m / (2.0 * hbar * fp.r)
    u_half = q.half_width_sigmas * fp.b
    v_half = min(q.half_width_sigmas * ell, 2.0 * u_half)
    omega_u = 2.0 * (k0 + kr) * v_half
    omega_v = 2.0 * (k0 + kr) * u_half + 2.0 * k0 * np.max(np.abs(flat))
    u, wu = _nodes(u_half, omega_u, b0, q, "obstacle-plane centre integral")
    v, wv = _nodes(v_half, omega_v, min(ell, b0), q, "obstacle-plane separation integral")

    # g(v) = exp(-v^2/2l^2) * sum_u w_u exp(2 i k0 u v) psi(u + v/2) conj(psi(u - v/2))
    g = np.empty(v.size, dtype=complex)
    g_scale = np.empty(v.size)
    cols = max(1, _CHUNK // u.size)
    for start in range(0, v.size, cols):
        vv = v[None, start:start + cols]
        uu = u[:, None]
        terms = (obstacle_amplitude(cfg, uu + 0.5 * vv)
                 * np.conj(obstacle_amplitude(cfg, uu - 0.5 * vv))
                 * np.exp(2j * k0 * uu * vv))
        g[start:start + cols] = wu @ terms
        g_scale[start:start + cols] = wu @ np.abs(terms)
    damp = np.exp(-(v**2) / (2.0 * ell**2)) * wv
    g *= damp
    g_scale *= damp

    out = np.empty(flat.size, dtype=complex)
    rows = max(1, _CHUNK // v.size)
    for start in range(0, flat.size, rows):
        xi = flat[start:start + rows, None]
        out[start:start + rows] = np.exp(2j * k0 * xi * v[None, :]) @ g
    out *= m / (2.0 * math.pi * hbar * tau)
    scale = float(np.sum(g_scale)) * m / (2.0 * math.pi * hbar * tau)

    tol = np.maximum(1e-10 * np.abs(out), 64.0 * np.finfo(float).eps * scale)
    if np.any(np.abs(out.imag) > tol):
        worst = float(np.max(np.abs(out.imag) / np.maximum(np.abs(out), 1e-300)))
        raise ConsistencyError(f"density-matrix diagonal is not real (|Im|/|I| = {worst:.3g})")
    return out.real.reshape(x.shape)


def refinement_delta(evaluate, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Max change of ``evaluate(spec)`` when oscillation sampling is doubled.

    Relative to the peak magnitude of the base evaluation.
    """
    base = np.asarray(evaluate(q))
    fine = np.asarray(evaluate(q.refined()))
    return float(np.max(np.abs(fine - base)) / np.max(np.abs(base)))


def _peak_one_gap(reference, candidate) -> float:
    reference = np.asarray(reference, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    return float(np.max(np.abs(reference / np.max(reference) - candidate / np.max(candidate))))


def compare_coherent(cfg: PhysicalConfig, grid=None, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Sup-norm gap between closed-form and quadrature coherent intensity, relative to peak."""
    from .coherent import coherent_intensity, default_grid

    x = default_grid(cfg, 201) if grid is None else np.asarray(grid, dtype=float)
    closed = coherent_intensity(cfg, x)
    return float(np.max(np.abs(closed - oracle_coherent_intensity(cfg, x, q))) / np.max(closed))


def compare_decoherent(cfg: PhysicalConfig, ell: float, grid=None,
                       q: QuadratureSpec = QuadratureSpec()) -> float:
    """Sup-norm gap between peak-one closed-form and quadrature partially coherent profiles."""
    from .coherent import default_grid
    from .decoherent import decoherent_intensity

    if grid is None:
        blur = cfg.hbar * cfg.tau / (cfg.mass * ell) if math.isfinite(ell) else 0.0
        x = default_grid(cfg, 201, blur=blur)
    else:
        x = np.asarray(grid, dtype=float)
    return _peak_one_gap(decoherent_intensity(cfg, ell, x), oracle_decoherent_intensity(cfg, ell, x, q))


def compare_free(cfg: PhysicalConfig, elapsed: float, grid=None,
                 q: QuadratureSpec = QuadratureSpec()) -> float:
    """Max amplitude gap of the free packet, relative to peak magnitude."""
    from .core import psi_free

    if grid is None:
        grid = np.linspace(-5.0, 5.0, 201) * free_params(cfg, elapsed).b
    x = np.asarray(grid, dtype=float)
    closed = psi_free(cfg, x, elapsed)
    return float(np.max(np.abs(closed - oracle_psi_free(cfg, x, elapsed, q))) / np.max(np.abs(closed)))


def compare_slit(cfg: PhysicalConfig, grid=None, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Max amplitude gap of the unit-norm slit packet, relative to peak magnitude."""
    from .core import psi_slit, slit_params

    if grid is None:
        grid = np.linspace(-5.0, 5.0, 201) * slit_params(cfg).B
    x = np.asarray(grid, dtype=float)
    closed = psi_slit(cfg, x)
    return float(np.max(np.abs(closed - oracle_psi_slit(cfg, x, q))) / np.max(np.abs(closed)))
