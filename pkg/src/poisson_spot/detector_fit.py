"""Finite detector aperture and fitting of the model to count-rate data."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, signal
from scipy.interpolate import PchipInterpolator

from .core import PhysicalConfig, PoissonSpotError
from .decoherent import decoherent_intensity, decoherent_params
from .profiles import IntensityProfile, Normalization

FITTABLE = ("ell", "sigma_d")
_UNIFORM_RTOL = 1e-9
_KERNEL_SIGMAS = 8.0


class RankDeficiencyError(PoissonSpotError):
    """The model is (numerically) constant over the data abscissae."""


class GridError(PoissonSpotError, ValueError):
    """Profile grid unsuitable for the requested convolution."""


@dataclass(frozen=True)
class DetectorSpec:
    sigma_d: float = 0.0

    def __post_init__(self):
        if not (self.sigma_d >= 0 and math.isfinite(self.sigma_d)):
            raise ValueError("sigma_d must be finite and >= 0")


@dataclass(frozen=True)
class DataSet:
    """Measured count rates at transverse positions (SI units)."""

    xs: np.ndarray
    counts: np.ndarray
    errors: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if xs.ndim != 1 or xs.size == 0:
            raise ValueError("empty dataset")
        if counts.shape != xs.shape:
            raise ValueError("xs and counts must have equal lengths")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("dataset xs must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "counts", counts)
        if self.errors is not None:
            errors = np.asarray(self.errors, dtype=float)
            if errors.shape != xs.shape:
                raise ValueError("errors must match xs in length")
            if np.any(~(errors > 0)):
                raise ValueError("errors must be strictly positive")
            object.__setattr__(self, "errors", errors)


@dataclass
class FitResult:
    a: float
    b: float
    ell: float | None
    sigma_d: float | None
    residual_norm: float
    per_point_residuals: np.ndarray
    chi2: float | None
    fitted_flags: frozenset = frozenset()
    a_err: float = math.nan
    b_err: float = math.nan
    at_bound: tuple = ()
    meta: dict = field(default_factory=dict)


def uniform_spacing(xs) -> float | None:
    """Grid step if ``xs`` is uniform to ``1e-9`` relative, else ``None``."""
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        return None
    steps = np.diff(xs)
    h = (xs[-1] - xs[0]) / (xs.size - 1)
    return h if np.all(np.abs(steps - h) <= _UNIFORM_RTOL * h) else None


def resample_uniform(profile: IntensityProfile, points: int | None = None) -> IntensityProfile:
    n = points or profile.xs.size
    xs = np.linspace(profile.xs[0], profile.xs[-1], n)
    values = PchipInterpolator(profile.xs, profile.values)(xs)
    return replace(profile, xs=xs, values=values)


def convolve_detector(profile: IntensityProfile, det: DetectorSpec,
                      resample: bool = False) -> IntensityProfile:
    """Smooth ``profile`` with the unnormalized aperture ``exp(-x^2 / 2 sigma_d^2)``.

    Trapezoid weights on the uniform grid; samples beyond the grid count as
    zero. ``sigma_d == 0`` returns the profile unchanged.
    """
    if det.sigma_d == 0:
        return profile
    h = uniform_spacing(profile.xs)
    if h is None:
        if not resample:
            raise GridError("convolution needs a uniform grid (pass resample=True)")
        profile = resample_uniform(profile)
        h = uniform_spacing(profile.xs)
    if profile.xs.size < 2:
        raise GridError("convolution needs at least two samples")
    if h > det.sigma_d / 4.0:
        raise GridError(f"grid spacing {h:.3g} m under-resolves sigma_d={det.sigma_d:.3g} m")
    half = math.ceil(_KERNEL_SIGMAS * det.sigma_d / h)
    offsets = h * np.arange(-half, half + 1)
    kernel = np.exp(-(offsets**2) / (2.0 * det.sigma_d**2))
    weighted = profile.values * h
    weighted[0] *= 0.5
    weighted[-1] *= 0.5
    full = signal.convolve(weighted, kernel, mode="full", method="direct"
                           if kernel.size * weighted.size < 4_000_000 else "fft")
    values = full[half:half + profile.xs.size]
    meta = dict(profile.meta, sigma_d=det.sigma_d)
    return IntensityProfile(profile.xs, values, Normalization.RAW, meta)


def model_values_at(model: IntensityProfile, xs) -> np.ndarray:
    """Model sampled at ``xs``: exact when the grids coincide, else PCHIP."""
    xs = np.asarray(xs, dtype=float)
    if model.xs.shape == xs.shape and np.array_equal(model.xs, xs):
        return model.values
    if xs[0] < model.xs[0] or xs[-1] > model.xs[-1]:
        raise ValueError("data abscissae extend beyond the model grid")
    return PchipInterpolator(model.xs, model.values)(xs)


def _solve_affine(m, y, errors):
    """Weighted least squares for ``y ~ a + b m`` in closed form."""
    w = np.ones_like(y) if errors is None else 1.0 / errors**2
    sw = w.sum()
    m_bar = (w @ m) / sw
    y_bar = (w @ y) / sw
    dm = m - m_bar
    smm = w @ (dm * dm)
    if not smm > 1e-24 * (w @ (m * m)):
        raise RankDeficiencyError("model is constant over the data abscissae")
    b = (w @ (dm * (y - y_bar))) / smm
    a = y_bar - b * m_bar
    residuals = y - (a + b * m)
    weighted_ss = float(w @ (residuals * residuals))
    if errors is None:
        dof = y.size - 2
        scale2 = weighted_ss / dof if dof > 0 else math.nan
    else:
        scale2 = 1.0
    b_err = math.sqrt(scale2 / smm)
    a_err = math.sqrt(scale2 * (1.0 / sw + m_bar**2 / smm))
    return a, b, residuals, weighted_ss, a_err, b_err


def affine_fit(model: IntensityProfile, data: DataSet) -> FitResult:
    """Best ``counts ~ a + b * model`` (weighted by ``1/errors**2`` when present)."""
    m = model_values_at(model, data.xs)
    a, b, residuals, weighted_ss, a_err, b_err = _solve_affine(m, data.counts, data.errors)
    return FitResult(
        a=float(a), b=float(b),
        ell=model.meta.get("ell"), sigma_d=model.meta.get("sigma_d"),
        residual_norm=float(np.linalg.norm(residuals)),
        per_point_residuals=residuals,
        chi2=weighted_ss if data.errors is not None else None,
        a_err=a_err, b_err=b_err,
        meta={"residual_space": "counts", "weighted": data.errors is not None},
    )


def model_grid_step(cfg: PhysicalConfig, ell: float, extent: float) -> float:
    """Grid step that resolves every Gaussian and the chirp of the partially coherent profile."""
    dp = decoherent_params(cfg, ell)
    k = cfg.mass**2 / (4.0 * cfg.hbar**2 * cfg.tau**2)
    widths = [math.sqrt(dp.eta / k), math.sqrt(dp.eta_prime / k), 1.0 / math.sqrt(dp.alpha)]
    h = min(widths) / 8.0
    if dp.delta > 0:
        h = min(h, 2.0 * math.pi / (16.0 * 2.0 * dp.delta * extent))
    return h


def model_profile(cfg: PhysicalConfig, ell: float, sigma_d: float, xs,
                  include_gouy: bool = True, norm=Normalization.PEAK_ONE) -> IntensityProfile:
    """Detector-convolved partially coherent profile sampled at ``xs``.

    The profile is built on a uniform grid through zero that extends
    ``6 sigma_d`` beyond ``xs``, convolved, normalized on that grid, and
    then sampled at ``xs``.
    """
    xs = np.asarray(xs, dtype=float)
    pad = 6.0 * sigma_d
    lo, hi = xs[0] - pad, xs[-1] + pad
    extent = max(abs(lo), abs(hi))
    h = model_grid_step(cfg, ell, extent)
    if sigma_d > 0:
        h = min(h, sigma_d / 4.0)
    h = min(h, (hi - lo) / 200.0) if hi > lo else h
    step = uniform_spacing(xs)
    if step is not None and abs(xs[0] / step - round(xs[0] / step)) < 1e-9:
        # data on a lattice through zero: refine it so data points are grid nodes
        h = step / math.ceil(step / h)
    grid = h * np.arange(math.floor(lo / h), math.ceil(hi / h) + 1)
    values = decoherent_intensity(cfg, ell, grid, include_gouy)
    fine = IntensityProfile(grid, values, Normalization.RAW,
                            meta={"model": "decoherent+detector", "ell": ell})
    fine = convolve_detector(fine, DetectorSpec(sigma_d))
    fine = fine.normalized(norm)
    sampled = _sample_on_lattice(fine, xs)
    return IntensityProfile(xs, sampled, fine.normalization,
                            meta={"model": "decoherent+detector", "ell": ell, "sigma_d": sigma_d,
                                  "include_gouy": include_gouy, "config": cfg})


def _sample_on_lattice(profile: IntensityProfile, xs):
    h = profile.xs[1] - profile.xs[0]
    idx = np.rint((xs - profile.xs[0]) / h).astype(int)
    if (idx.min() >= 0 and idx.max() < profile.xs.size
            and np.all(np.abs(profile.xs[idx] - xs) <= 1e-9 * h)):
        return profile.values[idx]
    return model_values_at(profile, xs)


def nonlinear_fit(cfg: PhysicalConfig, data: DataSet, free=(), bounds=None, *,
                  ell: float, sigma_d: float = 0.0, include_gouy: bool = True,
                  points_per_decade: int = 25) -> FitResult:
    """Fit coherence length and/or detector width by variable projection.

    For every candidate ``(ell, sigma_d)`` the affine coefficients are solved
    in closed form. A log-spaced grid search over ``bounds`` picks the start
    point of a Nelder-Mead refinement in log-parameter space. Parameters not
    in ``free`` stay at the given ``ell`` / ``sigma_d``.
    """
    unknown = (set(free) | set(bounds or ())) - set(FITTABLE)
    if unknown:
        raise ValueError(f"unknown fit parameters {sorted(unknown)}")
    free = tuple(p for p in FITTABLE if p in set(free))
    fixed = {"ell": ell, "sigma_d": sigma_d}
    if not free:
        result = affine_fit(model_profile(cfg, ell, sigma_d, data.xs, include_gouy), data)
        result.meta["evaluations"] = 1
        return result

    bounds = bounds or {}
    log_bounds = []
    for name in free:
        if name not in bounds:
            raise ValueError(f"bounds required for free parameter {name!r}")
        lo, hi = (float(v) for v in bounds[name])
        if not (0 < lo < hi and math.isfinite(hi)):
            raise ValueError(f"bounds for {name!r} must be finite, positive and increasing")
        log_bounds.append((math.log(lo), math.log(hi)))

    evaluations = 0

    def params_of(theta):
        p = dict(fixed)
        p.update({name: math.exp(v) for name, v in zip(free, theta)})
        return p

    def objective(theta):
        nonlocal evaluations
        evaluations += 1
        p = params_of(theta)
        try:
            m = model_profile(cfg, p["ell"], p["sigma_d"], data.xs, include_gouy).values
            return _solve_affine(m, data.counts, data.errors)[3]
        except (RankDeficiencyError, ValueError):
            return math.inf

    axes = []
    for lo, hi in log_bounds:
        decades = (hi - lo) / math.log(10.0)
        axes.append(np.linspace(lo, hi, max(2, int(round(points_per_decade * decades)) + 1)))
    best_theta, best_value = None, math.inf
    for theta in itertools.product(*axes):
        value = objective(theta)
        if value < best_value:
            best_theta, best_value = np.array(theta), value
    if best_theta is None:
        raise RankDeficiencyError("no admissible model over the search grid")

    steps = [ax[1] - ax[0] for ax in axes]
    simplex = [best_theta] + [best_theta + np.eye(len(free))[i] * steps[i] for i in range(len(free))]
    simplex = np.array([np.clip(s, [b[0] for b in log_bounds], [b[1] for b in log_bounds])
                        for s in simplex])
    for i in range(1, len(simplex)):
        if np.allclose(simplex[i], simplex[0]):
            simplex[i] = best_theta - np.eye(len(free))[i - 1] * steps[i - 1]
    refined = optimize.minimize(objective, best_theta, method="Nelder-Mead", bounds=log_bounds,
                                options={"initial_simplex": simplex, "xatol": 1e-6,
                                         "fatol": 1e-12 * max(best_value, 1e-300),
                                         "maxiter": 400})
    theta = refined.x if refined.fun <= best_value else best_theta

    at_bound = tuple(name for name, v, (lo, hi) in zip(free, theta, log_bounds)
                     if min(v - lo, hi - v) < 1e-6)
    if at_bound:
        warnings.warn(f"fit parameter(s) {', '.join(at_bound)} ended on a search bound",
                      RuntimeWarning, stacklevel=2)

    p = params_of(theta)
    result = affine_fit(model_profile(cfg, p["ell"], p["sigma_d"], data.xs, include_gouy), data)
    result.fitted_flags = frozenset(free)
    result.at_bound = at_bound
    result.meta.update(evaluations=evaluations, grid_points=int(np.prod([a.size for a in axes])),
                       optimizer_message=str(refined.message))
    return result


def screen_blur_width(cfg: PhysicalConfig, ell: float) -> float:
    """Width ``hbar tau / (m ell)`` of the Gaussian by which loss of coherence smooths the screen pattern."""
    return cfg.hbar * cfg.tau / (cfg.mass * ell)


def synthetic_dataset(cfg: PhysicalConfig, ell: float, sigma_d: float, xs, a: float, b: float,
                      noise_fraction: float = 0.0, rng=None, with_errors: bool = False) -> DataSet:
    """Counts ``a + b * model`` plus i.i.d. Gaussian noise.

    The noise standard deviation is ``noise_fraction`` times the range of the
    noiseless counts.
    """
    model = model_profile(cfg, ell, sigma_d, xs).values
    counts = a + b * model
    sigma = noise_fraction * float(np.ptp(counts))
    if sigma > 0:
        rng = np.random.default_rng(rng)
        counts = counts + rng.normal(0.0, sigma, size=counts.shape)
    errors = np.full(counts.shape, sigma) if with_errors and sigma > 0 else None
    return DataSet(np.asarray(xs, dtype=float), counts, errors)
