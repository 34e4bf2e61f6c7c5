"""Sampled transverse intensity profiles and their normalizations."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class Normalization(str, Enum):
    RAW = "raw"
    PEAK_ONE = "peak_one"
    UNIT_AREA = "unit_area"

    @classmethod
    def parse(cls, value) -> "Normalization":
        if isinstance(value, cls):
            return value
        aliases = {"peak": cls.PEAK_ONE, "area": cls.UNIT_AREA}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown normalization {value!r}") from None


@dataclass(frozen=True)
class IntensityProfile:
    xs: np.ndarray
    values: np.ndarray
    normalization: Normalization = Normalization.RAW
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.size == 0:
            raise ValueError("profile grid must be a nonempty 1-D array")
        if values.shape != xs.shape:
            raise ValueError("values must have the same length as xs")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(values))):
            raise ValueError("profile grid and values must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("profile grid must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))

    def normalized(self, norm) -> "IntensityProfile":
        return normalize(self, norm)


def check_grid(grid) -> np.ndarray:
    xs = np.asarray(grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("grid must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(xs)):
        raise ValueError("grid must be finite")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("grid must be strictly increasing")
    return xs


def trapezoid(values, xs) -> float:
    if len(xs) < 2:
        return 0.0
    return float(np.trapezoid(values, xs)) if hasattr(np, "trapezoid") else float(np.trapz(values, xs))


def normalize(profile: IntensityProfile, norm) -> IntensityProfile:
    """Rescale ``profile`` to the requested convention.

    Normalizing an already normalized profile again is allowed; the raw scale
    is lost after the first call.
    """
    norm = Normalization.parse(norm)
    values = profile.values
    if norm is Normalization.PEAK_ONE:
        peak = values.max()
        if not peak > 0:
            raise ValueError("cannot peak-normalize a profile with no positive values")
        values = values / peak
    elif norm is Normalization.UNIT_AREA:
        area = trapezoid(values, profile.xs)
        if not area > 0:
            raise ValueError("cannot area-normalize a profile with nonpositive area")
        values = values / area
    return replace(profile, values=values, normalization=norm)


def symmetric_grid(half_width: float, points: int) -> np.ndarray:
    """Uniform grid on ``[-half_width, half_width]`` that is exactly mirror symmetric."""
    if points < 1:
        raise ValueError("points must be >= 1")
    if points == 1:
        return np.zeros(1)
    xs = np.linspace(-half_width, half_width, points)
    # linspace is not bitwise symmetric; mirror the left half
    half = points // 2
    xs[points - half:] = -xs[:half][::-1]
    if points % 2:
        xs[half] = 0.0
    return xs
