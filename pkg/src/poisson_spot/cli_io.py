"""Run configuration files and CSV formats.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment.
Dimensional values need an explicit unit suffix (``50um``, ``20ms``,
``3.34e-27kg``). CSV files use a header line, comma separators and
shortest round-trip float formatting.
"""
from __future__ import annotations

import csv
import json
import math
import re
from decimal import Decimal
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import HBAR, PhysicalConfig, PoissonSpotError
from .decoherent import CoherenceMode, CoherenceModel
from .detector_fit import FITTABLE, DataSet, DetectorSpec, FitResult
from .profiles import IntensityProfile, Normalization, symmetric_grid

UM = 1e-6
UM_PER_M = 1e6  # multiplying keeps round lattices round in the output

LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}
TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}
MASS = {"kg": 1.0, "g": 1e-3, "amu": 1.66053906660e-27, "u": 1.66053906660e-27}
ACTION = {"Js": 1.0, "J*s": 1.0, "J.s": 1.0}
DECOHERENCE_RATE = {"/m2/s": 1.0, "/um2/s": 1e12, "/mm2/s": 1e6}

# key -> unit table (None: dimensionless / free text)
KEYS = {
    "mass": MASS, "sigma0": LENGTH, "beta": LENGTH, "t": TIME, "tau": TIME, "hbar": ACTION,
    "coherence_mode": None, "ell": LENGTH, "ell0": LENGTH, "lambda_rate": DECOHERENCE_RATE,
    "sigma_d": LENGTH, "grid": None, "normalization": None, "include_gouy": None,
    "fit_free": None, "ell_bounds": None, "sigma_d_bounds": None,
    "profile_out": None, "fit_out": None, "residuals_out": None,
}
REQUIRED = ("mass", "sigma0", "beta", "t", "tau")

_QUANTITY = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([^\d\s.+-]\S*)$")


class ConfigError(PoissonSpotError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


class DataFormatError(PoissonSpotError, ValueError):
    pass


def parse_quantity(text: str, units: dict, key=None, line=None) -> float:
    """``"50um"`` -> ``5e-05`` using the given unit table."""
    match = _QUANTITY.match(text.strip())
    if not match:
        raise ConfigError(f"expected a number with a unit suffix, got {text!r}", key, line)
    number, unit = match.groups()
    if unit not in units:
        raise ConfigError(f"bad unit suffix {unit!r}; allowed: {', '.join(units)}", key, line)
    # exact decimal product, rounded once: "50um" gives 5e-05, not 4.9999999999999996e-05
    return float(Decimal(number) * Decimal(repr(units[unit])))


def parse_range(text: str, units: dict, key=None, line=None, default_unit=None):
    """``"lo:hi"`` or ``"lo:hi:n"`` with unit suffixes on lo and hi."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"expected MIN:MAX or MIN:MAX:N, got {text!r}", key, line)

    def value(s):
        s = s.strip()
        if default_unit is not None and _QUANTITY.match(s) is None:
            s = s + default_unit
        return parse_quantity(s, units, key, line)

    lo, hi = value(parts[0]), value(parts[1])
    if not lo < hi:
        raise ConfigError("range minimum must be below maximum", key, line)
    if len(parts) == 2:
        return lo, hi
    try:
        n = int(parts[2])
    except ValueError:
        raise ConfigError(f"point count must be an integer, got {parts[2]!r}", key, line) from None
    if n < 2:
        raise ConfigError("grid needs at least 2 points", key, line)
    return lo, hi, n


def grid_points(lo: float, hi: float, n: int) -> np.ndarray:
    """Uniform grid; mirror-symmetric with an exact zero when ``lo == -hi``."""
    if lo == -hi:
        return symmetric_grid(hi, n)
    return np.linspace(lo, hi, n)


def _parse_bool(text, key, line):
    value = text.strip().lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}", key, line)


@dataclass
class RunConfig:
    physical: PhysicalConfig
    coherence: CoherenceModel | None = None
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    grid: tuple | None = None  # (min_m, max_m, points) or None for auto
    normalization: Normalization = Normalization.PEAK_ONE
    include_gouy: bool = True
    fit_free: tuple = ()
    fit_bounds: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def ell(self) -> float | None:
        from .decoherent import coherence_length

        if self.coherence is None:
            return None
        return coherence_length(self.coherence, self.physical.tau)


def parse_config(text: str, source: str | None = None) -> RunConfig:
    raw, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=lineno)
        key, value = (s.strip() for s in content.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key, lineno)
        if key in raw:
            raise ConfigError("duplicate key", key, lineno)
        if not value:
            raise ConfigError("empty value", key, lineno)
        raw[key], lines[key] = value, lineno

    for key in REQUIRED:
        if key not in raw:
            raise ConfigError("missing required key", key)

    values = {}
    for key, text_value in raw.items():
        units = KEYS[key]
        if units is not None:
            v = parse_quantity(text_value, units, key, lines[key])
            if key == "lambda_rate":
                if not (v >= 0 and math.isfinite(v)):
                    raise ConfigError("value must be >= 0", key, lines[key])
            elif key == "sigma_d":
                if not (v >= 0 and math.isfinite(v)):
                    raise ConfigError("value must be >= 0", key, lines[key])
            elif not (v > 0 and math.isfinite(v)):
                raise ConfigError("value must be positive", key, lines[key])
            values[key] = v

    physical = PhysicalConfig(values["mass"], values["sigma0"], values["beta"], values["t"],
                              values["tau"], values.get("hbar", HBAR))

    coherence = None
    mode_text = raw.get("coherence_mode")
    if mode_text is not None:
        try:
            mode = CoherenceMode(mode_text.strip())
        except ValueError:
            raise ConfigError(f"unknown coherence mode {mode_text!r}", "coherence_mode",
                              lines["coherence_mode"]) from None
    else:
        mode = CoherenceMode.DIRECT_ELL if "ell" in values else (
            CoherenceMode.EVOLVED_ELL if "ell0" in values else None)
    if mode is CoherenceMode.DIRECT_ELL:
        if "ell" not in values:
            raise ConfigError("direct_ell mode needs 'ell'", "ell")
        coherence = CoherenceModel(mode=mode, ell=values["ell"])
    elif mode is CoherenceMode.EVOLVED_ELL:
        if "ell0" not in values:
            raise ConfigError("evolved_ell mode needs 'ell0'", "ell0")
        coherence = CoherenceModel(ell0=values["ell0"], lambda_rate=values.get("lambda_rate", 0.0),
                                   mode=mode)

    grid = None
    if "grid" in raw and raw["grid"].strip().lower() != "auto":
        grid = parse_range(raw["grid"], LENGTH, "grid", lines["grid"])
        if len(grid) != 3:
            raise ConfigError("grid needs MIN:MAX:N", "grid", lines["grid"])

    normalization = Normalization.PEAK_ONE
    if "normalization" in raw:
        try:
            normalization = Normalization.parse(raw["normalization"])
        except ValueError as exc:
            raise ConfigError(str(exc), "normalization", lines["normalization"]) from None

    include_gouy = True
    if "include_gouy" in raw:
        include_gouy = _parse_bool(raw["include_gouy"], "include_gouy", lines["include_gouy"])

    fit_free = ()
    if "fit_free" in raw:
        names = [s.strip() for s in raw["fit_free"].split(",") if s.strip()]
        bad = [n for n in names if n not in FITTABLE and n != "none"]
        if bad:
            raise ConfigError(f"unknown fit parameter(s) {bad}", "fit_free", lines["fit_free"])
        fit_free = tuple(n for n in FITTABLE if n in names)

    bounds = {}
    for name in FITTABLE:
        key = f"{name}_bounds"
        if key in raw:
            rng = parse_range(raw[key], LENGTH, key, lines[key])
            if len(rng) != 2 or rng[0] <= 0:
                raise ConfigError("bounds need positive MIN:MAX", key, lines[key])
            bounds[name] = rng

    outputs = {k: raw[k] for k in ("profile_out", "fit_out", "residuals_out") if k in raw}
    return RunConfig(physical=physical, coherence=coherence,
                     detector=DetectorSpec(values.get("sigma_d", 0.0)), grid=grid,
                     normalization=normalization, include_gouy=include_gouy, fit_free=fit_free,
                     fit_bounds=bounds, outputs=outputs, source=source)


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def format_float(value) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(value))


def _read_csv(path, expected_headers):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header not in expected_headers:
        raise DataFormatError(f"{path}: line 1: expected header {','.join(expected_headers[0])}")
    parsed = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(f"{path}: line {lineno}: expected {len(header)} fields")
        try:
            parsed.append([float(c) for c in row])
        except ValueError:
            raise DataFormatError(f"{path}: line {lineno}: malformed number") from None
        if not all(math.isfinite(v) for v in parsed[-1]):
            raise DataFormatError(f"{path}: line {lineno}: non-finite value")
    if not parsed:
        raise DataFormatError(f"{path}: empty dataset")
    return header, np.array(parsed)


def load_dataset(path) -> DataSet:
    """CSV with header ``x_um,rate`` or ``x_um,rate,rate_err``; returns SI positions."""
    header, table = _read_csv(path, [["x_um", "rate"], ["x_um", "rate", "rate_err"]])
    order = np.argsort(table[:, 0], kind="stable")
    table = table[order]
    if np.any(np.diff(table[:, 0]) == 0):
        raise DataFormatError(f"{path}: duplicate x_um values")
    errors = table[:, 2] if len(header) == 3 else None
    if errors is not None and np.any(errors <= 0):
        raise DataFormatError(f"{path}: rate_err must be positive")
    return DataSet(table[:, 0] * UM, table[:, 1], errors)


def write_dataset(path, data: DataSet) -> None:
    header = "x_um,rate" if data.errors is None else "x_um,rate,rate_err"
    lines = [header]
    for i, x in enumerate(data.xs):
        cells = [format_float(x * UM_PER_M), format_float(data.counts[i])]
        if data.errors is not None:
            cells.append(format_float(data.errors[i]))
        lines.append(",".join(cells))
    _write_lines(path, lines)


def profile_csv(profile: IntensityProfile) -> str:
    lines = ["x_um,intensity"]
    lines += [f"{format_float(x * UM_PER_M)},{format_float(v)}" for x, v in zip(profile.xs, profile.values)]
    return "\n".join(lines) + "\n"


def write_profile(path, profile: IntensityProfile) -> None:
    Path(path).write_text(profile_csv(profile), encoding="utf-8")


def load_profile(path) -> IntensityProfile:
    _, table = _read_csv(path, [["x_um", "intensity"]])
    return IntensityProfile(table[:, 0] * UM, table[:, 1], Normalization.RAW,
                            meta={"source": str(path)})


def _write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def fit_report(result: FitResult) -> str:
    """JSON report of a fit (lengths in metres)."""
    report = {
        "a": result.a, "b": result.b, "a_err": result.a_err, "b_err": result.b_err,
        "ell_m": result.ell, "sigma_d_m": result.sigma_d,
        "residual_norm": result.residual_norm, "chi2": result.chi2,
        "n_points": int(len(result.per_point_residuals)),
        "fitted": sorted(result.fitted_flags), "at_bound": list(result.at_bound),
        "residual_space": result.meta.get("residual_space", "counts"),
        "evaluations": result.meta.get("evaluations"),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_residuals(path, data: DataSet, model_values, result: FitResult) -> None:
    lines = ["x_um,rate,model,residual"]
    for x, y, m, r in zip(data.xs, data.counts, model_values, result.per_point_residuals):
        lines.append(",".join(format_float(v) for v in (x * UM_PER_M, y, result.a + result.b * m, r)))
    _write_lines(path, lines)
