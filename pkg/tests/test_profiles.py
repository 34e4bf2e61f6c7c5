import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisson_spot.profiles import IntensityProfile, Normalization, check_grid, normalize, symmetric_grid


@pytest.mark.parametrize("text, expected", [("raw", Normalization.RAW), ("peak", Normalization.PEAK_ONE),
                                            ("peak_one", Normalization.PEAK_ONE),
                                            ("area", Normalization.UNIT_AREA),
                                            (Normalization.UNIT_AREA, Normalization.UNIT_AREA)])
def test_normalization_names(text, expected):
    assert Normalization.parse(text) is expected


def test_unknown_normalization():
    with pytest.raises(ValueError):
        Normalization.parse("loud")


@given(st.integers(1, 2001), st.floats(1e-9, 1.0))
def test_symmetric_grid(points, half):
    xs = symmetric_grid(half, points)
    assert xs.size == points
    np.testing.assert_array_equal(xs, -xs[::-1])
    if points % 2:
        assert xs[points // 2] == 0.0


def test_check_grid_rejects_bad_input():
    for bad in ([], [0.0, 0.0], [0.0, np.nan], [[0.0, 1.0]]):
        with pytest.raises(ValueError):
            check_grid(bad)


def test_profile_validation():
    with pytest.raises(ValueError):
        IntensityProfile(np.array([0.0, 1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        IntensityProfile(np.array([0.0, 1.0]), np.array([1.0, np.inf]))


def test_normalize_is_idempotent():
    xs = np.linspace(-1, 1, 101)
    profile = IntensityProfile(xs, 3 * np.exp(-xs**2))
    once = normalize(profile, "peak")
    assert normalize(once, "peak").values.max() == 1.0
    assert profile.normalized("raw") is profile or np.array_equal(profile.normalized("raw").values,
                                                                   profile.values)


def test_zero_profile_cannot_be_normalized():
    xs = np.linspace(-1, 1, 11)
    with pytest.raises(ValueError):
        normalize(IntensityProfile(xs, np.zeros_like(xs)), "peak")
