import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from poisson_spot.coherent import coherent_gouy_difference, coherent_intensity
from poisson_spot.core import (
    PhysicalConfig,
    characteristic_time,
    free_params,
    psi_free,
    psi_slit,
    slit_params,
)
from poisson_spot.decoherent import (
    CoherenceMode,
    CoherenceModel,
    coherence_length,
    decoherent_intensity,
    decoherent_params,
    decoherent_profile,
    gouy_partial,
)
from poisson_spot.oracle import compare_decoherent
from poisson_spot.profiles import Normalization
from reference import D2_MASS, DEMO, DEMO_ELL, APPARATUS, APPARATUS_ELL


def blurred_coherent(cfg, ell, x):
    """Coherent |psi_free - psi_slit|^2 smoothed by a unit-area Gaussian of width hbar tau/(m ell)."""
    s = cfg.hbar * cfg.tau / (cfg.mass * ell)
    width = max(free_params(cfg, cfg.t + cfg.tau).b, slit_params(cfg).B)
    span = np.max(np.abs(x)) + 12 * s + 12 * width
    y = np.linspace(-span, span, 200_001)
    coh = np.abs(psi_free(cfg, y, cfg.t + cfg.tau) - psi_slit(cfg, y)) ** 2
    h = y[1] - y[0]
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        kernel = np.exp(-((xi - y) ** 2) / (2 * s * s)) / (math.sqrt(2 * math.pi) * s)
        out[i] = np.sum(coh * kernel) * h
    return out


@pytest.mark.parametrize("cfg, ell", [(APPARATUS, APPARATUS_ELL), (DEMO, DEMO_ELL), (DEMO, 20e-6)],
                         ids=["apparatus", "partial_demo", "demo-20um"])
def test_equals_blurred_coherent_pattern(cfg, ell):
    x = np.linspace(-300e-6, 300e-6, 41)
    expected = blurred_coherent(cfg, ell, x)
    got = decoherent_intensity(cfg, ell, x)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-7 * expected.max())


def test_large_ell_is_coherent():
    x = np.linspace(-400e-6, 400e-6, 201)
    coh = coherent_intensity(DEMO, x)
    np.testing.assert_allclose(decoherent_intensity(DEMO, 1e3, x), coh, rtol=0, atol=1e-10 * coh.max())


def test_phase_limits():
    assert abs(gouy_partial(DEMO, 1e6) - coherent_gouy_difference(DEMO)) < 1e-12
    assert abs(gouy_partial(DEMO, 1e-12)) < 1e-6
    assert gouy_partial(DEMO, 1e-300) == 0.0


configs = st.builds(
    PhysicalConfig,
    mass=st.floats(1e-27, 1e-25),
    sigma0=st.floats(5e-6, 2e-4),
    beta=st.floats(5e-6, 5e-4),
    t=st.floats(1e-4, 0.1),
    tau=st.floats(1e-4, 0.1),
)


@settings(max_examples=60, deadline=None)
@given(configs, st.floats(-8, 1), st.floats(0.01, 2.0))
def test_phase_monotone_in_ell_and_shares_sign(cfg, log_ell, factor):
    ell = 10.0**log_ell
    mu_small, mu_large = gouy_partial(cfg, ell), gouy_partial(cfg, ell * (1 + factor))
    assert mu_large <= mu_small <= 0
    mu = coherent_gouy_difference(cfg)
    assert mu_large >= mu - 1e-12


@settings(max_examples=60, deadline=None)
@given(configs, st.floats(-7, 0))
def test_intensity_nonnegative(cfg, log_ell):
    ell = 10.0**log_ell
    s = cfg.hbar * cfg.tau / (cfg.mass * ell)
    assume(s < 1.0)
    x = np.linspace(-5, 5, 101) * (cfg.sigma0 + s)
    assert np.all(decoherent_intensity(cfg, ell, x) >= 0)


def test_partial_demo_visibility_floor():
    profile = decoherent_profile(DEMO, DEMO_ELL, norm=Normalization.PEAK_ONE)
    assert profile.values.min() > 0
    coherent_floor = coherent_intensity(DEMO, profile.xs)
    assert profile.values.min() > coherent_floor.min() / coherent_floor.max()


def test_partial_demo_phase_changes_centre():
    on = decoherent_intensity(DEMO, DEMO_ELL, [0.0], include_gouy=True)[0]
    off = decoherent_intensity(DEMO, DEMO_ELL, [0.0], include_gouy=False)[0]
    assert on != pytest.approx(off, rel=1e-3)


@pytest.mark.parametrize("tau", [5e-3, 10e-3, 20e-3, 40e-3])
def test_coherence_orders_phase(tau):
    cfg = PhysicalConfig(D2_MASS, 50e-6, 60e-6, 20e-3, tau)
    assert abs(gouy_partial(cfg, 1.0)) > abs(gouy_partial(cfg, 100e-6))


def test_params_positive():
    dp = decoherent_params(APPARATUS, APPARATUS_ELL)
    for value in (dp.eta, dp.eta_prime, dp.alpha, dp.delta, dp.C):
        assert value > 0


def test_apparatus_profile_is_single_bump():
    xs = np.linspace(-200e-6, 200e-6, 401)
    values = decoherent_profile(APPARATUS, APPARATUS_ELL, xs, norm="peak").values
    assert values[200] == pytest.approx(1.0, abs=1e-3)
    assert np.all(np.diff(values[:201]) > 0)


def test_oracle_agreement_apparatus():
    assert compare_decoherent(APPARATUS, APPARATUS_ELL) < 1e-10


def test_coherence_length_modes():
    assert coherence_length(CoherenceModel(ell=2e-6), 1.0) == 2e-6
    evolved = CoherenceModel(ell0=1e-3, lambda_rate=0.0, mode="evolved_ell")
    assert evolved.mode is CoherenceMode.EVOLVED_ELL
    assert coherence_length(evolved, 0.5) == 1e-3
    rate = CoherenceModel(ell0=1e-3, lambda_rate=3e12, mode="evolved_ell")
    assert coherence_length(rate, 0.01) == pytest.approx(1e-3 / math.sqrt(1 + 2e10 * 1e-6))
    saturated = CoherenceModel(lambda_rate=3e12, mode="evolved_ell")
    assert coherence_length(saturated, 0.01) == pytest.approx(math.sqrt(1.5 / 3e10))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-7, 1e-2), st.floats(1e6, 1e14), st.floats(1e-4, 1.0), st.floats(1.01, 5.0))
def test_coherence_length_shrinks_with_time(ell0, rate, tau, factor):
    model = CoherenceModel(ell0=ell0, lambda_rate=rate, mode="evolved_ell")
    assert coherence_length(model, tau * factor) <= coherence_length(model, tau) <= ell0


def test_coherence_model_validation():
    with pytest.raises(ValueError):
        CoherenceModel()
    with pytest.raises(ValueError):
        CoherenceModel(ell0=-1.0, mode="evolved_ell")
    with pytest.raises(ValueError):
        CoherenceModel(ell0=1.0, lambda_rate=-1.0, mode="evolved_ell")
    with pytest.raises(ValueError):
        decoherent_intensity(DEMO, 0.0, [0.0])


def test_near_field_characteristic_time():
    # apparatus flight is short compared with the characteristic time
    assert APPARATUS.t < 0.1 * characteristic_time(APPARATUS)
