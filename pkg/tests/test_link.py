import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsc.errors import DomainError, ValidationError, ValidityWarning
from qsc.eve import ActiveEveParams, solve_active_eve
from qsc.link import (ConditionalMoments, SystemParams, active_moments, ase_moments, binary_entropy,
                      error_probability, modes_per_bit, opa_moments, q_function, shannon_rate_bps,
                      storage_correlation, transmissivity)
from qsc.oracle import covariance_composition_moments

NOMINAL = SystemParams()


@pytest.mark.parametrize("L, expected", [(0, 1.0), (50, 0.1), (100, 0.01)])
def test_transmissivity(L, expected):
    assert transmissivity(0.2, L) == pytest.approx(expected, rel=1e-14)


def test_transmissivity_domain():
    with pytest.raises(DomainError):
        transmissivity(0.2, -1)


def test_modes_per_bit_and_warning():
    assert modes_per_bit(2e12, 1e10) == 200
    with pytest.warns(ValidityWarning):
        modes_per_bit(2e12, 2e10)
    with pytest.raises(DomainError):
        SystemParams(W=1e9, R=1e10)


def test_system_params_validation():
    for bad in ({"eta": 0.0}, {"eta": 1.2}, {"G_B": 0.5}, {"kappa_B": 1.0}, {"f": 1.5}, {"beta": 0.0},
                {"N_S": -1.0}, {"kappa_I": 0.0}):
        with pytest.raises(DomainError):
            SystemParams(**bad)


def test_derived_active_source_parameters():
    p = SystemParams(N_S=0.1)
    assert p.kappa_A == pytest.approx(0.901, rel=1e-14)
    assert p.N_SPDC == pytest.approx(1.10988e-3, rel=1e-5)
    # the two sources add up to N_S photons
    assert p.kappa_A * p.N_SPDC + (1 - p.kappa_A) * p.N_ASE == pytest.approx(p.N_S, rel=1e-14)
    q = p.with_spdc_brightness(1e-3)
    assert q.N_SPDC == pytest.approx(1e-3, rel=1e-12)


# ---------------------------------------------------------------- OPA

def test_opa_no_signal_no_discrimination():
    m = opa_moments(NOMINAL.replace(N_S=0.0))
    assert m.mu0 == m.mu1
    assert error_probability(m) == 0.5


def test_opa_gain_domain():
    with pytest.raises(DomainError):
        opa_moments(NOMINAL.replace(G_A=1.0))


def test_opa_weak_gain_limit():
    # the bit-dependent term vanishes as sqrt(G_A - 1)
    gaps = []
    for excess in (1e-14, 1e-12):
        p = NOMINAL.replace(G_A=1 + excess)
        m = opa_moments(p)
        limit = p.M * p.eta * p.G_A * p.idler_transmissivity * p.N_S
        assert m.mu0 == pytest.approx(limit, rel=1e-2)
        assert m.mu1 == pytest.approx(limit, rel=1e-2)
        gaps.append((m.mu0 - m.mu1) / limit)
    assert gaps[0] / gaps[1] == pytest.approx(0.1, rel=1e-2)


def test_opa_full_parameter_set_against_composition():
    p = SystemParams(eta=0.9, L_km=50, G_A=1 + 1e-3, G_B=1e4, N_B=1e4, N_S=1e-3)
    assert p.M == 200 and p.kappa_S == pytest.approx(0.1)
    m = opa_moments(p)
    for bit, mu, sigma in ((0, m.mu0, m.sigma0), (1, m.mu1, m.sigma1)):
        mean, var = covariance_composition_moments(p, bit)
        assert mean == pytest.approx(mu, rel=1e-9)
        assert var == pytest.approx(sigma ** 2, rel=1e-9)


# ---------------------------------------------------------------- ASE / homodyne

def test_ase_example_values():
    p = SystemParams(N_S=0.1)
    m = ase_moments(p)
    assert m.mu0 == pytest.approx(1.1384e5, rel=1e-4)
    assert m.mu1 == -m.mu0
    # sqrt(200 * (0.9 * 1101 + 1.62 * 102 * 1e4)) = 57504.6
    assert m.sigma0 == m.sigma1 == pytest.approx(57504.6, rel=1e-6)
    assert m.snr_argument == pytest.approx(1.97971, rel=1e-5)
    assert error_probability(m) == pytest.approx(0.023869, rel=1e-3)


def test_ase_no_signal():
    m = ase_moments(NOMINAL.replace(N_S=0.0))
    assert m.mu0 == 0.0
    assert error_probability(m) == 0.5


def test_ase_requires_reference():
    with pytest.raises(DomainError):
        ase_moments(NOMINAL.replace(N_LO=0.0))


@pytest.mark.parametrize("N", [1e4, 1e5])
@pytest.mark.parametrize("N_S", [1e-3, 1e-2, 0.05])
def test_ase_asymptotic_bounds(N, N_S):
    p = SystemParams(N_B=N, N_LO=N, G_B=N, eta=1.0, N_S=N_S)
    pe = error_probability(ase_moments(p))
    x = p.M * p.kappa_S * p.G_B * p.N_S / p.N_B
    assert pe <= 0.5 * math.exp(-x)
    assert pe >= float(q_function(math.sqrt(2 * x))) * (1 - 0.05)


perturb = st.floats(-0.3, 0.3)


@settings(max_examples=100, deadline=None)
@given(perturb, perturb, perturb, perturb, perturb, st.sampled_from(["N_S", "G_B", "eta", "L_km", "N_B"]))
def test_ase_error_monotone(a, b, c, d, e, name):
    # N_B keeps headroom above G_B so a 5% gain step stays above the quantum limit
    base = SystemParams(N_S=0.01 * 10 ** a, G_B=1e4 * 10 ** b, eta=min(0.9 * (1 + c / 3), 1.0),
                        L_km=50 * (1 + d), N_B=1.06e4 * 10 ** (b + abs(e)))
    bigger = base.replace(**{name: getattr(base, name) * 1.05 if name != "eta" else min(base.eta * 1.05, 1.0)})
    pe0, pe1 = error_probability(ase_moments(base)), error_probability(ase_moments(bigger))
    if name in ("N_B", "L_km"):      # more noise or more loss
        assert pe1 >= pe0 - 1e-15
    else:
        assert pe1 <= pe0 + 1e-15


# ---------------------------------------------------------------- active

def test_active_example_mean():
    p = SystemParams(N_S=0.01, L_km=50)
    eve = ActiveEveParams(kappa_AB=0.099, kappa_BA=0.1, N_Eve=(0.01 * 0.1 * 0.01) / (1 - 0.099))
    eve.validate(p.N_S, p.kappa_S, p.f)
    m = active_moments(p, eve)
    # 1 - kappa_A = 0.99 * N_S / N_ASE = 0.0099 here
    expected = 2 * 200 * 0.9 * math.sqrt(0.1 * 1e4 * 0.9 * 0.099 * 0.0099 * 1e4)
    assert m.mu0 == pytest.approx(expected, rel=1e-12)


def test_active_spec_point_mean():
    # (1 - kappa_A) = 0.099 corresponds to N_S = 0.1
    p = SystemParams(N_S=0.1, L_km=50)
    m = active_moments(p, solve_active_eve(p.N_S, p.kappa_S, p.f))
    assert m.mu0 == pytest.approx(1.0692e5, rel=1e-4)


def test_active_all_light_to_monitor():
    # the mean scales as sqrt(1 - kappa_B), reaching zero when every photon is tapped
    eve = solve_active_eve(NOMINAL.N_S, NOMINAL.kappa_S, NOMINAL.f)
    ref = active_moments(NOMINAL.replace(kappa_B=0.0), eve).mu0
    for kB in (0.5, 0.99, 1 - 1e-12):
        assert active_moments(NOMINAL.replace(kappa_B=kB), eve).mu0 == pytest.approx(ref * math.sqrt(1 - kB), rel=1e-6)


def test_active_pure_tap_matches_ase_mean():
    p = SystemParams(f=1.0, N_S=0.02)
    m = active_moments(p, solve_active_eve(p.N_S, p.kappa_S, p.f))
    ref = ase_moments(p.replace(G_B=p.G_B * (1 - p.kappa_B), N_S=(1 - p.kappa_A) * p.N_ASE))
    assert m.mu0 == pytest.approx(ref.mu0, rel=1e-12)


def test_active_rejects_inconsistent_eve():
    with pytest.raises(ValidationError):
        active_moments(NOMINAL, ActiveEveParams(0.5, 0.1, 0.0))


# ---------------------------------------------------------------- Pr(e), Shannon, storage

def test_error_probability_values():
    assert error_probability(ConditionalMoments(3.0, 3.0, 1.0, 2.0)) == 0.5
    assert float(q_function(1.2816)) == pytest.approx(0.100, abs=1e-4)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_error_probability_range(m0, m1, s0, s1):
    assert 0.0 <= error_probability(ConditionalMoments(m0, m1, s0, s1)) <= 0.5


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 100.0), st.floats(0.01, 1.0), st.floats(1.0, 1e5), st.floats(0.0, 1e5))
def test_sigmas_positive_and_finite(N_S, L, eta, G_B, extra):
    p = SystemParams(N_S=N_S, L_km=L, eta=eta, G_B=G_B, N_B=G_B - 1 + extra)
    m = ase_moments(p)
    assert 0 < m.sigma0 < math.inf and 0 < m.sigma1 < math.inf
    assert 0.0 <= error_probability(m) <= 0.5
    # a lossless, noiseless link can null one OPA output exactly, so zero spread is allowed there
    m = opa_moments(p)
    assert 0 <= m.sigma0 < math.inf and 0 <= m.sigma1 < math.inf
    assert 0.0 <= error_probability(m) <= 0.5


def test_shannon_rate():
    assert shannon_rate_bps(0.0, 1e10) == 1e10
    assert shannon_rate_bps(0.5, 1e10) == 0.0
    assert shannon_rate_bps(0.1, 1e10) == pytest.approx(5.31004e9, rel=1e-5)
    assert 1 - binary_entropy(0.1) == pytest.approx(0.531004, abs=1e-6)
    with pytest.raises(DomainError):
        shannon_rate_bps(0.7, 1.0)


def test_storage_correlation():
    stored, corr2 = storage_correlation(1e4, 0.01)
    assert stored == pytest.approx(1e4 + 1, rel=1e-14)
    assert corr2 == pytest.approx(1e4 / (1e4 + 1), rel=1e-14)
    assert storage_correlation(0.0, 0.3)[1] == 0.0
    for k in (0.01, 0.5, 1.0):
        assert storage_correlation(123.0, k)[0] == pytest.approx(124.0, rel=1e-13)
    with pytest.raises(DomainError):
        storage_correlation(1.0, 0.0)
