"""Coincidence-based channel monitoring against active eavesdropping.

Alice counts her SPDC idler photons, Bob counts the ``kappa_B`` tap of the
light he receives. Each coincidence gate of length ``T_g`` spans
``M_g = T_g W`` i.i.d. mode pairs. The coincidence rate, corrected for
accidentals, estimates the fraction ``f`` of Bob's light that came from
Alice; :func:`required_measurement_time` gives how long the counters must
run for that estimate to reach a target standard deviation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, DomainError, ValidityWarning
from .gaussian import VACUUM, CovMatrix
from .link import SystemParams

VARIANCE_MODELS = ("exact", "printed")
LOW_FLUX_LIMIT = 0.1


@dataclass(frozen=True)
class MonitorStats:
    S_A: float
    S_B: float
    C_AB: float
    var_C: float
    delta_f: float
    T_M: float
    SNR_A_db: float
    SNR_B_db: float
    M_g: float


def monitor_cov(p: SystemParams) -> CovMatrix:
    """Covariance of one (Alice monitor, Bob monitor) mode pair before detection."""
    N = p.N_SPDC
    C = math.sqrt(p.kappa_B * p.f * p.kappa_S * p.kappa_A) * 2 * math.sqrt(N * (N + 1))
    a, b = 2 * N + 1, 2 * p.kappa_B * p.kappa_S * p.N_S + 1
    return CovMatrix(VACUUM * np.array([
        [a, 0, C, 0],
        [0, a, 0, -C],
        [C, 0, b, 0],
        [0, -C, 0, b],
    ]))


def _check_low_flux(p: SystemParams, S_A: float, S_B: float) -> None:
    for name, S in (("Alice", S_A), ("Bob", S_B)):
        if S * p.T_g / p.eta > LOW_FLUX_LIMIT:
            warnings.warn(f"{name}'s monitor sees {S * p.T_g / p.eta:.3g} photons per gate; "
                          "the low-flux counting model assumes << 1", ValidityWarning, stacklevel=3)


def singles_rates(p: SystemParams) -> tuple[float, float]:
    """Mean singles rates (1/s) at Alice's and Bob's monitors."""
    S_A = p.eta * p.N_SPDC * p.W
    S_B = p.eta * p.kappa_B * p.kappa_S * p.N_S * p.W
    return S_A, S_B


def coincidence_rate(p: SystemParams, exact: bool = False) -> float:
    """Mean coincidence rate: accidentals plus true coincidences.

    The default drops the ``N_SPDC^2`` part of the true-coincidence term;
    ``exact=True`` keeps the full ``N_SPDC (N_SPDC + 1)`` pair factor.
    """
    S_A, S_B = singles_rates(p)
    pair = p.N_SPDC * (p.N_SPDC + 1) if exact else p.N_SPDC
    return S_A * S_B * p.T_g + p.eta ** 2 * p.kappa_B * p.f * p.kappa_S * p.kappa_A * pair * p.W


def gate_product_variance(A, B, D, M):
    """Variance of ``X Y`` where ``X``, ``Y`` count photons over ``M`` i.i.d. mode pairs.

    Each pair is zero-mean Gaussian with detected mean photon numbers ``A``,
    ``B``, phase-sensitive correlation ``|<ab>|^2 = D`` and no
    phase-insensitive correlation. Follows from the factorial-moment
    generating function ``[(1 - uA)(1 - vB) - uvD]^(-M)``.
    """
    return (2 * A**2 * B**2 * M**3 + A**2 * B**2 * M**2
            + A**2 * B * M**3 + A**2 * B * M**2 + A * B**2 * M**3 + A * B**2 * M**2
            + 2 * A * B * D * M**3 + 8 * A * B * D * M**2 + 4 * A * B * D * M + A * B * M**2
            + 2 * A * D * M**2 + 2 * A * D * M + 2 * B * D * M**2 + 2 * B * D * M
            + D**2 * M**2 + 2 * D**2 * M + D * M)


def detected_pair_moments(p: SystemParams) -> tuple[float, float, float]:
    """``(A, B, D)`` of one monitor mode pair after detection with efficiency ``eta``."""
    N = p.N_SPDC
    A = p.eta * N
    B = p.eta * p.kappa_B * p.kappa_S * p.N_S
    D = p.eta ** 2 * p.kappa_B * p.f * p.kappa_S * p.kappa_A * N * (N + 1)
    return A, B, D


def coincidence_variance(p: SystemParams, T_M: float, model: str = "exact") -> float:
    """Variance of the time-averaged coincidence rate over a ``T_M``-second window.

    ``model="exact"`` evaluates the full Gaussian moment-factoring result.
    ``model="printed"`` is the truncated closed form
    ``(eta^4 kB N_SPDC W / T_M) [kAB kA + (kS NS + 2 kAB kA N_SPDC) M_g
    + (1 + 2 kB kS kA + kB kS NS) kS M_g^2 NS]``, which overstates the
    exact variance by about two orders of magnitude at the nominal point.
    """
    if T_M <= 0:
        raise DomainError(f"measurement time must be positive, got {T_M}")
    if model == "exact":
        A, B, D = detected_pair_moments(p)
        return float(gate_product_variance(A, B, D, p.M_g) / (p.T_g * T_M))
    if model == "printed":
        kS, kA, kB, NS, Mg = p.kappa_S, p.kappa_A, p.kappa_B, p.N_S, p.M_g
        kAB = p.f * kS
        bracket = (kAB * kA + (kS * NS + 2 * kAB * kA * p.N_SPDC) * Mg
                   + (1 + 2 * kB * kS * kA + kB * kS * NS) * kS * Mg ** 2 * NS)
        return p.eta ** 4 * kB * p.N_SPDC * p.W / T_M * bracket
    raise DomainError(f"unknown variance model {model!r}; expected one of {VARIANCE_MODELS}")


def _f_scale(p: SystemParams) -> float:
    _, S_B = singles_rates(p)
    denom = p.eta * p.kappa_A * p.N_SPDC * S_B
    if denom <= 0:
        raise CertificationError("Bob's monitor sees no light; f cannot be certified")
    return p.N_S / denom


def f_estimate(C_measured: float, p: SystemParams) -> float:
    """Accidental-corrected estimate of ``f`` from a measured coincidence rate (exact singles)."""
    S_A, S_B = singles_rates(p)
    return (C_measured - S_A * S_B * p.T_g) * _f_scale(p)


def f_estimator_stddev(p: SystemParams, T_M: float, model: str = "exact") -> float:
    return math.sqrt(coincidence_variance(p, T_M, model)) * _f_scale(p)


def required_measurement_time(p: SystemParams, target_delta_f: float = 1e-3, model: str = "exact") -> float:
    """Monitoring time for the ``f`` estimate to reach standard deviation ``target_delta_f``."""
    if target_delta_f <= 0:
        raise DomainError("target standard deviation must be positive")
    scale = _f_scale(p)
    _check_low_flux(p, *singles_rates(p))
    # the variance is exactly proportional to 1 / T_M
    return coincidence_variance(p, 1.0, model) * scale ** 2 / target_delta_f ** 2


def singles_snr_db(S: float, T_M: float) -> float:
    """Singles-rate SNR ``S T_M`` in decibels."""
    if S <= 0 or T_M <= 0:
        raise DomainError("singles rate and measurement time must be positive")
    return 10 * math.log10(S * T_M)


def monitor_stats(p: SystemParams, target_delta_f: float = 1e-3, snr_time_s: float | None = None,
                  model: str = "exact") -> MonitorStats:
    """Rates at the required monitoring time; SNRs at ``snr_time_s`` (default: that time)."""
    S_A, S_B = singles_rates(p)
    T_M = required_measurement_time(p, target_delta_f, model)
    t_snr = T_M if snr_time_s is None else snr_time_s
    return MonitorStats(S_A=S_A, S_B=S_B, C_AB=coincidence_rate(p),
                        var_C=coincidence_variance(p, T_M, model),
                        delta_f=f_estimator_stddev(p, T_M, model), T_M=T_M,
                        SNR_A_db=singles_snr_db(S_A, t_snr), SNR_B_db=singles_snr_db(S_B, t_snr),
                        M_g=p.M_g)
