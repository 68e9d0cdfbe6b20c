"""Alice's decision statistics, error probabilities and Shannon rates.

Three receivers are modelled: the SPDC source with an optical parametric
amplifier (OPA) receiver, the ASE source with a broadband homodyne
receiver, and the homodyne receiver under an active attack with channel
monitoring. Decision statistics are sums over ``M = floor(W / R)`` modes
per bit and are treated in the Gaussian (central-limit) approximation.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import erfc

from .errors import DomainError, ValidityWarning

if TYPE_CHECKING:
    from .eve import ActiveEveParams

MIN_MODES_PER_BIT = 200


def transmissivity(alpha_db_per_km: float, L_km: float) -> float:
    """Fiber transmissivity ``10^(-alpha L / 10)``."""
    if alpha_db_per_km < 0 or L_km < 0:
        raise DomainError("fiber loss and length must be non-negative")
    return 10.0 ** (-alpha_db_per_km * L_km / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one protocol configuration.

    Defaults are the nominal operating point: 2 THz source, 10 Gbps BPSK,
    0.2 dB/km fiber, Bob's EDFA at ``G_B = N_B = 1e4`` and a ``1e4``-photon LO.

    ``kappa_A`` and ``N_SPDC`` are not free: Alice mixes her SPDC and ASE
    signals so that a fraction ``ase_fraction`` of the ``N_S`` photons she
    sends comes from the ASE source.
    """

    W: float = 2e12
    R: float = 1e10
    alpha_db_per_km: float = 0.2
    L_km: float = 50.0
    N_S: float = 0.01
    N_LO: float = 1e4
    G_B: float = 1e4
    N_B: float = 1e4
    eta: float = 0.9
    G_A: float = 1.0 + 1e-5
    kappa_I: float | None = None
    kappa_B: float = 0.1
    N_ASE: float = 1.0
    ase_fraction: float = 0.99
    f: float = 0.99
    T_g: float = 1e-10
    beta: float | None = None
    R_max: float = 1e10
    Pe_max: float = 0.1
    opa_pe_constraint: bool = False

    def __post_init__(self):
        if self.W <= 0 or self.R <= 0:
            raise DomainError("W and R must be positive")
        if self.W < self.R:
            raise DomainError(f"fewer than one mode per bit (W={self.W}, R={self.R})")
        if self.N_S < 0 or self.N_LO < 0 or self.N_B < 0 or self.N_ASE <= 0:
            raise DomainError("brightnesses must be non-negative (N_ASE positive)")
        if not 0 < self.eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if self.G_B < 1:
            raise DomainError(f"G_B must be >= 1, got {self.G_B}")
        if self.N_B < self.G_B - 1:
            raise DomainError(f"amplifier output noise N_B={self.N_B} is below the quantum limit G_B - 1")
        if not 0 <= self.kappa_B < 1:
            raise DomainError(f"kappa_B must lie in [0, 1), got {self.kappa_B}")
        if not 0 <= self.f <= 1:
            raise DomainError(f"f must lie in [0, 1], got {self.f}")
        if self.beta is not None and not 0 < self.beta <= 1:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta}")
        if self.kappa_I is not None and not 0 < self.kappa_I <= 1:
            raise DomainError(f"kappa_I must lie in (0, 1], got {self.kappa_I}")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def kappa_S(self) -> float:
        return transmissivity(self.alpha_db_per_km, self.L_km)

    @property
    def idler_transmissivity(self) -> float:
        """Idler storage transmissivity; a round trip of fiber unless overridden."""
        return self.kappa_S ** 2 if self.kappa_I is None else self.kappa_I

    @property
    def M(self) -> int:
        return modes_per_bit(self.W, self.R)

    @property
    def kappa_A(self) -> float:
        return 1.0 - self.ase_fraction * self.N_S / self.N_ASE

    @property
    def N_SPDC(self) -> float:
        return (1.0 - self.ase_fraction) * self.N_S / self.kappa_A

    @property
    def M_g(self) -> float:
        """Modes per coincidence gate."""
        return self.T_g * self.W

    def with_spdc_brightness(self, N_SPDC: float) -> "SystemParams":
        """Return a copy whose ``N_S`` yields the requested SPDC brightness."""
        x = N_SPDC / (1.0 - self.ase_fraction)
        return self.replace(N_S=x / (1.0 + self.ase_fraction * x / self.N_ASE))


def modes_per_bit(W: float, R: float) -> int:
    M = int(math.floor(W / R * (1 + 1e-12)))
    if M < 1:
        raise DomainError(f"fewer than one mode per bit (W={W}, R={R})")
    if M < MIN_MODES_PER_BIT:
        warnings.warn(f"M = {M} < {MIN_MODES_PER_BIT}: Gaussian approximation may be inaccurate",
                      ValidityWarning, stacklevel=3)
    return M


@dataclass(frozen=True)
class ConditionalMoments:
    """Mean and standard deviation of Alice's statistic given Bob's bit."""

    mu0: float
    mu1: float
    sigma0: float
    sigma1: float

    @property
    def snr_argument(self) -> float:
        return (self.mu0 - self.mu1) / (self.sigma0 + self.sigma1)


def q_function(x):
    """Standard-normal tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def binary_entropy(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0) \
            - np.where(p < 1, (1 - p) * np.log2(np.where(p < 1, 1 - p, 1.0)), 0.0)
    return h if h.ndim else float(h)


# Array kernels. The public functions below wrap these for scalar
# parameters; the optimizer calls them on broadcast grids.

def _opa_mu(M, eta, kS, kI, GA, GB, NS, NB, k):
    sign = 1.0 if k == 0 else -1.0
    cross = np.sqrt(GA * (GA - 1) * kI * kS ** 2 * GB * NS * (NS + 1))
    return M * eta * (GA * kI * NS + (GA - 1) * (kS * (GB * kS * NS + NB) + 1) + 2 * sign * cross)


def _opa_pe(M, eta, kS, kI, GA, GB, NS, NB):
    mu0 = _opa_mu(M, eta, kS, kI, GA, GB, NS, NB, 0)
    mu1 = _opa_mu(M, eta, kS, kI, GA, GB, NS, NB, 1)
    s0 = np.sqrt(mu0 * (mu0 / M + 1))
    s1 = np.sqrt(mu1 * (mu1 / M + 1))
    return q_function((mu0 - mu1) / (s0 + s1))


def _ase_mu_sigma(M, eta, kS, GB, NS, NB, NLO):
    mu = 2 * M * eta * kS * np.sqrt(GB * NS * NLO)
    var = M * (eta * (kS ** 2 * GB * NS + kS * NB + NLO)
               + 2 * eta ** 2 * (2 * kS ** 2 * GB * NS + kS * NB) * NLO)
    return mu, np.sqrt(var)


def _active_mu_sigma(M, eta, kS, kB, kAB, kBA, one_minus_kA, GB, NS, NB, NASE, NLO):
    x = kBA * GB * (1 - kB) * kAB * one_minus_kA * NASE * NLO
    mu = 2 * M * eta * np.sqrt(x)
    NR = kBA * GB * (1 - kB) * kS * NS + kBA * NB
    var = M * (eta * (NR + NLO) + 2 * eta ** 2 * (NR * NLO + x))
    return mu, np.sqrt(var)


def opa_moments(p: SystemParams) -> ConditionalMoments:
    """Photon-count moments of the OPA receiver under passive eavesdropping."""
    if p.G_A <= 1:
        raise DomainError(f"OPA gain must exceed 1, got {p.G_A}")
    M = p.M
    args = (M, p.eta, p.kappa_S, p.idler_transmissivity, p.G_A, p.G_B, p.N_S, p.N_B)
    mu0, mu1 = float(_opa_mu(*args, 0)), float(_opa_mu(*args, 1))
    return ConditionalMoments(mu0, mu1, math.sqrt(mu0 * (mu0 / M + 1)), math.sqrt(mu1 * (mu1 / M + 1)))


def ase_moments(p: SystemParams) -> ConditionalMoments:
    """Homodyne-statistic moments for the ASE source with perfect reference storage."""
    if p.N_LO <= 0:
        raise DomainError("homodyne reception needs N_LO > 0")
    mu, sigma = _ase_mu_sigma(p.M, p.eta, p.kappa_S, p.G_B, p.N_S, p.N_B, p.N_LO)
    return ConditionalMoments(float(mu), -float(mu), float(sigma), float(sigma))


def active_moments(p: SystemParams, eve: "ActiveEveParams") -> ConditionalMoments:
    """Homodyne-statistic moments when Eve injects SPDC light and Bob taps ``kappa_B``."""
    eve.validate(p.N_S, p.kappa_S, p.f)
    mu, sigma = _active_mu_sigma(p.M, p.eta, p.kappa_S, p.kappa_B, eve.kappa_AB, eve.kappa_BA,
                                 1 - p.kappa_A, p.G_B, p.N_S, p.N_B, p.N_ASE, p.N_LO)
    return ConditionalMoments(float(mu), -float(mu), float(sigma), float(sigma))


def error_probability(m: ConditionalMoments) -> float:
    """Gaussian-approximation error probability for equiprobable bits."""
    return float(np.clip(q_function(m.snr_argument), 0.0, 0.5))


def shannon_rate_bps(Pr_e: float, R: float) -> float:
    """Alice-Bob Shannon information rate ``R (1 - H2(Pr_e))`` for a binary symmetric channel."""
    if not 0 <= Pr_e <= 0.5:
        raise DomainError(f"error probability must lie in [0, 1/2], got {Pr_e}")
    return R * (1.0 - binary_entropy(Pr_e))


def storage_correlation(N_LO: float, kappa_I: float) -> tuple[float, float]:
    """Reference after amplify-then-store with ``G_R = N_R = 1 / kappa_I``.

    Returns the stored mean photon number and the squared normalized
    signal-reference correlation.
    """
    if not 0 < kappa_I <= 1:
        raise DomainError(f"kappa_I must lie in (0, 1], got {kappa_I}")
    if N_LO < 0:
        raise DomainError("N_LO must be non-negative")
    G_R = N_R = 1.0 / kappa_I
    stored = kappa_I * G_R * N_LO + kappa_I * N_R
    corr2 = kappa_I * G_R * N_LO / stored
    return stored, corr2
