"""Eve's conditional states and upper bounds on her Holevo information.

Passive attack: Eve holds the light lost in both fibers, one mode pair
per signal mode. Active attack: Eve replaces the fibers, injects the
signal arm of her own SPDC source through a beam splitter and keeps its
idler, giving her one mode triple per signal mode.

For ``M`` i.i.d. modes per bit the bound is
``min[M (S_therm(averaged) - mean conditional entropy), 1] * R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PhysicalityError, ValidationError
from .gaussian import VACUUM, CovMatrix, entropy_bits, thermal_product_entropy
from .link import SystemParams

CONSTRAINT_TOL = 1e-12
BIT_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class ActiveEveParams:
    kappa_AB: float
    kappa_BA: float
    N_Eve: float

    def validate(self, N_S: float, kappa_S: float, f: float) -> None:
        """Check Eve's choices keep Bob's power, the light fraction ``f`` and Alice's power."""
        if not (0 <= self.kappa_AB <= 1 and 0 <= self.kappa_BA <= 1) or self.N_Eve < 0:
            raise ValidationError(f"inadmissible eavesdropper parameters {self}")
        scale = max(kappa_S * N_S, 1e-300)
        power = self.kappa_AB * N_S + (1 - self.kappa_AB) * self.N_Eve - kappa_S * N_S
        injected = (1 - self.kappa_AB) * self.N_Eve - (1 - f) * kappa_S * N_S
        if abs(power) > CONSTRAINT_TOL * scale or abs(injected) > CONSTRAINT_TOL * scale:
            raise ValidationError("eavesdropper parameters violate the power-matching constraints")
        if abs(self.kappa_BA - kappa_S) > CONSTRAINT_TOL:
            raise ValidationError("kappa_BA must equal the fiber transmissivity")


def solve_active_eve(N_S: float, kappa_S: float, f: float) -> ActiveEveParams:
    """Beam-splitter and source settings that hide an injection of ``1 - f`` of Bob's light."""
    if not 0 < kappa_S <= 1:
        raise DomainError(f"kappa_S must lie in (0, 1], got {kappa_S}")
    if not 0 <= f <= 1:
        raise DomainError(f"f must lie in [0, 1], got {f}")
    if N_S < 0:
        raise DomainError(f"N_S must be non-negative, got {N_S}")
    kappa_AB = f * kappa_S
    injected = (1 - f) * kappa_S * N_S
    if injected == 0:
        N_Eve = 0.0
    elif kappa_AB >= 1:
        raise ValidationError("no beam splitter can inject light when kappa_AB = 1")
    else:
        N_Eve = injected / (1 - kappa_AB)
    eve = ActiveEveParams(kappa_AB=kappa_AB, kappa_BA=kappa_S, N_Eve=N_Eve)
    if N_Eve < 0:
        raise ValidationError(f"solved N_Eve={N_Eve} is negative")
    return eve


def _bit_sign(bit: int) -> float:
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit}")
    return 1.0 if bit == 0 else -1.0


def _passive_entries(p: SystemParams):
    kS = p.kappa_S
    N_AB = (1 - kS) * p.N_S
    C = 2 * (1 - kS) * math.sqrt(p.G_B * kS) * p.N_S
    N_BA = (1 - kS) * (p.G_B * kS * p.N_S + p.N_B)
    return N_AB, C, N_BA


def passive_conditional_cov(p: SystemParams, bit: int) -> CovMatrix:
    """Eve's (AB tap, BA tap) mode pair given Bob's bit, passive attack."""
    s = _bit_sign(bit)
    N_AB, C, N_BA = _passive_entries(p)
    a, b, c = 2 * N_AB + 1, 2 * N_BA + 1, s * C
    return CovMatrix(VACUUM * np.array([
        [a, 0, c, 0],
        [0, a, 0, c],
        [c, 0, b, 0],
        [0, c, 0, b],
    ]))


def passive_unconditional_cov(p: SystemParams) -> CovMatrix:
    N_AB, _, N_BA = _passive_entries(p)
    return CovMatrix(VACUUM * np.diag([2 * N_AB + 1] * 2 + [2 * N_BA + 1] * 2))


def _active_entries(p: SystemParams, eve: ActiveEveParams):
    kAB, kBA, NE = eve.kappa_AB, eve.kappa_BA, eve.N_Eve
    NS, GB, kB = p.N_S, p.G_B, p.kappa_B
    N_AB = (1 - kAB) * NS + kAB * NE
    C_AI = 2 * math.sqrt(kAB * NE * (NE + 1))
    C_AB = 2 * math.sqrt((1 - kBA) * GB * (1 - kB) * (1 - kAB) * kAB) * (NS - NE)
    C_IB = 2 * math.sqrt((1 - kBA) * GB * (1 - kB) * (1 - kAB) * NE * (NE + 1))
    N_BA = (1 - kBA) * (GB * (1 - kB) * p.kappa_S * NS + p.N_B)
    return N_AB, C_AI, C_AB, C_IB, N_BA, NE


def active_conditional_cov(p: SystemParams, eve: ActiveEveParams, bit: int) -> CovMatrix:
    """Eve's (AB tap, her SPDC idler, BA tap) mode triple given Bob's bit."""
    s = _bit_sign(bit)
    N_AB, C_AI, C_AB, C_IB, N_BA, NE = _active_entries(p, eve)
    a, b, c = 2 * N_AB + 1, 2 * NE + 1, 2 * N_BA + 1
    x, y = s * C_AB, s * C_IB
    return CovMatrix(VACUUM * np.array([
        [a, 0, -C_AI, 0, x, 0],
        [0, a, 0, C_AI, 0, x],
        [-C_AI, 0, b, 0, y, 0],
        [0, C_AI, 0, b, 0, -y],
        [x, 0, y, 0, c, 0],
        [0, x, 0, -y, 0, c],
    ]))


def active_unconditional_cov(p: SystemParams, eve: ActiveEveParams) -> CovMatrix:
    V = 0.5 * (active_conditional_cov(p, eve, 0).data + active_conditional_cov(p, eve, 1).data)
    return CovMatrix(V)


@dataclass(frozen=True)
class HolevoBound:
    """Upper bound on Eve's Holevo information rate.

    Entropies are per mode (pair or triple); ``chi_ub_bps`` already
    includes the factor ``M`` and the clip at one bit per bit.
    """

    chi_ub_bps: float
    conditional_entropy_bits: float
    unconditional_entropy_ub_bits: float
    clipped: bool

    @property
    def per_mode_gap_bits(self) -> float:
        return self.unconditional_entropy_ub_bits - self.conditional_entropy_bits


def _conditional_entropy(cov0: CovMatrix, cov1: CovMatrix) -> float:
    s0, s1 = entropy_bits(cov0), entropy_bits(cov1)
    if abs(s0 - s1) > BIT_SYMMETRY_TOL * max(1.0, abs(s0)):
        raise PhysicalityError(f"conditional entropies differ between bits ({s0!r} vs {s1!r})")
    return 0.5 * (s0 + s1)


def passive_entropy_gap(p: SystemParams) -> tuple[float, float]:
    """Per-mode-pair (unconditional upper bound, conditional) entropies, passive attack."""
    cond = _conditional_entropy(passive_conditional_cov(p, 0), passive_conditional_cov(p, 1))
    return thermal_product_entropy(passive_unconditional_cov(p)), cond


def active_entropy_gap(p: SystemParams, eve: ActiveEveParams) -> tuple[float, float]:
    """Per-mode-triple (unconditional upper bound, conditional) entropies, active attack."""
    eve.validate(p.N_S, p.kappa_S, p.f)
    cond = _conditional_entropy(active_conditional_cov(p, eve, 0), active_conditional_cov(p, eve, 1))
    return thermal_product_entropy(active_unconditional_cov(p, eve)), cond


def chi_from_gap(gap_bits_per_mode, M, R):
    """``min[M * gap, 1] * R``, floored at zero against round-off."""
    bits = np.clip(M * np.asarray(gap_bits_per_mode, dtype=float), 0.0, 1.0)
    out = bits * R
    return out if np.ndim(out) else float(out)


def _bound(uncond: float, cond: float, p: SystemParams) -> HolevoBound:
    M = p.M
    if uncond - cond < -1e-9 * max(1.0, uncond):
        raise PhysicalityError(f"negative Holevo quantity {uncond - cond!r}")
    return HolevoBound(chi_ub_bps=chi_from_gap(uncond - cond, M, p.R),
                       conditional_entropy_bits=cond,
                       unconditional_entropy_ub_bits=uncond,
                       clipped=M * (uncond - cond) > 1.0)


def holevo_ub_passive(p: SystemParams) -> HolevoBound:
    return _bound(*passive_entropy_gap(p), p)


def holevo_ub_active(p: SystemParams, eve: ActiveEveParams | None = None) -> HolevoBound:
    if eve is None:
        eve = solve_active_eve(p.N_S, p.kappa_S, p.f)
    return _bound(*active_entropy_gap(p, eve), p)
