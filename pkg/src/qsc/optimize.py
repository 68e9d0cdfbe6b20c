"""Secure-rate lower bounds, their optimization, and distance sweeps.

The secure rate is ``beta * I_AB - chi_UB`` floored at zero. For each
distance the brightness ``N_S`` and modulation rate ``R`` are chosen by a
log-spaced grid search followed by a golden-section refinement of ``N_S``
at the best grid rate. The SPDC/OPA configuration also searches the OPA
gain ``G_A``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import eve as eve_mod
from ._parallel import ordered_map
from .errors import DomainError
from .link import (SystemParams, _active_mu_sigma, _ase_mu_sigma, _opa_pe, binary_entropy,
                   modes_per_bit, q_function)


class Configuration(str, Enum):
    PASSIVE_ASE = "passive_ase"
    PASSIVE_OPA = "passive_opa"
    ACTIVE = "active"


DEFAULT_BETA = {
    Configuration.PASSIVE_ASE: 0.94,
    Configuration.PASSIVE_OPA: 1.0,
    Configuration.ACTIVE: 0.94,
}


def reconciliation_efficiency(p: SystemParams, config: Configuration) -> float:
    return DEFAULT_BETA[Configuration(config)] if p.beta is None else p.beta


def pe_constrained(p: SystemParams, config: Configuration) -> bool:
    return Configuration(config) is not Configuration.PASSIVE_OPA or p.opa_pe_constraint


@dataclass(frozen=True)
class OperatingPoint:
    N_S: float
    R: float
    Pr_e: float
    I_AB_bps: float
    chi_ub_bps: float
    delta_I_lb_bps: float
    G_A: float | None = None
    feasible: bool = True
    diagnostic: str | None = None


@dataclass(frozen=True)
class RatePoint:
    L_km: float
    kappa_S: float
    best: OperatingPoint
    bits_per_mode: float


@dataclass(frozen=True)
class OptimizerGrid:
    """Search grid. Doubling ``n_N_S`` and ``n_R`` moves the 50 km rates by well under 2%."""

    N_S_min: float = 1e-6
    N_S_max: float = 1.0
    n_N_S: int = 61
    R_min: float = 1e6
    n_R: int = 41
    G_A_excess_min: float = 1e-8
    G_A_excess_max: float = 1e-1
    n_G_A: int = 36
    refine: bool = True
    golden_tol: float = 1e-4

    def N_S_values(self) -> np.ndarray:
        return np.logspace(np.log10(self.N_S_min), np.log10(self.N_S_max), self.n_N_S)

    def R_values(self, R_max: float) -> np.ndarray:
        if R_max < self.R_min:
            raise DomainError(f"R_max={R_max} is below the grid minimum {self.R_min}")
        return np.logspace(np.log10(self.R_min), np.log10(R_max), self.n_R)

    def G_A_values(self) -> np.ndarray:
        return 1.0 + np.logspace(np.log10(self.G_A_excess_min), np.log10(self.G_A_excess_max), self.n_G_A)


def _entropy_gap(p: SystemParams, config: Configuration) -> float:
    if config is Configuration.ACTIVE:
        eve = eve_mod.solve_active_eve(p.N_S, p.kappa_S, p.f)
        uncond, cond = eve_mod.active_entropy_gap(p, eve)
    else:
        uncond, cond = eve_mod.passive_entropy_gap(p)
    return uncond - cond


def _error_probability(p: SystemParams, config: Configuration, N_S, M, G_A=None):
    """Vectorized Pr(e) over broadcastable ``N_S``, ``M`` (and ``G_A``)."""
    kS = p.kappa_S
    if config is Configuration.PASSIVE_ASE:
        mu, sigma = _ase_mu_sigma(M, p.eta, kS, p.G_B, N_S, p.N_B, p.N_LO)
        return q_function(mu / sigma)
    if config is Configuration.ACTIVE:
        one_minus_kA = p.ase_fraction * N_S
        mu, sigma = _active_mu_sigma(M, p.eta, kS, p.kappa_B, p.f * kS, kS, one_minus_kA / p.N_ASE,
                                     p.G_B, N_S, p.N_B, p.N_ASE, p.N_LO)
        return q_function(mu / sigma)
    G_A = p.G_A if G_A is None else G_A
    return _opa_pe(M, p.eta, kS, p.idler_transmissivity, G_A, p.G_B, N_S, p.N_B)


def _objective(p, config, beta, N_S, R, M, gap, G_A=None):
    """Unfloored ``beta I - chi`` and Pr(e); infeasible points get ``-inf``."""
    pe = np.clip(_error_probability(p, config, N_S, M, G_A), 0.0, 0.5)
    info = R * (1.0 - binary_entropy(pe))
    chi = eve_mod.chi_from_gap(gap, M, R)
    raw = beta * info - chi
    if pe_constrained(p, config):
        raw = np.where(pe <= p.Pe_max, raw, -np.inf)
    return raw, pe, info, chi


def secure_rate_lb(p: SystemParams, config: Configuration | str) -> OperatingPoint:
    """Secure-rate lower bound at the brightness and bit rate held in ``p``."""
    config = Configuration(config)
    beta = reconciliation_efficiency(p, config)
    M = p.M
    if config is Configuration.PASSIVE_OPA and p.G_A <= 1:
        raise DomainError(f"OPA gain must exceed 1, got {p.G_A}")
    gap = _entropy_gap(p, config)
    pe = float(np.clip(_error_probability(p, config, p.N_S, M), 0.0, 0.5))
    info = p.R * (1.0 - binary_entropy(pe))
    chi = eve_mod.chi_from_gap(gap, M, p.R)
    raw = beta * info - chi
    feasible = not (pe_constrained(p, config) and pe > p.Pe_max)
    diagnostic = None
    if not feasible:
        diagnostic = f"Pr(e)={pe:.6g} exceeds Pe_max={p.Pe_max}"
    elif raw < 0:
        diagnostic = "negative bound floored at zero"
    return OperatingPoint(N_S=p.N_S, R=p.R, Pr_e=pe, I_AB_bps=float(info), chi_ub_bps=float(chi),
                          delta_I_lb_bps=max(0.0, float(raw)),
                          G_A=p.G_A if config is Configuration.PASSIVE_OPA else None,
                          feasible=feasible, diagnostic=diagnostic)


def _golden_max(fun, lo: float, hi: float, tol: float) -> tuple[float, float]:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimize_operating_point(p: SystemParams, config: Configuration | str,
                             grid: OptimizerGrid = OptimizerGrid()) -> OperatingPoint:
    """Maximize the secure-rate lower bound over ``N_S``, ``R`` (and ``G_A`` for the OPA)."""
    config = Configuration(config)
    beta = reconciliation_efficiency(p, config)
    NS = grid.N_S_values()
    if config is Configuration.ACTIVE:
        NS = NS[p.ase_fraction * NS / p.N_ASE < 1]
    R = grid.R_values(p.R_max)[::-1]  # descending, so argmax ties prefer the larger R
    modes_per_bit(p.W, p.R_max)  # warns once if even the densest grid point is under-resolved
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = np.floor(p.W / R * (1 + 1e-12))
    gaps = np.array([_entropy_gap(p.replace(N_S=float(n)), config) for n in NS])

    if config is Configuration.PASSIVE_OPA:
        GA = grid.G_A_values()
        raw, pe, info, chi = _objective(p, config, beta, NS[:, None, None], R[None, :, None],
                                        M[None, :, None], gaps[:, None, None], GA[None, None, :])
    else:
        GA = None
        raw, pe, info, chi = _objective(p, config, beta, NS[:, None], R[None, :], M[None, :], gaps[:, None])

    if not np.any(np.isfinite(raw)):
        return OperatingPoint(N_S=float(NS[0]), R=float(R[0]), Pr_e=0.5, I_AB_bps=0.0, chi_ub_bps=0.0,
                              delta_I_lb_bps=0.0, feasible=False,
                              diagnostic="no grid point satisfies the error-probability constraint")

    flat = int(np.argmax(raw))  # first maximum: smallest N_S, then largest R
    idx = np.unravel_index(flat, raw.shape)
    i, j = idx[0], idx[1]
    best_NS, best_R = float(NS[i]), float(R[j])
    best_GA = float(GA[idx[2]]) if GA is not None else None
    best_raw = float(raw[idx])

    if grid.refine and len(NS) > 1:
        lo = math.log(NS[max(i - 1, 0)])
        hi = math.log(NS[min(i + 1, len(NS) - 1)])
        Mj = float(M[j])
        pj = p.replace(R=best_R, G_A=best_GA) if best_GA is not None else p.replace(R=best_R)

        def fun(log_ns):
            n = math.exp(log_ns)
            gap = _entropy_gap(pj.replace(N_S=n), config)
            return float(_objective(pj, config, beta, n, best_R, Mj, gap, best_GA)[0])

        x, fx = _golden_max(fun, lo, hi, grid.golden_tol)
        if fx > best_raw:
            best_NS, best_raw = math.exp(x), fx

    q = p.replace(N_S=best_NS, R=best_R)
    if best_GA is not None:
        q = q.replace(G_A=best_GA)
    point = secure_rate_lb(q, config)
    if point.diagnostic is None and best_raw <= 0:
        point = _with_diagnostic(point, "negative bound floored at zero")
    return point


def _with_diagnostic(point: OperatingPoint, msg: str) -> OperatingPoint:
    return replace(point, diagnostic=msg)


def distance_sweep(p: SystemParams, config: Configuration | str, L_grid: Iterable[float],
                   grid: OptimizerGrid = OptimizerGrid(), max_workers: int | None = None) -> list[RatePoint]:
    """Optimized secure rate at each distance, in the order of ``L_grid``."""
    config = Configuration(config)
    L = [float(x) for x in L_grid]
    if any(b < a for a, b in zip(L, L[1:])):
        raise DomainError("L_grid must be non-decreasing")

    def one(L_km: float) -> RatePoint:
        q = p.replace(L_km=L_km)
        best = optimize_operating_point(q, config, grid)
        return RatePoint(L_km=L_km, kappa_S=q.kappa_S, best=best, bits_per_mode=best.delta_I_lb_bps / p.W)

    return ordered_map(one, L, max_workers)


def tgw_bound_bits_per_mode(kappa_S: float) -> float:
    """Two-way secure-rate upper bound ``2 log2((1 + k) / (1 - k))``; ``inf`` at ``k = 1``."""
    if not 0 <= kappa_S <= 1:
        raise DomainError(f"kappa_S must lie in [0, 1], got {kappa_S}")
    if kappa_S == 1:
        return math.inf
    return 2 * math.log2((1 + kappa_S) / (1 - kappa_S))


def cvqkd_bits_per_mode(kappa_S: float) -> float:
    """Ideal continuous-variable QKD rate ``-log2(1 - k)``; ``inf`` at ``k = 1``."""
    if not 0 <= kappa_S <= 1:
        raise DomainError(f"kappa_S must lie in [0, 1], got {kappa_S}")
    if kappa_S == 1:
        return math.inf
    return -math.log2(1 - kappa_S)


def default_L_grid() -> Sequence[float]:
    return [float(x) for x in range(0, 61)]
