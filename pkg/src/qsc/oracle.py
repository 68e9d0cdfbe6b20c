"""Independent numerical oracles for the closed-form statistics.

* :func:`covariance_composition_moments` builds the SPDC/OPA chain mode by
  mode with the Gaussian-core transforms and reads the receiver's photon
  statistics off the final covariance.
* :func:`mc_homodyne_error_rate` simulates the homodyne receiver with
  Glauber-Sudarshan P-representation sampling and Poisson photodetection.
* :func:`mc_coincidence_counting` simulates gate-by-gate photon counting
  at the two channel monitors.
* :func:`gaussian_count_moments` gives exact factorial moments of photon
  counts for any zero-mean Gaussian state, from a truncated series of its
  normally ordered generating function.

Monte Carlo runs are split into a fixed number of shards with RNG streams
spawned from the seed, so results do not depend on the thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import wishart

from . import gaussian as gc
from ._parallel import ordered_map
from .errors import DomainError, UnsupportedConfigurationError, ValidationError
from .eve import solve_active_eve
from .link import SystemParams
from .monitor import monitor_cov

CLASSICALITY_TOL = 1e-12
HOMODYNE_CONFIGS = ("passive_ase", "active")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings. ``M`` overrides ``params.M`` (modes per bit)."""

    trials: int
    seed: int
    params: SystemParams = field(default_factory=SystemParams)
    M: int | None = None
    shards: int = 16

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials <= 0:
            raise ValidationError(f"trials must be a positive integer, got {self.trials}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.M is not None and self.M < 1:
            raise ValidationError(f"M must be positive, got {self.M}")
        if self.shards < 1:
            raise ValidationError("shards must be positive")

    @property
    def modes(self) -> int:
        return self.params.M if self.M is None else int(self.M)

    def shard_plan(self) -> list[tuple[int, np.random.SeedSequence]]:
        """Trial counts and independent seed sequences per shard."""
        n = min(self.shards, self.trials)
        base, extra = divmod(self.trials, n)
        seqs = np.random.SeedSequence(int(self.seed)).spawn(n)
        return [(base + (k < extra), s) for k, s in enumerate(seqs)]


# ---------------------------------------------------------------- OPA chain

def opa_receiver_cov(p: SystemParams, bit: int) -> gc.CovMatrix:
    """Covariance of (signal, idler) per mode pair at Alice's OPA receiver, after detection loss.

    Mode 1 is the output port whose photons Alice counts.
    """
    cov = gc.make_tmsv(p.N_S)                                   # (signal, idler)
    cov = gc.apply_loss(cov, 0, p.kappa_S)
    cov = gc.apply_bpsk(cov, 0, bit)
    cov = gc.apply_phase_insensitive_amp(cov, 0, p.G_B, p.N_B)
    cov = gc.apply_loss(cov, 0, p.kappa_S)
    cov = gc.apply_loss(cov, 1, p.idler_transmissivity)
    cov = gc.apply_two_mode_squeezer(cov, (1, 0), p.G_A)
    return gc.apply_loss(cov, 1, p.eta)


def single_mode_count_moments(cov: gc.CovMatrix, mode: int) -> tuple[float, float]:
    """Mean and variance of the photon number of one mode of a zero-mean Gaussian state."""
    b = cov.block(mode)
    n = b[0, 0] + b[1, 1] - 2 * gc.VACUUM
    m2 = (b[0, 0] - b[1, 1]) ** 2 + 4 * b[0, 1] ** 2          # |<a^2>|^2
    return float(n), float(n * n + n + m2)


def covariance_composition_moments(p: SystemParams, bit: int) -> tuple[float, float]:
    """Mean and variance of Alice's OPA photon count for ``M`` i.i.d. mode pairs."""
    n, var = single_mode_count_moments(opa_receiver_cov(p, bit), 1)
    M = p.M
    return M * n, M * var


# ------------------------------------------------------- factorial moments

def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of truncated bivariate series; ``a[i, j]`` multiplies ``u^i v^j``."""
    order = a.shape[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for i in range(order):
        for j in range(order):
            for k in range(order - i):
                for l in range(order - j):
                    out[i + k, j + l] += a[i, j] @ b[k, l] if a.ndim > 2 else a[i, j] * b[k, l]
    return out


def gaussian_count_moments(cov: gc.CovMatrix, modes_a, modes_b, M: float = 1, order: int = 2) -> np.ndarray:
    """Factorial moments ``E[X^(i) Y^(j)]`` for ``i, j <= order``.

    ``X`` and ``Y`` count photons in ``modes_a`` and ``modes_b`` summed over
    ``M`` i.i.d. copies of the state. Uses
    ``E[(1+u)^X (1+v)^Y] = det(I - 2 D V_P)^(-M/2)`` with ``V_P = V - I/4``
    and ``D`` the diagonal of ``u`` and ``v`` on the respective quadratures.
    """
    V = cov.data - gc.VACUUM * np.eye(cov.data.shape[0])
    dim, size = V.shape[0], order + 1
    sel_a, sel_b = np.zeros(dim), np.zeros(dim)
    sel_a[gc._quadrature_indices(modes_a)] = 1
    sel_b[gc._quadrature_indices(modes_b)] = 1
    K = np.zeros((size, size, dim, dim))
    K[1, 0] = 2 * sel_a[:, None] * V
    K[0, 1] = 2 * sel_b[:, None] * V
    # -log det(I - K) = sum_k tr(K^k) / k, truncated at total degree 2 * order
    log_g = np.zeros((size, size))
    power = K.copy()
    for k in range(1, 2 * order + 1):
        log_g += np.trace(power, axis1=2, axis2=3) / k
        power = _series_mul(power, K)
    log_g *= M / 2
    g = np.zeros((size, size))
    g[0, 0] = 1.0
    term = g.copy()
    for k in range(1, 2 * order + 1):
        term = _series_mul(term, log_g) / k
        g += term
    fact = np.array([math.factorial(i) for i in range(size)], dtype=float)
    return g * fact[:, None] * fact[None, :]


def product_moments(fm: np.ndarray) -> tuple[float, float]:
    """``E[XY]`` and ``Var(XY)`` from factorial moments up to order 2."""
    mean = fm[1, 1]
    second = fm[2, 2] + fm[2, 1] + fm[1, 2] + fm[1, 1]
    return float(mean), float(second - mean ** 2)


# ------------------------------------------------------------ sampling

def is_classical(cov: gc.CovMatrix, tol: float = CLASSICALITY_TOL) -> bool:
    """True when ``V - I/4`` is positive semidefinite, i.e. a P-representation exists."""
    V = cov.data - gc.VACUUM * np.eye(cov.data.shape[0])
    return bool(np.linalg.eigvalsh(V).min() >= -tol * max(1.0, float(np.abs(V).max())))


def _p_factor(cov: gc.CovMatrix) -> np.ndarray:
    """``L`` with ``L L^T = V - I/4``; raises if the state has no P-representation."""
    if not is_classical(cov):
        raise UnsupportedConfigurationError("state is nonclassical; P-representation sampling is undefined")
    V = cov.data - gc.VACUUM * np.eye(cov.data.shape[0])
    w, Q = np.linalg.eigh(V)
    return Q * np.sqrt(np.clip(w, 0.0, None))


def sample_amplitude_sums(cov: gc.CovMatrix, M: int, size: int, rng: np.random.Generator,
                          per_mode: bool = False) -> np.ndarray:
    """``size`` draws of ``sum_m u_m u_m^T`` over ``M`` modes, ``u_m`` the P-quadratures.

    The sum is Wishart distributed, so by default it is drawn directly;
    ``per_mode=True`` samples every mode's amplitudes explicitly instead.
    """
    L = _p_factor(cov)
    d = L.shape[0]
    if per_mode:
        u = rng.standard_normal((size, M, d)) @ L.T
        return np.einsum("tmi,tmj->tij", u, u)
    W = wishart(df=M, scale=np.eye(d)).rvs(size=size, random_state=rng).reshape(size, d, d)
    return L @ W @ L.T


def _se_of_variance(c: np.ndarray, var: float) -> float:
    n = c.size
    m4 = math.fsum(c ** 4) / n
    return math.sqrt(max(m4 - var ** 2, 0.0) / n)


@dataclass(frozen=True)
class SampleMoments:
    n: int
    mean: float
    mean_se: float
    var: float
    var_se: float


def _moments(x: np.ndarray) -> SampleMoments:
    x = np.asarray(x, dtype=float)
    n = x.size
    mean = math.fsum(x) / n
    c = x - mean
    var = math.fsum(c * c) / (n - 1)
    return SampleMoments(n, mean, math.sqrt(var / n), var, _se_of_variance(c, var))


# ------------------------------------------------------------ homodyne MC

def homodyne_pair_cov(p: SystemParams, bit: int, config: str = "passive_ase") -> gc.CovMatrix:
    """Covariance of (returned signal, stored reference) per mode, before detection loss."""
    if config == "passive_ase":
        cov = gc.make_correlated_thermal(p.N_S, p.N_LO)          # (signal, reference)
        cov = gc.apply_loss(cov, 0, p.kappa_S)
        cov = gc.apply_bpsk(cov, 0, bit)
        cov = gc.apply_phase_insensitive_amp(cov, 0, p.G_B, p.N_B)
        return gc.apply_loss(cov, 0, p.kappa_S)
    if config == "active":
        eve = solve_active_eve(p.N_S, p.kappa_S, p.f)
        # (Alice's SPDC signal, ASE, reference, Eve's SPDC signal); idlers traced out
        cov = gc.direct_sum(gc.thermal(p.N_SPDC), gc.make_correlated_thermal(p.N_ASE, p.N_LO),
                            gc.thermal(eve.N_Eve))
        cov = gc.apply_beamsplitter(cov, (0, 1), p.kappa_A)
        cov = gc.apply_beamsplitter(cov, (0, 3), eve.kappa_AB)
        cov = gc.apply_bpsk(cov, 0, bit)
        cov = gc.apply_loss(cov, 0, 1 - p.kappa_B)
        cov = gc.apply_phase_insensitive_amp(cov, 0, p.G_B, p.N_B)
        cov = gc.apply_loss(cov, 0, eve.kappa_BA)
        return cov.submatrix([0, 2])
    raise UnsupportedConfigurationError(f"no homodyne chain for configuration {config!r}")


def homodyne_count_moments(pair: gc.CovMatrix, M: int, eta: float) -> tuple[float, float]:
    """Exact mean and variance of the photocount difference for ``M`` i.i.d. mode pairs."""
    cov = gc.apply_beamsplitter(pair, (0, 1), 0.5)
    cov = gc.apply_loss(gc.apply_loss(cov, 0, eta), 1, eta)
    fm = gaussian_count_moments(cov, [0], [1], M)
    var_x = fm[2, 0] + fm[1, 0] - fm[1, 0] ** 2
    var_y = fm[0, 2] + fm[0, 1] - fm[0, 1] ** 2
    cov_xy = fm[1, 1] - fm[1, 0] * fm[0, 1]
    return float(fm[1, 0] - fm[0, 1]), float(var_x + var_y - 2 * cov_xy)


@dataclass(frozen=True)
class HomodyneMcResult:
    pr_e: float
    pr_e_se: float
    bit0: SampleMoments
    bit1: SampleMoments
    trials: int


def _homodyne_counts(cov: gc.CovMatrix, M: int, eta: float, size: int, rng, per_mode: bool) -> np.ndarray:
    S = sample_amplitude_sums(cov, M, size, rng, per_mode)
    Sbb = S[:, 0, 0] + S[:, 1, 1]
    Srr = S[:, 2, 2] + S[:, 3, 3]
    Sbr = S[:, 0, 2] + S[:, 1, 3]
    # 50/50 mixing then detection: intensities eta |alpha_B +- alpha_R|^2 / 2
    plus = np.clip(0.5 * eta * (Sbb + Srr + 2 * Sbr), 0.0, None)
    minus = np.clip(0.5 * eta * (Sbb + Srr - 2 * Sbr), 0.0, None)
    return rng.poisson(plus) - rng.poisson(minus)


def mc_homodyne_error_rate(cfg: McConfig, config: str = "passive_ase", per_mode: bool = False,
                           max_workers: int | None = None) -> HomodyneMcResult:
    """Empirical error rate of the homodyne receiver for equiprobable bits.

    Trials alternate between the two bits. Alice decides bit 0 when the
    photocount difference is positive; ties are split with a fair coin.
    """
    p, M = cfg.params, cfg.modes
    covs = [homodyne_pair_cov(p, b, config) for b in (0, 1)]
    for c in covs:
        _p_factor(c)  # fail fast on nonclassical input

    def shard(plan):
        n, seq = plan
        rng = np.random.default_rng(seq)
        out = []
        for bit, size in ((0, (n + 1) // 2), (1, n // 2)):
            if size == 0:
                out.append((np.empty(0, dtype=np.int64), 0))
                continue
            counts = _homodyne_counts(covs[bit], M, p.eta, size, rng, per_mode)
            tie = counts == 0
            coin = rng.random(size) < 0.5
            decide0 = (counts > 0) | (tie & coin)
            errors = int(np.count_nonzero(~decide0 if bit == 0 else decide0))
            out.append((counts, errors))
        return out

    results = ordered_map(shard, cfg.shard_plan(), max_workers)
    per_bit = []
    for bit in (0, 1):
        counts = np.concatenate([r[bit][0] for r in results])
        errors = sum(r[bit][1] for r in results)
        per_bit.append((counts, errors))
    (c0, e0), (c1, e1) = per_bit
    n0, n1 = c0.size, c1.size
    q0 = e0 / n0
    q1 = e1 / n1 if n1 else q0
    pr_e = 0.5 * (q0 + q1)
    var = q0 * (1 - q0) / n0 + (q1 * (1 - q1) / n1 if n1 else 0.0)
    se = 0.5 * math.sqrt(var)
    return HomodyneMcResult(pr_e=pr_e, pr_e_se=se, bit0=_moments(c0),
                            bit1=_moments(c1) if n1 > 1 else _moments(c0), trials=cfg.trials)


# ---------------------------------------------------------- coincidence MC

@dataclass(frozen=True)
class CoincidenceMcResult:
    """Per-gate product statistics scaled to rates.

    ``var_C`` is the variance of the time-averaged coincidence rate for a
    window of ``T_M = gates * T_g``.
    """

    C_AB: float
    C_AB_se: float
    var_C: float
    var_C_se: float
    S_A: float
    S_B: float
    T_M: float
    gates: int
    sampler: str


def _pair_model_counts(p: SystemParams, M: int, size: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Exact photocounts of the monitor pair per gate, valid also for nonclassical states.

    SPDC pairs are negative-binomial; each idler photon is detected with
    probability ``eta``, each signal photon reaches Bob's detector with
    probability ``eta T``. The rest of Bob's light is thermal noise, which
    stimulates the detected pair photons (Bose bunching).
    """
    N = p.N_SPDC
    T = p.kappa_B * p.f * p.kappa_S * p.kappa_A
    noise = p.eta * p.kappa_B * p.kappa_S * p.N_S - p.eta * T * N
    if noise < -1e-15:
        raise UnsupportedConfigurationError("Bob's monitor light is below the SPDC pair contribution")
    noise = max(noise, 0.0)
    pairs = rng.negative_binomial(M, 1.0 / (1.0 + N), size)
    x = rng.binomial(pairs, p.eta)
    j = rng.binomial(pairs, p.eta * T)
    q = 1.0 / (1.0 + noise)
    k = rng.binomial(j, q)
    y = k + rng.negative_binomial(k + M, q)
    return x, y


def _classical_counts(cov: gc.CovMatrix, M: int, eta: float, size: int, rng) -> tuple[np.ndarray, np.ndarray]:
    S = sample_amplitude_sums(cov, M, size, rng)
    ia = eta * (S[:, 0, 0] + S[:, 1, 1])
    ib = eta * (S[:, 2, 2] + S[:, 3, 3])
    return rng.poisson(np.clip(ia, 0, None)), rng.poisson(np.clip(ib, 0, None))


def mc_coincidence_counting(cfg: McConfig, max_workers: int | None = None) -> CoincidenceMcResult:
    """Simulate ``cfg.trials`` coincidence gates of ``M_g = T_g W`` mode pairs each.

    Classical monitor states are sampled from their P-representation;
    nonclassical ones (the usual case, since Alice keeps an SPDC idler) use
    the exact photon-pair counting model.
    """
    p = cfg.params
    M = int(round(p.M_g))
    if M < 1 or abs(M - p.M_g) > 1e-9 * p.M_g:
        raise DomainError(f"T_g W must be a positive integer number of modes, got {p.M_g}")
    cov = monitor_cov(p)
    sampler = "p-representation" if is_classical(cov) else "pair-model"

    def shard(plan):
        n, seq = plan
        rng = np.random.default_rng(seq)
        if sampler == "p-representation":
            return _classical_counts(cov, M, p.eta, n, rng)
        return _pair_model_counts(p, M, n, rng)

    results = ordered_map(shard, cfg.shard_plan(), max_workers)
    x = np.concatenate([r[0] for r in results])
    y = np.concatenate([r[1] for r in results])
    prod = _moments(x * y)
    gates = x.size
    T_M = gates * p.T_g
    scale = 1.0 / (p.T_g * T_M)
    return CoincidenceMcResult(C_AB=prod.mean / p.T_g, C_AB_se=prod.mean_se / p.T_g,
                               var_C=prod.var * scale, var_C_se=prod.var_se * scale,
                               S_A=math.fsum(x) / T_M, S_B=math.fsum(y) / T_M, T_M=T_M,
                               gates=gates, sampler=sampler)
