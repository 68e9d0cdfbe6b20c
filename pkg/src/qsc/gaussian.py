"""Wigner covariance matrices of zero-mean Gaussian states.

Quadratures are interleaved as ``(x_1, p_1, x_2, p_2, ...)`` with
``a = x + i p``, so the vacuum has covariance ``I / 4`` and a thermal mode
with mean photon number ``N`` has ``(2N + 1) / 4`` on its diagonal.

All transforms are pure: they return a new :class:`CovMatrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, PhysicalityError

VACUUM = 0.25
SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Real symmetric ``2n x 2n`` covariance of an ``n``-mode Gaussian state."""

    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 or a.shape[0] == 0:
            raise PhysicalityError(f"covariance must be a non-empty 2n x 2n matrix, got shape {a.shape}")
        scale = max(float(np.max(np.abs(a))), VACUUM)
        if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
            raise PhysicalityError("covariance matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2

    def block(self, i: int, j: int | None = None) -> np.ndarray:
        """2x2 block coupling modes ``i`` and ``j`` (``j`` defaults to ``i``)."""
        j = i if j is None else j
        return self.data[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def mean_photons(self, mode: int) -> float:
        b = self.block(mode)
        return float(b[0, 0] + b[1, 1] - 2 * VACUUM)

    def submatrix(self, modes: Sequence[int]) -> "CovMatrix":
        idx = _quadrature_indices(modes)
        return CovMatrix(self.data[np.ix_(idx, idx)])

    def allclose(self, other: "CovMatrix", atol: float = 1e-12) -> bool:
        return self.data.shape == other.data.shape and bool(np.allclose(self.data, other.data, rtol=0, atol=atol))

    def __repr__(self):
        return f"CovMatrix(n_modes={self.n_modes})"


def _quadrature_indices(modes: Sequence[int]) -> list[int]:
    return [q for m in modes for q in (2 * m, 2 * m + 1)]


def _check_mode(cov: CovMatrix, mode: int) -> None:
    if not 0 <= mode < cov.n_modes:
        raise DomainError(f"mode index {mode} out of range for {cov.n_modes}-mode state")


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` blocks."""
    if n_modes < 1:
        raise DomainError("n_modes must be positive")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum(n_modes: int = 1) -> CovMatrix:
    return CovMatrix(VACUUM * np.eye(2 * n_modes))


def thermal(N: float) -> CovMatrix:
    """Single-mode thermal state with mean photon number ``N``."""
    if N < 0:
        raise DomainError(f"mean photon number must be >= 0, got {N}")
    return CovMatrix((2 * N + 1) * VACUUM * np.eye(2))


def direct_sum(*covs: CovMatrix) -> CovMatrix:
    """Joint covariance of independent subsystems, in argument order."""
    size = sum(c.data.shape[0] for c in covs)
    out = np.zeros((size, size))
    k = 0
    for c in covs:
        d = c.data.shape[0]
        out[k:k + d, k:k + d] = c.data
        k += d
    return CovMatrix(out)


def make_tmsv(N_S: float) -> CovMatrix:
    """Two-mode squeezed vacuum (signal, idler), ``N_S`` photons per mode."""
    if N_S < 0:
        raise DomainError(f"N_S must be >= 0, got {N_S}")
    d = 2 * N_S + 1
    c = 2 * np.sqrt(N_S * (N_S + 1))
    return CovMatrix(VACUUM * np.array([
        [d, 0, c, 0],
        [0, d, 0, -c],
        [c, 0, d, 0],
        [0, -c, 0, d],
    ]))


def make_correlated_thermal(N_S: float, N_LO: float) -> CovMatrix:
    """Completely correlated thermal pair (signal, reference), e.g. split ASE light."""
    if N_S < 0 or N_LO < 0:
        raise DomainError(f"photon numbers must be >= 0, got N_S={N_S}, N_LO={N_LO}")
    a, b = 2 * N_S + 1, 2 * N_LO + 1
    c = 2 * np.sqrt(N_S * N_LO)
    return CovMatrix(VACUUM * np.array([
        [a, 0, c, 0],
        [0, a, 0, c],
        [c, 0, b, 0],
        [0, c, 0, b],
    ]))


def _gaussian_channel(cov: CovMatrix, X: np.ndarray, Y: np.ndarray) -> CovMatrix:
    return CovMatrix(X @ cov.data @ X.T + Y)


def apply_loss(cov: CovMatrix, mode: int, kappa: float) -> CovMatrix:
    """Pure-loss channel of transmissivity ``kappa`` on one mode."""
    _check_mode(cov, mode)
    _check_unit_interval("transmissivity", kappa)
    n = cov.data.shape[0]
    X, Y = np.eye(n), np.zeros((n, n))
    i = 2 * mode
    X[i:i + 2, i:i + 2] *= np.sqrt(kappa)
    Y[i:i + 2, i:i + 2] = (1 - kappa) * VACUUM * np.eye(2)
    return _gaussian_channel(cov, X, Y)


def apply_phase_insensitive_amp(cov: CovMatrix, mode: int, G: float, N_out: float) -> CovMatrix:
    """Phase-insensitive amplifier ``a -> sqrt(G) a + sqrt(G-1) n^dagger``.

    ``N_out`` is the output photon number for a vacuum input, so a mean
    photon number ``N`` becomes ``G N + N_out``. Requires ``N_out >= G - 1``.
    """
    _check_mode(cov, mode)
    if G < 1:
        raise DomainError(f"amplifier gain must be >= 1, got {G}")
    if N_out < G - 1 - 1e-12 * G:
        raise DomainError(f"output noise N_out={N_out} is below the quantum limit G-1={G - 1}")
    n = cov.data.shape[0]
    X, Y = np.eye(n), np.zeros((n, n))
    i = 2 * mode
    X[i:i + 2, i:i + 2] *= np.sqrt(G)
    Y[i:i + 2, i:i + 2] = (2 * N_out + 1 - G) * VACUUM * np.eye(2)
    return _gaussian_channel(cov, X, Y)


def apply_beamsplitter(cov: CovMatrix, modes: tuple[int, int], kappa: float) -> CovMatrix:
    """Beam splitter: ``i -> sqrt(k) i + sqrt(1-k) j``, ``j -> sqrt(1-k) i - sqrt(k) j``."""
    i, j = modes
    if i == j:
        raise DomainError("beam splitter needs two distinct modes")
    _check_mode(cov, i)
    _check_mode(cov, j)
    _check_unit_interval("transmissivity", kappa)
    n = cov.data.shape[0]
    X = np.eye(n)
    t, r = np.sqrt(kappa), np.sqrt(1 - kappa)
    I2 = np.eye(2)
    a, b = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
    X[a, a], X[a, b] = t * I2, r * I2
    X[b, a], X[b, b] = r * I2, -t * I2
    return _gaussian_channel(cov, X, np.zeros((n, n)))


def apply_two_mode_squeezer(cov: CovMatrix, modes: tuple[int, int], G: float) -> CovMatrix:
    """Parametric amplifier ``i -> sqrt(G) i + sqrt(G-1) j^dagger`` (and ``i <-> j``)."""
    i, j = modes
    if i == j:
        raise DomainError("parametric amplifier needs two distinct modes")
    _check_mode(cov, i)
    _check_mode(cov, j)
    if G < 1:
        raise DomainError(f"parametric gain must be >= 1, got {G}")
    n = cov.data.shape[0]
    X = np.eye(n)
    g, h = np.sqrt(G), np.sqrt(G - 1)
    Z = np.diag([1.0, -1.0])
    a, b = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
    X[a, a], X[a, b] = g * np.eye(2), h * Z
    X[b, a], X[b, b] = h * Z, g * np.eye(2)
    return _gaussian_channel(cov, X, np.zeros((n, n)))


def apply_bpsk(cov: CovMatrix, mode: int, bit: int) -> CovMatrix:
    """Binary phase-shift keying: a pi phase shift on ``mode`` when ``bit == 1``."""
    _check_mode(cov, mode)
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit}")
    if bit == 0:
        return cov
    X = np.eye(cov.data.shape[0])
    X[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] *= -1
    return _gaussian_channel(cov, X, np.zeros_like(X))


def symplectic_eigenvalues(cov: CovMatrix) -> np.ndarray:
    """Symplectic spectrum, descending; the moduli of the eigenvalues of ``i Omega V``."""
    V = cov.data
    try:
        np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        raise PhysicalityError("covariance matrix is not positive definite") from None
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(cov.n_modes) @ V))
    # eigenvalues come in +/- pairs
    return np.sort(ev)[::-1][::2].copy()


def thermal_entropy(N):
    """Von Neumann entropy in bits of a thermal state, ``g(N)``; ``g(0) = 0``."""
    N = np.maximum(np.asarray(N, dtype=float), 0.0)
    safe = np.where(N > 0, N, 1.0)
    # g = log2(N+1) + N log2(1 + 1/N); log1p(1/N) is accurate for large N but
    # overflows for subnormal N, where log1p(N) - log(N) is used instead
    tail = np.where(safe >= 1, np.log1p(1.0 / np.maximum(safe, 1.0)), np.log1p(safe) - np.log(safe))
    out = np.where(N > 0, np.log2(N + 1) + N * tail / np.log(2.0), 0.0)
    return out if out.ndim else float(out)


def _occupations(nu: np.ndarray) -> np.ndarray:
    if np.any(nu < VACUUM - PHYSICALITY_TOL):
        raise PhysicalityError(f"symplectic eigenvalue {nu.min():.12g} below the vacuum value 1/4")
    return np.maximum(2 * nu - 0.5, 0.0)


def entropy_bits(cov: CovMatrix) -> float:
    """Von Neumann entropy (bits) of the Gaussian state with covariance ``cov``."""
    return float(np.sum(thermal_entropy(_occupations(symplectic_eigenvalues(cov)))))


def is_physical(cov: CovMatrix) -> bool:
    try:
        _occupations(symplectic_eigenvalues(cov))
    except PhysicalityError:
        return False
    return True


def _correlated_groups(cov: CovMatrix, atol: float = 0.0) -> list[list[int]]:
    n = cov.n_modes
    parent = list(range(n))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(cov.block(i, j))) > atol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for k in range(n):
        groups.setdefault(find(k), []).append(k)
    return list(groups.values())


def thermal_product_entropy(cov: CovMatrix) -> float:
    """Entropy (bits) of the independent thermal modes matching ``cov``.

    Uncorrelated modes contribute ``g`` of their mean photon number. Each
    group of mutually correlated modes is symplectically diagonalized first
    and contributes the thermal entropies of the resulting normal modes.
    This upper-bounds the entropy of any state with covariance ``cov``.
    """
    total = 0.0
    for group in _correlated_groups(cov):
        if len(group) == 1:
            N = cov.mean_photons(group[0])
            if N < -PHYSICALITY_TOL:
                raise PhysicalityError(f"mode {group[0]} has negative mean photon number {N}")
            total += thermal_entropy(N)
        else:
            total += entropy_bits(cov.submatrix(group))
    return float(total)
