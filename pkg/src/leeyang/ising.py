"""Long-range (Curie-Weiss) Ising model and its partition-function polynomial.

Spins take the values s = +-1/2 and every pair is coupled with the same
strength J:

    H = -J sum_{i<j} s_i s_j - h sum_j s_j

Units follow k_B = hbar = 1, so J, h and temperatures share one energy unit
(angular frequency in rad/s for the NMR parameters).  Everything that can
overflow is carried as a natural logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

# Trimethylphosphite parameters: bath coupling and probe-bath coupling.
J_TMP = 2 * np.pi * 16.75
LAMBDA_TMP = 2 * np.pi * 10.57

MAX_BRUTE_FORCE_SPINS = 20


@dataclass(frozen=True)
class IsingParams:
    """Model definition.

    ``beta`` is the (effective) inverse temperature.  ``probe_coupling`` is
    the Ising coupling lambda of the probe spin; it only sets the time scale
    t = theta / lambda of the coherence.
    """

    n_spins: int
    coupling: float
    field: float = 0.0
    beta: float = 0.0
    probe_coupling: float = LAMBDA_TMP

    def __post_init__(self):
        if isinstance(self.n_spins, bool) or int(self.n_spins) != self.n_spins:
            raise ValueError(f"n_spins must be an integer, got {self.n_spins!r}")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        if self.n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {self.n_spins}")
        for name in ("coupling", "field", "beta", "probe_coupling"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @classmethod
    def from_beta_j(cls, n_spins, beta_j, coupling=J_TMP, beta_h=0.0,
                    probe_coupling=LAMBDA_TMP) -> "IsingParams":
        """Build parameters from the dimensionless products beta*J and beta*h."""
        if not math.isfinite(beta_j) or beta_j < 0:
            raise ValueError(f"beta_j must be finite and >= 0, got {beta_j}")
        if coupling == 0:
            raise ValueError("coupling must be nonzero to convert beta_j")
        beta = beta_j / coupling
        if beta_h and beta == 0:
            raise ValueError("beta_h != 0 requires beta_j > 0")
        field = beta_h / beta if beta_h else 0.0
        return cls(n_spins, coupling, field, beta, probe_coupling)

    @property
    def beta_j(self) -> float:
        return self.beta * self.coupling

    @property
    def beta_h(self) -> float:
        return self.beta * self.field

    @property
    def temperature(self) -> float:
        return math.inf if self.beta == 0 else 1.0 / self.beta

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "coupling": self.coupling,
            "field": self.field,
            "beta": self.beta,
            "probe_coupling": self.probe_coupling,
        }

    @classmethod
    def from_dict(cls, d) -> "IsingParams":
        return cls(d["n_spins"], d["coupling"], d.get("field", 0.0),
                   d.get("beta", 0.0), d.get("probe_coupling", LAMBDA_TMP))


@dataclass(frozen=True)
class PartitionPolynomial:
    """Xi = exp(log_prefactor) * sum_n p_n z^n with z = exp(-beta h).

    ``log_coeffs[n] = log p_n``; p_0 = p_N = 1 and p_n = p_{N-n}.
    """

    log_coeffs: np.ndarray
    log_prefactor: float
    n_spins: int
    beta: float
    coupling: float
    field: float

    @property
    def degree(self) -> int:
        return self.n_spins

    @property
    def log_z(self) -> float:
        return -self.beta * self.field

    def normalized_coeffs(self) -> np.ndarray:
        """Coefficients divided by the largest one (ascending powers of z)."""
        return np.exp(self.log_coeffs - self.log_coeffs.max())


@dataclass(frozen=True)
class SaddlePointResult:
    magnetization_x: float
    phi_at_saddle: float
    intensive_free_energy: float
    is_ordered: bool
    params: IsingParams = field(repr=False, default=None)


def log_binomial(n, k):
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def log_coefficients(n_spins: int, beta_j: float) -> np.ndarray:
    """log p_n = log C(N, n) + beta J (n^2 - N n) / 2 for n = 0..N."""
    n = np.arange(n_spins + 1, dtype=float)
    lc = log_binomial(n_spins, n) + 0.5 * beta_j * n * (n - n_spins)
    # Exact symmetry p_n = p_{N-n}; gammaln rounding can break the last bit.
    return 0.5 * (lc + lc[::-1])


def build_polynomial(params: IsingParams) -> PartitionPolynomial:
    if not math.isfinite(params.beta_j):
        raise ValueError("beta*J must be finite")
    N = params.n_spins
    log_coeffs = log_coefficients(N, params.beta_j)
    log_coeffs[0] = log_coeffs[-1] = 0.0
    log_prefactor = N * (N - 1) * params.beta_j / 8.0 + N * params.beta_h / 2.0
    return PartitionPolynomial(log_coeffs, log_prefactor, N, params.beta,
                               params.coupling, params.field)


def partition_direct(params: IsingParams) -> float:
    """log Xi from the polynomial, reduced with log-sum-exp."""
    poly = build_polynomial(params)
    n = np.arange(params.n_spins + 1)
    return float(poly.log_prefactor + logsumexp(poly.log_coeffs + n * poly.log_z))


def brute_force_partition(couplings, field: float, beta: float) -> float:
    """log Xi by enumerating all 2^N configurations of s_j = +-1/2.

    ``couplings`` is a symmetric N x N matrix; only the strict upper triangle
    (pairs i < j) enters the energy.
    """
    J = np.asarray(couplings, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError(f"couplings must be a square matrix, got shape {J.shape}")
    N = J.shape[0]
    if N < 1:
        raise ValueError("need at least one spin")
    if N > MAX_BRUTE_FORCE_SPINS:
        raise ValueError(
            f"brute-force enumeration limited to N <= {MAX_BRUTE_FORCE_SPINS} "
            f"(2^N states), got N = {N}")
    if not np.allclose(J, J.T, rtol=0, atol=0):
        raise ValueError("couplings must be symmetric")
    upper = np.triu(J, k=1)

    bits = np.arange(N)
    chunk = 1 << min(N, 16)
    log_terms = []
    for start in range(0, 1 << N, chunk):
        idx = np.arange(start, min(start + chunk, 1 << N))
        s = np.where((idx[:, None] >> bits) & 1, -0.5, 0.5)
        energy = -np.einsum("ki,ij,kj->k", s, upper, s) - field * s.sum(axis=1)
        log_terms.append(logsumexp(-beta * energy))
    return float(logsumexp(log_terms))


def degeneracy(n_spins: int, total_spin) -> int:
    """Number of copies D(S) of the total-spin-S multiplet among N spins-1/2."""
    two_s = 2 * total_spin
    if abs(two_s - round(two_s)) > 1e-9:
        raise ValueError(f"total_spin must be a multiple of 1/2, got {total_spin}")
    two_s = int(round(two_s))
    if two_s < 0 or two_s > n_spins or (n_spins - two_s) % 2:
        raise ValueError(f"S = {two_s}/2 is not admissible for N = {n_spins}")
    k = (n_spins - two_s) // 2
    return math.comb(n_spins, k) - (math.comb(n_spins, k - 1) if k >= 1 else 0)


def _phi(x, k):
    return ((0.5 + x) * np.log(0.5 + x) + (0.5 - x) * np.log(0.5 - x)
            - 0.5 * k * x * x)


def _phi_prime(x, k):
    return np.log((0.5 + x) / (0.5 - x)) - k * x


def saddle_point(params: IsingParams) -> SaddlePointResult:
    """Large-N saddle of phi(x) at zero field, x = n/N - 1/2 >= 0.

    With K = N beta J the saddle sits at x = 0 for K/4 <= 1 and at the
    positive root of log((1/2+x)/(1/2-x)) = K x otherwise.
    """
    if params.field != 0:
        raise ValueError("saddle-point analysis is defined at zero field")
    k = params.n_spins * params.beta_j
    if k / 4.0 <= 1.0:
        x = 0.0
    else:
        lo, hi = 1e-15, 0.5 - 1e-15
        while True:
            mid = 0.5 * (lo + hi)
            d = _phi_prime(mid, k)
            if abs(d) < 1e-13 or mid in (lo, hi):
                break
            if d < 0:
                lo = mid
            else:
                hi = mid
        x = mid
    phi = float(_phi(x, k))
    if params.beta > 0:
        f = params.coupling / 8.0 + phi / params.beta
    else:
        f = -math.inf
    return SaddlePointResult(x, phi, f, x > 0, params)


def critical_temperature(n_spins: int, coupling: float) -> float:
    """T_c = N J / 4, where N beta J / 4 = 1."""
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    if coupling <= 0:
        raise ValueError("critical temperature needs ferromagnetic J > 0")
    return n_spins * coupling / 4.0
