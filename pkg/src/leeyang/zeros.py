"""Lee-Yang zeros on the unit circle, z_n = exp(-i theta_n)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._precise import coherence_signs
from .ising import IsingParams, PartitionPolynomial, build_polynomial

BISECTION_TOL = 1e-12
CLUSTER_TOL = 1e-9
CIRCLE_TOL = 1e-8
DEGENERATE_BETA_J = 1e-12
MAX_POLY_DEGREE = 64
_SCAN_CHUNK = 1024


class ZeroCountError(ArithmeticError):
    """The located zeros (with multiplicity) do not add up to N.

    The partial set is attached as ``zeros``.
    """

    def __init__(self, message, zeros):
        super().__init__(message)
        self.zeros = zeros


class ConvergenceError(ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(eq=False)
class ZeroSet:
    """Zeros as angles theta_n in (0, 2 pi), ascending.

    ``moduli`` is None for zeros that lie on the unit circle by construction;
    the polynomial root finder fills it with the computed |z_n|.
    """

    angles: np.ndarray
    multiplicities: np.ndarray
    params: IsingParams
    uncertainties: np.ndarray | None = None
    moduli: np.ndarray | None = None

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.multiplicities = np.asarray(self.multiplicities, dtype=int)
        if self.uncertainties is not None:
            self.uncertainties = np.asarray(self.uncertainties, dtype=float)
        if self.moduli is not None:
            self.moduli = np.asarray(self.moduli, dtype=float)

    def __len__(self):
        return len(self.angles)

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def is_complete(self) -> bool:
        return self.total == self.params.n_spins

    @property
    def z_values(self) -> np.ndarray:
        r = 1.0 if self.moduli is None else self.moduli
        return r * np.exp(-1j * self.angles)

    @property
    def times(self) -> np.ndarray:
        return self.angles / self.params.probe_coupling

    def expanded_angles(self) -> np.ndarray:
        """Angles repeated by multiplicity."""
        return np.repeat(self.angles, self.multiplicities)

    def to_dict(self) -> dict:
        d = {
            "params": self.params.to_dict(),
            "angles": self.angles.tolist(),
            "multiplicities": self.multiplicities.tolist(),
            "uncertainties": None if self.uncertainties is None else self.uncertainties.tolist(),
        }
        if self.moduli is not None:
            d["moduli"] = self.moduli.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "ZeroSet":
        return cls(d["angles"], d["multiplicities"], IsingParams.from_dict(d["params"]),
                   d.get("uncertainties"), d.get("moduli"))

    @classmethod
    def from_json(cls, text: str) -> "ZeroSet":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "theta", "multiplicity", "t", "re_z", "im_z", "delta_theta"])
        z = self.z_values * np.ones(len(self))
        dtheta = self.uncertainties if self.uncertainties is not None else [None] * len(self)
        for i in range(len(self)):
            writer.writerow([i + 1, repr(float(self.angles[i])), int(self.multiplicities[i]),
                             repr(float(self.times[i])), repr(float(z[i].real)),
                             repr(float(z[i].imag)),
                             "" if dtheta[i] is None else repr(float(dtheta[i]))])
        return buf.getvalue()


def cluster_roots(angles, tol=CLUSTER_TOL):
    """Merge sorted angles closer than ``tol``; returns (angles, multiplicities)."""
    angles = np.sort(np.asarray(angles, dtype=float))
    if angles.size == 0:
        return angles, np.zeros(0, dtype=int)
    groups = [[angles[0]]]
    for a in angles[1:]:
        if a - groups[-1][-1] < tol:
            groups[-1].append(a)
        else:
            groups.append([a])
    return (np.array([np.mean(g) for g in groups]),
            np.array([len(g) for g in groups], dtype=int))


def scan_grid(n_spins: int) -> np.ndarray:
    """Cell-centred grid on (0, 2 pi); for even size it never hits theta = pi."""
    m = max(4096, 64 * n_spins)
    return (np.arange(m) + 0.5) * (2 * np.pi / m)


def _bisect(n_spins, beta_j, lo, hi, sign_lo):
    """Vectorized bisection of sign changes; ``sign_lo`` is the sign at ``lo``."""
    lo, hi = lo.copy(), hi.copy()
    done = np.zeros(lo.size, dtype=bool)
    while True:
        active = ~done & (hi - lo > 2 * BISECTION_TOL)
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        s = coherence_signs(n_spins, beta_j, mid)
        idx = np.flatnonzero(active)
        hit = s == 0
        lo[idx[hit]] = hi[idx[hit]] = mid[hit]
        done[idx[hit]] = True
        same = (s == sign_lo[idx]) & ~hit
        lo[idx[same]] = mid[same]
        flip = ~same & ~hit
        hi[idx[flip]] = mid[flip]
    return 0.5 * (lo + hi)


def _brackets(signs):
    """Indices i with a sign change between grid points i and i+1."""
    nonzero = np.flatnonzero(signs != 0)
    s = signs[nonzero]
    change = np.flatnonzero(s[:-1] != s[1:])
    return nonzero[change], nonzero[change + 1]


def _degenerate(params):
    return ZeroSet(np.array([np.pi]), np.array([params.n_spins]), params)


def _check_zero_field(params):
    if params.field != 0:
        raise ValueError("the real-coherence path requires h = 0; "
                         "use find_zeros_polynomial for a nonzero field")


def find_zeros_real(params: IsingParams) -> ZeroSet:
    """All zeros of the (real) zero-field coherence in one period.

    Brackets sign changes on a uniform grid of max(4096, 64 N) points and
    bisects each to 1e-12.  Raises :class:`ZeroCountError` when the count
    with multiplicity differs from N.
    """
    _check_zero_field(params)
    N, bj = params.n_spins, params.beta_j
    if bj < DEGENERATE_BETA_J:
        return _degenerate(params)
    grid = scan_grid(N)
    signs = coherence_signs(N, bj, grid)
    i, j = _brackets(signs)
    roots = _bisect(N, bj, grid[i], grid[j], signs[i])
    angles, mult = cluster_roots(roots)
    zeros = ZeroSet(angles, mult, params)
    if zeros.total != N:
        raise ZeroCountError(
            f"located {zeros.total} zeros for N = {N}, beta*J = {bj:g}: "
            "grid aliasing or an unresolved degenerate cluster", zeros)
    return zeros


def first_zero(params: IsingParams) -> float:
    """Smallest zero angle theta_1 (the Yang-Lee edge), scanning upward from 0.

    Same grid and refinement as :func:`find_zeros_real` but stops at the
    first sign change, which keeps large N affordable.
    """
    _check_zero_field(params)
    N, bj = params.n_spins, params.beta_j
    if bj < DEGENERATE_BETA_J:
        return math.pi
    grid = scan_grid(N)
    prev = 1  # L(0) = 1
    prev_theta = 0.0
    for start in range(0, grid.size, _SCAN_CHUNK):
        block = grid[start:start + _SCAN_CHUNK]
        signs = coherence_signs(N, bj, block)
        thetas = np.concatenate([[prev_theta], block])
        signs = np.concatenate([[prev], signs])
        i, j = _brackets(signs)
        if i.size:
            k = 0
            return float(_bisect(N, bj, thetas[i[k:k + 1]], thetas[j[k:k + 1]],
                                 signs[i[k:k + 1]])[0])
        nz = np.flatnonzero(signs)
        prev, prev_theta = signs[nz[-1]], thetas[nz[-1]]
    raise ZeroCountError(f"no zero found for N = {N}, beta*J = {bj:g}",
                         ZeroSet([], [], params))


def _aberth(coeffs, tol=1e-13, max_iter=500):
    """All roots of sum_k coeffs[k] z^k by Aberth-Ehrlich iteration.

    A root stops moving once its correction is below ``tol`` or |p(z)| is
    within the rounding error of Horner's rule (the achievable floor).
    """
    a = np.asarray(coeffs, dtype=complex)[::-1] / coeffs[-1]
    deg = a.size - 1
    da = a[:-1] * np.arange(deg, 0, -1)
    abs_a = np.abs(a)
    z = np.exp(1j * (2 * np.pi * (np.arange(deg) + 0.25) / deg + 0.4))
    active = np.ones(deg, dtype=bool)
    eps = np.finfo(float).eps
    step = np.zeros(deg)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return z
        za = z[idx]
        p = np.polyval(a, za)
        floor = 4 * deg * eps * np.polyval(abs_a, np.abs(za))
        dp = np.polyval(da, za)
        diff = za[:, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        repulsion = (1.0 / diff).sum(axis=1) - 1.0
        ratio = p / dp
        w = ratio / (1.0 - ratio * repulsion)
        z[idx] = za - w
        step[idx] = np.abs(w)
        settled = (np.abs(w) < tol) | (np.abs(p) <= floor)
        active[idx[settled]] = False
    raise ConvergenceError(
        f"Aberth iteration did not converge in {max_iter} steps "
        f"(max correction {step[active].max():.3g})", float(step[active].max()))


def find_zeros_polynomial(poly: PartitionPolynomial, max_iter: int = 500) -> ZeroSet:
    """Roots of sum_n p_n z^n for any field; degree limited to 64."""
    N = poly.degree
    if N > MAX_POLY_DEGREE:
        raise ValueError(f"dense root finding limited to degree {MAX_POLY_DEGREE}, got {N}")
    params = IsingParams(N, poly.coupling, poly.field, poly.beta)
    if poly.beta * poly.coupling < DEGENERATE_BETA_J:
        # (1 + z)^N: an N-fold root that iteration only resolves to eps^(1/N).
        zs = _degenerate(params)
        zs.moduli = np.ones(1)
        return zs
    roots = _aberth(poly.normalized_coeffs(), max_iter=max_iter)
    theta = np.mod(-np.angle(roots), 2 * np.pi)
    order = np.argsort(theta)
    theta, radius = theta[order], np.abs(roots[order])
    angles, mult = cluster_roots(theta)
    # Average moduli within each cluster (clusters are contiguous after sorting).
    bounds = np.concatenate([[0], np.cumsum(mult)])
    moduli = np.array([radius[bounds[k]:bounds[k + 1]].mean() for k in range(len(mult))])
    return ZeroSet(angles, mult, params, moduli=moduli)


@dataclass(frozen=True)
class CircleReport:
    max_deviation: float
    tolerance: float
    passed: bool
    off_circle: np.ndarray


def verify_circle_theorem(zeros: ZeroSet, tol: float = CIRCLE_TOL) -> CircleReport:
    """Check ||z_n| - 1| against ``tol`` for every zero."""
    if zeros.moduli is None:
        dev = np.zeros(len(zeros))
    else:
        dev = np.abs(zeros.moduli - 1.0)
    worst = float(dev.max()) if dev.size else 0.0
    return CircleReport(worst, tol, worst < tol, np.flatnonzero(dev >= tol))


def with_uncertainties(zeros: ZeroSet, uncertainties) -> ZeroSet:
    return replace(zeros, uncertainties=np.asarray(uncertainties, dtype=float))
