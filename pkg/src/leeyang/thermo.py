"""Free energy from the partition function or from its zeros, and the
Yang-Lee edge as a function of temperature."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ising import IsingParams, critical_temperature, partition_direct, saddle_point
from .zeros import ZeroSet, first_zero

SOURCES = ("direct", "from_zeros", "saddle_large_n")


@dataclass(frozen=True)
class FreeEnergyResult:
    log_partition: float
    free_energy: float
    per_spin: float
    beta: float
    field: float
    n_spins: int
    source: str

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "logZ": self.log_partition,
            "F": self.free_energy,
            "F_per_spin": self.per_spin,
            "source": self.source,
            "field": self.field,
            "n_spins": self.n_spins,
        }

    @classmethod
    def from_dict(cls, d) -> "FreeEnergyResult":
        return cls(d["logZ"], d["F"], d["F_per_spin"], d["beta"], d["field"],
                   d["n_spins"], d["source"])


def _result(log_z, params, source):
    if params.beta <= 0:
        raise ValueError("free energy needs beta > 0 (F is undefined at infinite T)")
    f = -log_z / params.beta
    return FreeEnergyResult(float(log_z), f, f / params.n_spins, params.beta,
                            params.field, params.n_spins, source)


def free_energy_direct(params: IsingParams) -> FreeEnergyResult:
    """F = -T log Xi with Xi summed from the polynomial coefficients."""
    if params.beta <= 0:
        raise ValueError("free energy needs beta > 0 (F is undefined at infinite T)")
    return _result(partition_direct(params), params, "direct")


def free_energy_from_zeros(zeros: ZeroSet) -> FreeEnergyResult:
    """Rebuild log Xi from the zeros alone.

    Xi = exp(N(N-1) beta J / 8 + N beta h / 2) * prod_n (z - z_n) with
    z = exp(-beta h); the leading coefficient p_N is 1.  Conjugate pairing
    makes the product real and positive, so only log|z - z_n| is summed.
    """
    params = zeros.params
    if not zeros.is_complete:
        raise ValueError(f"incomplete zero set: {zeros.total} of {params.n_spins} zeros")
    if params.beta <= 0:
        raise ValueError("free energy needs beta > 0 (F is undefined at infinite T)")
    N = params.n_spins
    z = math.exp(-params.beta_h)
    log_z = (N * (N - 1) * params.beta_j / 8.0 + N * params.beta_h / 2.0
             + float(np.sum(zeros.multiplicities * np.log(np.abs(z - zeros.z_values)))))
    return _result(log_z, params, "from_zeros")


def free_energy_saddle(params: IsingParams) -> FreeEnergyResult:
    """Leading large-N estimate log Xi = -N beta J / 8 - N phi(x*)."""
    sp = saddle_point(params)
    N = params.n_spins
    return _result(-N * params.beta_j / 8.0 - N * sp.phi_at_saddle, params, "saddle_large_n")


@dataclass(eq=False)
class EdgeCurve:
    """First zero theta_1 against temperature, T stored in units of N J."""

    t_over_nj: np.ndarray
    theta1: np.ndarray
    n_spins: int
    coupling: float
    estimated_tc: float | None = None
    tc_method: str = ""

    @property
    def temperatures(self) -> np.ndarray:
        return self.t_over_nj * self.n_spins * self.coupling

    @property
    def analytic_tc(self) -> float:
        return critical_temperature(self.n_spins, self.coupling)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T_over_NJ", "theta1"])
        for t, th in zip(self.t_over_nj, self.theta1):
            writer.writerow([repr(float(t)), repr(float(th))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "coupling": self.coupling,
            "T_over_NJ": self.t_over_nj.tolist(),
            "theta1": self.theta1.tolist(),
            "estimated_tc": self.estimated_tc,
            "analytic_tc": self.analytic_tc,
            "tc_method": self.tc_method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "EdgeCurve":
        return cls(np.asarray(d["T_over_NJ"], dtype=float), np.asarray(d["theta1"], dtype=float),
                   d["n_spins"], d["coupling"], d.get("estimated_tc"), d.get("tc_method", ""))

    @classmethod
    def from_json(cls, text: str) -> "EdgeCurve":
        return cls.from_dict(json.loads(text))


def _edge_at(args):
    n_spins, coupling, temperature = args
    beta = 0.0 if math.isinf(temperature) else 1.0 / temperature
    return first_zero(IsingParams(n_spins, coupling, 0.0, beta))


def edge_scan(n_spins: int, coupling: float, temperatures, workers: int | None = 1) -> EdgeCurve:
    """theta_1(T) on the caller's temperature grid (absolute units, ascending).

    ``workers`` > 1 spreads temperatures over processes; results keep the
    input order.
    """
    temps = np.asarray(temperatures, dtype=float)
    if temps.ndim != 1 or temps.size == 0:
        raise ValueError("temperatures must be a non-empty 1-d array")
    if np.any(temps <= 0) or np.any(np.isnan(temps)):
        raise ValueError("temperatures must be positive")
    if np.any(np.diff(temps) <= 0):
        raise ValueError("temperatures must be strictly ascending")
    jobs = [(n_spins, coupling, float(t)) for t in temps]
    if workers is not None and workers <= 1:
        theta1 = [_edge_at(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            theta1 = list(pool.map(_edge_at, jobs))
    curve = EdgeCurve(temps / (n_spins * coupling), np.array(theta1), n_spins, coupling)
    curve.estimated_tc = estimate_tc(curve)
    if curve.estimated_tc is not None:
        curve.tc_method = "max second derivative of theta1(T) (curvature knee)"
    else:
        curve.tc_method = "no estimate"
    return curve


def estimate_tc(curve: EdgeCurve) -> float | None:
    """Temperature of the sharpest upward bend of theta_1(T), or None.

    Uses the three-point second derivative on the (possibly non-uniform)
    sample grid.  Needs at least 8 finite samples on both sides of N J / 4.
    """
    t = np.asarray(curve.t_over_nj, dtype=float)
    y = np.asarray(curve.theta1, dtype=float)
    finite = np.isfinite(t) & np.isfinite(y)
    t, y = t[finite], y[finite]
    if t.size < 8 or not (t.min() < 0.25 < t.max()):
        return None
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    d2 = 2.0 * (h0 * y[2:] - (h0 + h1) * y[1:-1] + h1 * y[:-2]) / (h0 * h1 * (h0 + h1))
    span = y.max() - y.min()
    if span <= 1e-9 * max(1.0, abs(y).max()) or d2.max() <= 0:
        return None
    k = int(np.argmax(d2)) + 1
    return float(t[k] * curve.n_spins * curve.coupling)
