"""Probe-spin coherence L(theta), theta = lambda t.

L is the partition function at the complex field h + i theta / beta,
normalized by its value at theta = 0:

    L(theta) = sum_n q_n exp(i (N/2 - n) theta) / sum_n q_n,
    q_n = p_n z^n,  z = exp(-beta h).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .ising import IsingParams, build_polynomial

DEFAULT_SAMPLES = 2048


def _normalized_weights(params: IsingParams):
    poly = build_polynomial(params)
    n = np.arange(params.n_spins + 1)
    lq = poly.log_coeffs + n * poly.log_z
    w = np.exp(lq - lq.max())
    return w / w.sum(), params.n_spins / 2.0 - n


def coherence_at(params: IsingParams, theta):
    """Complex coherence at angle(s) theta; scalar in, scalar out."""
    w, m = _normalized_weights(params)
    th = np.asarray(theta, dtype=float)
    values = np.exp(1j * np.multiply.outer(th, m)) @ w
    if th.ndim == 0:
        return complex(values) if th != 0 else 1.0 + 0.0j
    values[th == 0] = 1.0
    return values


def coherence_sensitivity(params: IsingParams, theta):
    """dL/dtheta, differentiated term by term."""
    w, m = _normalized_weights(params)
    th = np.asarray(theta, dtype=float)
    values = np.exp(1j * np.multiply.outer(th, m)) @ (1j * m * w)
    return complex(values) if th.ndim == 0 else values


def log_partition_complex(params: IsingParams, theta) -> complex:
    """log Xi(beta, h + i theta / beta), summed directly in complex log space.

    Independent of :func:`coherence_at`; the imaginary part is only defined
    modulo 2 pi.
    """
    poly = build_polynomial(params)
    N = params.n_spins
    bh = params.beta_h + 1j * float(theta)
    n = np.arange(N + 1)
    terms = poly.log_coeffs - n * bh
    shift = terms.real.max()
    total = np.sum(np.exp(terms - shift))
    return complex(N * (N - 1) * params.beta_j / 8.0 + N * bh / 2.0 + shift + np.log(total))


@dataclass(eq=False)
class CoherenceTrace:
    times: np.ndarray
    angles: np.ndarray
    values: np.ndarray
    params: IsingParams

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "theta", "re_L", "im_L"])
        for row in zip(self.times, self.angles, self.values.real, self.values.imag):
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "t": self.times.tolist(),
            "theta": self.angles.tolist(),
            "re_L": self.values.real.tolist(),
            "im_L": self.values.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "CoherenceTrace":
        values = np.asarray(d["re_L"], dtype=float) + 1j * np.asarray(d["im_L"], dtype=float)
        return cls(np.asarray(d["t"], dtype=float), np.asarray(d["theta"], dtype=float),
                   values, IsingParams.from_dict(d["params"]))

    @classmethod
    def from_json(cls, text: str) -> "CoherenceTrace":
        return cls.from_dict(json.loads(text))


def period(params: IsingParams) -> float:
    """One full period 2 pi / lambda of the probe precession, in seconds."""
    if params.probe_coupling <= 0:
        raise ValueError("probe_coupling must be > 0 to define a time axis")
    return 2 * math.pi / params.probe_coupling


def coherence_trace(params: IsingParams, t_start=0.0, t_end=None,
                    n_samples=DEFAULT_SAMPLES + 1) -> CoherenceTrace:
    """Sample L on a uniform time grid, by default over one full period."""
    if t_end is None:
        t_end = t_start + period(params)
    elif params.probe_coupling <= 0:
        raise ValueError("probe_coupling must be > 0 to define a time axis")
    if not (math.isfinite(t_start) and math.isfinite(t_end)):
        raise ValueError("trace bounds must be finite")
    if t_end <= t_start:
        raise ValueError("t_end must exceed t_start")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    times = np.linspace(t_start, t_end, int(n_samples))
    angles = params.probe_coupling * times
    return CoherenceTrace(times, angles, coherence_at(params, angles), params)
