"""Synthetic version of the NMR measurement chain.

The bath is a Boltzmann mixture of magnetization sectors m.  The measured
free-induction decay is modelled as

    observed(t) = Re[ exp(-t/T2*) (L(t) + dL(t)) ] + Gaussian(0, eta)

with dL(t) = sum_m (dx_m - i dy_m) exp(-i m lambda t) from imperfect state
preparation.  Zeros are then recovered from the samples alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
from scipy.signal import savgol_filter

from .coherence import coherence_sensitivity
from .ising import IsingParams, log_binomial
from .zeros import ZeroSet

MAX_DELTA = 0.05
DEFAULT_WINDOW = 7
FLAT_SENSITIVITY = 1e-12


@dataclass(eq=False)
class EnsembleWeights:
    """Normalized sector weights C(N, N/2 - m) c_m / A, indexed by 2m."""

    two_m: np.ndarray
    weights: np.ndarray
    params: IsingParams

    def weight(self, m) -> float:
        k = int(round(2 * m))
        hit = np.flatnonzero(self.two_m == k)
        if hit.size == 0:
            raise KeyError(f"m = {m} is not a sector for N = {self.params.n_spins}")
        return float(self.weights[hit[0]])

    def coherence(self, theta):
        """L(theta) = sum_m w_m exp(-i m theta)."""
        th = np.asarray(theta, dtype=float)
        return np.exp(-0.5j * np.multiply.outer(th, self.two_m)) @ self.weights


def ensemble_weights(params: IsingParams) -> EnsembleWeights:
    N = params.n_spins
    two_m = np.arange(-N, N + 1, 2)
    m = two_m / 2.0
    # c_m = exp(beta J m^2 / 2) z^(-m), z = exp(-beta h)
    log_w = (log_binomial(N, N / 2.0 - m) + 0.5 * params.beta_j * m * m
             + params.beta_h * m)
    w = np.exp(log_w - log_w.max())
    return EnsembleWeights(two_m, w / w.sum(), params)


@dataclass(eq=False)
class NoiseModel:
    """State-preparation deviations keyed by 2m, T2* decay and sample noise.

    Empty delta maps mean ideal preparation.  ``t2_star`` may be ``inf``.
    """

    delta_x: dict = field(default_factory=dict)
    delta_y: dict = field(default_factory=dict)
    t2_star: float = math.inf
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.delta_x = {int(k): float(v) for k, v in self.delta_x.items()}
        self.delta_y = {int(k): float(v) for k, v in self.delta_y.items()}
        if set(self.delta_x) != set(self.delta_y):
            raise ValueError("delta_x and delta_y must cover the same sectors")
        for name, d in (("delta_x", self.delta_x), ("delta_y", self.delta_y)):
            bad = {k: v for k, v in d.items() if not abs(v) <= MAX_DELTA}
            if bad:
                raise ValueError(f"{name} outside [-{MAX_DELTA}, {MAX_DELTA}]: {bad}")
        if not self.t2_star > 0:
            raise ValueError(f"t2_star must be > 0, got {self.t2_star}")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be finite and >= 0, got {self.eta}")

    def delta_arrays(self, n_spins):
        """(two_m, dx, dy) over every sector of an N-spin bath."""
        two_m = np.arange(-n_spins, n_spins + 1, 2)
        if not self.delta_x:
            return two_m, np.zeros(two_m.size), np.zeros(two_m.size)
        if set(self.delta_x) != set(two_m.tolist()):
            raise ValueError(
                f"delta maps cover 2m = {sorted(self.delta_x)}, "
                f"expected {two_m.tolist()} for N = {n_spins}")
        return (two_m, np.array([self.delta_x[k] for k in two_m]),
                np.array([self.delta_y[k] for k in two_m]))

    def to_dict(self) -> dict:
        return {
            "t2_star_s": None if math.isinf(self.t2_star) else self.t2_star,
            "eta": self.eta,
            "seed": self.seed,
            "delta": [{"two_m": k, "dx": self.delta_x[k], "dy": self.delta_y[k]}
                      for k in sorted(self.delta_x)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d) -> "NoiseModel":
        t2 = d.get("t2_star_s")
        rows = d.get("delta", [])
        return cls({r["two_m"]: r["dx"] for r in rows}, {r["two_m"]: r["dy"] for r in rows},
                   math.inf if t2 is None else float(t2), float(d.get("eta", 0.0)),
                   int(d.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        return cls.from_dict(json.loads(text))


def load_table(name: str) -> dict:
    """Bundled measurement data: ``"measured_zeros"`` or ``"preparation_noise"``."""
    path = resources.files("leeyang") / "data" / f"{name}.json"
    return json.loads(path.read_text())


def preset_noise(label: str, seed: int = 0) -> NoiseModel:
    """Noise model from a bundled preset ("inf", "15J/8" or "9J/40")."""
    col = load_table("preparation_noise")["columns"][label]
    return NoiseModel.from_dict({**col, "seed": seed})


@dataclass(eq=False)
class MeasuredTrace:
    times: np.ndarray
    observed: np.ndarray
    true_trace: np.ndarray
    noise_model: NoiseModel
    params: IsingParams

    @property
    def angles(self) -> np.ndarray:
        return self.params.probe_coupling * self.times

    def envelope(self) -> np.ndarray:
        return np.exp(-self.times / self.noise_model.t2_star)

    def corrected(self) -> np.ndarray:
        """Observed signal with the known T2* decay divided out."""
        return self.observed / self.envelope()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "observed", "true_re_L"])
        for row in zip(self.times, self.observed, self.true_trace.real):
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "noise": self.noise_model.to_dict(),
            "t": self.times.tolist(),
            "observed": self.observed.tolist(),
            "true_re_L": self.true_trace.real.tolist(),
            "true_im_L": self.true_trace.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "MeasuredTrace":
        true = np.asarray(d["true_re_L"], dtype=float) + 1j * np.asarray(d["true_im_L"], dtype=float)
        return cls(np.asarray(d["t"], dtype=float), np.asarray(d["observed"], dtype=float),
                   true, NoiseModel.from_dict(d["noise"]), IsingParams.from_dict(d["params"]))


def synthesize_measurement(params: IsingParams, noise: NoiseModel, t_grid) -> MeasuredTrace:
    if params.field != 0:
        raise ValueError("measurement synthesis is implemented for h = 0")
    t = np.asarray(t_grid, dtype=float)
    theta = params.probe_coupling * t
    ens = ensemble_weights(params)
    true = ens.coherence(theta)
    two_m, dx, dy = noise.delta_arrays(params.n_spins)
    signal = true
    if np.any(dx) or np.any(dy):
        signal = true + np.exp(-0.5j * np.multiply.outer(theta, two_m)) @ (dx - 1j * dy)
    observed = np.real(signal) * np.exp(-t / noise.t2_star)
    if noise.eta > 0:
        observed = observed + np.random.default_rng(noise.seed).normal(0.0, noise.eta, t.size)
    return MeasuredTrace(t, observed, true, noise, params)


def _cubic_root(x, y, lo, hi):
    """Root of the least-squares cubic through (x, y) nearest the cell [lo, hi]."""
    x0 = 0.5 * (lo + hi)
    deg = min(3, x.size - 1)
    coeffs = np.polyfit(x - x0, y, deg)
    roots = np.roots(coeffs)
    roots = roots[np.abs(roots.imag) < 1e-9].real + x0
    width = hi - lo
    roots = roots[(roots > lo - 2 * width) & (roots < hi + 2 * width)]
    if roots.size == 0:
        return x0
    return float(roots[np.argmin(np.abs(roots - x0))])


def extract_zeros(trace: MeasuredTrace, window: int = DEFAULT_WINDOW) -> ZeroSet:
    """Zeros of the measured coherence from local cubic fits.

    The T2* envelope is divided out.  Crossings are located on a cubic
    Savitzky-Golay smoothing of the same window (noise would otherwise split
    one crossing into several); each root comes from a least-squares cubic
    over +-``window`` raw samples, truncated at the trace edges.  A set with
    fewer than N zeros is returned as is; check ``is_complete``.
    """
    theta = trace.angles
    y = trace.corrected()
    if y.size > 2 * window + 1:
        detector = savgol_filter(y, 2 * window + 1, 3, mode="interp")
    else:
        detector = y
    s = np.sign(detector)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    roots = []
    for i in idx:
        lo, hi = max(0, i - window), min(y.size, i + window + 2)
        roots.append(_cubic_root(theta[lo:hi], y[lo:hi], theta[i], theta[i + 1]))
    angles = np.array(roots)
    return ZeroSet(angles, np.ones(angles.size, dtype=int), trace.params)


def extract_degenerate_zero(trace: MeasuredTrace, eta: float) -> float | None:
    """Midpoint of the region where |coherence| < eta, or None if there is none.

    Noise breaks the sub-threshold region into runs; runs separated by fewer
    than 2*window samples are joined and the longest joined run is used.
    """
    theta = trace.angles
    below = np.flatnonzero(np.abs(trace.corrected()) < eta)
    if below.size == 0:
        return None
    gap = 2 * (2 * DEFAULT_WINDOW + 1)
    splits = np.flatnonzero(np.diff(below) > gap) + 1
    runs = np.split(below, splits)
    best = max(runs, key=lambda r: r[-1] - r[0])
    return float(0.5 * (theta[best[0]] + theta[best[-1]]))


def zero_uncertainty(params: IsingParams, zeros: ZeroSet, eta: float) -> ZeroSet:
    """Delta theta_n = eta / |dL/dtheta| at each zero; ``inf`` at a flat zero."""
    slope = np.abs(np.atleast_1d(coherence_sensitivity(params, zeros.angles)))
    with np.errstate(divide="ignore"):
        dtheta = np.where(slope > FLAT_SENSITIVITY, eta / slope, np.inf)
    return replace(zeros, uncertainties=dtheta)
