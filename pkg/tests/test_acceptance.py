"""Acceptance gate: one marked group of checks per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.  Tolerances are the stated ones.
"""

import math
import os
import time

import numpy as np
import pytest

from leeyang.coherence import coherence_at
from leeyang.experiment import (NoiseModel, extract_degenerate_zero, extract_zeros,
                                preset_noise, synthesize_measurement, zero_uncertainty)
from leeyang.ising import IsingParams, brute_force_partition, build_polynomial, partition_direct, saddle_point
from leeyang.thermo import edge_scan, free_energy_direct, free_energy_from_zeros
from leeyang.zeros import ZeroSet, find_zeros_polynomial, find_zeros_real, verify_circle_theorem

criterion = pytest.mark.criterion

MEASURED_ROWS = {
    "T=15J/8": (8 / 15, [0.553, 1.277, 1.925, 2.540, 3.142, 3.743, 4.359, 5.001, 5.726]),
    "T=9J/40": (40 / 9, [0.349, 1.047, 1.746, 2.444, 3.142, 3.840, 4.538, 5.236, 5.934]),
    "T=inf": (0.0, [math.pi] * 9),
}
MEASURED_EXP_9J40 = [0.358, 1.051, 1.756, 2.461, 3.154, 3.843, 4.533, 5.243, 5.936]


def uniform(n, j):
    c = np.full((n, n), float(j))
    np.fill_diagonal(c, 0.0)
    return c


def one_period(p, samples=2049):
    return np.linspace(0.0, 2 * math.pi / p.probe_coupling, samples)


# 1 -------------------------------------------------------------------------

@criterion(1, "tabulated zeros at N=9 within 2e-3, < 1 s")
@pytest.mark.parametrize("row", list(MEASURED_ROWS))
def test_c1_tabulated_zeros(row):
    beta_j, expected = MEASURED_ROWS[row]
    start = time.perf_counter()
    z = find_zeros_real(IsingParams.from_beta_j(9, beta_j))
    elapsed = time.perf_counter() - start
    got = z.expanded_angles()
    assert got.size == 9
    worst = np.max(np.abs(got - expected))
    assert worst < 2e-3, f"max deviation {worst:.4f} rad; per zero {np.round(got - expected, 4)}"
    assert elapsed < 1.0


# 2 -------------------------------------------------------------------------

@criterion(2, "all polynomial roots on |z|=1 within 1e-8, < 10 s")
def test_c2_circle_theorem():
    start = time.perf_counter()
    worst = 0.0
    for n in range(1, 13):
        for bj in (0.1, 0.5, 1.0, 2.0, 5.0):
            for bh in (0.0, 0.1, -0.1, 0.5, -0.5):
                z = find_zeros_polynomial(build_polynomial(IsingParams.from_beta_j(n, bj, beta_h=bh)))
                assert z.total == n
                rep = verify_circle_theorem(z)
                worst = max(worst, rep.max_deviation)
                assert rep.passed, (n, bj, bh, rep.max_deviation)
    assert worst < 1e-8
    assert time.perf_counter() - start < 10.0


# 3 -------------------------------------------------------------------------

@criterion(3, "direct vs 2^N enumeration within 1e-10 in log Xi for N<=12, < 30 s")
def test_c3_enumeration_oracle():
    start = time.perf_counter()
    for n in range(1, 13):
        for bj in np.linspace(0.0, 3.0, 7):
            for bh in np.linspace(-1.0, 1.0, 5):
                # unit beta keeps (beta J, beta h) = (0, nonzero) representable
                p = IsingParams(n, float(bj), float(bh), 1.0)
                bf = brute_force_partition(uniform(n, bj), float(bh), 1.0)
                assert abs(partition_direct(p) - bf) < 1e-10, (n, bj, bh)
    assert time.perf_counter() - start < 30.0


# 4 -------------------------------------------------------------------------

@criterion(4, "free energy rebuilt from zeros, < 5 s")
def test_c4_reconstruction_identity():
    start = time.perf_counter()
    for bj in np.linspace(0.1, 5.0, 50):
        p = IsingParams.from_beta_j(9, float(bj))
        direct = free_energy_direct(p).log_partition
        rebuilt = free_energy_from_zeros(find_zeros_real(p)).log_partition
        assert abs(direct - rebuilt) < 1e-9, bj
    assert time.perf_counter() - start < 5.0


@criterion(4, "free energy rebuilt from zeros, < 5 s")
def test_c4_reconstruction_from_measured_zeros():
    p = IsingParams.from_beta_j(9, 40 / 9)
    direct = free_energy_direct(p).log_partition
    rebuilt = free_energy_from_zeros(ZeroSet(MEASURED_EXP_9J40, [1] * 9, p)).log_partition
    assert abs(rebuilt - direct) < 0.01 * abs(direct)


# 5 -------------------------------------------------------------------------

@criterion(5, "transition at N beta J/4 = 1; N=500 plateau < 5% and T_c within 15%, < 3 min")
def test_c5_saddle_flip():
    n = 100
    for quarter_k, ordered in ((0.5, False), (1.0, False), (1.0 + 1e-6, True), (2.0, True)):
        r = saddle_point(IsingParams.from_beta_j(n, 4 * quarter_k / n, coupling=1.0))
        assert r.is_ordered is ordered, quarter_k
        assert (r.magnetization_x > 0) is ordered


@pytest.fixture(scope="module")
def edge_n500():
    n, j = 500, 1.0
    start = time.perf_counter()
    curve = edge_scan(n, j, np.linspace(0.02, 0.6, 59) * n * j, workers=os.cpu_count())
    return curve, time.perf_counter() - start


@criterion(5, "transition at N beta J/4 = 1; N=500 plateau < 5% and T_c within 15%, < 3 min")
def test_c5_plateau_flatness(edge_n500):
    curve, _ = edge_n500
    window = (curve.t_over_nj >= 0.05 - 1e-12) & (curve.t_over_nj <= 0.15 + 1e-12)
    plateau = curve.theta1[window]
    variation = (plateau.max() - plateau.min()) / plateau.min()
    assert variation < 0.05, f"relative variation {variation:.3f} over T/(NJ) in [0.05, 0.15]"


@criterion(5, "transition at N beta J/4 = 1; N=500 plateau < 5% and T_c within 15%, < 3 min")
def test_c5_tc_estimate(edge_n500):
    curve, _ = edge_n500
    assert curve.estimated_tc is not None
    assert abs(curve.estimated_tc / curve.analytic_tc - 1) < 0.15


@criterion(5, "transition at N beta J/4 = 1; N=500 plateau < 5% and T_c within 15%, < 3 min")
def test_c5_runtime(edge_n500):
    assert edge_n500[1] < 180.0


# 6 -------------------------------------------------------------------------

@criterion(6, "low-T limit (2k-1)pi/9 within 1e-6 at beta J=50; exact degenerate beta J=0")
def test_c6_low_temperature_limit():
    z = find_zeros_real(IsingParams.from_beta_j(9, 50.0))
    k = np.arange(1, 10)
    assert np.max(np.abs(z.expanded_angles() - (2 * k - 1) * np.pi / 9)) < 1e-6


@criterion(6, "low-T limit (2k-1)pi/9 within 1e-6 at beta J=50; exact degenerate beta J=0")
def test_c6_degenerate():
    p = IsingParams.from_beta_j(9, 0.0)
    for z in (find_zeros_real(p), find_zeros_polynomial(build_polynomial(p))):
        assert z.angles.tolist() == [math.pi]
        assert z.multiplicities.tolist() == [9]


# 7 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def noisy_runs():
    p = IsingParams.from_beta_j(9, 40 / 9)
    t = one_period(p)
    start = time.perf_counter()
    runs = []
    for seed in range(200):
        noise = preset_noise("9J/40", seed)
        assert (noise.t2_star, noise.eta) == (0.5, 0.022)
        runs.append(extract_zeros(synthesize_measurement(p, noise, t)))
    return p, runs, time.perf_counter() - start


@criterion(7, "noisy round trip: each zero within 0.03, dtheta in [0.003, 0.008], spread within 3x, < 1 min")
def test_c7_each_seed_within_003(noisy_runs):
    p, runs, _ = noisy_runs
    truth = find_zeros_real(p).angles
    for seed, z in enumerate(runs):
        assert z.total == 9, f"seed {seed}: {z.total} zeros"
        assert np.max(np.abs(z.angles - truth)) < 0.03, seed


@criterion(7, "noisy round trip: each zero within 0.03, dtheta in [0.003, 0.008], spread within 3x, < 1 min")
def test_c7_predicted_uncertainty(noisy_runs):
    p = noisy_runs[0]
    dtheta = zero_uncertainty(p, find_zeros_real(p), 0.022).uncertainties
    assert np.all((dtheta >= 0.003) & (dtheta <= 0.008)), dtheta


@criterion(7, "noisy round trip: each zero within 0.03, dtheta in [0.003, 0.008], spread within 3x, < 1 min")
def test_c7_spread_matches_prediction(noisy_runs):
    p, runs, _ = noisy_runs
    spread = np.std([z.angles for z in runs], axis=0, ddof=1)
    dtheta = zero_uncertainty(p, find_zeros_real(p), 0.022).uncertainties
    ratio = spread / dtheta
    assert np.all((ratio >= 1 / 3) & (ratio <= 3)), ratio


@criterion(7, "noisy round trip: each zero within 0.03, dtheta in [0.003, 0.008], spread within 3x, < 1 min")
def test_c7_runtime(noisy_runs):
    assert noisy_runs[2] < 60.0


# 8 -------------------------------------------------------------------------

@criterion(8, "degenerate zero at beta=0: exactly pi noiseless, within 0.9 rad with noise")
def test_c8_noiseless_exact():
    p = IsingParams.from_beta_j(9, 0.0)
    tr = synthesize_measurement(p, NoiseModel(), one_period(p))
    assert extract_degenerate_zero(tr, 0.0005) == pytest.approx(math.pi, abs=1e-12)


@criterion(8, "degenerate zero at beta=0: exactly pi noiseless, within 0.9 rad with noise")
@pytest.mark.parametrize("with_deltas", [False, True])
def test_c8_noisy_within_09(with_deltas):
    p = IsingParams.from_beta_j(9, 0.0)
    for seed in range(50):
        noise = preset_noise("inf", seed) if with_deltas else NoiseModel(eta=0.0005, seed=seed)
        assert noise.eta == 0.0005
        mid = extract_degenerate_zero(synthesize_measurement(p, noise, one_period(p)), noise.eta)
        assert mid is not None and abs(mid - math.pi) < 0.9, (seed, mid)


@criterion(8, "degenerate zero at beta=0: exactly pi noiseless, within 0.9 rad with noise")
def test_c8_flat_coherence_at_pi():
    p = IsingParams.from_beta_j(9, 0.0)
    assert abs(coherence_at(p, math.pi)) < 1e-15
