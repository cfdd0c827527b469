import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.coherence import (CoherenceTrace, coherence_at, coherence_sensitivity,
                               coherence_trace, log_partition_complex, period)
from leeyang.ising import LAMBDA_TMP, IsingParams, partition_direct


def params(n, beta_j, beta_h=0.0):
    return IsingParams.from_beta_j(n, beta_j, coupling=1.0, beta_h=beta_h)


param_strategy = st.builds(params, st.integers(1, 14), st.floats(0.01, 5.0),
                           st.floats(-1.0, 1.0))


def test_unity_at_origin():
    assert coherence_at(params(9, 8 / 15), 0.0) == 1.0
    values = coherence_at(params(9, 2.0, 0.3), np.array([0.0, 1.0]))
    assert values[0] == 1.0


def test_free_bath_is_cosine_power():
    theta = np.linspace(0, 2 * np.pi, 101)
    np.testing.assert_allclose(coherence_at(params(9, 0.0), theta).real,
                               np.cos(theta / 2) ** 9, atol=1e-14)


def test_vanishes_at_tabulated_zero():
    assert abs(coherence_at(params(9, 40 / 9), 0.349)) < 5e-3
    # the zero sits just above its low-temperature limit pi/9
    assert coherence_at(params(9, 40 / 9), np.pi / 9).real > 0
    assert coherence_at(params(9, 40 / 9), 0.35).real < 0


@settings(max_examples=80, deadline=None)
@given(param_strategy, st.floats(-10.0, 10.0))
def test_conjugation(p, theta):
    assert coherence_at(p, -theta) == pytest.approx(np.conj(coherence_at(p, theta)), abs=1e-12)


@pytest.mark.parametrize("n", [8, 9])
def test_real_at_zero_field(n):
    theta = np.linspace(0, 2 * np.pi, 513)
    for bj in (0.0, 0.3, 1.0, 5.0):
        assert np.max(np.abs(coherence_at(params(n, bj), theta).imag)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(param_strategy, st.floats(0.0, 2 * np.pi))
def test_antiperiodicity(p, theta):
    sign = (-1) ** p.n_spins
    assert coherence_at(p, theta + 2 * np.pi) == pytest.approx(
        sign * coherence_at(p, theta), abs=1e-11)


@settings(max_examples=80, deadline=None)
@given(param_strategy, st.floats(0.05, 2 * np.pi - 0.05))
def test_equivalence_with_complex_partition(p, theta):
    lhs = coherence_at(p, theta)
    rhs = np.exp(log_partition_complex(p, theta) - partition_direct(p))
    # relative to Xi(beta, h) everywhere; relative to the value itself away from
    # zeros, where float cancellation does not dominate
    assert abs(lhs - rhs) <= 1e-12
    if abs(rhs) > 1e-4:
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_complex_partition_at_zero_angle():
    p = params(7, 1.2, 0.4)
    assert log_partition_complex(p, 0.0).real == pytest.approx(partition_direct(p), rel=1e-14)


class TestSensitivity:
    def test_flat_zero_at_high_temperature(self):
        assert abs(coherence_sensitivity(params(9, 0.0), np.pi)) < 1e-14

    @settings(max_examples=80, deadline=None)
    @given(param_strategy, st.floats(0.0, 2 * np.pi))
    def test_matches_finite_difference(self, p, theta):
        h = 1e-6
        fd = (coherence_at(p, theta + h) - coherence_at(p, theta - h)) / (2 * h)
        if abs(theta) < 2 * h:
            return  # the exact-one pin at 0 is not differentiable numerically
        assert abs(coherence_sensitivity(p, theta) - fd) < 1e-6

    def test_real_at_zero_field(self):
        s = coherence_sensitivity(params(9, 8 / 15), np.linspace(0, 6, 50))
        assert np.max(np.abs(s.imag)) < 1e-12

    @pytest.mark.parametrize("theta", [0.349, 1.047, 1.746, 2.444, 3.142])
    def test_slope_at_tabulated_zeros(self, theta):
        # eta / delta theta = 0.022 / 0.005
        slope = abs(coherence_sensitivity(params(9, 40 / 9), theta))
        assert 4.4 / 2 <= slope <= 4.4 * 2


class TestTrace:
    def test_default_window_is_one_period(self):
        p = IsingParams.from_beta_j(9, 0.0)
        tr = coherence_trace(p)
        assert tr.times[0] == 0.0
        assert tr.times[-1] == pytest.approx(2 * np.pi / LAMBDA_TMP)
        assert tr.times[-1] == pytest.approx(0.0946, abs=5e-5)
        assert period(p) == tr.times[-1]
        assert tr.values[0] == 1.0

    def test_nine_sign_changes_at_low_temperature(self):
        tr = coherence_trace(IsingParams.from_beta_j(9, 40 / 9))
        s = np.sign(tr.values.real)
        assert np.count_nonzero(s[:-1] * s[1:] < 0) == 9

    def test_json_roundtrip(self):
        tr = coherence_trace(IsingParams.from_beta_j(5, 1.0), n_samples=33)
        back = CoherenceTrace.from_json(tr.to_json())
        assert np.array_equal(back.values, tr.values)
        assert np.array_equal(back.times, tr.times)
        assert back.params == tr.params

    def test_csv_columns(self):
        tr = coherence_trace(IsingParams.from_beta_j(5, 1.0), n_samples=5)
        lines = tr.to_csv().splitlines()
        assert lines[0] == "t,theta,re_L,im_L"
        assert len(lines) == 6
        assert float(lines[1].split(",")[2]) == 1.0

    @pytest.mark.parametrize("kw", [dict(t_start=1.0, t_end=0.5), dict(n_samples=1),
                                    dict(t_end=math.inf)])
    def test_rejects_bad_window(self, kw):
        with pytest.raises(ValueError):
            coherence_trace(IsingParams.from_beta_j(5, 1.0), **kw)

    def test_needs_probe_coupling(self):
        p = IsingParams.from_beta_j(5, 1.0, probe_coupling=0.0)
        with pytest.raises(ValueError):
            coherence_trace(p)
