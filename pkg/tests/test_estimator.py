import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bluetrust.estimator import (EstimatorState, NoiseModel, baseline_estimate, blue_estimate,
                                 compute_noise_model, estimate_c1, estimate_c2_global,
                                 estimate_c2_neighborhood, flat_mean_estimate, update_ema)
from bluetrust.trust import DomainError, NoSamplesError

from oracles import blue_matrix_form, ema_direct

unit = st.floats(0, 1)


def feed(samples, alpha=0.1):
    state = EstimatorState(alpha=alpha)
    for s in samples:
        state = update_ema(state, s)
    return state


# -- EMA -------------------------------------------------------------------

def test_first_sample_initialises():
    s = update_ema(EstimatorState(), 0.7)
    assert s.ema_mean == 0.7 and s.sample_count == 1


def test_ema_step():
    s = EstimatorState(alpha=0.1, ema_mean=1.0, sample_count=3)
    assert update_ema(s, 0.0).ema_mean == pytest.approx(0.9)


def test_alpha_one_forgets():
    assert update_ema(feed([0.1, 0.9], alpha=1.0), 0.42).ema_mean == 0.42


def test_update_is_functional():
    s0 = feed([0.5])
    s1 = update_ema(s0, 0.0)
    assert s0.ema_mean == 0.5 and s1 is not s0


@pytest.mark.parametrize("bad", [-0.1, 1.1, math.nan])
def test_update_rejects_out_of_range(bad):
    with pytest.raises(DomainError):
        update_ema(EstimatorState(), bad)


def test_state_invariants():
    with pytest.raises(DomainError):
        EstimatorState(alpha=0.0)
    with pytest.raises(DomainError):
        EstimatorState(ema_mean=0.5, sample_count=0)


@given(st.lists(unit, min_size=1, max_size=20), st.sampled_from([0.1, 0.01, 0.001, 0.3, 1.0]))
def test_ema_matches_geometric_weights(samples, alpha):
    assert feed(samples, alpha).ema_mean == pytest.approx(ema_direct(samples, alpha), abs=1e-12)


@given(st.lists(unit, min_size=1, max_size=50), st.floats(1e-3, 1))
def test_ema_stays_in_unit_interval(samples, alpha):
    state = feed(samples, alpha)
    assert 0.0 <= state.ema_mean <= 1.0
    assert state.sample_count == len(samples)


# -- baseline --------------------------------------------------------------

def test_baseline_examples():
    assert baseline_estimate(feed([0.5])) == 0.5
    assert baseline_estimate(feed([1] * 5 + [0] * 5)) == 0.5
    assert baseline_estimate(feed([0.0, 0.0] + [1.0] * 10)) == 1.0


def test_baseline_empty():
    with pytest.raises(NoSamplesError):
        baseline_estimate(EstimatorState())


@given(st.lists(unit, min_size=1, max_size=40))
def test_baseline_is_mean_of_last_ten(samples):
    state = feed(samples)
    assert len(state.window) <= 10
    tail = samples[-10:]
    assert baseline_estimate(state) == pytest.approx(sum(tail) / len(tail))


# -- noise model and C1/C2 -------------------------------------------------

@pytest.mark.parametrize("c1, c2, c", [(2, 2, 0.75), (0.5, 1, 0.0), (1, 1, 0.0)])
def test_noise_model(c1, c2, c):
    assert compute_noise_model(c1, c2, 0.1).c == pytest.approx(c)


def test_noise_model_errors():
    with pytest.raises(DomainError):
        compute_noise_model(-1, 1, 1)
    with pytest.raises(DomainError):
        compute_noise_model(1, 1, 0)


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_noise_model_range(c1, c2):
    assert 0.0 <= compute_noise_model(c1, c2).c < 1.0


def test_noise_model_continuous_at_one():
    assert compute_noise_model(1 + 1e-12, 1).c == pytest.approx(0.0, abs=1e-11)


@pytest.mark.parametrize("req, cap, expected", [(200, 100, 2.0), (100, 100, 1.0), (0, 100, 0.0)])
def test_estimate_c1(req, cap, expected):
    assert estimate_c1(req, cap) == expected


@pytest.mark.parametrize("shared, total, expected", [(500, 1000, 0.5), (1000, 1000, 1.0), (0, 1000, 0.0)])
def test_estimate_c2_global(shared, total, expected):
    assert estimate_c2_global(shared, total) == expected


def test_estimate_c2_neighborhood():
    assert estimate_c2_neighborhood([(100, 200), (300, 200)]) == 1.0
    assert estimate_c2_neighborhood([(0, 100)]) == 0.0
    with pytest.raises(DomainError):
        estimate_c2_neighborhood([(10, 0)])
    with pytest.raises(DomainError):
        estimate_c1(1, 0)


def test_c2_neighborhood_over_everyone_is_global():
    rng = np.random.default_rng(7)
    reports = [(float(c), float(r)) for c, r in rng.uniform(0, 100, size=(20, 2))]
    glob = estimate_c2_global(sum(c for c, _ in reports), sum(r for _, r in reports))
    assert estimate_c2_neighborhood(reports) == pytest.approx(glob, rel=1e-12)


# -- BLUE ------------------------------------------------------------------

def test_blue_examples():
    assert blue_estimate(feed([0.5]), compute_noise_model(0.5, 1)).value == 0.5
    assert blue_estimate(feed([0.5]), NoiseModel(1, 2, 0.5)).value == 1.0
    est = blue_estimate(feed([0.3]), compute_noise_model(2, 1))
    assert est.value == pytest.approx(0.6)
    assert est.raw_mean == 0.3 and est.correction == 0.5


def test_blue_errors():
    with pytest.raises(NoSamplesError):
        blue_estimate(EstimatorState(), NoiseModel(1, 1, 0.0))
    with pytest.raises(DomainError):
        blue_estimate(feed([0.5]), NoiseModel(1, 1, 1.0))


@given(unit, st.floats(0, 0.99), st.floats(0, 0.99))
def test_blue_monotone_in_correction(mean, c_a, c_b):
    lo, hi = sorted((c_a, c_b))
    state = feed([mean])
    assert (blue_estimate(state, NoiseModel(0, 0, lo)).value
            <= blue_estimate(state, NoiseModel(0, 0, hi)).value)


@given(st.lists(unit, min_size=1, max_size=30), st.floats(0, 0.95))
def test_blue_sigma_invariant(samples, c):
    state = feed(samples)
    vals = {blue_estimate(state, NoiseModel(1, 1, c, sigma)) for sigma in (0.01, 1.0, 100.0)}
    assert len(vals) == 1


@given(st.lists(unit, min_size=1, max_size=100), st.floats(0, 0.95), st.floats(1e-3, 1e3))
def test_closed_form_matches_matrix_blue(samples, c, sigma):
    expected = blue_matrix_form(samples, c, sigma)
    got = flat_mean_estimate(samples, NoiseModel(1, 1, c, sigma))
    assert got.raw_mean / (1 - c) == pytest.approx(expected, rel=1e-12)
    assert got.value == pytest.approx(min(1.0, expected), rel=1e-12)


@pytest.mark.parametrize("A", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("C", [0.0, 0.25, 0.5])
def test_flat_mean_unbiased(A, C):
    rng = np.random.default_rng(1234)
    n, sd = 10_000, 0.05
    x = A - rng.normal(C * A, sd, size=n)
    est = flat_mean_estimate(x.tolist(), NoiseModel(1, 1, C))
    assert abs(est.value - A) < 3 * sd / math.sqrt(n) / (1 - C)
