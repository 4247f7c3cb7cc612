import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from voldecomp import DataError, NumericalError, UsageError
from voldecomp.decomposer import (
    SIGMA_RECOVERY_MIN_R,
    Decomposition,
    GaConfig,
    WindowAnchor,
    cost,
    cost_terms,
    deviation_metrics,
    ga_optimize,
    moving_window_volatility,
    sigma_recovery,
)
from voldecomp.generators import MrwParams, gen_mrw, gen_noise
from voldecomp.series import ReturnSeries, demean

SMALL = GaConfig(population=12, generations=8, window=20, seed=3, log_every=0)


def _demeaned(values):
    return demean(ReturnSeries(values))


def test_moving_window_on_constant_returns():
    seed = moving_window_volatility(np.full(50, -0.02), 10)
    np.testing.assert_allclose(seed.sigma, 0.02, rtol=1e-10)
    assert seed.floored == 0


def test_moving_window_small_example():
    r = [0.01, -0.02, 0.03]
    forward = moving_window_volatility(r, 3, WindowAnchor.Forward).sigma
    trailing = moving_window_volatility(r, 3, "trailing").sigma
    assert forward[0] == pytest.approx(math.sqrt(0.0014 / 3))
    assert forward[1] == pytest.approx(math.sqrt(0.0013 / 2))
    assert forward[2] == pytest.approx(0.03)
    assert trailing[0] == pytest.approx(0.01)
    assert trailing[2] == pytest.approx(math.sqrt(0.0014 / 3))


def test_moving_window_tracks_the_level(rng):
    sigma = moving_window_volatility(rng.normal(0.0, 0.02, size=12_000), 25).sigma
    assert sigma.mean() == pytest.approx(0.02, rel=0.03)


def test_moving_window_floors_silent_stretches(rng):
    r = np.concatenate((np.zeros(30), rng.normal(size=70)))
    seed = moving_window_volatility(r, 5)
    assert seed.floored == 26
    assert np.all(seed.sigma > 0)


def test_moving_window_rejects_silent_series():
    with pytest.raises(DataError):
        moving_window_volatility(np.zeros(40), 5)
    with pytest.raises(DataError):
        moving_window_volatility(np.ones(4), 5)


def test_ga_config_validation():
    with pytest.raises(UsageError):
        GaConfig(population=1)
    with pytest.raises(UsageError):
        GaConfig(mutation_rate=1.5)
    assert GaConfig(window_anchor="trailing").window_anchor is WindowAnchor.Trailing
    assert GaConfig().as_dict()["grid"]["n_bins"] == 118


def test_decomposition_checks_the_identity():
    with pytest.raises(NumericalError):
        Decomposition(dln_s=[1.0, 2.0], sigma=[1.0, 1.0], dW=[1.0, 2.5])
    with pytest.raises(DataError):
        Decomposition(dln_s=[1.0, 2.0], sigma=[1.0, 0.0], dW=[1.0, 2.0])
    with pytest.raises(DataError):
        Decomposition(dln_s=[1.0, 2.0], sigma=[1.0], dW=[1.0, 2.0])


def test_from_sigma_restores_the_mean(rng):
    raw = ReturnSeries(rng.normal(0.001, 0.01, size=100))
    returns = demean(raw)
    d = Decomposition.from_sigma(returns, np.full(100, 0.01))
    np.testing.assert_allclose(d.mu + d.sigma * d.dW, raw.values, atol=1e-15)
    assert len(d) == 100
    assert d.dln_sigma.size == 99


def test_cost_is_scale_free_in_sigma(rng):
    r = rng.normal(size=2000)
    sigma = np.exp(rng.normal(0.0, 0.1, size=2000))
    assert cost(2.0 * sigma, r) == pytest.approx(cost(sigma, r), abs=1e-3)


def test_unit_sigma_cost_on_gaussian_noise():
    r = gen_noise("gaussian", 5000, seed=1).values
    terms = cost_terms(np.ones(5000), r)
    assert terms.dln_sigma_degenerate
    assert terms.dev_dln_sigma == 0.0
    assert cost(np.ones(5000), r, c=1.5) == pytest.approx(1.5 * terms.dev_dw)


def test_cost_of_invalid_sigma_is_infinite(rng):
    r = rng.normal(size=10)
    sigma = np.ones(10)
    sigma[3] = -1.0
    assert cost(sigma, r) == math.inf
    with pytest.raises(DataError):
        cost(np.ones(9), r)


def test_true_sigma_is_nearly_optimal():
    returns, truth = gen_mrw(MrwParams(n=65_536, lambda2=0.03, horizon=1000, seed=8))
    assert cost(truth.sigma, returns) < 0.05


def test_deviation_metrics_are_scale_invariant(rng):
    r = rng.normal(size=3000)
    sigma = np.exp(rng.normal(0.0, 0.2, size=3000))
    base = deviation_metrics(Decomposition(dln_s=r * sigma, sigma=sigma, dW=r))
    scaled = deviation_metrics(Decomposition(dln_s=3.0 * r * sigma, sigma=3.0 * sigma, dW=r))
    assert scaled.delta_w == pytest.approx(base.delta_w, abs=1e-3)
    assert scaled.delta_dln_sigma == pytest.approx(base.delta_dln_sigma, abs=1e-3)


def test_deviation_metrics_for_constant_sigma():
    values = np.linspace(-1.0, 1.0, 11)
    report = deviation_metrics(Decomposition(dln_s=values, sigma=np.ones(11), dW=values))
    assert report.dln_sigma_degenerate
    assert report.delta_dln_sigma is None
    assert report.ks_dln_sigma is None
    assert report.final_cost == pytest.approx(1.5 * report.delta_w)
    assert report.as_dict()["ks_dln_sigma"] is None


def test_ga_rejects_bad_input():
    with pytest.raises(DataError):
        ga_optimize(ReturnSeries(np.ones(100)), SMALL)
    with pytest.raises(DataError):
        ga_optimize(_demeaned(np.arange(30.0)), SMALL)
    values = np.linspace(-1.0, 1.0, 100)
    values[5] = np.nan
    with pytest.raises(DataError):
        ga_optimize(ReturnSeries(values, mean_removed=False), SMALL)


def _mrw_returns(n=400, seed=0):
    returns, _ = gen_mrw(MrwParams(n=n, lambda2=0.03, horizon=100, seed=seed))
    return demean(returns)


def test_ga_history_never_increases_and_ends_at_final_cost():
    returns = _mrw_returns()
    d, report, history = ga_optimize(returns, SMALL)
    assert history.size == SMALL.generations + 1
    assert np.all(np.diff(history) <= 0)
    assert report.final_cost == pytest.approx(history[-1], rel=1e-12)
    np.testing.assert_allclose(d.mu + d.sigma * d.dW, returns.original, rtol=1e-12, atol=1e-15)


def test_ga_improves_on_its_seed():
    returns = _mrw_returns(seed=1)
    seed = moving_window_volatility(returns, SMALL.window)
    _, report, _ = ga_optimize(returns, SMALL)
    assert report.final_cost <= cost(seed.sigma, returns, SMALL.cost_c) + 1e-9


def test_ga_is_deterministic():
    returns = _mrw_returns(seed=2)
    first, _, h1 = ga_optimize(returns, SMALL)
    second, _, h2 = ga_optimize(returns, SMALL)
    assert np.array_equal(first.sigma, second.sigma)
    assert np.array_equal(h1, h2)


def test_ga_result_does_not_depend_on_the_executor():
    returns = _mrw_returns(seed=3)
    serial, _, _ = ga_optimize(returns, SMALL)
    with ThreadPoolExecutor(max_workers=3) as pool:
        threaded, _, _ = ga_optimize(returns, SMALL, executor=pool)
    assert np.array_equal(serial.sigma, threaded.sigma)


def test_ga_stops_on_plateau():
    config = GaConfig(population=6, generations=200, window=20, plateau_generations=5, plateau_tol=1.0, log_every=0)
    _, _, history = ga_optimize(_mrw_returns(seed=4), config)
    assert history.size == 6


def test_zero_generations_returns_best_initial_chromosome():
    config = GaConfig(population=4, generations=0, window=20, log_every=0)
    _, report, history = ga_optimize(_mrw_returns(seed=5), config)
    assert history.size == 1
    assert report.final_cost == pytest.approx(history[0], rel=1e-12)


def test_ga_is_scale_invariant():
    raw, _ = gen_mrw(MrwParams(n=400, lambda2=0.03, horizon=100, seed=6))
    base, base_report, base_history = ga_optimize(demean(raw), SMALL)
    scaled, scaled_report, scaled_history = ga_optimize(demean(ReturnSeries(4.0 * raw.values)), SMALL)
    np.testing.assert_allclose(scaled.sigma, 4.0 * base.sigma, rtol=1e-12)
    np.testing.assert_allclose(scaled.dW, base.dW, rtol=1e-12)
    assert scaled_report.delta_w == pytest.approx(base_report.delta_w, abs=1e-12)
    assert scaled_report.delta_dln_sigma == pytest.approx(base_report.delta_dln_sigma, abs=1e-12)
    np.testing.assert_allclose(scaled_history, base_history, atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_every_decomposition_reproduces_its_input(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(50, 300))
    scale = 10.0 ** rng.uniform(-4, 2)
    raw = scale * rng.standard_t(3, size=n) + rng.normal(0.0, scale)
    returns = demean(ReturnSeries(raw))
    d, _, _ = ga_optimize(returns, GaConfig(population=4, generations=2, window=5, seed=seed, log_every=0))
    rebuilt = d.mu + d.sigma * d.dW
    np.testing.assert_allclose(rebuilt, raw, rtol=1e-12, atol=1e-12 * np.max(np.abs(raw)))


def test_sigma_recovery():
    known = np.exp(np.sin(np.linspace(0.0, 6.0, 200)))
    assert sigma_recovery(known, known) == pytest.approx(1.0)
    assert sigma_recovery(3.0 * known, known) == pytest.approx(1.0)
    assert sigma_recovery(1.0 / known, known) < 0
    with pytest.raises(DataError):
        sigma_recovery(known[:-1], known)
    with pytest.raises(NumericalError):
        sigma_recovery(np.ones(200), known)


@pytest.mark.slow
def test_full_scale_ga_tracks_the_true_volatility():
    returns, truth = gen_mrw(MrwParams(n=12_000, lambda2=0.03, horizon=1000, seed=2))
    returns = demean(returns)
    config = GaConfig(seed=1, log_every=0)
    seed = moving_window_volatility(returns, config.window, config.window_anchor)
    d, _, _ = ga_optimize(returns, config)
    assert sigma_recovery(seed.sigma, truth.sigma) > SIGMA_RECOVERY_MIN_R
    assert sigma_recovery(d.sigma, truth.sigma) > SIGMA_RECOVERY_MIN_R


@pytest.mark.slow
def test_gaussian_noise_decomposes_close_to_wiener():
    config = GaConfig(population=100, generations=100, seed=1, log_every=0)
    _, report, _ = ga_optimize(demean(gen_noise("gaussian", 4000, seed=1)), config)
    assert report.delta_w <= 0.03


@pytest.mark.slow
def test_rectangular_noise_keeps_its_shape():
    config = GaConfig(population=100, generations=100, seed=1, log_every=0)
    _, report, _ = ga_optimize(demean(gen_noise("rectangular", 4000, seed=1)), config)
    assert report.delta_w == pytest.approx(0.178, abs=0.04)
    assert report.ks_dw.reject
