import math

import numpy as np
import pytest

from models.errors import ConfigError
from models.schemas import SimConfig
from processors.hjb import build_solution, value_f
from processors.ruin import drift_hitting_probability, ruin_probability
from processors.simulate import (
    estimate_ruin_prob,
    estimate_value,
    resolve_config,
    run_paths,
    simulate_drift_hitting,
    simulate_path,
)
from tests.conftest import make_params


def _batch(params, config, x0=None, **kwargs):
    sol = build_solution(params)
    return run_paths(params, sol.control, sol.b, sol.b / 2 if x0 is None else x0, config, **kwargs)


# ── 설정 보완 ────────────────────────────────────────────────
def test_resolve_config_defaults(cheap_params):
    cfg = resolve_config(cheap_params, SimConfig(), "ruin")
    assert cfg.horizon == cheap_params.T
    assert cfg.dt == pytest.approx(min(1e-3 * cheap_params.T, 1e-2 * 50.0 / 36.0))

    value_cfg = resolve_config(cheap_params, SimConfig(), "value")
    assert value_cfg.horizon == pytest.approx(math.log(1e6) / 0.05)


def test_resolve_config_keeps_explicit_dt(cheap_params):
    cfg = resolve_config(cheap_params, SimConfig(dt=0.25, n_paths=3), "ruin")
    assert cfg.dt == 0.25
    assert cfg.n_paths == 3


# ── 재현성 ───────────────────────────────────────────────────
@pytest.mark.parametrize("scheme", ["euler", "bridge"])
def test_same_seed_same_paths(cheap_params, scheme):
    cfg = SimConfig(n_paths=200, seed=11, dt=0.05, scheme=scheme)
    a = _batch(cheap_params, cfg)
    b = _batch(cheap_params, cfg)
    np.testing.assert_array_equal(a.ruined, b.ruined)
    np.testing.assert_array_equal(a.ruin_time, b.ruin_time)
    np.testing.assert_array_equal(a.discounted_dividends, b.discounted_dividends)


def test_results_independent_of_workers(interior_params):
    base = SimConfig(n_paths=300, seed=5, dt=0.05, block_size=64, workers=1)
    a = _batch(interior_params, base)
    b = _batch(interior_params, base.model_copy(update={"workers": 4}))
    np.testing.assert_array_equal(a.ruin_time, b.ruin_time)
    np.testing.assert_array_equal(a.discounted_dividends, b.discounted_dividends)


def test_results_independent_of_block_size(interior_params):
    a = _batch(interior_params, SimConfig(n_paths=300, seed=5, dt=0.05, block_size=300))
    b = _batch(interior_params, SimConfig(n_paths=300, seed=5, dt=0.05, block_size=37))
    np.testing.assert_array_equal(a.ruined, b.ruined)
    np.testing.assert_allclose(a.ruin_time, b.ruin_time, rtol=1e-12)
    np.testing.assert_allclose(a.discounted_dividends, b.discounted_dividends, rtol=1e-12)


def test_different_seed_differs(cheap_params):
    a = _batch(cheap_params, SimConfig(n_paths=200, seed=1, dt=0.05))
    b = _batch(cheap_params, SimConfig(n_paths=200, seed=2, dt=0.05))
    assert not np.array_equal(a.discounted_dividends, b.discounted_dividends)


def test_single_path_matches_batch(cheap_params):
    cfg = SimConfig(n_paths=50, seed=3, dt=0.05)
    batch = _batch(cheap_params, cfg)
    sol = build_solution(cheap_params)
    ruined, ruin_time, dividends = simulate_path(cheap_params, sol.control, sol.b, sol.b / 2, cfg, 17)
    assert ruined == batch.ruined[17]
    assert ruin_time == pytest.approx(batch.ruin_time[17], rel=1e-12)
    assert dividends == pytest.approx(batch.discounted_dividends[17], rel=1e-12)


# ── 경계 동작 ────────────────────────────────────────────────
def test_zero_reserve_is_ruined_immediately(cheap_params, small_sim):
    batch = _batch(cheap_params, small_sim, x0=0.0)
    assert batch.ruin_prob == 1.0
    assert np.all(batch.ruin_time == 0.0)
    assert np.all(batch.discounted_dividends == 0.0)


def test_lump_dividend_above_barrier(cheap_params):
    sol = build_solution(cheap_params)
    cfg = SimConfig(n_paths=100, seed=9, dt=0.05)
    batch = run_paths(cheap_params, sol.control, sol.b, sol.b + 10.0, cfg)
    assert np.all(batch.discounted_dividends >= 10.0)


def test_ruin_times_inside_horizon(interior_params):
    batch = _batch(interior_params, SimConfig(n_paths=500, seed=4, dt=0.05), x0=2.0)
    assert batch.ruined.any()
    times = batch.ruin_time[batch.ruined]
    assert np.all((times >= 0.0) & (times <= interior_params.T))
    assert np.all(np.isinf(batch.ruin_time[~batch.ruined]))


def test_short_horizon_from_barrier_never_ruins(cheap_params):
    sol = build_solution(cheap_params)
    cfg = SimConfig(n_paths=200, seed=1, dt=1e-3, horizon=0.01)
    p, stderr = estimate_ruin_prob(cheap_params, sol.control, sol.b, sol.b, cfg)
    assert p == 0.0
    assert stderr == 0.0


def test_batch_statistics(cheap_params):
    batch = _batch(cheap_params, SimConfig(n_paths=400, seed=8, dt=0.05))
    p = batch.ruin_prob
    assert batch.ruin_stderr == pytest.approx(math.sqrt(p * (1 - p) / 400))
    summary = batch.summary()
    assert summary["n_paths"] == 400
    assert summary["value"] == batch.value_mean


def test_unreachable_barrier_pays_nothing(cheap_params, cheap_solution):
    # b = 10⁶ 이면 A* ≡ 1 인 표류 브라운 운동, 배당 없음
    x0 = 10.0
    batch = run_paths(cheap_params, cheap_solution.control, 1e6, x0, SimConfig(n_paths=4000, seed=31, dt=0.05))
    assert np.all(batch.discounted_dividends == 0.0)
    exact = drift_hitting_probability(cheap_params.mu, cheap_params.sigma, x0, cheap_params.T)
    assert abs(batch.ruin_prob - exact) <= 4.0 * batch.ruin_stderr + 5e-3


# ── 단조 결합 ────────────────────────────────────────────────
@pytest.mark.parametrize("scheme", ["euler", "bridge"])
def test_higher_start_never_ruins_first(cheap_params, cheap_solution, scheme):
    cfg = SimConfig(n_paths=2000, seed=17, dt=0.05, scheme=scheme)
    b = cheap_solution.b
    low = run_paths(cheap_params, cheap_solution.control, b, 5.0, cfg)
    high = run_paths(cheap_params, cheap_solution.control, b, 10.0, cfg)
    assert not np.any(high.ruined & ~low.ruined)
    assert high.ruin_prob <= low.ruin_prob


def test_ruin_estimate_monotone_in_start(interior_params, interior_solution):
    cfg = SimConfig(n_paths=2000, seed=17, dt=0.05)
    b = interior_solution.b
    probs = [
        estimate_ruin_prob(interior_params, interior_solution.control, b, x0, cfg)[0]
        for x0 in (0.25 * b, 0.5 * b, b)
    ]
    assert probs[0] >= probs[1] >= probs[2]


# ── 스텝 크기 ────────────────────────────────────────────────
@pytest.mark.parametrize("scheme", ["euler", "bridge"])
def test_ruin_estimate_stable_under_step_halving(interior_params, interior_solution, scheme):
    b = interior_solution.b
    runs = [
        estimate_ruin_prob(interior_params, interior_solution.control, b, b,
                           SimConfig(n_paths=4000, seed=23, dt=dt, scheme=scheme))
        for dt in (0.1, 0.05)
    ]
    (p_coarse, se_coarse), (p_fine, se_fine) = runs
    # O(√dt) 약오차 허용
    assert abs(p_coarse - p_fine) <= 3.0 * math.hypot(se_coarse, se_fine) + 0.25 * math.sqrt(0.1)


@pytest.mark.slow
def test_value_estimate_stable_under_step_halving(cheap_params, cheap_solution):
    b = cheap_solution.b
    x = b / 2
    runs = [
        estimate_value(cheap_params, cheap_solution.control, b, x, SimConfig(n_paths=2000, seed=29, dt=dt))
        for dt in (0.1, 0.05)
    ]
    (j_coarse, se_coarse), (j_fine, se_fine) = runs
    scale = float(value_f(cheap_solution, x))
    assert abs(j_coarse - j_fine) <= 3.0 * math.hypot(se_coarse, se_fine) + 0.05 * scale


def test_default_scheme_tracks_pde(interior_params, interior_solution):
    assert SimConfig().scheme == "bridge"
    b = interior_solution.b
    cfg = SimConfig(n_paths=20_000, seed=20100101, dt=1e-3 * interior_params.T)
    p_mc, stderr = estimate_ruin_prob(interior_params, interior_solution.control, b, b, cfg)
    p_pde = ruin_probability(interior_params, interior_solution.control, b, interior_params.T, b)
    assert abs(p_pde - p_mc) <= 3.0 * stderr + 0.01


# ── 입력 검증 ────────────────────────────────────────────────
def test_rejects_foreign_control(cheap_params, interior_solution, small_sim):
    with pytest.raises(ConfigError):
        run_paths(cheap_params, interior_solution.control, 30.0, 10.0, small_sim)


@pytest.mark.parametrize("b, x0", [(0.0, 1.0), (-1.0, 1.0), (30.0, -0.5)])
def test_rejects_bad_barrier_or_reserve(cheap_params, small_sim, b, x0):
    sol = build_solution(cheap_params)
    with pytest.raises(ConfigError):
        run_paths(cheap_params, sol.control, b, x0, small_sim)


# ── 브라운 운동 도달확률 ─────────────────────────────────────
def test_drift_hitting_matches_closed_form():
    mu, sigma, x, T = 2.0, math.sqrt(50.0), 5.0, 10.0
    p, stderr = simulate_drift_hitting(mu, sigma, x, T, SimConfig(n_paths=4000, seed=21))
    exact = drift_hitting_probability(mu, sigma, x, T)
    assert abs(p - exact) <= 4.0 * stderr + 1e-3


def test_drift_hitting_rejects_bad_input():
    with pytest.raises(ConfigError):
        simulate_drift_hitting(2.0, 1.0, 0.0, 1.0, SimConfig(n_paths=10))


# ── 수락 규모 (느림) ─────────────────────────────────────────
@pytest.mark.slow
@pytest.mark.parametrize("b_factor", [1.0, 2.0])
@pytest.mark.parametrize("x_factor", [0.5, 1.0])
def test_pde_and_monte_carlo_agree(b_factor, x_factor):
    params = make_params(3.0, T=50.0)
    b = b_factor * build_solution(params).b0
    sol = build_solution(params, b)
    x = x_factor * b
    cfg = SimConfig(n_paths=100_000, seed=20100101, dt=1e-3 * params.T, scheme="bridge")
    p_mc, stderr = estimate_ruin_prob(params, sol.control, b, x, cfg)
    p_pde = ruin_probability(params, sol.control, b, params.T, x)
    assert abs(p_pde - p_mc) <= 3.0 * stderr + 0.01


@pytest.mark.slow
def test_monte_carlo_value_matches_optimum():
    from processors.solvency import audit_optimality

    params = make_params(6.0)
    opt = build_solution(params)
    x = opt.b0 / 2
    cfg = SimConfig(n_paths=4000, seed=20100101, dt=0.05, scheme="bridge")
    audit = audit_optimality(params, opt.b0, x, cfg)
    f = float(value_f(opt, x))
    assert abs(audit.simulated - f) <= 3.0 * audit.stderr + 0.02 * f

    (b_up, (j_up, se_up)), = [(k, v) for k, v in audit.perturbed.items() if k > opt.b0]
    assert b_up == pytest.approx(1.1 * opt.b0)
    assert j_up <= audit.simulated + 3.0 * math.hypot(se_up, audit.stderr)
