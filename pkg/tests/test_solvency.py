import numpy as np
import pytest

from config.settings import get_settings
from models.errors import DomainError, NoBracket, NoConvergence, Unattainable
from processors.hjb import build_solution, value_f, value_g
from processors.ruin import epsilon0_lower_bound, survival_field
from processors.solvency import (
    b_star_sweep,
    capital_sweep,
    decide_policy,
    epsilon_of_b,
    epsilon_sweep,
    risk_capital,
    solve_b_star,
)


# ── 의사결정 ─────────────────────────────────────────────────
def test_unconstrained_when_risk_is_loose(any_params, small_grid):
    params = any_params.with_updates(epsilon=0.99)
    decision = decide_policy(params, small_grid)
    assert not decision.constrained
    assert decision.chosen_barrier == decision.b0
    assert decision.attained_ruin_prob <= 0.99
    assert decision.solution is decision.optimum
    assert decision.value_ratio(decision.b0 / 2) == pytest.approx(1.0)


def test_constrained_decision(any_params, small_grid):
    decision = decide_policy(any_params, small_grid)
    tol = get_settings().TOL_EPS
    assert decision.constrained
    assert decision.chosen_barrier > decision.b0
    assert decision.unconstrained_ruin_prob > any_params.epsilon
    assert abs(decision.attained_ruin_prob - any_params.epsilon) <= tol
    assert decision.solution.b == decision.chosen_barrier

    x = np.linspace(0.0, 1.2 * decision.chosen_barrier, 60)
    g = np.asarray(decision.value_at(x))
    f = np.asarray(value_f(decision.optimum, x))
    assert np.all(g <= f + 1e-10)
    ratio = np.asarray(decision.value_ratio(x))
    assert np.all(ratio <= 1.0 + 1e-12)
    np.testing.assert_allclose(decision.control_at(x), decision.optimum.control(x))


def test_risk_below_analytic_floor_forces_constraint(interior_params, small_grid):
    b0 = build_solution(interior_params).b0
    floor = epsilon0_lower_bound(interior_params, b0, interior_params.T)
    assert floor > 0.0
    params = interior_params.with_updates(epsilon=0.5 * floor)
    decision = decide_policy(params, small_grid)
    assert decision.constrained
    assert decision.unconstrained_ruin_prob >= floor > params.epsilon
    assert decision.chosen_barrier > b0
    assert abs(decision.attained_ruin_prob - params.epsilon) <= get_settings().TOL_EPS


def test_b_star_contract(cheap_params, small_grid):
    b0 = build_solution(cheap_params).b0
    upper = epsilon_of_b(cheap_params, b0, small_grid)
    lower = epsilon_of_b(cheap_params, 8.0 * b0, small_grid)
    eps = 0.5 * (upper + lower)
    params = cheap_params.with_updates(epsilon=eps)

    b_star = solve_b_star(params, small_grid)
    assert b0 < b_star < 8.0 * b0
    assert abs(epsilon_of_b(params, b_star, small_grid) - eps) <= 1e-4

    sol = build_solution(params, b_star)
    x = np.linspace(0.0, b_star, 50)
    assert np.all(np.asarray(value_g(sol, x)) <= np.asarray(value_f(build_solution(params), x)) + 1e-10)


def test_b_star_not_needed(cheap_params, small_grid):
    with pytest.raises(DomainError):
        solve_b_star(cheap_params.with_updates(epsilon=0.99), small_grid)


def test_b_star_bracket_cap(cheap_params, small_grid, monkeypatch):
    monkeypatch.setattr(get_settings(), "B_HI_CAP_FACTOR", 2.0)
    with pytest.raises(NoBracket):
        solve_b_star(cheap_params.with_updates(epsilon=1e-9), small_grid)


# ── 위험기준자본 ─────────────────────────────────────────────
def test_risk_capital_is_minimal(cheap_params, small_grid):
    b = 2.0 * build_solution(cheap_params).b0
    eps = 0.3
    x = risk_capital(cheap_params, b, eps, small_grid)
    field = survival_field(cheap_params, b, cheap_params.T, small_grid)
    assert 0.0 < x < b
    assert field.ruin(x) <= eps
    assert field.ruin(x - 1e-6 * b) > eps


def test_risk_capital_follows_bisection_budget(cheap_params, small_grid, monkeypatch):
    b = 2.0 * build_solution(cheap_params).b0
    monkeypatch.setattr(get_settings(), "BISECTION_MAX_ITER", 5)
    with pytest.raises(NoConvergence):
        risk_capital(cheap_params, b, 0.3, small_grid)


def test_risk_capital_unattainable(cheap_params, small_grid):
    b0 = build_solution(cheap_params).b0
    with pytest.raises(Unattainable):
        risk_capital(cheap_params, b0, 0.01, small_grid)


def test_capital_sweep(interior_params, small_grid):
    b = 3.0 * build_solution(interior_params).b0
    frame = capital_sweep(interior_params, b, [0.05, 0.2, 0.5, 0.8, 0.99], small_grid)
    assert list(frame.columns) == ["epsilon", "x", "status"]
    ok = frame[frame["status"] == "ok"]
    assert len(ok) >= 4
    assert ok["x"].is_monotonic_decreasing
    assert ok["x"].iloc[-1] < 0.1 * b


def test_capital_sweep_marks_unattainable(cheap_params, small_grid):
    b0 = build_solution(cheap_params).b0
    frame = capital_sweep(cheap_params, b0, [1e-6, 0.99], small_grid)
    assert list(frame["status"]) == ["unattainable", "ok"]
    assert np.isnan(frame["x"].iloc[0])


# ── ε ↔ b 스윕 ───────────────────────────────────────────────
def test_b_star_sweep_decreasing(cheap_params, small_grid):
    frame = b_star_sweep(cheap_params, [0.05, 0.1, 0.2, 0.4], small_grid)
    assert set(frame["status"]) == {"constrained"}
    assert np.all(np.diff(frame["b_star"].to_numpy()) < 0)

    # 왕복: ε(b(ε)) = ε
    for eps, b in zip(frame["epsilon"], frame["b_star"]):
        assert epsilon_of_b(cheap_params, b, small_grid) == pytest.approx(eps, abs=1e-4)


def test_b_star_sweep_reports_unconstrained(cheap_params, small_grid):
    frame = b_star_sweep(cheap_params, [0.99], small_grid)
    assert frame["status"].iloc[0] == "unconstrained"
    assert frame["b_star"].iloc[0] == pytest.approx(build_solution(cheap_params).b0)


def test_epsilon_sweep_decreasing(interior_params, small_grid):
    b0 = build_solution(interior_params).b0
    frame = epsilon_sweep(interior_params, [0.5 * b0, b0, 1.5 * b0, 2.0 * b0, 3.0 * b0], small_grid)
    assert frame["status"].iloc[0] == "below_b0"
    ok = frame[frame["status"] == "ok"]
    assert np.all(np.diff(ok["epsilon"].to_numpy()) < 0)
