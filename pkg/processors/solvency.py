"""
솔벤시 제약 배당정책 — 의사결정 · b* · 위험기준자본 · ε(b)

의사결정 규칙
  1. p₀ = ψ^{b₀}(T, b₀) 계산
  2. p₀ ≤ ε  → 무제약 (장벽 b₀, 가치 f)
  3. p₀ > ε  → 제약 (ψ^{b}(T, b) = ε 의 유일근 b* > b₀, 가치 g(·, b*))

제약은 시작점 x = b 에서 평가하고, x 에 따른 필요자본은 risk_capital 이 따로 푼다.
"""
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from config.settings import get_settings
from models.errors import DomainError, NumericalError, Unattainable
from models.params import ModelParams, Regime, validate
from models.schemas import PdeGrid, SimConfig
from processors.hjb import HjbSolution, build_solution, value_f, value_g
from processors.ruin import survival_field
from processors.simulate import estimate_value
from utils.numerics import bisect_scalar, expand_bracket


# ── 결과 레코드 ──────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class PolicyDecision:
    """의사결정 결과 (constrained=False 면 b₀, True 면 b*)"""

    params: ModelParams
    regime: Regime
    b0: float
    chosen_barrier: float
    constrained: bool
    attained_ruin_prob: float
    unconstrained_ruin_prob: float
    solution: HjbSolution
    optimum: HjbSolution

    def value_at(self, x):
        return value_g(self.solution, x)

    def control_at(self, x):
        return self.solution.control(x)

    def value_ratio(self, x):
        """V(x) / f(x) (x = 0 에서는 1)"""
        v = np.asarray(self.value_at(x), dtype=float)
        f = np.asarray(value_f(self.optimum, x), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(f > 0, v / f, 1.0)
        return float(ratio) if np.ndim(ratio) == 0 else ratio


# ── ε(b) ─────────────────────────────────────────────────────
def epsilon_of_b(params: ModelParams, b: float, grid: Optional[PdeGrid] = None) -> float:
    """ψᵇ(T, b): 장벽 b 에서 시작한 b 정책의 T 이전 파산확률"""
    validate(params)
    field = survival_field(params, b, params.T, grid)
    return 1.0 - float(field.values[-1, -1])


# ── b* ───────────────────────────────────────────────────────
def solve_b_star(params: ModelParams, grid: Optional[PdeGrid] = None) -> float:
    """ψᵇ(T, b) = ε 인 유일한 b* > b₀

    [b₀, b_hi] 이분법. b_hi 는 2배씩 키우며 cap = B_HI_CAP_FACTOR·b₀.

    Raises:
        DomainError: ψ(b₀) ≤ ε (b* 불필요)
        NoBracket: b_hi 가 cap 을 넘음
        NoConvergence: 반복 예산 안에 |ψ − ε| ≤ TOL_EPS 실패
    """
    validate(params)
    settings = get_settings()
    eps = params.epsilon
    b0 = build_solution(params).b0

    def gap(b: float) -> float:
        return epsilon_of_b(params, b, grid) - eps

    p0 = gap(b0) + eps
    if p0 <= eps:
        raise DomainError(f"b* not needed: psi(b0)={p0:.6g} <= epsilon={eps}")

    cap = settings.B_HI_CAP_FACTOR * b0
    b_hi, _ = expand_bracket(gap, 2.0 * b0, cap=cap)
    result = bisect_scalar(
        gap, b0, b_hi, ftol=settings.TOL_EPS, max_iter=settings.BISECTION_MAX_ITER,
    )
    logger.info(
        f"[솔벤시] b*={result.x:.6g} (b0={b0:.6g}, eps={eps}, "
        f"psi-eps={result.fx:.2e}, iter={result.iterations})"
    )
    return result.x


def decide_policy(params: ModelParams, grid: Optional[PdeGrid] = None) -> PolicyDecision:
    """무제약 b₀ 가 ε 를 만족하면 그대로, 아니면 b* 로"""
    validate(params)
    optimum = build_solution(params)
    p0 = epsilon_of_b(params, optimum.b0, grid)

    if p0 <= params.epsilon:
        logger.info(f"[솔벤시] 무제약: psi(b0)={p0:.6g} <= eps={params.epsilon}")
        return PolicyDecision(
            params=params,
            regime=optimum.regime,
            b0=optimum.b0,
            chosen_barrier=optimum.b0,
            constrained=False,
            attained_ruin_prob=p0,
            unconstrained_ruin_prob=p0,
            solution=optimum,
            optimum=optimum,
        )

    b_star = solve_b_star(params, grid)
    solution = build_solution(params, b_star)
    return PolicyDecision(
        params=params,
        regime=optimum.regime,
        b0=optimum.b0,
        chosen_barrier=b_star,
        constrained=True,
        attained_ruin_prob=epsilon_of_b(params, b_star, grid),
        unconstrained_ruin_prob=p0,
        solution=solution,
        optimum=optimum,
    )


# ── 위험기준자본 x(ε) ────────────────────────────────────────
def risk_capital(
    params: ModelParams,
    b: float,
    epsilon: Optional[float] = None,
    grid: Optional[PdeGrid] = None,
) -> float:
    """ψᵇ(T, x) ≤ ε 를 만족하는 가장 작은 초기자본 x

    Raises:
        Unattainable: ψᵇ(T, b) > ε
    """
    validate(params)
    eps = params.epsilon if epsilon is None else epsilon
    field = survival_field(params, b, params.T, grid)
    psi_b = field.ruin(b)
    if psi_b > eps:
        raise Unattainable(
            f"even full capital x=b={b:.6g} has ruin probability {psi_b:.6g} > epsilon={eps}"
        )

    settings = get_settings()

    def gap(x: float) -> float:
        return field.ruin(x) - eps

    # ψ 는 x 에 대해 비증가, ψ(0) = 1 > ε 이므로 hi 쪽은 항상 ψ ≤ ε
    result = bisect_scalar(
        gap, 0.0, float(b), xtol=1e-12 * max(1.0, b), max_iter=settings.BISECTION_MAX_ITER,
    )
    x = result.x if result.fx <= 0.0 else result.hi
    logger.debug(f"[솔벤시] x(eps={eps})={x:.6g} (b={b:.6g}, iter={result.iterations})")
    return x


# ── 스윕 ─────────────────────────────────────────────────────
def _status(exc: Exception) -> str:
    return type(exc).__name__


def b_star_sweep(
    params: ModelParams,
    eps_grid: Sequence[float],
    grid: Optional[PdeGrid] = None,
) -> pd.DataFrame:
    """ε 격자 위 최적 배당수준 b(ε) (ψ(b₀) ≤ ε 이면 b₀)"""
    rows = []
    for eps in tqdm(list(eps_grid), desc="b(eps)", disable=None):
        p = params.with_updates(epsilon=float(eps))
        try:
            decision = decide_policy(p, grid)
            rows.append({
                "epsilon": float(eps),
                "b_star": decision.chosen_barrier,
                "status": "constrained" if decision.constrained else "unconstrained",
            })
        except NumericalError as e:
            logger.warning(f"[솔벤시] eps={eps}: {e}")
            rows.append({"epsilon": float(eps), "b_star": math.nan, "status": _status(e)})
    return pd.DataFrame(rows, columns=["epsilon", "b_star", "status"])


def epsilon_sweep(
    params: ModelParams,
    b_grid: Sequence[float],
    grid: Optional[PdeGrid] = None,
) -> pd.DataFrame:
    """b 격자 위 위험수준 ε(b) = ψᵇ(T, b)"""
    b0 = build_solution(params).b0
    rows = []
    for b in tqdm(list(b_grid), desc="eps(b)", disable=None):
        if b < b0:
            rows.append({"b": float(b), "epsilon": math.nan, "status": "below_b0"})
            continue
        try:
            rows.append({"b": float(b), "epsilon": epsilon_of_b(params, float(b), grid), "status": "ok"})
        except NumericalError as e:
            logger.warning(f"[솔벤시] b={b}: {e}")
            rows.append({"b": float(b), "epsilon": math.nan, "status": _status(e)})
    return pd.DataFrame(rows, columns=["b", "epsilon", "status"])


def capital_sweep(
    params: ModelParams,
    b: float,
    eps_grid: Sequence[float],
    grid: Optional[PdeGrid] = None,
) -> pd.DataFrame:
    """ε 격자 위 위험기준자본 x(ε)"""
    rows = []
    for eps in tqdm(list(eps_grid), desc="x(eps)", disable=None):
        try:
            rows.append({"epsilon": float(eps), "x": risk_capital(params, b, float(eps), grid), "status": "ok"})
        except Unattainable:
            rows.append({"epsilon": float(eps), "x": math.nan, "status": "unattainable"})
    return pd.DataFrame(rows, columns=["epsilon", "x", "status"])


# ── 최적성 점검 (몬테카를로) ─────────────────────────────────
class OptimalityAudit(NamedTuple):
    x: float
    b: float
    analytic: float
    simulated: float
    stderr: float
    perturbed: Dict[float, Tuple[float, float]]


def audit_optimality(
    params: ModelParams,
    b: float,
    x: float,
    config: Optional[SimConfig] = None,
    *,
    perturbation: float = 0.1,
) -> OptimalityAudit:
    """장벽 b 에서 Ĵ(x) 와 g(x, b) 비교, b(1 ± perturbation) 의 Ĵ 도 함께

    b(1 − perturbation) < b₀ 이면 하향 섭동은 생략한다.
    """
    sol = build_solution(params, b)
    simulated, stderr = estimate_value(params, sol.control, sol.b, x, config)
    perturbed: Dict[float, Tuple[float, float]] = {}
    for factor in (1.0 - perturbation, 1.0 + perturbation):
        b_alt = sol.b * factor
        if b_alt < sol.b0:
            continue
        alt = build_solution(params, b_alt)
        perturbed[b_alt] = estimate_value(params, alt.control, b_alt, x, config)
    analytic = float(value_g(sol, x))
    logger.info(
        f"[감사] b={sol.b:.6g} x={x:.6g} g={analytic:.6g} "
        f"J={simulated:.6g}±{stderr:.2g}"
    )
    return OptimalityAudit(x, sol.b, analytic, simulated, stderr, perturbed)
