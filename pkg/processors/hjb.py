"""
HJB 닫힌형 해 — 계수 · 가치함수 f / g · 최적 보유비율 A*

두 영역
  CheapHeavy (λ ≥ 2μ) : A* ≡ 1, f₁ = C₀(e^{ζ₁x} − e^{ζ₂x}), 장벽 위는 선형
  Interior (μ < λ < 2μ): x < m 에서 부분 재보험 (A* < 1)
                         f₃ = ∫₀ˣ X⁻¹(y)dy, f₄ 지수형, f₅ 선형

Interior 영역에서 X(z) 는 z/z₁ 에만 의존하므로 전환수준 m 과 A*(x) 는
장벽 b 와 무관하고, b 는 z₁ 의 크기만 바꾼다.
"""
import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import quad
from scipy.optimize import brentq

from models.errors import DomainError, NoConvergence
from models.params import ModelParams, Regime, classify, validate
from utils.numerics import bisect_decreasing, expand_bracket

ArrayLike = Union[float, np.ndarray]

FIXED_POINT_TOL = 1e-9
X_INVERSE_BISECT_ITER = 80
X_INVERSE_NEWTON_ITER = 3
CONTROL_TABLE_SIZE = 4097


# ── ζ / b₀ ───────────────────────────────────────────────────
def compute_zetas(params: ModelParams) -> Tuple[float, float]:
    """½σ²ζ² + μζ − c = 0 의 두 근 (ζ₁ > 0 > ζ₂)

    상쇄가 없는 쪽 근을 먼저 구하고 근의 곱 −2c/σ² 로 나머지를 얻는다.
    """
    s2 = params.sigma2
    disc = math.sqrt(params.mu * params.mu + 2.0 * s2 * params.c)
    if params.mu >= 0:
        zeta2 = (-params.mu - disc) / s2
        zeta1 = -2.0 * params.c / (s2 * zeta2)
    else:
        zeta1 = (-params.mu + disc) / s2
        zeta2 = -2.0 * params.c / (s2 * zeta1)
    return zeta1, zeta2


def smooth_fit_b0_closed_form(params: ModelParams) -> float:
    """f₁''(b₀) = 0 의 닫힌형: b₀ = 2·ln|ζ₂/ζ₁| / (ζ₁ − ζ₂)

    μ ≤ 0 이면 |ζ₂| ≤ ζ₁ 이어서 양의 장벽이 없다.
    """
    zeta1, zeta2 = compute_zetas(params)
    if params.mu <= 0:
        raise DomainError(f"no positive dividend barrier for mu={params.mu} <= 0")
    return 2.0 * math.log(abs(zeta2) / zeta1) / (zeta1 - zeta2)


class _InteriorConstants(NamedTuple):
    k: float        # λ/σ²
    p: float        # 1 + c/α
    beta: float     # δ/(α+c)
    K1: float       # C₃ / z₁^{1+c/α}
    r: float        # (z₀/z₁)^{1+c/α}
    m: float
    delta0: float   # b₀ − m


def _interior_constants(params: ModelParams) -> _InteriorConstants:
    zeta1, zeta2 = compute_zetas(params)
    alpha, c, delta, lam = params.alpha, params.c, params.delta, params.lam
    k = lam / params.sigma2
    ac = alpha + c
    K1 = lam * (c + alpha * (2.0 * params.mu / lam - 1.0)) / (2.0 * ac * ac)
    r = (lam * c + alpha * (2.0 * params.mu - lam)) / (2.0 * delta * c)
    m = delta * c / (ac * ac) * (r - 1.0) + delta * alpha / (ac * ac) * math.log(r)
    # f₄''(b₀) = 0 ⇔ (−ζ₂−k)ζ₁e^{ζ₁Δ} = (ζ₁+k)|ζ₂|e^{ζ₂Δ}
    delta0 = math.log(abs(zeta2) * (zeta1 + k) / (zeta1 * (abs(zeta2) - k))) / (zeta1 - zeta2)
    return _InteriorConstants(k, 1.0 + c / alpha, delta / ac, K1, r, m, delta0)


def switching_level(params: ModelParams) -> float:
    """Interior 영역의 전환수준 m (장벽과 무관한 닫힌형)"""
    if classify(params) is not Regime.INTERIOR:
        raise DomainError("switching level m exists only in the Interior regime")
    return _interior_constants(params).m


def compute_b0(params: ModelParams) -> float:
    """무제약 최적 배당장벽 b₀ (f''(b₀⁻) = 0)

    CheapHeavy 는 ζ 닫힌형, Interior 는 f₄ 가 덮는 구간에서의 smooth fit
    b₀ = m + Δ₀ 를 쓴다.
    """
    validate(params)
    if classify(params) is Regime.CHEAP_HEAVY:
        return smooth_fit_b0_closed_form(params)
    consts = _interior_constants(params)
    return consts.m + consts.delta0


# ── 해 레코드 ────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class HjbSolution:
    """장벽 b 에서의 HJB 해 계수 (b = b₀ 이면 f, 그 외 g)"""

    params: ModelParams
    regime: Regime
    b: float
    b0: float
    zeta1: float
    zeta2: float
    alpha: float
    C0: float = math.nan
    z1: float = math.nan
    C1: float = math.nan
    C2: float = math.nan
    C3: float = math.nan
    C4: float = math.nan
    m: float = math.nan
    Delta: float = math.nan
    z0: float = math.nan
    z_max: float = math.nan
    K1: float = math.nan
    fixed_point_residual: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.b == self.b0

    @property
    def retention_floor(self) -> float:
        return self.params.retention_floor

    @cached_property
    def control(self) -> "ControlFunction":
        return ControlFunction(self)


def _log_z1(zeta1: float, zeta2: float, k: float, delta_gap: float) -> float:
    """ln z₁(Δ), z₁ = (ζ₁−ζ₂) / [(−ζ₂−k)e^{ζ₁Δ} + (ζ₁+k)e^{ζ₂Δ}]"""
    tail = (zeta1 + k) * math.exp((zeta2 - zeta1) * delta_gap)
    return math.log(zeta1 - zeta2) - zeta1 * delta_gap - math.log(-zeta2 - k + tail)


def _printed_C4(params: ModelParams, log_C3: float) -> float:
    ac = params.alpha + params.c
    delta, c, alpha = params.delta, params.c, params.alpha
    w = delta * alpha / (ac * ac)
    return -delta * c / (ac * ac) + w * log_C3 + w * math.log(ac * ac / (delta * c))


def solve_interior_coefficients(params: ModelParams, b: float) -> HjbSolution:
    """Interior 영역 장벽 b 에서 (z₁, m, Δ, C₁…C₄) 연립해

    F(m) = X(z₁(b−m)) − m 의 근을 (0, b) 에서 brentq 로 찾는다.

    Raises:
        DomainError: Interior 영역이 아니거나 b < b₀
        NoConvergence: 근 탐색 실패 또는 잔차 > 1e-9·max(1, m)
    """
    validate(params)
    if classify(params) is not Regime.INTERIOR:
        raise DomainError("interior coefficients requested for a CheapHeavy parameter set")
    zeta1, zeta2 = compute_zetas(params)
    consts = _interior_constants(params)
    b0 = consts.m + consts.delta0
    if b < b0 * (1.0 - 1e-12):
        raise DomainError(f"barrier b={b} is below b0={b0}")

    def x_at_z1(m_trial: float) -> float:
        log_z1 = _log_z1(zeta1, zeta2, consts.k, b - m_trial)
        log_C3 = consts.p * log_z1 + math.log(consts.K1)
        C4 = _printed_C4(params, log_C3)
        # C₃·z₁^{−p} = K1
        return consts.K1 + C4 - consts.beta * log_z1

    def fixed_point(m_trial: float) -> float:
        return x_at_z1(m_trial) - m_trial

    try:
        m = brentq(fixed_point, 0.0, b, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as e:
        raise NoConvergence(f"(z1, m) fixed point failed at b={b}: {e}") from e

    residual = fixed_point(m)
    if not abs(residual) <= FIXED_POINT_TOL * max(1.0, m) or not 0.0 < m < b:
        raise NoConvergence(f"(z1, m) fixed point residual {residual:.3e} at b={b}, m={m}")

    delta_gap = b - m
    log_z1 = _log_z1(zeta1, zeta2, consts.k, delta_gap)
    z1 = math.exp(log_z1)
    log_C3 = consts.p * log_z1 + math.log(consts.K1)
    ac = params.alpha + params.c
    log_z0 = (params.alpha / ac) * (log_C3 + math.log(ac * ac / (params.delta * params.c)))

    sol = HjbSolution(
        params=params,
        regime=Regime.INTERIOR,
        b=b,
        b0=b0,
        zeta1=zeta1,
        zeta2=zeta2,
        alpha=params.alpha,
        z1=z1,
        C1=z1 * (-zeta2 - consts.k) / (zeta1 - zeta2),
        C2=z1 * (zeta1 + consts.k) / (zeta1 - zeta2),
        C3=math.exp(log_C3),
        C4=_printed_C4(params, log_C3),
        m=m,
        Delta=delta_gap,
        z0=math.exp(log_z0),
        K1=consts.K1,
        fixed_point_residual=residual,
    )
    # X(z_max) ≤ 0 인 상한 (z₀ 를 포함)
    z_max, _ = expand_bracket(lambda z: float(X_of_z(sol, z)), 2.0 * z1)
    sol = replace(sol, z_max=z_max)
    logger.debug(
        f"[HJB] Interior b={b:.6g} m={m:.6g} z1={z1:.6g} "
        f"z0={sol.z0:.6g} residual={residual:.2e}"
    )
    return sol


@lru_cache(maxsize=256)
def _build_cached(params: ModelParams, b: float) -> HjbSolution:
    regime = classify(params)
    if regime is Regime.INTERIOR:
        return solve_interior_coefficients(params, b)

    zeta1, zeta2 = compute_zetas(params)
    b0 = smooth_fit_b0_closed_form(params)
    return HjbSolution(
        params=params,
        regime=regime,
        b=b,
        b0=b0,
        zeta1=zeta1,
        zeta2=zeta2,
        alpha=params.alpha,
        C0=1.0 / (zeta1 * math.exp(zeta1 * b) - zeta2 * math.exp(zeta2 * b)),
    )


def build_solution(params: ModelParams, b: Optional[float] = None) -> HjbSolution:
    """장벽 b (기본 b₀) 의 HJB 해. (params, b) 별로 메모이즈된다.

    Raises:
        DomainError: b < b₀
    """
    validate(params)
    b0 = compute_b0(params)
    if b is None or abs(b - b0) <= 1e-12 * b0:
        b = b0
    elif b < b0:
        raise DomainError(f"barrier b={b} is below the unconstrained optimum b0={b0}")
    return _build_cached(params, float(b))


# ── X(z) 와 역함수 ───────────────────────────────────────────
def _require_interior(sol: HjbSolution) -> None:
    if sol.regime is not Regime.INTERIOR:
        raise DomainError("X(z) is defined only in the Interior regime")


def X_of_z(sol: HjbSolution, z: ArrayLike) -> ArrayLike:
    """X(z) = C₃z^{−1−c/α} + C₄ − δ/(α+c)·ln z"""
    _require_interior(sol)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise DomainError("X(z) requires z > 0")
    p = 1.0 + sol.params.c / sol.alpha
    beta = sol.params.delta / (sol.alpha + sol.params.c)
    out = sol.C3 * z_arr ** (-p) + sol.C4 - beta * np.log(z_arr)
    return float(out) if np.ndim(out) == 0 else out


def X_prime(sol: HjbSolution, z: ArrayLike) -> ArrayLike:
    _require_interior(sol)
    z_arr = np.asarray(z, dtype=float)
    p = 1.0 + sol.params.c / sol.alpha
    beta = sol.params.delta / (sol.alpha + sol.params.c)
    out = -p * sol.C3 * z_arr ** (-p - 1.0) - beta / z_arr
    return float(out) if np.ndim(out) == 0 else out


def X_inverse(sol: HjbSolution, y: ArrayLike) -> ArrayLike:
    """X(z) = y 의 유일한 해 z ∈ [z₁, z_max] (0 ≤ y ≤ m)

    ln z 에서 이분법 후 Newton 보정.

    Raises:
        DomainError: y ∉ [0, m]
    """
    _require_interior(sol)
    y_arr = np.asarray(y, dtype=float)
    tol = 1e-12 * max(1.0, sol.m)
    if np.any(y_arr < -tol) or np.any(y_arr > sol.m + tol):
        raise DomainError(f"X_inverse requires 0 <= y <= m={sol.m}")
    y_arr = np.clip(y_arr, 0.0, sol.m)

    lo = np.full(y_arr.shape, math.log(sol.z1))
    hi = np.full(y_arr.shape, math.log(sol.z_max))
    log_z = bisect_decreasing(
        lambda s: X_of_z(sol, np.exp(s)), y_arr, lo, hi, n_iter=X_INVERSE_BISECT_ITER,
    )
    z = np.exp(log_z)
    for _ in range(X_INVERSE_NEWTON_ITER):
        z = z - (np.asarray(X_of_z(sol, z)) - y_arr) / np.asarray(X_prime(sol, z))
        z = np.clip(z, sol.z1, sol.z_max)
    # 끝점은 정의상 정확히
    z = np.where(y_arr == sol.m, sol.z1, z)
    return float(z) if np.ndim(z) == 0 else z


# ── 최적 보유비율 ────────────────────────────────────────────
class ControlFunction:
    """x ↦ A*(x) ∈ [d, 1]

    Interior 영역 x < m 에서 A*(x) = −(λ/σ²)·z·X'(z), z = X⁻¹(x).
    x ≥ m (x = m 포함, 우극한) 은 1.
    """

    def __init__(self, solution: HjbSolution):
        self.solution = solution
        self._table: Optional["TabulatedControl"] = None

    def __call__(self, x: ArrayLike) -> ArrayLike:
        sol = self.solution
        x_arr = np.asarray(x, dtype=float)
        out = np.ones_like(x_arr)
        if sol.regime is Regime.INTERIOR:
            below = x_arr < sol.m
            if np.any(below):
                z = np.asarray(X_inverse(sol, np.maximum(x_arr[below], 0.0)))
                k = sol.params.lam / sol.params.sigma2
                out[below] = np.minimum(-k * z * np.asarray(X_prime(sol, z)), 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def tabulate(self, n: int = CONTROL_TABLE_SIZE) -> "TabulatedControl":
        """[0, m] 구간 n 점 선형보간표 (몬테카를로용)"""
        if self._table is None or self._table.size != n:
            self._table = TabulatedControl.from_control(self, n)
        return self._table


@dataclass(frozen=True, eq=False)
class TabulatedControl:
    nodes: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_control(cls, control: ControlFunction, n: int) -> "TabulatedControl":
        sol = control.solution
        if sol.regime is Regime.CHEAP_HEAVY:
            return cls(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        nodes = np.linspace(0.0, sol.m, n)
        values = np.asarray(control(nodes[:-1]))
        return cls(nodes, np.append(values, 1.0))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.nodes, self.values, left=self.values[0], right=1.0)


def control_A(sol: HjbSolution, x: ArrayLike) -> ArrayLike:
    return ControlFunction(sol)(x)


# ── 가치함수 ─────────────────────────────────────────────────
def _f3_closed(sol: HjbSolution, x: np.ndarray) -> np.ndarray:
    """f₃ = (α+c)C₃z^{−c/α}/c − δz/(α+c), z = X⁻¹(x)"""
    params = sol.params
    ac = sol.alpha + params.c
    z = np.asarray(X_inverse(sol, x))
    out = ac * sol.C3 * z ** (-params.c / sol.alpha) / params.c - params.delta * z / ac
    return np.where(x == 0.0, 0.0, out)


def f3_quadrature(sol: HjbSolution, x: float) -> float:
    """∫₀ˣ X⁻¹(y)dy 를 z 변수로 적분: ∫_z^{z₀} w·(−X'(w)) dw"""
    _require_interior(sol)
    if x == 0.0:
        return 0.0
    z = float(X_inverse(sol, x))
    z0 = float(X_inverse(sol, 0.0))
    value, _ = quad(lambda w: -w * X_prime(sol, w), z, z0, epsabs=1e-10, epsrel=1e-12, limit=200)
    return value


def _f4(sol: HjbSolution, x: np.ndarray) -> np.ndarray:
    s = x - sol.m
    return sol.C1 / sol.zeta1 * np.exp(sol.zeta1 * s) + sol.C2 / sol.zeta2 * np.exp(sol.zeta2 * s)


def _f1(sol: HjbSolution, x: np.ndarray) -> np.ndarray:
    # C₀(e^{ζ₁x} − e^{ζ₂x}) 를 e^{ζ₁b} 로 나눈 꼴
    z1, z2, b = sol.zeta1, sol.zeta2, sol.b
    num = np.exp(z1 * (x - b)) - np.exp(z2 * x - z1 * b)
    return num / (z1 - z2 * math.exp((z2 - z1) * b))


def value_g(sol: HjbSolution, x: ArrayLike, *, quadrature: bool = False) -> ArrayLike:
    """장벽 b 배당정책의 가치 g(x, b) (b = b₀ 이면 f)

    quadrature=True 면 f₃ 구간을 수치적분으로 계산한다.

    Raises:
        DomainError: x < 0
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("value function requires x >= 0")
    b = sol.b
    inside = np.minimum(x_arr, b)

    if sol.regime is Regime.CHEAP_HEAVY:
        body = _f1(sol, inside)
        at_b = float(_f1(sol, np.array(b)))
    else:
        body = np.empty_like(inside)
        low = inside < sol.m
        if np.any(low):
            if quadrature:
                body[low] = [f3_quadrature(sol, float(v)) for v in inside[low]]
            else:
                body[low] = _f3_closed(sol, inside[low])
        body[~low] = _f4(sol, inside[~low])
        at_b = float(_f4(sol, np.array(b)))

    out = np.where(x_arr > b, at_b + (x_arr - b), body)
    return float(out) if np.ndim(out) == 0 else out


def value_f(sol: HjbSolution, x: ArrayLike, *, quadrature: bool = False) -> ArrayLike:
    """무제약 최적가치 f(x) — b = b₀ 로 만든 해에서만 허용"""
    if not sol.is_optimal:
        raise DomainError(f"value_f requires the solution at b0={sol.b0}, got b={sol.b}")
    return value_g(sol, x, quadrature=quadrature)


# ── HJB 잔차 ─────────────────────────────────────────────────
class HjbResidual(NamedTuple):
    at_optimum: float
    max_over_actions: float


def hjb_residual(
    sol: HjbSolution,
    x: float,
    *,
    h: Optional[float] = None,
    n_actions: int = 101,
) -> HjbResidual:
    """ℒᵃv(x) = ½σ²a²v'' + (μ−(1−a)λ)v' − cv 의 a = A*(x) 값과 a 격자 최댓값

    도함수는 value_g 의 중심차분 (h = 1e-4·max(1, b)).
    """
    params = sol.params
    if h is None:
        h = 1e-4 * max(1.0, sol.b)
    if not h < x:
        raise DomainError(f"hjb_residual needs x > h (x={x}, h={h})")
    v_m, v_0, v_p = np.asarray(value_g(sol, np.array([x - h, x, x + h])))
    d1 = (v_p - v_m) / (2.0 * h)
    d2 = (v_p - 2.0 * v_0 + v_m) / (h * h)

    a_star = float(control_A(sol, x))
    actions = np.append(np.linspace(0.0, 1.0, n_actions), a_star)
    gen = (
        0.5 * params.sigma2 * actions ** 2 * d2
        + (params.mu - (1.0 - actions) * params.lam) * d1
        - params.c * v_0
    )
    return HjbResidual(at_optimum=float(gen[-1]), max_over_actions=float(gen.max()))
