"""
파산확률 — 생존확률 PDE · u(b) · 해석적 하한 ε₀

  φ_t = a(y)φ_yy + μ(y)φ_y,   0 < y < b, 0 < t ≤ T
  φ(0, y) = 1 (y > 0),  φ(t, 0) = 0,  φ_y(t, b) = 0
  a(y) = ½σ²A*(y)²,  μ(y) = λA*(y) − δ

ψᵇ(T, x) = 1 − φᵇ(T, x) 가 barrier 정책의 T 이전 파산확률이다.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import quad
from scipy.sparse import diags, identity
from scipy.sparse.linalg import splu
from scipy.stats import norm

from config.settings import get_settings
from models.errors import DomainError, GridError, InstabilityError
from models.params import ModelParams, Regime, validate
from models.schemas import PdeGrid
from processors.hjb import ControlFunction, build_solution, compute_b0
from utils.numerics import nonuniform_stencils

ArrayLike = Union[float, np.ndarray]


# ── 결과 레코드 ──────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class SurvivalField:
    """φᵇ(t_i, y_j) 격자해 (values.shape = (len(t), len(y)))

    nt 는 CN 스텝 기준 시간 스텝 수이고, t 에는 Rannacher 반스텝 시각도 들어 있다.
    """

    b: float
    T: float
    y: np.ndarray
    t: np.ndarray
    values: np.ndarray
    nt: int

    @property
    def ny(self) -> int:
        return len(self.y)

    def survival(self, x: ArrayLike) -> ArrayLike:
        """φᵇ(T, x), 노드 사이 선형보간"""
        out = np.interp(x, self.y, self.values[-1])
        return float(out) if np.ndim(out) == 0 else out

    def ruin(self, x: ArrayLike) -> ArrayLike:
        out = 1.0 - np.asarray(self.survival(x))
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class RuinCurve:
    """b ↦ ψᵇ(T, b) 표본"""

    b: np.ndarray
    psi: np.ndarray
    T: float

    @property
    def survival(self) -> np.ndarray:
        return 1.0 - self.psi

    def is_strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.psi) < 0))


# ── 격자 ─────────────────────────────────────────────────────
def spatial_grid(b: float, ny: int, kink: Optional[float] = None) -> np.ndarray:
    """[0, b] 노드 ny 개. 0 < kink < b 이면 kink 에 노드를 둔다 (구간별 균등)"""
    if ny < 3:
        raise GridError(f"ny must be >= 3, got {ny}")
    if kink is None or not 0.0 < kink < b or ny < 5:
        return np.linspace(0.0, b, ny)
    n_left = int(round((ny - 1) * kink / b))
    n_left = min(max(n_left, 2), ny - 3)
    left = np.linspace(0.0, kink, n_left + 1)
    right = np.linspace(kink, b, ny - n_left)[1:]
    return np.concatenate([left, right])


def pde_coefficients(
    params: ModelParams, control: ControlFunction, y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """확산계수 a(y) = ½σ²A*(y)², 표류 μ(y) = λA*(y) − δ"""
    A = np.asarray(control(np.asarray(y, dtype=float)))
    return 0.5 * params.sigma2 * A * A, params.lam * A - params.delta


def _generator_matrix(y: np.ndarray, a: np.ndarray, drift: np.ndarray):
    """미지수 φ₁…φ_N 에 대한 공간 연산자 (φ₀ = 0, y_N = b 는 유령노드 Neumann)"""
    d1, d2 = nonuniform_stencils(y)
    inner_a, inner_mu = a[1:-1], drift[1:-1]
    lower = inner_a * d2[:, 0] + inner_mu * d1[:, 0]
    center = inner_a * d2[:, 1] + inner_mu * d1[:, 1]
    upper = inner_a * d2[:, 2] + inner_mu * d1[:, 2]

    h = y[-1] - y[-2]
    edge = 2.0 * a[-1] / (h * h)
    main = np.append(center, -edge)
    sub = np.append(lower[1:], edge)
    return diags([sub, main, upper], [-1, 0, 1], format="csc")


def _auto_nt(T: float, y: np.ndarray, a_max: float) -> int:
    settings = get_settings()
    dy = float(np.min(np.diff(y)))
    nt = math.ceil(T / (2.0 * dy * dy / a_max))
    return int(min(max(nt, settings.PDE_NT_MIN), settings.PDE_NT_MAX))


# ── PDE 풀이 ─────────────────────────────────────────────────
def solve_survival_pde(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    T: float,
    grid: Optional[PdeGrid] = None,
) -> SurvivalField:
    """Crank–Nicolson (초기 Rannacher 음해법 반스텝) 으로 φᵇ 를 푼다

    Raises:
        DomainError: b < b₀ 또는 T ≤ 0
        GridError: 격자 노드 < 3
        InstabilityError: φ 가 [−tol_clip, 1+tol_clip] 를 벗어남
    """
    validate(params)
    settings = get_settings()
    grid = grid or PdeGrid(ny=settings.PDE_NY)
    sol = control.solution
    if b < sol.b0 * (1.0 - 1e-12):
        raise DomainError(f"barrier b={b} is below b0={sol.b0}")
    if not T > 0:
        raise DomainError(f"horizon must be positive, got {T}")

    kink = sol.m if sol.regime is Regime.INTERIOR else None
    y = spatial_grid(b, grid.ny, kink)
    a, drift = pde_coefficients(params, control, y)
    L = _generator_matrix(y, a, drift)

    nt = grid.nt or _auto_nt(T, y, float(a.max()))
    dt = T / nt
    half_steps = 2 * (settings.PDE_RANNACHER_STEPS // 2)
    half_steps = min(half_steps, 2 * (nt - 1))
    cn_steps = nt - half_steps // 2

    eye = identity(L.shape[0], format="csc")
    # 음해법 반스텝과 CN 은 같은 좌변 (I − ½Δt·L)
    lu = splu((eye - 0.5 * dt * L).tocsc())
    rhs_op = (eye + 0.5 * dt * L).tocsr()

    phi = np.ones(L.shape[0])
    rows = [np.concatenate([[0.0], phi])]
    times = [0.0]
    t = 0.0
    for _ in range(half_steps):
        phi = lu.solve(phi)
        t += 0.5 * dt
        rows.append(np.concatenate([[0.0], phi]))
        times.append(t)
    for _ in range(cn_steps):
        phi = lu.solve(rhs_op @ phi)
        t += dt
        rows.append(np.concatenate([[0.0], phi]))
        times.append(t)

    values = np.vstack(rows)
    tol_clip = settings.PDE_TOL_CLIP
    lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    if np.isnan(values).any() or lo < -tol_clip or hi > 1.0 + tol_clip:
        raise InstabilityError(
            f"survival grid left [0, 1] (min={lo:.3e}, max={hi:.6f}) "
            f"at b={b}, ny={grid.ny}, nt={nt}; refine the grid"
        )
    values = np.clip(values, 0.0, 1.0)
    times_arr = np.array(times)
    times_arr[-1] = T

    logger.debug(
        f"[PDE] b={b:.6g} T={T:g} ny={len(y)} nt={nt} (rannacher {half_steps}) "
        f"phi(T,b)={values[-1, -1]:.6f}"
    )
    return SurvivalField(b=float(b), T=float(T), y=y, t=times_arr, values=values, nt=nt)


@lru_cache(maxsize=8)
def _cached_field(params: ModelParams, b: float, T: float, grid: PdeGrid) -> SurvivalField:
    return solve_survival_pde(params, build_solution(params, b).control, b, T, grid)


def survival_field(
    params: ModelParams,
    b: float,
    T: Optional[float] = None,
    grid: Optional[PdeGrid] = None,
) -> SurvivalField:
    """장벽 b 최적 보유비율로 푼 φᵇ (메모이즈)"""
    grid = grid or PdeGrid(ny=get_settings().PDE_NY)
    sol = build_solution(params, b)
    return _cached_field(params, sol.b, float(params.T if T is None else T), grid)


def ruin_probability(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    T: float,
    x: ArrayLike,
    grid: Optional[PdeGrid] = None,
) -> ArrayLike:
    """ψᵇ(T, x) = 1 − φᵇ(T, x)

    Raises:
        DomainError: x ∉ [0, b]
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(x_arr > b * (1.0 + 1e-12)):
        raise DomainError(f"x must lie in [0, b={b}]")
    if control is build_solution(params, b).control:
        field = survival_field(params, b, T, grid)
    else:
        field = solve_survival_pde(params, control, b, T, grid)
    return field.ruin(np.minimum(x, b))


def u_of_b(params: ModelParams, T: float, b: float, grid: Optional[PdeGrid] = None) -> float:
    """u(b) = φᵇ(T, b)"""
    field = survival_field(params, b, T, grid)
    return float(field.values[-1, -1])


def ruin_curve(
    params: ModelParams,
    T: float,
    b_grid: Sequence[float],
    grid: Optional[PdeGrid] = None,
    workers: int = 1,
) -> RuinCurve:
    """b 격자 위 ψᵇ(T, b). 각 PDE 풀이는 독립이라 병렬 실행"""
    b_values = np.asarray(b_grid, dtype=float)

    def work(b: float) -> float:
        return 1.0 - u_of_b(params, T, float(b), grid)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            psi = list(pool.map(work, b_values))
    else:
        psi = [work(b) for b in b_values]
    return RuinCurve(b=b_values, psi=np.array(psi), T=float(T))


# ── 해석적 하한 ──────────────────────────────────────────────
def log_drift_hitting_probability(mu: float, sigma: float, x: float, T: float) -> float:
    """ln P[inf{t: μt + σW_t = −x} ≤ T]"""
    st = sigma * math.sqrt(T)
    log_first = norm.logcdf((-x - mu * T) / st)
    log_second = -2.0 * mu * x / (sigma * sigma) + norm.logcdf((-x + mu * T) / st)
    return float(np.logaddexp(log_first, log_second))


def drift_hitting_probability(mu: float, sigma: float, x: float, T: float) -> float:
    """P[inf{t: μt + σW_t = −x} ≤ T] 닫힌형"""
    return math.exp(log_drift_hitting_probability(mu, sigma, x, T))


def hitting_integral_term(params: ModelParams, x: float, T: float) -> float:
    """(x/(√(2π)σ))∫₀ᵀ t^{−3/2} exp(−(x+μt)²/(2σ²t)) dt, t = s² 치환"""
    sigma, mu = params.sigma, params.mu

    def integrand(s: float) -> float:
        if s <= 0.0:
            return 0.0
        t = s * s
        return 2.0 / t * math.exp(-((x + mu * t) ** 2) / (2.0 * sigma * sigma * t))

    value, _ = quad(integrand, 0.0, math.sqrt(T), epsabs=1e-13, epsrel=1e-10, limit=200)
    return x / (math.sqrt(2.0 * math.pi) * sigma) * value


def log_epsilon0_lower_bound(params: ModelParams, x: float, T: float) -> float:
    """ln ε₀(x, T), 장벽 b₀ 정책의 파산확률 하한 (항상 유한)

    ε₀ = min{ 4[1−Φ(x/(dσ√T))]² / exp((2/σ²)(λ²+δ²)T), 적분항 }
    두 항 모두 로그로 두고 로그 공간에서 min 을 취한다.
    적분항 구적값이 0 으로 내려가면 같은 값인 도달확률 닫힌형의 로그를 쓴다.

    Raises:
        DomainError: x ≤ 0, x > b₀ 또는 T ≤ 0
    """
    validate(params)
    b0 = compute_b0(params)
    if not 0.0 < x <= b0 * (1.0 + 1e-12):
        raise DomainError(f"epsilon0 bound requires 0 < x <= b0={b0}, got {x}")
    if not T > 0:
        raise DomainError(f"horizon must be positive, got {T}")
    d = params.retention_floor
    sigma = params.sigma
    log_first = (
        math.log(4.0)
        + 2.0 * norm.logsf(x / (d * sigma * math.sqrt(T)))
        - (2.0 / params.sigma2) * (params.lam ** 2 + params.delta ** 2) * T
    )
    integral = hitting_integral_term(params, x, T)
    if integral > 0.0:
        log_integral = math.log(integral)
    else:
        log_integral = log_drift_hitting_probability(params.mu, sigma, x, T)
    return min(log_first, log_integral)


def epsilon0_lower_bound(params: ModelParams, x: float, T: float) -> float:
    """ε₀(x, T) = exp(log_epsilon0_lower_bound)

    긴 지평 (예: T = 500) 에서는 첫째 항이 double 범위 아래라 0.0 으로 언더플로한다.
    양수성이 필요하면 log_epsilon0_lower_bound 를 쓸 것.
    """
    log_bound = log_epsilon0_lower_bound(params, x, T)
    bound = math.exp(log_bound)
    if bound == 0.0:
        logger.warning(f"[하한] eps0 언더플로: ln(eps0)={log_bound:.6g} (x={x:.6g}, T={T:g})")
    return bound
