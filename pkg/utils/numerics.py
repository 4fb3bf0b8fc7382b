"""
수치 공통 도구 — 브래킷 확장 · 이분법 · 비균등 3점 차분

hjb (X 역함수, m 고정점), solvency (b*, 위험기준자본) 가 같은 이분법을 쓴다.
"""
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from loguru import logger

from models.errors import NoBracket, NoConvergence


class BisectionResult(NamedTuple):
    x: float
    fx: float
    iterations: int
    lo: float
    hi: float


# ── 브래킷 ───────────────────────────────────────────────────
def expand_bracket(
    func: Callable[[float], float],
    start: float,
    *,
    factor: float = 2.0,
    cap: Optional[float] = None,
    max_iter: int = 200,
) -> Tuple[float, float]:
    """func(hi) ≤ 0 이 될 때까지 hi 를 start 에서 기하급수적으로 키운다

    func 는 감소함수를 가정한다. 반환값은 (hi, func(hi)).

    Raises:
        NoBracket: hi 가 cap 을 넘거나 반복 예산을 소진한 경우
    """
    hi = float(start)
    for _ in range(max_iter):
        if cap is not None and hi > cap:
            raise NoBracket(f"bracket upper end exceeded cap={cap:.6g} (last hi={hi:.6g})")
        value = func(hi)
        if value <= 0:
            return hi, value
        logger.debug(f"[브래킷] hi={hi:.6g} f={value:.3e} → 확장")
        hi *= factor
    raise NoBracket(f"bracket not found after {max_iter} expansions (hi={hi:.6g})")


# ── 스칼라 이분법 ────────────────────────────────────────────
def bisect_scalar(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    ftol: float = 0.0,
    xtol: float = 0.0,
    max_iter: int = 60,
) -> BisectionResult:
    """부호가 바뀌는 구간 [lo, hi] 에서 func 의 근

    |f(mid)| ≤ ftol 또는 구간폭 ≤ xtol 이면 종료.

    Raises:
        NoConvergence: 두 조건 모두 max_iter 안에 만족하지 못한 경우
    """
    f_lo = func(lo)
    mid, f_mid = lo, f_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if abs(f_mid) <= ftol:
            return BisectionResult(mid, f_mid, it, lo, hi)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= xtol:
            return BisectionResult(mid, f_mid, it, lo, hi)
    raise NoConvergence(
        f"bisection did not converge in {max_iter} iterations "
        f"(x={mid:.12g}, residual={f_mid:.3e}, bracket=[{lo:.12g}, {hi:.12g}])"
    )


# ── 벡터 이분법 ──────────────────────────────────────────────
def bisect_decreasing(
    func: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    n_iter: int = 80,
) -> np.ndarray:
    """감소함수 func 에 대해 func(x) = target 을 원소별로 푼다

    func(lo) ≥ target ≥ func(hi) 를 가정한다. 고정 반복 횟수.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    target = np.asarray(target, dtype=float)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        above = func(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


# ── 비균등 격자 3점 차분 ────────────────────────────────────
def nonuniform_stencils(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """내부 노드 j = 1..N-1 의 1계 / 2계 도함수 3점 가중치

    반환: (d1, d2), 각 shape (N-1, 3) 이며 열 순서는 (j-1, j, j+1).
    균등 격자에서는 중심차분과 같다.
    """
    y = np.asarray(y, dtype=float)
    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    s = hm + hp

    d1 = np.column_stack([-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)])
    d2 = np.column_stack([2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)])
    return d1, d2
