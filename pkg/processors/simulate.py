"""
몬테카를로 — 배당장벽 b 에서 반사, 0 에서 흡수되는 준비금 과정

  dR = (μ − (1−A*(R))λ)dt + σA*(R)dW − dL

스킴
  euler  : Euler–Maruyama + 투영 반사 (초과분 e^{−ct}(R̂−b) 를 배당으로 적립),
           흡수 판정이 반사보다 먼저, 파산시각은 스텝 내 선형보간
  bridge : (기본값) 스텝 계수를 고정한 브라운 브리지 보정
           최솟값 교차확률 exp(−2RR̂/(σ²A²dt)) 로 파산,
           최댓값 M 의 초과분 max(0, M−b) 를 배당으로 (스텝 단위 Skorokhod 사상)

euler 는 이산 감시라 스텝 사이 파산을 놓친다 (편향 O(√dt)).

난수는 (seed, path_index) 를 키로 하는 경로별 Philox 스트림이라
블록 크기나 워커 수와 무관하게 결과가 같다.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.settings import get_settings
from models.errors import ConfigError
from models.params import ModelParams, validate
from models.schemas import SimConfig
from processors.hjb import ControlFunction, TabulatedControl

Purpose = Literal["ruin", "value"]


# ── 결과 묶음 ────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class PathBatch:
    """경로별 파산여부 · 파산시각 · 할인배당 합계 (경로 번호 순)"""

    ruined: np.ndarray
    ruin_time: np.ndarray
    discounted_dividends: np.ndarray
    horizon: float
    dt: float

    @property
    def n_paths(self) -> int:
        return len(self.ruined)

    @property
    def ruin_prob(self) -> float:
        return float(np.mean(self.ruined))

    @property
    def ruin_stderr(self) -> float:
        p = self.ruin_prob
        return math.sqrt(p * (1.0 - p) / self.n_paths)

    @property
    def value_mean(self) -> float:
        return float(np.mean(self.discounted_dividends))

    @property
    def value_stderr(self) -> float:
        if self.n_paths < 2:
            return 0.0
        return float(np.std(self.discounted_dividends, ddof=1) / math.sqrt(self.n_paths))

    def summary(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "horizon": self.horizon,
            "dt": self.dt,
            "ruin_prob": self.ruin_prob,
            "ruin_stderr": self.ruin_stderr,
            "value": self.value_mean,
            "value_stderr": self.value_stderr,
        }


# ── 설정 보완 ────────────────────────────────────────────────
def resolve_config(params: ModelParams, config: Optional[SimConfig], purpose: Purpose = "ruin") -> SimConfig:
    """horizon / dt 기본값 채우기

    파산확률: horizon = T
    배당가치: horizon = ln(1/tol)/c  (e^{−c·horizon} ≤ tol)
    dt = min(1e-3·horizon, 1e-2·σ²/λ²)
    """
    settings = get_settings()
    if config is None:
        config = SimConfig(
            n_paths=settings.MC_PATHS,
            seed=settings.MC_SEED,
            scheme=settings.MC_SCHEME,
            workers=settings.MC_WORKERS,
            block_size=settings.MC_BLOCK_SIZE,
        )
    horizon = config.horizon
    if horizon is None:
        if purpose == "value":
            horizon = math.log(1.0 / settings.VALUE_TRUNCATION_TOL) / params.c
        else:
            horizon = params.T
    dt = config.dt
    if dt is None:
        dt = min(1e-3 * horizon, 1e-2 * params.sigma2 / params.lam ** 2)
    # SimConfig 검증기가 dt ≤ horizon 을 다시 확인한다
    return SimConfig(**{**config.model_dump(), "horizon": horizon, "dt": dt})


STEP_CHUNK = 256


def _path_rng(seed: int, path_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) | path_index))


class _PathStreams:
    """블록 내 경로별 난수 스트림

    스트림은 STEP_CHUNK 스텝 단위로 (정규 → 균등) 순서로 소비되므로
    한 경로의 난수열은 블록 구성과 무관하다.
    """

    def __init__(self, seed: int, indices: np.ndarray, n_uniform: int):
        self.rngs = [_path_rng(seed, int(i)) for i in indices]
        self.n_uniform = n_uniform

    def next(self, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
        """정규난수 (n, n_steps) 와 (0,1] 균등난수 (n, n_steps, n_uniform)"""
        normals = np.empty((len(self.rngs), n_steps))
        uniforms = np.empty((len(self.rngs), n_steps, self.n_uniform))
        for row, rng in enumerate(self.rngs):
            normals[row] = rng.standard_normal(n_steps)
            if self.n_uniform:
                uniforms[row] = 1.0 - rng.random((n_steps, self.n_uniform))
        return normals, uniforms


def _check_inputs(params: ModelParams, control: ControlFunction, b: float, x0: float) -> None:
    validate(params)
    if control.solution.params != params:
        raise ConfigError("control was built for a different parameter set")
    if not b > 0:
        raise ConfigError(f"barrier must be positive, got {b}")
    if not x0 >= 0:
        raise ConfigError(f"initial reserve must be >= 0, got {x0}")


# ── 블록 시뮬레이션 ──────────────────────────────────────────
def _simulate_block(
    params: ModelParams,
    table: TabulatedControl,
    b: float,
    x0: float,
    indices: np.ndarray,
    cfg: SimConfig,
    n_steps: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(indices)
    dt = cfg.horizon / n_steps
    sqdt = math.sqrt(dt)
    bridge = cfg.scheme == "bridge"

    mu, lam, sigma, c = params.mu, params.lam, params.sigma, params.c
    ruined = np.zeros(n, dtype=bool)
    ruin_time = np.full(n, np.inf)
    dividends = np.zeros(n)

    # 초기 일시배당 (x0 > b)
    start = min(x0, b)
    if x0 > b:
        dividends += x0 - b
    if start <= 0.0:
        ruined[:] = True
        ruin_time[:] = 0.0
        return ruined, ruin_time, dividends

    streams = _PathStreams(cfg.seed, indices, 2 if bridge else 0)
    R = np.full(n, start)
    alive = np.ones(n, dtype=bool)
    for chunk_start in range(0, n_steps, STEP_CHUNK):
        chunk = min(STEP_CHUNK, n_steps - chunk_start)
        normals, uniforms = streams.next(chunk)
        for j in range(chunk):
            step = chunk_start + j
            t_n = step * dt
            t_next = (step + 1) * dt
            A = table(R)
            R_hat = R + (mu - (1.0 - A) * lam) * dt + sigma * A * sqdt * normals[:, j]

            # 흡수 먼저
            hit = alive & (R_hat <= 0.0)
            if np.any(hit):
                ruin_time[hit] = t_n + dt * R[hit] / (R[hit] - R_hat[hit])
            if bridge:
                var = (sigma * A) ** 2 * dt
                p_cross = np.exp(-2.0 * R * np.maximum(R_hat, 0.0) / var)
                crossed = alive & ~hit & (uniforms[:, j, 0] < p_cross)
                if np.any(crossed):
                    ruin_time[crossed] = t_n + dt * R[crossed] / (R[crossed] + R_hat[crossed])
                hit |= crossed
            ruined |= hit
            alive &= ~hit

            # 반사
            if bridge:
                spread = (R_hat - R) ** 2 - 2.0 * var * np.log(uniforms[:, j, 1])
                peak = 0.5 * (R + R_hat + np.sqrt(spread))
                paid = np.where(alive, np.maximum(peak - b, 0.0), 0.0)
                R_new = R_hat - paid
                sunk = alive & (R_new <= 0.0)
                if np.any(sunk):
                    ruin_time[sunk] = t_next
                    ruined |= sunk
                    alive &= ~sunk
                    paid = np.where(sunk, 0.0, paid)
            else:
                paid = np.where(alive, np.maximum(R_hat - b, 0.0), 0.0)
                R_new = np.minimum(R_hat, b)
            dividends += math.exp(-c * t_next) * paid

            R = np.where(alive, np.minimum(R_new, b), R)
            if not alive.any():
                return ruined, ruin_time, dividends
    return ruined, ruin_time, dividends


def _blocks(n_paths: int, block_size: int) -> List[np.ndarray]:
    return [np.arange(s, min(s + block_size, n_paths)) for s in range(0, n_paths, block_size)]


def _block_size(cfg: SimConfig, n_uniform: int) -> int:
    per_path = STEP_CHUNK * (1 + n_uniform)
    return max(1, min(cfg.block_size, get_settings().MC_MAX_BLOCK_ELEMENTS // per_path))


def run_paths(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    x0: float,
    config: Optional[SimConfig] = None,
    *,
    purpose: Purpose = "ruin",
    indices: Optional[Sequence[int]] = None,
) -> PathBatch:
    """경로 묶음 시뮬레이션 (indices 기본값: 0 … n_paths−1)"""
    _check_inputs(params, control, b, x0)
    cfg = resolve_config(params, config, purpose)
    n_steps = max(1, math.ceil(cfg.horizon / cfg.dt - 1e-9))
    block_size = _block_size(cfg, 2 if cfg.scheme == "bridge" else 0)

    all_indices = np.arange(cfg.n_paths) if indices is None else np.asarray(indices, dtype=np.int64)
    blocks = [all_indices[blk] for blk in _blocks(len(all_indices), block_size)]
    table = control.tabulate()

    def work(idx: np.ndarray):
        return _simulate_block(params, table, b, x0, idx, cfg, n_steps)

    if cfg.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(idx) for idx in blocks]

    batch = PathBatch(
        ruined=np.concatenate([p[0] for p in parts]),
        ruin_time=np.concatenate([p[1] for p in parts]),
        discounted_dividends=np.concatenate([p[2] for p in parts]),
        horizon=cfg.horizon,
        dt=cfg.horizon / n_steps,
    )
    logger.debug(
        f"[MC] {cfg.scheme} b={b:.6g} x0={x0:.6g} paths={batch.n_paths} "
        f"steps={n_steps} ruin={batch.ruin_prob:.4f} J={batch.value_mean:.6g}"
    )
    return batch


# ── 공개 연산 ────────────────────────────────────────────────
def simulate_path(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    x0: float,
    config: Optional[SimConfig] = None,
    path_index: int = 0,
    *,
    purpose: Purpose = "ruin",
) -> Tuple[bool, float, float]:
    """단일 경로 (ruined, ruin_time, discounted_dividends)"""
    batch = run_paths(params, control, b, x0, config, purpose=purpose, indices=[path_index])
    return bool(batch.ruined[0]), float(batch.ruin_time[0]), float(batch.discounted_dividends[0])


def estimate_ruin_prob(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    x0: float,
    config: Optional[SimConfig] = None,
) -> Tuple[float, float]:
    """P[τ ≤ horizon] 추정치와 표준오차"""
    batch = run_paths(params, control, b, x0, config, purpose="ruin")
    return batch.ruin_prob, batch.ruin_stderr


def estimate_value(
    params: ModelParams,
    control: ControlFunction,
    b: float,
    x0: float,
    config: Optional[SimConfig] = None,
) -> Tuple[float, float]:
    """J(x0, π_b) = E ∫₀^τ e^{−ct} dL_t 추정치와 표준오차"""
    batch = run_paths(params, control, b, x0, config, purpose="value")
    return batch.value_mean, batch.value_stderr


def simulate_drift_hitting(
    mu: float,
    sigma: float,
    x: float,
    T: float,
    config: Optional[SimConfig] = None,
) -> Tuple[float, float]:
    """P[inf{t: μt + σW_t = −x} ≤ T] 추정치와 표준오차

    상수계수 과정이라 브리지 교차확률 보정으로 스텝 편향이 없다.
    dt 기본값은 T/100.
    """
    settings = get_settings()
    cfg = config or SimConfig(n_paths=settings.MC_PATHS, seed=settings.MC_SEED)
    if not (x > 0 and T > 0 and sigma > 0):
        raise ConfigError("drift hitting requires x, T, sigma > 0")
    n_steps = max(1, math.ceil(T / (cfg.dt or 1e-2 * T) - 1e-9))
    dt = T / n_steps
    var = sigma * sigma * dt

    hits = []
    for idx in _blocks(cfg.n_paths, _block_size(cfg, 1)):
        streams = _PathStreams(cfg.seed, idx, 1)
        level = np.full(len(idx), float(x))
        hit = np.zeros(len(idx), dtype=bool)
        for chunk_start in range(0, n_steps, STEP_CHUNK):
            chunk = min(STEP_CHUNK, n_steps - chunk_start)
            normals, uniforms = streams.next(chunk)
            for j in range(chunk):
                nxt = level + mu * dt + sigma * math.sqrt(dt) * normals[:, j]
                p_cross = np.exp(-2.0 * np.maximum(level, 0.0) * np.maximum(nxt, 0.0) / var)
                hit |= (nxt <= 0.0) | (uniforms[:, j, 0] < p_cross)
                level = nxt
        hits.append(hit)
    hit = np.concatenate(hits)
    p = float(hit.mean())
    return p, math.sqrt(p * (1.0 - p) / len(hit))
