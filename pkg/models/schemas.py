"""
Pydantic 스키마 (실행 설정 검증)
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.errors import ConfigError, GridError
from models.params import ModelParams


# ==================== 몬테카를로 설정 ====================

class SimConfig(BaseModel):
    """경로 시뮬레이션 설정

    dt / horizon 이 None 이면 simulate.resolve_config() 가 모형 파라미터로
    기본값을 채운다 (파산확률: horizon = T, 배당가치: 할인 절단 지평).
    """

    model_config = ConfigDict(frozen=True)

    dt: Optional[float] = None
    n_paths: int = 10000
    seed: int = 20100101
    horizon: Optional[float] = None
    scheme: Literal["euler", "bridge"] = "bridge"
    workers: int = 1
    block_size: int = 4096

    @model_validator(mode="after")
    def _check(self) -> "SimConfig":
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.horizon is not None and not self.horizon > 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.dt is not None and self.horizon is not None and self.dt > self.horizon:
            raise ConfigError(f"dt={self.dt} exceeds horizon={self.horizon}")
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be >= 1, got {self.n_paths}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1 or self.block_size < 1:
            raise ConfigError("workers and block_size must be >= 1")
        return self


# ==================== PDE 격자 ====================

class PdeGrid(BaseModel):
    """생존확률 PDE 격자 (ny: [0,b] 노드 수, nt: 시간 스텝 수, None 이면 자동)"""

    model_config = ConfigDict(frozen=True)

    ny: int = 400
    nt: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "PdeGrid":
        if self.ny < 3:
            raise GridError(f"ny must be >= 3, got {self.ny}")
        if self.nt is not None and self.nt < 3:
            raise GridError(f"nt must be >= 3, got {self.nt}")
        return self


# ==================== CLI 실행 설정 ====================

class RunConfig(BaseModel):
    """파싱된 CLI 호출 한 건"""

    model_config = ConfigDict(frozen=True)

    command: Literal["policy", "value", "ruin", "bstar", "capital"]
    params: ModelParams
    sim: SimConfig = Field(default_factory=SimConfig)
    grid: PdeGrid = Field(default_factory=PdeGrid)
    method: Literal["pde", "mc", "both"] = "pde"
    out: Optional[str] = None
    fmt: Literal["csv", "human"] = "csv"
    preset: Optional[str] = None
    note: str = ""

    # 스윕 격자 (None 이면 명령별 기본값)
    b: Optional[float] = None
    x_grid: Optional[List[float]] = None
    eps_grid: Optional[List[float]] = None
    b_grid: Optional[List[float]] = None
    sigma2_list: Optional[List[float]] = None
    mu_list: Optional[List[float]] = None
