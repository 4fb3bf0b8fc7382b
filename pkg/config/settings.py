from pydantic_settings import BaseSettings
from pydantic import Field
from functools import lru_cache


class SolverSettings(BaseSettings):
    """솔버 설정 (환경변수 / .env 로 덮어쓰기 가능)"""

    # b* 탐색 (솔벤시 제약)
    TOL_EPS: float = Field(default=1e-4, description="b* 탐색 파산확률 허용오차")
    BISECTION_MAX_ITER: int = Field(default=60, description="이분법 최대 반복 횟수")
    B_HI_CAP_FACTOR: float = Field(default=64.0, description="b* 상한 브래킷 (b0 배수)")

    # 생존확률 PDE (Crank-Nicolson)
    PDE_NY: int = Field(default=400, description="공간 격자 노드 수")
    PDE_NT_MIN: int = Field(default=100)
    PDE_NT_MAX: int = Field(default=4000, description="자동 시간 스텝 상한")
    PDE_RANNACHER_STEPS: int = Field(default=4, description="초기 음해법 반스텝 수")
    PDE_TOL_CLIP: float = Field(default=1e-3, description="[0,1] 이탈 허용치")

    # 몬테카를로
    MC_PATHS: int = Field(default=10000)
    MC_SEED: int = Field(default=20100101)
    MC_BLOCK_SIZE: int = Field(default=4096, description="블록당 경로 수")
    MC_MAX_BLOCK_ELEMENTS: int = Field(default=1 << 22, description="블록 난수 행렬 최대 원소 수")
    MC_WORKERS: int = Field(default=1)
    MC_SCHEME: str = Field(default="bridge", description="bridge 또는 euler (투영 반사)")

    # 할인배당 적분 절단 (상대 허용오차)
    VALUE_TRUNCATION_TOL: float = Field(default=1e-6)

    # 로깅 설정
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FILE: str = Field(default="logs/dividend_solver.log")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


@lru_cache()
def get_settings() -> SolverSettings:
    """설정 싱글톤 인스턴스 반환"""
    return SolverSettings()
