"""
모델 파라미터 · 검증 · 영역(regime) 분류

ModelParams 는 불변 레코드이며, 파생량 (δ, σ², α, d) 은 저장하지 않고
필요할 때 계산한다.
"""
import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from models.errors import DegenerateCost, NonPositive, RiskOutOfRange


class Regime(str, Enum):
    """재보험 영역: λ ≥ 2μ 이면 CheapHeavy, μ < λ < 2μ 이면 Interior"""

    CHEAP_HEAVY = "CheapHeavy"
    INTERIOR = "Interior"


class ModelParams(BaseModel):
    """시장 / 계약 기본 파라미터 (μ, λ, σ, c) + 지평 T + 위험수준 ε

    생성 자체는 타입만 확인한다. 불변식 검사는 validate() 담당.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mu: float
    lam: float = Field(alias="lambda")
    sigma: float
    c: float
    T: float
    epsilon: float

    @classmethod
    def from_sigma2(cls, *, mu: float, lam: float, sigma2: float, c: float,
                    T: float, epsilon: float) -> "ModelParams":
        """그림 캡션처럼 σ² 로 주어진 경우"""
        if sigma2 <= 0:
            raise NonPositive(f"sigma2 must be positive, got {sigma2}")
        return cls(mu=mu, lam=lam, sigma=math.sqrt(sigma2), c=c, T=T, epsilon=epsilon)

    # ── 파생량 ───────────────────────────────────────────────
    @property
    def sigma2(self) -> float:
        return self.sigma * self.sigma

    @property
    def delta(self) -> float:
        """거래비용 δ = λ - μ"""
        return self.lam - self.mu

    @property
    def alpha(self) -> float:
        """α = λ² / (2σ²)"""
        return self.lam * self.lam / (2.0 * self.sigma2)

    @property
    def retention_floor(self) -> float:
        """d = min{1, 2(λ-μ)/λ}"""
        return min(1.0, 2.0 * self.delta / self.lam)

    def with_updates(self, **changes) -> "ModelParams":
        """일부 필드만 바꾼 사본 (스윕용)"""
        return self.model_copy(update=changes)


def validate(params: ModelParams) -> ModelParams:
    """불변식을 모두 만족하면 params 를 그대로 반환

    Raises:
        DegenerateCost: λ ≤ μ
        NonPositive: σ, c, T ≤ 0
        RiskOutOfRange: ε ∉ (0, 1)
    """
    values = (params.mu, params.lam, params.sigma, params.c, params.T, params.epsilon)
    if not all(math.isfinite(v) for v in values):
        raise NonPositive(f"non-finite parameter in {params!r}")
    if params.lam <= params.mu:
        raise DegenerateCost(
            f"transaction cost lambda - mu must be positive "
            f"(mu={params.mu}, lambda={params.lam})"
        )
    for name in ("sigma", "c", "T"):
        if getattr(params, name) <= 0:
            raise NonPositive(f"{name} must be positive, got {getattr(params, name)}")
    if not 0.0 < params.epsilon < 1.0:
        raise RiskOutOfRange(f"epsilon must lie in (0, 1), got {params.epsilon}")
    return params


def classify(params: ModelParams) -> Regime:
    """λ ≥ 2μ → CheapHeavy, 그 외 (μ < λ < 2μ) → Interior"""
    if params.lam >= 2.0 * params.mu:
        return Regime.CHEAP_HEAVY
    return Regime.INTERIOR
