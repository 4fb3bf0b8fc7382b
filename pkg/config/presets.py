"""
그림 재현 프리셋 (fig1 ~ fig6)

캡션 파라미터를 그대로 옮기되, fig3 ~ fig6 캡션의 λ=0.4 는 λ > μ 가정을
위반하므로 λ=2.4 (δ=0.4, Interior 영역)로 대체하고 note 에 기록한다.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict

LAMBDA_SUBSTITUTION_NOTE = (
    "caption lambda=0.4 violates lambda>mu; substituted lambda=2.4 "
    "(reading 0.4 as the transaction cost delta); trend agreement only"
)


class FigurePreset(BaseModel):
    """그림 한 장의 파라미터 세트 + 스윕 격자"""

    model_config = ConfigDict(frozen=True)

    name: str
    command: str
    mu: float
    lam: float
    sigma2: float
    c: float
    T: float = 500.0
    epsilon: float = 0.1
    b: Optional[float] = None
    x_grid: Optional[str] = None
    eps_grid: Optional[str] = None
    b_grid: Optional[str] = None
    sigma2_list: Optional[List[float]] = None
    mu_list: Optional[List[float]] = None
    note: str = ""


PRESETS: Dict[str, FigurePreset] = {
    # g(x): σ² = 50 / 100 비교
    "fig1": FigurePreset(
        name="fig1", command="value", mu=2.0, lam=6.0, sigma2=50.0, c=0.05,
        b=100.0, x_grid="0:100:2", sigma2_list=[50.0, 100.0],
    ),
    # g(x): μ = 1 / 2 비교
    "fig2": FigurePreset(
        name="fig2", command="value", mu=2.0, lam=6.0, sigma2=50.0, c=0.05,
        b=100.0, x_grid="0:100:2", mu_list=[1.0, 2.0],
    ),
    # ψ(x) = 1 - φ
    "fig3": FigurePreset(
        name="fig3", command="ruin", mu=2.0, lam=2.4, sigma2=50.0, c=0.05,
        T=500.0, b=100.0, x_grid="0:100:5", note=LAMBDA_SUBSTITUTION_NOTE,
    ),
    # 위험기준자본 x(ε)
    "fig4": FigurePreset(
        name="fig4", command="capital", mu=2.0, lam=2.4, sigma2=50.0, c=0.05,
        T=500.0, b=100.0, eps_grid="0.1:0.9:0.1", note=LAMBDA_SUBSTITUTION_NOTE,
    ),
    # 최적 배당수준 b(ε)
    "fig5": FigurePreset(
        name="fig5", command="bstar", mu=2.0, lam=2.4, sigma2=50.0, c=0.05,
        T=500.0, b=100.0, eps_grid="0.1:0.9:0.1", note=LAMBDA_SUBSTITUTION_NOTE,
    ),
    # 위험수준 ε(b)
    "fig6": FigurePreset(
        name="fig6", command="bstar", mu=2.0, lam=2.4, sigma2=50.0, c=0.05,
        T=500.0, b=100.0, b_grid="30:100:10", note=LAMBDA_SUBSTITUTION_NOTE,
    ),
}


def get_preset(name: str) -> FigurePreset:
    """이름으로 프리셋 조회 (없으면 KeyError)"""
    key = name.lower()
    if key not in PRESETS:
        raise KeyError(f"알 수 없는 프리셋: {name} (가능: {', '.join(PRESETS)})")
    return PRESETS[key]
