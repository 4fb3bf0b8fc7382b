"""
솔버 예외 계층

exit_code 는 CLI 종료 코드로 그대로 사용된다.
  2 : 파라미터 / 입력 검증 실패
  3 : 수치 해법 비수렴 / 불안정
  4 : 달성 불가능한 제약
"""


class SolverError(Exception):
    """모든 솔버 오류의 기반 클래스"""

    exit_code = 1


# ==================== 검증 오류 (exit 2) ====================

class ParameterError(SolverError):
    exit_code = 2


class DegenerateCost(ParameterError):
    """λ ≤ μ (거래비용 δ = λ - μ > 0 가정 위반)"""


class NonPositive(ParameterError):
    """σ, c, T 중 양수가 아닌 값"""


class RiskOutOfRange(ParameterError):
    """위험수준 ε ∉ (0, 1)"""


class ConfigError(ParameterError):
    """시뮬레이션 / CLI 설정 전제조건 위반"""


class GridError(ParameterError):
    """PDE 격자 해상도 부족"""


class DomainError(ParameterError):
    """연산의 정의역 밖 인자"""


# ==================== 수치 오류 (exit 3) ====================

class NumericalError(SolverError):
    exit_code = 3


class NoConvergence(NumericalError):
    """반복 예산 안에 수렴 실패 (메시지에 잔차 포함)"""


class InstabilityError(NumericalError):
    """PDE 해가 [0, 1] 밖으로 이탈 (격자 해상도 문제)"""


class NoBracket(NumericalError):
    """b* 상한 브래킷이 설정된 cap 을 초과"""


# ==================== 제약 불가 (exit 4) ====================

class Unattainable(SolverError):
    """전액 자본 b 로도 위험수준 ε 를 만족할 수 없음"""

    exit_code = 4
