"""
DividendSolver - 솔벤시 제약 최적 배당 솔버

비례재보험과 거래비용이 있는 확산 모형 보험회사의 최적 배당 문제를
HJB 닫힌형 해, 생존확률 PDE, 몬테카를로 시뮬레이션으로 풀고
파산확률 제약 ψ(T, b) ≤ ε 를 만족하는 배당 장벽 b* 를 찾는다.
"""

__version__ = "0.1.0"
__author__ = "DividendSolver Team"
