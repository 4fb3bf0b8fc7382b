"""
공용 픽스처

CheapHeavy: μ=2, λ=6, σ²=50, c=0.05 (그림 1 캡션)
Interior  : 같은 μ, σ², c 에 λ=3
"""
import pytest

from models.params import ModelParams
from models.schemas import PdeGrid, SimConfig
from processors.hjb import build_solution


def make_params(lam: float = 6.0, *, mu: float = 2.0, sigma2: float = 50.0, c: float = 0.05,
                T: float = 50.0, epsilon: float = 0.1) -> ModelParams:
    return ModelParams.from_sigma2(mu=mu, lam=lam, sigma2=sigma2, c=c, T=T, epsilon=epsilon)


@pytest.fixture(scope="session")
def cheap_params() -> ModelParams:
    return make_params(6.0)


@pytest.fixture(scope="session")
def interior_params() -> ModelParams:
    return make_params(3.0)


@pytest.fixture(scope="session", params=["cheap", "interior"])
def any_params(request) -> ModelParams:
    return make_params(6.0 if request.param == "cheap" else 3.0)


@pytest.fixture(scope="session")
def cheap_solution(cheap_params):
    return build_solution(cheap_params)


@pytest.fixture(scope="session")
def interior_solution(interior_params):
    return build_solution(interior_params)


@pytest.fixture(scope="session")
def small_grid() -> PdeGrid:
    """테스트용 축소 격자"""
    return PdeGrid(ny=200)


@pytest.fixture
def small_sim() -> SimConfig:
    return SimConfig(n_paths=400, seed=7, block_size=128)
