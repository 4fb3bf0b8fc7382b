import numpy as np
import pytest

from models.errors import NoBracket, NoConvergence
from utils.numerics import bisect_decreasing, bisect_scalar, expand_bracket, nonuniform_stencils


def test_expand_bracket_doubles_until_sign_change():
    hi, value = expand_bracket(lambda x: 10.0 - x, 1.0)
    assert hi == 16.0
    assert value <= 0


def test_expand_bracket_cap():
    with pytest.raises(NoBracket):
        expand_bracket(lambda x: 1.0, 1.0, cap=100.0)


def test_bisect_scalar_ftol():
    result = bisect_scalar(lambda x: 2.0 - x * x, 0.0, 2.0, ftol=1e-10, max_iter=100)
    assert result.x == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert abs(result.fx) <= 1e-10


def test_bisect_scalar_budget():
    with pytest.raises(NoConvergence):
        bisect_scalar(lambda x: 2.0 - x * x, 0.0, 2.0, ftol=1e-15, max_iter=5)


def test_bisect_decreasing_vectorised():
    target = np.array([0.5, 0.25, 0.1])
    x = bisect_decreasing(lambda s: np.exp(-s), target, np.zeros(3), np.full(3, 10.0))
    np.testing.assert_allclose(x, -np.log(target), atol=1e-12)


def test_nonuniform_stencils_exact_for_quadratics():
    y = np.array([0.0, 0.3, 0.5, 1.1, 1.2, 2.0])
    f = 3.0 * y ** 2 - 2.0 * y + 1.0
    d1, d2 = nonuniform_stencils(y)
    inner = y[1:-1]
    first = d1[:, 0] * f[:-2] + d1[:, 1] * f[1:-1] + d1[:, 2] * f[2:]
    second = d2[:, 0] * f[:-2] + d2[:, 1] * f[1:-1] + d2[:, 2] * f[2:]
    np.testing.assert_allclose(first, 6.0 * inner - 2.0, atol=1e-12)
    np.testing.assert_allclose(second, 6.0, atol=1e-10)
