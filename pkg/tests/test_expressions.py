import numpy as np
import pytest

from platerod import expressions as ex
from platerod.errors import ConfigError


def test_parse_and_evaluate():
    f = ex.lambdify(ex.parse("sin(pi*x1) + x2**2 - 3", ("x1", "x2")), ("x1", "x2"))
    x = np.array([0.5, 0.0])
    np.testing.assert_allclose(f(x, x), [-1.75, -3.0])


def test_constant_broadcasts():
    f = ex.lambdify(ex.parse("2.5", ("x3",)), ("x3",))
    assert f(np.zeros((2, 3))).shape == (2, 3)


def test_piecewise():
    f = ex.lambdify(ex.parse("Piecewise((0, x3 <= 1), (x3 - 1, True))", ("x3",)), ("x3",))
    np.testing.assert_allclose(f(np.array([0.0, 2.0])), [0.0, 1.0])


@pytest.mark.parametrize("text", ["__import__('os')", "x1.real", "open('f')", "x4 + 1", "lambda: 1", "x1[0]"])
def test_rejects_unsafe_or_unknown(text):
    with pytest.raises(ConfigError):
        ex.parse(text, ("x1", "x2"))


def test_syntax_error_is_config_error():
    with pytest.raises(ConfigError):
        ex.parse("1 +* 2", ("x1",))
