import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltaforge import hyperdual as hd
from deltaforge.hyperdual import HyperDual

reals = st.floats(-3.0, 3.0, allow_nan=False)


@given(reals, reals)
def test_plain_parts_match_real_arithmetic(a, b):
    x, y = HyperDual(a), HyperDual(b)
    assert (x + y).value == a + b
    assert (x - y).value == a - b
    assert (x * y).value == a * b
    if b != 0.0:
        assert (x / y).value == a / b
    for f in ("sin", "cos", "sinh", "cosh", "exp", "tanh"):
        assert hd.FUNCTIONS[f](x).value == getattr(math, f)(a)


def test_mixed_partial_of_product():
    # f(x, y) = x^2 y  ->  d2f/dxdy = 2x
    x = HyperDual(1.5, 1.0, 0.0, 0.0)
    y = HyperDual(-0.7, 0.0, 1.0, 0.0)
    f = x ** 2 * y
    assert f.value == pytest.approx(1.5 ** 2 * -0.7)
    assert f.d1 == pytest.approx(2 * 1.5 * -0.7)
    assert f.d2 == pytest.approx(1.5 ** 2)
    assert f.d12 == pytest.approx(3.0)


# analytic second derivatives of f(g(t))
_PAIRS = {
    ("sin", "cos"): (lambda t: math.sin(math.cos(t)),
                     lambda t: -math.sin(math.cos(t)) * math.sin(t) ** 2
                     - math.cos(math.cos(t)) * math.cos(t)),
    ("exp", "sinh"): (lambda t: math.exp(math.sinh(t)),
                      lambda t: math.exp(math.sinh(t)) * (math.cosh(t) ** 2 + math.sinh(t))),
    ("sqrt", "cosh"): (lambda t: math.sqrt(math.cosh(t)),
                       lambda t: (math.cosh(t) / (2 * math.sqrt(math.cosh(t)))
                                  - math.sinh(t) ** 2 / (4 * math.cosh(t) ** 1.5))),
    ("cube", "exp"): (lambda t: math.exp(t) ** 3, lambda t: 9 * math.exp(3 * t)),
    ("cosh", "sin"): (lambda t: math.cosh(math.sin(t)),
                      lambda t: math.cosh(math.sin(t)) * math.cos(t) ** 2
                      - math.sinh(math.sin(t)) * math.sin(t)),
}


def _compose(outer, inner):
    g = hd.FUNCTIONS[inner]
    if outer == "cube":
        return lambda t: g(t) ** 3
    return lambda t: hd.FUNCTIONS[outer](g(t))


@pytest.mark.parametrize("pair", sorted(_PAIRS))
def test_chain_rule_second_derivative_on_random_inputs(pair):
    _, d2 = _PAIRS[pair]
    f = _compose(*pair)
    rng = np.random.default_rng(17)
    for t in rng.uniform(-1.5, 1.5, 1000):
        exact = d2(t)
        got = hd.second_derivative(f, t)
        assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact))


@settings(max_examples=60)
@given(st.floats(0.2, 2.0), st.floats(-1.0, 1.0))
def test_d12_against_central_differences(x0, y0):
    def f(x, y):
        return hd.sin(x * y) + hd.exp(x) * hd.cos(y) + (x + 2.0) ** y

    x = HyperDual(x0, 1.0, 0.0, 0.0)
    y = HyperDual(y0, 0.0, 1.0, 0.0)
    got = f(x, y).d12
    h = 1e-4
    fd = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h) + f(x0 - h, y0 - h)) / (4 * h * h)
    assert got == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_array_sensitivities_broadcast():
    x = HyperDual(0.3, np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.zeros(2))
    y = hd.sin(x) * x
    assert y.d1.shape == (2,)
    assert y.d1[0] == pytest.approx(math.cos(0.3) * 0.3 + math.sin(0.3))
    assert y.d1[1] == 0.0


def test_sqrt_at_zero_is_rejected_for_hyperdual():
    with pytest.raises(ValueError):
        hd.sqrt(HyperDual(0.0, 1.0, 1.0, 0.0))


def test_non_finite_detection():
    assert HyperDual(1.0, 2.0, 3.0, 4.0).is_finite()
    assert not HyperDual(float("inf")).is_finite()
