import math

import numpy as np
import pytest
from scipy import special

from weylsonine import ConvergenceError, OutOfRangeError, SampledSignal, uniform_grid
from weylsonine.oracle import (
    QuadratureSpec,
    adaptive_convolve,
    classical_relaxation,
    fd_derivative,
    laplace_transform,
    mittag_leffler,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(left_exponent=-1.0)
    h = QuadratureSpec().halved()
    assert h.abs_tol == 5e-14 and h.max_subdivisions == 400


def test_beta_function_convolution():
    a = 0.3
    k = lambda z: z ** (-a) / math.gamma(1 - a)
    kap = lambda z: z ** (a - 1) / math.gamma(a)
    spec = QuadratureSpec(left_exponent=a - 1, right_exponent=-a)
    assert adaptive_convolve(k, kap, 2.5, spec) == pytest.approx(1.0, abs=1e-12)


def test_convolution_of_complex_input():
    val = adaptive_convolve(lambda z: 1.0, lambda x: np.exp(1j * x), 1.0)
    assert val == pytest.approx((np.exp(1j) - 1) / 1j, abs=1e-13)


def test_convolution_nonpositive_t():
    assert adaptive_convolve(lambda z: 1.0, lambda x: 1.0, 0.0) == 0.0


def test_convolution_failure_is_reported():
    with pytest.raises(ConvergenceError):
        adaptive_convolve(lambda z: 1.0, lambda x: math.sin(1.0 / x) / x, 1.0)


def test_mittag_leffler_special_cases():
    z = np.array([-3.0, -0.5, 0.0, 0.7, 2.0])
    np.testing.assert_allclose(mittag_leffler(1.0, 1.0, z), np.exp(z), rtol=1e-12)
    np.testing.assert_allclose(mittag_leffler(2.0, 1.0, -(z**2)), np.cos(z), rtol=1e-13, atol=1e-15)
    x = np.array([0.3, 1.0, 2.0])
    np.testing.assert_allclose(
        mittag_leffler(0.5, 1.0, -x), np.exp(x**2) * special.erfc(x), rtol=1e-12
    )


def test_mittag_leffler_limits():
    with pytest.raises(OutOfRangeError):
        mittag_leffler(0.5, 1.0, 60.0)
    with pytest.raises(OutOfRangeError):
        mittag_leffler(1.0, 1.0, -45.0)
    with pytest.raises(ValueError):
        mittag_leffler(0.0, 1.0, 1.0)


def test_fd_derivative_orders():
    t = uniform_grid(0.0, 3.0, 0.01)
    v = SampledSignal.from_function(np.sin, t)
    np.testing.assert_allclose(fd_derivative(v, 1).values, np.cos(t), atol=1e-8)
    np.testing.assert_allclose(fd_derivative(v, 2).values, -np.sin(t), atol=1e-6)
    with pytest.raises(ValueError):
        fd_derivative(v, 3)


@pytest.mark.parametrize("s", [0.1, 1.0, 7.0])
def test_laplace_of_power(s):
    a = 0.4
    val = laplace_transform(lambda z: z ** (-a), s, exponent=a)
    assert val == pytest.approx(math.gamma(1 - a) * s ** (a - 1), rel=1e-10)


def test_laplace_smooth():
    assert laplace_transform(lambda z: math.exp(-z), 2.0) == pytest.approx(1 / 3, rel=1e-12)
    with pytest.raises(ValueError):
        laplace_transform(lambda z: 1.0, 0.0)


def test_classical_relaxation():
    t = np.linspace(0.0, 5.0, 51)
    u = classical_relaxation(lambda x: 1.0, 2.0, t)
    np.testing.assert_allclose(u, (1 - np.exp(-2 * t)) / 2, atol=1e-11)
