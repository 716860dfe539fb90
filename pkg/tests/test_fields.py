import numpy as np
import pytest

from polyddr.fields import (
    constant_vector,
    monomial_scalar,
    polynomial_scalar,
    polynomial_tensor,
    polynomial_vector,
    trig_scalar,
    trig_vector,
    with_cutoff,
)


POINTS = np.array([[0.1, 0.2], [0.5, 0.7], [0.9, 0.35]])
STEP = 1e-6


def difference(sample, points, axis):
    shift = np.zeros(2)
    shift[axis] = STEP
    return (sample(points + shift) - sample(points - shift)) / (2 * STEP)


@pytest.mark.parametrize(
    "field", [trig_scalar(), polynomial_scalar(4, np.random.default_rng(0))]
)
def test_scalar_derivatives(field):
    gradient = np.stack([difference(field, POINTS, a) for a in range(2)], axis=1)
    hessian = np.stack([difference(field.gradient, POINTS, b) for b in range(2)], axis=2)

    assert np.allclose(field.gradient(POINTS), gradient, atol=1e-6)
    assert np.allclose(field.hessian(POINTS), hessian, atol=1e-5)


@pytest.mark.parametrize(
    "field",
    [trig_vector(), with_cutoff(trig_vector()), polynomial_vector(3, np.random.default_rng(1))],
)
def test_vector_jacobian(field):
    jacobian = np.stack([difference(field, POINTS, b) for b in range(2)], axis=2)

    assert np.allclose(field.jacobian(POINTS), jacobian, atol=1e-5)


def test_curl_is_divergence_free():
    curl = trig_scalar().curl()

    assert np.allclose(curl.div(POINTS), 0.0)
    assert np.allclose(curl(POINTS)[:, 0], trig_scalar().gradient(POINTS)[:, 1])


def test_rot_of_gradient_vanishes():
    grad = polynomial_scalar(3, np.random.default_rng(2)).grad()

    assert np.allclose(grad.rot(POINTS), 0.0)


def test_cutoff_vanishes_on_the_boundary():
    boundary = np.array([[0.0, 0.3], [1.0, 0.6], [0.4, 0.0], [0.2, 1.0]])

    assert np.allclose(with_cutoff(trig_vector())(boundary), 0.0)


def test_polynomial_degree_is_truncated():
    coefficients = np.ones((3, 3))
    field = polynomial_scalar(2, None, center=(0.0, 0.0), coefficients=coefficients)
    x, y = POINTS[:, 0], POINTS[:, 1]

    assert np.allclose(field(POINTS), 1 + x + y + x ** 2 + x * y + y ** 2)
    assert field.degree == 2


def test_monomial():
    field = monomial_scalar(2, 1)
    x, y = POINTS[:, 0], POINTS[:, 1]

    assert np.allclose(field(POINTS), x ** 2 * y)
    assert np.allclose(field.gradient(POINTS), np.stack([2 * x * y, x ** 2], axis=1))


def test_tensor_and_constant_shapes():
    tensor = polynomial_tensor(1, np.random.default_rng(3))

    assert tensor(POINTS).shape == (3, 2, 2)
    assert np.allclose(constant_vector([1, -2])(POINTS), [[1, -2]] * 3)
    assert constant_vector([1, -2]).jacobian(POINTS).shape == (3, 2, 2)
