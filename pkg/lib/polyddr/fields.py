"""Smooth and polynomial fields with exact derivatives, for interpolation and rate studies."""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P


Sampler = Callable[[np.ndarray], np.ndarray]


def _xy(points: np.ndarray):
    points = np.atleast_2d(points)
    return points[:, 0], points[:, 1]


@dataclass(frozen=True)
class ScalarField:
    name: str
    value: Sampler
    gradient: Sampler
    hessian: Sampler
    degree: Optional[int] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.value(points)

    def curl(self) -> "VectorField":
        """CURL q = (d2 q, -d1 q)."""

        def value(points: np.ndarray) -> np.ndarray:
            g = self.gradient(points)
            return np.stack([g[:, 1], -g[:, 0]], axis=1)

        def jacobian(points: np.ndarray) -> np.ndarray:
            h = self.hessian(points)
            return np.stack([h[:, 1, :], -h[:, 0, :]], axis=1)

        degree = None if self.degree is None else max(self.degree - 1, 0)
        return VectorField(f"curl({self.name})", value, jacobian, degree)

    def grad(self) -> "VectorField":
        return VectorField(f"grad({self.name})", self.gradient, self.hessian, self.degree)


@dataclass(frozen=True)
class VectorField:
    name: str
    value: Sampler
    jacobian: Sampler  # J[p, a, b] = d_b v_a
    degree: Optional[int] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.value(points)

    def rot(self, points: np.ndarray) -> np.ndarray:
        jac = self.jacobian(points)
        return jac[:, 1, 0] - jac[:, 0, 1]

    def div(self, points: np.ndarray) -> np.ndarray:
        jac = self.jacobian(points)
        return jac[:, 0, 0] + jac[:, 1, 1]


def trig_scalar() -> ScalarField:
    """sin(pi x) sin(pi y)."""
    pi = np.pi

    def value(points):
        x, y = _xy(points)
        return np.sin(pi * x) * np.sin(pi * y)

    def gradient(points):
        x, y = _xy(points)
        return pi * np.stack(
            [np.cos(pi * x) * np.sin(pi * y), np.sin(pi * x) * np.cos(pi * y)], axis=1
        )

    def hessian(points):
        x, y = _xy(points)
        sxsy = np.sin(pi * x) * np.sin(pi * y)
        cxcy = np.cos(pi * x) * np.cos(pi * y)
        out = np.empty((len(x), 2, 2))
        out[:, 0, 0] = out[:, 1, 1] = -(pi ** 2) * sxsy
        out[:, 0, 1] = out[:, 1, 0] = pi ** 2 * cxcy
        return out

    return ScalarField("sin(pi x) sin(pi y)", value, gradient, hessian)


def trig_vector() -> VectorField:
    """(sin(pi x) cos(pi y), exp(x) sin(pi y))."""
    pi = np.pi

    def value(points):
        x, y = _xy(points)
        return np.stack([np.sin(pi * x) * np.cos(pi * y), np.exp(x) * np.sin(pi * y)], axis=1)

    def jacobian(points):
        x, y = _xy(points)
        out = np.empty((len(x), 2, 2))
        out[:, 0, 0] = pi * np.cos(pi * x) * np.cos(pi * y)
        out[:, 0, 1] = -pi * np.sin(pi * x) * np.sin(pi * y)
        out[:, 1, 0] = np.exp(x) * np.sin(pi * y)
        out[:, 1, 1] = pi * np.exp(x) * np.cos(pi * y)
        return out

    return VectorField("(sin(pi x) cos(pi y), exp(x) sin(pi y))", value, jacobian)


def with_cutoff(field: VectorField) -> VectorField:
    """b v with b = sin(pi x) sin(pi y): every trace vanishes on the unit square."""
    bump = trig_scalar()

    def value(points):
        return bump(points)[:, None] * field(points)

    def jacobian(points):
        return (
            bump(points)[:, None, None] * field.jacobian(points)
            + field(points)[:, :, None] * bump.gradient(points)[:, None, :]
        )

    return VectorField(f"cutoff*{field.name}", value, jacobian)


def _truncate(coefficients: np.ndarray, degree: int) -> np.ndarray:
    i, j = np.indices(coefficients.shape)
    return np.where(i + j <= degree, coefficients, 0.0)


def polynomial_scalar(
    degree: int,
    rng: np.random.Generator,
    center: Sequence[float] = (0.5, 0.5),
    coefficients: Optional[np.ndarray] = None,
) -> ScalarField:
    """Random polynomial of total degree <= degree in (x - center)."""
    size = max(degree, 0) + 1
    if coefficients is None:
        coefficients = rng.standard_normal((size, size))
    c = _truncate(np.asarray(coefficients, dtype=float), max(degree, 0))
    cx, cy = P.polyder(c, axis=0), P.polyder(c, axis=1)
    cxx, cxy, cyy = P.polyder(cx, axis=0), P.polyder(cx, axis=1), P.polyder(cy, axis=1)
    x0, y0 = center

    def shifted(points):
        x, y = _xy(points)
        return x - x0, y - y0

    def value(points):
        return P.polyval2d(*shifted(points), c)

    def gradient(points):
        x, y = shifted(points)
        return np.stack([P.polyval2d(x, y, cx), P.polyval2d(x, y, cy)], axis=1)

    def hessian(points):
        x, y = shifted(points)
        hxy = P.polyval2d(x, y, cxy)
        out = np.empty((len(x), 2, 2))
        out[:, 0, 0] = P.polyval2d(x, y, cxx)
        out[:, 1, 1] = P.polyval2d(x, y, cyy)
        out[:, 0, 1] = out[:, 1, 0] = hxy
        return out

    return ScalarField(f"P{degree}", value, gradient, hessian, degree)


def monomial_scalar(a: int, b: int, center: Sequence[float] = (0.0, 0.0)) -> ScalarField:
    c = np.zeros((a + b + 1, a + b + 1))
    c[a, b] = 1.0
    return polynomial_scalar(a + b, np.random.default_rng(0), center, c)


def polynomial_vector(degree: int, rng: np.random.Generator, center=(0.5, 0.5)) -> VectorField:
    first = polynomial_scalar(degree, rng, center)
    second = polynomial_scalar(degree, rng, center)

    def value(points):
        return np.stack([first(points), second(points)], axis=1)

    def jacobian(points):
        return np.stack([first.gradient(points), second.gradient(points)], axis=1)

    return VectorField(f"P{degree}^2", value, jacobian, degree)


def polynomial_tensor(degree: int, rng: np.random.Generator, center=(0.5, 0.5)) -> Sampler:
    """Random 2x2 matrix field of degree <= degree; values shape (points, 2, 2)."""
    rows = [polynomial_vector(degree, rng, center) for _ in range(2)]

    def value(points):
        return np.stack([row(points) for row in rows], axis=1)

    return value


def constant_vector(vector: Sequence[float]) -> VectorField:
    vector = np.asarray(vector, dtype=float)

    def value(points):
        return np.tile(vector, (len(np.atleast_2d(points)), 1))

    def jacobian(points):
        return np.zeros((len(np.atleast_2d(points)), 2, 2))

    return VectorField(f"const{vector.tolist()}", value, jacobian, 0)
