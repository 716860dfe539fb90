import numpy as np
import pytest

from polyddr.polyquad import (
    MeshQuadrature,
    cell_quadrature,
    dim_croly,
    dim_poly,
    dim_poly_edge,
    dim_roly,
    edge_quadrature,
    eval_monomial_gradients,
    eval_monomials,
    triangle_rule,
)


def test_dimensions():
    assert [dim_poly(d) for d in (-1, 0, 1, 2, 3)] == [0, 1, 3, 6, 10]
    assert [dim_poly_edge(d) for d in (-1, 0, 2)] == [0, 1, 3]
    assert [dim_roly(d) for d in (-1, 0, 1, 2)] == [0, 2, 5, 9]
    assert [dim_croly(d) for d in (0, 1, 2)] == [0, 1, 3]


def test_roly_croly_split_vector_polynomials():
    for degree in range(5):
        assert dim_roly(degree) + dim_croly(degree) == 2 * dim_poly(degree)


@pytest.mark.parametrize("a,b", [(0, 0), (2, 3), (5, 1), (0, 6)])
def test_square_quadrature_is_exact(unit_square, a, b):
    rule = cell_quadrature(0, unit_square, a + b)
    x, y = rule.points[:, 0], rule.points[:, 1]

    assert rule.integrate(x ** a * y ** b) == pytest.approx(1.0 / ((a + 1) * (b + 1)))


def test_triangle_rule_measures_area():
    rule = triangle_rule(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]), 4)

    assert rule.weights.sum() == pytest.approx(1.0)
    assert rule.integrate(rule.points[:, 0] ** 2) == pytest.approx(2.0 / 3.0)


def test_nonconvex_cell_quadrature(l_hexagon):
    rule = cell_quadrature(0, l_hexagon, 3)

    assert (rule.weights > 0).all()
    assert rule.weights.sum() == pytest.approx(3.0)
    assert rule.integrate(rule.points[:, 0]) == pytest.approx(2.5)


def test_negative_degree_rejected(unit_square):
    with pytest.raises(ValueError):
        cell_quadrature(0, unit_square, -1)


def test_edge_quadrature(unit_square):
    rule = edge_quadrature(0, unit_square, 4)
    s = (rule.points - unit_square.vertices[unit_square.edges[0][0]]) @ unit_square.t_E[0]

    assert rule.weights.sum() == pytest.approx(1.0)
    assert rule.integrate(s ** 4) == pytest.approx(0.2)


def test_monomial_gradients_match_differences():
    center, scale = np.array([0.3, 0.4]), 0.7
    point = np.array([[0.6, 0.1]])
    step = 1e-6
    grads = eval_monomial_gradients(point, center, scale, 3)[0]

    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = step
        numeric = (
            eval_monomials(point + shift, center, scale, 3)
            - eval_monomials(point - shift, center, scale, 3)
        )[0] / (2 * step)
        assert np.allclose(grads[:, axis], numeric, atol=1e-6)


@pytest.fixture
def quad(l_hexagon):
    return MeshQuadrature(l_hexagon, 12)


@pytest.mark.parametrize(
    "value_kind,space_kind,degree,dim",
    [
        ("scalar", "full", 3, 10),
        ("scalar", "zero_average", 2, 5),
        ("vector", "full", 1, 6),
        ("matrix", "full", 1, 12),
        ("sym", "full", 1, 9),
        ("vector", "roly", 2, 9),
        ("vector", "croly", 2, 3),
    ],
)
def test_cell_bases_are_orthonormal(quad, value_kind, space_kind, degree, dim):
    cell = quad.cell(0)
    mass = cell.mass(value_kind, space_kind, degree)

    assert mass.shape == (dim, dim)
    assert np.allclose(mass, np.eye(dim), atol=1e-9)


def test_zero_average_basis(quad):
    cell = quad.cell(0)
    values = cell.values("scalar", "zero_average", 3)[:, :, 0]

    assert np.allclose(values @ cell.rule.weights, 0.0, atol=1e-12)


def test_roly_is_rotational(quad):
    cell = quad.cell(0)
    grads = cell.gradients("vector", "roly", 2)
    divergence = grads[:, :, 0, 0] + grads[:, :, 1, 1]

    assert np.abs(divergence).max() < 1e-9


def test_cell_projection_reproduces_polynomials(quad):
    cell = quad.cell(0)
    x, y = cell.rule.points[:, 0], cell.rule.points[:, 1]
    samples = (1 + x * y - 2 * y ** 2)[:, None]

    coefficients = cell.project("scalar", "full", 2, samples)
    rebuilt = np.einsum("b,bpc->pc", coefficients, cell.values("scalar", "full", 2))

    assert np.allclose(rebuilt, samples, atol=1e-10)


def test_edge_basis(quad):
    edge = quad.edge(0)
    mass = edge.mass(3)
    s = edge.rule.points @ edge.tangent

    assert np.allclose(mass, np.eye(4), atol=1e-10)
    coefficients = edge.project(3, s ** 3 - s)
    rebuilt = coefficients @ edge.values(3)
    assert np.allclose(rebuilt, s ** 3 - s, atol=1e-10)


def test_local_objects_are_cached(quad):
    assert quad.cell(0) is quad.cell(0)
    assert quad.cell(0).edges[0] is quad.edge(quad.cell(0).edges[0].index)
    assert len(quad.edges()) == 6
