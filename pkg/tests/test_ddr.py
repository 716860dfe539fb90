import numpy as np
import pytest

from polyddr.assembly import tgrad_local_matrix
from polyddr.ddr import (
    RotLocal,
    ddr0_ops,
    ddr_commutation_residual,
    ddr_element_rot_matrix,
    interpolate_ddr_grad,
    interpolate_ddr_rot,
    quadrature_for,
    sskw_matrix,
    sym_embedding,
)
from polyddr.fields import constant_vector, polynomial_scalar, polynomial_vector
from polyddr.layout import DofLayout, entity_dims


def test_entity_dims():
    assert entity_dims("X_Sgrad", 0) == (3, 1, 0)
    assert entity_dims("X_Srot", 2) == (2, 6, 6)
    assert entity_dims("X_ddr_grad", 2) == entity_dims("X_Srot", 2)
    assert entity_dims("X_ddr_rot", 1) == (0, 6, 12)
    assert entity_dims("X_ddr_rot_sym", 1) == (0, 6, 9)


def test_interpolation_sizes(two_triangles):
    quad = quadrature_for(two_triangles, 1)

    assert len(interpolate_ddr_grad(constant_vector([1, 2]), quad, 1)) == DofLayout(
        "X_ddr_grad", two_triangles, 1
    ).dim
    tau = lambda points: np.tile(np.eye(2), (len(points), 1, 1))  # noqa: E731
    assert len(interpolate_ddr_rot(tau, quad, 1)) == DofLayout("X_ddr_rot", two_triangles, 1).dim


@pytest.mark.parametrize("k", [0, 1, 2])
def test_tgrad_commutes(l_hexagon, k):
    quad = quadrature_for(l_hexagon, k)
    v = polynomial_vector(k + 2, np.random.default_rng(k), center=(1.0, 1.0))

    residual = ddr_commutation_residual(quad, k, v, v.jacobian)

    assert residual["ddr_commutation"] < 1e-9


@pytest.mark.parametrize("k", [0, 1])
def test_trot_after_tgrad_vanishes(l_hexagon, k):
    cell = quadrature_for(l_hexagon, k).cell(0)
    product = ddr_element_rot_matrix(cell, k) @ tgrad_local_matrix(cell, k)

    assert np.abs(product).max() < 1e-9


@pytest.mark.parametrize("k", [0, 2])
def test_sym_embedding(unit_square, k):
    cell = quadrature_for(unit_square, k).cell(0)
    embed = sym_embedding(cell, k)

    assert embed.shape[0] == RotLocal(cell, k).size
    assert np.allclose(embed.T @ embed, np.eye(embed.shape[1]))
    assert np.abs(sskw_matrix(cell, k) @ embed).max() == 0.0


def test_ddr0_is_a_complex(ring4):
    ops = ddr0_ops(ring4)

    assert abs(ops.C0 @ ops.G0).max() < 1e-12
    assert np.abs(ops.G0 @ np.ones(ring4.num_vertices)).max() < 1e-12


def test_ddr0_gradient_commutes(l_hexagon):
    ops = ddr0_ops(l_hexagon)
    q = polynomial_scalar(5, np.random.default_rng(1), center=(1.0, 1.0))

    assert np.allclose(ops.G0 @ ops.interpolate_grad(q), ops.interpolate_curl(q.gradient))


def test_gamma0_reproduces_constants(l_hexagon):
    ops = ddr0_ops(l_hexagon)
    v = constant_vector([0.3, -1.2])

    assert np.allclose(ops.gamma0(0, ops.interpolate_curl(v)), [0.3, -1.2])
    assert abs(ops.C0 @ ops.interpolate_curl(v)).max() < 1e-12
