import numpy as np
import pytest

from polyddr.assembly import Discretisation
from polyddr.ddr import interpolate_ddr_grad, quadrature_for
from polyddr.fields import polynomial_scalar, polynomial_vector
from polyddr.layout import DofLayout
from polyddr.stokes import (
    StokesLocal,
    interpolate_stokes,
    sgrad_local,
    sgrad_local_matrix,
    split_sgrad_edge,
    srot_element,
    srot_matrix,
)


def test_single_triangle_sgrad(triangle):
    sgrad = Discretisation(triangle, 0)["SGRAD"]
    dense = sgrad.matrix.toarray()

    assert sgrad.shape == (12, 12)
    assert np.linalg.matrix_rank(dense, tol=1e-10) == 11


def test_constants_are_the_kernel(triangle):
    disc = Discretisation(triangle, 0)
    constant = np.zeros(disc.layout("X_Sgrad").dim)
    constant[0:9:3] = 1.0

    assert np.abs(disc["SGRAD"](constant)).max() < 1e-12


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_local_layout_sizes(l_hexagon, k):
    quad = quadrature_for(l_hexagon, k)
    cell = quad.cell(0)
    idx = StokesLocal(cell, k)

    assert idx.size == DofLayout("X_Sgrad", l_hexagon, k).local_size(0)
    assert sgrad_local_matrix(cell, k).shape == (
        DofLayout("X_Srot", l_hexagon, k).local_size(0),
        idx.size,
    )


@pytest.mark.parametrize("k", [0, 1, 2])
def test_srot_after_sgrad_vanishes(l_hexagon, k):
    cell = quadrature_for(l_hexagon, k).cell(0)
    product = srot_matrix(cell, k) @ sgrad_local_matrix(cell, k)

    assert np.abs(product).max() < 1e-9


@pytest.mark.parametrize("k", [0, 1, 2])
def test_sgrad_commutes_with_interpolation(l_hexagon, k):
    quad = quadrature_for(l_hexagon, k)
    q = polynomial_scalar(k + 3, np.random.default_rng(k), center=(1.0, 1.0))
    stokes, grad = DofLayout("X_Sgrad", l_hexagon, k), DofLayout("X_Srot", l_hexagon, k)

    iq = interpolate_stokes(q, q.gradient, quad, k)
    iv = interpolate_ddr_grad(q.gradient, quad, k)
    local = sgrad_local(iq[stokes.cell_local(0)], quad.cell(0), k)

    assert np.allclose(local, iv[grad.cell_local(0)], atol=1e-9)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_srot_commutes_with_projection(l_hexagon, k):
    quad = quadrature_for(l_hexagon, k)
    cell = quad.cell(0)
    v = polynomial_vector(k + 2, np.random.default_rng(10 + k), center=(1.0, 1.0))
    grad = DofLayout("X_Srot", l_hexagon, k)

    iv = interpolate_ddr_grad(v, quad, k)
    rot = srot_element(iv[grad.cell_local(0)], cell, k)
    expected = cell.project("scalar", "full", k, v.rot(cell.rule.points))

    assert np.allclose(rot, expected, atol=1e-9)


def test_split_sgrad_edge_recombines(unit_square):
    k = 1
    quad = quadrature_for(unit_square, k)
    edge = quad.edge(0)
    q_local = np.random.default_rng(3).standard_normal(6 + 2 * k + 1)

    pieces = split_sgrad_edge(edge, q_local, k)
    t, n = edge.tangent, edge.normal
    recombined = np.concatenate(
        [pieces["tangential"] * t[c] + pieces["normal"] * n[c] for c in range(2)]
    )

    assert np.allclose(pieces["block"], recombined)
