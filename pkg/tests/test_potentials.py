import numpy as np
import pytest

from polyddr.ddr import quadrature_for
from polyddr.mesh import PolyMesh
from polyddr.polyquad import dim_poly
from polyddr.potentials import (
    boundedness_ratios,
    grad_interpolation_matrix,
    local_products,
    pot_grad_kp2_matrix,
    pot_rot_k_matrix,
    pot_stokes_extension_residual,
    pot_stokes_kp1_matrix,
    pot_stokes_kp3_matrix,
    stokes_interpolation_matrix,
)
from polyddr.stokes import StokesLocal


@pytest.fixture(params=["unit_square", "l_hexagon"])
def mesh(request):
    return request.getfixturevalue(request.param)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_pot_stokes_reproduces_polynomials(mesh, k):
    cell = quadrature_for(mesh, k).cell(0)
    reproduced = pot_stokes_kp1_matrix(cell, k) @ stokes_interpolation_matrix(cell, k, k + 1)

    assert np.allclose(reproduced, np.eye(dim_poly(k + 1)), atol=1e-8)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_pot_rot_reproduces_polynomials(mesh, k):
    cell = quadrature_for(mesh, k).cell(0)
    reproduced = pot_rot_k_matrix(cell, k) @ grad_interpolation_matrix(cell, k, k)

    assert np.allclose(reproduced, np.eye(2 * dim_poly(k)), atol=1e-8)


@pytest.mark.parametrize("k", [0, 1])
def test_higher_potentials_reproduce_polynomials(mesh, k):
    cell = quadrature_for(mesh, k).cell(0)
    grad = pot_grad_kp2_matrix(cell, k) @ grad_interpolation_matrix(cell, k, k + 2)
    stokes = pot_stokes_kp3_matrix(cell, k) @ stokes_interpolation_matrix(cell, k, k + 3)

    assert np.allclose(grad, np.eye(2 * dim_poly(k + 2)), atol=1e-7)
    assert np.allclose(stokes, np.eye(dim_poly(k + 3)), atol=1e-7)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_extension_residual_vanishes(l_hexagon, k):
    cell = quadrature_for(l_hexagon, k).cell(0)
    q_local = np.random.default_rng(k).standard_normal(StokesLocal(cell, k).size)

    assert pot_stokes_extension_residual(q_local, cell, k) < 1e-9


@pytest.mark.parametrize("k", [0, 1])
def test_local_products_are_spd(mesh, k):
    cell = quadrature_for(mesh, k).cell(0)

    for space, product in local_products(cell, k).items():
        assert product.space == space
        assert np.allclose(product.product, product.product.T)
        assert np.linalg.eigvalsh(product.product).min() > 0.0
        assert 1.0 <= product.equivalence < 1e6


@pytest.mark.parametrize("k", [0, 1, 2])
def test_boundedness_ratios_are_scale_free(l_hexagon, k):
    ratios = []
    for scale in (1.0, 1e-2, 1e2):
        scaled = PolyMesh(scale * l_hexagon.vertices, l_hexagon.loops, name=f"l_x{scale:g}")
        ratios.append(boundedness_ratios(quadrature_for(scaled, k).cell(0), k))

    assert set(ratios[0]) == {"pot_stokes_kp1", "sgrad", "pot_rot_k", "srot"}
    for name in ratios[0]:
        values = [row[name] for row in ratios]
        assert all(np.isfinite(value) and value > 0.0 for value in values)
        assert max(values) <= 2.0 * min(values)
