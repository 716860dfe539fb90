import numpy as np
import pytest

import polyddr.transfer as transfer_module
from polyddr.assembly import Discretisation
from polyddr.mesh import generate_mesh
from polyddr.transfer import (
    TransferPair,
    extend_grad,
    extend_rot,
    poincare_transfer,
    reduce_grad,
    reduce_rot,
    transfer_slices,
    verify_cochain,
)


@pytest.fixture(params=[0, 1, 2])
def ring_disc(request, ring4):
    return Discretisation(ring4, request.param)


def test_cochain_identities(ring_disc):
    residuals = verify_cochain(ring_disc, seed=1, samples=4)

    assert set(residuals) == {
        "reduce_grad",
        "reduce_rot",
        "extend_grad",
        "extend_rot",
        "identity_grad",
        "identity_rot",
        "membership",
    }
    assert max(residuals.values()) < 1e-10


def test_transfer_pair_shapes(ring_disc):
    pair = TransferPair.from_discretisation(ring_disc)
    mesh = ring_disc.mesh

    assert pair.R_grad.shape == (mesh.num_vertices, ring_disc.layout("X_Sgrad").dim)
    assert pair.R_rot.shape == (mesh.num_edges, ring_disc.layout("X_Srot").dim)
    assert pair.E_grad.shape == pair.R_grad.shape[::-1]
    assert pair.E_rot.shape == pair.R_rot.shape[::-1]


def test_round_trip_through_ddr0(ring_disc):
    rng = np.random.default_rng(0)
    q0 = rng.standard_normal(ring_disc.mesh.num_vertices)
    v0 = rng.standard_normal(ring_disc.mesh.num_edges)

    assert np.allclose(reduce_grad(extend_grad(q0, ring_disc), ring_disc), q0)
    assert np.allclose(reduce_rot(extend_rot(v0, ring_disc), ring_disc), v0)


def test_poincare_transfer_on_scaled_identity():
    eye = np.eye(3)
    grams = {"X0": eye, "X1": eye, "X0_hat": eye, "X1_hat": eye}

    result = poincare_transfer(2 * eye, eye, eye, eye, eye, eye, grams, probes=3)

    assert result["C_hat"] == pytest.approx(1.0)
    assert result["direct"] == pytest.approx(0.5)
    assert result["C_P"] == 0.0
    assert result["bound"] == pytest.approx(1.0)
    assert result["passed"]


@pytest.fixture
def stiff_transfer():
    eye = np.eye(2)
    grams = {"X0": eye, "X1": eye, "X0_hat": eye, "X1_hat": eye}
    D = np.diag([1.0, 1e-3])
    R0 = np.diag([1.0, 0.0])
    return (D, eye, eye, eye, R0, eye, grams)


def test_poincare_transfer_sampled_constant_reaches_exact(stiff_transfer):
    result = poincare_transfer(*stiff_transfer, probes=4, seed=3)

    assert result["C_P"] == pytest.approx(1e3)
    assert result["C_P_probes"] == pytest.approx(1e3)
    assert result["probes_within_C_P"]
    assert result["passed"]


def test_poincare_transfer_fails_when_sampled_constant_exceeds_exact(monkeypatch, stiff_transfer):
    exact = transfer_module.restricted_poincare

    def halved(sigma, restricted):
        return 0.5 * exact(sigma, restricted)

    monkeypatch.setattr(transfer_module, "restricted_poincare", halved)

    result = poincare_transfer(*stiff_transfer, probes=4, seed=3)

    assert result["direct"] <= result["bound"]
    assert result["C_P_probes"] > result["C_P"]
    assert not result["probes_within_C_P"]
    assert not result["passed"]


@pytest.mark.parametrize("k", [0, 1])
def test_transfer_slices_hold(k):
    disc = Discretisation(generate_mesh("cartesian", 2), k)

    slices = transfer_slices(disc, probes=4, seed=2)

    for name in ("grad", "rot"):
        result = slices[name]
        assert result["passed"]
        assert result["C_P_probes"] <= result["C_P"] * (1 + 1e-8)
        assert result["probes_within_C_P"]


def test_transfer_slices_subset(unit_square):
    slices = transfer_slices(Discretisation(unit_square, 0), probes=2, slices=("rot",))

    assert list(slices) == ["rot"]
