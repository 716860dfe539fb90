import numpy as np
import pytest

import polyddr.constants as C
import polyddr.errors as E
from polyddr.assembly import Discretisation
from polyddr.config import Config
from polyddr.fields import polynomial_scalar, polynomial_vector
from polyddr.mesh import PolyMesh, generate_mesh
from polyddr.report import FAIL, PASS
from polyddr.verify import (
    TARGET_SHIFT,
    RankSettings,
    RateStudy,
    boundedness_spread,
    commutation_residuals,
    complex_residuals,
    consistency_study,
    generalized_norm,
    local_exactness,
    numerical_rank,
    poincare_constant,
    poincare_constants,
    poincare_study,
    study_error,
    whitening,
)


@pytest.fixture
def cartesian_disc():
    return Discretisation(generate_mesh("cartesian", 2), 1)


def test_rank_of_identity():
    result = numerical_rank(np.eye(3))

    assert result == {"rank": 3, "nullity": 0, "gap": float("inf"), "certified": True}


def test_rank_drops_tiny_singular_values():
    result = numerical_rank(np.diag([1.0, 1e-14]))

    assert (result["rank"], result["nullity"]) == (1, 1)
    assert result["gap"] == pytest.approx(1e14)
    assert result["certified"]


def test_rank_without_gap_is_uncertified():
    result = numerical_rank(np.diag([1.0, 1e-9, 1e-11]))

    assert result["rank"] == 2
    assert not result["certified"]


@pytest.mark.parametrize("matrix", [np.zeros((2, 3)), np.zeros((0, 3))])
def test_rank_of_empty_or_zero(matrix):
    assert numerical_rank(matrix)["nullity"] == 3


def test_dense_limit():
    with pytest.raises(E.DenseLimitError):
        numerical_rank(np.eye(3), max_dense_dofs=2)


def test_rank_settings_from_config():
    settings = RankSettings.from_config(Config({"options": {"rank_tol": 1e-8}}))

    assert settings.tol == 1e-8
    assert settings.rank(np.diag([1.0, 1e-9]))["rank"] == 1


def test_poincare_constant_of_identity():
    assert poincare_constant(np.eye(3), np.eye(3), np.eye(3)) == pytest.approx(1.0)


def test_poincare_constant_skips_kernel():
    operator = np.diag([2.0, 4.0, 0.0])

    assert poincare_constant(operator, np.eye(3), np.eye(3)) == pytest.approx(0.5)


def test_poincare_constant_of_zero_operator():
    with pytest.raises(E.ZeroOperatorError):
        poincare_constant(np.zeros((2, 2)), np.eye(2), np.eye(2))


def test_generalized_norm_uses_grams():
    operator = np.diag([2.0, 4.0])

    assert generalized_norm(operator, np.eye(2), np.eye(2)) == pytest.approx(4.0)
    assert generalized_norm(operator, 4 * np.eye(2), np.eye(2)) == pytest.approx(2.0)


def test_whitening_rejects_indefinite():
    with pytest.raises(E.SingularMassError):
        whitening(np.diag([1.0, -1.0]))


def rate_study(kind, errors, k=1, tol=0.3):
    h = [1.0, 0.5, 0.25]
    meshes = [{"name": f"m{i}"} for i in range(3)]
    return RateStudy(kind, k, "f", meshes, h, errors, tol)


def test_rate_study_slope():
    study = rate_study("gradient", [1.0, 0.25, 0.0625])

    assert study.slope == pytest.approx(2.0)
    assert study.target == 2
    assert study.passed
    assert study.record().status == PASS
    assert [row["mesh"] for row in study.rows()] == ["m0", "m1", "m2"]


def test_rate_study_wrong_slope_fails():
    study = rate_study("potential", [1.0, 0.5, 0.25])

    assert study.target == 3
    assert study.record().status == FAIL


def test_adjoint_rate_is_a_lower_bound():
    study = rate_study("adjoint_rot", [1.0, 0.125, 0.015625], k=0, tol=0.4)

    assert study.slope == pytest.approx(3.0)
    assert study.passed


def test_exact_rate_study():
    study = rate_study("rot", [1e-13, 2e-13, 1e-13])

    assert study.exact
    assert study.slope is None
    assert study.record().note == "polynomially exact"


def test_rate_study_needs_three_meshes():
    with pytest.raises(E.RateStudyError):
        RateStudy("rot", 0, "f", [{}, {}], [1.0, 0.5], [1.0, 0.5], 0.3)
    with pytest.raises(E.RateStudyError):
        consistency_study("rot", sizes=[2, 4])


def test_unknown_study_kind(cartesian_disc):
    with pytest.raises(ValueError):
        consistency_study("divergence")
    with pytest.raises(ValueError):
        study_error("divergence", None, cartesian_disc)


def test_polynomials_are_reproduced(cartesian_disc):
    rng = np.random.default_rng(4)
    q = polynomial_scalar(2, rng)
    v = polynomial_vector(2, rng)

    assert study_error("potential", q, cartesian_disc) < 1e-9
    assert study_error("gradient", q, cartesian_disc) < 1e-9
    assert study_error("rot", v, cartesian_disc) < 1e-9


@pytest.mark.parametrize(
    "kind,k",
    [(kind, 0) for kind in C.STUDY_KINDS] + [("product_grad", 1), ("adjoint_grad", 1)],
)
def test_consistency_rates(kind, k):
    study = consistency_study(kind, family="cartesian", sizes=[2, 4, 8], k=k)

    assert study.target == k + TARGET_SHIFT[kind]
    assert not study.exact
    assert study.errors[0] > study.errors[1] > study.errors[2] > 0.0
    assert study.record().status == PASS


def test_poincare_constants_are_finite(cartesian_disc):
    constants = poincare_constants(cartesian_disc)

    assert set(constants) == {"grad", "rot"}
    assert all(np.isfinite(value) and value > 0.0 for value in constants.values())


def test_poincare_study_rows():
    study = poincare_study("cartesian", sizes=[1, 2, 3], k=0)

    assert [row["mesh"] for row in study["rows"]] == [
        "cartesian-1",
        "cartesian-2",
        "cartesian-3",
    ]
    assert all(spread >= 0.0 for spread in study["spread"].values())


@pytest.mark.parametrize("k", [0, 1, 2])
def test_local_exactness(k):
    disc = Discretisation(generate_mesh("agglomerated_nonconvex", 1), k)

    rows = local_exactness(disc)

    assert [row["cell"] for row in rows] == [0, 1, 2, 3, 4]
    for row in rows:
        assert row["sgrad_nullity"] == 1
        assert row["exactness_defect"] == 0
        assert row["srot_onto"]


def test_commutation_residuals(cartesian_disc):
    residuals = commutation_residuals(cartesian_disc, fields=2, seed=3)

    assert residuals["commutation_grad"] < 1e-10
    assert residuals["commutation_rot"] < 1e-10


@pytest.mark.parametrize("family", ["cartesian", "split_triangles", "ring_one_hole"])
def test_complex_residuals(family):
    residuals = complex_residuals(Discretisation(generate_mesh(family, 1), 1))

    assert max(residuals.values()) < 1e-10


@pytest.mark.parametrize("k", [0, 1])
def test_certified_rank_survives_mesh_scaling(k):
    ring = generate_mesh("ring_one_hole", 1)
    shrunk = PolyMesh(1e-3 * ring.vertices, ring.loops, name="ring_shrunk")
    settings = RankSettings()

    for tag in ("SGRAD", "SROT"):
        original = settings.rank(Discretisation(ring, k)[tag].matrix)
        scaled = settings.rank(Discretisation(shrunk, k)[tag].matrix)

        assert original["certified"] and scaled["certified"]
        assert (scaled["rank"], scaled["nullity"]) == (original["rank"], original["nullity"])

    assert settings.rank(Discretisation(shrunk, k)["SGRAD"].matrix)["nullity"] == 1


def test_boundedness_spread_on_nonconvex_cells():
    disc = Discretisation(generate_mesh("agglomerated_nonconvex", 1), 1)

    for cell in (0, 4):
        spread = boundedness_spread(disc, cell)

        assert set(spread) == {"pot_stokes_kp1", "sgrad", "pot_rot_k", "srot"}
        assert all(1.0 <= value <= 2.0 for value in spread.values())
