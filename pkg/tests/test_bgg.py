import numpy as np
import pytest

import polyddr.errors as E
from polyddr.assembly import Discretisation
from polyddr.bgg import (
    SymSubspaceMap,
    _row,
    cohomology_report,
    cross_check,
    dof_report,
    dof_table,
    hess_local_matrix,
    totals,
    twisted_operators,
    twisted_residual,
    verify_anticommutativity,
)
from polyddr.layout import DofLayout
from polyddr.mesh import generate_mesh
from polyddr.report import PASS


def test_lowest_order_totals():
    rows = dof_table(1)

    assert totals(rows, "DS(0)") == [12, 12, 1]
    assert totals(rows, "DH(1)") == [12, 15, 6]
    assert totals(rows, "HZ(2)") == [21, 30, 12]


def test_falk_neilan_totals():
    assert totals(dof_table(3), "FN(3)") == [21, 30, 10]


def test_rows_follow_the_triangle_count():
    for row in dof_table(4):
        assert 3 * row["vertex"] + 3 * row["edge"] + row["interior"] == row["total"]


def test_cross_check_counts_ds_and_dh_rows():
    rows = dof_table(2)

    assert cross_check(rows) == 18


def test_cross_check_detects_wrong_rows():
    rows = [dict(dof_table(0)[0], vertex=2, total=9)]

    with pytest.raises(E.DofTableMismatchError):
        cross_check(rows)


def test_row_mismatch():
    with pytest.raises(E.DofTableMismatchError):
        _row("DS(0)", 0, "H2", 3, 1, 0, 13)


def test_negative_kmax():
    with pytest.raises(ValueError):
        dof_table(-1)


@pytest.mark.parametrize("k_max,records", [(0, 3), (3, 4)])
def test_dof_report(k_max, records):
    report = dof_report(k_max)

    assert report.passed
    assert len(report.checks) == records
    assert max(row["k"] for row in report.tables["dofs"]) == k_max


@pytest.mark.parametrize(
    "family,n,k",
    [
        ("cartesian", 2, 0),
        ("split_triangles", 1, 1),
        ("agglomerated_nonconvex", 1, 0),
        ("ring_one_hole", 1, 0),
        ("ring_two_holes", 1, 0),
    ],
)
def test_cohomology_matches_betti_numbers(family, n, k):
    report = cohomology_report(Discretisation(generate_mesh(family, n), k))

    failures = [check.to_dict() for check in report.checks if check.status != PASS]
    assert failures == []
    assert {row["operator"] for row in report.tables["cohomology_ranks"]} == {
        "SGRAD",
        "SROT",
        "Hess",
        "tROT_sym",
        "sskw",
        "A0",
        "A1",
    }


def test_cohomology_of_ring_fixture(ring4):
    report = cohomology_report(Discretisation(ring4, 0))
    measured = {check.name: check.measured for check in report.checks}

    assert measured["DS_H1"] == 1
    assert measured["DH_H1"] == 3
    assert measured["twisted_H1"] == 3


@pytest.mark.parametrize("k", [0, 1])
def test_twisted_complex(ring4, k):
    disc = Discretisation(ring4, k)
    operators = twisted_operators(disc)

    assert operators["A0"].shape[1] == disc.layout("X_Sgrad").dim + disc.layout("X_Srot").dim
    assert twisted_residual(disc) < 1e-10
    assert verify_anticommutativity(disc) < 1e-10


def test_sym_subspace_audit(two_triangles):
    disc = Discretisation(two_triangles, 1)
    audit = SymSubspaceMap(disc).audit()

    assert audit["sskw_embedding"] == 0.0
    assert audit["orthonormality"] < 1e-14
    assert audit["kernel_dimensions"]


def test_hessian_lands_in_symmetric_subspace(l_hexagon):
    disc = Discretisation(l_hexagon, 1)
    cell = disc.cells()[0]
    embed = SymSubspaceMap(disc).local(cell)
    hess = hess_local_matrix(cell, 1)

    assert hess.shape == (
        DofLayout("X_ddr_rot", l_hexagon, 1).local_size(0),
        DofLayout("X_Sgrad", l_hexagon, 1).local_size(0),
    )
    assert np.abs(embed @ (embed.T @ hess) - hess).max() < 1e-10
