"""BGG outputs of the DS(k) / DDR(k+1) diagram.

The Hessian complex DH(k+1), the twisted complex, cohomology audits by
certified numerical rank, and per-triangle DOF tables.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.sparse import bmat, csr_matrix

from . import errors as E
from .assembly import Discretisation, tgrad_local_matrix
from .ddr import sskw_matrix, sym_embedding
from .layout import DofLayout
from .logger import check_logger
from .mesh import PolyMesh, betti_numbers
from .polyquad import LocalCell, dim_poly
from .report import CheckRecord, VerificationReport
from .stokes import sgrad_local_matrix
from .verify import RankSettings


def hess_local_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Sgrad -> cell-local X_ddr,rot, through the identity X_Srot = X_ddr,grad."""
    return tgrad_local_matrix(cell, k) @ sgrad_local_matrix(cell, k)


def hess_local(qT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return hess_local_matrix(cell, k) @ qT_local


@dataclass
class SymSubspaceMap:
    disc: Discretisation

    def local(self, cell: LocalCell) -> np.ndarray:
        return sym_embedding(cell, self.disc.k)

    @property
    def matrix(self) -> csr_matrix:
        return self.disc["Embed_sym"].matrix

    def audit(self, rank: Optional[RankSettings] = None) -> Dict[str, Any]:
        """sskw o embedding = 0, orthonormal columns, and dim of the image = dim Ker sskw_T."""
        rank = rank or RankSettings()
        k = self.disc.k
        sskw_residual = orthonormality = 0.0
        dimensions_match = True

        for cell in self.disc.cells():
            embedding = self.local(cell)
            sskw = sskw_matrix(cell, k)
            sskw_residual = max(sskw_residual, float(np.abs(sskw @ embedding).max()))
            gram = embedding.T @ embedding - np.eye(embedding.shape[1])
            orthonormality = max(orthonormality, float(np.abs(gram).max(initial=0.0)))

            kernel = sskw.shape[1] - rank.rank(sskw)["rank"]
            edges = embedding.shape[0] - 4 * dim_poly(k)
            dimensions_match &= embedding.shape[1] == kernel
            dimensions_match &= embedding.shape[1] - edges == 3 * dim_poly(k)

        return {
            "sskw_embedding": sskw_residual,
            "orthonormality": orthonormality,
            "kernel_dimensions": bool(dimensions_match),
        }


def twisted_operators(disc: Discretisation) -> Dict[str, csr_matrix]:
    """A0 = [[SGRAD, -Id], [0, tGRAD]] and A1 = [[SROT, -sskw], [0, tROT]]."""
    A0 = bmat([[disc["SGRAD"].matrix, -disc["Id_Srot"].matrix], [None, disc["tGRAD"].matrix]])
    A1 = bmat([[disc["SROT"].matrix, -disc["sskw"].matrix], [None, disc["tROT"].matrix]])
    return {"A0": A0.tocsr(), "A1": A1.tocsr()}


def _max_entry(matrix) -> float:
    matrix = abs(matrix)
    return float(matrix.max()) if matrix.nnz else 0.0


def verify_anticommutativity(disc: Discretisation) -> float:
    """Max-entry of sskw tGRAD + SROT as a map X_Srot -> P^k."""
    return _max_entry(disc["sskw"].matrix @ disc["tGRAD"].matrix + disc["SROT"].matrix)


def twisted_residual(disc: Discretisation) -> float:
    operators = twisted_operators(disc)
    return _max_entry(operators["A1"] @ operators["A0"])


def cohomology_report(
    disc: Discretisation, rank: Optional[RankSettings] = None
) -> VerificationReport:
    rank = rank or RankSettings()
    log = check_logger("cohomology")
    mesh = disc.mesh
    beta0, beta1 = betti_numbers(mesh)
    report = VerificationReport(mesh=mesh.descriptor(), k=disc.k)
    log.info(f"{mesh.name}: beta0={beta0} beta1={beta1}")

    dims = {
        space: disc.layout(space).dim
        for space in ("X_Sgrad", "X_Srot", "P_k", "X_ddr_rot_sym", "P_kp1_vec")
    }
    embed = disc["Embed_sym"].matrix
    hess = disc["Hess"].matrix
    ranks = {
        "SGRAD": rank.rank(disc["SGRAD"]),
        "SROT": rank.rank(disc["SROT"]),
        "Hess": rank.rank(embed.T @ hess),
        "tROT_sym": rank.rank(disc["tROT_sym"]),
        "sskw": rank.rank(disc["sskw"]),
    }
    twisted = twisted_operators(disc)
    ranks["A0"] = rank.rank(twisted["A0"])
    ranks["A1"] = rank.rank(twisted["A1"])

    def record(name: str, measured: int, expected: int, used: List[str]) -> None:
        certified = all(ranks[tag]["certified"] for tag in used)
        gaps = ", ".join(f"{tag} gap {ranks[tag]['gap']:.3g}" for tag in used)
        report.add(CheckRecord.equals(name, measured, expected, certified, gaps), "cohomology")

    record("DS_H0", ranks["SGRAD"]["nullity"], beta0, ["SGRAD"])
    record("DS_H1", ranks["SROT"]["nullity"] - ranks["SGRAD"]["rank"], beta1, ["SGRAD", "SROT"])
    record("DS_H2", dims["P_k"] - ranks["SROT"]["rank"], 0, ["SROT"])

    hess_symmetric = _max_entry(embed @ (embed.T @ hess) - hess)
    report.add(
        CheckRecord.upper_bound("DH_hess_symmetric", hess_symmetric, 1e-12), "cohomology"
    )
    record("DH_H0", hess.shape[1] - ranks["Hess"]["rank"], 3 * beta0, ["Hess"])
    record(
        "DH_H1",
        ranks["tROT_sym"]["nullity"] - ranks["Hess"]["rank"],
        3 * beta1,
        ["Hess", "tROT_sym"],
    )
    record("DH_H2", dims["P_kp1_vec"] - ranks["tROT_sym"]["rank"], 0, ["tROT_sym"])
    record("sskw_onto", ranks["sskw"]["rank"], dims["P_k"], ["sskw"])

    record("twisted_H0", ranks["A0"]["nullity"], 3 * beta0, ["A0"])
    record("twisted_H1", ranks["A1"]["nullity"] - ranks["A0"]["rank"], 3 * beta1, ["A0", "A1"])
    record(
        "twisted_H2", dims["P_k"] + dims["P_kp1_vec"] - ranks["A1"]["rank"], 0, ["A1"]
    )

    report.add(
        CheckRecord.equals(
            "DS_euler", dims["X_Sgrad"] - dims["X_Srot"] + dims["P_k"], beta0 - beta1
        ),
        "cohomology",
    )
    report.add(
        CheckRecord.equals(
            "DH_euler",
            dims["X_Sgrad"] - dims["X_ddr_rot_sym"] + dims["P_kp1_vec"],
            3 * (beta0 - beta1),
        ),
        "cohomology",
    )

    report.tables["cohomology_ranks"] = [
        {"operator": tag, **{key: result[key] for key in ("rank", "nullity", "gap", "certified")}}
        for tag, result in ranks.items()
    ]
    return report


# DOF tables


def _row(complex_name: str, k: int, space: str, vertex: int, edge: int, interior: int, total: int):
    if 3 * vertex + 3 * edge + interior != total:
        raise E.DofTableMismatchError(
            f"{complex_name}({k}) {space}: 3*{vertex} + 3*{edge} + {interior} != {total}"
        )
    return {
        "complex": complex_name,
        "k": k,
        "space": space,
        "vertex": vertex,
        "edge": edge,
        "interior": interior,
        "total": total,
    }


def ds_rows(k: int) -> List[Dict[str, Any]]:
    name = f"DS({k})"
    return [
        _row(name, k, "H2", 3, 2 * k + 1, (k - 1) * k // 2, 12 + (11 * k + k * k) // 2),
        _row(name, k, "H1", 2, 2 * (k + 1), k * (k + 1), 12 + 7 * k + k * k),
        _row(name, k, "L2", 0, 0, (k + 1) * (k + 2) // 2, (k + 1) * (k + 2) // 2),
    ]


def dh_rows(k: int) -> List[Dict[str, Any]]:
    name = f"DH({k + 1})"
    h2 = dict(ds_rows(k)[0], complex=name)
    return [
        h2,
        _row(
            name, k, "Hrot_sym", 0, 2 * k + 4, 3 * (k + 1) * (k + 2) // 2,
            15 + 3 * (7 * k + k * k) // 2,
        ),
        _row(name, k, "L2", 0, 0, (k + 2) * (k + 3), (k + 2) * (k + 3)),
    ]


def fn_rows(k: int) -> List[Dict[str, Any]]:
    """Falk-Neilan Stokes element, k >= 3."""
    name = f"FN({k})"
    return [
        _row(name, k, "H2", 6, 2 * k - 5, (k - 3) * (k - 2) // 2, 6 + (7 * k + k * k) // 2),
        _row(name, k, "H1", 6, 2 * (k - 2), (k - 1) * k, 6 + 5 * k + k * k),
        _row(
            name, k, "L2", 1, 0, (k + 2) * (k + 1) // 2 - 3, (k + 2) * (k + 1) // 2
        ),
    ]


def hz_rows(k: int) -> List[Dict[str, Any]]:
    """Hu-Zhang Hessian element of degree k + 1, k >= 1."""
    name = f"HZ({k + 1})"
    return [
        _row(name, k, "H2", 6, 2 * k - 1, (k - 1) * k // 2, 15 + (11 * k + k * k) // 2),
        _row(
            name, k, "Hrot_sym", 3, 2 * k + 2, 3 * (k + 1) * (k + 2) // 2,
            18 + 3 * (7 * k + k * k) // 2,
        ),
        _row(name, k, "L2", 0, 0, (k + 2) * (k + 3), (k + 2) * (k + 3)),
    ]


def reference_triangle() -> PolyMesh:
    return PolyMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], name="triangle")


LAYOUT_SPACES = {
    ("DS", "H2"): "X_Sgrad",
    ("DS", "H1"): "X_Srot",
    ("DS", "L2"): "P_k",
    ("DH", "H2"): "X_Sgrad",
    ("DH", "Hrot_sym"): "X_ddr_rot_sym",
    ("DH", "L2"): "P_kp1_vec",
}


def cross_check(rows: List[Dict[str, Any]], triangle: Optional[PolyMesh] = None) -> int:
    """Compares DS and DH rows with DofLayout counts on one triangle; returns rows checked."""
    triangle = triangle or reference_triangle()
    checked = 0

    for row in rows:
        key = (row["complex"].split("(")[0], row["space"])
        if key not in LAYOUT_SPACES:
            continue
        layout = DofLayout(LAYOUT_SPACES[key], triangle, row["k"])
        counts = layout.counts()
        found = (counts["vertex"], counts["edge"], counts["cell"], counts["total"])
        wanted = (row["vertex"], row["edge"], row["interior"], row["total"])
        if found != wanted:
            raise E.DofTableMismatchError(
                f"{row['complex']} {row['space']}: formula {wanted}, layout {found}"
            )
        checked += 1

    return checked


def dof_table(k_max: int) -> List[Dict[str, Any]]:
    if k_max < 0:
        raise ValueError(f"k_max must be non-negative, got {k_max}")

    rows: List[Dict[str, Any]] = []
    for k in range(k_max + 1):
        rows += ds_rows(k) + dh_rows(k)
        if k >= 1:
            rows += hz_rows(k)
        if k >= 3:
            rows += fn_rows(k)

    cross_check(rows)
    return rows


def totals(rows: List[Dict[str, Any]], complex_name: str) -> List[int]:
    return [row["total"] for row in rows if row["complex"] == complex_name]


def dof_report(k_max: int) -> VerificationReport:
    rows = dof_table(max(k_max, 1))
    report = VerificationReport(k=k_max)
    report.tables["dofs"] = [row for row in rows if row["k"] <= k_max]

    report.add(CheckRecord.equals("DS(0)_totals", totals(rows, "DS(0)"), [12, 12, 1]), "dofs")
    report.add(CheckRecord.equals("DH(1)_totals", totals(rows, "DH(1)"), [12, 15, 6]), "dofs")
    report.add(CheckRecord.equals("HZ(2)_totals", totals(rows, "HZ(2)"), [21, 30, 12]), "dofs")
    if k_max >= 3:
        report.add(
            CheckRecord.equals("FN(3)_totals", totals(rows, "FN(3)"), [21, 30, 10]), "dofs"
        )

    return report
