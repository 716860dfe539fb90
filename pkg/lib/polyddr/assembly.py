"""Global sparse operators and Gram matrices over DofLayouts.

Interface rows (vertex and edge blocks of the target) depend only on the
entity itself, so they are written once, by the first cell that owns them.
Gram matrices are sums of cell contributions.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, identity

from . import constants as C
from . import errors as E
from . import potentials
from .ddr import (
    GradLocal,
    RotLocal,
    c0_row,
    ddr_edge_gradient_matrix,
    ddr_element_gradient_matrix,
    ddr_element_rot_matrix,
    sskw_matrix,
    sym_embedding,
)
from .layout import DofLayout
from .mesh import PolyMesh
from .polyquad import LocalCell, MeshQuadrature
from .stokes import sgrad_local_matrix, srot_matrix


@dataclass
class GlobalOperator:
    name: str
    source: DofLayout
    target: DofLayout
    matrix: csr_matrix
    k: int
    mesh: str

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise E.LayoutMismatchError(
                f"{self.name}: shape {self.matrix.shape} does not match "
                f"{self.target!r} <- {self.source!r}"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def then(self, other: "GlobalOperator", name: Optional[str] = None) -> "GlobalOperator":
        """other after self."""
        other.source.require(self.target)
        return GlobalOperator(
            name or f"{other.name}*{self.name}",
            self.source,
            other.target,
            (other.matrix @ self.matrix).tocsr(),
            self.k,
            self.mesh,
        )

    def max_entry(self) -> float:
        return float(abs(self.matrix).max()) if self.matrix.nnz else 0.0


class Triplets:
    def __init__(self, shape: Tuple[int, int]) -> None:
        self.shape = shape
        self.rows: List[np.ndarray] = []
        self.cols: List[np.ndarray] = []
        self.vals: List[np.ndarray] = []
        self.written = np.zeros(shape[0], dtype=bool)

    def add(self, rows: np.ndarray, cols: np.ndarray, block: np.ndarray) -> None:
        rr, cc = np.meshgrid(rows, cols, indexing="ij")
        keep = block != 0.0
        self.rows.append(rr[keep])
        self.cols.append(cc[keep])
        self.vals.append(block[keep])

    def add_once(self, rows: np.ndarray, cols: np.ndarray, block: np.ndarray) -> None:
        fresh = ~self.written[rows]
        if fresh.any():
            self.add(rows[fresh], cols, block[fresh])
            self.written[rows[fresh]] = True

    def tocsr(self) -> csr_matrix:
        if self.rows:
            rows, cols = np.concatenate(self.rows), np.concatenate(self.cols)
            vals = np.concatenate(self.vals)
        else:
            rows = cols = np.zeros(0, dtype=int)
            vals = np.zeros(0)
        matrix = coo_matrix((vals, (rows, cols)), shape=self.shape).tocsr()
        matrix.sum_duplicates()
        matrix.sort_indices()
        return matrix


@dataclass
class Discretisation:
    """One mesh and degree: quadrature, layouts and a cache of assembled operators."""

    mesh: PolyMesh
    k: int
    quadrature_margin: int = C.DEFAULT_QUADRATURE_MARGIN
    _operators: Dict[str, GlobalOperator] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.k <= C.DEFAULT_K_MAX:
            raise E.UnsupportedDegreeError(f"k must lie in 0..{C.DEFAULT_K_MAX}, got {self.k}")
        self.quad = MeshQuadrature(self.mesh, 2 * self.k + self.quadrature_margin)

    def layout(self, space: str) -> DofLayout:
        return DofLayout(space, self.mesh, self.k)

    def cells(self) -> List[LocalCell]:
        return self.quad.cells()

    def operator(self, tag: str) -> GlobalOperator:
        if tag not in self._operators:
            if tag not in BUILDERS:
                raise E.UnknownOperatorError(f"unknown operator tag: {tag}")
            source, target, build = BUILDERS[tag]
            matrix = build(self)
            self._operators[tag] = GlobalOperator(
                tag, self.layout(source), self.layout(target), matrix, self.k, self.mesh.name
            )
        return self._operators[tag]

    def __getitem__(self, tag: str) -> GlobalOperator:
        return self.operator(tag)


def _cell_operator(
    disc: Discretisation,
    source: str,
    target: str,
    local: Callable[[LocalCell, int], np.ndarray],
    interface: bool = False,
) -> csr_matrix:
    """Scatter cell-local matrices; target rows are the full cell-local block."""
    src, dst = disc.layout(source), disc.layout(target)
    triplets = Triplets((dst.dim, src.dim))

    for cell in disc.cells():
        rows = dst.cell_local(cell.index) if interface else dst.cell_dofs(cell.index)
        cols = src.cell_local(cell.index)
        triplets.add_once(rows, cols, local(cell, disc.k))

    return triplets.tocsr()


def _sum_cells(
    disc: Discretisation, space: str, local: Callable[[LocalCell, int], np.ndarray]
) -> csr_matrix:
    layout = disc.layout(space)
    triplets = Triplets((layout.dim, layout.dim))
    for cell in disc.cells():
        dofs = layout.cell_local(cell.index)
        triplets.add(dofs, dofs, local(cell, disc.k))
    return triplets.tocsr()


def _sgrad(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_Sgrad", "X_Srot", sgrad_local_matrix, interface=True)


def _srot(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_Srot", "P_k", srot_matrix)


def tgrad_local_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_ddr,grad -> cell-local X_ddr,rot."""
    src, dst = GradLocal(cell, k), RotLocal(cell, k)
    matrix = np.zeros((dst.size, src.size))
    position = {v: i for i, v in enumerate(cell.vertices)}

    for j, edge in enumerate(cell.edges):
        a, b = (position[v] for v in edge.endpoints)
        columns = np.concatenate(
            [[2 * a, 2 * a + 1, 2 * b, 2 * b + 1], src.edge(j, 0), src.edge(j, 1)]
        )
        rows = np.concatenate([dst.edge(j, 0), dst.edge(j, 1)])
        matrix[np.ix_(rows, columns)] = ddr_edge_gradient_matrix(edge, k)

    rows = np.concatenate([dst.cell_block(b) for b in range(4)])
    matrix[rows] = ddr_element_gradient_matrix(cell, k)
    return matrix


def _tgrad(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_ddr_grad", "X_ddr_rot", tgrad_local_matrix, interface=True)


def _trot(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_ddr_rot", "P_kp1_vec", ddr_element_rot_matrix)


def _sskw(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_ddr_rot", "P_k", sskw_matrix)


def _embed_sym(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "X_ddr_rot_sym", "X_ddr_rot", sym_embedding, interface=True)


def _hess(disc: Discretisation) -> csr_matrix:
    return (disc["tGRAD"].matrix @ disc["SGRAD"].matrix).tocsr()


def _trot_sym(disc: Discretisation) -> csr_matrix:
    return (disc["tROT"].matrix @ disc["Embed_sym"].matrix).tocsr()


def _g0(disc: Discretisation) -> csr_matrix:
    mesh = disc.mesh
    triplets = Triplets((mesh.num_edges, mesh.num_vertices))
    for edge, (a, b) in enumerate(mesh.edges):
        h = mesh.h_E[edge]
        triplets.add(np.array([edge]), np.array([a, b]), np.array([[-1.0 / h, 1.0 / h]]))
    return triplets.tocsr()


def _c0(disc: Discretisation) -> csr_matrix:
    mesh = disc.mesh
    triplets = Triplets((mesh.num_cells, mesh.num_edges))
    for cell in disc.cells():
        triplets.add(
            np.array([cell.index]),
            np.array(mesh.cell_edges(cell.index)),
            c0_row(cell)[None, :],
        )
    return triplets.tocsr()


def cell_averages(cell: LocalCell, k: int) -> np.ndarray:
    """P^k(T) coefficients -> cell average."""
    phi = cell.values("scalar", "full", k)[:, :, 0]
    return (phi @ cell.rule.weights)[None, :] / cell.area


def constant_embedding(cell: LocalCell, k: int) -> np.ndarray:
    """Cell value -> P^k(T) coefficients of that constant."""
    phi = cell.values("scalar", "full", k)[:, :, 0]
    return (phi @ cell.rule.weights)[:, None]


def _pi0(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "P_k", "P0", cell_averages)


def _i0(disc: Discretisation) -> csr_matrix:
    return _cell_operator(disc, "P0", "P_k", constant_embedding)


def _identity(space: str) -> Callable[[Discretisation], csr_matrix]:
    def build(disc: Discretisation) -> csr_matrix:
        return identity(disc.layout(space).dim, format="csr")

    return build


def _gram_sgrad(disc: Discretisation) -> csr_matrix:
    return _sum_cells(disc, "X_Sgrad", lambda cell, k: potentials.local_products(cell, k)["X_Sgrad"].product)


def _gram_srot(disc: Discretisation) -> csr_matrix:
    return _sum_cells(disc, "X_Srot", lambda cell, k: potentials.local_products(cell, k)["X_Srot"].product)


def _norm_sgrad(disc: Discretisation) -> csr_matrix:
    return _sum_cells(
        disc, "X_Sgrad", lambda cell, k: np.diag(potentials.stokes_component_weights(cell, k))
    )


def _norm_srot(disc: Discretisation) -> csr_matrix:
    return _sum_cells(
        disc, "X_Srot", lambda cell, k: np.diag(potentials.grad_component_weights(cell, k))
    )


def _mass(space: str, value_kind: str, shift: int) -> Callable[[Discretisation], csr_matrix]:
    def build(disc: Discretisation) -> csr_matrix:
        return _sum_cells(
            disc, space, lambda cell, k: cell.mass(value_kind, "full", k + shift)
        )

    return build


def _gram_ddr0_grad(disc: Discretisation) -> csr_matrix:
    return _sum_cells(
        disc, "DDR0_grad", lambda cell, k: cell.h ** 2 * np.eye(len(cell.vertices))
    )


def _gram_ddr0_curl(disc: Discretisation) -> csr_matrix:
    return _sum_cells(
        disc, "DDR0_curl", lambda cell, k: np.diag([cell.h * edge.h for edge in cell.edges])
    )


def _gram_p0(disc: Discretisation) -> csr_matrix:
    return _sum_cells(disc, "P0", lambda cell, k: np.array([[cell.area]]))


def _transfer(name: str) -> Callable[[Discretisation], csr_matrix]:
    def build(disc: Discretisation) -> csr_matrix:
        from . import transfer

        return getattr(transfer, f"assemble_{name}")(disc)

    return build


Builder = Tuple[str, str, Callable[[Discretisation], csr_matrix]]

BUILDERS: Dict[str, Builder] = {
    "SGRAD": ("X_Sgrad", "X_Srot", _sgrad),
    "SROT": ("X_Srot", "P_k", _srot),
    "tGRAD": ("X_ddr_grad", "X_ddr_rot", _tgrad),
    "tROT": ("X_ddr_rot", "P_kp1_vec", _trot),
    "sskw": ("X_ddr_rot", "P_k", _sskw),
    "Hess": ("X_Sgrad", "X_ddr_rot", _hess),
    "Embed_sym": ("X_ddr_rot_sym", "X_ddr_rot", _embed_sym),
    "tROT_sym": ("X_ddr_rot_sym", "P_kp1_vec", _trot_sym),
    "Id_Srot": ("X_Srot", "X_ddr_grad", _identity("X_Srot")),
    "G0": ("DDR0_grad", "DDR0_curl", _g0),
    "C0": ("DDR0_curl", "P0", _c0),
    "Pi0": ("P_k", "P0", _pi0),
    "I0": ("P0", "P_k", _i0),
    "R_grad": ("X_Sgrad", "DDR0_grad", _transfer("reduce_grad")),
    "R_rot": ("X_Srot", "DDR0_curl", _transfer("reduce_rot")),
    "E_grad": ("DDR0_grad", "X_Sgrad", _transfer("extend_grad")),
    "E_rot": ("DDR0_curl", "X_Srot", _transfer("extend_rot")),
    "gram_Sgrad": ("X_Sgrad", "X_Sgrad", _gram_sgrad),
    "gram_Srot": ("X_Srot", "X_Srot", _gram_srot),
    "norm_Sgrad": ("X_Sgrad", "X_Sgrad", _norm_sgrad),
    "norm_Srot": ("X_Srot", "X_Srot", _norm_srot),
    "mass_Pk": ("P_k", "P_k", _mass("P_k", "scalar", 0)),
    "mass_Pkp1_vec": ("P_kp1_vec", "P_kp1_vec", _mass("P_kp1_vec", "vector", 1)),
    "gram_ddr0_grad": ("DDR0_grad", "DDR0_grad", _gram_ddr0_grad),
    "gram_ddr0_curl": ("DDR0_curl", "DDR0_curl", _gram_ddr0_curl),
    "gram_P0": ("P0", "P0", _gram_p0),
}


def assemble(
    tag: str, mesh: Union[PolyMesh, Discretisation], k: Optional[int] = None
) -> GlobalOperator:
    if isinstance(mesh, Discretisation):
        if k is not None and k != mesh.k:
            raise E.LayoutMismatchError(f"discretisation has k={mesh.k}, asked for k={k}")
        return mesh.operator(tag)

    if tag not in BUILDERS:
        raise E.UnknownOperatorError(f"unknown operator tag: {tag}")

    return Discretisation(mesh, 0 if k is None else k).operator(tag)


def operator_tags() -> Iterable[str]:
    return sorted(BUILDERS)
