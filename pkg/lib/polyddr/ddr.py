"""Tensorised DDR(k+1) spaces and operators, and the lowest-order DDR(0) complex.

Local operator builders return dense matrices acting on entity-local
coefficient vectors ordered as in ``DofLayout.edge_local`` and
``DofLayout.cell_local``.
"""
from typing import Callable, Dict, List, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .layout import DofLayout
from .mesh import PolyMesh
from .polyquad import LocalCell, LocalEdge, MeshQuadrature, dim_poly, solve_spd


Field = Callable[[np.ndarray], np.ndarray]


def quadrature_for(source: Union[PolyMesh, MeshQuadrature], k: int) -> MeshQuadrature:
    if isinstance(source, MeshQuadrature):
        return source
    return MeshQuadrature(source, 2 * k + 8)


def cached(cell, key, build):
    if key not in cell._cache:
        cell._cache[key] = build()
    return cell._cache[key]


def edge_derivative_matrix(edge: LocalEdge, value_degree: int, out_degree: int) -> np.ndarray:
    """[q_a, q_b, q_E] -> G in P^out(E) with int G r = -int q_E r' + [q r]_a^b."""
    r = edge.values(out_degree)
    dr = edge.derivative_values(out_degree)
    ends = edge.endpoint_values(out_degree)
    phi = edge.values(value_degree)

    rhs = np.zeros((r.shape[0], 2 + phi.shape[0]))
    rhs[:, 0] = -ends[:, 0]
    rhs[:, 1] = ends[:, 1]
    rhs[:, 2:] = -(dr * edge.rule.weights) @ phi.T

    return solve_spd(edge.mass(out_degree), rhs)


def element_gradient_matrix(
    cell: LocalCell, cell_degree: int, edge_degree: int, out_degree: int
) -> np.ndarray:
    """Scalar data [q_T, q_E per edge] -> G in P^out(T)^2 by integration by parts."""
    w = cell.values("vector", "full", out_degree)
    div_w = np.einsum("bpcc->bp", cell.gradients("vector", "full", out_degree))
    phi = cell.values("scalar", "full", cell_degree)[:, :, 0]

    blocks = [-(div_w * cell.rule.weights) @ phi.T]

    for local_edge, omega in zip(cell.edges, cell.omegas):
        w_edge = cell.values_at(local_edge.rule.points, "vector", "full", out_degree)
        w_n = w_edge @ local_edge.normal
        psi = local_edge.values(edge_degree)
        blocks.append(omega * (w_n * local_edge.rule.weights) @ psi.T)

    rhs = np.concatenate(blocks, axis=1)
    return solve_spd(cell.mass("vector", "full", out_degree), rhs)


def scalar_rot_matrix(
    cell: LocalCell, cell_degree: int, edge_degree: int, out_degree: int
) -> np.ndarray:
    """[v_T (vector), tangential v_E per edge] -> R in P^out(T)."""
    grads = cell.gradients("scalar", "full", out_degree)[:, :, 0, :]
    curl_r = np.stack([grads[..., 1], -grads[..., 0]], axis=-1)
    v = cell.values("vector", "full", cell_degree)

    blocks = [cell.inner(curl_r, v)]

    for local_edge, omega in zip(cell.edges, cell.omegas):
        r_edge = cell.values_at(local_edge.rule.points, "scalar", "full", out_degree)[:, :, 0]
        psi = local_edge.values(edge_degree)
        blocks.append(-omega * (r_edge * local_edge.rule.weights) @ psi.T)

    rhs = np.concatenate(blocks, axis=1)
    return solve_spd(cell.mass("scalar", "full", out_degree), rhs)


def _split_cell_matrix(matrix: np.ndarray, cell_size: int, edge_sizes: List[int]):
    parts, start = [matrix[:, :cell_size]], cell_size
    for size in edge_sizes:
        parts.append(matrix[:, start : start + size])
        start += size
    return parts


class GradLocal:
    """Index helper for a cell-local X_ddr,grad(k+1) vector."""

    def __init__(self, cell: LocalCell, k: int) -> None:
        self.nv = len(cell.vertices)
        self.ne = len(cell.edges)
        self.edge_dim = k + 1
        self.cell_dim = dim_poly(k - 1)
        self.size = 2 * self.nv + 2 * self.ne * self.edge_dim + 2 * self.cell_dim

    def vertex(self, i: int, c: int) -> int:
        return 2 * i + c

    def edge(self, j: int, c: int) -> np.ndarray:
        start = 2 * self.nv + 2 * j * self.edge_dim + c * self.edge_dim
        return np.arange(start, start + self.edge_dim)

    def cell(self, c: int) -> np.ndarray:
        start = 2 * self.nv + 2 * self.ne * self.edge_dim + c * self.cell_dim
        return np.arange(start, start + self.cell_dim)


class RotLocal:
    """Index helper for a cell-local X_ddr,rot(k+1) vector."""

    def __init__(self, cell: LocalCell, k: int, sym: bool = False) -> None:
        self.ne = len(cell.edges)
        self.edge_dim = k + 2
        self.block = dim_poly(k)
        self.size = 2 * self.ne * self.edge_dim + (3 if sym else 4) * self.block

    def edge(self, j: int, c: int) -> np.ndarray:
        start = 2 * j * self.edge_dim + c * self.edge_dim
        return np.arange(start, start + self.edge_dim)

    def cell_block(self, b: int) -> np.ndarray:
        start = 2 * self.ne * self.edge_dim + b * self.block
        return np.arange(start, start + self.block)


def ddr_edge_gradient_matrix(edge: LocalEdge, k: int) -> np.ndarray:
    """Edge-local [v_a (2), v_b (2), v_E (2 (k+1))] -> P^(k+1)(E)^2."""
    scalar = edge_derivative_matrix(edge, k, k + 1)
    n_out, n_in = k + 2, k + 1
    matrix = np.zeros((2 * n_out, 4 + 2 * n_in))

    for c in range(2):
        rows = slice(c * n_out, (c + 1) * n_out)
        matrix[rows, c] = scalar[:, 0]
        matrix[rows, 2 + c] = scalar[:, 1]
        matrix[rows, 4 + c * n_in : 4 + (c + 1) * n_in] = scalar[:, 2:]

    return matrix


def ddr_edge_gradient(vE_local: np.ndarray, edge: LocalEdge, k: int) -> np.ndarray:
    return ddr_edge_gradient_matrix(edge, k) @ vE_local


def ddr_element_gradient_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_ddr,grad vector -> P^k(T)^(2x2) coefficients."""

    def build() -> np.ndarray:
        idx = GradLocal(cell, k)
        scalar = element_gradient_matrix(cell, k - 1, k, k)
        cell_part, *edge_parts = _split_cell_matrix(
            scalar, dim_poly(k - 1), [k + 1] * idx.ne
        )
        block = dim_poly(k)
        matrix = np.zeros((4 * block, idx.size))

        for row in range(2):
            rows = slice(2 * row * block, 2 * (row + 1) * block)
            matrix[rows, idx.cell(row)] = cell_part
            for j, part in enumerate(edge_parts):
                matrix[rows, idx.edge(j, row)] = part

        return matrix

    return cached(cell, ("ddr_element_gradient", k), build)


def ddr_element_gradient(vT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return ddr_element_gradient_matrix(cell, k) @ vT_local


def ddr_element_rot_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_ddr,rot vector -> P^(k+1)(T)^2 coefficients (row-wise rot)."""

    def build() -> np.ndarray:
        idx = RotLocal(cell, k)
        scalar = scalar_rot_matrix(cell, k, k + 1, k + 1)
        cell_part, *edge_parts = _split_cell_matrix(
            scalar, 2 * dim_poly(k), [k + 2] * idx.ne
        )
        out = dim_poly(k + 1)
        matrix = np.zeros((2 * out, idx.size))

        for row in range(2):
            rows = slice(row * out, (row + 1) * out)
            columns = np.concatenate([idx.cell_block(2 * row), idx.cell_block(2 * row + 1)])
            matrix[rows, columns] = cell_part
            for j, part in enumerate(edge_parts):
                matrix[rows, idx.edge(j, row)] = part

        return matrix

    return cached(cell, ("ddr_element_rot", k), build)


def ddr_element_rot(tauT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return ddr_element_rot_matrix(cell, k) @ tauT_local


def sskw_matrix(cell: LocalCell, k: int) -> np.ndarray:
    idx = RotLocal(cell, k)
    matrix = np.zeros((idx.block, idx.size))
    matrix[:, idx.cell_block(1)] = np.eye(idx.block)
    matrix[:, idx.cell_block(2)] = -np.eye(idx.block)
    return matrix


def sskw_element(tauT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return sskw_matrix(cell, k) @ tauT_local


def sym_embedding(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_ddr,rot,sym -> X_ddr,rot, orthonormal columns."""
    sym = RotLocal(cell, k, sym=True)
    full = RotLocal(cell, k)
    matrix = np.zeros((full.size, sym.size))
    edges = 2 * sym.ne * sym.edge_dim
    matrix[:edges, :edges] = np.eye(edges)

    eye, root = np.eye(sym.block), 1.0 / np.sqrt(2.0)
    s11, s12, s22 = (np.arange(b * sym.block, (b + 1) * sym.block) + edges for b in range(3))
    matrix[np.ix_(full.cell_block(0), s11)] = eye
    matrix[np.ix_(full.cell_block(1), s12)] = root * eye
    matrix[np.ix_(full.cell_block(2), s12)] = root * eye
    matrix[np.ix_(full.cell_block(3), s22)] = eye

    return matrix


def interpolate_ddr_grad(v: Field, mesh, k: int) -> np.ndarray:
    quad = quadrature_for(mesh, k)
    layout = DofLayout("X_Srot", quad.mesh, k)
    out = np.zeros(layout.dim)

    out[: layout.edge_offset] = np.asarray(v(quad.mesh.vertices)).reshape(-1)

    for edge in quad.edges():
        values = np.asarray(v(edge.rule.points))
        out[layout.edge_dofs(edge.index)] = edge.project(k, values).T.reshape(-1)

    for cell in quad.cells():
        values = np.asarray(v(cell.rule.points))
        out[layout.cell_dofs(cell.index)] = cell.project("vector", "full", k - 1, values)

    return out


def interpolate_ddr_rot(tau: Field, mesh, k: int) -> np.ndarray:
    quad = quadrature_for(mesh, k)
    layout = DofLayout("X_ddr_rot", quad.mesh, k)
    out = np.zeros(layout.dim)

    for edge in quad.edges():
        values = np.asarray(tau(edge.rule.points)) @ edge.tangent
        out[layout.edge_dofs(edge.index)] = edge.project(k + 1, values).T.reshape(-1)

    for cell in quad.cells():
        values = np.asarray(tau(cell.rule.points)).reshape(-1, 4)
        out[layout.cell_dofs(cell.index)] = cell.project("matrix", "full", k, values)

    return out


def gamma0_matrix(cell: LocalCell) -> np.ndarray:
    """DDR0_curl edge values of the cell -> constant vector gamma^0_T v (2 x n_edges)."""

    def build() -> np.ndarray:
        grads = cell.gradients("scalar", "zero_average", 1)[:, :, 0, :]
        curl_r = np.stack([grads[..., 1], -grads[..., 0]], axis=-1)
        lhs = np.einsum("ipc,p->ic", curl_r, cell.rule.weights)

        r_mean = cell.values("scalar", "zero_average", 1)[:, :, 0] @ cell.rule.weights
        c0 = c0_row(cell)
        rhs = np.outer(r_mean, c0)

        for j, (local_edge, omega) in enumerate(zip(cell.edges, cell.omegas)):
            r_edge = cell.values_at(local_edge.rule.points, "scalar", "zero_average", 1)
            rhs[:, j] += omega * r_edge[:, :, 0] @ local_edge.rule.weights

        return np.linalg.solve(lhs, rhs)

    return cached(cell, ("gamma0",), build)


def c0_row(cell: LocalCell) -> np.ndarray:
    return -np.array(
        [omega * edge.h for edge, omega in zip(cell.edges, cell.omegas)]
    ) / cell.area


class Ddr0Ops:
    """Assembled lowest-order complex: G0 (vertices -> edges), C0 (edges -> cells)."""

    def __init__(self, quad: MeshQuadrature) -> None:
        self.quad: MeshQuadrature = quad
        mesh = quad.mesh
        self.G0: csr_matrix = self._assemble_g0(mesh)
        self.C0: csr_matrix = self._assemble_c0(quad)

    @staticmethod
    def _assemble_g0(mesh: PolyMesh) -> csr_matrix:
        rows, cols, vals = [], [], []
        for edge, (a, b) in enumerate(mesh.edges):
            rows += [edge, edge]
            cols += [a, b]
            vals += [-1.0 / mesh.h_E[edge], 1.0 / mesh.h_E[edge]]
        return coo_matrix(
            (vals, (rows, cols)), shape=(mesh.num_edges, mesh.num_vertices)
        ).tocsr()

    @staticmethod
    def _assemble_c0(quad: MeshQuadrature) -> csr_matrix:
        mesh = quad.mesh
        rows, cols, vals = [], [], []
        for cell in quad.cells():
            edges = mesh.cell_edges(cell.index)
            rows += [cell.index] * len(edges)
            cols += edges
            vals += list(c0_row(cell))
        return coo_matrix(
            (vals, (rows, cols)), shape=(mesh.num_cells, mesh.num_edges)
        ).tocsr()

    def interpolate_grad(self, q: Field) -> np.ndarray:
        return np.asarray(q(self.quad.mesh.vertices), dtype=float).reshape(-1)

    def interpolate_curl(self, v: Field) -> np.ndarray:
        out = np.zeros(self.quad.mesh.num_edges)
        for edge in self.quad.edges():
            tangential = np.asarray(v(edge.rule.points)) @ edge.tangent
            out[edge.index] = edge.rule.weights @ tangential / edge.h
        return out

    def gamma0(self, cell: int, v: np.ndarray) -> np.ndarray:
        local = self.quad.cell(cell)
        return gamma0_matrix(local) @ v[self.quad.mesh.cell_edges(cell)]


def ddr0_ops(mesh, k: int = 0) -> Ddr0Ops:
    return Ddr0Ops(quadrature_for(mesh, k))


def ddr_commutation_residual(
    quad: MeshQuadrature, k: int, v: Field, grad_v: Field
) -> Dict[str, float]:
    """Local tGRAD(I v) - I_rot(grad v) per cell and edge, max-entry."""
    grad_layout = DofLayout("X_Srot", quad.mesh, k)
    rot_layout = DofLayout("X_ddr_rot", quad.mesh, k)
    iv = interpolate_ddr_grad(v, quad, k)
    itau = interpolate_ddr_rot(grad_v, quad, k)
    worst = 0.0

    for edge in quad.edges():
        local = iv[grad_layout.edge_local(edge.index)]
        residual = ddr_edge_gradient(local, edge, k) - itau[rot_layout.edge_dofs(edge.index)]
        worst = max(worst, float(np.abs(residual).max(initial=0.0)))

    for cell in quad.cells():
        local = iv[grad_layout.cell_local(cell.index)]
        residual = ddr_element_gradient(local, cell, k) - itau[rot_layout.cell_dofs(cell.index)]
        worst = max(worst, float(np.abs(residual).max(initial=0.0)))

    return {"ddr_commutation": worst}
