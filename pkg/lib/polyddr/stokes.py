"""The discrete Stokes complex DS(k): X_Sgrad -> X_Srot -> P^k(T_h).

X_Srot is stored with the X_ddr,grad(k+1) layout, so the identity arrow
between the two complexes needs no data movement.
"""
from typing import Callable, Dict

import numpy as np

from .ddr import (
    GradLocal,
    _split_cell_matrix,
    cached,
    edge_derivative_matrix,
    element_gradient_matrix,
    quadrature_for,
    scalar_rot_matrix,
)
from .layout import DofLayout
from .polyquad import LocalCell, LocalEdge, dim_poly


Field = Callable[[np.ndarray], np.ndarray]


class StokesLocal:
    """Index helper for a cell-local X_Sgrad vector."""

    def __init__(self, cell: LocalCell, k: int) -> None:
        self.nv = len(cell.vertices)
        self.ne = len(cell.edges)
        self.k = k
        self.q_edge = max(k, 0)
        self.edge_dim = self.q_edge + k + 1
        self.cell_dim = dim_poly(k - 2)
        self.size = 3 * self.nv + self.ne * self.edge_dim + self.cell_dim
        self.vertex_position = {v: i for i, v in enumerate(cell.vertices)}

    def q_vertex(self, i: int) -> int:
        return 3 * i

    def g_vertex(self, i: int) -> np.ndarray:
        return np.array([3 * i + 1, 3 * i + 2])

    def q_edge_dofs(self, j: int) -> np.ndarray:
        start = 3 * self.nv + j * self.edge_dim
        return np.arange(start, start + self.q_edge)

    def gn_edge_dofs(self, j: int) -> np.ndarray:
        start = 3 * self.nv + j * self.edge_dim + self.q_edge
        return np.arange(start, start + self.k + 1)

    def edge_block(self, j: int) -> np.ndarray:
        start = 3 * self.nv + j * self.edge_dim
        return np.arange(start, start + self.edge_dim)

    def cell(self) -> np.ndarray:
        start = 3 * self.nv + self.ne * self.edge_dim
        return np.arange(start, start + self.cell_dim)

    def edge_local_columns(self, j: int, edge: LocalEdge) -> np.ndarray:
        """Positions of the edge-local [a, b, edge] vector inside the cell-local one."""
        a, b = edge.endpoints
        ia, ib = self.vertex_position[a], self.vertex_position[b]
        return np.concatenate(
            [np.arange(3 * ia, 3 * ia + 3), np.arange(3 * ib, 3 * ib + 3), self.edge_block(j)]
        )


def tangential_gradient_matrix(edge: LocalEdge, k: int) -> np.ndarray:
    """Edge-local X_Sgrad [a (3), b (3), q_E, G^n] -> G^t in P^k(E)."""
    scalar = edge_derivative_matrix(edge, k - 1, k)
    q_edge = max(k, 0)
    matrix = np.zeros((k + 1, 6 + q_edge + k + 1))
    matrix[:, 0] = scalar[:, 0]
    matrix[:, 3] = scalar[:, 1]
    matrix[:, 6 : 6 + q_edge] = scalar[:, 2:]
    return matrix


def tangential_gradient(qE_local: np.ndarray, edge: LocalEdge, k: int) -> np.ndarray:
    return tangential_gradient_matrix(edge, k) @ qE_local


def sgrad_edge_matrix(edge: LocalEdge, k: int) -> np.ndarray:
    """Edge-local X_Sgrad -> X_Srot edge block: G^t t_E + G^n n_E."""
    tangential = tangential_gradient_matrix(edge, k)
    n_in = tangential.shape[1]
    normal = np.zeros((k + 1, n_in))
    normal[:, n_in - (k + 1) :] = np.eye(k + 1)

    return np.concatenate(
        [edge.tangent[c] * tangential + edge.normal[c] * normal for c in range(2)]
    )


def stokes_element_gradient_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Sgrad -> P^(k-1)(T)^2 coefficients."""

    def build() -> np.ndarray:
        idx = StokesLocal(cell, k)
        scalar = element_gradient_matrix(cell, k - 2, k - 1, k - 1)
        cell_part, *edge_parts = _split_cell_matrix(scalar, idx.cell_dim, [idx.q_edge] * idx.ne)
        matrix = np.zeros((scalar.shape[0], idx.size))
        matrix[:, idx.cell()] = cell_part
        for j, part in enumerate(edge_parts):
            matrix[:, idx.q_edge_dofs(j)] = part
        return matrix

    return cached(cell, ("stokes_element_gradient", k), build)


def stokes_element_gradient(qT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return stokes_element_gradient_matrix(cell, k) @ qT_local


def sgrad_local_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Sgrad -> cell-local X_Srot (vertex, edge and cell parts)."""

    def build() -> np.ndarray:
        src = StokesLocal(cell, k)
        dst = GradLocal(cell, k)
        matrix = np.zeros((dst.size, src.size))

        for i in range(src.nv):
            for c in range(2):
                matrix[dst.vertex(i, c), src.g_vertex(i)[c]] = 1.0

        for j, edge in enumerate(cell.edges):
            edge_matrix = sgrad_edge_matrix(edge, k)
            columns = src.edge_local_columns(j, edge)
            rows = np.concatenate([dst.edge(j, 0), dst.edge(j, 1)])
            matrix[np.ix_(rows, columns)] += edge_matrix

        rows = np.concatenate([dst.cell(0), dst.cell(1)])
        matrix[rows, :] = stokes_element_gradient_matrix(cell, k)
        return matrix

    return cached(cell, ("sgrad_local", k), build)


def sgrad_local(qT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return sgrad_local_matrix(cell, k) @ qT_local


def srot_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Srot -> P^k(T) coefficients."""

    def build() -> np.ndarray:
        idx = GradLocal(cell, k)
        scalar = scalar_rot_matrix(cell, k - 1, k, k)
        cell_part, *edge_parts = _split_cell_matrix(scalar, 2 * idx.cell_dim, [k + 1] * idx.ne)
        matrix = np.zeros((scalar.shape[0], idx.size))
        matrix[:, np.concatenate([idx.cell(0), idx.cell(1)])] = cell_part

        for j, (edge, part) in enumerate(zip(cell.edges, edge_parts)):
            for c in range(2):
                matrix[:, idx.edge(j, c)] += edge.tangent[c] * part

        return matrix

    return cached(cell, ("srot", k), build)


def srot_element(vT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return srot_matrix(cell, k) @ vT_local


def interpolate_stokes(q: Field, grad_q: Field, mesh, k: int) -> np.ndarray:
    quad = quadrature_for(mesh, k)
    layout = DofLayout("X_Sgrad", quad.mesh, k)
    out = np.zeros(layout.dim)
    vertices = quad.mesh.vertices

    vertex_block = np.zeros((quad.mesh.num_vertices, 3))
    vertex_block[:, 0] = np.asarray(q(vertices)).reshape(-1)
    vertex_block[:, 1:] = np.asarray(grad_q(vertices)).reshape(-1, 2)
    out[: layout.edge_offset] = vertex_block.reshape(-1)

    for edge in quad.edges():
        points = edge.rule.points
        normal_derivative = np.asarray(grad_q(points)) @ edge.normal
        out[layout.edge_dofs(edge.index)] = np.concatenate(
            [edge.project(k - 1, np.asarray(q(points))), edge.project(k, normal_derivative)]
        )

    for cell in quad.cells():
        values = np.asarray(q(cell.rule.points))
        out[layout.cell_dofs(cell.index)] = cell.project("scalar", "full", k - 2, values)

    return out


def split_sgrad_edge(edge: LocalEdge, qE_local: np.ndarray, k: int) -> Dict[str, np.ndarray]:
    """Tangential and normal pieces of the SGRAD edge block."""
    tangential = tangential_gradient(qE_local, edge, k)
    normal = qE_local[-(k + 1) :]
    block = sgrad_edge_matrix(edge, k) @ qE_local
    return {"tangential": tangential, "normal": normal, "block": block}
