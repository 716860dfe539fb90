"""Liftings, potential reconstructions and L2-like products on DS(k).

Every reconstruction is returned as a dense matrix acting on a cell-local
coefficient vector; the ``*_matrix`` builders are cached on the cell.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg

from . import errors as E
from .ddr import GradLocal, RotLocal, cached, ddr_element_rot_matrix
from .logger import cell_logger
from .polyquad import LocalCell, LocalEdge, dim_poly, solve_spd, solve_square
from .stokes import StokesLocal, sgrad_local_matrix, srot_matrix


RANK_TOL = 1e-10


def constrained_lifting(
    cell: LocalCell,
    constraint: np.ndarray,
    constraint_rhs: np.ndarray,
    penalty: np.ndarray,
    penalty_rhs: np.ndarray,
) -> np.ndarray:
    """Minimise c' H c - 2 c' F x subject to A c = B x; returns the map x -> c."""
    n = penalty.shape[0]

    if constraint.shape[0]:
        particular = np.linalg.pinv(constraint) @ constraint_rhs
        kernel = scipy.linalg.null_space(constraint, rcond=RANK_TOL)
    else:
        particular = np.zeros((n, constraint_rhs.shape[1]))
        kernel = np.eye(n)

    if kernel.shape[1] == 0:
        return particular

    reduced = kernel.T @ penalty @ kernel
    eigenvalues = np.linalg.eigvalsh(reduced)

    if eigenvalues.min() <= RANK_TOL * max(eigenvalues.max(), 1.0):
        cell_logger(cell.index).error("constrained lifting is rank deficient")
        raise E.LiftingRankError(f"cell {cell.index}: lifting is not unique")

    correction = solve_spd(reduced, kernel.T @ (penalty_rhs - penalty @ particular))
    return particular + kernel @ correction


def _edge_trace_system(edge: LocalEdge, degree: int, moment_degree: int, slopes: bool):
    """Rows: moments up to moment_degree, values at a and b, optionally slopes at a and b."""
    basis = edge.values(degree)
    rows = [(edge.values(moment_degree) * edge.rule.weights) @ basis.T]
    rows.append(edge.endpoint_values(degree).T)
    if slopes:
        rows.append(edge.endpoint_derivatives(degree).T)
    system = np.concatenate(rows)

    if system.shape[0] != system.shape[1]:
        raise ValueError(f"edge {edge.index}: trace system is not square")

    return system


def edge_trace_matrix(edge: LocalEdge, degree: int, moment_degree: int, slopes: bool = False):
    """Inverse of the trace system: conditions -> P^degree(E) coefficients."""
    return solve_square(
        _edge_trace_system(edge, degree, moment_degree, slopes), np.eye(degree + 1)
    )


def _edge_vector_gram(cell: LocalCell, edge: LocalEdge, degree: int, tangential: bool):
    values = cell.values_at(edge.rule.points, "vector", "full", degree)
    if tangential:
        values = values @ edge.tangent
    return values


def lifting_SR_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Srot -> w in P^k(T)^2 with pi^(k-1) w = v_T, boundary fit to v_E."""

    def build() -> np.ndarray:
        idx = GradLocal(cell, k)
        w = cell.values("vector", "full", k)
        n = w.shape[0]

        constraint = cell.inner(cell.values("vector", "full", k - 1), w)
        constraint_rhs = np.zeros((constraint.shape[0], idx.size))
        constraint_rhs[:, np.concatenate([idx.cell(0), idx.cell(1)])] = np.eye(
            constraint.shape[0]
        )

        penalty = np.zeros((n, n))
        penalty_rhs = np.zeros((n, idx.size))

        for j, edge in enumerate(cell.edges):
            w_edge = _edge_vector_gram(cell, edge, k, tangential=False)
            weights = edge.rule.weights / edge.h
            penalty += np.einsum("ipc,jpc,p->ij", w_edge, w_edge, weights)
            psi = edge.values(k)
            for c in range(2):
                penalty_rhs[:, idx.edge(j, c)] += (w_edge[:, :, c] * weights) @ psi.T

        return constrained_lifting(cell, constraint, constraint_rhs, penalty, penalty_rhs)

    return cached(cell, ("lifting_SR", k), build)


def lifting_SR(vT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return lifting_SR_matrix(cell, k) @ vT_local


def _curl_values(cell: LocalCell, space_kind: str, degree: int) -> np.ndarray:
    grads = cell.gradients("scalar", space_kind, degree)[:, :, 0, :]
    return np.stack([grads[..., 1], -grads[..., 0]], axis=-1)


def _div_values(cell: LocalCell, space_kind: str, degree: int) -> np.ndarray:
    return np.einsum("bpcc->bp", cell.gradients("vector", space_kind, degree))


def _edge_moments_scalar(cell: LocalCell, edge: LocalEdge, space_kind: str, degree: int, edge_degree: int):
    """int_E r_i psi_j for cell scalars r and edge basis psi."""
    r = cell.values_at(edge.rule.points, "scalar", space_kind, degree)[:, :, 0]
    return (r * edge.rule.weights) @ edge.values(edge_degree).T


def _edge_moments_normal(cell: LocalCell, edge: LocalEdge, space_kind: str, degree: int, edge_degree: int):
    """int_E (w_i . n_E) psi_j for cell vector fields w."""
    w_n = cell.values_at(edge.rule.points, "vector", space_kind, degree) @ edge.normal
    return (w_n * edge.rule.weights) @ edge.values(edge_degree).T


def pot_rot_k_matrix(cell: LocalCell, k: int, lifting: Optional[np.ndarray] = None) -> np.ndarray:
    """Cell-local X_Srot -> P in P^k(T)^2 (Roly part from SROT, cRoly part from the lifting)."""

    def build(lifting: np.ndarray) -> np.ndarray:
        idx = GradLocal(cell, k)
        basis = cell.values("vector", "full", k)
        curl_r = _curl_values(cell, "zero_average", k + 1)
        croly = cell.values("vector", "croly", k)

        lhs = np.concatenate([cell.inner(curl_r, basis), cell.inner(croly, basis)])

        r = cell.values("scalar", "zero_average", k + 1)
        srot_basis = cell.values("scalar", "full", k)
        rhs_r = cell.inner(r, srot_basis) @ srot_matrix(cell, k)

        for j, (edge, omega) in enumerate(zip(cell.edges, cell.omegas)):
            moments = _edge_moments_scalar(cell, edge, "zero_average", k + 1, k)
            for c in range(2):
                rhs_r[:, idx.edge(j, c)] += omega * edge.tangent[c] * moments

        rhs_w = cell.inner(croly, basis) @ lifting
        return solve_square(lhs, np.concatenate([rhs_r, rhs_w]))

    if lifting is not None:
        return build(lifting)

    return cached(cell, ("pot_rot_k", k), lambda: build(lifting_SR_matrix(cell, k)))


def pot_rot_k(vT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return pot_rot_k_matrix(cell, k) @ vT_local


def cell_projection_lifting(cell: LocalCell, k: int) -> np.ndarray:
    """Cell component of an X_Srot vector embedded in P^k(T)^2 (no boundary data)."""
    idx = GradLocal(cell, k)
    embed = cell.inner(cell.values("vector", "full", k), cell.values("vector", "full", k - 1))
    matrix = np.zeros((embed.shape[0], idx.size))
    matrix[:, np.concatenate([idx.cell(0), idx.cell(1)])] = embed
    return matrix


def trace_gamma_matrices(cell: LocalCell, k: int, slopes: bool = False) -> List[np.ndarray]:
    """Per edge of the cell: cell-local X_Sgrad -> trace in P^(k+1)(E) (P^(k+3)(E) with slopes)."""

    def build() -> List[np.ndarray]:
        idx = StokesLocal(cell, k)
        degree = k + 3 if slopes else k + 1
        out = []

        for j, edge in enumerate(cell.edges):
            inverse = edge_trace_matrix(edge, degree, k - 1, slopes)
            columns = idx.edge_local_columns(j, edge)
            select = np.zeros((inverse.shape[1], idx.size))
            select[: idx.q_edge, columns[6 : 6 + idx.q_edge]] = np.eye(idx.q_edge)
            select[idx.q_edge, columns[0]] = 1.0
            select[idx.q_edge + 1, columns[3]] = 1.0
            if slopes:
                select[idx.q_edge + 2, columns[1:3]] = edge.tangent
                select[idx.q_edge + 3, columns[4:6]] = edge.tangent
            out.append(inverse @ select)

        return out

    return cached(cell, ("trace_gamma", k, slopes), build)


def trace_gamma(qT_local: np.ndarray, cell: LocalCell, k: int) -> List[np.ndarray]:
    return [matrix @ qT_local for matrix in trace_gamma_matrices(cell, k)]


def _divergence_potential(
    cell: LocalCell,
    degree: int,
    gradient: np.ndarray,
    gradient_degree: int,
    traces: List[np.ndarray],
    trace_degree: int,
) -> np.ndarray:
    """Solve int P div w = -int G . w + sum omega int_E gamma (w . n) over w in cRoly^(degree+1)."""
    div_w = _div_values(cell, "croly", degree + 1)
    phi = cell.values("scalar", "full", degree)[:, :, 0]
    lhs = (div_w * cell.rule.weights) @ phi.T

    w = cell.values("vector", "croly", degree + 1)
    rhs = -cell.inner(w, cell.values("vector", "full", gradient_degree)) @ gradient

    for edge, omega, trace in zip(cell.edges, cell.omegas, traces):
        rhs += omega * _edge_moments_normal(cell, edge, "croly", degree + 1, trace_degree) @ trace

    return solve_square(lhs, rhs)


def pot_stokes_kp1_matrix(cell: LocalCell, k: int) -> np.ndarray:
    def build() -> np.ndarray:
        gradient = pot_rot_k_matrix(cell, k) @ sgrad_local_matrix(cell, k)
        return _divergence_potential(
            cell, k + 1, gradient, k, trace_gamma_matrices(cell, k), k + 1
        )

    return cached(cell, ("pot_stokes_kp1", k), build)


def pot_stokes_kp1(qT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return pot_stokes_kp1_matrix(cell, k) @ qT_local


def pot_stokes_extension_residual(qT_local: np.ndarray, cell: LocalCell, k: int) -> float:
    """The defining relation of pot_stokes_kp1 tested with w in Roly^k(T), where div w = 0."""
    w = cell.values("vector", "roly", k)
    gradient = pot_rot_k_matrix(cell, k) @ sgrad_local_matrix(cell, k) @ qT_local
    residual = -cell.inner(w, cell.values("vector", "full", k)) @ gradient

    for edge, omega, trace in zip(
        cell.edges, cell.omegas, trace_gamma(qT_local, cell, k)
    ):
        residual += omega * _edge_moments_normal(cell, edge, "roly", k, k + 1) @ trace

    return float(np.abs(residual).max(initial=0.0))


def scalar_serendipity_lifting(
    cell: LocalCell, degree: int, moment_degree: int, traces: List[np.ndarray], trace_degree: int, size: int, moments: np.ndarray
) -> np.ndarray:
    """L in P^degree(T) with pi^moment_degree L fixed and least-squares fit to edge traces."""
    phi = cell.values("scalar", "full", degree)
    n = phi.shape[0]
    constraint = cell.inner(cell.values("scalar", "full", moment_degree), phi)

    penalty = np.zeros((n, n))
    penalty_rhs = np.zeros((n, size))

    for edge, trace in zip(cell.edges, traces):
        values = cell.values_at(edge.rule.points, "scalar", "full", degree)[:, :, 0]
        weights = edge.rule.weights / edge.h
        penalty += (values * weights) @ values.T
        penalty_rhs += (values * weights) @ edge.values(trace_degree).T @ trace

    return constrained_lifting(cell, constraint, moments, penalty, penalty_rhs)


def pot_grad_kp2_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_Srot -> P^(k+2)(T)^2, one scalar reconstruction per component.

    Each component is lifted to P^(k+2)(T) and its gradient recovered by parts, so
    the interpolate of any w in P^(k+2)(T)^2 is mapped back to w exactly.
    """

    def build() -> np.ndarray:
        idx = GradLocal(cell, k)
        block = dim_poly(k + 2)
        matrix = np.zeros((2 * block, idx.size))
        w = cell.values("vector", "full", k + 1)
        div_w = _div_values(cell, "full", k + 1)
        nv_position = {v: i for i, v in enumerate(cell.vertices)}

        for c in range(2):
            traces = []
            for j, edge in enumerate(cell.edges):
                inverse = edge_trace_matrix(edge, k + 2, k)
                a, b = edge.endpoints
                select = np.zeros((k + 3, idx.size))
                select[: k + 1, idx.edge(j, c)] = np.eye(k + 1)
                select[k + 1, idx.vertex(nv_position[a], c)] = 1.0
                select[k + 2, idx.vertex(nv_position[b], c)] = 1.0
                traces.append(inverse @ select)

            moments = np.zeros((dim_poly(k - 1), idx.size))
            moments[:, idx.cell(c)] = np.eye(dim_poly(k - 1))
            lifting = scalar_serendipity_lifting(
                cell, k + 2, k - 1, traces, k + 2, idx.size, moments
            )

            # full gradient of degree k+1 by integration by parts against P^(k+1)(T)^2
            phi = cell.values("scalar", "full", k + 2)[:, :, 0]
            rhs = -((div_w * cell.rule.weights) @ phi.T) @ lifting
            for edge, omega, trace in zip(cell.edges, cell.omegas, traces):
                rhs += omega * _edge_moments_normal(cell, edge, "full", k + 1, k + 2) @ trace
            gradient = solve_spd(cell.inner(w, w), rhs)

            matrix[c * block : (c + 1) * block] = _divergence_potential(
                cell, k + 2, gradient, k + 1, traces, k + 2
            )

        return matrix

    return cached(cell, ("pot_grad_kp2", k), build)


def pot_grad_kp2(vT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return pot_grad_kp2_matrix(cell, k) @ vT_local


def pot_rot_tensor_kp1_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Cell-local X_ddr,rot -> P^(k+1)(T)^(2x2), row by row."""

    def build() -> np.ndarray:
        idx = RotLocal(cell, k)
        out_block = dim_poly(k + 1)
        matrix = np.zeros((4 * out_block, idx.size))

        basis = cell.values("vector", "full", k + 1)
        n = basis.shape[0]
        curl_r = _curl_values(cell, "zero_average", k + 2)
        croly = cell.values("vector", "croly", k + 1)
        lhs = np.concatenate([cell.inner(curl_r, basis), cell.inner(croly, basis)])

        r = cell.values("scalar", "zero_average", k + 2)
        rot_basis = cell.values("scalar", "full", k + 1)
        rot = ddr_element_rot_matrix(cell, k)

        for row in range(2):
            constraint = cell.inner(cell.values("vector", "full", k), basis)
            constraint_rhs = np.zeros((constraint.shape[0], idx.size))
            constraint_rhs[:, np.concatenate([idx.cell_block(2 * row), idx.cell_block(2 * row + 1)])] = np.eye(
                constraint.shape[0]
            )

            penalty = np.zeros((n, n))
            penalty_rhs = np.zeros((n, idx.size))
            for j, edge in enumerate(cell.edges):
                tangential = _edge_vector_gram(cell, edge, k + 1, tangential=True)
                weights = edge.rule.weights / edge.h
                penalty += (tangential * weights) @ tangential.T
                penalty_rhs[:, idx.edge(j, row)] += (tangential * weights) @ edge.values(k + 1).T

            lifting = constrained_lifting(cell, constraint, constraint_rhs, penalty, penalty_rhs)

            rows = slice(row * out_block, (row + 1) * out_block)
            rhs_r = cell.inner(r, rot_basis) @ rot[rows]
            for j, (edge, omega) in enumerate(zip(cell.edges, cell.omegas)):
                moments = _edge_moments_scalar(cell, edge, "zero_average", k + 2, k + 1)
                rhs_r[:, idx.edge(j, row)] += omega * moments

            rhs_w = cell.inner(croly, basis) @ lifting
            potential = solve_square(lhs, np.concatenate([rhs_r, rhs_w]))
            matrix[2 * row * out_block : 2 * (row + 1) * out_block] = potential

        return matrix

    return cached(cell, ("pot_rot_tensor_kp1", k), build)


def pot_rot_tensor_kp1(tauT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return pot_rot_tensor_kp1_matrix(cell, k) @ tauT_local


def pot_stokes_kp3_matrix(cell: LocalCell, k: int) -> np.ndarray:
    def build() -> np.ndarray:
        gradient = pot_grad_kp2_matrix(cell, k) @ sgrad_local_matrix(cell, k)
        traces = trace_gamma_matrices(cell, k, slopes=True)
        return _divergence_potential(cell, k + 3, gradient, k + 2, traces, k + 3)

    return cached(cell, ("pot_stokes_kp3", k), build)


def pot_stokes_kp3(qT_local: np.ndarray, cell: LocalCell, k: int) -> np.ndarray:
    return pot_stokes_kp3_matrix(cell, k) @ qT_local


def project_family(cell: LocalCell, degree: int, family: np.ndarray) -> np.ndarray:
    """Scalar P^degree(T) projections of a sampled family (n, points), shape (dim, n)."""
    phi = cell.values("scalar", "full", degree)[:, :, 0]
    return solve_spd(cell.mass("scalar", "full", degree), (phi * cell.rule.weights) @ family.T)


def stokes_interpolation_matrix(cell: LocalCell, k: int, degree: int) -> np.ndarray:
    """P^degree(T) coefficients -> cell-local X_Sgrad interpolate."""

    def build() -> np.ndarray:
        idx = StokesLocal(cell, k)
        basis = cell.basis("scalar", "full", degree)
        matrix = np.zeros((idx.size, basis.dim))
        points = cell.mesh.vertices[cell.vertices]

        values = basis.values(points)[:, :, 0]
        grads = basis.gradients(points)[:, :, 0, :]
        for i in range(idx.nv):
            matrix[idx.q_vertex(i)] = values[:, i]
            matrix[idx.g_vertex(i)] = grads[:, i, :].T

        for j, edge in enumerate(cell.edges):
            edge_values = basis.values(edge.rule.points)[:, :, 0].T
            normal = (basis.gradients(edge.rule.points)[:, :, 0, :] @ edge.normal).T
            matrix[idx.q_edge_dofs(j)] = edge.project(k - 1, edge_values)
            matrix[idx.gn_edge_dofs(j)] = edge.project(k, normal)

        matrix[idx.cell()] = project_family(cell, k - 2, cell.values("scalar", "full", degree)[:, :, 0])
        return matrix

    return cached(cell, ("stokes_interpolation", k, degree), build)


def grad_interpolation_matrix(cell: LocalCell, k: int, degree: int) -> np.ndarray:
    """P^degree(T)^2 coefficients -> cell-local X_Srot interpolate."""

    def build() -> np.ndarray:
        idx = GradLocal(cell, k)
        basis = cell.basis("vector", "full", degree)
        matrix = np.zeros((idx.size, basis.dim))
        points = cell.mesh.vertices[cell.vertices]
        values = basis.values(points)

        for i in range(idx.nv):
            for c in range(2):
                matrix[idx.vertex(i, c)] = values[:, i, c]

        for j, edge in enumerate(cell.edges):
            edge_values = basis.values(edge.rule.points)
            for c in range(2):
                matrix[idx.edge(j, c)] = edge.project(k, edge_values[:, :, c].T)

        cell_values = cell.values("vector", "full", degree)
        for c in range(2):
            matrix[idx.cell(c)] = project_family(cell, k - 1, cell_values[:, :, c])

        return matrix

    return cached(cell, ("grad_interpolation", k, degree), build)


def rot_interpolation_matrix(cell: LocalCell, k: int, degree: int) -> np.ndarray:
    """P^degree(T)^(2x2) coefficients -> cell-local X_ddr,rot interpolate."""
    idx = RotLocal(cell, k)
    basis = cell.basis("matrix", "full", degree)
    matrix = np.zeros((idx.size, basis.dim))

    for j, edge in enumerate(cell.edges):
        values = basis.values(edge.rule.points).reshape(basis.dim, -1, 2, 2) @ edge.tangent
        for c in range(2):
            matrix[idx.edge(j, c)] = edge.project(k + 1, values[:, :, c].T)

    cell_values = cell.values("matrix", "full", degree)
    for b in range(4):
        matrix[idx.cell_block(b)] = project_family(cell, k, cell_values[:, :, b])

    return matrix


def stokes_component_weights(cell: LocalCell, k: int) -> np.ndarray:
    idx = StokesLocal(cell, k)
    h = cell.h
    weights = np.ones(idx.size)

    for i in range(idx.nv):
        weights[idx.q_vertex(i)] = h ** 2
        weights[idx.g_vertex(i)] = h ** 4
    for j in range(idx.ne):
        weights[idx.q_edge_dofs(j)] = h
        weights[idx.gn_edge_dofs(j)] = h ** 3

    return weights


def grad_component_weights(cell: LocalCell, k: int) -> np.ndarray:
    idx = GradLocal(cell, k)
    h = cell.h
    weights = np.ones(idx.size)
    weights[: 2 * idx.nv] = h ** 2
    weights[2 * idx.nv : 2 * idx.nv + 2 * idx.ne * idx.edge_dim] = h
    return weights


@dataclass
class LocalInnerProduct:
    cell: int
    space: str
    product: np.ndarray
    component: np.ndarray
    equivalence: float


def _local_product(cell: LocalCell, space: str, potential: np.ndarray, interpolation: np.ndarray, mass: np.ndarray, weights: np.ndarray) -> LocalInnerProduct:
    component = np.diag(weights)
    difference = np.eye(len(weights)) - interpolation @ potential
    product = potential.T @ mass @ potential + difference.T @ component @ difference
    product = 0.5 * (product + product.T)

    eigenvalues = scipy.linalg.eigh(product, component, eigvals_only=True)
    return LocalInnerProduct(
        cell.index, space, product, component, float(eigenvalues.max() / eigenvalues.min())
    )


def local_products(cell: LocalCell, k: int) -> Dict[str, LocalInnerProduct]:
    def build() -> Dict[str, LocalInnerProduct]:
        stokes = _local_product(
            cell,
            "X_Sgrad",
            pot_stokes_kp1_matrix(cell, k),
            stokes_interpolation_matrix(cell, k, k + 1),
            cell.mass("scalar", "full", k + 1),
            stokes_component_weights(cell, k),
        )
        rot = _local_product(
            cell,
            "X_Srot",
            pot_rot_k_matrix(cell, k),
            grad_interpolation_matrix(cell, k, k),
            cell.mass("vector", "full", k),
            grad_component_weights(cell, k),
        )
        return {"X_Sgrad": stokes, "X_Srot": rot}

    return cached(cell, ("local_products", k), build)


def stabilisation(cell: LocalCell, k: int, space: str, x: np.ndarray, y: np.ndarray) -> float:
    if space == "X_Sgrad":
        potential = pot_stokes_kp1_matrix(cell, k)
        interpolation = stokes_interpolation_matrix(cell, k, k + 1)
        weights = stokes_component_weights(cell, k)
    else:
        potential = pot_rot_k_matrix(cell, k)
        interpolation = grad_interpolation_matrix(cell, k, k)
        weights = grad_component_weights(cell, k)

    dx = x - interpolation @ (potential @ x)
    dy = y - interpolation @ (potential @ y)
    return float(dx @ (weights * dy))


def _max_ratio(numerator: np.ndarray, denominator: np.ndarray) -> float:
    numerator = 0.5 * (numerator + numerator.T)
    eigenvalues = scipy.linalg.eigh(numerator, denominator, eigvals_only=True)
    return float(np.sqrt(max(eigenvalues.max(), 0.0)))


def boundedness_ratios(cell: LocalCell, k: int) -> Dict[str, float]:
    h = cell.h
    stokes_norm = np.diag(stokes_component_weights(cell, k))
    rot_norm = np.diag(grad_component_weights(cell, k))
    p_stokes = pot_stokes_kp1_matrix(cell, k)
    sgrad = sgrad_local_matrix(cell, k)
    p_rot = pot_rot_k_matrix(cell, k)
    srot = srot_matrix(cell, k)

    return {
        "pot_stokes_kp1": _max_ratio(
            p_stokes.T @ cell.mass("scalar", "full", k + 1) @ p_stokes, stokes_norm
        ),
        "sgrad": _max_ratio(h ** 2 * sgrad.T @ rot_norm @ sgrad, stokes_norm),
        "pot_rot_k": _max_ratio(p_rot.T @ cell.mass("vector", "full", k) @ p_rot, rot_norm),
        "srot": _max_ratio(h ** 2 * srot.T @ cell.mass("scalar", "full", k) @ srot, rot_norm),
    }
