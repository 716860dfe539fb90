"""Reduction and extension cochain maps between DS(k) and DDR(0).

Reductions keep vertex values and tangential edge averages. Extensions
rebuild polynomial components from DDR(0) data; their vertex gradients,
normal derivatives and vertex vectors vanish.
"""
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix

from . import constants as C
from . import errors as E
from .assembly import Discretisation, GlobalOperator, Triplets
from .ddr import GradLocal, cached, gamma0_matrix, c0_row
from .logger import check_logger
from .polyquad import LocalCell, LocalEdge, dim_poly, solve_square
from .verify import generalized_norm, numerical_rank, poincare_constant, whitening


def assemble_reduce_grad(disc: Discretisation) -> csr_matrix:
    layout = disc.layout("X_Sgrad")
    vertices = np.arange(disc.mesh.num_vertices)
    triplets = Triplets((disc.mesh.num_vertices, layout.dim))
    triplets.add(vertices, vertices * layout.vertex_dim, np.eye(len(vertices)))
    return triplets.tocsr()


def assemble_reduce_rot(disc: Discretisation) -> csr_matrix:
    layout = disc.layout("X_Srot")
    triplets = Triplets((disc.mesh.num_edges, layout.dim))

    for edge in disc.quad.edges():
        averages = edge.values(disc.k) @ edge.rule.weights / edge.h
        row = np.concatenate([edge.tangent[0] * averages, edge.tangent[1] * averages])
        triplets.add(np.array([edge.index]), layout.edge_dofs(edge.index), row[None, :])

    return triplets.tocsr()


def edge_extension_matrix(edge: LocalEdge, k: int) -> np.ndarray:
    """[q_a, q_b] -> E in P^(k-1)(E) with int E r' = q_b r(b) - q_a r(a) for zero-average r."""
    if k == 0:
        return np.zeros((0, 2))

    phi = edge.values(k - 1)
    dr = edge.derivative_values(k)[1:]
    ends = edge.endpoint_values(k)[1:]
    lhs = (dr * edge.rule.weights) @ phi.T
    rhs = np.stack([-ends[:, 0], ends[:, 1]], axis=1)
    return solve_square(lhs, rhs)


def cell_grad_extension_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Vertex values of the cell (loop order) -> E in P^(k-2)(T)."""

    def build() -> np.ndarray:
        nv = len(cell.vertices)
        size = dim_poly(k - 2)
        if size == 0:
            return np.zeros((0, nv))

        position = {v: i for i, v in enumerate(cell.vertices)}
        div_w = np.einsum("bpcc->bp", cell.gradients("vector", "croly", k - 1))
        phi = cell.values("scalar", "full", k - 2)[:, :, 0]
        lhs = (div_w * cell.rule.weights) @ phi.T

        w = cell.values("vector", "croly", k - 1)
        w_mean = np.einsum("ipc,p->ic", w, cell.rule.weights)
        g0 = np.zeros((len(cell.edges), nv))
        for j, edge in enumerate(cell.edges):
            a, b = (position[v] for v in edge.endpoints)
            g0[j, a], g0[j, b] = -1.0 / edge.h, 1.0 / edge.h
        rhs = -w_mean @ gamma0_matrix(cell) @ g0

        for edge, omega in zip(cell.edges, cell.omegas):
            a, b = (position[v] for v in edge.endpoints)
            w_n = cell.values_at(edge.rule.points, "vector", "croly", k - 1) @ edge.normal
            moments = (w_n * edge.rule.weights) @ edge.values(k - 1).T
            rhs[:, [a, b]] += omega * moments @ edge_extension_matrix(edge, k)

        return solve_square(lhs, rhs)

    return cached(cell, ("grad_extension", k), build)


def assemble_extend_grad(disc: Discretisation) -> csr_matrix:
    k = disc.k
    layout = disc.layout("X_Sgrad")
    triplets = Triplets((layout.dim, disc.mesh.num_vertices))
    vertices = np.arange(disc.mesh.num_vertices)
    triplets.add(vertices * layout.vertex_dim, vertices, np.eye(len(vertices)))

    for edge in disc.quad.edges():
        rows = layout.edge_dofs(edge.index)[:k]
        triplets.add(rows, np.array(edge.endpoints), edge_extension_matrix(edge, k))

    for cell in disc.cells():
        triplets.add(
            layout.cell_dofs(cell.index),
            np.array(cell.vertices),
            cell_grad_extension_matrix(cell, k),
        )

    return triplets.tocsr()


def _constant_on_edge(edge: LocalEdge, k: int) -> np.ndarray:
    return edge.values(k) @ edge.rule.weights


def cell_rot_extension_matrix(cell: LocalCell, k: int) -> np.ndarray:
    """Edge values of the cell (loop order) -> E in P^(k-1)(T)^2."""

    def build() -> np.ndarray:
        ne = len(cell.edges)
        if k == 0:
            return np.zeros((0, ne))

        basis = cell.values("vector", "full", k - 1)
        grads = cell.gradients("scalar", "zero_average", k)[:, :, 0, :]
        curl_r = np.stack([grads[..., 1], -grads[..., 0]], axis=-1)
        croly = cell.values("vector", "croly", k - 1)
        lhs = np.concatenate([cell.inner(curl_r, basis), cell.inner(croly, basis)])

        r = cell.values("scalar", "zero_average", k)[:, :, 0]
        rhs_r = np.outer(r @ cell.rule.weights, c0_row(cell))
        for j, (edge, omega) in enumerate(zip(cell.edges, cell.omegas)):
            r_edge = cell.values_at(edge.rule.points, "scalar", "zero_average", k)[:, :, 0]
            rhs_r[:, j] += omega * r_edge @ edge.rule.weights

        w_mean = np.einsum("ipc,p->ic", croly, cell.rule.weights)
        rhs_w = w_mean @ gamma0_matrix(cell)

        return solve_square(lhs, np.concatenate([rhs_r, rhs_w]))

    return cached(cell, ("rot_extension", k), build)


def assemble_extend_rot(disc: Discretisation) -> csr_matrix:
    k = disc.k
    layout = disc.layout("X_Srot")
    triplets = Triplets((layout.dim, disc.mesh.num_edges))

    for edge in disc.quad.edges():
        constant = _constant_on_edge(edge, k)
        column = np.concatenate([edge.tangent[0] * constant, edge.tangent[1] * constant])
        triplets.add(layout.edge_dofs(edge.index), np.array([edge.index]), column[:, None])

    for cell in disc.cells():
        idx = GradLocal(cell, k)
        rows = layout.cell_dofs(cell.index)
        if idx.cell_dim:
            triplets.add(
                rows, np.array(disc.mesh.cell_edges(cell.index)), cell_rot_extension_matrix(cell, k)
            )

    return triplets.tocsr()


def reduce_grad(q: np.ndarray, disc: Discretisation) -> np.ndarray:
    return disc["R_grad"](q)


def reduce_rot(v: np.ndarray, disc: Discretisation) -> np.ndarray:
    return disc["R_rot"](v)


def extend_grad(q0: np.ndarray, disc: Discretisation) -> np.ndarray:
    return disc["E_grad"](q0)


def extend_rot(v0: np.ndarray, disc: Discretisation) -> np.ndarray:
    return disc["E_rot"](v0)


@dataclass
class TransferPair:
    R_grad: GlobalOperator
    R_rot: GlobalOperator
    E_grad: GlobalOperator
    E_rot: GlobalOperator

    @classmethod
    def from_discretisation(cls, disc: Discretisation) -> "TransferPair":
        return cls(disc["R_grad"], disc["R_rot"], disc["E_grad"], disc["E_rot"])


def _max_entry(matrix) -> float:
    matrix = abs(matrix)
    return float(matrix.max()) if matrix.shape[0] * matrix.shape[1] else 0.0


def verify_cochain(
    disc: Discretisation,
    seed: int = C.DEFAULT_SEED,
    samples: int = 10,
    rank_tol: float = C.DEFAULT_RANK_TOL,
) -> Dict[str, float]:
    """Max-entry residuals of the cochain identities, R E = Id, and the averaged-complex membership."""
    log = check_logger("cochain")
    pair = TransferPair.from_discretisation(disc)
    sgrad, srot = disc["SGRAD"].matrix, disc["SROT"].matrix
    g0, c0 = disc["G0"].matrix, disc["C0"].matrix

    residuals = {
        "reduce_grad": _max_entry(g0 @ pair.R_grad.matrix - pair.R_rot.matrix @ sgrad),
        "reduce_rot": _max_entry(c0 @ pair.R_rot.matrix - disc["Pi0"].matrix @ srot),
        "extend_grad": _max_entry(sgrad @ pair.E_grad.matrix - pair.E_rot.matrix @ g0),
        "extend_rot": _max_entry(srot @ pair.E_rot.matrix - disc["I0"].matrix @ c0),
        "identity_grad": _max_entry(
            (pair.R_grad.matrix @ pair.E_grad.matrix).toarray() - np.eye(g0.shape[1])
        ),
        "identity_rot": _max_entry(
            (pair.R_rot.matrix @ pair.E_rot.matrix).toarray() - np.eye(c0.shape[1])
        ),
    }
    residuals["membership"] = averaged_membership(disc, seed, samples, rank_tol)

    for name, value in residuals.items():
        log.debug(f"{name}: {value:.3e}")

    return residuals


def averaged_membership(
    disc: Discretisation, seed: int, samples: int, rank_tol: float = C.DEFAULT_RANK_TOL
) -> float:
    """Least-squares distance of (E_rot R_rot - Id) v to Im SGRAD for random v in Ker SROT."""
    srot = disc["SROT"].matrix.toarray()
    sgrad = disc["SGRAD"].matrix.toarray()
    rank = numerical_rank(srot, rank_tol)["rank"]
    _, _, vt = scipy.linalg.svd(srot)
    kernel = vt[rank:].T

    if kernel.shape[1] == 0:
        return 0.0

    rng = np.random.default_rng(seed)
    v = kernel @ rng.standard_normal((kernel.shape[1], samples))
    defect = disc["E_rot"].matrix @ (disc["R_rot"].matrix @ v) - v
    coefficients, *_ = scipy.linalg.lstsq(sgrad, defect)
    residual = sgrad @ coefficients - defect
    scale = max(np.abs(defect).max(), 1.0)

    return float(np.abs(residual).max() / scale)


def restricted_poincare(sigma: np.ndarray, restricted: np.ndarray) -> float:
    """1 / smallest singular value of the operator on an orthonormal subspace of its range."""
    if not restricted.size:
        return 0.0
    return float(1.0 / scipy.linalg.svdvals(sigma[:, None] * restricted).min())


def poincare_transfer(
    D: np.ndarray,
    D_hat: np.ndarray,
    E0: np.ndarray,
    E1: np.ndarray,
    R0: np.ndarray,
    R1: np.ndarray,
    grams: Dict[str, np.ndarray],
    probes: int = C.DEFAULT_PROBES,
    seed: int = C.DEFAULT_SEED,
    rank_tol: float = C.DEFAULT_RANK_TOL,
) -> Dict[str, object]:
    """Checks direct <= C_hat |E0| |R1| + C_P (|E1| |R1| + 1).

    ``grams`` holds SPD matrices for the keys ``X0``, ``X1``, ``X0_hat`` and
    ``X1_hat``. C_P is the supremum of |z| / |D z| over the minimum-norm
    solutions z of D z = D (E0 R0 - Id) x; it is computed exactly from a
    restricted SVD and cross-checked by seeded random probes.
    """
    D, D_hat = np.asarray(D, dtype=float), np.asarray(D_hat, dtype=float)
    M0, M1 = grams["X0"], grams["X1"]
    M0_hat, M1_hat = grams["X0_hat"], grams["X1_hat"]

    c_hat = poincare_constant(D_hat, M0_hat, M1_hat, rank_tol)
    direct = poincare_constant(D, M0, M1, rank_tol)

    L0, L1 = whitening(M0), whitening(M1)
    whitened = L1.T @ scipy.linalg.solve_triangular(L0, D.T, lower=True).T
    u, sigma, vt = scipy.linalg.svd(whitened, full_matrices=False)
    rank = numerical_rank(whitened, rank_tol)["rank"]
    v_range, sigma = vt[:rank].T, sigma[:rank]

    defect = np.asarray(E0 @ R0, dtype=float) - np.eye(D.shape[1])
    image = scipy.linalg.orth(L0.T @ defect, rcond=rank_tol)
    restricted = scipy.linalg.orth(v_range.T @ image, rcond=rank_tol) if image.size else image

    c_p = restricted_poincare(sigma, restricted)

    rng = np.random.default_rng(seed)
    probe_max = 0.0
    for _ in range(probes):
        y = defect @ rng.standard_normal(D.shape[1])
        coordinates = v_range.T @ (L0.T @ y)
        z = scipy.linalg.solve_triangular(L0.T, v_range @ coordinates, lower=False)
        dz, dy = D @ z, D @ y
        if np.abs(dz - dy).max(initial=0.0) > 1e-8 * max(np.abs(dy).max(initial=0.0), 1.0):
            raise E.ProbeInfeasibleError("minimum-norm probe does not solve D z = D y")
        norm_dz = np.sqrt(dz @ (M1 @ dz))
        if norm_dz > 1e-14:
            probe_max = max(probe_max, float(np.sqrt(z @ (M0 @ z)) / norm_dz))

    norms = {
        "E0": generalized_norm(E0, M0_hat, M0),
        "E1": generalized_norm(E1, M1_hat, M1),
        "R1": generalized_norm(R1, M1, M1_hat),
    }
    bound = c_hat * norms["E0"] * norms["R1"] + c_p * (norms["E1"] * norms["R1"] + 1.0)
    probes_ok = bool(probe_max <= c_p * (1.0 + 1e-8))

    return {
        "C_hat": c_hat,
        "C_P": float(c_p),
        "C_P_probes": probe_max,
        "probes": probes,
        "norm_E0": norms["E0"],
        "norm_E1": norms["E1"],
        "norm_R1": norms["R1"],
        "bound": float(bound),
        "direct": direct,
        "probes_within_C_P": probes_ok,
        "passed": bool(direct <= bound * (1.0 + 1e-10)) and probes_ok,
    }


def _dense(operator: GlobalOperator) -> np.ndarray:
    return operator.matrix.toarray()


def transfer_slices(
    disc: Discretisation,
    probes: int = C.DEFAULT_PROBES,
    seed: int = C.DEFAULT_SEED,
    rank_tol: float = C.DEFAULT_RANK_TOL,
    slices: Optional[tuple] = None,
) -> Dict[str, Dict[str, object]]:
    """Runs poincare_transfer on the grad slice and the rot slice of DS(k) / DDR(0)."""
    wanted = slices or ("grad", "rot")
    out = {}

    if "grad" in wanted:
        out["grad"] = poincare_transfer(
            _dense(disc["SGRAD"]),
            _dense(disc["G0"]),
            _dense(disc["E_grad"]),
            _dense(disc["E_rot"]),
            _dense(disc["R_grad"]),
            _dense(disc["R_rot"]),
            {
                "X0": _dense(disc["norm_Sgrad"]),
                "X1": _dense(disc["norm_Srot"]),
                "X0_hat": _dense(disc["gram_ddr0_grad"]),
                "X1_hat": _dense(disc["gram_ddr0_curl"]),
            },
            probes,
            seed,
            rank_tol,
        )

    if "rot" in wanted:
        out["rot"] = poincare_transfer(
            _dense(disc["SROT"]),
            _dense(disc["C0"]),
            _dense(disc["E_rot"]),
            _dense(disc["I0"]),
            _dense(disc["R_rot"]),
            _dense(disc["Pi0"]),
            {
                "X0": _dense(disc["norm_Srot"]),
                "X1": _dense(disc["mass_Pk"]),
                "X0_hat": _dense(disc["gram_ddr0_curl"]),
                "X1_hat": _dense(disc["gram_P0"]),
            },
            probes,
            seed,
            rank_tol,
        )

    return out
