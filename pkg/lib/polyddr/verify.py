"""Dense spectral checks and convergence-rate studies.

Ranks, generalized norms and Poincare constants work on densified
matrices and refuse anything larger than ``max_dense_dofs``.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.sparse import issparse

from . import constants as C
from . import errors as E
from .assembly import Discretisation
from .ddr import interpolate_ddr_grad
from .fields import ScalarField, VectorField, polynomial_scalar, polynomial_vector
from .fields import trig_scalar, trig_vector, with_cutoff
from .logger import check_logger
from .mesh import PolyMesh, generate_mesh
from .polyquad import MeshQuadrature
from .potentials import boundedness_ratios, local_products, pot_rot_k_matrix, pot_stokes_kp1_matrix
from .report import CheckRecord
from .stokes import interpolate_stokes, sgrad_local_matrix, srot_matrix


def _dense(matrix: Any, max_dense_dofs: int = C.DEFAULT_MAX_DENSE_DOFS) -> np.ndarray:
    if hasattr(matrix, "matrix"):
        matrix = matrix.matrix
    if max(matrix.shape, default=0) > max_dense_dofs:
        raise E.DenseLimitError(
            f"{matrix.shape[0]}x{matrix.shape[1]} matrix exceeds {max_dense_dofs} dense DOFs"
        )
    return matrix.toarray() if issparse(matrix) else np.asarray(matrix, dtype=float)


def numerical_rank(
    matrix: Any,
    tol: float = C.DEFAULT_RANK_TOL,
    gap_ratio: float = C.DEFAULT_GAP_RATIO,
    max_dense_dofs: int = C.DEFAULT_MAX_DENSE_DOFS,
) -> Dict[str, Any]:
    """rank = #{s_i > tol s_1}; certified iff s_rank / s_(rank+1) >= gap_ratio."""
    dense = _dense(matrix, max_dense_dofs)
    cols = dense.shape[1]

    if dense.size == 0:
        return {"rank": 0, "nullity": cols, "gap": float("inf"), "certified": True}

    sigma = scipy.linalg.svdvals(dense)
    if sigma[0] == 0.0:
        return {"rank": 0, "nullity": cols, "gap": float("inf"), "certified": True}

    rank = int(np.count_nonzero(sigma > tol * sigma[0]))
    if rank < len(sigma) and sigma[rank] > 0.0:
        gap = float(sigma[rank - 1] / sigma[rank])
    else:
        gap = float("inf")

    return {"rank": rank, "nullity": cols - rank, "gap": gap, "certified": gap >= gap_ratio}


@dataclass(frozen=True)
class RankSettings:
    tol: float = C.DEFAULT_RANK_TOL
    gap_ratio: float = C.DEFAULT_GAP_RATIO
    max_dense_dofs: int = C.DEFAULT_MAX_DENSE_DOFS

    @classmethod
    def from_config(cls, config) -> "RankSettings":
        return cls(config.rank_tol, config.gap_ratio, config.max_dense_dofs)

    def rank(self, matrix: Any) -> Dict[str, Any]:
        return numerical_rank(matrix, self.tol, self.gap_ratio, self.max_dense_dofs)


def whitening(gram: Any) -> np.ndarray:
    """Lower Cholesky factor L of an SPD Gram matrix, M = L L'."""
    try:
        return scipy.linalg.cholesky(_dense(gram), lower=True)
    except np.linalg.LinAlgError as exc:
        raise E.SingularMassError(f"Gram matrix is not positive definite: {exc}") from exc


def _whitened(operator: Any, source: Any, target: Any) -> np.ndarray:
    """L_tgt' A L_src^-T: Euclidean singular values are the generalized ones."""
    A = _dense(operator)
    L_src, L_tgt = whitening(source), whitening(target)
    return L_tgt.T @ scipy.linalg.solve_triangular(L_src, A.T, lower=True).T


def generalized_norm(operator: Any, source: Any, target: Any) -> float:
    whitened = _whitened(operator, source, target)
    return float(scipy.linalg.svdvals(whitened).max(initial=0.0)) if whitened.size else 0.0


def poincare_constant(
    operator: Any, source: Any, target: Any, rank_tol: float = C.DEFAULT_RANK_TOL
) -> float:
    """1 / smallest nonzero generalized singular value of the operator."""
    whitened = _whitened(operator, source, target)
    sigma = scipy.linalg.svdvals(whitened) if whitened.size else np.zeros(0)

    if not sigma.size or sigma[0] == 0.0:
        raise E.ZeroOperatorError("operator has no nonzero singular value")

    return float(1.0 / sigma[sigma > rank_tol * sigma[0]].min())


# rate studies

TARGET_SHIFT = {
    "potential": 2,
    "gradient": 1,
    "rot": 1,
    "product_grad": 2,
    "product_rot": 1,
    "adjoint_grad": 1,
    "adjoint_rot": 1,
}
ADJOINT_KINDS = ("adjoint_grad", "adjoint_rot")


@dataclass
class RateStudy:
    kind: str
    k: int
    field_name: str
    meshes: List[Dict[str, Any]]
    h: List[float]
    errors: List[float]
    tol: float
    exactness_tol: float = C.DEFAULT_CONSISTENCY_TOL
    slope: Optional[float] = field(init=False, default=None)
    fit_residual: Optional[float] = field(init=False, default=None)

    def __post_init__(self) -> None:
        if len(self.errors) < 3:
            raise E.RateStudyError(f"{self.kind}: at least 3 meshes needed, got {len(self.errors)}")

        if not self.exact:
            log_h, log_e = np.log(self.h), np.log(np.maximum(self.errors, 1e-300))
            slope, intercept = np.polyfit(log_h, log_e, 1)
            self.slope = float(slope)
            self.fit_residual = float(np.sqrt(np.mean((slope * log_h + intercept - log_e) ** 2)))

    @property
    def target(self) -> int:
        return self.k + TARGET_SHIFT[self.kind]

    @property
    def exact(self) -> bool:
        return max(self.errors) <= self.exactness_tol

    @property
    def passed(self) -> bool:
        if self.exact:
            return True
        if self.kind in ADJOINT_KINDS:
            return self.slope >= self.target - self.tol
        return abs(self.slope - self.target) <= self.tol

    def record(self) -> CheckRecord:
        name = f"rate_{self.kind}_k{self.k}"
        if self.exact:
            return CheckRecord.upper_bound(
                name, max(self.errors), self.exactness_tol, note="polynomially exact"
            )
        note = f"field {self.field_name}; fit residual {self.fit_residual:.2e}"
        if self.kind in ADJOINT_KINDS:
            return CheckRecord.at_least(name, self.slope, self.target, self.tol, note)
        return CheckRecord.within(name, self.slope, self.target, self.tol, note)

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"kind": self.kind, "k": self.k, "mesh": mesh["name"], "h": h, "error": error}
            for mesh, h, error in zip(self.meshes, self.h, self.errors)
        ]


def default_field(kind: str) -> Union[ScalarField, VectorField]:
    if kind in ("potential", "gradient", "product_grad", "adjoint_rot"):
        return trig_scalar()
    if kind == "adjoint_grad":
        return with_cutoff(trig_vector())
    return trig_vector()


def _scatter(size: int, pieces: Sequence[tuple]) -> np.ndarray:
    out = np.zeros(size)
    for dofs, values in pieces:
        out[dofs] += values
    return out


def _dual_norm(functional: np.ndarray, gram: np.ndarray, semi: bool = False) -> float:
    """sup_x |a.x| / |x|_M, with the pseudo-inverse when M is only semi-definite."""
    if semi:
        solution = scipy.linalg.lstsq(gram, functional)[0]
    else:
        solution = scipy.linalg.solve(gram, functional, assume_a="pos")
    return float(np.sqrt(max(functional @ solution, 0.0)))


def _potential_errors(disc: Discretisation, q: ScalarField) -> Dict[str, float]:
    k = disc.k
    layout = disc.layout("X_Sgrad")
    iq = interpolate_stokes(q, q.gradient, disc.quad, k)
    value_sq = gradient_sq = 0.0

    for cell in disc.cells():
        local = iq[layout.cell_local(cell.index)]
        weights, points = cell.rule.weights, cell.rule.points

        potential = pot_stokes_kp1_matrix(cell, k) @ local
        phi = cell.values("scalar", "full", k + 1)[:, :, 0]
        value_sq += ((potential @ phi - q(points)) ** 2) @ weights

        gradient = pot_rot_k_matrix(cell, k) @ sgrad_local_matrix(cell, k) @ local
        difference = np.einsum("b,bpc->pc", gradient, cell.values("vector", "full", k))
        difference -= q.gradient(points)
        gradient_sq += np.einsum("pc,pc,p->", difference, difference, weights)

    return {"value": float(np.sqrt(value_sq)), "gradient": float(np.sqrt(gradient_sq))}


def _rot_error(disc: Discretisation, v: VectorField) -> float:
    k = disc.k
    layout = disc.layout("X_Srot")
    iv = interpolate_ddr_grad(v, disc.quad, k)
    total = 0.0

    for cell in disc.cells():
        rot = srot_matrix(cell, k) @ iv[layout.cell_local(cell.index)]
        phi = cell.values("scalar", "full", k)[:, :, 0]
        total += ((rot @ phi - v.rot(cell.rule.points)) ** 2) @ cell.rule.weights

    return float(np.sqrt(total))


def _product_grad_error(disc: Discretisation, r: ScalarField) -> float:
    """sup_q |int r P q - (I r, q)_2| / |q|_2.

    |q|_2 is the stabilised product norm (gram_Sgrad), equivalent to the
    component norm up to the constant ``local_products`` reports.
    """
    k = disc.k
    layout = disc.layout("X_Sgrad")
    ir = interpolate_stokes(r, r.gradient, disc.quad, k)
    pieces = []

    for cell in disc.cells():
        dofs = layout.cell_local(cell.index)
        phi = cell.values("scalar", "full", k + 1)[:, :, 0]
        moments = (phi * cell.rule.weights) @ r(cell.rule.points)
        product = local_products(cell, k)["X_Sgrad"].product
        pieces.append((dofs, pot_stokes_kp1_matrix(cell, k).T @ moments - product @ ir[dofs]))

    functional = _scatter(layout.dim, pieces)
    return _dual_norm(functional, _dense(disc["gram_Sgrad"]))


def _product_rot_error(disc: Discretisation, w: VectorField) -> float:
    """sup_v |int w . P_rot v - (I w, v)_rot| / |v|_rot.

    |v|_rot is the stabilised product norm (gram_Srot), not the component norm.
    """
    k = disc.k
    layout = disc.layout("X_Srot")
    iw = interpolate_ddr_grad(w, disc.quad, k)
    pieces = []

    for cell in disc.cells():
        dofs = layout.cell_local(cell.index)
        psi = cell.values("vector", "full", k)
        moments = np.einsum("bpc,pc,p->b", psi, w(cell.rule.points), cell.rule.weights)
        product = local_products(cell, k)["X_Srot"].product
        pieces.append((dofs, pot_rot_k_matrix(cell, k).T @ moments - product @ iw[dofs]))

    functional = _scatter(layout.dim, pieces)
    return _dual_norm(functional, _dense(disc["gram_Srot"]))


def _adjoint_grad_error(disc: Discretisation, v: VectorField) -> float:
    """sup_q |sum_T (I v, SGRAD q)_rot + int div v P q| / |SGRAD q|_rot."""
    k = disc.k
    src, dst = disc.layout("X_Sgrad"), disc.layout("X_Srot")
    iv = interpolate_ddr_grad(v, disc.quad, k)
    pieces = []

    for cell in disc.cells():
        product = local_products(cell, k)["X_Srot"].product
        phi = cell.values("scalar", "full", k + 1)[:, :, 0]
        moments = (phi * cell.rule.weights) @ v.div(cell.rule.points)
        local = sgrad_local_matrix(cell, k).T @ product @ iv[dst.cell_local(cell.index)]
        local += pot_stokes_kp1_matrix(cell, k).T @ moments
        pieces.append((src.cell_local(cell.index), local))

    functional = _scatter(src.dim, pieces)
    sgrad = _dense(disc["SGRAD"])
    seminorm = sgrad.T @ _dense(disc["gram_Srot"]) @ sgrad
    return _dual_norm(functional, seminorm, semi=True)


def _adjoint_rot_error(disc: Discretisation, r: ScalarField) -> float:
    """sup_v |sum_T int r SROT v - int CURL r . P_rot v| / |v|_rot, with |v|_rot from gram_Srot."""
    k = disc.k
    layout = disc.layout("X_Srot")
    curl = r.curl()
    pieces = []

    for cell in disc.cells():
        weights, points = cell.rule.weights, cell.rule.points
        phi = cell.values("scalar", "full", k)[:, :, 0]
        psi = cell.values("vector", "full", k)
        scalar_moments = (phi * weights) @ r(points)
        curl_moments = np.einsum("bpc,pc,p->b", psi, curl(points), weights)
        local = srot_matrix(cell, k).T @ scalar_moments
        local -= pot_rot_k_matrix(cell, k).T @ curl_moments
        pieces.append((layout.cell_local(cell.index), local))

    functional = _scatter(layout.dim, pieces)
    return _dual_norm(functional, _dense(disc["gram_Srot"]))


def study_error(kind: str, field: Union[ScalarField, VectorField], disc: Discretisation) -> float:
    if kind == "potential":
        errors = _potential_errors(disc, field)
        return errors["value"] + disc.mesh.h * errors["gradient"]
    if kind == "gradient":
        return _potential_errors(disc, field)["gradient"]
    if kind == "rot":
        return _rot_error(disc, field)
    if kind == "product_grad":
        return _product_grad_error(disc, field)
    if kind == "product_rot":
        return _product_rot_error(disc, field)
    if kind == "adjoint_grad":
        return _adjoint_grad_error(disc, field)
    if kind == "adjoint_rot":
        return _adjoint_rot_error(disc, field)
    raise ValueError(f"unknown study kind: {kind}")


def consistency_study(
    kind: str,
    field: Optional[Union[ScalarField, VectorField]] = None,
    family: str = "cartesian",
    sizes: Sequence[int] = C.DEFAULT_FAMILIES["consistency"],
    k: int = 0,
    quadrature_margin: int = C.DEFAULT_QUADRATURE_MARGIN,
    slope_tol: Optional[float] = None,
    consistency_tol: float = C.DEFAULT_CONSISTENCY_TOL,
) -> RateStudy:
    if kind not in C.STUDY_KINDS:
        raise ValueError(f"unknown study kind: {kind}")
    if len(sizes) < 3:
        raise E.RateStudyError(f"{kind}: at least 3 meshes needed, got {len(sizes)}")

    field = field or default_field(kind)
    if slope_tol is None:
        adjoint = kind in ADJOINT_KINDS
        slope_tol = C.DEFAULT_ADJOINT_SLOPE_TOL if adjoint else C.DEFAULT_SLOPE_TOL

    log = check_logger(f"rate {kind}")
    meshes, hs, errors = [], [], []

    for n in sizes:
        mesh = generate_mesh(family, n)
        error = study_error(kind, field, Discretisation(mesh, k, quadrature_margin))
        log.debug(f"{mesh.name}: h={mesh.h:.4f} error={error:.4e}")
        meshes.append(mesh.descriptor())
        hs.append(mesh.h)
        errors.append(error)

    return RateStudy(kind, k, field.name, meshes, hs, errors, slope_tol, consistency_tol)


def polynomial_field(kind: str, degree: int, seed: int = C.DEFAULT_SEED):
    """Random polynomial field of the kind's argument type."""
    rng = np.random.default_rng(seed)
    if kind in ("potential", "gradient", "product_grad", "adjoint_rot"):
        return polynomial_scalar(degree, rng)
    return polynomial_vector(degree, rng)


# Poincare constants across a family


def poincare_constants(disc: Discretisation, rank_tol: float = C.DEFAULT_RANK_TOL) -> Dict[str, float]:
    """Constants for SGRAD in (2,h) -> (rot,h) and SROT in (rot,h) -> L2."""
    return {
        "grad": poincare_constant(disc["SGRAD"], disc["gram_Sgrad"], disc["gram_Srot"], rank_tol),
        "rot": poincare_constant(disc["SROT"], disc["gram_Srot"], disc["mass_Pk"], rank_tol),
    }


def poincare_study(
    family: str = "cartesian",
    sizes: Sequence[int] = C.DEFAULT_FAMILIES["poincare"],
    k: int = 0,
    quadrature_margin: int = C.DEFAULT_QUADRATURE_MARGIN,
    rank_tol: float = C.DEFAULT_RANK_TOL,
) -> Dict[str, Any]:
    rows = []
    for n in sizes:
        mesh = generate_mesh(family, n)
        constants = poincare_constants(Discretisation(mesh, k, quadrature_margin), rank_tol)
        rows.append({"mesh": mesh.name, "h": mesh.h, **constants})

    spread = {}
    for slot in ("grad", "rot"):
        values = np.array([row[slot] for row in rows])
        spread[slot] = float((values.max() - values.min()) / values.min())

    return {"rows": rows, "spread": spread}


# local checks


def local_exactness(
    disc: Discretisation,
    cells: int = C.DEFAULT_LOCAL_EXACTNESS_CELLS,
    rank_tol: float = C.DEFAULT_RANK_TOL,
) -> List[Dict[str, Any]]:
    """Per cell: nullity(SGRAD_T), rank(SGRAD_T) - nullity(SROT_T), SROT_T onto."""
    out = []
    for cell in disc.cells()[:cells]:
        sgrad = numerical_rank(sgrad_local_matrix(cell, disc.k), rank_tol)
        srot_matrix_T = srot_matrix(cell, disc.k)
        srot = numerical_rank(srot_matrix_T, rank_tol)
        out.append(
            {
                "cell": cell.index,
                "sgrad_nullity": sgrad["nullity"],
                "exactness_defect": sgrad["rank"] - srot["nullity"],
                "srot_onto": srot["rank"] == srot_matrix_T.shape[0],
                "certified": sgrad["certified"] and srot["certified"],
            }
        )
    return out


def boundedness_spread(
    disc: Discretisation, cell: int = 0, scales: Sequence[float] = (1.0, 0.5, 0.25)
) -> Dict[str, float]:
    """max / min of each local boundedness ratio over shrunken copies of one cell."""
    polygon = disc.mesh.polygon(cell)
    loop = [list(range(len(polygon)))]
    rows = []

    for scale in scales:
        copy = PolyMesh(scale * (polygon - polygon[0]), loop, name=f"cell{cell}_x{scale:g}")
        quad = MeshQuadrature(copy, 2 * disc.k + disc.quadrature_margin)
        rows.append(boundedness_ratios(quad.cell(0), disc.k))

    return {
        name: max(row[name] for row in rows) / min(row[name] for row in rows) for name in rows[0]
    }


def commutation_residuals(
    disc: Discretisation, fields: int = C.DEFAULT_RANDOM_FIELDS, seed: int = C.DEFAULT_SEED
) -> Dict[str, float]:
    """Max-entry of SGRAD I q - I grad q and SROT I v - pi^k rot v over random polynomials."""
    k = disc.k
    rng = np.random.default_rng(seed)
    sgrad, srot = disc["SGRAD"], disc["SROT"]
    worst = {"commutation_grad": 0.0, "commutation_rot": 0.0}

    for _ in range(fields):
        q = polynomial_scalar(k + 3, rng)
        grad_q = q.grad()
        residual = sgrad(interpolate_stokes(q, q.gradient, disc.quad, k))
        residual -= interpolate_ddr_grad(grad_q, disc.quad, k)
        worst["commutation_grad"] = max(worst["commutation_grad"], float(np.abs(residual).max()))

        v = polynomial_vector(k + 2, rng)
        iv = interpolate_ddr_grad(v, disc.quad, k)
        projected = np.concatenate(
            [
                cell.project("scalar", "full", k, v.rot(cell.rule.points))
                for cell in disc.cells()
            ]
        )
        residual = srot(iv) - projected
        worst["commutation_rot"] = max(worst["commutation_rot"], float(np.abs(residual).max()))

    return worst


def complex_residuals(disc: Discretisation) -> Dict[str, float]:
    return {
        "srot_sgrad": disc["SGRAD"].then(disc["SROT"]).max_entry(),
        "trot_tgrad": disc["tGRAD"].then(disc["tROT"]).max_entry(),
        "trot_hess": disc["Hess"].then(disc["tROT"]).max_entry(),
    }


