"""Polygonal quadrature, scaled monomial bases and L2 projections.

Cell polynomials are written over the scaled monomials ((x - x_T) / h_T)^a,
edge polynomials over s^j with s = 2 (x - x_E) . t_E / h_E in [-1, 1]. Every
basis is orthonormalised against the entity mass matrix, so coefficient
vectors of L2 projections are plain moments.
"""
import functools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from . import errors as E
from .mesh import PolyMesh


VALUE_COMPONENTS = {"scalar": 1, "vector": 2, "matrix": 4, "sym": 4}
SPACE_KINDS = ("full", "zero_average", "roly", "croly")
ORTHONORMAL_TOL = 1e-10


def dim_poly(degree: int) -> int:
    return 0 if degree < 0 else (degree + 1) * (degree + 2) // 2


def dim_poly_edge(degree: int) -> int:
    return max(degree + 1, 0)


def dim_roly(degree: int) -> int:
    return 0 if degree < 0 else dim_poly(degree + 1) - 1


def dim_croly(degree: int) -> int:
    return dim_poly(degree - 1)


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))


def _gauss_points(degree: int) -> int:
    return max(1, (degree + 2) // 2)


@functools.lru_cache(maxsize=None)
def _reference_triangle(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    # conical product rule on (0,0), (1,0), (0,1)
    n = _gauss_points(degree)
    t, wt = roots_jacobi(n, 1.0, 0.0)
    s, ws = leggauss(n)
    u, wu = (1.0 + t) / 2.0, wt / 4.0
    v, wv = (1.0 + s) / 2.0, ws / 2.0

    uu, vv = np.meshgrid(u, v, indexing="ij")
    points = np.stack([uu.ravel(), (vv * (1.0 - uu)).ravel()], axis=1)
    weights = np.outer(wu, wv).ravel()

    return points, weights


@functools.lru_cache(maxsize=None)
def _reference_segment(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(_gauss_points(degree))


def triangle_rule(vertices: np.ndarray, degree: int) -> QuadRule:
    ref_points, ref_weights = _reference_triangle(degree)
    p0, p1, p2 = vertices
    jacobian = np.stack([p1 - p0, p2 - p0], axis=1)
    twice_area = float(np.linalg.det(jacobian))

    return QuadRule(p0 + ref_points @ jacobian.T, ref_weights * twice_area, degree)


def cell_quadrature(cell: int, mesh: PolyMesh, degree: int) -> QuadRule:
    if degree < 0:
        raise ValueError(f"quadrature degree must be >= 0, got {degree}")

    center = mesh.x_T[cell]
    polygon = mesh.polygon(cell)
    points, weights = [], []

    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        fan = np.stack([center, a, b])
        rule = triangle_rule(fan, degree)

        if rule.weights.sum() <= 0.0:
            raise E.InvertedFanError(
                f"cell {cell}: inner point {center.tolist()} does not see every edge"
            )

        points.append(rule.points)
        weights.append(rule.weights)

    return QuadRule(np.concatenate(points), np.concatenate(weights), degree)


def edge_quadrature(edge: int, mesh: PolyMesh, degree: int) -> QuadRule:
    s, w = _reference_segment(degree)
    h_E = mesh.h_E[edge]
    points = mesh.x_E[edge] + 0.5 * h_E * s[:, None] * mesh.t_E[edge]

    return QuadRule(points, w * 0.5 * h_E, degree)


@functools.lru_cache(maxsize=None)
def monomial_exponents(degree: int) -> Tuple[Tuple[int, int], ...]:
    return tuple((d - i, i) for d in range(degree + 1) for i in range(d + 1))


@functools.lru_cache(maxsize=None)
def _exponent_index(degree: int) -> Dict[Tuple[int, int], int]:
    return {alpha: i for i, alpha in enumerate(monomial_exponents(degree))}


def eval_monomials(
    points: np.ndarray, center: np.ndarray, scale: float, degree: int
) -> np.ndarray:
    z = (np.atleast_2d(points) - center) / scale
    exponents = np.array(monomial_exponents(degree), dtype=int).reshape(-1, 2)
    return z[:, None, 0] ** exponents[None, :, 0] * z[:, None, 1] ** exponents[None, :, 1]


def eval_monomial_gradients(
    points: np.ndarray, center: np.ndarray, scale: float, degree: int
) -> np.ndarray:
    z = (np.atleast_2d(points) - center) / scale
    exponents = np.array(monomial_exponents(degree), dtype=int).reshape(-1, 2)
    a, b = exponents[None, :, 0], exponents[None, :, 1]
    x, y = z[:, None, 0], z[:, None, 1]

    with np.errstate(divide="ignore", invalid="ignore"):
        dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0), 0.0) * y ** b
        dy = x ** a * np.where(b > 0, b * y ** np.maximum(b - 1, 0), 0.0)

    return np.stack([dx, dy], axis=-1) / scale


def derivative_matrix(degree: int, axis: int, scale: float) -> np.ndarray:
    """Maps monomial coefficients of P^degree to those of its partial derivative in P^(degree-1)."""
    target = _exponent_index(max(degree - 1, 0))
    matrix = np.zeros((dim_poly(degree - 1), dim_poly(degree)))

    for j, alpha in enumerate(monomial_exponents(degree)):
        if alpha[axis] > 0:
            lowered = (alpha[0] - (axis == 0), alpha[1] - (axis == 1))
            matrix[target[lowered], j] = alpha[axis] / scale

    return matrix


def shift_matrix(degree: int, axis: int) -> np.ndarray:
    """Multiplication by the scaled coordinate: P^degree -> P^(degree+1)."""
    target = _exponent_index(degree + 1)
    matrix = np.zeros((dim_poly(degree + 1), dim_poly(degree)))

    for j, alpha in enumerate(monomial_exponents(degree)):
        raised = (alpha[0] + (axis == 0), alpha[1] + (axis == 1))
        matrix[target[raised], j] = 1.0

    return matrix


@dataclass
class PolySpaceBasis:
    entity: str
    index: int
    value_kind: str
    space_kind: str
    degree: int
    center: np.ndarray
    scale: float
    coefficients: np.ndarray
    mono_degree: int
    tangent: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def components(self) -> int:
        return self.coefficients.shape[1]

    def _monomials(self, points: np.ndarray) -> np.ndarray:
        if self.entity == "edge":
            s = 2.0 * (np.atleast_2d(points) - self.center) @ self.tangent / self.scale
            return s[:, None] ** np.arange(self.mono_degree + 1)[None, :]
        return eval_monomials(points, self.center, self.scale, self.mono_degree)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Basis values, shape (dim, points, components)."""
        return np.einsum("bcm,pm->bpc", self.coefficients, self._monomials(points))

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """Cell basis gradients, shape (dim, points, components, 2)."""
        grads = eval_monomial_gradients(points, self.center, self.scale, self.mono_degree)
        return np.einsum("bcm,pmd->bpcd", self.coefficients, grads)

    def derivatives(self, points: np.ndarray) -> np.ndarray:
        """Edge basis derivatives along t_E, shape (dim, points, components)."""
        s = 2.0 * (np.atleast_2d(points) - self.center) @ self.tangent / self.scale
        powers = np.arange(self.mono_degree + 1)
        ds = np.where(powers > 0, powers * s[:, None] ** np.maximum(powers - 1, 0), 0.0)
        return np.einsum("bcm,pm->bpc", self.coefficients, ds) * 2.0 / self.scale

    def gram(self, rule: QuadRule) -> np.ndarray:
        values = self.values(rule.points)
        return np.einsum("ipc,jpc,p->ij", values, values, rule.weights)


def _orthonormalise(basis: PolySpaceBasis, rule: QuadRule) -> PolySpaceBasis:
    for _ in range(2):
        if basis.dim == 0:
            return basis

        gram = basis.gram(rule)
        if np.abs(gram - np.eye(basis.dim)).max() <= ORTHONORMAL_TOL:
            return basis

        try:
            lower = scipy.linalg.cholesky(gram, lower=True)
        except np.linalg.LinAlgError as error:
            raise E.SingularMassError(
                f"{basis.entity} {basis.index}: singular mass matrix for "
                f"{basis.space_kind} P^{basis.degree}"
            ) from error

        pivots = np.diag(lower)
        if pivots.min() <= 1e-8 * pivots.max():
            raise E.SingularMassError(
                f"{basis.entity} {basis.index}: ill-conditioned mass matrix for "
                f"{basis.space_kind} P^{basis.degree}"
            )

        flat = basis.coefficients.reshape(basis.dim, -1)
        flat = scipy.linalg.solve_triangular(lower, flat, lower=True)
        basis.coefficients = flat.reshape(basis.coefficients.shape)

    return basis


def _tensorise(scalar: np.ndarray, value_kind: str) -> np.ndarray:
    dim, _, nm = scalar.shape
    block = scalar[:, 0, :]

    if value_kind == "scalar":
        return scalar

    if value_kind in ("vector", "matrix"):
        ncomp = VALUE_COMPONENTS[value_kind]
        out = np.zeros((ncomp * dim, ncomp, nm))
        for c in range(ncomp):
            out[c * dim : (c + 1) * dim, c, :] = block
        return out

    # sym: [11, (12 + 21) / sqrt(2), 22]
    out = np.zeros((3 * dim, 4, nm))
    out[:dim, 0, :] = block
    out[dim : 2 * dim, 1, :] = block / np.sqrt(2.0)
    out[dim : 2 * dim, 2, :] = block / np.sqrt(2.0)
    out[2 * dim :, 3, :] = block
    return out


def basis_for_space(
    entity: str,
    index: int,
    value_kind: str,
    space_kind: str,
    degree: int,
    mesh: PolyMesh,
    rule: QuadRule,
) -> PolySpaceBasis:
    if degree < -1 and space_kind == "full":
        degree = -1

    if entity == "edge":
        if value_kind != "scalar" or space_kind != "full":
            raise ValueError("edge bases are scalar and full")
        nm = max(degree, 0) + 1
        coefficients = np.eye(nm)[: dim_poly_edge(degree), None, :]
        basis = PolySpaceBasis(
            "edge", index, "scalar", "full", degree, mesh.x_E[index],
            float(mesh.h_E[index]), coefficients, max(degree, 0), mesh.t_E[index],
        )
        return _orthonormalise(basis, rule)

    center, scale = mesh.x_T[index], float(mesh.h_T[index])

    if space_kind in ("full", "zero_average"):
        mono_degree = max(degree, 0)
        nm = dim_poly(mono_degree)
        scalar = np.eye(nm)[: dim_poly(degree), None, :]

        if space_kind == "zero_average":
            averages = rule.integrate(eval_monomials(rule.points, center, scale, mono_degree))
            averages = averages / rule.weights.sum()
            scalar = scalar[1:].copy()
            scalar[:, 0, 0] -= averages[1 : len(scalar) + 1]

        basis = PolySpaceBasis(
            "cell", index, "scalar", space_kind, degree, center, scale,
            scalar.copy(), mono_degree,
        )
        _orthonormalise(basis, rule)
        basis.coefficients = _tensorise(basis.coefficients, value_kind)
        basis.value_kind = value_kind
        return basis

    if value_kind != "vector":
        raise ValueError(f"{space_kind} spaces are vector valued")

    mono_degree = max(degree, 0)
    nm = dim_poly(mono_degree)

    if space_kind == "roly":
        source = np.eye(dim_poly(degree + 1))[1:]
        dx = derivative_matrix(degree + 1, 0, 1.0)
        dy = derivative_matrix(degree + 1, 1, 1.0)
        # CURL r = (d2 r, -d1 r), up to the constant factor 1/h_T
        coefficients = np.stack([source @ dy.T, -(source @ dx.T)], axis=1)
        coefficients = coefficients[:, :, :nm] if degree >= 0 else np.zeros((0, 2, nm))
    else:
        source = np.eye(dim_poly(degree - 1))
        if degree >= 1:
            sx, sy = shift_matrix(degree - 1, 0), shift_matrix(degree - 1, 1)
            coefficients = np.stack([source @ sx.T, source @ sy.T], axis=1)
        else:
            coefficients = np.zeros((0, 2, nm))

    basis = PolySpaceBasis(
        "cell", index, "vector", space_kind, degree, center, scale,
        np.ascontiguousarray(coefficients, dtype=float), mono_degree,
    )
    return _orthonormalise(basis, rule)


def l2_project(
    values: np.ndarray, target: PolySpaceBasis, rule: QuadRule
) -> np.ndarray:
    if target.dim == 0:
        return np.zeros(0)

    values = values.reshape(len(rule.weights), -1)
    phi = target.values(rule.points)
    rhs = np.einsum("bpc,pc,p->b", phi, values, rule.weights)

    return solve_spd(target.gram(rule), rhs)


def solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if matrix.shape[0] == 0:
        return np.zeros((0,) + rhs.shape[1:])
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(matrix), rhs)


def solve_square(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if matrix.shape[0] == 0:
        return np.zeros((0,) + rhs.shape[1:])
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(matrix), rhs)


@dataclass
class LocalEdge:
    """Edge data shared by every cell touching the edge."""

    index: int
    mesh: PolyMesh
    rule: QuadRule
    _bases: Dict[int, PolySpaceBasis] = field(default_factory=dict, repr=False)

    @property
    def h(self) -> float:
        return float(self.mesh.h_E[self.index])

    @property
    def tangent(self) -> np.ndarray:
        return self.mesh.t_E[self.index]

    @property
    def normal(self) -> np.ndarray:
        return self.mesh.n_E[self.index]

    @property
    def endpoints(self) -> Tuple[int, int]:
        return self.mesh.edges[self.index]

    def endpoint_points(self) -> np.ndarray:
        return self.mesh.vertices[list(self.endpoints)]

    def basis(self, degree: int) -> PolySpaceBasis:
        if degree not in self._bases:
            self._bases[degree] = basis_for_space(
                "edge", self.index, "scalar", "full", degree, self.mesh, self.rule
            )
        return self._bases[degree]

    def values(self, degree: int) -> np.ndarray:
        """Basis values at quadrature points, shape (dim, points)."""
        return self.basis(degree).values(self.rule.points)[:, :, 0]

    def endpoint_values(self, degree: int) -> np.ndarray:
        """Basis values at (x_a, x_b), shape (dim, 2)."""
        return self.basis(degree).values(self.endpoint_points())[:, :, 0]

    def endpoint_derivatives(self, degree: int) -> np.ndarray:
        return self.basis(degree).derivatives(self.endpoint_points())[:, :, 0]

    def derivative_values(self, degree: int) -> np.ndarray:
        return self.basis(degree).derivatives(self.rule.points)[:, :, 0]

    def mass(self, degree: int) -> np.ndarray:
        values = self.values(degree)
        return (values * self.rule.weights) @ values.T

    def moments(self, degree: int, values: np.ndarray) -> np.ndarray:
        """Integrals of the degree basis against sampled values (points, ...)."""
        return np.tensordot(self.values(degree) * self.rule.weights, values, axes=(1, 0))

    def project(self, degree: int, values: np.ndarray) -> np.ndarray:
        return solve_spd(self.mass(degree), self.moments(degree, values))


@dataclass
class LocalCell:
    """Cell geometry, quadrature and cached orthonormal bases."""

    index: int
    mesh: PolyMesh
    rule: QuadRule
    edges: List[LocalEdge]
    _bases: Dict[Tuple[str, str, int], PolySpaceBasis] = field(
        default_factory=dict, repr=False
    )
    _cache: Dict[Tuple, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def h(self) -> float:
        return float(self.mesh.h_T[self.index])

    @property
    def area(self) -> float:
        return float(self.mesh.area[self.index])

    @property
    def center(self) -> np.ndarray:
        return self.mesh.x_T[self.index]

    @property
    def vertices(self) -> List[int]:
        return self.mesh.cell_vertices(self.index)

    @property
    def omegas(self) -> List[int]:
        return [omega for _, omega in self.mesh.cells[self.index]]

    def basis(self, value_kind: str, space_kind: str, degree: int) -> PolySpaceBasis:
        key = (value_kind, space_kind, degree)
        if key not in self._bases:
            self._bases[key] = basis_for_space(
                "cell", self.index, value_kind, space_kind, degree, self.mesh, self.rule
            )
        return self._bases[key]

    def values(self, value_kind: str, space_kind: str, degree: int) -> np.ndarray:
        key = ("values", value_kind, space_kind, degree)
        if key not in self._cache:
            self._cache[key] = self.basis(value_kind, space_kind, degree).values(
                self.rule.points
            )
        return self._cache[key]

    def gradients(self, value_kind: str, space_kind: str, degree: int) -> np.ndarray:
        key = ("gradients", value_kind, space_kind, degree)
        if key not in self._cache:
            self._cache[key] = self.basis(value_kind, space_kind, degree).gradients(
                self.rule.points
            )
        return self._cache[key]

    def values_at(
        self, points: np.ndarray, value_kind: str, space_kind: str, degree: int
    ) -> np.ndarray:
        return self.basis(value_kind, space_kind, degree).values(points)

    def inner(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Gram of two sampled families, shapes (m, points, c) and (n, points, c)."""
        return np.einsum("ipc,jpc,p->ij", left, right, self.rule.weights)

    def mass(self, value_kind: str, space_kind: str, degree: int) -> np.ndarray:
        values = self.values(value_kind, space_kind, degree)
        return self.inner(values, values)

    def project(
        self, value_kind: str, space_kind: str, degree: int, values: np.ndarray
    ) -> np.ndarray:
        return l2_project(values, self.basis(value_kind, space_kind, degree), self.rule)


def roly_projector(coefficients: np.ndarray, cell: LocalCell, degree: int) -> np.ndarray:
    """Projects a P^degree(T)^2 field onto Roly^degree(T)."""
    field_values = np.einsum("b,bpc->pc", coefficients, cell.values("vector", "full", degree))
    return cell.project("vector", "roly", degree, field_values)


class MeshQuadrature:
    """Lazily built LocalCell and LocalEdge objects for one mesh and exactness."""

    def __init__(self, mesh: PolyMesh, degree: int) -> None:
        self.mesh: PolyMesh = mesh
        self.degree: int = degree
        self._edges: Dict[int, LocalEdge] = dict()
        self._cells: Dict[int, LocalCell] = dict()

    def edge(self, index: int) -> LocalEdge:
        if index not in self._edges:
            rule = edge_quadrature(index, self.mesh, self.degree)
            self._edges[index] = LocalEdge(index, self.mesh, rule)
        return self._edges[index]

    def cell(self, index: int) -> LocalCell:
        if index not in self._cells:
            rule = cell_quadrature(index, self.mesh, self.degree)
            edges = [self.edge(e) for e in self.mesh.cell_edges(index)]
            self._cells[index] = LocalCell(index, self.mesh, rule, edges)
        return self._cells[index]

    def cells(self) -> List[LocalCell]:
        return [self.cell(t) for t in range(self.mesh.num_cells)]

    def edges(self) -> List[LocalEdge]:
        return [self.edge(e) for e in range(self.mesh.num_edges)]
