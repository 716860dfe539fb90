import json
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import errors as E
from . import geometry


Incidence = Tuple[int, int]


class PolyMesh:
    """Polygonal mesh with derived oriented topology.

    Cells are counter-clockwise vertex loops. Edges are oriented from the
    lower to the higher vertex index, and ``cells[t]`` lists ``(edge, omega)``
    pairs in loop order where ``omega * n_E`` points out of the cell.
    """

    def __init__(
        self,
        vertices: Sequence[Sequence[float]],
        loops: Sequence[Sequence[int]],
        name: str = "mesh",
    ) -> None:
        self.name: str = name
        self.vertices: np.ndarray = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.loops: List[List[int]] = [self._clean_loop(t, loop) for t, loop in enumerate(loops)]
        self.edges: List[Tuple[int, int]] = []
        self.cells: List[List[Incidence]] = []
        self._derive_topology()
        self._derive_geometry()
        self.validate()

        for array in (self.vertices, self.h_E, self.t_E, self.n_E, self.x_E):
            array.setflags(write=False)
        for array in (self.h_T, self.area, self.x_T):
            array.setflags(write=False)

    def __repr__(self) -> str:
        return f"PolyMesh({self.name}: V={self.num_vertices} E={self.num_edges} T={self.num_cells})"

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> float:
        return float(self.h_T.max())

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_cells

    def descriptor(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "vertices": self.num_vertices,
            "edges": self.num_edges,
            "cells": self.num_cells,
            "h": self.h,
        }

    def _clean_loop(self, cell: int, loop: Sequence[int]) -> List[int]:
        loop = [int(v) for v in loop]

        if len(loop) > 1 and loop[0] == loop[-1]:
            loop = loop[:-1]

        if len(loop) < 3:
            raise E.NonClosedLoopError(f"cell {cell}: loop needs at least 3 vertices")

        if len(set(loop)) != len(loop):
            raise E.DuplicateVertexError(f"cell {cell}: vertex repeated in loop")

        if min(loop) < 0 or max(loop) >= len(self.vertices):
            raise E.MeshFormatError(f"cell {cell}: vertex index out of range")

        area = geometry.signed_area(self.vertices[loop])

        if area == 0.0:
            raise E.DegenerateCellError(f"cell {cell}: zero area")

        if area < 0.0:
            raise E.ClockwiseLoopError(f"cell {cell}: loop is clockwise")

        return loop

    def _derive_topology(self) -> None:
        index: Dict[Tuple[int, int], int] = {}
        owners: List[List[int]] = []

        for cell, loop in enumerate(self.loops):
            boundary: List[Incidence] = []

            for u, v in zip(loop, loop[1:] + loop[:1]):
                key = (min(u, v), max(u, v))

                if key not in index:
                    index[key] = len(self.edges)
                    self.edges.append(key)
                    owners.append([])

                edge = index[key]
                owners[edge].append(cell)

                if len(owners[edge]) > 2:
                    raise E.NonManifoldEdgeError(
                        f"cell {cell}: edge {key} shared by more than two cells"
                    )

                # walking the loop counter-clockwise along t_E means n_E points inward
                boundary.append((edge, -1 if u == key[0] else 1))

            self.cells.append(boundary)

        self.edge_cells: List[Tuple[int, ...]] = [tuple(cells) for cells in owners]

    def _derive_geometry(self) -> None:
        ends = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        delta = self.vertices[ends[:, 1]] - self.vertices[ends[:, 0]]

        self.h_E: np.ndarray = np.sqrt((delta ** 2).sum(axis=1))

        if np.any(self.h_E == 0.0):
            raise E.DegenerateCellError("zero-length edge")

        self.t_E: np.ndarray = delta / self.h_E[:, None]
        self.n_E: np.ndarray = np.stack([-self.t_E[:, 1], self.t_E[:, 0]], axis=1)
        self.x_E: np.ndarray = 0.5 * (self.vertices[ends[:, 0]] + self.vertices[ends[:, 1]])

        polygons = [self.vertices[loop] for loop in self.loops]
        self.area: np.ndarray = np.array([geometry.signed_area(p) for p in polygons])
        self.h_T: np.ndarray = np.array([geometry.diameter(p) for p in polygons])
        self.x_T: np.ndarray = np.array(
            [inner_point(cell, self) for cell in range(self.num_cells)]
        ).reshape(-1, 2)

    def polygon(self, cell: int) -> np.ndarray:
        return self.vertices[self.loops[cell]]

    def cell_vertices(self, cell: int) -> List[int]:
        return list(self.loops[cell])

    def cell_edges(self, cell: int) -> List[int]:
        return [edge for edge, _ in self.cells[cell]]

    def omega_EV(self, edge: int, vertex: int) -> int:
        a, b = self.edges[edge]

        if vertex == b:
            return 1
        if vertex == a:
            return -1

        raise E.MeshFormatError(f"vertex {vertex} is not an endpoint of edge {edge}")

    def is_boundary_edge(self, edge: int) -> bool:
        return len(self.edge_cells[edge]) == 1

    def validate(self) -> None:
        for cell, boundary in enumerate(self.cells):
            self._validate_closure(cell, boundary)
            self._validate_normals(cell, boundary)

            if not geometry.contains(self.polygon(cell), self.x_T[cell])[0]:
                raise E.DegenerateCellError(f"cell {cell}: inner point outside cell")

        for edge, cells in enumerate(self.edge_cells):
            if len(cells) == 2:
                signs = [
                    omega
                    for cell in cells
                    for e, omega in self.cells[cell]
                    if e == edge
                ]
                if signs[0] != -signs[1]:
                    raise E.MeshFormatError(f"edge {edge}: incident signs agree")

    def _validate_closure(self, cell: int, boundary: List[Incidence]) -> None:
        walk = []

        for edge, omega in boundary:
            a, b = self.edges[edge]
            walk.append((b, a) if omega == 1 else (a, b))

        for (_, end), (start, _) in zip(walk, walk[1:] + walk[:1]):
            if end != start:
                raise E.NonClosedLoopError(f"cell {cell}: boundary walk does not close")

    def _validate_normals(self, cell: int, boundary: List[Incidence]) -> None:
        polygon = self.polygon(cell)

        for edge, omega in boundary:
            probe = self.x_E[edge] + 1e-6 * self.h_E[edge] * omega * self.n_E[edge]

            if geometry.contains(polygon, probe)[0]:
                raise E.MeshFormatError(
                    f"cell {cell}: normal of edge {edge} does not point outward"
                )


def inner_point(cell: int, mesh: PolyMesh) -> np.ndarray:
    polygon = mesh.polygon(cell)
    h_T = geometry.diameter(polygon)
    center = geometry.centroid(polygon)

    inside = geometry.contains(polygon, center)[0]
    if inside and geometry.boundary_distance(polygon, center)[0] >= 0.1 * h_T:
        if geometry.sees_every_edge(polygon, center)[0]:
            return center

    return geometry.pole_of_inaccessibility(polygon, 0.05 * h_T)


def betti_numbers(mesh: PolyMesh) -> Tuple[int, int]:
    rows, cols = [], []

    for cells in mesh.edge_cells:
        if len(cells) == 2:
            rows.append(cells[0])
            cols.append(cells[1])

    adjacency = coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(mesh.num_cells, mesh.num_cells)
    )
    beta0, _ = connected_components(adjacency, directed=False)

    return int(beta0), int(beta0) - mesh.euler_characteristic


def regularity(mesh: PolyMesh) -> Dict[str, float]:
    rho = np.array(
        [
            geometry.boundary_distance(mesh.polygon(cell), mesh.x_T[cell])[0]
            for cell in range(mesh.num_cells)
        ]
    )
    ratio = mesh.h_T / rho
    edge_ratio = [
        mesh.h_E[edge] / mesh.h_T[cell]
        for cell in range(mesh.num_cells)
        for edge in mesh.cell_edges(cell)
    ]

    return {
        "h": mesh.h,
        "max_h_over_rho": float(ratio.max()),
        "mean_h_over_rho": float(ratio.mean()),
        "min_hE_over_hT": float(min(edge_ratio)),
        "max_hE_over_hT": float(max(edge_ratio)),
    }


def load_mesh(path: str, format: str = "json", name: Optional[str] = None) -> PolyMesh:
    if format != "json":
        raise E.MeshFormatError(f"unsupported mesh format: {format}")

    with open(path) as raw_mesh:
        try:
            data = json.load(raw_mesh)
        except json.JSONDecodeError as error:
            raise E.MeshFormatError(f"{path}: {error}") from error

    if not isinstance(data, dict) or "vertices" not in data or "cells" not in data:
        raise E.MeshFormatError(f"{path}: 'vertices' and 'cells' required")

    return PolyMesh(data["vertices"], data["cells"], name=name or str(path))


def write_mesh(mesh: PolyMesh, path: str, with_edges: bool = True) -> None:
    data: Dict[str, object] = {
        "vertices": mesh.vertices.tolist(),
        "cells": [list(loop) for loop in mesh.loops],
    }

    if with_edges:
        data["edges"] = [list(edge) for edge in mesh.edges]

    with open(path, "w") as mesh_file:
        json.dump(data, mesh_file, indent=2)
        mesh_file.write("\n")
