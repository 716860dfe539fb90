from typing import Dict, List, Tuple

import numpy as np

from . import errors as E
from .mesh import PolyMesh
from .polyquad import dim_poly


# X_Srot(k) and X_ddr,grad(k+1) share one layout
SPACE_ALIASES = {"X_ddr_grad": "X_Srot"}


def entity_dims(space: str, k: int) -> Tuple[int, int, int]:
    """Per-vertex, per-edge and per-cell component dimensions."""
    space = SPACE_ALIASES.get(space, space)
    dims: Dict[str, Tuple[int, int, int]] = {
        "X_Sgrad": (3, max(k, 0) + (k + 1), dim_poly(k - 2)),
        "X_Srot": (2, 2 * (k + 1), 2 * dim_poly(k - 1)),
        "X_ddr_rot": (0, 2 * (k + 2), 4 * dim_poly(k)),
        "X_ddr_rot_sym": (0, 2 * (k + 2), 3 * dim_poly(k)),
        "P_k": (0, 0, dim_poly(k)),
        "P_kp1_vec": (0, 0, 2 * dim_poly(k + 1)),
        "DDR0_grad": (1, 0, 0),
        "DDR0_curl": (0, 1, 0),
        "P0": (0, 0, 1),
    }

    if space not in dims:
        raise E.LayoutMismatchError(f"unknown space tag: {space}")

    return dims[space]


class DofLayout:
    """Global numbering: all vertex blocks, then edge blocks, then cell blocks."""

    def __init__(self, space: str, mesh: PolyMesh, k: int) -> None:
        self.space: str = SPACE_ALIASES.get(space, space)
        self.mesh: PolyMesh = mesh
        self.k: int = k
        self.vertex_dim, self.edge_dim, self.cell_dim = entity_dims(self.space, k)
        self.edge_offset: int = mesh.num_vertices * self.vertex_dim
        self.cell_offset: int = self.edge_offset + mesh.num_edges * self.edge_dim
        self.dim: int = self.cell_offset + mesh.num_cells * self.cell_dim

    def __repr__(self) -> str:
        return f"DofLayout({self.space}, k={self.k}, dim={self.dim})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DofLayout)
            and self.space == other.space
            and self.k == other.k
            and self.mesh is other.mesh
        )

    def vertex_dofs(self, vertex: int) -> np.ndarray:
        start = vertex * self.vertex_dim
        return np.arange(start, start + self.vertex_dim)

    def edge_dofs(self, edge: int) -> np.ndarray:
        start = self.edge_offset + edge * self.edge_dim
        return np.arange(start, start + self.edge_dim)

    def cell_dofs(self, cell: int) -> np.ndarray:
        start = self.cell_offset + cell * self.cell_dim
        return np.arange(start, start + self.cell_dim)

    def edge_local(self, edge: int) -> np.ndarray:
        a, b = self.mesh.edges[edge]
        return np.concatenate(
            [self.vertex_dofs(a), self.vertex_dofs(b), self.edge_dofs(edge)]
        )

    def cell_local(self, cell: int) -> np.ndarray:
        blocks: List[np.ndarray] = [self.vertex_dofs(v) for v in self.mesh.cell_vertices(cell)]
        blocks += [self.edge_dofs(e) for e in self.mesh.cell_edges(cell)]
        blocks.append(self.cell_dofs(cell))
        return np.concatenate(blocks).astype(int)

    def cell_slices(self, cell: int) -> Dict[str, object]:
        """Positions of each entity block inside the cell-local vector."""
        nv = len(self.mesh.cell_vertices(cell))
        ne = len(self.mesh.cell_edges(cell))
        vertex = [slice(i * self.vertex_dim, (i + 1) * self.vertex_dim) for i in range(nv)]
        start = nv * self.vertex_dim
        edge = [
            slice(start + j * self.edge_dim, start + (j + 1) * self.edge_dim)
            for j in range(ne)
        ]
        start += ne * self.edge_dim
        return {
            "vertices": vertex,
            "edges": edge,
            "cell": slice(start, start + self.cell_dim),
            "size": start + self.cell_dim,
        }

    def local_size(self, cell: int) -> int:
        return int(self.cell_slices(cell)["size"])

    def counts(self) -> Dict[str, int]:
        return {
            "vertex": self.vertex_dim,
            "edge": self.edge_dim,
            "cell": self.cell_dim,
            "total": self.dim,
        }

    def require(self, other: "DofLayout") -> None:
        if self != other:
            raise E.LayoutMismatchError(f"expected {self!r}, got {other!r}")
