from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .. import constants as C
from .. import errors as E
from ..logger import logger
from .polymesh import PolyMesh


Corners = List[Tuple[float, float]]


class MeshFactory:
    """Builds conforming meshes from cell corner polygons.

    Cells are given by their corners in grid units. Any vertex of another cell
    lying inside a side is inserted into the loop, which is how hanging nodes
    arise.
    """

    def __init__(self, scale: float = 1.0) -> None:
        self.scale: float = scale
        self.index: Dict[Tuple[float, float], int] = dict()
        self.points: List[Tuple[float, float]] = []
        self.corners: List[Corners] = []

    def vertex(self, point: Tuple[float, float]) -> int:
        key = (round(point[0], 12), round(point[1], 12))

        if key not in self.index:
            self.index[key] = len(self.points)
            self.points.append(key)

        return self.index[key]

    def add_cell(self, corners: Corners) -> None:
        for point in corners:
            self.vertex(point)
        self.corners.append(list(corners))

    def _loop(self, corners: Corners) -> List[int]:
        points = np.asarray(self.points)
        loop: List[int] = []

        for a, b in zip(corners, corners[1:] + corners[:1]):
            pa, pb = np.asarray(a), np.asarray(b)
            side = pb - pa
            length2 = float(side @ side)
            rel = points - pa
            t = rel @ side / length2
            cross = rel[:, 0] * side[1] - rel[:, 1] * side[0]
            on_side = (np.abs(cross) < 1e-12 * length2) & (t > 1e-12) & (t < 1 - 1e-12)
            inner = np.flatnonzero(on_side)

            loop.append(self.vertex(a))
            loop.extend(int(v) for v in inner[np.argsort(t[inner])])

        return loop

    def __call__(self, name: str, transform: Callable = None) -> PolyMesh:
        loops = [self._loop(corners) for corners in self.corners]
        vertices = np.asarray(self.points) * self.scale

        if transform is not None:
            vertices = transform(vertices)

        return PolyMesh(vertices, loops, name=name)


def _square(i: float, j: float, size: float = 1.0) -> Corners:
    return [(i, j), (i + size, j), (i + size, j + size), (i, j + size)]


def _grid(width: int, height: int, skip: Sequence[Tuple[int, int]] = ()) -> MeshFactory:
    factory = MeshFactory()
    skipped = set(skip)

    for j in range(height):
        for i in range(width):
            if (i, j) not in skipped:
                factory.add_cell(_square(i, j))

    return factory


def cartesian(n: int) -> PolyMesh:
    factory = _grid(n, n)
    factory.scale = 1.0 / n
    return factory(f"cartesian-{n}")


def split_triangles(n: int) -> PolyMesh:
    factory = MeshFactory(scale=1.0 / n)

    for j in range(n):
        for i in range(n):
            factory.add_cell([(i, j), (i + 1, j), (i + 1, j + 1)])
            factory.add_cell([(i, j), (i + 1, j + 1), (i, j + 1)])

    return factory(f"split_triangles-{n}")


def distorted_quads(n: int) -> PolyMesh:
    def distort(vertices: np.ndarray) -> np.ndarray:
        x, y = vertices[:, 0], vertices[:, 1]
        interior = (x > 1e-12) & (x < 1 - 1e-12) & (y > 1e-12) & (y < 1 - 1e-12)
        shift = 0.2 / n * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
        moved = vertices.copy()
        moved[interior, 0] += shift[interior]
        moved[interior, 1] += shift[interior]
        return moved

    factory = _grid(n, n)
    factory.scale = 1.0 / n
    return factory(f"distorted_quads-{n}", transform=distort)


def agglomerated_nonconvex(n: int) -> PolyMesh:
    # the bottom-left 2x2 block holds a refined square and an L-shaped cell
    m = 2 * n
    factory = MeshFactory(scale=1.0 / m)

    for i, j in [(0, 0), (0.5, 0), (0, 0.5), (0.5, 0.5)]:
        factory.add_cell(_square(i, j, 0.5))

    factory.add_cell([(1, 0), (2, 0), (2, 2), (0, 2), (0, 1), (1, 1)])

    for j in range(m):
        for i in range(m):
            if i >= 2 or j >= 2:
                factory.add_cell(_square(i, j))

    return factory(f"agglomerated_nonconvex-{n}")


def ring_one_hole(n: int) -> PolyMesh:
    hole = [(i, j) for i in range(n, 2 * n) for j in range(n, 2 * n)]
    factory = _grid(3 * n, 3 * n, skip=hole)
    factory.scale = 1.0 / (3 * n)
    return factory(f"ring_one_hole-{n}")


def ring_two_holes(n: int) -> PolyMesh:
    holes = [
        (i, j)
        for i in list(range(n, 2 * n)) + list(range(3 * n, 4 * n))
        for j in range(n, 2 * n)
    ]
    factory = _grid(5 * n, 3 * n, skip=holes)
    factory.scale = 1.0 / (5 * n)
    return factory(f"ring_two_holes-{n}")


FAMILIES: Dict[str, Callable[[int], PolyMesh]] = {
    "cartesian": cartesian,
    "split_triangles": split_triangles,
    "distorted_quads": distorted_quads,
    "agglomerated_nonconvex": agglomerated_nonconvex,
    "ring_one_hole": ring_one_hole,
    "ring_two_holes": ring_two_holes,
}


def generate_mesh(family: str, n: int) -> PolyMesh:
    if family not in FAMILIES:
        raise E.MeshFormatError(
            f"unknown mesh family {family!r}, expected one of {C.MESH_FAMILIES}"
        )

    if n < 1:
        raise E.MeshFormatError(f"resolution must be >= 1, got {n}")

    mesh = FAMILIES[family](n)
    logger.debug(f"generated {mesh!r}")

    return mesh
