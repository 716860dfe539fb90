import json

import numpy as np
import pytest

import polyddr.errors as E
from polyddr.mesh import (
    PolyMesh,
    betti_numbers,
    generate_mesh,
    load_mesh,
    regularity,
    write_mesh,
)
from polyddr.mesh import geometry


def test_unit_square_topology(unit_square):
    assert (unit_square.num_vertices, unit_square.num_edges, unit_square.num_cells) == (4, 4, 1)
    assert all(a < b for a, b in unit_square.edges)
    assert unit_square.area[0] == pytest.approx(1.0)
    assert unit_square.h == pytest.approx(np.sqrt(2.0))


def test_normals_rotate_tangents(unit_square):
    t, n = unit_square.t_E, unit_square.n_E

    assert np.allclose(n[:, 0], -t[:, 1])
    assert np.allclose(n[:, 1], t[:, 0])
    assert np.allclose((t ** 2).sum(axis=1), 1.0)


def test_interior_edge_has_opposite_orientations(two_triangles):
    interior = [e for e in range(two_triangles.num_edges) if not two_triangles.is_boundary_edge(e)]
    assert len(interior) == 1

    (edge,) = interior
    signs = [
        omega
        for cell in two_triangles.edge_cells[edge]
        for e, omega in two_triangles.cells[cell]
        if e == edge
    ]
    assert sorted(signs) == [-1, 1]


def test_omega_ev(two_triangles):
    edge = two_triangles.edges.index((0, 2))

    assert two_triangles.omega_EV(edge, 2) == 1
    assert two_triangles.omega_EV(edge, 0) == -1
    with pytest.raises(E.MeshFormatError):
        two_triangles.omega_EV(edge, 1)


def test_closed_loop_repeat_is_dropped():
    mesh = PolyMesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2, 0]])

    assert mesh.loops == [[0, 1, 2]]


@pytest.mark.parametrize(
    "vertices,loops,error",
    [
        ([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]], E.ClockwiseLoopError),
        ([[0, 0], [1, 0], [0, 1]], [[0, 1, 1, 2]], E.DuplicateVertexError),
        ([[0, 0], [1, 0]], [[0, 1]], E.NonClosedLoopError),
        ([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]], E.DegenerateCellError),
        ([[0, 0], [1, 0], [0, 1]], [[0, 1, 3]], E.MeshFormatError),
        (
            [[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.5, 2]],
            [[0, 1, 2], [1, 0, 3], [0, 1, 4]],
            E.NonManifoldEdgeError,
        ),
    ],
)
def test_invalid_meshes_rejected(vertices, loops, error):
    with pytest.raises(error):
        PolyMesh(vertices, loops)


def test_load_mesh_missing_keys(broken_mesh_path):
    with pytest.raises(E.MeshFormatError):
        load_mesh(broken_mesh_path)


def test_load_mesh_unknown_format(unit_square_path):
    with pytest.raises(E.MeshFormatError):
        load_mesh(unit_square_path, format="obj")


def test_write_mesh_lists_edges(ring4, tmp_path):
    path = str(tmp_path / "ring4.json")
    write_mesh(ring4, path)

    with open(path) as mesh_file:
        data = json.load(mesh_file)

    assert data["edges"] == [list(edge) for edge in ring4.edges]
    assert load_mesh(path).loops == ring4.loops


@pytest.mark.parametrize(
    "family,counts,betti",
    [
        ("cartesian", (9, 12, 4), (1, 0)),
        ("split_triangles", (9, 16, 8), (1, 0)),
        ("distorted_quads", (9, 12, 4), (1, 0)),
        ("agglomerated_nonconvex", (12, 16, 5), (1, 0)),
    ],
)
def test_family_topology(family, counts, betti):
    mesh = generate_mesh(family, 2 if family != "agglomerated_nonconvex" else 1)

    assert (mesh.num_vertices, mesh.num_edges, mesh.num_cells) == counts
    assert betti_numbers(mesh) == betti


@pytest.mark.parametrize(
    "family,betti",
    [("ring_one_hole", (1, 1)), ("ring_two_holes", (1, 2))],
)
def test_ring_families_have_holes(family, betti):
    assert betti_numbers(generate_mesh(family, 1)) == betti


def test_ring_fixture_betti(ring4):
    assert ring4.euler_characteristic == 0
    assert betti_numbers(ring4) == (1, 1)


def test_hanging_nodes_enter_the_loop():
    mesh = generate_mesh("agglomerated_nonconvex", 1)

    assert max(len(loop) for loop in mesh.loops) == 8


def test_generate_mesh_rejects_bad_input():
    with pytest.raises(E.MeshFormatError):
        generate_mesh("voronoi", 2)
    with pytest.raises(E.MeshFormatError):
        generate_mesh("cartesian", 0)


def test_inner_point_of_nonconvex_cell(l_hexagon):
    polygon = l_hexagon.polygon(0)
    point = l_hexagon.x_T[0]

    assert geometry.contains(polygon, point)[0]
    assert geometry.sees_every_edge(polygon, point)[0]


def test_convex_inner_point_is_centroid(unit_square):
    assert np.allclose(unit_square.x_T[0], [0.5, 0.5])


def test_regularity(unit_square):
    stats = regularity(unit_square)

    assert stats["h"] == pytest.approx(np.sqrt(2.0))
    assert stats["max_h_over_rho"] == pytest.approx(2 * np.sqrt(2.0))
    assert stats["min_hE_over_hT"] == pytest.approx(1 / np.sqrt(2.0))


def test_mesh_arrays_are_read_only(unit_square):
    with pytest.raises(ValueError):
        unit_square.vertices[0, 0] = 5.0
