import os
import sys

import pytest


LIB_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "lib"))
FIXTURES_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "fixtures"))
sys.path.insert(0, LIB_PATH)


def fixture_path(name):
    return os.path.join(FIXTURES_PATH, name)


@pytest.fixture
def polyddr_yaml_path():
    return fixture_path("polyddr.yml")


@pytest.fixture
def chdir_fixtures(monkeypatch):
    monkeypatch.chdir(FIXTURES_PATH)


@pytest.fixture
def unit_square_path():
    return fixture_path("unit_square.json")


@pytest.fixture
def ring4_path():
    return fixture_path("ring4.json")


@pytest.fixture
def unit_square(unit_square_path):
    from polyddr.mesh import load_mesh

    return load_mesh(unit_square_path, name="unit_square")


@pytest.fixture
def two_triangles():
    from polyddr.mesh import load_mesh

    return load_mesh(fixture_path("two_triangles.json"), name="two_triangles")


@pytest.fixture
def ring4(ring4_path):
    from polyddr.mesh import load_mesh

    return load_mesh(ring4_path, name="ring4")


@pytest.fixture
def l_hexagon():
    from polyddr.mesh import load_mesh

    return load_mesh(fixture_path("l_hexagon.json"), name="l_hexagon")


@pytest.fixture
def triangle():
    from polyddr.mesh import PolyMesh

    return PolyMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], name="triangle")


@pytest.fixture
def broken_mesh_path():
    return fixture_path("broken.json")
