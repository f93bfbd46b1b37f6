from __future__ import annotations

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastobem.errors import GeometryError
from elastobem.mesh import (BoundaryMesh, Part, build_circle_mesh, build_polygon_mesh, build_square_mesh,
                            element_frame)


def test_square_orientation_and_counts():
    m = build_square_mesh(0.5, 4, {"b": "contact", "r": "neumann", "t": "neumann", "l": "dirichlet"})
    assert m.n_elements == 16 and m.n_nodes == 16
    assert m.h_max == pytest.approx(0.25)
    assert m.diameter == pytest.approx(np.sqrt(2.0))
    bottom = m.elements_on_side("b")
    assert np.allclose(m.normal[bottom], [0.0, -1.0])
    assert np.allclose(m.normal[m.elements_on_side("r")], [1.0, 0.0])
    assert list(m.elements_with(["contact"])) == list(bottom)
    assert set(m.part) == {Part.CONTACT, Part.NEUMANN, Part.DIRICHLET}


def test_normal_tangent_convention():
    m = build_square_mesh(1.0, 1, "neumann")
    d = m.nodes[m.elements[:, 1]] - m.nodes[m.elements[:, 0]]
    d /= np.hypot(d[:, 0], d[:, 1])[:, None]
    assert np.allclose(m.normal, np.column_stack([d[:, 1], -d[:, 0]]))
    assert np.allclose(m.tangent, -d)


def test_clockwise_input_is_reoriented_with_tags():
    verts = [(0, 0), (0, 1), (1, 1), (1, 0)]  # clockwise; side 3 is the bottom (1,0) -> (0,0)
    m = build_polygon_mesh(verts, 2, ["n", "n", "n", "c"], ["l", "t", "r", "b"])
    for e in m.elements_on_side("b"):
        assert m.part[e] == Part.CONTACT
        assert np.allclose(m.normal[e], [0.0, -1.0])
    mid = m.midpoints()
    # every outward normal points away from the centroid
    assert np.all(((mid - 0.5) * m.normal).sum(1) > 0)


@given(st.floats(0.1, 5.0), st.integers(3, 64), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_circle_normals_point_outward(radius, n, cx, cy):
    m = build_circle_mesh((cx, cy), radius, n)
    rel = m.midpoints() - (cx, cy)
    assert np.all((rel * m.normal).sum(1) > 0)
    assert np.allclose(np.hypot(*m.normal.T), 1.0)
    assert m.length.sum() <= 2 * np.pi * radius


@given(st.integers(1, 12), st.floats(0.1, 10.0))
@settings(max_examples=30, deadline=None)
def test_perimeter_is_preserved(n, a):
    m = build_square_mesh(a, n, "neumann")
    assert m.length.sum() == pytest.approx(8 * a)
    assert np.allclose(m.length, 2 * a / n)


def test_node_normals_average_adjacent_elements():
    m = build_square_mesh(0.5, 2, "neumann")
    corner = int(np.argmin(np.abs(m.nodes - (-0.5, -0.5)).sum(1)))
    assert np.allclose(m.node_normals()[corner], np.array([-1.0, -1.0]) / np.sqrt(2))
    only_bottom = m.node_normals(m.elements_on_side("b"))
    assert np.allclose(only_bottom[corner], [0.0, -1.0])


def test_element_frame():
    m = build_square_mesh(0.5, 2, "neumann")
    mid, n, tau, ln = element_frame(m, 0)
    assert np.allclose(mid, [-0.25, -0.5]) and np.allclose(n, [0, -1]) and np.allclose(tau, [-1, 0])
    assert ln == pytest.approx(0.5)
    with pytest.raises(IndexError):
        element_frame(m, 99)


def test_csv_export(tmp_path):
    m = build_square_mesh(0.5, 1, {"b": "c", "r": "n", "t": "n", "l": "d"})
    p = tmp_path / "mesh.csv"
    m.to_csv(p)
    rows = list(csv.DictReader(open(p)))
    assert len(rows) == 4 and rows[0]["part"] == "contact"
    assert float(rows[0]["ny"]) == -1.0


@pytest.mark.parametrize("verts", [
    [(0, 0), (1, 1), (1, 0), (0, 1)],        # bow tie
    [(0, 0), (1, 0), (2, 0)],                # collinear
    [(0, 0), (1, 0)],
])
def test_invalid_polygons_rejected(verts):
    with pytest.raises(GeometryError):
        build_polygon_mesh(verts, 2, "neumann")


def test_invalid_inputs_rejected():
    with pytest.raises(GeometryError):
        build_polygon_mesh([(0, 0), (0, 0), (1, 1)], 1, "n")
    with pytest.raises(GeometryError):
        build_square_mesh(1.0, 0, "n")
    with pytest.raises(GeometryError):
        build_square_mesh(1.0, 1, ["n", "n"])
    with pytest.raises(GeometryError):
        build_circle_mesh((0, 0), -1.0, 8)
    with pytest.raises(GeometryError):
        Part.parse("glue")
    with pytest.raises(GeometryError):
        BoundaryMesh(np.zeros((2, 2)), [[0, 1]], ("n",))


def test_mesh_is_immutable():
    m = build_square_mesh(0.5, 1, "n")
    with pytest.raises(ValueError):
        m.nodes[0, 0] = 3.0
