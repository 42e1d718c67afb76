import math

import pytest
from hypothesis import given, settings, strategies as st

from teichscan.errors import ConstructionError
from teichscan.surface import (
    FlatSurface,
    PlanarVector,
    build_flat_torus,
    build_slit_tori,
    build_square_tiled,
    perm_from_cycles,
    validate,
)

sides = st.floats(min_value=0.05, max_value=20, allow_nan=False, allow_infinity=False)


@given(w=sides, h=sides)
@settings(deadline=None)
def test_torus_invariants(w, h):
    s = build_flat_torus(w, h)
    assert validate(s).ok
    assert s.num_triangles() == 2
    assert s.num_vertices() == 1
    assert s.genus() == 1
    assert s.cone_angle(0) == pytest.approx(2 * math.pi)
    assert s.area() == pytest.approx(w * h)


def test_l_shape(l_shape):
    assert validate(l_shape).ok
    assert l_shape.area() == pytest.approx(3.0)
    assert l_shape.num_vertices() == 1
    assert l_shape.cone_angle(0) == pytest.approx(6 * math.pi)
    assert l_shape.genus() == 2


@pytest.mark.parametrize("a", [0.1, 0.25, 0.4])
def test_slit_tori(a):
    s = build_slit_tori(a)
    assert validate(s).ok
    assert s.genus() == 2
    assert s.num_vertices() == 4
    assert s.area() == pytest.approx(2 + a**2)
    assert sorted(s.landmarks["slit_endpoints"]) == [0, 1, 2, 3]
    assert s.landmarks["cylinder_triangles"] == [4, 5, 6, 7]

    points = s.singular_points()
    assert [p.vertex for p in points] == [0, 1, 2, 3]
    assert all(p.cone_angle == pytest.approx(3 * math.pi) for p in points)


@pytest.mark.parametrize("a", [0.0, 0.5, -1.0])
def test_slit_tori_range(a):
    with pytest.raises(ConstructionError):
        build_slit_tori(a)


@pytest.mark.parametrize("w, h", [(0, 1), (1, -2)])
def test_torus_dimensions(w, h):
    with pytest.raises(ConstructionError):
        build_flat_torus(w, h)


def test_square_tiled_disconnected():
    with pytest.raises(ConstructionError):
        build_square_tiled([0, 1], [0, 1])


def test_square_tiled_not_a_permutation():
    with pytest.raises(ConstructionError):
        build_square_tiled([0, 0], [1, 0])


def test_perm_from_cycles():
    assert perm_from_cycles(3, [[1, 2]]) == [1, 0, 2]
    assert perm_from_cycles(3, [[1, 2, 3]]) == [1, 2, 0]


def test_planar_vector_finite():
    with pytest.raises(ConstructionError):
        PlanarVector(math.inf, 0.0)


def test_round_trip(slit_tori):
    again = FlatSurface.from_dict(slit_tori.to_dict())
    assert again.triangles == slit_tori.triangles
    assert again.gluings == slit_tori.gluings
    assert again.marked == slit_tori.marked
    assert again.landmarks["alpha"] == slit_tori.landmarks["alpha"]


def test_validate_reports_open_triangle(unit_torus):
    triangles = [list(tri) for tri in unit_torus.triangles]
    triangles[0][0] = PlanarVector(1.1, 0.0)
    broken = FlatSurface(triangles, unit_torus.gluings)

    report = validate(broken)
    assert not report.ok
    assert "triangle-closure" in report.invariants()
    assert report.to_dict()["ok"] is False
