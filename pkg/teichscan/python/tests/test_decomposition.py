import math

import pytest
from hypothesis import given, settings, strategies as st

from teichscan.curves import intersection_number, landmark_curve, restrict, torus_curve
from teichscan.decomposition import (
    AnnulusData,
    ThickPiece,
    diam_approx,
    expanding_annuli,
    find_cylinders,
    find_short_curves,
    search_radius,
    shortest_closed_curve,
    twist,
)
from teichscan.errors import PreconditionError, StructuralError
from teichscan.flow import flow_curve, flow_surface
from teichscan.surface import build_flat_torus


def _horizontal(cylinders):
    return [c for c in cylinders if abs(c.direction[1]) <= 1e-9]


def test_torus_cylinders(unit_torus):
    cylinders = find_cylinders(unit_torus, 1.5)
    circumferences = sorted(c.circumference for c in cylinders)
    assert circumferences == pytest.approx([1.0, 1.0, math.sqrt(2), math.sqrt(2)])

    (horizontal,) = _horizontal(cylinders)
    assert horizontal.height == pytest.approx(1.0)
    assert horizontal.modulus == pytest.approx(1.0)
    assert horizontal.contains(0, unit_torus.triangle_corners(0).mean(axis=0))


def test_slit_tori_cylinder(slit_tori):
    cylinders = _horizontal(find_cylinders(slit_tori, 0.2))
    shapes = sorted((round(c.circumference, 9), round(c.height, 9)) for c in cylinders)
    assert shapes == [(0.1, 0.1), (0.1, 10.0), (0.1, 10.0)]


@given(m0=st.floats(min_value=3.5, max_value=40, allow_nan=False), area=st.floats(min_value=0.1, max_value=50))
@settings(deadline=None)
def test_search_radius(m0, area):
    radius = search_radius(area, m0, 1.5)
    x = area * 1.5**2 / radius**2
    assert x + 2 * math.log(max(x, 1.0)) == pytest.approx(m0, rel=1e-9)


def test_filling_cylinder_has_no_expanding_annuli(unit_torus):
    (horizontal,) = _horizontal(find_cylinders(unit_torus, 1.5))
    assert expanding_annuli(unit_torus, horizontal) == (0.0, 0.0)


def test_annulus_data(unit_torus):
    (horizontal,) = _horizontal(find_cylinders(unit_torus, 1.5))
    annulus = AnnulusData.build(0, horizontal, 3.0, 0.5)
    assert annulus.d == pytest.approx(4.5)
    assert annulus.mod_e == pytest.approx(math.log(3.0))
    assert annulus.mod_g == 0.0
    assert annulus.mod_f == pytest.approx(1.0)
    assert annulus.ext_estimate == pytest.approx(1 / (1 + math.log(3.0)))
    assert annulus.key == ("annulus", 0)


def test_thick_torus(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    assert tt.shorts == []
    (piece,) = tt.pieces
    assert not piece.degenerate
    assert piece.triangles == frozenset({0, 1})
    assert piece.diam == pytest.approx(math.sqrt(2))
    assert piece.systole == pytest.approx(1.0)
    assert tt.to_dict()["schema"] == "teichscan-thickthin/1"


def test_thin_torus():
    s = flow_surface(build_flat_torus(1.0, 1.0), -1.5)
    tt = find_short_curves(s, 5.0)

    (annulus,) = tt.shorts
    assert annulus.length == pytest.approx(math.exp(-1.5))
    assert annulus.mod_f == pytest.approx(math.exp(3.0))
    assert annulus.e == annulus.g == 0.0

    horizontal = torus_curve(s, 1, 0)
    assert tt.short_match(horizontal) is annulus
    assert tt.short_match(torus_curve(s, 0, 1)) is None
    assert tt.crossing_count(torus_curve(s, 0, 1), annulus) == 1


def test_m0_floor(unit_torus):
    with pytest.raises(PreconditionError):
        find_short_curves(unit_torus, 3.0)


def test_slit_tori_decomposition(slit_tori):
    tt = find_short_curves(slit_tori, 5.0)
    assert len(tt.shorts) == 2
    for annulus in tt.shorts:
        assert annulus.length == pytest.approx(0.1)
        assert annulus.mod_f == pytest.approx(100.0)

    a, b = tt.shorts
    assert intersection_number(slit_tori, a.core, b.core) == 0

    (piece,) = tt.pieces
    assert piece.triangles == frozenset(slit_tori.landmarks["cylinder_triangles"])
    assert piece.vertices == frozenset(range(4))
    assert set(piece.boundary) == {0, 1}
    # The joining cylinder core, not the half-slit saddle connection of length 0.05
    assert piece.systole == pytest.approx(0.1)

    alpha = landmark_curve(slit_tori, "alpha")
    assert tt.short_match(alpha) is None
    arcs, length = restrict(slit_tori, alpha, piece, tt)
    assert length == pytest.approx(0.1)
    assert sum(arc.chain.length() for arc in arcs) == pytest.approx(0.1)

    with pytest.raises(StructuralError):
        restrict(build_flat_torus(1.0, 1.0), alpha, piece, tt)


def test_slit_tori_alpha_is_short(slit_tori):
    s = flow_surface(slit_tori, -2.0)
    tt = find_short_curves(s, 5.0)
    alpha = flow_curve(landmark_curve(slit_tori, "alpha"), -2.0)

    annulus = tt.short_match(alpha)
    assert annulus is not None
    assert annulus.length == pytest.approx(0.1 * math.exp(-2.0))
    assert annulus.mod_f == pytest.approx(math.exp(4.0))


def test_foreign_region(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    other = ThickPiece(0, frozenset({0, 1}), frozenset({0}), ())
    with pytest.raises(StructuralError):
        tt.restriction(torus_curve(unit_torus, 1, 0), other)


def test_degenerate_diameter(unit_torus):
    assert diam_approx(unit_torus, ThickPiece(0, frozenset(), frozenset({0}), ())) == 0.0


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("mode", ["max", "sum"])
def test_twist_counts_wraps(unit_torus, n, mode):
    (horizontal,) = _horizontal(find_cylinders(unit_torus, 1.5))
    assert twist(unit_torus, horizontal, torus_curve(unit_torus, n, 1), mode) == n


def _vertical(cylinders):
    return [c for c in cylinders if abs(c.direction[0]) <= 1e-9]


def _shapes(cylinders):
    return sorted((round(c.circumference, 9), round(c.height, 9)) for c in cylinders)


def test_l_shape_cylinders(l_shape):
    cylinders = find_cylinders(l_shape, 2.5)
    assert _shapes(_horizontal(cylinders)) == [(1.0, 1.0), (2.0, 1.0)]
    assert _shapes(_vertical(cylinders)) == [(1.0, 1.0), (2.0, 1.0)]
    assert sum(c.circumference * c.height for c in _horizontal(cylinders)) == pytest.approx(l_shape.area())


def test_slit_tori_expanding_annuli(slit_tori):
    cylinders = _horizontal(find_cylinders(slit_tori, 0.2))
    joining = [c for c in cylinders if c.height < 1.0]
    tori = [c for c in cylinders if c.height > 1.0]
    assert len(joining) == 1 and len(tori) == 2

    # Half the a/2 slit edge of a torus, and half the height a of the joining cylinder
    assert expanding_annuli(slit_tori, joining[0]) == pytest.approx((0.025, 0.025))
    for cylinder in tori:
        assert expanding_annuli(slit_tori, cylinder) == pytest.approx((0.05, 0.05))


@pytest.mark.parametrize("t", [-0.7, 0.4])
def test_cylinders_follow_the_flow(l_shape, t):
    before = find_cylinders(l_shape, 2.5)
    after = find_cylinders(flow_surface(l_shape, t), 2.5 * math.exp(abs(t)))

    for cylinder in before:
        h, v = cylinder.direction * cylinder.circumference
        length = math.hypot(math.exp(t) * h, math.exp(-t) * v)
        height = cylinder.circumference * cylinder.height / length
        assert any(
            c.circumference == pytest.approx(length) and c.height == pytest.approx(height) for c in after
        ), cylinder


def test_systole_is_a_closed_curve(slit_tori):
    tt = find_short_curves(slit_tori, 5.0)
    assert min(c.length for c in tt.connections) == pytest.approx(0.05)

    # Loops or cylinder cores only: the torus cores are short and do not count
    assert shortest_closed_curve(slit_tori, tt.connections, tt.cylinders, tt.shorts) == pytest.approx(0.1)
