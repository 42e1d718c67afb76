import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from teichscan.curves import (
    ArcOnSurface,
    FlatCurve,
    Segment,
    SegmentChain,
    curve_from_dict,
    curve_to_dict,
    flat_length,
    hv_lengths,
    intersection_number,
    is_geodesic,
    landmark_curve,
    segment_in_direction,
    sub_chain,
    tighten,
    torus_curve,
)
from teichscan.errors import PreconditionError, SchemaError, StructuralError
from teichscan.surface import build_flat_torus

SLOPES = [
    ((1, 0), (0, 1), 1),
    ((1, 0), (1, 1), 1),
    ((1, 1), (1, -1), 2),
    ((2, 1), (1, 2), 3),
    ((1, 0), (2, 1), 1),
    ((1, 2), (1, 0), 2),
    ((1, 0), (1, 0), 0),
    ((1, 1), (1, 1), 0),
]


@pytest.mark.parametrize("first, second, expected", SLOPES)
def test_torus_intersections(unit_torus, first, second, expected):
    a = torus_curve(unit_torus, *first)
    b = torus_curve(unit_torus, *second)
    assert expected == abs(first[0] * second[1] - first[1] * second[0])
    assert intersection_number(unit_torus, a, b) == expected
    assert intersection_number(unit_torus, b, a) == expected


@st.composite
def primitive_slopes(draw, bound=3):
    p = draw(st.integers(min_value=-bound, max_value=bound))
    q = draw(st.integers(min_value=-bound, max_value=bound))
    assume(math.gcd(p, q) == 1)
    return p, q


@settings(max_examples=100, deadline=None)
@given(first=primitive_slopes(), second=primitive_slopes())
def test_torus_intersections_are_determinants(first, second):
    s = build_flat_torus(1.0, 1.0)
    a = torus_curve(s, *first)
    b = torus_curve(s, *second)
    expected = abs(first[0] * second[1] - first[1] * second[0])
    assert intersection_number(s, a, b) == expected
    assert intersection_number(s, b, a) == expected


def test_intersection_is_bilinear(unit_torus):
    a = torus_curve(unit_torus, 1, 1, weight=2.0)
    b = torus_curve(unit_torus, 1, -1, weight=3.0)
    assert intersection_number(unit_torus, a, b) == pytest.approx(12.0)


def test_lengths():
    s = build_flat_torus(2.0, 1.0)
    curve = torus_curve(s, 1, 1)
    assert flat_length(curve) == pytest.approx(math.sqrt(5))
    assert hv_lengths(curve) == pytest.approx((2.0, 1.0))
    assert flat_length(curve.scaled(3)) == pytest.approx(3 * math.sqrt(5))


def test_torus_curves_are_geodesic(unit_torus):
    for p, q in [(1, 0), (0, 1), (1, 1), (2, 1), (1, -3)]:
        assert is_geodesic(unit_torus, torus_curve(unit_torus, p, q).chain())


def test_torus_curve_needs_primitive(unit_torus):
    with pytest.raises(PreconditionError):
        torus_curve(unit_torus, 2, 2)


def test_tighten_staircase(unit_torus):
    # Slope (1, 2) then slope (1, -1): homotopic to slope (2, 1)
    staircase = SegmentChain(
        (
            segment_in_direction(unit_torus, 0, (1.0, 2.0), math.sqrt(5)),
            segment_in_direction(unit_torus, 0, (1.0, -1.0), math.sqrt(2)),
        ),
        closed=True,
    )
    assert not is_geodesic(unit_torus, staircase)

    tight = tighten(unit_torus, staircase)
    assert is_geodesic(unit_torus, tight)
    assert tight.length() == pytest.approx(math.sqrt(5))

    again = tighten(unit_torus, tight)
    assert again.length() == pytest.approx(tight.length())
    assert len(again.segments) == len(tight.segments)
    assert sorted(round(s.length(), 9) for s in again.segments) == sorted(round(s.length(), 9) for s in tight.segments)

    assert intersection_number(unit_torus, FlatCurve(tight), torus_curve(unit_torus, 2, 1)) == 0
    assert intersection_number(unit_torus, FlatCurve(tight), torus_curve(unit_torus, 1, 0)) == 1


def test_tighten_keeps_geodesics(unit_torus):
    chain = torus_curve(unit_torus, 2, 1).chain()
    assert tighten(unit_torus, chain).length() == pytest.approx(chain.length())


def test_structure_checks(unit_torus):
    with pytest.raises(StructuralError):
        Segment.at_corner(0, 0, (0.0, 0.0))
    with pytest.raises(PreconditionError):
        torus_curve(unit_torus, 1, 0, weight=0.0)
    with pytest.raises(StructuralError):
        FlatCurve(SegmentChain((Segment.at_corner(0, 0, (0.5, 0.0)),), closed=False))

    curve = torus_curve(unit_torus, 1, 0)
    with pytest.raises(StructuralError):
        ArcOnSurface(curve.chain(), curve, 0.0, 1.0)


def test_sub_chain(unit_torus):
    curve = torus_curve(unit_torus, 1, 0)
    piece = sub_chain(unit_torus, curve.chain(), 0.25, 0.75)
    assert not piece.closed
    assert piece.length() == pytest.approx(0.5)
    assert piece.hv() == pytest.approx((0.5, 0.0))

    # Wraps around the start once on closed chains
    assert sub_chain(unit_torus, curve.chain(), 0.75, 1.5).length() == pytest.approx(0.75)


def test_landmark_curve(slit_tori):
    alpha = landmark_curve(slit_tori, "alpha")
    assert flat_length(alpha) == pytest.approx(0.1)
    assert hv_lengths(alpha) == pytest.approx((0.1, 0.0))
    assert alpha.chain().is_anchored()

    with pytest.raises(StructuralError):
        landmark_curve(slit_tori, "beta")


def test_curve_round_trip(unit_torus):
    curve = torus_curve(unit_torus, 2, 1, weight=1.5)
    again = curve_from_dict(curve_to_dict(curve))
    assert again.weight == 1.5
    assert again.name == curve.name
    assert again.chain().closed
    assert np.allclose(again.chain().segments[0].array(), curve.chain().segments[0].array())


def test_curve_schema():
    with pytest.raises(SchemaError):
        curve_from_dict({"schema": "teichscan-curve/0", "segments": []})


def test_doubling_back_is_not_geodesic(unit_torus):
    there = segment_in_direction(unit_torus, 0, (1.0, 0.0), 1.0)
    back = segment_in_direction(unit_torus, 0, (-1.0, 0.0), 1.0)

    assert not is_geodesic(unit_torus, SegmentChain((there, back), closed=True))
    assert not is_geodesic(unit_torus, SegmentChain((there, back, there), closed=False))
