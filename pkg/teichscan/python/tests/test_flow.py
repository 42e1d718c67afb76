import math

import pytest
from hypothesis import given, settings, strategies as st

from teichscan.curves import flat_length, hv_lengths, torus_curve
from teichscan.errors import FlowRangeError, PreconditionError
from teichscan.flow import (
    FlowTime,
    flow_curve,
    flow_surface,
    flowed_length,
    make_scan,
    rotate_curve,
    rotate_quarter,
)
from teichscan.surface import build_flat_torus, validate

times = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)
lengths = st.floats(min_value=0, max_value=100, allow_nan=False, allow_infinity=False)


def test_zero_time_is_identity(unit_torus):
    assert flow_surface(unit_torus, 0.0) is unit_torus


@given(t1=times, t2=times)
@settings(deadline=None, max_examples=50)
def test_flow_composes(t1, t2):
    s = build_flat_torus(2.0, 0.5)
    twice = flow_surface(flow_surface(s, t1), t2)
    once = flow_surface(s, t1 + t2)

    for tri_a, tri_b in zip(twice.triangles, once.triangles):
        for wa, wb in zip(tri_a, tri_b):
            assert wa.h == pytest.approx(wb.h, rel=1e-12, abs=1e-12)
            assert wa.v == pytest.approx(wb.v, rel=1e-12, abs=1e-12)


@given(t=times)
@settings(deadline=None, max_examples=50)
def test_flow_keeps_area_and_validity(t):
    s = build_flat_torus(1.5, 0.75)
    flowed = flow_surface(s, t)
    assert flowed.area() == pytest.approx(s.area(), rel=1e-12)
    assert validate(flowed).ok
    assert flowed.gluings == s.gluings


@given(h=lengths, v=lengths, t=times)
def test_flowed_length(h, v, t):
    assert flowed_length(h, v, t) == pytest.approx(math.hypot(math.exp(t) * h, math.exp(-t) * v))


def test_flowed_length_rejects_negative():
    with pytest.raises(PreconditionError):
        flowed_length(-1.0, 0.0, 0.0)


@pytest.mark.parametrize("t", [-1.0, 0.5, 2.0])
def test_horizontal_curve_stretches(unit_torus, t):
    curve = flow_curve(torus_curve(unit_torus, 1, 0), t)
    assert flat_length(curve) == pytest.approx(math.exp(t))

    curve = flow_curve(torus_curve(unit_torus, 0, 1), t)
    assert flat_length(curve) == pytest.approx(math.exp(-t))


def test_flow_range(unit_torus):
    with pytest.raises(FlowRangeError):
        FlowTime(math.inf)
    with pytest.raises(FlowRangeError):
        flow_surface(unit_torus, 1000.0)


def test_make_scan():
    grid = make_scan(-1.0, 1.0, 0.5)
    assert [float(t) for t in grid] == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert len(make_scan(-2.0, 2.0, 0.1)) == 41


@pytest.mark.parametrize("t_min, t_max, step", [(0.0, 1.0, 0.0), (1.0, 0.0, 0.1)])
def test_make_scan_rejects(t_min, t_max, step):
    with pytest.raises(PreconditionError):
        make_scan(t_min, t_max, step)


def test_rotation_swaps_directions():
    s = build_flat_torus(2.0, 1.0)
    rotated = rotate_quarter(s)
    assert validate(rotated).ok
    assert rotated.area() == pytest.approx(s.area())

    twice = rotate_quarter(rotated)
    for tri_a, tri_b in zip(twice.triangles, s.triangles):
        for wa, wb in zip(tri_a, tri_b):
            assert (wa.h, wa.v) == pytest.approx((-wb.h, -wb.v))

    curve = torus_curve(s, 1, 1)
    h, v = hv_lengths(curve)
    assert hv_lengths(rotate_curve(curve)) == pytest.approx((v, h))
