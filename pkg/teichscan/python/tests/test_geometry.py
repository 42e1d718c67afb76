import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichscan.errors import BudgetError
from teichscan.geometry.dijkstra import Dijkstra, all_pairs_max
from teichscan.geometry.develop import Budget, enumerate_saddle_connections, shoot, trace
from teichscan.geometry.graph import Graph
from teichscan.geometry.utils import segment_intersection, signed_angle, vec, wrap_angle
from teichscan.surface import build_slit_tori

angles = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@given(angle=angles)
def test_wrap_angle(angle):
    wrapped = wrap_angle(angle)
    assert 0 <= wrapped < 2 * math.pi
    assert math.cos(wrapped) == pytest.approx(math.cos(angle), abs=1e-9)


def test_signed_angle():
    assert signed_angle(vec(1, 0), vec(0, 1)) == pytest.approx(math.pi / 2)
    assert signed_angle(vec(1, 0), vec(0, -1)) == pytest.approx(-math.pi / 2)


def test_segment_intersection():
    s, u = segment_intersection(vec(0, 0), vec(2, 2), vec(0, 2), vec(2, 0))
    assert (s, u) == pytest.approx((0.5, 0.5))
    assert segment_intersection(vec(0, 0), vec(1, 0), vec(0, 1), vec(1, 1)) is None
    assert segment_intersection(vec(0, 0), vec(1, 0), vec(2, -1), vec(2, 1)) is None


def test_shortest_path():
    graph = Graph(range(4))
    graph.add_edge(0, 1, 1.0)
    graph.add_edge(1, 2, 1.0)
    graph.add_edge(0, 2, 5.0)
    graph.add_edge(2, 3, 0.5)

    costs = Dijkstra(graph, start=0).search()
    assert costs == pytest.approx({0: 0.0, 1: 1.0, 2: 2.0, 3: 2.5})

    assert all_pairs_max(graph, range(4)) == pytest.approx(2.5)


def test_all_pairs_unreachable():
    graph = Graph([0, 1])
    assert all_pairs_max(graph, [0, 1]) == math.inf


def test_trace_returns_to_start(unit_torus):
    point = np.array([0.6, 0.3])
    result = trace(unit_torus, 0, point, np.array([1.0, 0.0]))
    assert result.end_tri == 0
    assert result.end_point == pytest.approx(point)


def test_unit_torus_connections(unit_torus):
    found = enumerate_saddle_connections(unit_torus, 1.5)
    lengths = sorted(c.length for c in found)
    assert len(lengths) == 8
    assert lengths[:4] == pytest.approx([1.0] * 4)
    assert lengths[4:] == pytest.approx([math.sqrt(2)] * 4)

    holonomies = {tuple(np.round(c.vector(), 9)) for c in found}
    assert (1.0, 0.0) in holonomies
    assert (-1.0, -1.0) in holonomies


def test_shoot_hits_vertex(unit_torus):
    angle = unit_torus.angle_of(0, 0, vec(2, 1))
    hit = shoot(unit_torus, 0, angle, 3.0)
    assert hit is not None
    assert hit.length == pytest.approx(math.sqrt(5))
    assert hit.vector() == pytest.approx([2.0, 1.0])

    assert shoot(unit_torus, 0, angle, 2.0) is None


def test_budget(unit_torus):
    budget = Budget(3)
    with pytest.raises(BudgetError):
        enumerate_saddle_connections(unit_torus, 10.0, budget=budget)
    assert budget.used > 3


def test_thin_triangles_stay_within_budget():
    # Triangles 0.005 wide and 100 tall: wedges must stop once their part of an edge is out of reach
    s = build_slit_tori(0.01)
    budget = Budget(100_000)
    found = enumerate_saddle_connections(s, 0.1, budget=budget)

    assert min(c.length for c in found) == pytest.approx(0.005)
    assert any(c.vector() == pytest.approx([0.0, 0.01]) for c in found)
    assert all(c.length <= 0.1 + 1e-12 for c in found)
