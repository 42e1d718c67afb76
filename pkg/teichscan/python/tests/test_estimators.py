import math

import pytest

from teichscan.curves import flat_length, landmark_curve, torus_curve
from teichscan.decomposition import find_short_curves
from teichscan.errors import PreconditionError, StructuralError
from teichscan.estimators import (
    ArcCost,
    Case,
    Component,
    Direction,
    Kind,
    arc_cost,
    arcs_bound,
    classify_essential,
    curve_arcs,
    direction_of,
    ext_estimate,
    ext_lower_bound,
    hyp_estimate,
    hyp_lower_bound,
    maskit_band,
    multicurve_estimate,
)
from teichscan.flow import flow_curve, flow_surface
from teichscan.surface import build_flat_torus

SLOPES = [(1, 0), (0, 1), (1, 1)]


@pytest.mark.parametrize("a", [1.0, 0.5, 0.25])
@pytest.mark.parametrize("t", [-1.0, 0.0, 1.0])
@pytest.mark.parametrize("p, q", SLOPES)
def test_torus_estimate_matches_exact(a, t, p, q):
    # On a flat torus the extremal length of a curve is its flat length squared over the area
    s = flow_surface(build_flat_torus(a, 1 / a), t)
    tt = find_short_curves(s, 5.0)
    curve = torus_curve(s, p, q)

    exact = flat_length(curve) ** 2 / s.area()
    estimate = ext_estimate(s, curve, tt).total
    assert exact / 8 <= estimate <= 8 * exact


def test_unit_torus_terms(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    curve = torus_curve(unit_torus, 1, 0)

    ext = ext_estimate(unit_torus, curve, tt)
    (term,) = ext.terms
    assert term.source == ("piece", 0)
    assert term.component is Component.SUBSURFACE
    assert ext.total == pytest.approx(0.5)
    assert ext.breakdown()["subsurface"] == pytest.approx(0.5)

    hyp = hyp_estimate(unit_torus, curve, tt)
    assert hyp.total == pytest.approx(1 / math.sqrt(2))
    assert ext_lower_bound(unit_torus, curve, tt).total == pytest.approx(0.5)
    assert hyp_lower_bound(unit_torus, curve, tt).total == pytest.approx(1 / math.sqrt(2))


def test_short_branch():
    s = flow_surface(build_flat_torus(1.0, 1.0), -1.5)
    tt = find_short_curves(s, 5.0)

    ext = ext_estimate(s, torus_curve(s, 1, 0), tt)
    assert "short-curve" in ext.flags
    assert ext.total == pytest.approx(math.exp(-3.0))

    vertical = ext_estimate(s, torus_curve(s, 0, 1), tt)
    assert vertical.breakdown()["inverse-ext"] == pytest.approx(math.exp(3.0))
    assert vertical.breakdown()["twist"] == 0.0

    diagonal = ext_estimate(s, torus_curve(s, 1, 1), tt)
    assert diagonal.breakdown()["twist"] == pytest.approx(math.exp(-3.0))


def test_weight_scaling(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    curve = torus_curve(unit_torus, 1, 1)
    double = curve.scaled(2.0)

    assert ext_estimate(unit_torus, double, tt).total == pytest.approx(4 * ext_estimate(unit_torus, curve, tt).total)
    assert hyp_estimate(unit_torus, double, tt).total == pytest.approx(2 * hyp_estimate(unit_torus, curve, tt).total)


def test_estimate_totals(slit_tori):
    tt = find_short_curves(slit_tori, 5.0)
    alpha = landmark_curve(slit_tori, "alpha")

    for estimator in (ext_estimate, hyp_estimate):
        estimate = estimator(slit_tori, alpha, tt)
        values = [term.value for term in estimate.terms]
        assert estimate.total == pytest.approx(math.fsum(values))
        assert max(values) <= estimate.total <= len(values) * max(values)


def test_multicurve(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    curves = [torus_curve(unit_torus, 1, 0), torus_curve(unit_torus, 0, 1)]

    total = multicurve_estimate(unit_torus, curves, tt).total
    assert total == pytest.approx(sum(ext_estimate(unit_torus, c, tt).total for c in curves))


def test_foreign_decomposition(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    other = build_flat_torus(1.0, 1.0)
    with pytest.raises(StructuralError):
        ext_estimate(other, torus_curve(other, 1, 0), tt)


@pytest.mark.parametrize(
    "length, lam, sigma, x, h",
    [
        (10.0, 2.0, 0.5, 25 + math.log(4), 5 + math.log(math.log(4))),
        (1.0, 1.0, 1.0, 1.0, 1.0),
        (3.0, 1.0, 2.0, 9.0, 3.0),
    ],
)
def test_arc_cost_values(length, lam, sigma, x, h):
    cost = ArcCost.from_values(length, lam, sigma)
    assert cost.x == pytest.approx(x)
    assert cost.h == pytest.approx(h)


def test_arc_cost_needs_positive_scales():
    with pytest.raises(PreconditionError):
        ArcCost.from_values(1.0, 0.0, 1.0)


def test_arcs_bound():
    cost = ArcCost.from_values(10.0, 2.0, 0.5)
    assert arcs_bound([cost] * 4, Kind.EXT) == pytest.approx(16 * cost.x)
    assert arcs_bound([cost] * 4, Kind.HYP) == pytest.approx(4 * cost.h)
    assert arcs_bound([], Kind.EXT) == 0.0


def test_torus_arcs(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    curve = torus_curve(unit_torus, 1, 0)
    (arc,) = curve_arcs(curve, tt)

    cost = arc_cost(unit_torus, arc, tt)
    assert cost.lam == pytest.approx(math.sqrt(2))
    assert cost.sigma == pytest.approx(1.0)
    assert not cost.fallback


@pytest.mark.parametrize(
    "p, q, direction",
    [(1, 0, Direction.HORIZONTAL), (0, 1, Direction.VERTICAL), (1, 1, Direction.BALANCED)],
)
def test_classification(unit_torus, p, q, direction):
    tt = find_short_curves(unit_torus, 5.0)
    for kind in Kind:
        cls = classify_essential(unit_torus, torus_curve(unit_torus, p, q), tt, kind)
        assert cls.direction is direction
        assert cls.case is Case.THICK_PIECE
        assert cls.case_number == 1
        assert cls.dominance == pytest.approx(1.0)


def test_case_numbers():
    assert Case.TWIST.number(Kind.HYP) == 3
    assert Case.EXPANDING_ANNULUS.number(Kind.EXT) == 3
    assert Case.EXPANDING_ANNULUS.number(Kind.HYP) == 4
    assert Case.FLAT_ANNULUS.number(Kind.EXT) == 2


def test_direction_of():
    assert direction_of(1.0, 1.04) is Direction.BALANCED
    assert direction_of(1.0, 2.0) is Direction.VERTICAL
    assert direction_of(3.0, 1.0) is Direction.HORIZONTAL


def test_maskit_band(unit_torus):
    tt = find_short_curves(unit_torus, 5.0)
    curve = torus_curve(unit_torus, 1, 0)
    ext = ext_estimate(unit_torus, curve, tt).total
    hyp = hyp_estimate(unit_torus, curve, tt).total

    band = maskit_band(ext, hyp)
    assert band.ratio == pytest.approx(hyp / ext)
    assert band.lower == pytest.approx(2 * math.exp(-hyp / 2))
    assert band.upper == pytest.approx(math.pi)
    assert band.holds(8.0)

    with pytest.raises(PreconditionError):
        maskit_band(0.0, 1.0)


def test_slit_arcs_use_their_piece(slit_tori):
    # At t = 1 the torus cores are short and alpha runs along their boundary
    s = flow_surface(slit_tori, 1.0)
    tt = find_short_curves(s, 5.0)
    alpha = flow_curve(landmark_curve(slit_tori, "alpha"), 1.0)
    assert len(tt.shorts) == 2
    assert tt.short_match(alpha) is None

    (piece,) = tt.pieces
    arcs = curve_arcs(alpha, tt)
    assert arcs

    for arc in arcs:
        cost = arc_cost(s, arc, tt)
        assert not cost.fallback
        assert cost.lam == pytest.approx(piece.diam)
        assert cost.sigma == pytest.approx(0.1 * math.e)
