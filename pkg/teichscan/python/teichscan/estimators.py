"""
Comparability estimates for extremal and hyperbolic length read off a thick-thin
decomposition, their length-only lower bounds, arc costs, and the essentially-horizontal
classifier.

Every estimator returns the raw formula value; constants hidden by the comparisons are
left to the callers that check them.

"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

from .config import DEFAULTS
from .curves import flat_length, hv_lengths, interior_crossings, trace_chain
from .decomposition import ThickPiece, diam_approx, shortest_closed_curve, twist
from .errors import PreconditionError, StructuralError

logger = logging.getLogger(__name__)


class Kind(str, Enum):
    EXT = "ext"
    HYP = "hyp"


class Component(str, Enum):
    SUBSURFACE = "subsurface"
    INVERSE_EXT = "inverse-ext"
    TWIST = "twist"
    EXPANDING = "expanding"


class Direction(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    BALANCED = "balanced"


class Case(str, Enum):
    THICK_PIECE = "thick-piece"
    FLAT_ANNULUS = "flat-annulus"
    TWIST = "twist"
    EXPANDING_ANNULUS = "expanding-annulus"

    def number(self, kind):
        if self is Case.EXPANDING_ANNULUS:
            return 3 if Kind(kind) is Kind.EXT else 4

        return {Case.THICK_PIECE: 1, Case.FLAT_ANNULUS: 2, Case.TWIST: 3}[self]


@dataclass(frozen=True)
class Term:
    # ("piece", index) or ("annulus", index)
    source: tuple
    component: Component
    value: float

    def to_dict(self):
        return {"source": list(self.source), "component": self.component.value, "value": self.value}


@dataclass
class LengthEstimate:
    total: float
    kind: Kind
    terms: list
    flags: list = field(default_factory=list)

    @classmethod
    def from_terms(cls, kind, terms, flags=()):
        return cls(math.fsum(term.value for term in terms), Kind(kind), list(terms), list(flags))

    def dominant(self):
        if not self.terms:
            return None

        return max(self.terms, key=lambda term: term.value)

    def breakdown(self):
        """
        Returns the total per component.

        """
        parts = {component.value: 0.0 for component in Component}
        for term in self.terms:
            parts[term.component.value] += term.value

        return parts

    def to_dict(self):
        return {
            "schema": "teichscan-estimate/1",
            "kind": self.kind.value,
            "total": self.total,
            "terms": [term.to_dict() for term in self.terms],
            "breakdown": self.breakdown(),
            "flags": list(self.flags),
        }


# ---- estimates ---------------------------------------------------------------------------


def _check(s, tt):
    if tt.surface is not s:
        raise StructuralError("The decomposition was computed for another surface")


def _annulus_component(annulus):
    """
    Labels an annulus term by which of its moduli dominates.

    """
    if annulus.mod_f >= annulus.mod_e + annulus.mod_g:
        return Component.INVERSE_EXT

    return Component.EXPANDING


def _short_branch(gamma, short, kind):
    value = short.ext_estimate * (gamma.weight**2 if kind is Kind.EXT else gamma.weight)

    return LengthEstimate.from_terms(kind, [Term(short.key, Component.INVERSE_EXT, value)], flags=["short-curve"])


def _piece_terms(gamma, tt, power):
    terms = []
    for piece in tt.pieces:
        arcs = tt.restriction(gamma, piece)
        if not arcs:
            continue

        if piece.degenerate or piece.diam <= 0:
            terms.append(Term(piece.key, Component.SUBSURFACE, 0.0))
            continue

        length = math.fsum(flat_length(arc) for arc in arcs)
        terms.append(Term(piece.key, Component.SUBSURFACE, (length / piece.diam) ** power))

    return terms


def _estimate(s, gamma, tt, kind):
    _check(s, tt)
    kind = Kind(kind)

    short = tt.short_match(gamma)
    if short is not None:
        return _short_branch(gamma, short, kind)

    power = 2 if kind is Kind.EXT else 1
    terms = _piece_terms(gamma, tt, power)

    for annulus in tt.shorts:
        crossings = tt.crossing_count(gamma, annulus)
        if crossings == 0:
            continue

        ext = annulus.ext_estimate
        tw = twist(s, annulus.cylinder, gamma, tt.twist_mode)

        if kind is Kind.EXT:
            main = (1 / ext) * crossings**2
            twisting = tw**2 * ext * crossings**2
        else:
            main = max(math.log(1 / ext), 0.0) * crossings
            twisting = tw * ext * crossings

        terms.append(Term(annulus.key, _annulus_component(annulus), main))
        if tw > 0:
            terms.append(Term(annulus.key, Component.TWIST, twisting))

    estimate = LengthEstimate.from_terms(kind, terms)
    logger.debug("%s estimate of %r: %.6g over %s terms", kind.value, gamma.name or gamma, estimate.total, len(terms))

    return estimate


def ext_estimate(s, gamma, tt):
    """
    Returns the extremal length estimate of a tightened curve:
    sum over pieces of (l(gamma|Y) / diam Y)^2 plus, for every short curve alpha,
    (1/Ext(alpha) + twist^2 Ext(alpha)) i(alpha, gamma)^2.

    """
    return _estimate(s, gamma, tt, Kind.EXT)


def hyp_estimate(s, gamma, tt):
    """
    Returns the hyperbolic length estimate of a tightened curve:
    sum over pieces of l(gamma|Y) / diam Y plus, for every short curve alpha,
    (log(1/Ext(alpha)) + twist Ext(alpha)) i(alpha, gamma).

    """
    return _estimate(s, gamma, tt, Kind.HYP)


def _lower_bound(s, gamma, tt, kind):
    _check(s, tt)
    kind = Kind(kind)

    short = tt.short_match(gamma)
    if short is not None:
        return _short_branch(gamma, short, kind)

    power = 2 if kind is Kind.EXT else 1
    terms = _piece_terms(gamma, tt, power)

    for annulus in tt.shorts:
        arcs = tt.restriction(gamma, annulus)
        if not arcs:
            continue

        length = math.fsum(flat_length(arc) for arc in arcs)
        terms.append(Term(annulus.key, _annulus_component(annulus), (length / annulus.d) ** power))

    return LengthEstimate.from_terms(kind, terms)


def ext_lower_bound(s, gamma, tt):
    return _lower_bound(s, gamma, tt, Kind.EXT)


def hyp_lower_bound(s, gamma, tt):
    return _lower_bound(s, gamma, tt, Kind.HYP)


def multicurve_estimate(s, curves, tt, kind=Kind.EXT):
    """
    Returns the estimate of a weighted multicurve as the sum of its components' estimates.
    NOTE: Cross terms between components are not modelled.

    """
    if not curves:
        raise PreconditionError("A multicurve needs at least one component")

    estimates = [_estimate(s, gamma, tt, kind) for gamma in curves]
    flags = sorted({flag for estimate in estimates for flag in estimate.flags})

    return LengthEstimate.from_terms(kind, [term for estimate in estimates for term in estimate.terms], flags)


# ---- arcs --------------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcCost:
    length: float
    lam: float
    sigma: float
    x: float
    h: float
    fallback: bool = False

    @classmethod
    def from_values(cls, length, lam, sigma, fallback=False):
        if not (lam > 0 and sigma > 0):
            raise PreconditionError(f"Arc cost needs positive lambda and sigma, got {lam} and {sigma}")

        ratio = lam / sigma
        x = (length / lam) ** 2 + math.log(max(ratio, 1.0))
        h = length / lam + math.log(max(math.log(max(ratio, math.e)), 1.0))

        return cls(length, lam, sigma, x, h, fallback)

    def to_dict(self):
        return {
            "length": self.length,
            "lambda": self.lam,
            "sigma": self.sigma,
            "X": self.x,
            "h": self.h,
            "fallback": self.fallback,
        }


def _surface_scale(tt):
    s = tt.surface
    everything = ThickPiece(-1, frozenset(range(s.num_triangles())), frozenset(range(s.num_vertices())), ())
    diameter = diam_approx(s, everything)
    systole = shortest_closed_curve(s, tt.connections, tt.cylinders)

    return diameter, systole if systole is not None else diameter


def _holding_regions(s, traced, tt):
    """
    Returns the sizes and closed-curve lengths of the regions holding an arc that runs along
    the boundary of a short cylinder or inside one without crossing its core.

    """
    sizes = []
    shortest = []
    for piece in traced.pieces:
        middle = (piece.start + piece.end) / 2
        region = tt.piece_at(piece.tri, middle)
        if region.diam > 0:
            sizes.append(region.diam)
            if region.systole is not None:
                shortest.append(region.systole)

    if sizes:
        return sizes, shortest

    for piece in traced.pieces:
        middle = (piece.start + piece.end) / 2
        for annulus in tt.shorts:
            if annulus.cylinder.contains(piece.tri, middle):
                sizes.append(annulus.d)
                shortest.append(annulus.length)

    return sizes, shortest


def arc_cost(s, omega, tt):
    """
    Returns the cost of an arc: lambda is the largest size (diam of a piece or width d of an
    annulus) among the regions it meets, sigma the shortest curve among the short curves it
    crosses and the systoles of the pieces it meets.

    """
    _check(s, tt)

    traced = trace_chain(s, omega.chain)
    sizes = []
    shortest = []

    for annulus in tt.shorts:
        if interior_crossings(s, traced, annulus.cylinder.core_pieces()):
            sizes.append(annulus.d)
            shortest.append(annulus.length)

    met = set()
    for piece in traced.pieces:
        middle = (piece.start + piece.end) / 2
        if any(annulus.cylinder.contains(piece.tri, middle) for annulus in tt.shorts):
            continue
        met.add(tt.piece_at(piece.tri, middle).index)

    for index in sorted(met):
        piece = tt.pieces[index]
        sizes.append(piece.diam)
        if piece.systole is not None:
            shortest.append(piece.systole)

    length = flat_length(omega)
    if max(sizes, default=0.0) <= 0:
        sizes, shortest = _holding_regions(s, traced, tt)

    lam = max(sizes, default=0.0)

    if lam <= 0:
        lam, sigma = _surface_scale(tt)
        logger.warning("Arc of length %.6g meets no region of positive size; using the surface scale", length)
        return ArcCost.from_values(length, lam, sigma, fallback=True)

    sigma = min(shortest, default=lam)

    return ArcCost.from_values(length, lam, sigma)


def arcs_bound(costs, kind=Kind.EXT):
    """
    Returns the lower bound from disjoint sub-arcs: |arcs|^2 min X for extremal length,
    |arcs| min h for hyperbolic length.

    """
    if not costs:
        return 0.0

    if Kind(kind) is Kind.EXT:
        return len(costs) ** 2 * min(cost.x for cost in costs)

    return len(costs) * min(cost.h for cost in costs)


def curve_arcs(gamma, tt):
    """
    Returns the disjoint arcs of a curve inside the thick pieces.

    """
    return [arc for piece in tt.pieces for arc in tt.restriction(gamma, piece)]


# ---- classification ----------------------------------------------------------------------


@dataclass(frozen=True)
class EssentialClass:
    direction: Direction
    case: Case
    witness: tuple
    dominance: float
    kind: Kind

    @property
    def case_number(self):
        return self.case.number(self.kind)

    def to_dict(self):
        return {
            "direction": self.direction.value,
            "case": self.case_number,
            "case_name": self.case.value,
            "witness": list(self.witness) if self.witness else None,
            "dominance": self.dominance,
        }


_CASES = {
    Component.SUBSURFACE: Case.THICK_PIECE,
    Component.INVERSE_EXT: Case.FLAT_ANNULUS,
    Component.EXPANDING: Case.EXPANDING_ANNULUS,
}


def direction_of(h, v, tol=DEFAULTS.balanced_tolerance):
    if abs(h - v) <= tol * (h + v):
        return Direction.BALANCED

    return Direction.HORIZONTAL if h > v else Direction.VERTICAL


def classify_essential(s, gamma, tt, kind=Kind.EXT, estimate=None, tol=DEFAULTS.balanced_tolerance):
    """
    Finds the term that dominates the estimate and reads the direction of the curve's arcs
    in its region.
    NOTE: Twist terms are a flat-annulus case for extremal length and a case of their own for
    hyperbolic length.

    """
    kind = Kind(kind)
    if estimate is None:
        estimate = _estimate(s, gamma, tt, kind)

    witness = estimate.dominant()
    if witness is None or estimate.total <= 0:
        h, v = hv_lengths(gamma)
        return EssentialClass(direction_of(h, v, tol), Case.THICK_PIECE, None, 1.0, kind)

    if witness.component is Component.TWIST:
        case = Case.FLAT_ANNULUS if kind is Kind.EXT else Case.TWIST
    else:
        case = _CASES[witness.component]

    region = next(r for r in tt.regions() if r.key == witness.source)
    arcs = tt.restriction(gamma, region)
    h = math.fsum(hv_lengths(arc)[0] for arc in arcs)
    v = math.fsum(hv_lengths(arc)[1] for arc in arcs)

    return EssentialClass(direction_of(h, v, tol), case, witness.source, witness.value / estimate.total, kind)


# ---- Maskit comparison -------------------------------------------------------------------


@dataclass(frozen=True)
class MaskitBand:
    ratio: float
    lower: float
    upper: float

    def holds(self, constant=1.0):
        return self.lower / constant <= self.ratio <= self.upper * constant

    def to_dict(self):
        return {"ratio": self.ratio, "lower": self.lower, "upper": self.upper}


def maskit_band(ext, hyp):
    """
    Returns hyp/ext with the band [2 e^(-hyp/2), pi] it should fall in up to constants.

    """
    if not (ext > 0 and hyp > 0):
        raise PreconditionError(f"Maskit comparison needs positive lengths, got ext={ext}, hyp={hyp}")

    return MaskitBand(hyp / ext, 2 * math.exp(-hyp / 2), math.pi)
