"""
Flat cylinders and the thick-thin decomposition of a flat surface.

Short curves are cores of flat cylinders whose annulus moduli sum to at least M0. The
expanding annuli on either side of a cylinder are measured by the distance from its
boundary vertices to the next vertex met while leaving the cylinder. Thick pieces are the
vertex components left after cutting the surface along the short cores.

"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULTS
from .curves import (
    ArcOnSurface,
    CylinderCore,
    FlatCurve,
    Segment,
    SegmentChain,
    chain_from_connections,
    flat_length,
    interior_crossings,
    is_geodesic,
    locate,
    sub_chain,
    trace_chain,
)
from .errors import PreconditionError, StructuralError
from .geometry.dijkstra import all_pairs_max
from .geometry.develop import Budget, develop_sector, enumerate_saddle_connections, shoot, trace
from .geometry.graph import Graph
from .geometry.utils import cross, dist, dot, norm, rotate, segment_intersection, unit, wrap_angle

logger = logging.getLogger(__name__)

# Relative offset of the seed leaf from the saddle connection it starts next to
SEED_OFFSET = 1e-6


# ---- cylinders ---------------------------------------------------------------------------


class FlatCylinder:
    """
    A maximal flat cylinder.

    The core leaf starts at a local point of triangle tri and runs along direction, a unit
    vector in that triangle's frame. The left boundary lies on the left of the core direction.
    Boundary connections are oriented with the cylinder on their left.

    """

    def __init__(self, surface, tri, point, direction, circumference, height, boundaries):
        self.surface = surface
        self.tri = tri
        self.point = np.asarray(point, dtype=float)
        self.direction = unit(direction)
        self.circumference = float(circumference)
        self.height = float(height)
        self.boundaries = boundaries

        self._core_pieces = None

    @property
    def modulus(self):
        return self.height / self.circumference

    def leaf(self, pos=0.5):
        """
        Returns the closed leaf at relative height pos, from 0 on the right boundary to 1 on
        the left boundary.

        """
        shift = (pos - 0.5) * self.height
        tri, point, direction = self.tri, self.point, self.direction

        if shift != 0:
            normal = rotate(direction, math.pi / 2)
            step = trace(self.surface, tri, point, np.sign(shift) * normal * abs(shift))
            tri, point = step.end_tri, step.end_point
            direction = rotate(step.end_direction, -np.sign(shift) * math.pi / 2)

        return SegmentChain((Segment.at_point(self.surface, tri, point, direction * self.circumference),), closed=True)

    def core(self, weight=1.0):
        return FlatCurve(CylinderCore(self, 0.5), weight, name="core")

    def core_pieces(self):
        if self._core_pieces is None:
            self._core_pieces = trace_chain(self.surface, self.leaf(0.5))

        return self._core_pieces

    def boundary_curve(self, side):
        """
        Returns the closed chain of boundary saddle connections on one side ("left" or "right").

        """
        if side not in self.boundaries:
            raise PreconditionError(f"Cylinder boundary side must be 'left' or 'right', got {side!r}")

        return FlatCurve(chain_from_connections(self.boundaries[side]), name=f"boundary-{side}")

    def boundary_vertices(self, side=None):
        sides = (side,) if side else ("left", "right")

        return {c.start_vertex for s in sides for c in self.boundaries[s]}

    def f_sectors(self):
        """
        Returns {vertex: [(start, end)]}, the absolute angle sectors at boundary vertices
        that point into the cylinder.

        """
        sectors = {}
        for side in ("left", "right"):
            for connection in self.boundaries[side]:
                sectors.setdefault(connection.start_vertex, []).append(
                    (connection.start_angle, connection.start_angle + math.pi)
                )

        return sectors

    def contains(self, tri, point):
        """
        Checks if a local point of triangle tri lies in the open cylinder.

        """
        normal = rotate(self.direction, math.pi / 2)
        core = self.core_pieces().by_triangle()
        reach = 0.5 * self.height * (1 - 1e-6)

        if reach <= 0:
            return False

        for sign in (1.0, -1.0):
            ray = trace(self.surface, tri, point, sign * normal * reach, stop_at_vertex=True)
            for piece in ray.pieces:
                for other in core.get(piece.tri, ()):
                    if segment_intersection(piece.start, piece.end, other.start, other.end) is not None:
                        return True

        return False

    def to_dict(self):
        return {
            "direction": {"h": float(self.direction[0]), "v": float(self.direction[1])},
            "circumference": self.circumference,
            "height": self.height,
            "modulus": self.modulus,
            "boundaries": {
                side: [[c.start_vertex, c.start_angle, c.length] for c in connections]
                for side, connections in self.boundaries.items()
            },
        }

    def __repr__(self):
        return f"FlatCylinder(circumference={self.circumference:.6g}, height={self.height:.6g})"


def _closed_leaf(surface, tri, point, direction, max_length, budget):
    """
    Returns (circumference, pieces) if the leaf through point closes up within max_length.

    """
    result = trace(surface, tri, point, direction * max_length, stop_at_vertex=True, budget=budget)
    scale = max(norm(w) for w in surface.triangle_edges(tri))

    for k, piece in enumerate(result.pieces):
        if k == 0 or piece.tri != tri:
            continue

        u = piece.direction()
        if norm(u - direction) > 1e-7:
            continue

        offset = point - piece.start
        along = dot(offset, u)
        if abs(cross(u, offset)) <= 1e-9 * scale and -1e-9 * scale <= along <= piece.length + 1e-9 * scale:
            return piece.offset + along, result.pieces[: k + 1]

    return None


def _boundary(surface, vertex, angle, circumference, budget):
    """
    Follows boundary saddle connections with the cylinder on their left until they close up.

    """
    connections = []
    total = 0.0
    v, a = vertex, angle

    while True:
        connection = shoot(surface, v, a, circumference * (1 + 1e-6), budget)
        if connection is None:
            raise StructuralError(f"Cylinder boundary from vertex {v} does not reach a vertex")

        connections.append(connection)
        total += connection.length

        v = connection.end_vertex
        a = wrap_angle(connection.end_angle - math.pi, surface.cone_angle(v))

        if v == vertex and _same_angle(surface, v, a, angle):
            break
        if total > circumference * (1 + 1e-6):
            raise StructuralError(f"Cylinder boundary from vertex {vertex} does not close within its circumference")

    return connections


def _same_angle(surface, v, a, b, tol=1e-7):
    gap = wrap_angle(a - b, surface.cone_angle(v))

    return min(gap, surface.cone_angle(v) - gap) <= tol


def _cylinder_from_leaf(surface, tri, point, direction, circumference, pieces, budget):
    """
    Measures the maximal cylinder around a closed leaf.

    """
    left = (math.inf, None)
    right = (math.inf, None)

    for piece in pieces:
        u = piece.direction()
        for i, corner in enumerate(surface.triangle_corners(piece.tri)):
            height = cross(u, corner - piece.start)
            if height > 0 and height < left[0]:
                left = (height, (piece.tri, i, u))
            elif height < 0 and -height < right[0]:
                right = (-height, (piece.tri, i, u))

    if left[1] is None or right[1] is None:
        raise StructuralError("Closed leaf has no vertex on one side")

    # Core at mid-height
    shift = 0.5 * (left[0] - right[0])
    if shift != 0:
        normal = rotate(direction, math.pi / 2)
        step = trace(surface, tri, point, np.sign(shift) * normal * abs(shift))
        tri, point = step.end_tri, step.end_point
        direction = rotate(step.end_direction, -np.sign(shift) * math.pi / 2)

    boundaries = {}
    for side, (_, (t, i, u)) in (("left", left), ("right", right)):
        heading = -u if side == "left" else u
        angle = surface.angle_of(t, i, heading)
        boundaries[side] = _boundary(surface, surface.vertex_of(t, i), angle, circumference, budget)

    return FlatCylinder(surface, tri, point, direction, circumference, left[0] + right[0], boundaries)


def _matches(surface, cylinder, vertex, angle):
    for side in ("left", "right"):
        for connection in cylinder.boundaries[side]:
            if connection.start_vertex == vertex and _same_angle(surface, vertex, connection.start_angle, angle):
                return True

    return False


def _runs_along_boundary(surface, cylinder, chain):
    """
    Checks if an anchored chain is made of the saddle connections of one boundary side,
    in either direction.

    """
    ends = []
    for segment in chain.segments:
        corner = segment.corner()
        v = surface.vertex_of(segment.tri, corner)
        ends.append((v, surface.angle_of(segment.tri, corner, segment.array())))

    for side in ("left", "right"):
        connections = cylinder.boundaries[side]
        if len(connections) != len(ends):
            continue

        forward = [(c.start_vertex, c.start_angle) for c in connections]
        backward = [(c.end_vertex, c.end_angle) for c in connections]
        for candidates in (forward, backward):
            if all(
                any(v == w and _same_angle(surface, v, a, b) for w, b in candidates) for v, a in ends
            ):
                return True

    return False


def find_cylinders(surface, max_circumference, budget=None, connections=None):
    """
    Returns every maximal flat cylinder with circumference at most max_circumference,
    sorted by circumference.

    Each saddle connection up to that length seeds a leaf just to its left; a leaf that
    closes up spans a cylinder, which is then widened until it meets vertices on both sides.

    """
    if not max_circumference > 0:
        raise PreconditionError(f"Cylinder search needs a positive circumference bound, got {max_circumference}")

    budget = budget if budget is not None else Budget()
    if connections is None:
        connections = enumerate_saddle_connections(surface, max_circumference, budget=budget)

    cylinders = []

    for connection in connections:
        if any(_matches(surface, c, connection.start_vertex, connection.start_angle) for c in cylinders):
            continue

        length = connection.length
        holonomy = connection.vector()

        # Seed just left of the connection's midpoint
        tri, point, direction = locate(
            surface, Segment.at_corner(connection.start_tri, connection.start_corner, holonomy), length / 2
        )
        normal = rotate(direction, math.pi / 2)
        step = trace(surface, tri, point, normal * SEED_OFFSET * length, stop_at_vertex=True, budget=budget)
        if step.blocked:
            continue

        seed_tri, seed_point = step.end_tri, step.end_point
        seed_direction = rotate(step.end_direction, -math.pi / 2)

        closed = _closed_leaf(surface, seed_tri, seed_point, seed_direction, max_circumference * (1 + 1e-9), budget)
        if closed is None:
            continue

        circumference, pieces = closed
        try:
            cylinder = _cylinder_from_leaf(surface, seed_tri, seed_point, seed_direction, circumference, pieces, budget)
        except StructuralError as error:
            logger.debug("Dropped leaf seeded at vertex %s: %s", connection.start_vertex, error)
            continue

        duplicate = any(
            abs(c.circumference - cylinder.circumference) <= 1e-7 * cylinder.circumference
            and any(
                _matches(surface, c, b.start_vertex, b.start_angle)
                for side in ("left", "right")
                for b in cylinder.boundaries[side]
            )
            for c in cylinders
        )
        if not duplicate:
            cylinders.append(cylinder)

    cylinders.sort(key=lambda c: (c.circumference, -c.height))
    logger.debug("Found %s cylinders up to circumference %.6g", len(cylinders), max_circumference)

    return cylinders


# ---- annuli ------------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusData:
    """
    The annulus around a short curve: the flat cylinder of width f with expanding annuli
    of widths e (right of the core direction) and g (left of it).

    """

    index: int
    cylinder: FlatCylinder
    core: FlatCurve
    length: float
    e: float
    f: float
    g: float
    d: float
    mod_e: float
    mod_f: float
    mod_g: float
    ext_estimate: float

    @classmethod
    def build(cls, index, cylinder, e, g):
        length = cylinder.circumference
        f = cylinder.height
        mod_e = math.log(max(e / length, 1.0))
        mod_f = f / length
        mod_g = math.log(max(g / length, 1.0))

        return cls(
            index=index,
            cylinder=cylinder,
            core=cylinder.core(),
            length=length,
            e=e,
            f=f,
            g=g,
            d=e + f + g,
            mod_e=mod_e,
            mod_f=mod_f,
            mod_g=mod_g,
            ext_estimate=1 / (mod_e + mod_f + mod_g),
        )

    @property
    def modulus_sum(self):
        return self.mod_e + self.mod_f + self.mod_g

    @property
    def key(self):
        return ("annulus", self.index)

    def to_dict(self):
        return {
            "index": self.index,
            "length": self.length,
            "e": self.e,
            "f": self.f,
            "g": self.g,
            "d": self.d,
            "mod_E": self.mod_e,
            "mod_F": self.mod_f,
            "mod_G": self.mod_g,
            "ext_estimate": self.ext_estimate,
            "cylinder": self.cylinder.to_dict(),
        }


def _complement(sectors, theta, tol=1e-12):
    """
    Returns the open gaps left on a circle of circumference theta by closed sectors.

    """
    if not sectors:
        return [(0.0, theta)]

    base = sectors[0][0]
    spans = sorted((wrap_angle(lo - base, theta), wrap_angle(lo - base, theta) + (hi - lo)) for lo, hi in sectors)

    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    gaps = []
    for k, (lo, hi) in enumerate(merged):
        nxt = merged[k + 1][0] if k + 1 < len(merged) else theta + merged[0][0]
        if nxt - hi > tol:
            gaps.append((base + hi, base + nxt))

    return gaps


def expanding_annuli(surface, cylinder, radius_cap=DEFAULTS.expanding_radius_cap, budget=None):
    """
    Returns the widths (e, g) of the expanding annuli on the right and left of a cylinder.

    Each width is half the length of the shortest saddle connection leaving a boundary vertex
    of that side in a direction that points away from the cylinder.
    NOTE: A side with no outward directions (the cylinder fills the surface) has width 0.

    """
    budget = budget if budget is not None else Budget()
    sectors = cylinder.f_sectors()
    length = cylinder.circumference
    area = surface.area()
    limit = min(2 * area / length, radius_cap * math.sqrt(area))

    widths = []
    for side in ("right", "left"):
        gaps = []
        for v in sorted(cylinder.boundary_vertices(side)):
            gaps.extend((v, lo, hi) for lo, hi in _complement(sectors[v], surface.cone_angle(v)))

        if not gaps:
            widths.append(0.0)
            continue

        radius = length
        shortest = None
        while shortest is None:
            radius = min(radius, limit)
            for v, lo, hi in gaps:
                for hit in develop_sector(surface, v, lo, hi, radius, budget=budget):
                    shortest = hit.length if shortest is None else min(shortest, hit.length)

            if shortest is None and radius >= limit:
                logger.warning(
                    "No vertex within %.6g of the %s side of %r; using the search limit", limit, side, cylinder
                )
                shortest = limit
            radius *= 2

        widths.append(shortest / 2)

    return widths[0], widths[1]


def search_radius(area, m0, margin=DEFAULTS.search_margin):
    """
    Returns the circumference bound for short-curve candidates: margin * sqrt(area / x) where
    x + 2 log(max(x, 1)) = m0.

    """
    x = brentq(lambda x: x + 2 * math.log(max(x, 1.0)) - m0, 0.0, max(m0, 1.0))

    return margin * math.sqrt(area / x)


# ---- twist -------------------------------------------------------------------------------


def twist(surface, cylinder, curve, mode=DEFAULTS.twist_mode):
    """
    Returns how many times the curve's strands wrap around the cylinder while crossing it.

    For each crossing of the core the strand travels f |cot theta| along the core inside
    the cylinder; its twist is that distance in units of the circumference, rounded down.
    Mode "max" takes the largest strand, "sum" adds them up.

    """
    chain = curve.chain()
    if chain.is_anchored() and not is_geodesic(surface, chain):
        raise PreconditionError("twist needs a tightened curve")

    crossings = interior_crossings(surface, trace_chain(surface, chain), cylinder.core_pieces())
    counts = []

    for crossing in crossings:
        sigma = np.array(crossing.dir1)
        u = np.array(crossing.dir2)
        sine = abs(cross(sigma, u))
        travel = cylinder.height * abs(dot(sigma, u)) / sine
        counts.append(int(math.floor(travel / cylinder.circumference + 1e-9)))

    if not counts:
        return 0

    return sum(counts) if mode == "sum" else max(counts)


# ---- thick pieces ------------------------------------------------------------------------


@dataclass
class ThickPiece:
    index: int
    triangles: frozenset
    vertices: frozenset
    boundary: tuple
    diam: float = 0.0
    systole: Optional[float] = None

    @property
    def degenerate(self):
        return len(self.triangles) == 0

    @property
    def key(self):
        return ("piece", self.index)

    def to_dict(self):
        return {
            "index": self.index,
            "triangles": sorted(self.triangles),
            "vertices": sorted(self.vertices),
            "boundary": list(self.boundary),
            "diam": self.diam,
            "systole": self.systole,
            "degenerate": self.degenerate,
        }


def diam_approx(surface, piece):
    """
    Returns the largest graph distance between vertices of the piece through the edges of
    its triangles, plus its largest triangle diameter. Degenerate pieces give 0.

    """
    if piece.degenerate:
        return 0.0

    graph = Graph(piece.vertices)
    largest = 0.0
    for t in sorted(piece.triangles):
        for e in range(3):
            length = norm(surface.edge(t, e))
            graph.add_edge(surface.vertex_of(t, e), surface.vertex_of(t, e + 1), length)
            largest = max(largest, length)

    return all_pairs_max(graph, piece.vertices) + largest


def _crosses_cores(surface, t, start, end, shorts):
    for annulus in shorts:
        for piece in annulus.cylinder.core_pieces().by_triangle().get(t, ()):
            if segment_intersection(start, end, piece.start, piece.end) is not None:
                return True

    return False


def _build_pieces(surface, shorts, connections, cylinders=()):
    """
    Cuts the surface along the short cores into thick pieces.

    """
    parent = list(range(surface.num_vertices()))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for t in range(surface.num_triangles()):
        corners = surface.triangle_corners(t)
        for e in range(3):
            if not _crosses_cores(surface, t, corners[e], corners[(e + 1) % 3], shorts):
                a, b = find(surface.vertex_of(t, e)), find(surface.vertex_of(t, e + 1))
                parent[max(a, b)] = min(a, b)

    roots = sorted({find(v) for v in range(surface.num_vertices())})
    component = {root: k for k, root in enumerate(roots)}

    triangles = {k: set() for k in range(len(roots))}
    for t in range(surface.num_triangles()):
        centroid = surface.triangle_corners(t).mean(axis=0)
        if any(annulus.cylinder.contains(t, centroid) for annulus in shorts):
            continue

        ids = {component[find(surface.vertex_of(t, i))] for i in range(3)}
        if len(ids) == 1:
            triangles[ids.pop()].add(t)

    pieces = []
    for root, k in component.items():
        vertices = frozenset(v for v in range(surface.num_vertices()) if find(v) == root)
        boundary = tuple(a.index for a in shorts if a.cylinder.boundary_vertices() & vertices)
        piece = ThickPiece(k, frozenset(triangles[k]), vertices, boundary)
        piece.diam = diam_approx(surface, piece)
        piece.systole = shortest_closed_curve(surface, connections, cylinders, shorts, piece)
        pieces.append(piece)

    return pieces, {t: k for k, tris in triangles.items() for t in tris}, component, find


def _in_piece(surface, piece, tri, point):
    if tri in piece.triangles:
        return True

    corners = surface.triangle_corners(tri)
    nearest = min(range(3), key=lambda i: dist(corners[i], point))

    return not piece.triangles and surface.vertex_of(tri, nearest) in piece.vertices


def shortest_closed_curve(surface, connections, cylinders, shorts=(), piece=None):
    """
    Returns the length of the shortest closed geodesic found among the cylinder cores and the
    saddle connections that start and end at the same vertex, or None.

    Cores of short cylinders are boundary curves and do not count. With a piece, only curves
    inside it that cross no short core are considered.

    """
    best = None
    kept = [annulus.cylinder for annulus in shorts]

    for cylinder in cylinders:
        if any(cylinder is other for other in kept):
            continue
        if best is not None and cylinder.circumference >= best:
            continue

        core = cylinder.core_pieces()
        if piece is not None:
            if any(_crosses_cores(surface, p.tri, p.start, p.end, shorts) for p in core.pieces):
                continue
            first = core.pieces[0]
            if not _in_piece(surface, piece, first.tri, (first.start + first.end) / 2):
                continue

        best = cylinder.circumference

    for connection in connections:
        if connection.start_vertex != connection.end_vertex:
            continue
        if best is not None and connection.length >= best:
            break
        if piece is not None and connection.start_vertex not in piece.vertices:
            continue

        traced = trace_chain(
            surface,
            SegmentChain(
                (Segment.at_corner(connection.start_tri, connection.start_corner, connection.holonomy),), closed=False
            ),
        )
        if piece is not None and any(_crosses_cores(surface, p.tri, p.start, p.end, shorts) for p in traced.pieces):
            continue

        best = connection.length

    return best


# ---- decomposition -----------------------------------------------------------------------


@dataclass
class Restriction:
    """
    The arcs of one curve in every region of a decomposition.

    """

    arcs: dict = field(default_factory=dict)
    # Flat-annulus part of each short curve's arcs, by annulus index
    flat: dict = field(default_factory=dict)
    crossings: dict = field(default_factory=dict)
    short: Optional[AnnulusData] = None


@dataclass
class ThickThin:
    surface: object
    shorts: list
    pieces: list
    m0: float
    cylinders: list = field(default_factory=list)
    connections: list = field(default_factory=list)
    twist_mode: str = DEFAULTS.twist_mode

    def __post_init__(self):
        self._cache = {}
        self._triangle_piece = {}
        self._component = {}
        self._find = None

    # ---- lookups ---------------------------------------------------------------------

    def regions(self):
        return list(self.pieces) + list(self.shorts)

    def piece_at(self, tri, point):
        """
        Returns the piece holding a local point, falling back to its nearest corner's piece.

        """
        if tri in self._triangle_piece:
            return self.pieces[self._triangle_piece[tri]]

        corners = self.surface.triangle_corners(tri)
        nearest = min(range(3), key=lambda i: dist(corners[i], point))
        v = self.surface.vertex_of(tri, nearest)

        return self.pieces[self._component[self._find(v)]]

    def short_match(self, curve):
        """
        Returns the short annulus whose core is this curve, or None.

        """
        for annulus in self.shorts:
            if isinstance(curve.geometry, CylinderCore):
                if curve.geometry.cylinder is annulus.cylinder:
                    return annulus
                continue

            chain = curve.geometry
            if abs(chain.length() - annulus.length) > 1e-7 * annulus.length:
                continue

            u = annulus.cylinder.direction
            parallel = all(abs(cross(unit(s.array()), u)) <= 1e-9 for s in chain.segments)
            if not parallel:
                continue

            if chain.is_anchored():
                if _runs_along_boundary(self.surface, annulus.cylinder, chain):
                    return annulus
            else:
                first = chain.segments[0]
                if annulus.cylinder.contains(first.tri, first.start_point(self.surface)):
                    return annulus

        return None

    # ---- restrictions ----------------------------------------------------------------

    def restrictions(self, curve):
        """
        Splits a curve's geodesic representative into arcs per region.

        Around every crossing of a short core the curve spends f / |sin theta| in the flat
        cylinder and (f/2 + e or g) / |sin theta| on each side in the whole annulus, clipped to
        the segment holding the crossing. What lies outside every short flat cylinder belongs
        to the thick piece holding its midpoint.

        """
        if curve in self._cache:
            return self._cache[curve]

        chain = curve.chain()
        total = chain.length()
        result = Restriction()

        short = self.short_match(curve)
        if short is not None:
            arc = ArcOnSurface(sub_chain(self.surface, chain, 0.0, total), curve, 0.0, total, "annulus")
            result.arcs[short.key] = [arc]
            result.flat[short.index] = [(0.0, total)]
            result.short = short
            self._cache[curve] = result
            return result

        traced = trace_chain(self.surface, chain)
        bounds = np.cumsum([0.0] + [s.length() for s in chain.segments])
        all_flat = []

        for annulus in self.shorts:
            crossings = interior_crossings(self.surface, traced, annulus.cylinder.core_pieces())
            result.crossings[annulus.index] = crossings
            whole = []
            flat = []

            for crossing in crossings:
                sigma = np.array(crossing.dir1)
                u = np.array(crossing.dir2)
                sine = abs(cross(sigma, u))

                # Moving forward along the curve heads to the right of the core direction
                forward_right = cross(u, sigma) < 0
                ahead = annulus.e if forward_right else annulus.g
                behind = annulus.g if forward_right else annulus.e

                k = min(int(np.searchsorted(bounds, crossing.pos1, side="right")) - 1, len(chain.segments) - 1)
                if chain.is_anchored():
                    lo, hi = bounds[k], bounds[k + 1]
                else:
                    lo, hi = crossing.pos1 - total / 2, crossing.pos1 + total / 2

                half = 0.5 * annulus.f / sine
                start = crossing.pos1 - (half + behind / sine)
                whole.append((max(lo, start), min(hi, crossing.pos1 + half + ahead / sine)))
                flat.append((max(lo, crossing.pos1 - half), min(hi, crossing.pos1 + half)))

            whole = _merge(whole, total, chain.closed)
            flat = _merge(flat, total, chain.closed)
            result.flat[annulus.index] = flat
            all_flat.extend(flat)

            if whole:
                result.arcs[annulus.key] = [
                    ArcOnSurface(sub_chain(self.surface, chain, lo, hi), curve, lo, hi, "annulus") for lo, hi in whole
                ]

        # What is left outside the short flat cylinders
        for lo, hi in _gaps(_merge(all_flat, total, chain.closed), total, chain.closed):
            middle = (lo + hi) / 2
            tri, point = _point_at(self.surface, chain, middle % total if chain.closed else middle)
            piece = self.piece_at(tri, point)
            arc = ArcOnSurface(sub_chain(self.surface, chain, lo, hi), curve, lo, hi, "piece")
            result.arcs.setdefault(piece.key, []).append(arc)

        self._cache[curve] = result

        return result

    def restriction(self, curve, region):
        if not any(region is r for r in self.regions()):
            raise StructuralError("Region does not belong to this decomposition")

        return list(self.restrictions(curve).arcs.get(region.key, []))

    def crossing_count(self, curve, annulus):
        """
        Returns the weighted intersection number of the curve with a short core.

        """
        if self.short_match(curve) is not None:
            return 0.0

        return curve.weight * len(self.restrictions(curve).crossings.get(annulus.index, []))

    def summary(self):
        return {
            "shorts": len(self.shorts),
            "pieces": len(self.pieces),
            "short_lengths": [a.length for a in self.shorts],
            "modulus_sums": [a.modulus_sum for a in self.shorts],
        }

    def to_dict(self):
        return {
            "schema": "teichscan-thickthin/1",
            "m0": self.m0,
            "shorts": [a.to_dict() for a in self.shorts],
            "pieces": [p.to_dict() for p in self.pieces],
        }


def _merge(intervals, total, closed):
    """
    Merges overlapping intervals of arclength. On closed curves intervals are taken modulo
    total and an interval running over the start is returned as (lo, hi) with hi > total.

    """
    tol = 1e-12 * total
    pieces = []
    for lo, hi in intervals:
        if hi - lo <= tol:
            continue
        if not closed:
            pieces.append((max(lo, 0.0), min(hi, total)))
            continue
        if hi - lo >= total:
            return [(0.0, total)]
        lo = lo % total
        hi = lo + (hi - lo if hi - lo < total else total)
        if hi > total:
            pieces.extend([(lo, total), (0.0, hi - total)])
        else:
            pieces.append((lo, hi))

    merged = []
    for lo, hi in sorted(pieces):
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    if not merged:
        return []

    if closed:
        if merged[0][0] <= tol and merged[-1][1] >= total - tol:
            if len(merged) == 1:
                return [(0.0, total)]
            # Join the last interval with the first one across the start
            first = merged.pop(0)
            merged[-1][1] = first[1] + total

    return [(lo, hi) for lo, hi in merged]


def _gaps(intervals, total, closed):
    """
    Returns the parts of [0, total) not covered by merged intervals.

    """
    if not intervals:
        return [(0.0, total)]

    if closed:
        gaps = []
        for k, (lo, hi) in enumerate(intervals):
            nxt = intervals[(k + 1) % len(intervals)][0] + (total if k + 1 == len(intervals) else 0.0)
            if nxt - hi > 1e-12 * total:
                gaps.append((hi, nxt))
        return gaps

    gaps = []
    cursor = 0.0
    for lo, hi in intervals:
        if lo - cursor > 1e-12 * total:
            gaps.append((cursor, lo))
        cursor = max(cursor, hi)
    if total - cursor > 1e-12 * total:
        gaps.append((cursor, total))

    return gaps


def _point_at(surface, chain, position):
    offset = 0.0
    for segment in chain.segments:
        if position <= offset + segment.length() or segment is chain.segments[-1]:
            tri, point, _ = locate(surface, segment, position - offset)
            return tri, point
        offset += segment.length()


def find_short_curves(surface, m0=DEFAULTS.m0, defaults=DEFAULTS, budget=None, twist_mode=None):
    """
    Builds the thick-thin decomposition: short curves are cylinder cores with modulus sum at
    least m0, kept pairwise disjoint by preferring larger sums.

    """
    if not m0 > defaults.m0_floor:
        raise PreconditionError(f"M0 must exceed {defaults.m0_floor}, got {m0}")

    budget = budget if budget is not None else Budget(defaults.develop_budget)
    radius = search_radius(surface.area(), m0, defaults.search_margin)

    connections = enumerate_saddle_connections(surface, radius, budget=budget)
    cylinders = find_cylinders(surface, radius, budget, connections)

    candidates = []
    for cylinder in cylinders:
        e, g = expanding_annuli(surface, cylinder, defaults.expanding_radius_cap, budget)
        annulus = AnnulusData.build(len(candidates), cylinder, e, g)
        candidates.append(annulus)

    shorts = []
    for annulus in sorted(candidates, key=lambda a: -a.modulus_sum):
        if annulus.modulus_sum < m0:
            continue

        mine = annulus.cylinder.core_pieces()
        if any(interior_crossings(surface, mine, other.cylinder.core_pieces()) for other in shorts):
            logger.debug("Dropped short candidate %r: it crosses a kept short curve", annulus.cylinder)
            continue

        shorts.append(annulus)

    # Renumber the kept annuli
    shorts = [AnnulusData.build(k, a.cylinder, a.e, a.g) for k, a in enumerate(shorts)]

    pieces, triangle_piece, component, find = _build_pieces(surface, shorts, connections, cylinders)

    tt = ThickThin(surface, shorts, pieces, m0, cylinders, connections, twist_mode or defaults.twist_mode)
    tt._triangle_piece = triangle_piece
    tt._component = component
    tt._find = find

    logger.debug(
        "Decomposition with M0 = %s: %s short curves, %s pieces (%s developed triangles)",
        m0,
        len(shorts),
        len(pieces),
        budget.used,
    )

    return tt
