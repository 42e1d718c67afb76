"""
Closed curves and arcs on a flat surface.

A curve is a chain of straight segments, each stored as a triangle, a barycentric start
point and a holonomy vector in that triangle's frame. Geodesic representatives are chains
of saddle connections anchored at vertices; cylinder cores are single closed segments that
never meet a vertex.

"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .config import DEFAULTS
from .errors import (
    NonConvergenceError,
    PreconditionError,
    SchemaError,
    StructuralError,
    UnsupportedRepresentationError,
)
from .geometry.develop import Clip, corner_at, develop_sector, end_angle, trace
from .geometry.utils import ccw_angle, dist, norm, segment_intersection, side_of_line, signed_angle, wrap_angle
from .surface import PlanarVector

logger = logging.getLogger(__name__)

CURVE_SCHEMA = "teichscan-curve/1"

# Angular offset used to push the second curve off shared vertices and segments
PERTURBATION = 1e-7


# ---- types -------------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """
    A straight segment starting at a barycentric point of a triangle.

    """

    tri: int
    start: tuple
    vector: PlanarVector

    def __post_init__(self):
        if self.vector.is_zero():
            raise StructuralError(f"Zero-length segment in triangle {self.tri}")

    @classmethod
    def at_corner(cls, tri, corner, vector):
        start = [0.0, 0.0, 0.0]
        start[corner % 3] = 1.0

        return cls(tri, tuple(start), PlanarVector(float(vector[0]), float(vector[1])))

    @classmethod
    def at_point(cls, surface, tri, point, vector):
        corners = surface.triangle_corners(tri)
        b1, b2 = np.linalg.solve(np.column_stack([corners[1], corners[2]]), point)

        return cls(tri, (float(1 - b1 - b2), float(b1), float(b2)), PlanarVector(float(vector[0]), float(vector[1])))

    def corner(self):
        for i, b in enumerate(self.start):
            if abs(b - 1) <= 1e-12:
                return i

        return None

    def start_point(self, surface):
        corners = surface.triangle_corners(self.tri)

        return self.start[1] * corners[1] + self.start[2] * corners[2]

    def length(self):
        return self.vector.length()

    def array(self):
        return self.vector.as_array()


@dataclass(frozen=True)
class SegmentChain:
    segments: tuple
    closed: bool = True

    def __post_init__(self):
        if len(self.segments) == 0:
            raise StructuralError("A segment chain needs at least one segment")

    def length(self):
        return float(sum(segment.length() for segment in self.segments))

    def hv(self):
        h = float(sum(abs(segment.vector.h) for segment in self.segments))
        v = float(sum(abs(segment.vector.v) for segment in self.segments))

        return h, v

    def is_anchored(self):
        return all(segment.corner() is not None for segment in self.segments)

    def __len__(self):
        return len(self.segments)


@dataclass(frozen=True)
class CylinderCore:
    """
    The closed leaf of a flat cylinder at relative height pos.

    """

    cylinder: object
    pos: float = 0.5

    def __post_init__(self):
        if not 0 < self.pos < 1:
            raise PreconditionError(f"Core position must lie strictly between 0 and 1, got {self.pos}")

    @property
    def closed(self):
        return True

    def chain(self):
        return self.cylinder.leaf(self.pos)

    def length(self):
        return self.cylinder.circumference

    def hv(self):
        return self.chain().hv()


@dataclass(frozen=True)
class FlatCurve:
    geometry: Union[SegmentChain, CylinderCore]
    weight: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.weight > 0:
            raise PreconditionError(f"Curve weight must be positive, got {self.weight}")
        if not self.geometry.closed:
            raise StructuralError("A curve must be closed; open chains are arcs")

    def chain(self):
        if isinstance(self.geometry, CylinderCore):
            return self.geometry.chain()

        return self.geometry

    def scaled(self, k):
        return replace(self, weight=self.weight * k)

    def with_chain(self, chain):
        return replace(self, geometry=chain)


@dataclass(frozen=True)
class ArcOnSurface:
    """
    A piece of a curve's geodesic representative between arclength positions start and end
    (measured without weight, from the first anchor).

    """

    chain: SegmentChain
    parent: FlatCurve
    start: float
    end: float
    region: Optional[str] = None

    def __post_init__(self):
        if self.chain.closed:
            raise StructuralError("An arc must be an open chain")


# ---- lengths -----------------------------------------------------------------------------


def _check_references(surface, chain):
    for segment in chain.segments:
        if not 0 <= segment.tri < surface.num_triangles():
            raise StructuralError(f"Segment refers to triangle {segment.tri}, surface has {surface.num_triangles()}")


def flat_length(c, surface=None):
    """
    Returns the weighted flat length of a curve or arc.

    """
    if isinstance(c, ArcOnSurface):
        if surface is not None:
            _check_references(surface, c.chain)
        return c.parent.weight * c.chain.length()

    if isinstance(c.geometry, CylinderCore):
        if surface is not None and c.geometry.cylinder.surface is not surface:
            raise StructuralError("Cylinder core refers to a cylinder of another surface")
        return c.weight * c.geometry.length()

    if surface is not None:
        _check_references(surface, c.geometry)

    return c.weight * c.geometry.length()


def hv_lengths(c, surface=None):
    """
    Returns the weighted horizontal and vertical lengths (h_q, v_q) of a curve or arc.

    """
    if isinstance(c, ArcOnSurface):
        if surface is not None:
            _check_references(surface, c.chain)
        h, v = c.chain.hv()
        return c.parent.weight * h, c.parent.weight * v

    if surface is not None and not isinstance(c.geometry, CylinderCore):
        _check_references(surface, c.geometry)

    h, v = c.geometry.hv()

    return c.weight * h, c.weight * v


# ---- anchors -----------------------------------------------------------------------------


@dataclass
class Link:
    """
    A saddle connection in polar form: leaves vertex at an absolute angle for length.

    """

    vertex: int
    angle: float
    length: float
    end_vertex: int = -1
    end_angle: float = 0.0

    def resolve(self, surface):
        t, i, direction = surface.direction_at(self.vertex, self.angle)
        result = trace(surface, t, surface.corner_position(t, i), direction * self.length)

        if result.end_corner is None:
            raise StructuralError(
                f"Segment from vertex {self.vertex} at angle {self.angle:.6g} does not end at a vertex"
            )

        self.end_vertex = surface.vertex_of(result.end_tri, result.end_corner)
        self.end_angle = end_angle(surface, result)

        return self

    def segment(self, surface):
        t, i, direction = surface.direction_at(self.vertex, self.angle)

        return Segment.at_corner(t, i, direction * self.length)


def links_of(surface, chain):
    """
    Returns the chain as resolved links.
    Raises UnsupportedRepresentationError when a segment does not start at a vertex.

    """
    _check_references(surface, chain)
    links = []

    for k, segment in enumerate(chain.segments):
        corner = segment.corner()
        if corner is None:
            raise UnsupportedRepresentationError(f"Segment {k} of the chain does not start at a vertex")

        vertex = surface.vertex_of(segment.tri, corner)
        angle = surface.angle_of(segment.tri, corner, segment.array())
        links.append(Link(vertex, angle, segment.length()).resolve(surface))

    for k in range(len(links) - (0 if chain.closed else 1)):
        nxt = links[(k + 1) % len(links)]
        if links[k].end_vertex != nxt.vertex:
            raise StructuralError(
                f"Segment {k} ends at vertex {links[k].end_vertex} but segment {(k + 1) % len(links)} "
                f"starts at vertex {nxt.vertex}"
            )

    return links


def chain_of(surface, links, closed=True):
    return SegmentChain(tuple(link.segment(surface) for link in links), closed)


def _anchor_angles(surface, links, k):
    """
    Returns (vertex, incoming angle, outgoing angle) at the anchor between link k - 1 and link k.

    """
    incoming = links[k - 1]
    outgoing = links[k]

    return outgoing.vertex, incoming.end_angle, outgoing.angle


def _side_angles(surface, v, a_in, a_out):
    theta = surface.cone_angle(v)
    phi = wrap_angle(a_in - a_out, theta)

    # Counterclockwise from outgoing to incoming, and from incoming to outgoing
    return phi, theta - phi


def _interior_anchors(links, closed):
    return range(len(links)) if closed else range(1, len(links))


@dataclass(frozen=True)
class GeodesicCheck:
    """
    Result of the angle test. Falsy when some anchor turns by less than pi on one side.

    """

    geodesic: bool
    anchor: Optional[int] = None
    vertex: Optional[int] = None
    angles: Optional[tuple] = None

    def __bool__(self):
        return self.geodesic


def _continues_straight(surface, result, segment):
    """
    Checks that the next segment leaves from the end of a trace in the same direction.

    """
    point = segment.start_point(surface)
    direction = segment.array() / segment.length()
    scale = max(norm(w) for w in surface.triangle_edges(segment.tri))

    if segment.tri == result.end_tri:
        return dist(point, result.end_point) <= 1e-9 * scale and norm(direction - result.end_direction) <= 1e-9

    # The end may lie on an edge shared with the next segment's triangle
    for e in range(3):
        (t2, e2), sign = surface.partner(result.end_tri, e)
        if t2 != segment.tri:
            continue
        w = surface.edge(result.end_tri, e)
        mu = float(np.dot(result.end_point - surface.corner_position(result.end_tri, e), w) / np.dot(w, w))
        mapped = surface.corner_position(t2, e2) + (1 - mu) * surface.edge(t2, e2)
        if dist(mapped, point) <= 1e-9 * scale and norm(-sign * result.end_direction - direction) <= 1e-9:
            return True

    return False


def is_geodesic(surface, chain, tol=DEFAULTS.angle_tol):
    """
    Checks that the chain turns by at least pi on both sides at every interior anchor.

    Chains that start somewhere other than a vertex are accepted only when they continue
    straight through those points, as a closed leaf does.

    """
    if not chain.is_anchored():
        for k, segment in enumerate(chain.segments):
            result = trace(surface, segment.tri, segment.start_point(surface), segment.array())
            if k + 1 == len(chain.segments) and not chain.closed:
                break
            nxt = chain.segments[(k + 1) % len(chain.segments)]
            if nxt.corner() is not None or not _continues_straight(surface, result, nxt):
                raise UnsupportedRepresentationError(f"Anchor {k + 1} of the chain is not a vertex")

        return GeodesicCheck(True)

    links = links_of(surface, chain)

    for k in _interior_anchors(links, chain.closed):
        v, a_in, a_out = _anchor_angles(surface, links, k)
        left, right = _side_angles(surface, v, a_in, a_out)
        if left < math.pi - tol or right < math.pi - tol:
            return GeodesicCheck(False, k % len(links), v, (left, right))

    return GeodesicCheck(True)


# ---- tightening --------------------------------------------------------------------------


def _polar(angle, length, base):
    return length * np.array([math.cos(angle - base), math.sin(angle - base)])


def _taut_path(p_prev, p_next, points, tol=1e-12):
    """
    Returns the indices of points on the taut path from p_prev to p_next that keeps every
    point on the far side from the origin.

    """
    near = np.sign(side_of_line(np.zeros(2), p_prev, p_next))
    end = len(points)
    candidates = list(range(len(points))) + [end]

    def position(index):
        return p_next if index == end else points[index]

    path = []
    current = p_prev

    for _ in range(len(points) + 1):
        best = None
        for index in candidates:
            if best is None:
                best = index
                continue

            x = position(index)
            y = position(best)
            scale = max(norm(x - current), norm(y - current), 1e-300)
            side = near * side_of_line(x, current, y) / (scale * scale)
            if side > tol or (abs(side) <= tol and dist(current, x) < dist(current, y)):
                best = index

        path.append(best)
        candidates.remove(best)
        current = position(best)

        if best == end:
            break

    return path[:-1]


def _tighten_anchor(surface, links, k, closed, budget):
    """
    Replaces the two links meeting at anchor k by the taut path across the narrow side.
    Returns the new list of links.

    """
    n = len(links)
    incoming = links[k - 1]
    outgoing = links[k]
    v, a_in, a_out = _anchor_angles(surface, links, k)
    left, right = _side_angles(surface, v, a_in, a_out)

    if left <= right:
        lo, hi = a_out, a_out + left
        prev_angle, next_angle = hi, lo
    else:
        lo, hi = a_in, a_in + right
        prev_angle, next_angle = lo, hi

    tol = DEFAULTS.angle_tol

    if hi - lo <= tol:
        # Doubling back
        if abs(incoming.length - outgoing.length) > 1e-9 * max(incoming.length, outgoing.length):
            raise StructuralError(f"Chain overlaps itself with unequal lengths at anchor {k}")
        new = []
    else:
        p_prev = _polar(prev_angle, incoming.length, lo)
        p_next = _polar(next_angle, outgoing.length, lo)

        hits = develop_sector(
            surface,
            v,
            lo,
            hi,
            max(incoming.length, outgoing.length),
            clip=Clip(prev_angle, incoming.length, next_angle, outgoing.length),
            budget=budget,
        )

        points = [_polar(lo + wrap_angle(hit.start_angle - lo, surface.cone_angle(v)), hit.length, lo) for hit in hits]
        path = _taut_path(p_prev, p_next, points)

        corners = [p_prev] + [points[j] for j in path] + [p_next]
        new = []

        # First link leaves v_{k-1}, turning from the old direction towards the anchor
        first = corners[1] - corners[0]
        new.append(Link(incoming.vertex, incoming.angle + signed_angle(-corners[0], first), norm(first)))

        for j, index in enumerate(path):
            hit = hits[index]
            q = corners[j + 1]
            step = corners[j + 2] - q
            new.append(Link(hit.end_vertex, hit.end_angle + signed_angle(-q, step), norm(step)))

        for link in new:
            link.angle = wrap_angle(link.angle, surface.cone_angle(link.vertex))
            link.resolve(surface)

        if new[-1].end_vertex != outgoing.end_vertex:
            raise StructuralError(
                f"Tightening at anchor {k} ended at vertex {new[-1].end_vertex}, expected {outgoing.end_vertex}"
            )

    if closed:
        rotated = links[k:] + links[:k]
        result = rotated[1:-1] + new if n > 1 else new
    else:
        result = links[: k - 1] + new + links[k + 1 :]

    if not result:
        raise PreconditionError("Chain tightens to a point: it is null-homotopic")

    return result


def tighten(surface, chain, budget=DEFAULTS.tighten_budget):
    """
    Shortens a vertex-anchored chain by local moves at anchors turning by less than pi
    until it passes is_geodesic.
    NOTE: A chain that is already geodesic is returned unchanged.

    """
    if not chain.is_anchored():
        # Closed leaves are already straight
        is_geodesic(surface, chain)
        return chain

    links = links_of(surface, chain)
    if is_geodesic(surface, chain):
        return chain

    tol = DEFAULTS.angle_tol
    iterations = 0

    while True:
        worst = None
        for k in _interior_anchors(links, chain.closed):
            v, a_in, a_out = _anchor_angles(surface, links, k)
            narrow = min(_side_angles(surface, v, a_in, a_out))
            if narrow < math.pi - tol and (worst is None or narrow < worst[0]):
                worst = (narrow, k)

        if worst is None:
            break

        iterations += 1
        if iterations > budget:
            best = chain_of(surface, links, chain.closed)
            raise NonConvergenceError(
                f"Tightening did not converge within {budget} moves (length {best.length():.6g})", best=best
            )

        links = _tighten_anchor(surface, links, worst[1], chain.closed, None)
        logger.debug("Tighten move %s at anchor %s: %s links remain", iterations, worst[1], len(links))

    return chain_of(surface, links, chain.closed)


# ---- crossings ---------------------------------------------------------------------------


@dataclass
class CurvePieces:
    """
    A traced curve: its pieces per triangle and its passages through vertices.

    """

    pieces: list
    length: float
    closed: bool
    # (vertex, incoming angle, outgoing angle, arclength position)
    passages: list = field(default_factory=list)

    def by_triangle(self):
        grouped = {}
        for piece in self.pieces:
            grouped.setdefault(piece.tri, []).append(piece)

        return grouped


def trace_chain(surface, chain):
    """
    Traces every segment of a chain and collects its vertex passages.

    """
    pieces = []
    offset = 0.0
    passages = []

    anchored = chain.is_anchored()
    links = links_of(surface, chain) if anchored else None

    for k, segment in enumerate(chain.segments):
        result = trace(surface, segment.tri, segment.start_point(surface), segment.array())
        for piece in result.pieces:
            pieces.append(replace(piece, offset=piece.offset + offset))

        if anchored and (chain.closed or k > 0):
            v, a_in, a_out = _anchor_angles(surface, links, k)
            passages.append((v, a_in, a_out, offset))

        offset += segment.length()

    return CurvePieces(pieces, offset, chain.closed, passages)


@dataclass(frozen=True)
class Crossing:
    """
    A transverse interior crossing of two traced curves inside triangle tri.
    Directions are unit vectors in tri's frame.

    """

    pos1: float
    pos2: float
    tri: int
    point: tuple
    dir1: tuple
    dir2: tuple


def interior_crossings(surface, first, second):
    """
    Returns the transverse crossings of two traced curves away from vertices, each once.

    """
    found = []
    grouped = second.by_triangle()
    tol1 = 1e-9 * max(first.length, 1e-300)
    tol2 = 1e-9 * max(second.length, 1e-300)

    for p1 in first.pieces:
        for p2 in grouped.get(p1.tri, ()):
            hit = segment_intersection(p1.start, p1.end, p2.start, p2.end)
            if hit is None:
                continue

            s, u = hit
            point = p1.start + s * (p1.end - p1.start)
            if corner_at(surface, p1.tri, point) is not None:
                continue

            pos1 = (p1.offset + s * p1.length) % first.length
            pos2 = (p2.offset + u * p2.length) % second.length

            duplicate = False
            for other in found:
                d1 = abs(other.pos1 - pos1)
                d2 = abs(other.pos2 - pos2)
                if min(d1, first.length - d1) <= tol1 and min(d2, second.length - d2) <= tol2:
                    duplicate = True
                    break

            if not duplicate:
                found.append(
                    Crossing(pos1, pos2, p1.tri, tuple(point), tuple(p1.direction()), tuple(p2.direction()))
                )

    found.sort(key=lambda c: (c.pos1, c.pos2))

    return found


def _in_open_arc(surface, v, angle, lo, hi):
    theta = surface.cone_angle(v)
    offset = wrap_angle(angle - lo, theta)

    return 0 < offset < wrap_angle(hi - lo, theta)


def vertex_crossings(surface, first, second):
    """
    Counts transverse passages of the second curve through the first at shared vertices,
    after pushing the second curve slightly to its right.

    """
    count = 0

    for v1, in1, out1, _ in first.passages:
        for v2, in2, out2, _ in second.passages:
            if v1 != v2:
                continue

            leaving = _in_open_arc(surface, v1, out2 - PERTURBATION, out1, in1)
            arriving = _in_open_arc(surface, v1, in2 + PERTURBATION, out1, in1)
            if leaving != arriving:
                count += 1

    return count


def intersection_number(surface, c1, c2):
    """
    Returns the weighted number of transverse crossings of two geodesic representatives.

    """
    first = trace_chain(surface, c1.chain())
    second = trace_chain(surface, c2.chain())

    count = len(interior_crossings(surface, first, second)) + vertex_crossings(surface, first, second)

    return c1.weight * c2.weight * count


def restrict(surface, c, region, tt):
    """
    Returns the arcs of c inside a thick piece or annulus of the decomposition tt, and their
    total weighted length.

    """
    if tt.surface is not surface:
        raise StructuralError("The decomposition was computed for another surface")

    arcs = tt.restriction(c, region)

    return arcs, float(sum(flat_length(arc) for arc in arcs))


# ---- locating and cutting ----------------------------------------------------------------


def locate(surface, segment, distance):
    """
    Returns (tri, point, unit direction) at the given distance along a segment.

    """
    point = segment.start_point(surface)
    direction = segment.array() / segment.length()

    if distance <= 0:
        return segment.tri, point, direction

    result = trace(surface, segment.tri, point, direction * distance, stop_at_vertex=True)

    return result.end_tri, result.end_point, result.end_direction


def sub_chain(surface, chain, start, end):
    """
    Returns the open chain between two arclength positions of a chain (unweighted).
    On closed chains end may exceed the chain length, wrapping around once.

    """
    total = chain.length()
    if end - start <= 0:
        raise PreconditionError(f"Empty sub-chain [{start}, {end}]")

    segments = []
    offset = 0.0
    rounds = [0.0, total] if chain.closed else [0.0]

    for shift in rounds:
        offset = shift
        for segment in chain.segments:
            a = max(start, offset)
            b = min(end, offset + segment.length())
            if b - a > 1e-12 * max(total, 1e-300):
                tri, point, direction = locate(surface, segment, a - offset)
                segments.append(Segment.at_point(surface, tri, point, direction * (b - a)))
            offset += segment.length()

    if not segments:
        raise PreconditionError(f"Sub-chain [{start}, {end}] misses the chain")

    return SegmentChain(tuple(segments), closed=False)


# ---- builders ----------------------------------------------------------------------------


def segment_in_direction(surface, v, direction, length):
    """
    Returns the segment leaving vertex v along a direction given in triangle frames.
    NOTE: On a half-translation surface the first corner whose wedge holds the direction wins.

    """
    for t, i in surface.vertex_corners(v):
        angle = ccw_angle(surface.edge(t, i), direction)
        if angle <= surface.corner_angle(t, i) + 1e-12:
            return Segment.at_corner(t, i, length * np.asarray(direction, dtype=float) / norm(direction))

    raise StructuralError(f"No corner of vertex {v} holds direction {direction}")


def torus_curve(surface, p, q, weight=1.0):
    """
    Returns the closed geodesic of slope (p, q) through the vertex of a builder torus.

    """
    if surface.num_triangles() != 2 or surface.num_vertices() != 1:
        raise PreconditionError("torus_curve needs a two-triangle torus from build_flat_torus")
    if math.gcd(int(p), int(q)) != 1:
        raise PreconditionError(f"({p}, {q}) is not primitive")

    width = surface.edge(0, 0)[0]
    height = surface.edge(0, 1)[1]
    holonomy = np.array([p * width, q * height], dtype=float)

    segment = segment_in_direction(surface, 0, holonomy, norm(holonomy))

    return FlatCurve(SegmentChain((segment,), closed=True), weight, name=f"torus({p},{q})")


def landmark_curve(surface, name, weight=1.0):
    """
    Returns a curve recorded by a builder as a list of edge slots.

    """
    slots = surface.landmarks.get(name)
    if not slots or not isinstance(slots[0], (list, tuple)):
        raise StructuralError(f"Surface has no curve landmark named {name!r}")

    segments = tuple(Segment.at_corner(t, e, surface.edge(t, e)) for t, e in slots)

    return FlatCurve(SegmentChain(segments, closed=True), weight, name=name)


def chain_from_connections(connections, closed=True):
    """
    Assembles a chain from consecutive saddle connections.

    """
    connections = list(connections)
    if not connections:
        raise StructuralError("A chain needs at least one saddle connection")

    for k in range(len(connections) - (0 if closed else 1)):
        nxt = connections[(k + 1) % len(connections)]
        if connections[k].end_vertex != nxt.start_vertex:
            raise StructuralError(
                f"Connection {k} ends at vertex {connections[k].end_vertex}, next starts at {nxt.start_vertex}"
            )

    segments = tuple(Segment.at_corner(c.start_tri, c.start_corner, c.holonomy) for c in connections)

    return SegmentChain(segments, closed)


# ---- serialisation -----------------------------------------------------------------------


def curve_to_dict(curve, cylinder_id=None):
    """
    Returns a curve in the teichscan-curve/1 schema.

    """
    payload = {"schema": CURVE_SCHEMA, "weight": curve.weight, "name": curve.name}

    if isinstance(curve.geometry, CylinderCore):
        if cylinder_id is None:
            raise StructuralError("Serialising a cylinder core needs the cylinder's id")
        payload["cylinder"] = cylinder_id
        payload["pos"] = curve.geometry.pos
        return payload

    payload["closed"] = curve.geometry.closed
    payload["segments"] = [
        {"tri": s.tri, "start": list(s.start), "vector": {"h": s.vector.h, "v": s.vector.v}}
        for s in curve.geometry.segments
    ]

    return payload


def curve_from_dict(payload, cylinders=None):
    """
    Builds a curve from the teichscan-curve/1 schema. Cylinder references are resolved
    against the given cylinder list.

    """
    if payload.get("schema") != CURVE_SCHEMA:
        raise SchemaError(f"Expected schema {CURVE_SCHEMA!r}, got {payload.get('schema')!r}")

    weight = float(payload.get("weight", 1.0))
    name = payload.get("name", "")

    if "cylinder" in payload:
        index = int(payload["cylinder"])
        if cylinders is None or not 0 <= index < len(cylinders):
            raise StructuralError(f"Curve refers to cylinder {index}, which does not exist")
        return FlatCurve(CylinderCore(cylinders[index], float(payload.get("pos", 0.5))), weight, name)

    try:
        segments = tuple(
            Segment(
                int(s["tri"]),
                tuple(float(b) for b in s["start"]),
                PlanarVector(s["vector"]["h"], s["vector"]["v"]),
            )
            for s in payload["segments"]
        )
    except (KeyError, TypeError, ValueError) as error:
        raise StructuralError(f"Malformed curve payload: {error}") from error

    return FlatCurve(SegmentChain(segments, bool(payload.get("closed", True))), weight, name)
