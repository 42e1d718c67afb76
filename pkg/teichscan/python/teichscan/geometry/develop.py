"""
Straight-line tracing and wedge development on a triangulated flat surface.

Tracing follows one straight segment from triangle to triangle through the gluings.
Developing unfolds the triangles seen from a vertex inside an angular sector and
reports every vertex that is visible from it, which is how saddle connections are
enumerated.

"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config import DEFAULTS
from ..errors import BudgetError, StructuralError
from .utils import EPS, cross, dot, norm, point_segment_distance, rotate, side_of_line, unit, wrap_angle

logger = logging.getLogger(__name__)


class Budget:
    """
    Counts developed triangles and raises BudgetError once the limit is passed.
    NOTE: A single budget can be shared between several enumerations.

    """

    def __init__(self, limit=DEFAULTS.develop_budget):
        self.limit = limit
        self.used = 0
        self.partial = []

    def spend(self, amount=1):
        self.used += amount
        if self.used > self.limit:
            raise BudgetError(
                f"Development budget of {self.limit} triangles exhausted after {len(self.partial)} results",
                partial=list(self.partial),
            )


@dataclass(frozen=True)
class Piece:
    """
    The part of a traced segment inside one triangle, in that triangle's coordinates.

    """

    tri: int
    start: np.ndarray
    end: np.ndarray
    # Arclength from the start of the trace to the start of this piece
    offset: float

    @property
    def length(self):
        return norm(self.end - self.start)

    def direction(self):
        return unit(self.end - self.start)


@dataclass
class Trace:
    pieces: list = field(default_factory=list)
    length: float = 0.0
    end_tri: int = -1
    end_point: Optional[np.ndarray] = None
    # Unit direction of travel at the end, in the end triangle's frame
    end_direction: Optional[np.ndarray] = None
    # Corner of the end triangle the trace stopped at, if any
    end_corner: Optional[int] = None
    # True when the trace ran into a vertex before covering the requested length
    blocked: bool = False


@dataclass(frozen=True)
class SaddleConnection:
    """
    A straight segment between two vertices with no vertex in its interior.

    Angles are absolute angles around the start and end vertices. The end angle points
    back along the connection.

    """

    start_vertex: int
    start_tri: int
    start_corner: int
    start_angle: float
    holonomy: tuple
    end_vertex: int
    end_tri: int
    end_corner: int
    end_angle: float

    @property
    def length(self):
        return float(np.hypot(*self.holonomy))

    def vector(self):
        return np.array(self.holonomy, dtype=float)


def _scale(surface, t):
    return max(norm(w) for w in surface.triangle_edges(t))


def corner_at(surface, t, point, tol=1e-9):
    """
    Returns the corner of triangle t at the given local point, or None.

    """
    scale = _scale(surface, t)
    for i, corner in enumerate(surface.triangle_corners(t)):
        if norm(point - corner) <= tol * scale:
            return i

    return None


def _edge_distance(surface, t, e, point):
    # Positive inside the triangle
    return cross(surface.edge(t, e), point - surface.corner_position(t, e))


def _cross_edge(surface, t, e, mu, direction):
    """
    Moves the point at parameter mu on edge e of t, heading along direction, into the
    neighbouring triangle.

    """
    (t2, e2), sign = surface.partner(t, e)
    point = surface.corner_position(t2, e2) + (1 - mu) * surface.edge(t2, e2)

    return t2, e2, point, -sign * direction


def trace(surface, tri, point, vector, stop_at_vertex=False, budget=None):
    """
    Follows the straight segment starting at a local point of triangle tri with the
    given holonomy vector, expressed in tri's frame.

    Passing through a vertex before the end raises StructuralError unless stop_at_vertex
    is set, in which case the trace ends there with blocked set.

    """
    point = np.asarray(point, dtype=float)
    vector = np.asarray(vector, dtype=float)
    remaining = norm(vector)

    if remaining == 0:
        raise StructuralError(f"Cannot trace a zero-length segment from triangle {tri}")

    t = tri
    direction = vector / remaining
    skip = set()

    # Start at a corner: reseat so the direction lies in the corner's wedge
    corner = corner_at(surface, t, point)
    if corner is not None:
        angle = surface.angle_of(t, corner, direction)
        t, corner, direction = surface.direction_at(surface.vertex_of(t, corner), angle)
        point = surface.corner_position(t, corner).copy()
        skip = {corner, (corner - 1) % 3}
    else:
        # Start on an edge heading out: hand over to the neighbour first
        scale = _scale(surface, t)
        for e in range(3):
            w = surface.edge(t, e)
            if abs(_edge_distance(surface, t, e, point)) <= 1e-9 * scale * norm(w) and cross(w, direction) < 0:
                mu = dot(point - surface.corner_position(t, e), w) / dot(w, w)
                t, e2, point, direction = _cross_edge(surface, t, e, mu, direction)
                skip = {e2}
                break

    result = Trace()
    travelled = 0.0

    while True:
        if budget is not None:
            budget.spend()

        edges = surface.triangle_edges(t)
        scale = _scale(surface, t)
        tol = 1e-9 * scale

        # Nearest exit edge
        best = None
        for e in range(3):
            if e in skip:
                continue
            rate = -cross(edges[e], direction)
            if rate <= EPS * norm(edges[e]):
                continue
            lam = max(_edge_distance(surface, t, e, point), 0.0) / rate
            if best is None or lam < best[0]:
                best = (lam, e)

        if best is None:
            raise StructuralError(f"Trace lost inside triangle {t}: no exit edge for direction {direction}")

        lam, e = best

        # Ends inside this triangle
        if lam >= remaining - tol:
            end = point + remaining * direction
            result.pieces.append(Piece(t, point, end, travelled))
            result.length = travelled + remaining
            result.end_tri = t
            result.end_point = end
            result.end_direction = direction
            result.end_corner = corner_at(surface, t, end)
            return result

        exit_point = point + lam * direction
        w = edges[e]
        mu = dot(exit_point - surface.corner_position(t, e), w) / dot(w, w)

        # Runs into a vertex
        if mu <= 1e-9 or mu >= 1 - 1e-9:
            hit = e if mu <= 1e-9 else (e + 1) % 3
            exit_point = surface.corner_position(t, hit).copy()
            result.pieces.append(Piece(t, point, exit_point, travelled))
            result.length = travelled + norm(exit_point - point)
            result.end_tri = t
            result.end_point = exit_point
            result.end_direction = direction
            result.end_corner = hit
            result.blocked = True

            if stop_at_vertex:
                return result

            raise StructuralError(
                f"Segment from triangle {tri} passes through vertex {surface.vertex_of(t, hit)} "
                f"after length {result.length:.6g} of {result.length + remaining - lam:.6g}"
            )

        result.pieces.append(Piece(t, point, exit_point, travelled))
        travelled += lam
        remaining -= lam

        t, e2, point, direction = _cross_edge(surface, t, e, mu, direction)
        skip = {e2}


def end_angle(surface, result):
    """
    Returns the absolute angle at the end vertex pointing back along a trace that ended at
    a corner.

    """
    if result.end_corner is None:
        raise StructuralError(f"Trace ends inside triangle {result.end_tri}, not at a vertex")

    return surface.angle_of(result.end_tri, result.end_corner, -result.end_direction)


def shoot(surface, v, angle, max_length, budget=None):
    """
    Returns the saddle connection leaving vertex v at the absolute angle, or None if the
    ray covers max_length without meeting a vertex.

    """
    t, i, direction = surface.direction_at(v, angle)
    result = trace(surface, t, surface.corner_position(t, i), direction * max_length, True, budget)

    if result.end_corner is None:
        return None

    holonomy = direction * result.length

    return SaddleConnection(
        start_vertex=v,
        start_tri=t,
        start_corner=i,
        start_angle=surface.angle_of(t, i, direction),
        holonomy=(float(holonomy[0]), float(holonomy[1])),
        end_vertex=surface.vertex_of(result.end_tri, result.end_corner),
        end_tri=result.end_tri,
        end_corner=result.end_corner,
        end_angle=end_angle(surface, result),
    )


@dataclass(frozen=True)
class Clip:
    """
    A line in the developed plane of a sector, given by two points in polar form
    (absolute angle, distance). Development stops beyond it.

    """

    angle1: float
    length1: float
    angle2: float
    length2: float


def _polar_point(surface, t, i, corner_offset, angle, length):
    return length * rotate(unit(surface.edge(t, i)), angle - corner_offset)


def develop_sector(surface, v, lo, hi, radius, clip=None, include_lower=False, budget=None):
    """
    Returns the saddle connections leaving vertex v with length at most radius and an
    absolute start angle in the open interval (lo, hi), or [lo, hi) with include_lower.

    With a clip line, only vertices strictly on the near side of the line or on it are
    reported and development stops once a crossed edge lies entirely beyond it.
    NOTE: hi - lo must not exceed the cone angle at v.

    """
    budget = budget if budget is not None else Budget()
    theta = surface.cone_angle(v)
    span = hi - lo
    turn = wrap_angle(lo, theta) - lo
    lo += turn
    hi = lo + span

    found = []

    for t, i in surface.vertex_corners(v):
        kappa = surface.corner_angle(t, i)
        base = surface.corner_offset(t, i)

        for shift in (0.0, theta):
            offset = base + shift
            a = max(lo, offset)
            b = min(hi, offset + kappa)
            if a >= b:
                continue

            origin = surface.corner_position(t, i)

            line = None
            if clip is not None:
                q1 = _polar_point(surface, t, i, offset, clip.angle1 + turn, clip.length1)
                q2 = _polar_point(surface, t, i, offset, clip.angle2 + turn, clip.length2)
                near = np.sign(side_of_line(np.zeros(2), q1, q2))
                line = (q1, q2, near)

            # The corner's own outgoing edge
            w = surface.edge(t, i)
            lower_in = lo < offset < hi or (include_lower and abs(offset - lo) <= 1e-12 * max(theta, 1.0))
            if lower_in and norm(w) <= radius and _before_clip(line, w):
                found.append(_connection(surface, t, i, w, t, (i + 1) % 3, -w))
                budget.partial.append(found[-1])

            lower = rotate(unit(w), a - offset)
            upper = rotate(unit(w), b - offset)

            # Cross the opposite edge with corner i at the origin
            start = (t, (i + 1) % 3, 1, -origin, w, -surface.edge(t, (i - 1) % 3), lower, upper)
            _develop_wedge(surface, t, i, start, radius, line, found, budget)

    return found


def _before_clip(line, point, inclusive=True):
    if line is None:
        return True

    q1, q2, near = line
    side = near * side_of_line(point, q1, q2)
    tol = EPS * max(norm(q2 - q1), 1e-300) * max(norm(point), norm(q1), 1e-300)

    return side >= -tol if inclusive else side > tol


def _connection(surface, t0, i0, vector, t_end, corner_end, back):
    """
    Builds the saddle connection from corner (t0, i0) along vector, ending at corner_end of
    t_end where back is the reversed vector in t_end's frame.

    """
    return SaddleConnection(
        start_vertex=surface.vertex_of(t0, i0),
        start_tri=t0,
        start_corner=i0,
        start_angle=surface.angle_of(t0, i0, vector),
        holonomy=(float(vector[0]), float(vector[1])),
        end_vertex=surface.vertex_of(t_end, corner_end),
        end_tri=t_end,
        end_corner=corner_end,
        end_angle=surface.angle_of(t_end, corner_end, back),
    )


def _ray_hit(A, d, ray):
    denom = cross(ray, d)
    if abs(denom) <= EPS * norm(d):
        return None
    s = cross(A, d) / denom
    return s * ray if s > 0 else None


def _wedge_distance(A, B, lower, upper):
    """
    Returns the distance from the origin to the part of segment AB between the wedge rays.

    """
    d = B - A
    P = _ray_hit(A, d, lower)
    Q = _ray_hit(A, d, upper)
    if P is None or Q is None:
        return point_segment_distance(np.zeros(2), A, B)

    return point_segment_distance(np.zeros(2), P, Q)


def _develop_wedge(surface, t0, i0, start, radius, line, found, budget):
    """
    Unfolds triangles across the edges seen from the origin inside open wedges.

    Each stack entry is (tri, edge, frame sign, frame shift, A, B, lower, upper): the edge of
    tri about to be crossed, its developed endpoints with A on the lower side, and the wedge
    rays. Developed coordinates are sign * local + shift.

    """
    stack = [start]

    while stack:
        t, e, sign, shift, A, B, lower, upper = stack.pop()

        if _wedge_distance(A, B, lower, upper) > radius * (1 + EPS):
            continue
        if line is not None and not (_before_clip(line, A, False) or _before_clip(line, B, False)):
            continue

        budget.spend()

        (t2, e2), glue = surface.partner(t, e)
        sign2 = -glue * sign
        shift2 = B - sign2 * surface.corner_position(t2, e2)
        far = (e2 + 2) % 3
        P = sign2 * surface.corner_position(t2, far) + shift2

        # lower and upper are unit rays
        tol = EPS * norm(P)

        if cross(lower, P) > tol and cross(P, upper) > tol:
            length = norm(P)
            if length <= radius and _before_clip(line, P):
                found.append(_connection(surface, t0, i0, P, t2, far, sign2 * -P))
                budget.partial.append(found[-1])

            ray = unit(P)
            stack.append((t2, (e2 + 2) % 3, sign2, shift2, P, B, ray, upper))
            stack.append((t2, (e2 + 1) % 3, sign2, shift2, A, P, lower, ray))
        elif cross(lower, P) <= tol:
            stack.append((t2, (e2 + 2) % 3, sign2, shift2, P, B, lower, upper))
        else:
            stack.append((t2, (e2 + 1) % 3, sign2, shift2, A, P, lower, upper))


def enumerate_saddle_connections(surface, radius, vertices=None, budget=None):
    """
    Returns every saddle connection of length at most radius leaving the given vertices
    (all vertices by default), once per direction, sorted by (length, start vertex, angle).

    """
    budget = budget if budget is not None else Budget()
    vertices = range(surface.num_vertices()) if vertices is None else vertices

    found = []
    for v in vertices:
        found.extend(develop_sector(surface, v, 0.0, surface.cone_angle(v), radius, include_lower=True, budget=budget))

    found.sort(key=lambda c: (round(c.length, 12), c.start_vertex, c.start_angle))
    logger.debug(
        "Enumerated %s saddle connections up to length %.6g using %s developed triangles",
        len(found),
        radius,
        budget.used,
    )

    return found
