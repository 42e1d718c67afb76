"""
Triangulated half-translation surfaces.

A surface is a list of triangles, each given by its three edge holonomies traversed
counterclockwise, together with a pairing of edge slots. Slot (t, e) is the edge of
triangle t that runs from corner e to corner e + 1. A pair carries a sign s with
w(e') = s * w(e): s = -1 is a translation gluing, s = +1 the half-translation flip.

Local coordinates of triangle t put corner 0 at the origin, corner 1 at w0 and corner 2
at w0 + w1. Crossing a gluing with sign s changes frames by z -> -s * z + c.

"""
from __future__ import annotations

import bisect
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULTS
from .errors import ConstructionError, StructuralError
from .geometry.utils import cross, norm, rotate, signed_angle, unit, wrap_angle

logger = logging.getLogger(__name__)

SURFACE_SCHEMA = "teichscan-surface/1"


@dataclass(frozen=True)
class PlanarVector:
    """
    A holonomy vector: h is the horizontal component, v the vertical one.

    """

    h: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.h) and np.isfinite(self.v)):
            raise ConstructionError(f"Planar vector components must be finite, got ({self.h}, {self.v})")

    def as_array(self):
        return np.array([self.h, self.v], dtype=float)

    def length(self):
        return float(np.hypot(self.h, self.v))

    def is_zero(self):
        return self.h == 0 and self.v == 0

    def scaled(self, k):
        return PlanarVector(self.h * k, self.v * k)

    def __add__(self, other):
        return PlanarVector(self.h + other.h, self.v + other.v)

    def __sub__(self, other):
        return PlanarVector(self.h - other.h, self.v - other.v)

    def __neg__(self):
        return PlanarVector(-self.h, -self.v)


@dataclass(frozen=True)
class SingularPoint:
    """
    A vertex of the triangulation with its cone angle.

    """

    vertex: int
    cone_angle: float
    is_marked: bool = False

    @property
    def order(self):
        # The cone angle as a multiple of pi
        return int(round(self.cone_angle / np.pi))


@dataclass(frozen=True)
class Violation:
    invariant: str
    location: str
    message: str


@dataclass
class ValidationReport:
    """
    Every violated surface invariant, with its location.
    NOTE: An empty report means the surface is valid.

    """

    violations: list = field(default_factory=list)

    def add(self, invariant, location, message):
        self.violations.append(Violation(invariant, location, message))

    @property
    def ok(self):
        return len(self.violations) == 0

    def invariants(self):
        return {violation.invariant for violation in self.violations}

    def __len__(self):
        return len(self.violations)

    def to_dict(self):
        return {
            "ok": self.ok,
            "violations": [
                {"invariant": v.invariant, "location": v.location, "message": v.message} for v in self.violations
            ],
        }


class FlatSurface:
    """
    A triangulated half-translation surface.
    NOTE: Surfaces are immutable; flowing or rotating one builds a new surface.

    """

    def __init__(self, triangles, gluings, marked=(), landmarks=None):
        if len(triangles) == 0:
            raise ConstructionError("A surface needs at least one triangle")

        self.triangles = tuple(tuple(PlanarVector(float(w.h), float(w.v)) for w in tri) for tri in triangles)
        for t, tri in enumerate(self.triangles):
            if len(tri) != 3:
                raise ConstructionError(f"Triangle {t} has {len(tri)} edges, expected 3")

        # Complete the gluing with its inverse
        self.gluings = {}
        for slot, (other, sign) in gluings.items():
            slot = (int(slot[0]), int(slot[1]))
            other = (int(other[0]), int(other[1]))
            self.gluings[slot] = (other, int(sign))
            self.gluings.setdefault(other, (slot, int(sign)))

        self.landmarks = dict(landmarks) if landmarks else {}

        # Numpy copies of the geometry for the tracing code
        self._edges = np.array([[w.as_array() for w in tri] for tri in self.triangles])
        self._corners = np.zeros((len(self.triangles), 3, 2))
        self._corners[:, 1] = self._edges[:, 0]
        self._corners[:, 2] = self._edges[:, 0] + self._edges[:, 1]

        self._build_vertices()

        self.marked = frozenset(int(v) for v in marked)
        for v in self.marked:
            if not 0 <= v < self.num_vertices():
                raise ConstructionError(f"Marked vertex {v} does not exist (surface has {self.num_vertices()})")

    # ---- combinatorics -------------------------------------------------------------------

    def _build_vertices(self):
        """
        Groups corners into vertices and orders each vertex's corners counterclockwise.
        NOTE: Broken gluings never raise here; validate() reports them.

        """
        corners = [(t, i) for t in range(len(self.triangles)) for i in range(3)]
        parent = {corner: corner for corner in corners}

        def find(corner):
            while parent[corner] != corner:
                parent[corner] = parent[parent[corner]]
                corner = parent[corner]
            return corner

        def union(c1, c2):
            r1, r2 = find(c1), find(c2)
            if r1 != r2:
                parent[max(r1, r2)] = min(r1, r2)

        # Corner e of t meets corner e' + 1 of t', and corner e + 1 meets corner e'
        for (t, e), ((t2, e2), _) in self.gluings.items():
            if (t2, e2) not in parent or (t, e) not in parent:
                continue
            union((t, e), (t2, (e2 + 1) % 3))
            union((t, (e + 1) % 3), (t2, e2))

        # Number the vertices by their smallest corner
        roots = sorted({find(corner) for corner in corners})
        vertex_of_root = {root: k for k, root in enumerate(roots)}
        self._corner_vertex = {corner: vertex_of_root[find(corner)] for corner in corners}

        self._vertex_corners = []
        self._corner_offset = {}
        self._cone_angles = []
        self._walk_closed = []

        for root in roots:
            members = {corner for corner in corners if find(corner) == root}

            # Walk counterclockwise around the vertex starting at its smallest corner
            ordered = []
            offsets = []
            total = 0.0
            current = root
            closed = False
            for _ in range(len(members) + 1):
                ordered.append(current)
                offsets.append(total)
                total += self.corner_angle(*current)

                nxt = self.next_corner_ccw(*current)
                if nxt is None:
                    break
                if nxt == root:
                    closed = True
                    break
                current = nxt

            if not closed or len(ordered) != len(members):
                # Fall back to the unordered corner set so the angle sum stays meaningful
                ordered = sorted(members)
                offsets = list(np.cumsum([0.0] + [self.corner_angle(*c) for c in ordered[:-1]]))
                total = sum(self.corner_angle(*c) for c in ordered)

            for corner, offset in zip(ordered, offsets):
                self._corner_offset[corner] = float(offset)

            self._vertex_corners.append(tuple(ordered))
            self._cone_angles.append(float(total))
            self._walk_closed.append(closed and len(ordered) == len(members))

    def next_corner_ccw(self, t, i):
        """
        Returns the corner that follows (t, i) counterclockwise around its vertex.
        NOTE: It is the partner slot of edge i - 1 of t.

        """
        glued = self.gluings.get((t, (i - 1) % 3))
        if glued is None:
            return None

        return glued[0]

    def partner(self, t, e):
        """
        Returns ((t', e'), sign) for the edge slot (t, e).

        """
        try:
            return self.gluings[(t, e)]
        except KeyError as error:
            raise StructuralError(f"Edge slot {(t, e)} is not glued") from error

    # ---- geometry ------------------------------------------------------------------------

    def num_triangles(self):
        return len(self.triangles)

    def num_vertices(self):
        return len(self._vertex_corners)

    def edge(self, t, e):
        return self._edges[t, e % 3]

    def corner_position(self, t, i):
        return self._corners[t, i % 3]

    def triangle_corners(self, t):
        return self._corners[t]

    def triangle_edges(self, t):
        return self._edges[t]

    def corner_angle(self, t, i):
        """
        Returns the interior angle of triangle t at corner i.

        """
        outgoing = self._edges[t, i]
        incoming = -self._edges[t, (i - 1) % 3]

        return float(np.arctan2(abs(cross(outgoing, incoming)), outgoing @ incoming))

    def triangle_area(self, t):
        return 0.5 * abs(cross(self._edges[t, 0], self._edges[t, 1]))

    def area(self):
        return float(sum(self.triangle_area(t) for t in range(self.num_triangles())))

    def vertex_of(self, t, i):
        return self._corner_vertex[(t, i % 3)]

    def vertex_corners(self, v):
        return self._vertex_corners[v]

    def corner_offset(self, t, i):
        return self._corner_offset[(t, i % 3)]

    def cone_angle(self, v):
        return self._cone_angles[v]

    def singular_points(self):
        return [SingularPoint(v, self._cone_angles[v], v in self.marked) for v in range(self.num_vertices())]

    def euler_characteristic(self):
        faces = self.num_triangles()
        edges = (3 * faces) // 2

        return self.num_vertices() - edges + faces

    def genus(self):
        return (2 - self.euler_characteristic()) // 2

    def min_edge_length(self):
        return float(np.min(np.hypot(self._edges[..., 0], self._edges[..., 1])))

    def angle_of(self, t, i, direction):
        """
        Returns the absolute angle at the vertex of corner (t, i) of a direction given in
        the frame of triangle t.
        NOTE: The direction is measured from the corner's outgoing edge, so it should lie in
        or next to the corner's wedge.

        """
        v = self.vertex_of(t, i)
        offset = self.corner_offset(t, i)

        return wrap_angle(offset + signed_angle(self._edges[t, i], direction), self.cone_angle(v))

    def direction_at(self, v, angle):
        """
        Returns (t, i, u) where (t, i) is the corner of vertex v whose wedge holds the
        absolute angle and u is the unit direction in the frame of triangle t.

        """
        corners = self._vertex_corners[v]
        offsets = [self._corner_offset[c] for c in corners]
        angle = wrap_angle(angle, self.cone_angle(v))

        k = max(bisect.bisect_right(offsets, angle) - 1, 0)
        t, i = corners[k]

        return t, i, rotate(unit(self._edges[t, i]), angle - offsets[k])

    # ---- derived surfaces ----------------------------------------------------------------

    def with_triangles(self, triangles):
        """
        Returns a surface with the same gluing, markings and landmarks but new holonomies.

        """
        return FlatSurface(triangles, self.gluings, self.marked, self.landmarks)

    def __repr__(self):
        return (
            f"FlatSurface({self.num_triangles()} triangles, {self.num_vertices()} vertices, "
            f"genus {self.genus()}, area {self.area():.6g})"
        )

    # ---- serialisation -------------------------------------------------------------------

    def to_dict(self):
        """
        Returns the surface in the teichscan-surface/1 schema.

        """
        pairs = []
        for slot, (other, sign) in sorted(self.gluings.items()):
            if slot <= other:
                pairs.append([list(slot), list(other), sign])

        payload = {
            "schema": SURFACE_SCHEMA,
            "triangles": [[{"h": w.h, "v": w.v} for w in tri] for tri in self.triangles],
            "gluings": pairs,
            "marked": sorted(self.marked),
        }
        if self.landmarks:
            payload["landmarks"] = self.landmarks

        return payload

    @classmethod
    def from_dict(cls, payload):
        """
        Builds a surface from the teichscan-surface/1 schema.

        """
        if payload.get("schema") != SURFACE_SCHEMA:
            raise ConstructionError(f"Expected schema {SURFACE_SCHEMA!r}, got {payload.get('schema')!r}")

        try:
            triangles = [[PlanarVector(float(w["h"]), float(w["v"])) for w in tri] for tri in payload["triangles"]]
            gluings = {}
            for first, second, sign in payload["gluings"]:
                gluings[tuple(first)] = (tuple(second), int(sign))
        except (KeyError, TypeError, ValueError) as error:
            raise ConstructionError(f"Malformed surface payload: {error}") from error

        return cls(triangles, gluings, payload.get("marked", ()), payload.get("landmarks"))


# ---- validation --------------------------------------------------------------------------


def validate(surface, closure_tol=DEFAULTS.closure_tol, angle_tol=DEFAULTS.angle_tol):
    """
    Checks every FlatSurface invariant and reports each violation with its location.

    """
    report = ValidationReport()

    for t, tri in enumerate(surface.triangles):
        edges = surface.triangle_edges(t)
        scale = max(norm(w) for w in edges)

        for e, w in enumerate(tri):
            if w.is_zero():
                report.add("nonzero-holonomy", f"slot ({t}, {e})", "Edge holonomy is the zero vector")

        # Triangle closure
        residual = norm(edges.sum(axis=0))
        if residual > closure_tol * max(scale, 1e-300):
            report.add(
                "triangle-closure",
                f"triangle {t}",
                f"Edge holonomies sum to a vector of length {residual:.3e} (relative {residual / scale:.3e})",
            )

        # Counterclockwise orientation
        if cross(edges[0], edges[1]) <= 0:
            report.add("orientation", f"triangle {t}", "Edges are not counterclockwise (non-positive area)")

    # Gluing is a fixed-point-free involution with matching holonomies
    for t in range(surface.num_triangles()):
        for e in range(3):
            slot = (t, e)
            if slot not in surface.gluings:
                report.add("gluing-involution", f"slot {slot}", "Edge slot is not glued")
                continue

            other, sign = surface.gluings[slot]
            if other == slot:
                report.add("gluing-involution", f"slot {slot}", "Edge slot is glued to itself")
                continue
            if not (0 <= other[0] < surface.num_triangles() and 0 <= other[1] < 3):
                report.add("gluing-involution", f"slot {slot}", f"Partner {other} does not exist")
                continue
            if surface.gluings.get(other, (None, None))[0] != slot:
                report.add("gluing-involution", f"slot {slot}", f"Partner {other} is not glued back")
                continue
            if surface.gluings[other][1] != sign:
                report.add("gluing-sign", f"slot {slot}", f"Sign differs from partner {other}")
            if sign not in (-1, 1):
                report.add("gluing-sign", f"slot {slot}", f"Sign must be +1 or -1, got {sign}")
                continue

            w = surface.edge(*slot)
            w2 = surface.edge(*other)
            scale = max(norm(w), norm(w2), 1e-300)
            if norm(w2 - sign * w) > 1e3 * closure_tol * scale:
                report.add(
                    "gluing-holonomy",
                    f"slot {slot}",
                    f"Partner {other} holonomy is not {sign:+d} times this edge",
                )

    # Cone angles
    for v in range(surface.num_vertices()):
        theta = surface.cone_angle(v)
        k = theta / np.pi
        if abs(k - round(k)) > angle_tol * max(1.0, round(k)):
            report.add("cone-angle", f"vertex {v}", f"Cone angle {theta:.12g} is not a multiple of pi")
        elif round(k) < 1:
            report.add("cone-angle", f"vertex {v}", "Cone angle below pi")
        elif round(k) == 1 and v not in surface.marked:
            report.add("cone-angle", f"vertex {v}", "Cone angle pi is only allowed at marked points")

        if not surface._walk_closed[v]:
            report.add("vertex-link", f"vertex {v}", "Corners around the vertex do not close up")

    # Gauss-Bonnet
    curvature = sum(2 * np.pi - surface.cone_angle(v) for v in range(surface.num_vertices()))
    expected = 2 * np.pi * surface.euler_characteristic()
    if abs(curvature - expected) > angle_tol * max(1.0, surface.num_vertices()) * 2 * np.pi:
        report.add(
            "gauss-bonnet",
            "surface",
            f"Angle defects sum to {curvature:.12g}, expected 2 pi chi = {expected:.12g}",
        )

    if report.ok:
        logger.debug("Surface %r is valid", surface)
    else:
        logger.debug("Surface %r has %s violations", surface, len(report))

    return report


# ---- builders ----------------------------------------------------------------------------

# Slot of each side of rectangle r: lower triangle 2r, upper triangle 2r + 1
RECT_SIDES = {"bottom": (0, 0), "right": (0, 1), "top": (1, 1), "left": (1, 2)}


def _rectangle_surface(rects, sides, marked_points=(), landmarks=None):
    """
    Builds a surface from axis-parallel rectangles glued along whole sides.
    Each rectangle is split along its diagonal into a lower and an upper triangle.

    rects: list of (width, height)
    sides: list of ((rect, side), (rect, side), sign)
    marked_points: list of (rect, corner) pairs whose vertices are marked

    """
    triangles = []
    gluings = {}

    for r, (w, h) in enumerate(rects):
        triangles.append([PlanarVector(w, 0.0), PlanarVector(0.0, h), PlanarVector(-w, -h)])
        triangles.append([PlanarVector(w, h), PlanarVector(-w, 0.0), PlanarVector(0.0, -h)])

        # Diagonal
        gluings[(2 * r, 2)] = ((2 * r + 1, 0), -1)

    for (r1, side1), (r2, side2), sign in sides:
        dt1, e1 = RECT_SIDES[side1]
        dt2, e2 = RECT_SIDES[side2]
        gluings[(2 * r1 + dt1, e1)] = ((2 * r2 + dt2, e2), sign)

    surface = FlatSurface(triangles, gluings)

    if marked_points or landmarks:
        marked = {surface.vertex_of(2 * r, corner) for r, corner in marked_points}
        surface = FlatSurface(triangles, gluings, marked, landmarks)

    return surface


def build_flat_torus(width, height):
    """
    Returns the width x height rectangular torus as two triangles.

    """
    if not (width > 0 and height > 0):
        raise ConstructionError(f"Torus dimensions must be positive, got {width} x {height}")

    surface = _rectangle_surface(
        [(float(width), float(height))],
        [((0, "right"), (0, "left"), -1), ((0, "top"), (0, "bottom"), -1)],
    )
    logger.debug("Built torus %s x %s", width, height)

    return surface


def perm_from_cycles(n, cycles):
    """
    Returns the 0-based image list of a permutation of n squares given 1-based cycles.

    """
    images = list(range(n))
    for cycle in cycles:
        for k, item in enumerate(cycle):
            images[item - 1] = cycle[(k + 1) % len(cycle)] - 1

    return images


def _is_transitive(horiz, vert):
    n = len(horiz)
    seen = {0}
    queue = deque([0])

    while queue:
        i = queue.popleft()
        for j in (horiz[i], vert[i], horiz.index(i), vert.index(i)):
            if j not in seen:
                seen.add(j)
                queue.append(j)

    return len(seen) == n


def build_square_tiled(horiz_perm: Sequence[int], vert_perm: Sequence[int]):
    """
    Returns the square-tiled surface where square i's right side meets square
    horiz_perm[i]'s left side and its top meets vert_perm[i]'s bottom.
    NOTE: Permutations are 0-based image lists.

    """
    horiz = [int(i) for i in horiz_perm]
    vert = [int(i) for i in vert_perm]
    n = len(horiz)

    if n < 1 or len(vert) != n:
        raise ConstructionError(f"Permutations must act on the same n >= 1 squares, got {len(horiz)} and {len(vert)}")
    if sorted(horiz) != list(range(n)) or sorted(vert) != list(range(n)):
        raise ConstructionError("Square gluings must be permutations of range(n)")
    if not _is_transitive(horiz, vert):
        raise ConstructionError("Permutations do not act transitively: the surface would be disconnected")

    sides = []
    for i in range(n):
        sides.append(((i, "right"), (horiz[i], "left"), -1))
        sides.append(((i, "top"), (vert[i], "bottom"), -1))

    surface = _rectangle_surface([(1.0, 1.0)] * n, sides)
    logger.debug("Built square-tiled surface with %s squares and %s vertices", n, surface.num_vertices())

    return surface


def build_slit_tori(a):
    """
    Returns two [0, a] x [0, 1/a] tori, each slit along a horizontal segment of length a/2,
    joined by the cylinder [0, a] x [0, a] glued along the slits.

    The slit of each torus runs along its bottom side from x = 0 to x = a/2, so the four
    slit endpoints are the only vertices (cone angle 3 pi each). Landmarks record the core
    curve of the joining cylinder as a chain along its lower boundary, the slit endpoints
    and the triangles of the cylinder.

    """
    if not 0 < a < 0.5:
        raise ConstructionError(f"Slit tori need 0 < a < 1/2, got {a}")

    a = float(a)
    half = a / 2
    tall = 1 / a

    rects = [
        (half, tall),  # 0: first torus, left half
        (half, tall),  # 1: first torus, right half
        (half, a),  # 2: cylinder, left half
        (half, a),  # 3: cylinder, right half
        (half, tall),  # 4: second torus, left half
        (half, tall),  # 5: second torus, right half
    ]

    sides = [
        # First torus away from the slit
        ((0, "right"), (1, "left"), -1),
        ((1, "right"), (0, "left"), -1),
        ((1, "bottom"), (1, "top"), -1),
        # First slit: its lower side meets the cylinder by a translation, its upper side by a flip
        ((0, "top"), (2, "bottom"), -1),
        ((0, "bottom"), (3, "bottom"), 1),
        # Cylinder
        ((2, "right"), (3, "left"), -1),
        ((3, "right"), (2, "left"), -1),
        # Second slit
        ((2, "top"), (4, "bottom"), -1),
        ((3, "top"), (4, "top"), 1),
        # Second torus away from the slit
        ((4, "right"), (5, "left"), -1),
        ((5, "right"), (4, "left"), -1),
        ((5, "bottom"), (5, "top"), -1),
    ]

    # Slit endpoints: lower-left and lower-right corners of the slit halves
    endpoints = [(0, 0), (0, 1), (4, 0), (4, 1)]

    landmarks = {
        # Lower boundary of the cylinder, traversed to the right with the cylinder on its left.
        # Each entry is an edge slot (tri, edge) followed from its first corner.
        "alpha": [[4, 0], [6, 0]],
        "cylinder_triangles": [4, 5, 6, 7],
    }

    surface = _rectangle_surface(rects, sides, endpoints, landmarks)
    slit_vertices = sorted({surface.vertex_of(2 * r, corner) for r, corner in endpoints})
    landmarks["slit_endpoints"] = slit_vertices

    surface = FlatSurface(surface.triangles, surface.gluings, surface.marked, landmarks)
    logger.debug("Built slit tori with a = %s: %r", a, surface)

    return surface


def surface_from_source(source):
    """
    Builds the surface named by a config.SurfaceSource.

    """
    from .artifacts import load_surface

    if source.kind == "torus":
        return build_flat_torus(source.width, source.height)
    if source.kind == "slit-tori":
        return build_slit_tori(source.a)
    if source.kind == "square-tiled":
        return build_square_tiled(source.horiz, source.vert)

    return load_surface(source.path)
