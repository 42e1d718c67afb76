"""
Teichmueller geodesic flow on surfaces, curves and lengths.

Horizontal holonomies are stretched by e^t and vertical ones squeezed by e^-t, so
increasing t makes horizontal curves longer.

"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .curves import CylinderCore, Segment, SegmentChain
from .errors import FlowRangeError, PreconditionError
from .surface import PlanarVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class FlowTime:
    t: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise FlowRangeError(f"Flow time must be finite, got {self.t}")

    def __float__(self):
        return float(self.t)


def _time(t):
    return float(t.t) if isinstance(t, FlowTime) else float(t)


def _factors(t):
    try:
        stretch = math.exp(t)
        squeeze = math.exp(-t)
    except OverflowError as error:
        raise FlowRangeError(f"Flow time {t} overflows the holonomies") from error

    return stretch, squeeze


def flow_vector(h, v, t):
    stretch, squeeze = _factors(_time(t))

    return stretch * h, squeeze * v


def flow_surface(surface, t):
    """
    Returns the surface flowed for time t. Gluings, markings and landmarks are kept.

    """
    t = _time(t)
    if t == 0:
        return surface

    stretch, squeeze = _factors(t)
    triangles = []

    for tri in surface.triangles:
        flowed = []
        for w in tri:
            h, v = stretch * w.h, squeeze * w.v
            if not (math.isfinite(h) and math.isfinite(v)) or (h == 0 and v == 0):
                raise FlowRangeError(f"Flow time {t} overflows or collapses the holonomy ({w.h}, {w.v})")
            flowed.append(PlanarVector(h, v))
        triangles.append(flowed)

    logger.debug("Flowed %r for time %s", surface, t)

    return surface.with_triangles(triangles)


def flowed_length(h, v, t):
    """
    Returns the length after flowing for time t of a segment with horizontal and vertical
    lengths h and v.

    """
    if h < 0 or v < 0:
        raise PreconditionError(f"Horizontal and vertical lengths must be non-negative, got ({h}, {v})")

    stretch, squeeze = _factors(_time(t))

    return float(np.hypot(stretch * h, squeeze * v))


def make_scan(t_min, t_max, step):
    """
    Returns the inclusive grid t_min, t_min + step, ... up to t_max.

    """
    if not step > 0:
        raise PreconditionError(f"Scan step must be positive, got {step}")
    if not t_min <= t_max:
        raise PreconditionError(f"Scan needs t_min <= t_max, got {t_min} > {t_max}")

    count = int(math.floor((t_max - t_min) / step + 1e-9))

    return [FlowTime(round(t_min + k * step, 12)) for k in range(count + 1)]


def _map_chain(chain, transform):
    segments = []
    for segment in chain.segments:
        h, v = transform(segment.vector.h, segment.vector.v)
        segments.append(Segment(segment.tri, segment.start, PlanarVector(h, v)))

    return SegmentChain(tuple(segments), chain.closed)


def flow_curve(curve, t):
    """
    Carries a curve to the flowed surface. Barycentric anchors are unchanged.
    NOTE: The image of a geodesic need not be geodesic; tighten it again.

    """
    t = _time(t)
    if t == 0:
        return curve

    chain = curve.geometry.chain() if isinstance(curve.geometry, CylinderCore) else curve.geometry

    return replace(curve, geometry=_map_chain(chain, lambda h, v: flow_vector(h, v, t)))


def _quarter(h, v):
    return -v, h


def rotate_quarter(surface):
    """
    Returns the surface rotated counterclockwise by pi/2, exchanging the roles of the
    horizontal and vertical directions.

    """
    return surface.with_triangles([[PlanarVector(*_quarter(w.h, w.v)) for w in tri] for tri in surface.triangles])


def rotate_curve(curve):
    chain = curve.geometry.chain() if isinstance(curve.geometry, CylinderCore) else curve.geometry

    return replace(curve, geometry=_map_chain(chain, _quarter))
