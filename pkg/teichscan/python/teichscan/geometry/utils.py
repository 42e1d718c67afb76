import numpy as np

# Relative tolerance used by the planar predicates
EPS = 1e-9


def vec(h, v):
    """
    Returns a vector in R2 as a float numpy array.

    """

    return np.array([h, v], dtype=float)


def dist(vec1, vec2):
    """
    Returns the distance between two vectors in R2.

    """

    return float(np.hypot(vec2[0] - vec1[0], vec2[1] - vec1[1]))


def norm(vec1):
    return float(np.hypot(vec1[0], vec1[1]))


def dot(vec1, vec2):
    """
    Returns the dot product of two vectors in R2.

    """

    return vec1[0] * vec2[0] + vec1[1] * vec2[1]


def cross(vec1, vec2):
    """
    Returns the signed cross product of two vectors in R2.
    NOTE: Positive when vec2 is counterclockwise from vec1.

    """

    return vec1[0] * vec2[1] - vec1[1] * vec2[0]


def wrap_angle(angle, period=2 * np.pi):
    """
    Converts an angle to the range [0, period).

    """

    wrapped = angle % period

    # Float modulo can land exactly on the period
    if wrapped >= period:
        wrapped -= period

    return wrapped


def ccw_angle(vec1, vec2):
    """
    Returns the counterclockwise angle from vec1 to vec2 in [0, 2pi).

    """

    return wrap_angle(np.arctan2(cross(vec1, vec2), dot(vec1, vec2)))


def signed_angle(vec1, vec2):
    """
    Returns the signed angle from vec1 to vec2 in (-pi, pi].

    """

    return float(np.arctan2(cross(vec1, vec2), dot(vec1, vec2)))


def rotate(vec1, theta):
    """
    Returns vec1 rotated counterclockwise by theta.

    """

    c, s = np.cos(theta), np.sin(theta)

    return np.array([c * vec1[0] - s * vec1[1], s * vec1[0] + c * vec1[1]])


def unit(vec1):
    return np.asarray(vec1, dtype=float) / norm(vec1)


def segment_intersection(p0, p1, q0, q1):
    """
    Returns the parameters (s, u) where p0 + s (p1 - p0) meets q0 + u (q1 - q0).
    NOTE: Returns None for parallel segments or when either parameter leaves [0, 1].

    """
    d1 = p1 - p0
    d2 = q1 - q0

    denom = cross(d1, d2)
    scale = norm(d1) * norm(d2)

    # Parallel or degenerate
    if scale == 0 or abs(denom) <= EPS * scale:
        return None

    diff = q0 - p0
    s = cross(diff, d2) / denom
    u = cross(diff, d1) / denom

    if -EPS <= s <= 1 + EPS and -EPS <= u <= 1 + EPS:
        return min(max(s, 0.0), 1.0), min(max(u, 0.0), 1.0)

    return None


def point_segment_distance(point, a, b):
    """
    Returns the distance from a point to the segment from a to b.

    """
    ab = b - a
    length_sq = dot(ab, ab)

    if length_sq == 0:
        return dist(point, a)

    s = min(max(dot(point - a, ab) / length_sq, 0.0), 1.0)

    return dist(point, a + s * ab)


def side_of_line(point, a, b):
    """
    Returns the signed area test of point against the line from a to b.
    NOTE: Positive on the left of a -> b.

    """

    return cross(b - a, point - a)
