"""Directions mod pi and projective points/lines with the spherical quotient metric.

Planar directions live on the circle of angles mod pi.  The projective plane
is modeled as the unit sphere in R^3 with antipodes identified: finite points
embed as (x, y, 1)/|.|, directions embed as (cos a, sin a, 0).  Distances are
angles between lines through the origin, which keeps every formula free of
branch cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PI = math.pi
HALF_PI = math.pi / 2.0

# Tolerance for "point lies on line" tests in the unit-vector inner product.
ON_LINE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Directions (angles mod pi)
# ---------------------------------------------------------------------------

def wrap_direction(angle):
    """Reduce an angle (scalar or array) to the canonical range [0, pi)."""
    return np.mod(angle, PI)


def dir_distance(a, b):
    """Distance between two directions: min(|a-b|, pi-|a-b|), in [0, pi/2].

    Works elementwise on arrays.
    """
    d = np.abs(wrap_direction(a) - wrap_direction(b))
    return np.minimum(d, PI - d)


def direction_of_vector(v) -> float:
    """Direction in [0, pi) of a nonzero planar vector."""
    v = np.asarray(v, dtype=float)
    if not np.any(v != 0.0):
        raise ValueError("zero vector has no direction")
    return float(wrap_direction(math.atan2(v[1], v[0])))


@dataclass(frozen=True)
class DirInterval:
    """Connected subset of the directions mod pi, stored as (anchor, halfwidth).

    ``halfwidth >= pi/2`` means the whole circle of directions; negative
    halfwidth means the empty interval.  The anchor/halfwidth form avoids
    branch-cut bookkeeping when intervals are grown across the wrap point.
    """

    anchor: float = 0.0
    halfwidth: float = -1.0

    @staticmethod
    def empty() -> "DirInterval":
        return DirInterval(0.0, -1.0)

    @staticmethod
    def full() -> "DirInterval":
        return DirInterval(0.0, HALF_PI)

    @staticmethod
    def bracket(a: float, b: float) -> "DirInterval":
        """Shorter closed interval with endpoints a and b (length < pi/2)."""
        a = float(wrap_direction(a))
        gap = float(dir_distance(a, b))
        if gap >= HALF_PI - 1e-12:
            raise ValueError("bracket endpoints must be less than pi/2 apart")
        # Lift b next to a, then take the midpoint.
        db = wrap_direction(b - a)
        off = db if db <= HALF_PI else db - PI
        return DirInterval(float(wrap_direction(a + off / 2.0)), abs(off) / 2.0)

    @property
    def is_empty(self) -> bool:
        return self.halfwidth < 0.0

    @property
    def is_full(self) -> bool:
        return self.halfwidth >= HALF_PI - 1e-15

    @property
    def length(self) -> float:
        if self.is_empty:
            return 0.0
        return min(2.0 * self.halfwidth, PI)

    def contains(self, theta, tol: float = 1e-12):
        if self.is_empty:
            return np.zeros(np.shape(theta), dtype=bool) if np.ndim(theta) else False
        if self.is_full:
            return np.ones(np.shape(theta), dtype=bool) if np.ndim(theta) else True
        return dir_distance(theta, self.anchor) <= self.halfwidth + tol

    def contains_interval(self, other: "DirInterval", tol: float = 1e-12) -> bool:
        if other.is_empty:
            return True
        if self.is_full:
            return True
        if other.is_full:
            return False
        d = float(dir_distance(self.anchor, other.anchor))
        return d + other.halfwidth <= self.halfwidth + tol

    def union(self, other: "DirInterval") -> "DirInterval":
        """Union of two overlapping (or touching) intervals."""
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        if self.is_full or other.is_full:
            return DirInterval.full()
        # Lift other's span next to ours and take the hull on the line.
        d = wrap_direction(other.anchor - self.anchor)
        off = d if d <= HALF_PI else d - PI
        lo = min(-self.halfwidth, off - other.halfwidth)
        hi = max(self.halfwidth, off + other.halfwidth)
        if hi - lo >= PI:
            return DirInterval.full()
        return DirInterval(float(wrap_direction(self.anchor + (lo + hi) / 2.0)),
                           (hi - lo) / 2.0)

    def complement_center(self) -> float:
        """Midpoint of the complementary interval (the anchor's antipode).

        For a full interval any direction works; the antipode is returned for
        determinism.
        """
        return float(wrap_direction(self.anchor + HALF_PI))


# ---------------------------------------------------------------------------
# Projective points and lines
# ---------------------------------------------------------------------------

def _canonical_sign(h: np.ndarray) -> np.ndarray:
    for c in h:
        if c != 0.0:
            return h if c > 0 else -h
    raise ValueError("zero vector is not a projective element")


@dataclass(frozen=True)
class ProjPoint:
    """Point of the projective plane as a unit 3-vector up to sign."""

    h: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.asarray(self.h, dtype=float)
        n = float(np.linalg.norm(v))
        if n == 0.0 or not np.all(np.isfinite(v)):
            raise ValueError("projective point needs a nonzero finite 3-vector")
        object.__setattr__(self, "h", _canonical_sign(v / n))

    @property
    def is_infinite(self) -> bool:
        return abs(self.h[2]) < 1e-12

    def to_plane(self) -> np.ndarray:
        if self.is_infinite:
            raise ValueError("infinite point has no affine coordinates")
        return self.h[:2] / self.h[2]

    def close_to(self, other: "ProjPoint", tol: float = 1e-9) -> bool:
        return proj_distance(self, other) <= tol


@dataclass(frozen=True)
class ProjLine:
    """Line of the projective plane: unit coefficient 3-vector up to sign.

    A point p lies on the line n when <p.h, n> = 0.
    """

    n: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.asarray(self.n, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not np.all(np.isfinite(v)):
            raise ValueError("projective line needs a nonzero finite 3-vector")
        object.__setattr__(self, "n", _canonical_sign(v / norm))

    def contains(self, p: ProjPoint, tol: float = ON_LINE_TOL) -> bool:
        return abs(float(np.dot(self.n, p.h))) <= tol


LINE_AT_INFINITY = ProjLine(np.array([0.0, 0.0, 1.0]))


def proj_embed(p) -> ProjPoint:
    """Embed a finite plane point (x, y) as the projective point (x, y, 1)."""
    p = np.asarray(p, dtype=float)
    return ProjPoint(np.array([p[0], p[1], 1.0]))


def dir_to_infinite(theta: float) -> ProjPoint:
    """Infinite point of the direction theta."""
    return ProjPoint(np.array([math.cos(theta), math.sin(theta), 0.0]))


def proj_distance(a: ProjPoint, b: ProjPoint) -> float:
    """Quotient spherical distance arccos|<a, b>|, in [0, pi/2].

    Evaluated as atan2(|a x b|, |a.b|), which is stable for both tiny and
    near-maximal separations.
    """
    dot = abs(float(np.dot(a.h, b.h)))
    cross = float(np.linalg.norm(np.cross(a.h, b.h)))
    return math.atan2(cross, dot)


def proj_point_line_distance(p: ProjPoint, line: ProjLine) -> float:
    """Distance from a point to a line: arcsin|<p, n>|."""
    s = min(1.0, abs(float(np.dot(p.h, line.n))))
    return math.asin(s)


def line_through(p: ProjPoint, q: ProjPoint) -> ProjLine:
    """The unique line through two distinct projective points."""
    n = np.cross(p.h, q.h)
    if np.linalg.norm(n) < 1e-14:
        raise ValueError("points coincide; line is not determined")
    return ProjLine(n)


def line_intersection(a: ProjLine, b: ProjLine) -> ProjPoint:
    """Intersection point of two distinct lines."""
    h = np.cross(a.n, b.n)
    if np.linalg.norm(h) < 1e-12:
        raise ValueError("lines are identical; intersection is not a point")
    return ProjPoint(h)


def normal_line(x, theta: float) -> ProjLine:
    """Line through the plane point x in the direction perpendicular to theta."""
    return line_through(proj_embed(x), dir_to_infinite(theta + HALF_PI))


def line_ball_hit(line_a: ProjLine, line_b: ProjLine, c: ProjPoint,
                  eps: float) -> bool:
    """True when the two lines meet within projective distance eps of c."""
    p = line_intersection(line_a, line_b)
    return proj_distance(p, c) < eps
