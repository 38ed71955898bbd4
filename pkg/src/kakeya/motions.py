"""Rigid-motion calculus on (w, phi) coordinates.

A rotation around the plane point z by angle phi acts as u -> e^{i phi}(u-z)+z
and is recorded by the pair (w, phi) with w = z*phi; a translation by v is the
pair (i*v, 0).  The displacement of the origin is v = z(1 - e^{i phi}), and
composition is computed through v, where it has exact closed forms.  Angles
are never reduced mod 2*pi: a full turn is the identity map but not the
identity movement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import ProjPoint, dir_to_infinite, proj_embed, wrap_direction

_PHI_TINY = 1e-12


def _one_minus_exp_over_phi(phi: float) -> complex:
    """(1 - e^{i phi}) / phi, series-stabilized near phi = 0."""
    if abs(phi) > 1e-6:
        return (1.0 - cmath.exp(1j * phi)) / phi
    # -i - phi/2 + i phi^2/6 + phi^3/24 ...
    return complex(-phi / 2.0 + phi**3 / 24.0, -1.0 + phi**2 / 6.0)


def _phi_over_one_minus_exp(phi: float) -> complex:
    """phi / (1 - e^{i phi}) for phi away from nonzero multiples of 2 pi."""
    q = _one_minus_exp_over_phi(phi)
    return 1.0 / q


@dataclass(frozen=True)
class Rot:
    """Rotation or translation in (w, phi) coordinates.

    ``w`` is stored as a complex number.  The pair (0, 0) is the distinguished
    identity element; every other (w, phi) is a genuine motion.
    """

    w: complex
    phi: float

    @property
    def is_identity(self) -> bool:
        return self.w == 0 and self.phi == 0.0

    @property
    def is_translation(self) -> bool:
        return self.phi == 0.0 and not self.is_identity

    @property
    def v(self) -> complex:
        """Displacement of the origin under the motion."""
        if self.phi == 0.0:
            return -1j * self.w
        return self.w * _one_minus_exp_over_phi(self.phi)

    @property
    def z(self) -> complex:
        """Rotation centre; only defined for phi != 0."""
        if self.phi == 0.0:
            raise ValueError("translations have no finite centre")
        return self.w / self.phi

    def coords(self) -> np.ndarray:
        """The point (w.x, w.y, phi) of R^3."""
        return np.array([self.w.real, self.w.imag, self.phi])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords()))

    def scaled(self, factor: float) -> "Rot":
        """Coordinatewise scaling: same centre, angle multiplied by factor."""
        return Rot(self.w * factor, self.phi * factor)

    def inverse(self) -> "Rot":
        if self.is_identity:
            return self
        if self.phi == 0.0:
            return Rot(-self.w, 0.0)
        return Rot(-self.w, -self.phi)

    def as_isometry(self) -> "Isometry":
        return Isometry(self.phi, self.v)


IDENTITY_ROT = Rot(0j, 0.0)


def rot_from_coords(c) -> Rot:
    c = np.asarray(c, dtype=float)
    return Rot(complex(c[0], c[1]), float(c[2]))


def rot_from_center(z, phi: float) -> Rot:
    """Rotation by phi around the plane point z."""
    if phi == 0.0:
        raise ValueError("use rot_translation for zero angle")
    zc = complex(z[0], z[1]) if not isinstance(z, complex) else z
    return Rot(zc * phi, phi)


def rot_translation(v) -> Rot:
    """Translation by the plane vector v."""
    vc = complex(v[0], v[1]) if not isinstance(v, complex) else v
    return Rot(1j * vc, 0.0)


def rot_from_v(v: complex, phi: float, tol: float = _PHI_TINY) -> Rot:
    """Motion with origin displacement v and angle phi."""
    if abs(phi) < tol:
        if abs(v) == 0.0:
            return IDENTITY_ROT
        return Rot(1j * v, 0.0)
    denom = 1.0 - cmath.exp(1j * phi)
    if abs(denom) < 1e-9 * max(1.0, abs(phi)):
        # phi is a nonzero multiple of 2 pi: only v = 0 is representable.
        if abs(v) < 1e-9:
            return Rot(0j, phi)
        raise ValueError("full-turn composition with nonzero displacement "
                         "is not representable in (w, phi) coordinates")
    return Rot(v * _phi_over_one_minus_exp(phi), phi)


def projective_center(x: Rot) -> ProjPoint:
    """Class of (w, phi) in the projective plane."""
    if x.is_identity:
        raise ValueError("identity has no projective centre")
    return ProjPoint(x.coords())


def star(x1: Rot, x2: Rot) -> Rot:
    """Composition law: map(x1 * x2) = map(x1) o map(x2)."""
    if x1.is_identity:
        return x2
    if x2.is_identity:
        return x1
    phi3 = x1.phi + x2.phi
    v3 = x1.v + cmath.exp(1j * x1.phi) * x2.v
    return rot_from_v(v3, phi3)


def star_solve_right(x3: Rot, x1: Rot) -> Rot:
    """The unique x2 with x1 * x2 = x3."""
    phi2 = x3.phi - x1.phi
    v2 = cmath.exp(-1j * x1.phi) * (x3.v - x1.v)
    return rot_from_v(v2, phi2)


def star_fold(rots) -> Rot:
    acc = IDENTITY_ROT
    for r in rots:
        acc = star(acc, r)
    return acc


def star_linearity_gap(x1: Rot, x2: Rot):
    """How far the composition is from coordinatewise addition.

    Returns (lhs, rhs) with lhs = |w1 + w2 - w3| for x3 = x1 * x2 and rhs the
    four-term majorant |w2 phi1| + |w1 phi1| + |w2 phi2| + |w3 phi3|.
    """
    x3 = star(x1, x2)
    lhs = abs(x1.w + x2.w - x3.w)
    rhs = (abs(x2.w) * abs(x1.phi) + abs(x1.w) * abs(x1.phi)
           + abs(x2.w) * abs(x2.phi) + abs(x3.w) * abs(x3.phi))
    return lhs, rhs


def zigzag_split(x: Rot, x0: Rot, n: int):
    """Divide x into n interleaved copies of a two-motion pattern.

    With x = x0 + x1 coordinatewise, returns (y0, y1, drift) where
    y0 = x0 / n, y1 solves y0 * y1 = x / n, and drift = |n*y1 - x1| measures
    how far the realized second part sits from the prescribed x1.
    """
    if n < 1:
        raise ValueError("fineness must be at least 1")
    c1 = x.coords() - x0.coords()
    if np.linalg.norm(c1) == 0.0:
        raise ValueError("degenerate split: x equals x0")
    if x.is_identity or x0.is_identity:
        raise ValueError("split needs nonzero x and x0")
    y0 = x0.scaled(1.0 / n)
    y1 = star_solve_right(x.scaled(1.0 / n), y0)
    drift = float(np.linalg.norm(y1.scaled(float(n)).coords() - c1))
    return y0, y1, drift


# ---------------------------------------------------------------------------
# Global isometries and realized paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry u -> e^{i phi} u + v."""

    phi: float
    v: complex

    def apply(self, pts):
        """Apply to complex scalars or (n, 2) arrays."""
        if isinstance(pts, (complex, float, int)):
            return cmath.exp(1j * self.phi) * pts + self.v
        pts = np.asarray(pts, dtype=float)
        c, s = math.cos(self.phi), math.sin(self.phi)
        out = pts @ np.array([[c, s], [-s, c]])
        out[:, 0] += self.v.real
        out[:, 1] += self.v.imag
        return out

    def compose(self, other: "Isometry") -> "Isometry":
        """self o other."""
        return Isometry(self.phi + other.phi,
                        self.v + cmath.exp(1j * self.phi) * other.v)


IDENTITY_ISO = Isometry(0.0, 0j)


def rot_to_isometry(x: Rot) -> Isometry:
    return Isometry(x.phi, x.v)


@dataclass
class MotionSegment:
    """One straight piece of a path of isometries.

    The continuous motion runs from ``start`` to ``start o map(generator)``;
    ``samples`` discretizes it densely enough for the raster oracle.
    """

    start: Isometry
    generator: Rot
    samples: list

    @property
    def end(self) -> Isometry:
        return self.samples[-1]


def _motion_extent(g: Rot, radius: float) -> float:
    """Upper bound on how far any point within ``radius`` moves under g."""
    if g.is_identity:
        return 0.0
    if g.phi == 0.0:
        return abs(g.v)
    return abs(g.phi) * (radius + abs(g.z)) if abs(g.z) < 1e12 else abs(g.v)


def realize_path(intrinsic, scene_radius: float = 1.0,
                 step: float = math.inf, start: Isometry = IDENTITY_ISO):
    """Realize intrinsic motions as a polygonal path of global isometries.

    ``intrinsic`` yields (Rot, multiplicity) pairs; each motion is applied in
    the frame reached so far, i.e. the global isometry is right-composed.
    ``step`` bounds how far any scene point (within ``scene_radius``) may move
    between consecutive samples.
    """
    g = start
    segments = []
    for rot, mult in intrinsic:
        for _ in range(int(mult)):
            extent = _motion_extent(rot, scene_radius)
            n = 1 if not math.isfinite(step) else max(1, int(math.ceil(extent / step)))
            samples = [g]
            for k in range(1, n + 1):
                samples.append(g.compose(rot_to_isometry(rot.scaled(k / n))))
            segments.append(MotionSegment(g, rot, samples))
            g = samples[-1]
    return segments


def path_endpoint(segments) -> Isometry:
    return segments[-1].end if segments else IDENTITY_ISO


def probe_orbit_distance(a: Isometry, b: Isometry, probes) -> float:
    """Sup distance between two isometries over a set of probe points."""
    pa = a.apply(np.asarray(probes, dtype=float))
    pb = b.apply(np.asarray(probes, dtype=float))
    return float(np.max(np.hypot(*(pa - pb).T)))
