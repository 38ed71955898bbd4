"""Polyline scenes: finite unions of polylines with exact per-segment tangents.

A scene stores its polylines as float vertex arrays.  Every derived quantity
(segment directions, lengths, slab decompositions, arc-length samplings) is
computed from those vertices, so the tangent field is exact per segment and
vertices inherit the tangent of the lower-indexed segment.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .geometry import (
    HALF_PI,
    PI,
    ProjLine,
    ProjPoint,
    dir_distance,
    dir_to_infinite,
    line_intersection,
    normal_line,
    proj_distance,
    wrap_direction,
)


class Scene:
    """Finite union of positive-length polyline segments."""

    def __init__(self, polylines: Sequence[np.ndarray], closed=None):
        pls = []
        for pl in polylines:
            arr = np.asarray(pl, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
                raise ValueError("each polyline needs shape (n >= 2, 2)")
            if not np.all(np.isfinite(arr)):
                raise ValueError("polyline vertices must be finite")
            pls.append(arr)
        if not pls:
            raise ValueError("scene needs at least one polyline")
        if closed is None:
            closed = [False] * len(pls)
        closed = [bool(c) for c in closed]
        if len(closed) != len(pls):
            raise ValueError("closed flags must match polylines")
        for i, c in enumerate(closed):
            if c and not np.allclose(pls[i][0], pls[i][-1]):
                pls[i] = np.vstack([pls[i], pls[i][0]])
        self.polylines = pls
        self.closed = closed

        starts = np.vstack([pl[:-1] for pl in pls])
        ends = np.vstack([pl[1:] for pl in pls])
        vec = ends - starts
        lengths = np.hypot(vec[:, 0], vec[:, 1])
        keep = lengths > 0.0
        if not np.all(keep):
            raise ValueError("zero-length segment in scene")
        self.seg_start = starts
        self.seg_end = ends
        self.seg_vec = vec
        self.seg_len = lengths
        self.seg_dir = wrap_direction(np.arctan2(vec[:, 1], vec[:, 0]))
        self.total_length = float(lengths.sum())
        verts = np.vstack(pls)
        self.bounding_radius = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def from_segments(starts, ends) -> "Scene":
        starts = np.asarray(starts, dtype=float)
        ends = np.asarray(ends, dtype=float)
        return Scene([np.array([s, e]) for s, e in zip(starts, ends)])

    def subscene(self, pieces: Iterable[tuple[np.ndarray, np.ndarray]]) -> "Scene | None":
        pieces = list(pieces)
        if not pieces:
            return None
        return Scene([np.array([a, b]) for a, b in pieces])

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "polylines": [pl.tolist() for pl in self.polylines],
            "closed": list(self.closed),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Scene":
        return Scene([np.asarray(pl, dtype=float) for pl in d["polylines"]],
                     d.get("closed"))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)

    @staticmethod
    def load(path) -> "Scene":
        with open(path) as f:
            return Scene.from_json_dict(json.load(f))

    # -- sampling -------------------------------------------------------------

    def sample(self, spacing: float):
        """Sample points along every segment at most ``spacing`` apart.

        Returns (points (N,2), seg_index (N,), weight (N,)) where the weights
        are the arc-length each sample represents.
        """
        pts, idx, wts = [], [], []
        for i in range(len(self.seg_len)):
            n = max(1, int(math.ceil(self.seg_len[i] / spacing)))
            t = (np.arange(n) + 0.5) / n
            pts.append(self.seg_start[i] + t[:, None] * self.seg_vec[i])
            idx.append(np.full(n, i, dtype=np.int64))
            wts.append(np.full(n, self.seg_len[i] / n))
        return np.vstack(pts), np.concatenate(idx), np.concatenate(wts)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def circle(radius: float = 1.0, n: int = 720, center=(0.0, 0.0)) -> Scene:
    """Closed regular n-gon sampling of a circle."""
    if radius <= 0 or n < 3:
        raise ValueError("circle needs radius > 0 and n >= 3")
    t = np.linspace(0.0, 2.0 * PI, n + 1)
    pts = np.column_stack([center[0] + radius * np.cos(t),
                           center[1] + radius * np.sin(t)])
    pts[-1] = pts[0]
    return Scene([pts], closed=[True])


def segment(length: float = 1.0, direction: float = 0.0,
            center=(0.0, 0.0)) -> Scene:
    """Single line segment centred at ``center``."""
    if length <= 0:
        raise ValueError("segment needs positive length")
    d = np.array([math.cos(direction), math.sin(direction)])
    c = np.asarray(center, dtype=float)
    return Scene([np.array([c - 0.5 * length * d, c + 0.5 * length * d])])


def convex_graph(coeffs=(0.25, 0.0, 0.0), span=(-1.0, 1.0), n: int = 720) -> Scene:
    """Polyline graph of the convex parabola a*x^2 + b*x + c over ``span``."""
    a, b, c = coeffs
    if a <= 0:
        raise ValueError("leading coefficient must be positive for convexity")
    if n < 2:
        raise ValueError("need at least two sample points")
    x = np.linspace(span[0], span[1], n + 1)
    y = a * x * x + b * x + c
    return Scene([np.column_stack([x, y])])


# ---------------------------------------------------------------------------
# Tangent fields and slabs
# ---------------------------------------------------------------------------

def scene_tangents(scene: Scene) -> np.ndarray:
    """Per-segment tangent direction in [0, pi)."""
    return scene.seg_dir.copy()


def scene_slab(scene: Scene, center: float, delta: float):
    """Split the scene by tangent direction.

    Returns ``(inside, outside)`` where ``inside`` collects the segments whose
    tangent lies within ``delta`` of ``center`` and ``outside`` the rest.
    Either part may be None when empty.  Splitting is exact because every
    segment has a single tangent direction.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    hit = dir_distance(scene.seg_dir, center) < delta
    inside = scene.subscene(
        (scene.seg_start[i], scene.seg_end[i]) for i in np.nonzero(hit)[0])
    outside = scene.subscene(
        (scene.seg_start[i], scene.seg_end[i]) for i in np.nonzero(~hit)[0])
    return inside, outside


def normal_hits_on_line(scene: Scene, line: ProjLine, points: np.ndarray,
                        seg_index: np.ndarray) -> np.ndarray:
    """Homogeneous coordinates of (normal line at sample) meet ``line``.

    Rows with a degenerate intersection (normal equal to ``line``) are zero.
    """
    theta_n = scene.seg_dir[seg_index] + HALF_PI
    inf_dir = np.column_stack([np.cos(theta_n), np.sin(theta_n),
                               np.zeros(len(points))])
    emb = np.column_stack([points, np.ones(len(points))])
    normals = np.cross(emb, inf_dir)
    hits = np.cross(normals, line.n[None, :])
    norms = np.linalg.norm(hits, axis=1)
    good = norms > 1e-13
    out = np.zeros_like(hits)
    out[good] = hits[good] / norms[good, None]
    return out


def _normal_hit_distance(scene: Scene, i: int, t: float, line: ProjLine,
                         u: ProjPoint) -> float:
    x = scene.seg_start[i] + t * scene.seg_vec[i]
    nu = normal_line(x, float(scene.seg_dir[i]))
    if np.linalg.norm(np.cross(nu.n, line.n)) < 1e-13:
        return 0.0
    return proj_distance(line_intersection(nu, line), u)


def scene_normal_slab(scene: Scene, line: ProjLine, u: ProjPoint, eps: float,
                      refine: int = 64):
    """Split the scene by where its normal lines meet ``line``.

    ``inside`` holds the points whose normal line meets ``line`` within
    projective distance ``eps`` of ``u``; ``outside`` is the complement.  The
    predicate varies along a segment, so segments are cut at the boundary
    parameters (located by bisection on a ``refine``-point scan).  Points
    whose normal coincides with ``line`` count as inside.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    inside, outside = [], []
    for i in range(len(scene.seg_len)):
        f = lambda t: _normal_hit_distance(scene, i, t, line, u) - eps
        ts = np.linspace(0.0, 1.0, refine + 1)
        vals = np.array([f(t) for t in ts])
        cuts = [0.0]
        for j in range(refine):
            if vals[j] == 0.0 or vals[j] * vals[j + 1] < 0:
                lo, hi = ts[j], ts[j + 1]
                if vals[j] != 0.0 and vals[j] * vals[j + 1] < 0:
                    cuts.append(float(brentq(f, lo, hi, xtol=1e-13)))
                else:
                    cuts.append(float(lo))
        cuts.append(1.0)
        cuts = sorted(set(cuts))
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b - a <= 0:
                continue
            mid = 0.5 * (a + b)
            pa = scene.seg_start[i] + a * scene.seg_vec[i]
            pb = scene.seg_start[i] + b * scene.seg_vec[i]
            if f(mid) < 0:
                inside.append((pa, pb))
            else:
                outside.append((pa, pb))
    return scene.subscene(inside), scene.subscene(outside)
