"""Occupancy-grid area oracle for swept regions, with resolution error bands.

Swept regions are measured by point sampling: scene points at spacing h/4
along each segment, motion samples spaced so no scene point moves more than
h/4 between consecutive poses, every visited cell marked.  Running the same
sweep at cell sizes h and 2h gives the reported uncertainty band.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .geometry import ProjLine, ProjPoint
from .motions import MotionSegment, Rot
from .plans import MotionPlan, PlanLeaf, _origin_displacements
from .scenes import Scene, normal_hits_on_line

_CHUNK = 1 << 22


@dataclass
class RasterGrid:
    """Axis-aligned occupancy grid; area is the marked-cell count times h^2."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int
    buf: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.buf is None:
            self.buf = np.zeros(self.nx * self.ny, dtype=bool)

    @staticmethod
    def for_bbox(bbox, h: float) -> "RasterGrid":
        x0, y0, x1, y1 = bbox
        nx = max(1, int(math.ceil((x1 - x0) / h)) + 1)
        ny = max(1, int(math.ceil((y1 - y0) / h)) + 1)
        return RasterGrid(x0, y0, h, nx, ny)

    def mark(self, xs: np.ndarray, ys: np.ndarray):
        ix = ((xs - self.x0) / self.h).astype(np.int64)
        iy = ((ys - self.y0) / self.h).astype(np.int64)
        np.clip(ix, 0, self.nx - 1, out=ix)
        np.clip(iy, 0, self.ny - 1, out=iy)
        self.buf[iy * self.nx + ix] = True

    def merge(self, other: "RasterGrid"):
        self.buf |= other.buf

    @property
    def cells(self) -> int:
        return int(np.count_nonzero(self.buf))

    def area(self) -> float:
        return self.cells * self.h * self.h

    def occupancy(self) -> np.ndarray:
        return self.buf.reshape(self.ny, self.nx)

    def boundary_length(self) -> float:
        """Exposed cell faces times h."""
        occ = self.occupancy()
        exposed = 0
        for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
            nb = np.zeros_like(occ)
            if axis == 0 and shift == 1:
                nb[1:, :] = occ[:-1, :]
            elif axis == 0:
                nb[:-1, :] = occ[1:, :]
            elif shift == 1:
                nb[:, 1:] = occ[:, :-1]
            else:
                nb[:, :-1] = occ[:, 1:]
            exposed += int(np.count_nonzero(occ & ~nb))
        return exposed * self.h

    def dilated_area(self, radius: float) -> float:
        """Area after inflating the marked set by ``radius``."""
        if radius <= 0:
            return self.area()
        r = int(math.ceil(radius / self.h))
        y, x = np.ogrid[-r:r + 1, -r:r + 1]
        disk = x * x + y * y <= r * r
        out = ndimage.binary_dilation(self.occupancy(), structure=disk)
        return int(np.count_nonzero(out)) * self.h * self.h


@dataclass
class AreaReport:
    """Swept-area estimate with a two-resolution uncertainty band."""

    area: float
    uncertainty: float
    h: float
    cells: int
    scene_samples: int
    pose_samples: int
    elapsed: float
    coarse_area: float = 0.0
    boundary_length: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "area": self.area, "uncertainty": self.uncertainty, "h": self.h,
            "cells": self.cells, "scene_samples": self.scene_samples,
            "pose_samples": self.pose_samples, "elapsed": self.elapsed,
            "coarse_area": self.coarse_area,
            "boundary_length": self.boundary_length,
        }


# ---------------------------------------------------------------------------
# Pose expansion
# ---------------------------------------------------------------------------

def _plan_pose_samples(plan: MotionPlan, step: float, radius: float):
    """Dense pose samples (phi, pos) grouped per atom, with leaf indices.

    Consecutive poses move any scene point within ``radius`` by at most
    ``step``.  Returns (phis, positions complex, leaf_of_pose, bbox of origin
    path).
    """
    coords = plan.coords
    n = len(coords)
    phis_atom = coords[:, 2]
    v_atom = _origin_displacements(coords)
    cum_phi = np.concatenate([[0.0], np.cumsum(phis_atom)])
    pos = np.concatenate([[0.0 + 0.0j],
                          np.cumsum(np.exp(1j * cum_phi[:-1]) * v_atom)])

    # Angular extent bound: moving by atom k sweeps points by at most
    # |v_k| + radius * |phi_k|.
    move = np.abs(v_atom) + radius * np.abs(phis_atom)
    counts = np.maximum(1, np.ceil(move / step).astype(np.int64))

    out_phi = [np.array([0.0])]
    out_pos = [np.array([0.0 + 0.0j])]
    out_leaf = [np.array([plan.leaf_idx[0] if n else 0], dtype=np.int64)]
    for k in range(n):
        m = counts[k]
        t = np.arange(1, m + 1) / m
        # Sub-poses: start_k o scaled atom.
        sub_phi_atom = phis_atom[k] * t
        sub_v = _origin_displacements(
            np.column_stack([np.broadcast_to(coords[k, 0], m) * t,
                             np.broadcast_to(coords[k, 1], m) * t,
                             sub_phi_atom])) if abs(phis_atom[k]) > 1e-12 \
            else (v_atom[k] * t)
        out_phi.append(cum_phi[k] + sub_phi_atom)
        out_pos.append(pos[k] + np.exp(1j * cum_phi[k]) * sub_v)
        out_leaf.append(np.full(m, plan.leaf_idx[k], dtype=np.int64))
    phis = np.concatenate(out_phi)
    positions = np.concatenate(out_pos)
    leaves = np.concatenate(out_leaf)
    return phis, positions, leaves


def _plan_bbox(plan: MotionPlan, radius: float, pad: float):
    phis, pos, _ = _plan_pose_samples(plan, step=math.inf, radius=radius)
    xs, ys = pos.real, pos.imag
    # Rotation atoms bow outside the chord of their endpoints.
    phi = plan.coords[:, 2]
    spin = np.abs(phi) > 1e-12
    bulge = 0.0
    if np.any(spin):
        zdist = (np.hypot(plan.coords[spin, 0], plan.coords[spin, 1])
                 / np.abs(phi[spin]))
        half = np.minimum(np.abs(phi[spin]), 2 * math.pi) / 2.0
        bulge = float(np.max((radius + zdist) * (1.0 - np.cos(half))))
    m = radius + pad + bulge
    return (float(xs.min()) - m, float(ys.min()) - m,
            float(xs.max()) + m, float(ys.max()) + m)


def _sweep_once(scene: Scene, plan: MotionPlan, grid: RasterGrid):
    """Mark one grid with the deletion-filtered sweep; returns sample counts."""
    step = grid.h / 4.0
    pts, seg_idx, _ = scene.sample(step)
    dirs = scene.seg_dir[seg_idx]
    zs = pts[:, 0] + 1j * pts[:, 1]

    if plan.mode == "rotation" and plan.line is not None:
        hits = normal_hits_on_line(scene, plan.line, pts, seg_idx)
    else:
        hits = None

    masks = []
    for lf in plan.leaves:
        if plan.mode == "translation":
            masks.append(lf.keep_mask_tangent(dirs))
        else:
            masks.append(lf.keep_mask_normal(hits))

    phis, positions, leaf_of_pose = _plan_pose_samples(
        plan, step=step, radius=scene.bounding_radius)

    pose_total = len(phis)
    order = np.argsort(leaf_of_pose, kind="stable")
    phis, positions, leaf_of_pose = (phis[order], positions[order],
                                     leaf_of_pose[order])
    boundaries = np.flatnonzero(np.diff(leaf_of_pose)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [pose_total]])

    for s, e in zip(starts, ends):
        leaf = int(leaf_of_pose[s])
        kept = masks[leaf]
        if not np.any(kept):
            continue
        zk = zs[kept]
        block = max(1, int(_CHUNK // max(1, len(zk))))
        for b in range(s, e, block):
            sl = slice(b, min(e, b + block))
            if plan.mode == "translation":
                pts_out = zk[None, :] + positions[sl][:, None]
            else:
                pts_out = (np.exp(1j * phis[sl])[:, None] * zk[None, :]
                           + positions[sl][:, None])
            flat = pts_out.ravel()
            grid.mark(flat.real, flat.imag)
    return len(pts), pose_total


def sweep_area(scene: Scene, plan, *, grid_max: int = 2048, h: float = None,
               with_uncertainty: bool = True, pad: float = 0.05) -> AreaReport:
    """Measure the area swept by the deletion-filtered scene along a plan.

    ``plan`` is a MotionPlan or a list of MotionSegment (no deletions).
    The estimate runs at cell size ``h`` (default: the plan bounding box over
    ``grid_max`` cells) and the uncertainty is the difference against a run
    at 2h.
    """
    if isinstance(plan, list):
        plan = plan_from_segments(plan)
    if plan.n_atoms == 0:
        return AreaReport(0.0, 0.0, h or 0.0, 0, 0, 0, 0.0)
    t0 = time.perf_counter()
    bbox = _plan_bbox(plan, scene.bounding_radius, pad)
    if h is None:
        extent = max(bbox[2] - bbox[0], bbox[3] - bbox[1])
        h = extent / grid_max
    grid = RasterGrid.for_bbox(bbox, h)
    ns, np_ = _sweep_once(scene, plan, grid)
    area = grid.area()
    coarse = 0.0
    unc = 0.0
    if with_uncertainty:
        grid2 = RasterGrid.for_bbox(bbox, 2 * h)
        _sweep_once(scene, plan, grid2)
        coarse = grid2.area()
        unc = abs(coarse - area)
    return AreaReport(area=area, uncertainty=unc, h=h, cells=grid.cells,
                      scene_samples=ns, pose_samples=np_,
                      elapsed=time.perf_counter() - t0, coarse_area=coarse,
                      boundary_length=grid.boundary_length())


def sweep_grid(scene: Scene, plan, *, grid_max: int = 2048, h: float = None,
               pad: float = 0.05) -> RasterGrid:
    """Single-resolution sweep returning the marked grid itself."""
    if isinstance(plan, list):
        plan = plan_from_segments(plan)
    bbox = _plan_bbox(plan, scene.bounding_radius, pad)
    if h is None:
        extent = max(bbox[2] - bbox[0], bbox[3] - bbox[1])
        h = extent / grid_max
    grid = RasterGrid.for_bbox(bbox, h)
    _sweep_once(scene, plan, grid)
    return grid


def plan_from_segments(segments: list) -> MotionPlan:
    """Wrap raw MotionSegments as a plan with no deletions."""
    coords = np.array([seg.generator.coords() for seg in segments],
                      dtype=float).reshape(-1, 3)
    leaf = PlanLeaf(index="all", kept=False, eps=0.0)
    return MotionPlan(mode="rotation", coords=coords,
                      leaf_idx=np.zeros(len(coords), dtype=np.int64),
                      leaves=[leaf], eps=0.0)


def translation_plan(vectors, leaves=None, leaf_idx=None, eps: float = 0.0,
                     meta=None) -> MotionPlan:
    """Plan made of straight translation atoms (w = i v per atom)."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, 2)
    # w = i v, so (w_x, w_y) = (-v_y, v_x).
    coords = np.column_stack([-vectors[:, 1], vectors[:, 0],
                              np.zeros(len(vectors))])
    if leaves is None:
        leaves = [PlanLeaf(index="all", kept=False, eps=eps)]
        leaf_idx = np.zeros(len(vectors), dtype=np.int64)
    return MotionPlan(mode="translation", coords=coords, leaf_idx=leaf_idx,
                      leaves=leaves, eps=eps, meta=meta or {})


# ---------------------------------------------------------------------------
# Sweep-bound verifiers
# ---------------------------------------------------------------------------

@dataclass
class RatioReport:
    """Measured sweep area against a reference product bound."""

    defined: bool
    area: float = 0.0
    uncertainty: float = 0.0
    reference: float = 0.0
    ratio: float = 0.0
    extra: dict = field(default_factory=dict)


def verify_tangent_slab_sweep(scene: Scene, theta: float, delta: float,
                              v, *, grid_max: int = 2048) -> RatioReport:
    """Translate the tangent slab around ``theta`` by v; compare to
    delta * H1(slab) * |v|."""
    from .scenes import scene_slab
    if delta > 0.3:
        raise ValueError("slab half-width should stay below 0.3")
    v = np.asarray(v, dtype=float)
    slab, _ = scene_slab(scene, theta, delta)
    if slab is None:
        return RatioReport(defined=False)
    plan = translation_plan([v])
    rep = sweep_area(slab, plan, grid_max=grid_max)
    ref = delta * slab.total_length * float(np.hypot(*v))
    return RatioReport(defined=True, area=rep.area, uncertainty=rep.uncertainty,
                       reference=ref, ratio=rep.area / ref if ref > 0 else math.inf,
                       extra={"slab_h1": slab.total_length, "h": rep.h})


def rotation_distance_integral(scene: Scene, rot: Rot, subset: Scene = None) -> float:
    """Quadrature of |phi| * integral of dist(normal line at x, centre).

    This is an upper bound for the area swept when rotating the subset by
    ``rot`` around its centre.
    """
    target = subset if subset is not None else scene
    pts, seg_idx, wts = target.sample(max(target.total_length / 4096.0, 1e-6))
    if rot.phi == 0.0:
        # Translation: distance from the normal direction to the motion, per
        # unit length, reduces to |sin(angle)| * |v|.
        v = rot.v
        dirs = target.seg_dir[seg_idx]
        ang = np.abs(np.sin(dirs - math.atan2(v.imag, v.real)))
        return float(np.sum(ang * wts) * abs(v))
    z = rot.z
    zp = np.array([z.real, z.imag])
    # dist(normal line at x, z): the normal passes through x with direction
    # theta_x + pi/2; distance is |<z - x, tangent dir>|.
    dirs = target.seg_dir[seg_idx]
    tx = np.column_stack([np.cos(dirs), np.sin(dirs)])
    d = zp[None, :] - pts
    dist = np.abs(d[:, 0] * tx[:, 0] + d[:, 1] * tx[:, 1])
    return float(abs(rot.phi) * np.sum(dist * wts))


def verify_normal_ball_sweep(scene: Scene, rot: Rot, delta: float, *,
                             grid_max: int = 2048) -> RatioReport:
    """Rotate the sub-scene whose normals pass near the rotation centre.

    Filters the scene by "normal line meets B(centre, delta)", applies the
    rotation, and reports area / (delta * H1(R) * |y|) together with the
    distance-integral upper bound.
    """
    from .geometry import proj_point_line_distance
    from .motions import projective_center
    thr = 0.2 / (1.0 + scene.bounding_radius)
    if delta > thr + 1e-12:
        raise ValueError(f"delta {delta} above smallness threshold {thr}")
    z = projective_center(rot)
    pts, seg_idx, wts = scene.sample(scene.total_length / 8192.0)
    # Normal line at sample: through x, direction theta + pi/2.
    dirs = scene.seg_dir[seg_idx] + math.pi / 2.0
    inf_dir = np.column_stack([np.cos(dirs), np.sin(dirs), np.zeros(len(pts))])
    emb = np.column_stack([pts, np.ones(len(pts))])
    normals = np.cross(emb, inf_dir)
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    meets = np.arcsin(np.minimum(1.0, np.abs(normals @ z.h))) < delta
    if not np.any(meets):
        return RatioReport(defined=False)
    hit_segs = np.unique(seg_idx[meets])
    # Keep whole segments whose sampled majority meets the ball; finer
    # clipping is unnecessary for ratio reporting.
    pieces = [(scene.seg_start[i], scene.seg_end[i]) for i in hit_segs]
    sub = scene.subscene(pieces)
    plan = MotionPlan(mode="rotation",
                      coords=rot.coords().reshape(1, 3),
                      leaf_idx=np.zeros(1, dtype=np.int64),
                      leaves=[PlanLeaf(index="all", kept=False, eps=0.0)],
                      eps=0.0)
    rep = sweep_area(sub, plan, grid_max=grid_max)
    ref = delta * sub.total_length * rot.norm()
    bound = rotation_distance_integral(scene, rot, sub)
    return RatioReport(defined=True, area=rep.area,
                       uncertainty=rep.uncertainty, reference=ref,
                       ratio=rep.area / ref if ref > 0 else math.inf,
                       extra={"integral_bound": bound,
                              "subset_h1": sub.total_length, "h": rep.h})


def verify_small_neighborhood(scene: Scene, plan, eta: float, *,
                              grid_max: int = 1024) -> dict:
    """Compare the sweep with its eta-inflation against the perimeter bound."""
    grid = sweep_grid(scene, plan, grid_max=grid_max, pad=2 * eta + 0.05)
    if eta < grid.h:
        raise ValueError("eta below the raster cell size is unresolvable")
    base = grid.area()
    blen = grid.boundary_length()
    inflated = grid.dilated_area(eta)
    bound = base + 2.0 * eta * blen + 16.0 * eta * eta
    return {"base": base, "inflated": inflated, "boundary_length": blen,
            "bound": bound, "eta": eta, "h": grid.h,
            "ok": inflated <= bound + 1e-12}


def trivial_sweep_bound(scene: Scene, plan) -> RatioReport:
    """Measured area against the wholesale product bound H1(E) * motion size."""
    if isinstance(plan, list):
        plan = plan_from_segments(plan)
    if plan.n_atoms == 0:
        return RatioReport(defined=True, area=0.0, reference=0.0, ratio=0.0)
    stripped = MotionPlan(mode=plan.mode, coords=plan.coords,
                          leaf_idx=np.zeros(plan.n_atoms, dtype=np.int64),
                          leaves=[PlanLeaf(index="all", kept=False, eps=0.0)],
                          eps=0.0, line=plan.line)
    rep = sweep_area(scene, stripped)
    ref = scene.total_length * stripped.total_motion()
    return RatioReport(defined=True, area=rep.area, uncertainty=rep.uncertainty,
                       reference=ref, ratio=rep.area / ref if ref > 0 else 0.0,
                       extra={"h": rep.h})
