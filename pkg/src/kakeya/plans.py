"""Realized motion plans: atom sequences plus per-leaf deletion data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import ProjLine, ProjPoint, dir_distance, proj_distance
from .motions import IDENTITY_ROT, Rot, rot_from_coords, star, star_fold


@dataclass
class PlanLeaf:
    """Deletion record for one leaf family of plan atoms."""

    index: str
    kept: bool
    eps: float
    theta_del: float | None = None      # tangent-ball centre (translation mode)
    u_del: ProjPoint | None = None      # meeting-point ball centre (rotation mode)
    h1: float = 0.0

    def keep_mask_tangent(self, seg_dirs: np.ndarray) -> np.ndarray:
        """Mask of scene samples that survive this leaf's deletion."""
        if not self.kept or self.theta_del is None:
            return np.ones(len(seg_dirs), dtype=bool)
        return dir_distance(seg_dirs, self.theta_del) >= self.eps

    def keep_mask_normal(self, normal_hits: np.ndarray) -> np.ndarray:
        """Mask from normal-line meeting points (rows of unit 3-vectors)."""
        if not self.kept or self.u_del is None:
            return np.ones(len(normal_hits), dtype=bool)
        dots = np.abs(normal_hits @ self.u_del.h)
        degenerate = np.linalg.norm(normal_hits, axis=1) < 0.5
        kept = dots <= np.cos(self.eps)
        kept[degenerate] = False
        return kept


@dataclass
class MotionPlan:
    """Ordered atomic motions with leaf bookkeeping.

    ``coords[k]`` holds the intrinsic (w_x, w_y, phi) of atom k; the global
    path applies atoms by right-composition starting from the identity.
    """

    mode: str
    coords: np.ndarray
    leaf_idx: np.ndarray
    leaves: list[PlanLeaf]
    eps: float
    line: ProjLine | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        self.leaf_idx = np.asarray(self.leaf_idx, dtype=np.int64)

    @property
    def n_atoms(self) -> int:
        return len(self.coords)

    def atom(self, k: int) -> Rot:
        return rot_from_coords(self.coords[k])

    def endpoint_rot(self) -> Rot:
        if self.mode == "translation":
            w = self.coords[:, :2].sum(axis=0)
            return Rot(complex(w[0], w[1]), 0.0)
        return star_fold(self.atom(k) for k in range(self.n_atoms))

    def endpoint_translation(self) -> np.ndarray:
        """Net displacement vector (translation mode only): v = -i w."""
        if self.mode != "translation":
            raise ValueError("not a translation plan")
        w = self.coords[:, :2].sum(axis=0)
        return np.array([w[1], -w[0]])

    def global_poses(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-atom end poses: (phis (n,), positions (n,) complex).

        pose[k] is the global isometry after applying atoms 0..k; its action
        is u -> e^{i phi} u + pos.
        """
        phis = self.coords[:, 2]
        cum_phi = np.cumsum(phis)
        lead_phi = np.concatenate([[0.0], cum_phi[:-1]])
        # Origin displacement of each atom.
        v = _origin_displacements(self.coords)
        pos = np.cumsum(np.exp(1j * lead_phi) * v)
        return cum_phi, pos

    def total_motion(self) -> float:
        """Sum of |x_j| over atoms (3-space norms)."""
        return float(np.linalg.norm(self.coords, axis=1).sum())

    def path_length(self) -> float:
        """Total translation length of the realized origin path."""
        return float(np.abs(_origin_displacements(self.coords)).sum())

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        leaves = []
        for lf in self.leaves:
            leaves.append({
                "index": lf.index,
                "kept": lf.kept,
                "eps": lf.eps,
                "theta_del": lf.theta_del,
                "u_del": None if lf.u_del is None else lf.u_del.h.tolist(),
                "h1": lf.h1,
            })
        return {
            "mode": self.mode,
            "eps": self.eps,
            "line": None if self.line is None else self.line.n.tolist(),
            "atoms": [{"w": [c[0], c[1]], "phi": c[2], "mult": 1,
                       "leaf": int(i)}
                      for c, i in zip(self.coords, self.leaf_idx)],
            "leaves": leaves,
            "meta": self.meta,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "MotionPlan":
        coords = np.array([[a["w"][0], a["w"][1], a["phi"]] for a in d["atoms"]]
                          , dtype=float).reshape(-1, 3)
        leaf_idx = np.array([a["leaf"] for a in d["atoms"]], dtype=np.int64)
        leaves = [PlanLeaf(index=lf["index"], kept=lf["kept"], eps=lf["eps"],
                           theta_del=lf["theta_del"],
                           u_del=None if lf["u_del"] is None
                           else ProjPoint(np.asarray(lf["u_del"])),
                           h1=lf.get("h1", 0.0))
                  for lf in d["leaves"]]
        line = None if d.get("line") is None else ProjLine(np.asarray(d["line"]))
        return MotionPlan(mode=d["mode"], coords=coords, leaf_idx=leaf_idx,
                          leaves=leaves, eps=d["eps"], line=line,
                          meta=d.get("meta", {}))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)

    @staticmethod
    def load(path) -> "MotionPlan":
        with open(path) as f:
            return MotionPlan.from_json_dict(json.load(f))


def _origin_displacements(coords: np.ndarray) -> np.ndarray:
    """Vector of complex origin displacements v for each (w, phi) row."""
    w = coords[:, 0] + 1j * coords[:, 1]
    phi = coords[:, 2]
    v = -1j * w
    spin = np.abs(phi) > 1e-12
    if np.any(spin):
        v[spin] = w[spin] * (1.0 - np.exp(1j * phi[spin])) / phi[spin]
    return v
