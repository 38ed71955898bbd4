"""Venetian-blind motion planning.

A target motion is split recursively: every node of a binary tree holds a
union of parallel path pieces, and a "blind" of iterated basic zigzags
replaces each piece by bad pieces (tilted slightly off the node direction)
and good pieces (rotated by nearly a quarter turn).  Each node accumulates a
direction interval; a leaf is kept once the interval covers all directions
except a gap smaller than the deletion radius, so deleting one small tangent
ball at that leaf removes every direction the ancestors never processed.

Rotation targets run through the same planar tree: an orthogonal map of
3-space carries the translation-side vectors onto motion coordinates whose
projective centres stay near a chosen line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    HALF_PI,
    PI,
    DirInterval,
    ProjLine,
    ProjPoint,
    dir_distance,
    dir_to_infinite,
    proj_distance,
    proj_point_line_distance,
    wrap_direction,
)
from .motions import (
    IDENTITY_ROT,
    Rot,
    projective_center,
    rot_from_coords,
    star,
    star_solve_right,
)
from .plans import MotionPlan, PlanLeaf

FINENESS_CAP = 1 << 24
DEPTH_CAP = 40


class BudgetInfeasible(RuntimeError):
    """The construction cannot meet its caps with the given parameters."""


# ---------------------------------------------------------------------------
# Basic zigzag counting and blind geometry
# ---------------------------------------------------------------------------

def choose_k(beta: float, gamma: float) -> int:
    """Number of zigzag iterations: the unique k >= 1 with
    k*gamma in [pi/2 - 2*beta - gamma, pi/2 - 2*beta)."""
    if not (0.0 < gamma <= beta):
        raise ValueError("need 0 < gamma <= beta")
    top = HALF_PI - 2.0 * beta
    if top <= gamma * (1.0 + 1e-12):
        raise BudgetInfeasible("pi/2 - 2*beta <= gamma leaves no k >= 1; "
                               "shrink beta")
    q = top / gamma
    qr = round(q)
    if abs(q - qr) < 1e-9:
        k = int(qr) - 1
    else:
        k = int(math.floor(q))
    if k < 1:
        raise BudgetInfeasible("no valid zigzag count")
    return k


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def split_vector(v: np.ndarray, theta_a: float, theta_b: float) -> tuple[np.ndarray, np.ndarray]:
    """Unique decomposition v = a + b with a parallel to theta_a, b to theta_b."""
    ea, eb = _unit(theta_a), _unit(theta_b)
    det = ea[0] * eb[1] - ea[1] * eb[0]
    if abs(det) < 1e-14:
        raise ValueError("split directions are parallel")
    s = (v[0] * eb[1] - v[1] * eb[0]) / det
    t = (ea[0] * v[1] - ea[1] * v[0]) / det
    return s * ea, t * eb


@dataclass
class BlindStep:
    """One zigzag iteration inside a blind."""

    theta_bad: float
    theta_good: float
    bad_vec: np.ndarray
    good_vec: np.ndarray


def blind_decompose(v: np.ndarray, theta: float, beta: float, gamma: float,
                    k: int, sign: int) -> list[BlindStep]:
    """Run the k zigzag iterations on the total vector v of direction theta.

    Step m tilts the running good part into directions
    (theta - sign*beta, theta + sign*m*gamma).  Vector identities are exact:
    bad_m + good_m reproduces the step input bitwise up to rounding.
    """
    steps = []
    cur = np.asarray(v, dtype=float)
    theta_bad = wrap_direction(theta - sign * beta)
    for m in range(1, k + 1):
        theta_good = wrap_direction(theta + sign * m * gamma)
        bad, good = split_vector(cur, theta - sign * beta,
                                 theta + sign * m * gamma)
        steps.append(BlindStep(theta_bad=float(theta_bad),
                               theta_good=float(wrap_direction(theta_good)),
                               bad_vec=bad, good_vec=good))
        cur = good
    return steps


def venetian_blind(start, end, beta: float, gamma: float, sign: int,
                   fineness=None):
    """Replace the segment start-end by a realized Venetian blind.

    Returns (bad_pieces, good_pieces, vertices): lists of (a, b) endpoint
    pairs for the bad and final-good parts, and the full ordered vertex chain
    of the blind path.  ``fineness`` maps the step number m (1-based) to the
    zigzag tooth count N_m; default is 1 everywhere.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    v = end - start
    theta = float(wrap_direction(math.atan2(v[1], v[0])))
    k = choose_k(beta, gamma)
    steps = blind_decompose(v, theta, beta, gamma, k, sign)

    def n_of(m):
        if fineness is None:
            return 1
        if callable(fineness):
            return max(1, int(fineness(m)))
        return max(1, int(fineness))

    bad_pieces, good_pieces = [], []

    def expand(anchor, vec, m):
        """Walk the zigzag of step m along the piece (anchor, vec)."""
        chain = [anchor.copy()]
        if m > k:
            good_pieces.append((anchor.copy(), anchor + vec))
            return [anchor.copy(), anchor + vec]
        n = n_of(m)
        # Rescale the canonical step decomposition to this piece.
        scale = np.linalg.norm(vec) / max(np.linalg.norm(
            steps[m - 1].bad_vec + steps[m - 1].good_vec), 1e-300)
        bvec = steps[m - 1].bad_vec * scale / n
        gvec = steps[m - 1].good_vec * scale / n
        pos = anchor.copy()
        for _ in range(n):
            bad_pieces.append((pos.copy(), pos + bvec))
            chain.append(pos + bvec)
            pos = pos + bvec
            sub = expand(pos, gvec, m + 1)
            chain.extend(sub[1:])
            pos = sub[-1]
        return chain

    vertices = expand(start, v, 1)
    vertices[-1] = end
    return bad_pieces, good_pieces, vertices


def fineness_controller(raw_deviation: float, budget: float,
                        cap: int = FINENESS_CAP) -> int:
    """Smallest power-of-two tooth count bringing the deviation under budget."""
    if raw_deviation <= budget or budget <= 0 and raw_deviation == 0:
        return 1
    if budget <= 0:
        raise BudgetInfeasible("zero deviation budget with nonzero deviation")
    n = 1 << max(0, math.ceil(math.log2(raw_deviation / budget)))
    if n > cap:
        raise BudgetInfeasible(f"needed fineness {n} exceeds cap {cap}")
    return n


# ---------------------------------------------------------------------------
# Parameter schedule and stopping
# ---------------------------------------------------------------------------

def schedule_params(eps_global: float, depth: int, n_ones: int, h1: float,
                    beta_parent: float = math.inf):
    """Budgeted (beta, gamma, eps) for a fresh good node.

    eps shrinks geometrically with depth; beta obeys the inherited monotone
    and counting caps and the per-node area budget; gamma never exceeds beta.
    """
    eps_i = eps_global * 4.0 ** (-(depth + 1))
    beta = min(beta_parent, eps_i / h1, PI / 8.0)
    if n_ones > 0:
        beta = min(beta, 1.0 / n_ones)
    gamma = min(beta, eps_i / h1)
    return beta, gamma, eps_i


def select_sign(interval: DirInterval, theta: float) -> int:
    """+1 when theta sits in the right half of the interval, else -1."""
    if interval.is_empty or interval.is_full:
        return +1
    off = wrap_direction(theta - interval.anchor)
    if off > HALF_PI:
        off -= PI
    if abs(off) <= 1e-12:
        return +1
    return +1 if off > 0 else -1


@dataclass
class BlindNode:
    """One node of the construction tree."""

    index: str
    vec: np.ndarray
    theta: float
    interval: DirInterval
    n_ones: int
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    eps_i: float = 0.0
    k: int = 0
    sign: int = +1
    status: str = "open"            # open | internal | kept | ignored
    theta_del: float | None = None
    last_good: str = ""
    children: tuple | None = None
    steps: list = field(default_factory=list)

    @property
    def h1(self) -> float:
        return float(np.hypot(*self.vec))

    @property
    def depth(self) -> int:
        return len(self.index)

    @property
    def is_good(self) -> bool:
        return self.index == "" or self.index.endswith("1")


@dataclass
class PlanProfile:
    """Tunable build policy.

    The schedule keeps the structural invariants (monotone beta, counting
    cap, gamma <= beta) while trading certified budgets against tree size so
    that desk-scale runs finish; every relaxation is tracked and reported in
    the plan's certified ledger.

    Wide panels (beta near pi/6) make both blind parts shrink geometrically,
    which keeps the index tree shallow; small panels tighten the per-slab
    sweep estimates but deepen the tree.  ``prune_len`` stops recursing on
    path copies once they are shorter than the cutoff, charging them against
    the wholesale ignore budget.
    """

    beta_cap: float = 0.45
    beta_floor: float = 1e-5
    gamma_div: float = 1.0
    gamma_floor: float = 1e-6
    keep_gap: float = 1.0           # kept when pi - |I| < keep_gap * eps
    ignore_frac: float = 0.3        # share of eps available to ignored mass
    depth_cap: int = DEPTH_CAP
    eta0: float | None = None       # deviation budget scale (length units)
    eta_rel: float = 0.02           # default eta0 = eta_rel * |target|
    fineness_step_cap: int = 64
    fineness_multiplier: int = 1
    atom_cap: int = 1 << 21
    trivial: bool = True
    enforce_center_exclusion: bool = True
    beta_good_decay: float = 1.0    # extra shrink per accumulated good
    prune_len: float | None = None  # copy-length cutoff; None disables
    prune_budget_hard: bool = False


@dataclass
class BlindTree:
    """Index tree of one construction run."""

    nodes: dict
    eps: float
    scene_h1: float
    profile: PlanProfile
    ignore_threshold: float = 0.0
    ignore_spent: float = 0.0

    @property
    def root(self) -> BlindNode:
        return self.nodes[""]

    def leaves(self):
        return [n for n in self.nodes.values() if n.status in ("kept", "ignored")]

    def eps_sum(self) -> float:
        return sum(n.eps_i for n in self.nodes.values() if n.status == "internal")


def stopping_rule(tree: BlindTree, node: BlindNode) -> str:
    """continue | stop-kept | stop-ignored for an open node."""
    prof = tree.profile
    if node.depth > prof.depth_cap:
        raise BudgetInfeasible(
            f"node {node.index or 'root'} exceeded depth cap {prof.depth_cap}")
    if PI - node.interval.length < prof.keep_gap * tree.eps:
        return "stop-kept"
    if node.h1 <= tree.ignore_threshold:
        return "stop-ignored"
    return "continue"


def _fresh_beta(tree: BlindTree, node: BlindNode, beta_parent: float) -> float:
    prof = tree.profile
    beta = min(beta_parent, prof.beta_cap,
               prof.beta_cap * prof.beta_good_decay ** node.n_ones,
               PI / 6.0 * 0.98)
    if node.n_ones > 0:
        beta = min(beta, 1.0 / node.n_ones)
    return max(beta, prof.beta_floor)


def grow_tree(target_vec, eps: float, scene_h1: float,
              profile: PlanProfile) -> BlindTree:
    """Grow the full index tree for a translation-side target vector."""
    target_vec = np.asarray(target_vec, dtype=float)
    theta0 = float(wrap_direction(math.atan2(target_vec[1], target_vec[0])))
    root = BlindNode(index="", vec=target_vec.copy(), theta=theta0,
                     interval=DirInterval.empty(), n_ones=0, last_good="")
    cutoff = profile.prune_len
    if cutoff is None:
        cutoff = min(0.01 * float(np.hypot(*target_vec)),
                     0.25 * profile.ignore_frac * eps / max(scene_h1, 1e-12))
    tree = BlindTree(nodes={"": root}, eps=eps, scene_h1=scene_h1,
                     profile=profile, ignore_threshold=cutoff)
    queue = [root]
    while queue:
        node = queue.pop()
        verdict = stopping_rule(tree, node)
        if verdict == "stop-kept":
            node.status = "kept"
            node.theta_del = node.interval.complement_center()
            continue
        if verdict == "stop-ignored":
            node.status = "ignored"
            tree.ignore_spent += node.h1 * tree.scene_h1
            continue

        # Parameters for this node's blind.
        if node.is_good:
            beta_parent = (tree.nodes[node.index[:-1]].beta
                           if node.index else math.inf)
            node.beta = _fresh_beta(tree, node, beta_parent)
        else:
            node.beta = tree.nodes[node.last_good].beta
        node.gamma = max(min(node.beta, node.beta / tree.profile.gamma_div),
                         tree.profile.gamma_floor)
        node.gamma = min(node.gamma, node.beta)
        node.eps_i = max(node.beta, node.gamma) * node.h1
        try:
            node.k = choose_k(node.beta, node.gamma)
        except BudgetInfeasible:
            node.beta = max((HALF_PI - 2 * node.gamma) / 2.5,
                            tree.profile.beta_floor)
            node.gamma = min(node.gamma, node.beta)
            node.k = choose_k(node.beta, node.gamma)
        node.sign = select_sign(node.interval, node.theta)
        node.steps = blind_decompose(node.vec, node.theta, node.beta,
                                     node.gamma, node.k, node.sign)
        bad_total = np.sum([s.bad_vec for s in node.steps], axis=0)
        good_final = node.steps[-1].good_vec
        theta_bad = node.steps[0].theta_bad
        theta_good = node.steps[-1].theta_good

        i0 = BlindNode(
            index=node.index + "0", vec=bad_total, theta=theta_bad,
            interval=node.interval.union(
                DirInterval.bracket(theta_bad, node.theta)),
            n_ones=node.n_ones, last_good=node.last_good,
            alpha=node.beta)
        i1 = BlindNode(
            index=node.index + "1", vec=good_final, theta=theta_good,
            interval=node.interval.union(
                DirInterval.bracket(theta_good, node.theta)),
            n_ones=node.n_ones + 1, last_good=node.index + "1",
            alpha=node.gamma)
        node.children = (i0.index, i1.index)
        node.status = "internal"
        tree.nodes[i0.index] = i0
        tree.nodes[i1.index] = i1
        queue.append(i1)
        queue.append(i0)
    return tree


def validate_tree(tree: BlindTree) -> dict:
    """Check the structural invariants on a realized tree.

    Returns a dict of worst slacks; raises AssertionError on violation.
    """
    worst_chain = -math.inf
    for node in tree.nodes.values():
        if node.status == "internal":
            assert node.gamma <= node.beta + 1e-15
            assert node.eps_i >= node.beta * node.h1 - 1e-12 or not node.is_good
            assert node.eps_i >= node.gamma * node.h1 - 1e-12
            if node.n_ones > 0:
                assert node.beta <= 1.0 / node.n_ones + 1e-15
            if node.index:
                parent = tree.nodes[node.index[:-1]]
                if parent.status == "internal":
                    assert node.beta <= parent.beta + 1e-15
            if not node.is_good and node.last_good in tree.nodes:
                g = tree.nodes[node.last_good]
                if g.status == "internal":
                    assert abs(node.beta - g.beta) <= 1e-15
        if node.index:
            parent = tree.nodes[node.index[:-1]]
            assert parent.interval.is_empty or node.interval.contains_interval(
                parent.interval, tol=1e-9)
            if not node.interval.is_full:
                assert node.interval.contains(node.theta, tol=1e-9)
    # Interval-growth chain across consecutive good generations.
    for node in tree.nodes.values():
        if not (node.is_good and node.index):
            continue
        anc = node.index[:-1]
        prev_good = None
        while anc:
            if anc.endswith("1"):
                prev_good = tree.nodes[anc]
                break
            anc = anc[:-1]
        if prev_good is None and "" in tree.nodes:
            prev_good = tree.nodes[""]
        if prev_good is None or prev_good.index == node.index:
            continue
        lhs = PI - node.interval.length
        rhs = (PI - prev_good.interval.length) / 2.0 + 2.0 * prev_good.beta
        worst_chain = max(worst_chain, lhs - rhs)
        assert lhs <= rhs + prev_good.gamma + 1e-9, \
            f"interval chain violated at {node.index}"
    return {"chain_slack": worst_chain}


# ---------------------------------------------------------------------------
# Certified budget ledger
# ---------------------------------------------------------------------------

def certified_budget(tree: BlindTree, slab_h1) -> dict:
    """Entry-charge ledger for the realized tree.

    ``slab_h1(lo, hi)`` returns the scene mass whose tangents lie in the
    direction bracket (an interval shorter than pi/2).  Charges follow the
    per-node bracket estimates plus the wholesale bound on ignored leaves;
    the raster oracle remains the acceptance authority.
    """
    entry = 0.0
    for node in tree.nodes.values():
        if not node.index:
            continue
        parent = tree.nodes[node.index[:-1]]
        if parent.status != "internal":
            continue
        mass = slab_h1(node.theta, parent.theta)
        entry += node.alpha * parent.h1 * mass
    ignored = tree.ignore_spent
    eps_sum = tree.eps_sum()
    return {
        "entry_charges": entry,
        "ignored_charges": ignored,
        "eps_sum": eps_sum,
        "ledger_bound": 4.0 * eps_sum * tree.scene_h1 + ignored,
        "certified_total": entry + ignored,
    }


# ---------------------------------------------------------------------------
# Realization: tree -> atom sequence
# ---------------------------------------------------------------------------

class _Realizer:
    """Iterative expansion of a tree into intrinsic motion atoms.

    Frames carry per-copy prescribed translation-side vectors and, in
    rotation mode, the realized 3-space piece that the zigzag division drags
    slightly off the prescribed one.
    """

    def __init__(self, tree: BlindTree, profile: PlanProfile, mode: str,
                 q_map: np.ndarray | None = None, eps: float = 0.0):
        self.tree = tree
        self.profile = profile
        self.mode = mode
        self.q = q_map
        self.eps = eps
        self.coords = []
        self.leaf_of = []
        self.leaf_ids = {}
        self.leaf_list = []
        self.records = []
        self.center_rows = []
        self.max_drift = 0.0
        self.atoms = 0
        self.prune_len = profile.prune_len or 0.0
        self.prune_budget = (profile.ignore_frac * tree.eps
                             - tree.ignore_spent)
        self.prune_spent = 0.0
        self.prune_count = 0

    def _leaf_slot(self, node: BlindNode) -> int:
        if node.index not in self.leaf_ids:
            self.leaf_ids[node.index] = len(self.leaf_list)
            self.leaf_list.append(node)
        return self.leaf_ids[node.index]

    def _prune_emit(self, node: BlindNode, realized: np.ndarray):
        key = node.index + "!"
        if key not in self.leaf_ids:
            self.leaf_ids[key] = len(self.leaf_list)
            pruned = BlindNode(index=key, vec=np.zeros(2), theta=node.theta,
                               interval=node.interval, n_ones=node.n_ones,
                               status="ignored")
            self.leaf_list.append(pruned)
        self.coords.append(realized)
        self.leaf_of.append(self.leaf_ids[key])
        self.atoms += 1

    def _lift(self, u: np.ndarray) -> np.ndarray:
        v3 = np.array([u[0], u[1], 0.0])
        if self.q is None:
            # Translation atoms: w = i v.
            return np.array([-u[1], u[0], 0.0])
        return self.q @ v3

    def _emit(self, node: BlindNode, realized: np.ndarray):
        self.coords.append(realized)
        self.leaf_of.append(self._leaf_slot(node))
        self.atoms += 1
        if self.atoms > self.profile.atom_cap:
            raise BudgetInfeasible(
                f"atom count exceeded cap {self.profile.atom_cap}")

    def run(self):
        tree = self.tree
        root = tree.root
        x_root = self._lift(root.vec)
        stack = [("node", root.index, root.vec, x_root)]
        while stack:
            kind, idx, u, realized = stack.pop()
            node = tree.nodes[idx]
            if kind == "node":
                if node.status in ("kept", "ignored"):
                    self._emit(node, realized)
                    continue
                ulen = float(np.hypot(*u))
                if self.prune_len and ulen <= self.prune_len:
                    charge = ulen * tree.scene_h1
                    if (self.prune_spent + charge <= self.prune_budget
                            or not self.profile.prune_budget_hard):
                        self.prune_spent += charge
                        self.prune_count += 1
                        self._prune_emit(node, realized)
                        continue
                stack.append(("step1", idx, u, realized))
                continue
            # Blind step m of node idx acting on one copy.
            m = int(kind[4:])
            scale = np.hypot(*u) / max(node.h1, 1e-300)
            step = node.steps[m - 1]
            b = step.bad_vec * scale
            g = step.good_vec * scale
            n = self._fineness(node, m, b, u)
            xb = self._lift(b / n)
            if self.mode == "translation":
                y1 = self._lift(g / n)
                drift = 0.0
            else:
                limit = self._drift_limit(node, float(np.hypot(*g)))
                prescribed = self._lift(g)
                carry = realized - self._lift(u)
                if float(np.linalg.norm(carry)) > 0.75 * limit:
                    raise BudgetInfeasible(
                        f"inherited centre drift at node {idx} step {m} "
                        "leaves no headroom; increase fineness budgets")
                n_try = n
                while True:
                    y1_rot = star_solve_right(
                        rot_from_coords(realized / n_try),
                        rot_from_coords(self._lift(b / n_try)))
                    drift = float(np.linalg.norm(
                        y1_rot.coords() * n_try - prescribed))
                    if drift <= limit or n_try >= FINENESS_CAP:
                        break
                    n_try *= 2
                if drift > limit:
                    raise BudgetInfeasible("drift budget infeasible at "
                                           f"node {idx} step {m}")
                n = n_try
                xb = self._lift(b / n)
                y1 = y1_rot.coords()
                if len(self.center_rows) < 50000:
                    self.center_rows.append(
                        (idx, m, y1_rot.coords() * n_try, prescribed))
            self.records.append((idx, m, n, drift))
            self.max_drift = max(self.max_drift, drift)
            nxt = ("node", idx + "1") if m == node.k else (f"step{m + 1}", idx)
            frames = []
            for _ in range(n):
                frames.append(("node", idx + "0", b / n, xb))
                if nxt[0] == "node":
                    frames.append(("node", idx + "1", g / n, y1))
                else:
                    frames.append((nxt[0], idx, g / n, y1))
            stack.extend(reversed(frames))
        return self._finish()

    def _fineness(self, node: BlindNode, m: int, b: np.ndarray,
                  u: np.ndarray) -> int:
        if node.index == "":
            base = 1
        else:
            eta = self.profile.eta0 * 2.0 ** (-node.depth)
            ang = dir_distance(math.atan2(b[1], b[0]),
                               math.atan2(u[1], u[0]))
            raw = float(np.hypot(*b)) * math.sin(min(ang, HALF_PI))
            base = fineness_controller(raw, eta,
                                       cap=self.profile.fineness_step_cap)
        return base * self.profile.fineness_multiplier

    def _drift_limit(self, node: BlindNode, g_norm: float) -> float:
        # A drift ball of radius r around a motion of size |x| projects onto
        # a centre ball of angular radius arcsin(r/|x|); that cap must stay
        # inside both the bracket ball and the line strip.
        ang = min(2.0 * node.gamma, self.eps if self.eps > 0 else HALF_PI,
                  HALF_PI * 0.9)
        return max(g_norm * math.sin(ang) * 0.5, 1e-14)

    def _finish(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        leaf_idx = np.asarray(self.leaf_of, dtype=np.int64)
        return coords, leaf_idx, self.leaf_list, self.records


# ---------------------------------------------------------------------------
# Plan builders
# ---------------------------------------------------------------------------

def _resolve_profile(profile: PlanProfile | None, scale: float,
                     scene_h1: float, eps: float) -> PlanProfile:
    """Fill scale-dependent defaults without mutating the caller's profile."""
    import dataclasses
    prof = dataclasses.replace(profile) if profile else PlanProfile()
    if prof.eta0 is None:
        prof.eta0 = prof.eta_rel * scale
    if prof.prune_len is None:
        prof.prune_len = min(0.01 * scale,
                             0.25 * prof.ignore_frac * eps / max(scene_h1, 1e-12))
    return prof


def _scene_slab_mass(scene):
    """Callable (a, b) -> scene mass with tangents in the bracket [a, b]."""
    dirs = scene.seg_dir
    lens = scene.seg_len

    def mass(a: float, b: float) -> float:
        iv = DirInterval.bracket(a, b)
        return float(lens[iv.contains(dirs)].sum())

    return mass


def _closure_fix_translation(coords: np.ndarray, target: np.ndarray):
    """Adjust the last atom so the w-sums match the target bitwise."""
    want = np.array([-target[1], target[0], 0.0])
    for _ in range(4):
        gap = want - coords.sum(axis=0)
        if not np.any(gap):
            break
        coords[-1] += gap
    return coords


def _check_keep_cover(node: BlindNode, eps: float):
    gap = PI - node.interval.length
    if node.interval.is_full:
        return
    c = node.interval.complement_center()
    slack = eps - gap / 2.0 - dir_distance(node.theta_del, c)
    assert slack > 0, f"deletion ball fails to cover the gap at {node.index}"


def _adjust_theta_del(node: BlindNode, eps: float, avoid: float | None):
    """Shift the deletion centre away from ``avoid`` while still covering
    the interval gap."""
    if avoid is None or node.interval.is_full:
        return
    gap = PI - node.interval.length
    slack = eps - gap / 2.0
    if slack <= 1e-12:
        return
    c = node.interval.complement_center()
    if dir_distance(node.theta_del, avoid) > eps:
        return
    for s in (slack * 0.95, -slack * 0.95, slack * 0.5, -slack * 0.5):
        cand = float(wrap_direction(c + s))
        if dir_distance(cand, avoid) > eps:
            node.theta_del = cand
            return


def build_translation_plan(scene, target, eps: float,
                           profile: PlanProfile | None = None) -> MotionPlan:
    """Polygonal translation plan from the origin to ``target``.

    The atom vectors sum to the target exactly; every kept leaf carries a
    tangent deletion ball whose complement lies inside the leaf interval.
    The meta dict reports the certified budget ledger; the raster oracle is
    the authority on the area actually swept.
    """
    profile = _resolve_profile(profile, np.hypot(*np.asarray(target, float)),
                               scene.total_length, eps)
    target = np.asarray(target, dtype=float)
    if not np.any(target != 0):
        raise ValueError("target must be nonzero")
    if eps <= 0:
        raise ValueError("eps must be positive")
    h_e = scene.total_length

    if profile.trivial and h_e * float(np.hypot(*target)) <= eps:
        leaf = PlanLeaf(index="", kept=False, eps=eps,
                        h1=float(np.hypot(*target)))
        coords = np.array([[-target[1], target[0], 0.0]])
        return MotionPlan(mode="translation", coords=coords,
                          leaf_idx=np.zeros(1, dtype=np.int64),
                          leaves=[leaf], eps=eps,
                          meta={"trivial": True,
                                "certified": {"wholesale": h_e * float(
                                    np.hypot(*target))}})

    tree = grow_tree(target, eps, h_e, profile)
    realizer = _Realizer(tree, profile, "translation")
    coords, leaf_idx, leaf_nodes, records = realizer.run()
    coords = _closure_fix_translation(coords, target)

    leaves = []
    for node in leaf_nodes:
        if node.status == "kept":
            _check_keep_cover(node, eps)
        leaves.append(PlanLeaf(index=node.index, kept=node.status == "kept",
                               eps=eps, theta_del=node.theta_del,
                               h1=node.h1))
    budget = certified_budget(tree, _scene_slab_mass(scene))
    budget["prune_spent"] = realizer.prune_spent
    budget["certified_total"] += realizer.prune_spent
    n_by_step = np.array([r[2] for r in records]) if records else np.zeros(1)
    meta = {
        "trivial": False,
        "certified": budget,
        "tree_nodes": len(tree.nodes),
        "kept_leaves": sum(1 for n in leaf_nodes if n.status == "kept"),
        "ignored_leaves": sum(1 for n in leaf_nodes if n.status == "ignored"),
        "ignored_h1": float(sum(n.h1 for n in leaf_nodes
                                if n.status == "ignored")),
        "pruned_copies": realizer.prune_count,
        "fineness_max": int(n_by_step.max()),
        "zigzag_steps": len(records),
    }
    return MotionPlan(mode="translation", coords=coords, leaf_idx=leaf_idx,
                      leaves=leaves, eps=eps, meta=meta)


def lift_rotation_Q(v, x: Rot, line: ProjLine) -> np.ndarray:
    """Orthogonal orientation-preserving map of 3-space taking (v, 0) to x
    and the translation plane onto the plane of ``line``."""
    v = np.asarray(v, dtype=float)
    v3 = np.array([v[0], v[1], 0.0])
    xc = x.coords()
    nv, nx = np.linalg.norm(v3), np.linalg.norm(xc)
    if nv == 0 or nx == 0:
        raise ValueError("degenerate inputs")
    if abs(nv - nx) > 1e-9 * max(nv, nx):
        raise ValueError("|v| must equal |x| for an orthogonal lift")
    if proj_point_line_distance(projective_center(x), line) > 1e-9:
        raise ValueError("line must pass through the projective centre of x")
    s1 = v3 / nv
    s3 = np.array([0.0, 0.0, 1.0])
    s2 = np.cross(s3, s1)
    t1 = xc / nx
    t3 = line.n.copy()
    # Numerical guard: force exact orthogonality.
    t1 = t1 - t3 * float(np.dot(t1, t3))
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(t3, t1)
    q = np.column_stack([t1, t2, t3]) @ np.column_stack([s1, s2, s3]).T
    return q


def build_rotation_plan(scene, x: Rot, line: ProjLine, eps: float,
                        profile: PlanProfile | None = None) -> MotionPlan:
    """Intrinsic rotation plan from the identity to the motion x.

    Every atom's projective centre stays within ``eps`` of ``line``; kept
    leaves carry a deletion ball around a point of the line, and points of
    the scene survive a leaf when their normal line misses that ball.
    """
    if x.is_identity:
        raise ValueError("target motion must not be the identity")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if proj_point_line_distance(projective_center(x), line) > 1e-9:
        raise ValueError("line must pass through the projective centre of x")
    h_e = scene.total_length
    norm = x.norm()
    profile = _resolve_profile(profile, norm, h_e, eps)
    v = np.array([norm, 0.0])
    q = lift_rotation_Q(v, x, line)

    tree = grow_tree(v, eps, h_e, profile)
    realizer = _Realizer(tree, profile, "rotation", q_map=q, eps=eps)
    coords, leaf_idx, leaf_nodes, records = realizer.run()

    leaves = []
    for node in leaf_nodes:
        if node.status == "kept":
            if profile.enforce_center_exclusion:
                _adjust_theta_del(node, eps, avoid=0.0)
            _check_keep_cover(node, eps)
            u = ProjPoint(q @ dir_to_infinite(node.theta_del).h)
        else:
            u = None
        leaves.append(PlanLeaf(index=node.index, kept=node.status == "kept",
                               eps=eps, theta_del=node.theta_del, u_del=u,
                               h1=node.h1))

    # Centre checks: realized vs prescribed centres and the line strip.
    strip = _line_strip_distances(coords, line)
    drift_rows = []
    max_ball = 0.0
    for idx, m, realized, prescribed in realizer.center_rows:
        zt = ProjPoint(realized)
        zp = ProjPoint(prescribed)
        d = proj_distance(zt, zp)
        lim = 2.0 * tree.nodes[idx].gamma
        max_ball = max(max_ball, d - lim)
        if len(drift_rows) < 10000:
            drift_rows.append({"node": idx, "step": m, "dist": d,
                               "limit": lim,
                               "line_dist": proj_point_line_distance(
                                   zt, line)})
    budget = certified_budget(tree, _scene_slab_mass(scene))
    budget["prune_spent"] = realizer.prune_spent
    budget["certified_total"] += realizer.prune_spent
    meta = {
        "certified": budget,
        "tree_nodes": len(tree.nodes),
        "kept_leaves": sum(1 for n in leaf_nodes if n.status == "kept"),
        "ignored_leaves": sum(1 for n in leaf_nodes if n.status == "ignored"),
        "pruned_copies": realizer.prune_count,
        "max_center_strip_dist": float(strip.max()) if len(strip) else 0.0,
        "max_ball_excess": max_ball,
        "max_drift": realizer.max_drift,
        "drift_table": drift_rows,
        "zigzag_steps": len(records),
    }
    plan = MotionPlan(mode="rotation", coords=coords, leaf_idx=leaf_idx,
                      leaves=leaves, eps=eps, line=line, meta=meta)
    return plan


def _line_strip_distances(coords: np.ndarray, line: ProjLine) -> np.ndarray:
    norms = np.linalg.norm(coords, axis=1)
    ok = norms > 0
    unit = coords[ok] / norms[ok, None]
    return np.arcsin(np.minimum(1.0, np.abs(unit @ line.n)))
