"""Motion planning that sweeps arbitrarily small area.

Tools for moving planar polyline scenes along polygonal paths of rigid
motions while a small tangent (or normal) slab is deleted at each step, plus
an occupancy-grid oracle that certifies the area actually covered.
"""

from .geometry import (
    DirInterval,
    LINE_AT_INFINITY,
    ProjLine,
    ProjPoint,
    dir_distance,
    dir_to_infinite,
    line_ball_hit,
    line_intersection,
    line_through,
    normal_line,
    proj_distance,
    proj_embed,
    proj_point_line_distance,
    wrap_direction,
)
from .motions import (
    IDENTITY_ISO,
    IDENTITY_ROT,
    Isometry,
    MotionSegment,
    Rot,
    projective_center,
    realize_path,
    rot_from_center,
    rot_translation,
    star,
    star_fold,
    star_linearity_gap,
    star_solve_right,
    zigzag_split,
)
from .plans import MotionPlan, PlanLeaf
from .scenes import (
    Scene,
    circle,
    convex_graph,
    scene_normal_slab,
    scene_slab,
    scene_tangents,
    segment,
)
from .raster import (
    AreaReport,
    RasterGrid,
    sweep_area,
    sweep_grid,
    translation_plan,
    trivial_sweep_bound,
    verify_normal_ball_sweep,
    verify_small_neighborhood,
    verify_tangent_slab_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
