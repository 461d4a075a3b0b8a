from .balls import (
    NormKind,
    PointPlus,
    Ball,
    SlabBounds,
    norm,
    diagonal_frame,
    ball_contains,
    minimizing_point,
    shadow_contains,
)
from .cone import ConeFrame, cone_rotate, cone_unrotate, bottom_point
from .polytope import (
    ConvexPolytope,
    Parallelepiped,
    FrameBox,
    chebyshev_center,
    support_ball_polytope,
    minimal_frame_box,
    minimal_parallelepiped,
    sample_ball_polytope,
    diamond_slice_measure,
)

__all__ = [
    "NormKind",
    "PointPlus",
    "Ball",
    "SlabBounds",
    "norm",
    "diagonal_frame",
    "ball_contains",
    "minimizing_point",
    "shadow_contains",
    "ConeFrame",
    "cone_rotate",
    "cone_unrotate",
    "bottom_point",
    "ConvexPolytope",
    "Parallelepiped",
    "FrameBox",
    "chebyshev_center",
    "support_ball_polytope",
    "minimal_frame_box",
    "minimal_parallelepiped",
    "sample_ball_polytope",
    "diamond_slice_measure",
]
