"""Forest-of-trees AMR on hexahedra, tetrahedra and pyramids."""

from .cmesh import CmeshError, CoarseMesh, cmesh_builtin, cmesh_from_spec, cmesh_load
from .elements import TreeShape, shape_kernel
from .forest import (
    COARSEN,
    KEEP,
    REFINE,
    Forest,
    forest_adapt,
    forest_checksum,
    forest_from_leaves,
    forest_new,
    forest_partition,
    forest_stats,
    uniform_bounds,
)
from .ghost import GhostLayer, forest_ghost
from .neighbors import FaceElement, NeighborResult
from .procgroup import run
from .sfc import L_MAX, PYRAMID_ROOT, TET_ROOT, DomainError, Element

__all__ = [
    "COARSEN",
    "KEEP",
    "L_MAX",
    "PYRAMID_ROOT",
    "REFINE",
    "TET_ROOT",
    "CmeshError",
    "CoarseMesh",
    "DomainError",
    "Element",
    "FaceElement",
    "Forest",
    "GhostLayer",
    "NeighborResult",
    "TreeShape",
    "cmesh_builtin",
    "cmesh_from_spec",
    "cmesh_load",
    "forest_adapt",
    "forest_checksum",
    "forest_from_leaves",
    "forest_ghost",
    "forest_new",
    "forest_partition",
    "forest_stats",
    "run",
    "shape_kernel",
    "uniform_bounds",
]
