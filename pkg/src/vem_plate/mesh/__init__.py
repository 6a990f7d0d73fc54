from .core import (
    DegenerateElementError,
    ElementGeometry,
    MeshError,
    PolygonMesh,
    Tag,
    build_mesh,
    build_mesh_with_tags,
    element_geometry,
)
from .generators import FAMILIES, LSHAPE_CORNER, generate_mesh, lshape_plate_tags, refine_corner
from .io import MeshParseError, read_mesh, write_mesh
from .regularity import RegularityReport, check_regularity, kernel_ball

__all__ = [
    "DegenerateElementError",
    "ElementGeometry",
    "FAMILIES",
    "LSHAPE_CORNER",
    "MeshError",
    "MeshParseError",
    "PolygonMesh",
    "RegularityReport",
    "Tag",
    "build_mesh",
    "build_mesh_with_tags",
    "check_regularity",
    "element_geometry",
    "generate_mesh",
    "kernel_ball",
    "lshape_plate_tags",
    "read_mesh",
    "refine_corner",
    "write_mesh",
]
