"""
holepy
======

holepy is a python package for finding, filling and measuring holes in
triangle meshes. Large holes are split at their fracture margins and
filled ring by ring; results are compared against the intact surface
with sampled Hausdorff distances.

See documentation for more information.

"""

__version__ = "0.1.0"

from holepy.bezier._bezier import (
    BezierCurve,
    BezierSurface,
    bernstein,
    curve_eval,
    surface_eval,
)
from holepy.harness._benchmark import run_benchmark, write_table
from holepy.harness._punch import PunchMode, PunchRecord, PunchSpec, default_punch, punch
from holepy.harness._shapes import ShapeKind, SyntheticShape, generate
from holepy.holes._analysis import (
    Hole,
    HoleClass,
    LocalFrame,
    SegmentationLine,
    analyze_hole,
    classify_hole,
    detect_fracture_points,
    pair_fracture_points,
    segment_hole,
)
from holepy.holes._fill import (
    FillMethod,
    FillRecord,
    FillReport,
    fill_all_holes,
    fill_baseline_closehole,
    fill_large,
    fill_medium,
    fill_small,
)
from holepy.mesh._io import MeshFileFormat, read_mesh, write_mesh
from holepy.mesh._mesh import (
    BoundaryLoop,
    TriangleMesh,
    audit_mesh,
    boundary_edges,
    boundary_loops,
    build_mesh,
    euler_characteristic,
    face_normal,
    vertex_normal,
)
from holepy.metrics._distance import (
    DistanceReport,
    SamplingMode,
    SamplingSpec,
    TriangleIndex,
    hausdorff_report,
    one_sided_distance,
    point_triangle_distance,
)
from holepy.utilities._config import RunConfig
from holepy.utilities._errors import (
    DegenerateBoundary,
    DegenerateFace,
    DomainError,
    DuplicateFace,
    EarClipFailure,
    EmptyMesh,
    FrontCollapse,
    HolepyError,
    IndexOutOfRange,
    InvalidChord,
    NonManifoldEdge,
    ParseError,
    PunchBreaksManifold,
    UnsupportedElement,
    ZeroVector,
)
