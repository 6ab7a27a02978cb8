"""Advancing front rings and the height fields that shape them."""

from dataclasses import dataclass
import logging
from typing import List, Optional, Tuple
import numpy as np
from scipy.spatial.distance import pdist
from shapely.geometry import LinearRing, Polygon

from holepy.holes._analysis import Hole, LocalFrame
from holepy.mesh._mesh import TriangleMesh, face_normals
from holepy.utilities._errors import FrontCollapse
from holepy.utilities._geometry import signed_area_2d

logger = logging.getLogger(__name__)

# a full quadratic needs 6 coefficients, fitting one from fewer
# samples than this is unreliable
QUADRATIC_MIN_POINTS = 12


@dataclass(frozen=True)
class HeightField:
    """
    Polynomial height h(a, b) over the plane of a local frame.

    :param frame: The frame whose (a, b) coordinates the field uses.
    :type frame: LocalFrame
    :param coefficients: Coefficients of 1, a, b, a^2, ab, b^2. Missing
        trailing terms are zero.
    :type coefficients: numpy.ndarray
    """

    frame: LocalFrame
    coefficients: np.ndarray

    def __call__(self, flat: np.ndarray) -> np.ndarray:
        flat = np.atleast_2d(flat)
        return _design(flat, len(self.coefficients)) @ self.coefficients

    @property
    def degree(self) -> int:
        """1 for a plane, 2 for a quadric."""
        return 2 if len(self.coefficients) > 3 else 1

    def lift(self, flat: np.ndarray) -> np.ndarray:
        """World points on the field above the given (a, b) coordinates."""
        flat = np.atleast_2d(flat)
        return self.frame.to_world(np.column_stack([flat, self(flat)]))


@dataclass(frozen=True)
class FrontRing:
    """
    The current ring of an advancing front.

    Generation 0 is the boundary of the (sub-)hole itself. Every ring
    is closed, simple in its frame projection, and traversed in the
    same direction as the hole boundary.

    :param vertex_ids: Mesh vertex ids of the ring, in order.
    :type vertex_ids: Tuple[int]
    :param origin_hole: The hole the front is filling.
    :type origin_hole: Hole
    :param generation: Number of advances made so far.
    :type generation: int
    """

    vertex_ids: Tuple[int, ...]
    origin_hole: Hole
    generation: int = 0

    def __len__(self) -> int:
        return len(self.vertex_ids)

    @property
    def frame(self) -> LocalFrame:
        """Local frame of the originating hole."""
        return self.origin_hole.frame

    def points(self, mesh: TriangleMesh) -> np.ndarray:
        """(k, 3) coordinates of the ring."""
        return mesh.vertices[list(self.vertex_ids)]

    def diameter(self, mesh: TriangleMesh) -> float:
        """Largest distance between two ring points."""
        return float(pdist(self.points(mesh)).max())


def initial_front(hole: Hole) -> FrontRing:
    """Generation 0 front of a hole whose ids all exist in the mesh."""
    if min(hole.vertex_ids) < 0:
        raise ValueError("Segmentation points must be added to the mesh first")
    return FrontRing(hole.vertex_ids, hole, 0)


def fit_height_field(
    mesh: TriangleMesh,
    hole: Hole,
    min_cos: float = 0.7,
    frame: Optional[LocalFrame] = None,
) -> HeightField:
    """Fits the surface around a hole as a height field.

    Samples are the hole boundary plus the neighbours of its boundary
    vertices that lie on faces turned towards the frame normal
    (normal . n >= min_cos), so surface across a crease is ignored.
    A quadric is fitted when there are enough samples, a plane
    otherwise.
    """
    frame = hole.frame if frame is None else frame
    samples = {v for v in hole.vertex_ids if v >= 0}
    normals = face_normals(mesh)
    for vertex in hole.vertex_ids:
        if vertex < 0:
            continue
        for face in mesh.vertex_faces(vertex):
            if np.dot(normals[face], frame.n) >= min_cos:
                samples.update(mesh.faces[face].tolist())
    sample_points = mesh.vertices[sorted(samples)]
    extra = [p for v, p in zip(hole.vertex_ids, hole.points) if v < 0]
    if extra:
        sample_points = np.vstack([sample_points, extra])

    local = frame.to_local(sample_points)
    terms = 6 if len(local) >= QUADRATIC_MIN_POINTS else 3
    terms = min(terms, len(local))
    design = _design(local[:, :2], terms)
    coefficients, *_ = np.linalg.lstsq(design, local[:, 2], rcond=None)
    return HeightField(frame, coefficients)


def advance_ring(
    mesh: TriangleMesh,
    front: FrontRing,
    ds: float,
    merge_radius_factor: float = 0.5,
    height_field: Optional[HeightField] = None,
) -> FrontRing:
    """Grows the next ring of a front one spacing inward and stitches
    it to the current ring.

    Each ring point moves ds along the inward bisector of its two ring
    edges, in the frame plane. Consecutive new points closer than
    merge_radius_factor * ds are merged into their mean. New heights
    come from height_field when given, otherwise from the parent
    points. Every old ring edge is closed by one triangle, or by a
    quad cut along its shorter diagonal.

    Nothing is added to the mesh unless the new ring is valid.

    :raises FrontCollapse: when the new ring has fewer than 3 points,
        is not simple, leaves the current ring, or is not smaller
    """
    frame = front.frame
    old_points = front.points(mesh)
    local = frame.to_local(old_points)
    flat = local[:, :2]
    count = len(flat)
    orientation = 1.0 if signed_area_2d(flat) > 0 else -1.0

    edges = np.roll(flat, -1, axis=0) - flat
    lengths = np.linalg.norm(edges, axis=1)
    if not np.all(lengths > 0):
        raise FrontCollapse("Front ring has coincident points")
    # interior lies to the left of a counter-clockwise ring
    inward = orientation * np.column_stack([-edges[:, 1], edges[:, 0]]) / lengths[:, None]
    bisector = inward + np.roll(inward, 1, axis=0)
    norms = np.linalg.norm(bisector, axis=1)
    spikes = norms < 1e-12
    bisector[spikes] = inward[spikes]
    norms[spikes] = 1.0
    bisector /= norms[:, None]
    moved = flat + ds * bisector

    clusters = _merge_consecutive(moved, merge_radius_factor * ds)
    if len(clusters) < 3:
        raise FrontCollapse(f"Only {len(clusters)} points left after merging")
    new_flat = np.array([moved[members].mean(axis=0) for members in clusters])

    ring = LinearRing(new_flat)
    if not ring.is_simple:
        raise FrontCollapse("New ring intersects itself")
    if not Polygon(flat).contains(Polygon(new_flat)):
        raise FrontCollapse("New ring leaves the current ring")

    if height_field is not None:
        heights = height_field(new_flat)
    else:
        heights = np.array([local[members, 2].mean() for members in clusters])
    new_points = frame.to_world(np.column_stack([new_flat, heights]))
    if float(pdist(new_points).max()) >= float(pdist(old_points).max()):
        raise FrontCollapse("New ring is not smaller than the current ring")

    parent = np.empty(count, dtype=int)
    for index, members in enumerate(clusters):
        parent[members] = index
    triangles = _stitch(old_points, new_points, parent)

    new_ids = mesh.add_vertices(new_points)
    old_ids = list(front.vertex_ids)
    mesh.add_faces(
        [
            tuple(old_ids[k] if side == 0 else new_ids[k] for side, k in triangle)
            for triangle in triangles
        ]
    )
    logger.debug(
        "Front generation %d: %d -> %d points",
        front.generation + 1,
        count,
        len(new_ids),
    )
    return FrontRing(tuple(new_ids), front.origin_hole, front.generation + 1)


def _merge_consecutive(points: np.ndarray, radius: float) -> List[List[int]]:
    """Groups runs of consecutive points whose running mean stays within
    radius of the next point, wrapping the last group into the first."""
    clusters = [[0]]
    for index in range(1, len(points)):
        centre = points[clusters[-1]].mean(axis=0)
        if np.linalg.norm(points[index] - centre) < radius:
            clusters[-1].append(index)
        else:
            clusters.append([index])
    if len(clusters) > 1:
        head = points[clusters[0]].mean(axis=0)
        tail = points[clusters[-1]].mean(axis=0)
        if np.linalg.norm(head - tail) < radius:
            clusters[0] = clusters.pop() + clusters[0]
    return clusters


def _stitch(
    old_points: np.ndarray, new_points: np.ndarray, parent: np.ndarray
) -> List[Tuple[Tuple[int, int], ...]]:
    """Triangles between two rings as ((side, index), ...) triples,
    side 0 for the old ring and 1 for the new one."""
    count = len(old_points)
    triangles = []
    for i in range(count):
        j = (i + 1) % count
        ci, cj = parent[i], parent[j]
        if ci == cj:
            triangles.append(((0, i), (0, j), (1, ci)))
            continue
        diagonal_i = np.linalg.norm(old_points[i] - new_points[cj])
        diagonal_j = np.linalg.norm(old_points[j] - new_points[ci])
        if diagonal_i <= diagonal_j:
            triangles.append(((0, i), (0, j), (1, cj)))
            triangles.append(((0, i), (1, cj), (1, ci)))
        else:
            triangles.append(((0, i), (0, j), (1, ci)))
            triangles.append(((0, j), (1, cj), (1, ci)))
    return triangles


def _design(flat: np.ndarray, terms: int) -> np.ndarray:
    a, b = flat[:, 0], flat[:, 1]
    columns = [np.ones_like(a), a, b, a * a, a * b, b * b]
    return np.column_stack(columns[:terms])
