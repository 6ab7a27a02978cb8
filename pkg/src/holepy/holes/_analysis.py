"""Hole measurement, classification, and segmentation at fracture margins."""

from dataclasses import dataclass
from enum import Enum
import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from scipy.spatial.distance import pdist
from shapely.geometry import LineString, Polygon

from holepy.mesh._mesh import BoundaryLoop, TriangleMesh, face_normal, vertex_normal
from holepy.utilities._errors import DegenerateFace, InvalidChord, ZeroVector
from holepy.utilities._geometry import best_fit_plane, plane_residual, unit
from holepy.utilities._util import cyclic_pairs

logger = logging.getLogger(__name__)

# relative tolerance under which two fracture candidates are equally sharp
SHARPNESS_TIE = 1e-9


class HoleClass(Enum):
    """Size class of a hole, relative to its boundary edge length."""

    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"

    @property
    def method(self) -> str:
        """Name of the fill strategy applied to this class."""
        return {
            HoleClass.SMALL: "direct",
            HoleClass.MEDIUM: "centroid",
            HoleClass.LARGE: "segmented-ring",
        }[self]


@dataclass(frozen=True)
class LocalFrame:
    """
    Orthonormal frame attached to a hole.

    ``n`` is the normal of the best-fit plane of the hole boundary,
    ``u`` its principal in-plane direction and ``v = n x u``. Local
    coordinates are (a, b, h): a and b in the plane, h the height
    along n.
    """

    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    n: np.ndarray

    @property
    def axes(self) -> np.ndarray:
        """(3, 3) array with rows u, v and n."""
        return np.vstack([self.u, self.v, self.n])

    def to_local(self, points: np.ndarray) -> np.ndarray:
        """World points to (a, b, h) coordinates."""
        return (np.asarray(points, dtype=float) - self.origin) @ self.axes.T

    def to_world(self, local: np.ndarray) -> np.ndarray:
        """(a, b, h) coordinates to world points."""
        return self.origin + np.asarray(local, dtype=float) @ self.axes

    def project(self, points: np.ndarray) -> np.ndarray:
        """In-plane (a, b) coordinates of world points."""
        return self.to_local(points)[..., :2]

    def heights(self, points: np.ndarray) -> np.ndarray:
        """Height of world points above the frame plane."""
        return self.to_local(points)[..., 2]


@dataclass(frozen=True)
class Hole:
    """
    A hole boundary with the quantities used to decide how to fill it.

    Vertex ids are mesh vertex indices. Sub-holes produced by
    segment_hole may contain negative ids, which stand for points on a
    segmentation line that are not yet part of the mesh.

    :param loop: The boundary ring.
    :type loop: BoundaryLoop
    :param points: (k, 3) coordinates of the ring vertices.
    :type points: numpy.ndarray
    :param ds: Mean boundary edge length.
    :type ds: float
    :param diameter: Largest distance between two boundary points (d_H).
    :type diameter: float
    :param boundary_normals: (k, 3) unit normals, one per ring vertex.
    :type boundary_normals: numpy.ndarray
    :param frame: Local frame of the hole.
    :type frame: LocalFrame
    """

    loop: BoundaryLoop
    points: np.ndarray
    ds: float
    diameter: float
    boundary_normals: np.ndarray
    frame: LocalFrame

    def __len__(self) -> int:
        return len(self.loop)

    @property
    def vertex_ids(self) -> Tuple[int, ...]:
        """Vertex ids of the ring, in order."""
        return self.loop.vertex_indices

    @property
    def edge_lengths(self) -> np.ndarray:
        """Length of each ring edge, edge i running from vertex i to i + 1."""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    @property
    def planarity(self) -> float:
        """RMS distance of the ring from its best-fit plane."""
        return plane_residual(self.points)

    def project(self) -> np.ndarray:
        """(k, 2) in-plane coordinates of the ring."""
        return self.frame.project(self.points)

    def polygon(self) -> Polygon:
        """The ring projected into its frame plane, as a shapely polygon."""
        return Polygon(self.project())

    def position(self, vertex: int) -> int:
        """Position of a vertex id along the ring."""
        try:
            return self.loop.vertex_indices.index(vertex)
        except ValueError as err:
            raise ValueError(f"Vertex {vertex} is not on this hole") from err

    def relabel(self, mapping: Dict[int, int]) -> "Hole":
        """The same hole with vertex ids replaced through mapping."""
        ids = tuple(mapping.get(v, v) for v in self.vertex_ids)
        return Hole(
            BoundaryLoop(ids),
            self.points,
            self.ds,
            self.diameter,
            self.boundary_normals,
            self.frame,
        )


@dataclass(frozen=True)
class SegmentationLine:
    """
    A chord between two fracture points, split into segmentation
    points spaced close to the boundary edge length.

    :param endpoints: The two boundary vertex ids joined by the chord.
    :type endpoints: Tuple[int, int]
    :param inserted_points: (m, 3) points strictly inside the chord,
        ordered from the first endpoint to the second.
    :type inserted_points: numpy.ndarray
    :param placeholder_ids: Negative ids standing for the inserted
        points in the sub-hole loops.
    :type placeholder_ids: Tuple[int]
    :param endpoint_points: (2, 3) coordinates of the two endpoints.
    :type endpoint_points: numpy.ndarray or None
    """

    endpoints: Tuple[int, int]
    inserted_points: np.ndarray
    placeholder_ids: Tuple[int, ...] = ()
    endpoint_points: Optional[np.ndarray] = None

    @property
    def polyline(self) -> np.ndarray:
        """Endpoints and inserted points in order along the chord."""
        if self.endpoint_points is None:
            raise ValueError("Endpoint coordinates are not known")
        return np.vstack(
            [self.endpoint_points[0], self.inserted_points, self.endpoint_points[1]]
        )

    @property
    def spacing(self) -> np.ndarray:
        """Distances between consecutive points along the chord."""
        return np.linalg.norm(np.diff(self.polyline, axis=0), axis=1)


def analyze_hole(mesh: TriangleMesh, loop: BoundaryLoop) -> Hole:
    """Measures a boundary loop of a mesh.

    The normal attached to each boundary point is the normal of the
    boundary triangle on its outgoing loop edge, so adjacent normals
    differ exactly where the ring crosses a crease.

    :param mesh: The mesh the loop belongs to.
    :type mesh: TriangleMesh
    :param loop: A boundary loop of mesh.
    :type loop: BoundaryLoop
    :return: The hole, with ds, diameter, normals and local frame.
    :rtype: Hole
    """
    ids = list(loop.vertex_indices)
    normals = np.empty((len(ids), 3))
    for position, (a, b) in enumerate(cyclic_pairs(ids)):
        faces = mesh.incident_faces(a, b)
        if len(faces) != 1:
            raise ValueError(f"({a}, {b}) is not a boundary edge of the mesh")
        try:
            normals[position] = face_normal(mesh, faces[0])
        except DegenerateFace:
            normals[position] = vertex_normal(mesh, a)
    return analyze_points(ids, mesh.vertices[ids], normals)


def analyze_points(
    vertex_ids: Sequence[int], points: np.ndarray, normals: np.ndarray
) -> Hole:
    """Builds a Hole from a ring of ids, coordinates and unit normals."""
    points = np.array(points, dtype=np.float64)
    normals = np.array(normals, dtype=np.float64)
    lengths = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
    ds = float(lengths.mean())
    if not ds > 0:
        raise ValueError("A hole needs boundary edges of non-zero length")
    diameter = float(pdist(points).max())

    origin, principal, normal = best_fit_plane(points)
    reference = normals.sum(axis=0)
    if np.dot(normal, reference) < 0:
        normal = -normal
    u = unit(principal - np.dot(principal, normal) * normal)
    v = np.cross(normal, u)
    frame = LocalFrame(origin, u, v, normal)
    return Hole(BoundaryLoop(tuple(int(i) for i in vertex_ids)), points, ds, diameter, normals, frame)


def classify_size(
    ds: float,
    diameter: float,
    small_factor: float = 1.5,
    medium_factor: float = 2.5,
) -> HoleClass:
    """Size class from a boundary edge length and a hole diameter.
    Both bounds of the medium class are inclusive."""
    if not ds > 0:
        raise ValueError(f"ds must be positive, got {ds}")
    if diameter < small_factor * ds:
        return HoleClass.SMALL
    if diameter <= medium_factor * ds:
        return HoleClass.MEDIUM
    return HoleClass.LARGE


def classify_hole(
    hole: Hole, small_factor: float = 1.5, medium_factor: float = 2.5
) -> HoleClass:
    """Classifies a hole as small, medium or large.

    :param hole: The hole to classify.
    :type hole: Hole
    :param small_factor: d_H below small_factor * ds is small.
    :type small_factor: float
    :param medium_factor: d_H up to medium_factor * ds is medium.
    :type medium_factor: float
    :rtype: HoleClass
    """
    return classify_size(hole.ds, hole.diameter, small_factor, medium_factor)


def normal_angle_cos(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    :raises ZeroVector: when either vector has zero length
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("Cannot measure an angle against a zero vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def detect_fracture_points(hole: Hole, cos_threshold: float = 0.7) -> List[int]:
    """Finds boundary points where the surface turns sharply.

    A point is flagged when its normal makes a cosine below
    cos_threshold with the normal of either ring neighbour. Runs of
    consecutive flagged points are reduced to their sharpest point.

    :return: Vertex ids of the fracture points, in ring order.
    :rtype: List[int]
    """
    positions = _fracture_positions(hole, cos_threshold)
    return [hole.vertex_ids[p] for p in positions]


def _fracture_positions(hole: Hole, cos_threshold: float) -> List[int]:
    normals = hole.boundary_normals
    count = len(normals)
    cos_prev = np.array(
        [normal_angle_cos(normals[i], normals[i - 1]) for i in range(count)]
    )
    cos_next = np.roll(cos_prev, -1)
    sharpness = np.minimum(cos_prev, cos_next)
    flagged = sharpness < cos_threshold
    if not flagged.any():
        return []

    if flagged.all():
        runs = [list(range(count))]
    else:
        start = int(np.argmin(flagged))
        runs, current = [], []
        for offset in range(1, count + 1):
            position = (start + offset) % count
            if flagged[position]:
                current.append(position)
            elif current:
                runs.append(current)
                current = []
        if current:
            runs.append(current)

    chosen = []
    for run in runs:
        sharpest = min(sharpness[p] for p in run)
        ties = [p for p in run if sharpness[p] <= sharpest + SHARPNESS_TIE]
        # the turn happens at the point whose incoming normal differs most
        chosen.append(min(ties, key=lambda p: (cos_prev[p], p)))
    if len(chosen) < int(flagged.sum()):
        logger.debug("Collapsed %d flagged points to %d", int(flagged.sum()), len(chosen))
    return sorted(chosen)


def pair_fracture_points(
    hole: Hole, fracture_points: Sequence[int]
) -> List[Tuple[int, int]]:
    """Joins fracture points into segmentation chords.

    Candidate pairs are taken nearest first. A pair is accepted when
    its points are not neighbours on the ring, its chord stays inside
    the ring projected into the hole's frame plane, and the chord does
    not cross a chord accepted earlier. Points left over are dropped.

    :return: Pairs of vertex ids, each pair ordered along the ring.
    :rtype: List[Tuple[int, int]]
    """
    if len(fracture_points) < 2:
        return []
    polygon = hole.polygon()
    if not polygon.is_valid:
        logger.warning("Hole projection is self-intersecting; not segmenting")
        return []
    flat = hole.project()
    count = len(hole)
    positions = sorted(hole.position(v) for v in fracture_points)

    candidates = []
    for i, j in itertools.combinations(positions, 2):
        gap = j - i
        if gap == 1 or gap == count - 1:
            continue
        distance = float(np.linalg.norm(hole.points[i] - hole.points[j]))
        candidates.append((distance, i, j))
    candidates.sort()

    used, chords, pairs = set(), [], []
    for _, i, j in candidates:
        if i in used or j in used:
            continue
        chord = LineString([flat[i], flat[j]])
        if not _chord_inside(polygon, flat, i, j):
            continue
        if any(chord.intersects(other) for other in chords):
            continue
        used.update((i, j))
        chords.append(chord)
        pairs.append((hole.vertex_ids[i], hole.vertex_ids[j]))
    leftovers = len(positions) - 2 * len(pairs)
    if leftovers:
        logger.warning("%d fracture points could not be paired", leftovers)
    return pairs


def segment_hole(
    hole: Hole, pairs: Sequence[Tuple[int, int]]
) -> Tuple[List[Hole], List[SegmentationLine]]:
    """Splits a hole along chords between paired fracture points.

    Each chord of length L receives ceil(L / ds) - 1 evenly spaced
    points. Their in-plane position is interpolated between the
    endpoints and their height is the mean of the endpoint heights.
    The inserted points carry negative placeholder ids, shared by the
    two sub-holes on either side of the chord.

    :raises InvalidChord: when a chord leaves the projected hole, or
        joins points that are missing from the ring or adjacent on it,
        or crosses a chord listed before it
    """
    if not pairs:
        return [hole], []

    flat = hole.project()
    polygon = hole.polygon()
    local = hole.frame.to_local(hole.points)
    count = len(hole)
    lines: List[SegmentationLine] = []
    next_id = -1

    coords: Dict[int, np.ndarray] = dict(zip(hole.vertex_ids, hole.points))
    normal_of: Dict[int, np.ndarray] = dict(zip(hole.vertex_ids, hole.boundary_normals))
    pieces: List[List[int]] = [list(hole.vertex_ids)]

    for a, b in pairs:
        try:
            i, j = hole.position(a), hole.position(b)
        except ValueError as err:
            raise InvalidChord(str(err)) from err
        if abs(i - j) in (0, 1, count - 1):
            raise InvalidChord(f"Vertices {a} and {b} are neighbours on the ring")
        if not _chord_inside(polygon, flat, i, j):
            raise InvalidChord(f"Chord {a}-{b} leaves the hole")

        length = float(np.linalg.norm(hole.points[i] - hole.points[j]))
        inserted = max(math.ceil(length / hole.ds) - 1, 0)
        fractions = np.arange(1, inserted + 1) / (inserted + 1)
        in_plane = local[i, :2] + fractions[:, None] * (local[j, :2] - local[i, :2])
        height = 0.5 * (local[i, 2] + local[j, 2])
        seg_local = np.column_stack([in_plane, np.full(inserted, height)])
        seg_points = hole.frame.to_world(seg_local).reshape(-1, 3)
        ids = tuple(range(next_id, next_id - inserted, -1))
        next_id -= inserted
        for pid, point in zip(ids, seg_points):
            coords[pid] = point
            normal_of[pid] = hole.frame.n
        line = SegmentationLine(
            (a, b), seg_points, ids, np.vstack([hole.points[i], hole.points[j]])
        )
        lines.append(line)

        owner = next(
            (k for k, piece in enumerate(pieces) if a in piece and b in piece), None
        )
        if owner is None:
            raise InvalidChord(f"Chord {a}-{b} crosses an earlier chord")
        pieces[owner: owner + 1] = _split_ring(pieces[owner], a, b, list(ids))

    sub_holes = [
        analyze_points(
            piece,
            np.array([coords[v] for v in piece]),
            np.array([normal_of[v] for v in piece]),
        )
        for piece in pieces
    ]
    logger.debug(
        "Segmented hole of %d points into %d sub-holes", count, len(sub_holes)
    )
    return sub_holes, lines


def _split_ring(ring: List[int], a: int, b: int, chord: List[int]) -> List[List[int]]:
    """Cuts a ring along a chord a -> chord -> b. Both pieces keep the
    traversal direction of the ring."""
    i = ring.index(a)
    rotated = ring[i:] + ring[:i]
    k = rotated.index(b)
    first = rotated[: k + 1] + chord[::-1]
    second = rotated[k:] + [a] + chord
    return [first, second]


def _chord_inside(polygon: Polygon, flat: np.ndarray, i: int, j: int) -> bool:
    """Whether the open chord between ring points i and j lies in the
    interior of the polygon and touches no other ring point."""
    start, end = flat[i], flat[j]
    span = end - start
    if not np.linalg.norm(span) > 0:
        return False
    margin = 1e-6
    inner = LineString([start + margin * span, end - margin * span])
    if not polygon.contains_properly(inner):
        return False
    others = np.delete(flat, [i, j], axis=0)
    if len(others) == 0:
        return True
    # distance of the other ring points to the chord segment
    t = np.clip((others - start) @ span / (span @ span), 0.0, 1.0)
    gaps = np.linalg.norm(others - (start + t[:, None] * span), axis=1)
    return bool(gaps.min() > 1e-9 * np.linalg.norm(span))
