"""Filling holes: direct triangulation, centroid fans, and segmented
ring-advancing fills, with smoothing of the inserted points."""

from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple
import numpy as np
import pandas as pd
from scipy.interpolate import griddata

from holepy.bezier._bezier import BezierSurface, surface_eval
from holepy.holes._analysis import (
    Hole,
    HoleClass,
    LocalFrame,
    analyze_hole,
    analyze_points,
    classify_hole,
    classify_size,
    detect_fracture_points,
    pair_fracture_points,
    segment_hole,
)
from holepy.holes._front import (
    FrontRing,
    HeightField,
    advance_ring,
    fit_height_field,
    initial_front,
)
from holepy.mesh._mesh import TriangleMesh, boundary_loops, face_normal
from holepy.utilities._config import RunConfig
from holepy.utilities._errors import (
    DegenerateFace,
    EarClipFailure,
    FrontCollapse,
    HolepyError,
)
from holepy.utilities._geometry import cross_2d, point_in_triangle_2d, signed_area_2d
from holepy.utilities._util import cyclic_pairs, edge_key, stopwatch

logger = logging.getLogger(__name__)


class FillMethod(Enum):
    """Strategy used by fill_all_holes."""

    SEGMENTED_RING = "segmented-ring"
    CENTROID_ONLY = "centroid-only"
    BASELINE_CLOSEHOLE = "baseline-closehole"

    @classmethod
    def parse(cls, name: str) -> "FillMethod":
        """Method from its name. "baseline" is accepted as a short form."""
        if name == "baseline":
            return cls.BASELINE_CLOSEHOLE
        return cls(name)


@dataclass
class FillRecord:
    """
    Outcome of filling one hole.

    :param hole_id: Position of the hole among the boundary loops.
    :param hole_class: Size class of the hole, if it could be measured.
    :param method: "direct", "centroid", "segmented-ring" or "baseline".
    :param sub_holes: Number of parts the hole was split into.
    :param vertex_ids: Vertices added by the fill.
    :param face_ids: Faces added by the fill.
    :param status: "filled" or "failed".
    :param error: Failure message, if any.
    :param runtime_ms: Wall time spent on the hole.
    :param generations: Front generations grown, over all sub-holes.
    """

    hole_id: int
    hole_class: Optional[HoleClass]
    method: str
    sub_holes: int = 1
    vertex_ids: List[int] = field(default_factory=list)
    face_ids: List[int] = field(default_factory=list)
    status: str = "filled"
    error: Optional[str] = None
    runtime_ms: float = 0.0
    generations: int = 0

    @property
    def new_vertices(self) -> int:
        """Number of vertices added."""
        return len(self.vertex_ids)

    @property
    def new_faces(self) -> int:
        """Number of faces added."""
        return len(self.face_ids)

    @property
    def filled(self) -> bool:
        """Whether the hole was closed."""
        return self.status == "filled"

    def to_dict(self) -> dict:
        """Plain values, for JSON output."""
        return {
            "hole_id": self.hole_id,
            "class": None if self.hole_class is None else self.hole_class.value,
            "method": self.method,
            "sub_holes": self.sub_holes,
            "new_vertices": self.new_vertices,
            "new_faces": self.new_faces,
            "status": self.status,
            "error": self.error,
            "runtime_ms": round(self.runtime_ms, 3),
            "generations": self.generations,
        }


@dataclass
class FillReport:
    """Per-hole records of a fill_all_holes run."""

    records: List[FillRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def new_vertices(self) -> int:
        """Vertices added over all holes."""
        return sum(record.new_vertices for record in self.records)

    @property
    def new_faces(self) -> int:
        """Faces added over all holes."""
        return sum(record.new_faces for record in self.records)

    @property
    def failures(self) -> List[FillRecord]:
        """Records of holes that could not be filled."""
        return [record for record in self.records if not record.filled]

    @property
    def all_filled(self) -> bool:
        """True when no hole failed."""
        return not self.failures

    def to_dict(self) -> dict:
        """Plain values, for JSON output."""
        return {
            "holes": [record.to_dict() for record in self.records],
            "totals": {
                "holes": len(self.records),
                "filled": len(self.records) - len(self.failures),
                "failed": len(self.failures),
                "new_vertices": self.new_vertices,
                "new_faces": self.new_faces,
            },
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per hole."""
        return pd.DataFrame([record.to_dict() for record in self.records])


def ear_clip(
    mesh: TriangleMesh, hole: Hole, follow_surface: bool = True
) -> List[Tuple[int, int, int]]:
    """Triangulates a hole without adding vertices.

    Ears are cut in the frame projection of the hole. Among the valid
    ears, the one whose triangle bends least against the faces it
    will border is cut first; ties go to the lowest tip vertex id.
    With follow_surface off the surrounding faces are ignored and the
    ear with the largest smallest angle in the projection goes first.
    Triangles follow the ring order, which orients them consistently
    with the surrounding surface. The mesh is not modified.

    :raises EarClipFailure: when no ear can be cut
    """
    ids = list(hole.vertex_ids)
    if len(ids) == 3:
        return [tuple(ids)]
    flat = hole.project()
    points = hole.points
    orientation = 1.0 if signed_area_2d(flat) >= 0 else -1.0
    scale = float(np.ptp(flat, axis=0).max()) or 1.0
    eps = 1e-12 * scale * scale

    neighbour_normal: Dict[Tuple[int, int], np.ndarray] = {}
    for a, b in cyclic_pairs(ids):
        faces = mesh.incident_faces(a, b) if min(a, b) >= 0 else []
        if faces:
            try:
                neighbour_normal[edge_key(a, b)] = face_normal(mesh, faces[0])
            except DegenerateFace:
                pass

    remaining = list(range(len(ids)))
    cache: Dict[int, Tuple[bool, float, float, float]] = {}
    triangles = []

    def evaluate(slot: int) -> Tuple[bool, float, float, float]:
        prev_i = remaining[slot - 1]
        tip = remaining[slot]
        next_i = remaining[(slot + 1) % len(remaining)]
        turn = orientation * cross_2d(flat[tip] - flat[prev_i], flat[next_i] - flat[tip])
        a, b, c = flat[prev_i], flat[tip], flat[next_i]
        if orientation < 0:
            a, c = c, a
        blocked = any(
            point_in_triangle_2d(flat[k], a, b, c, eps)
            and not (
                np.array_equal(flat[k], a)
                or np.array_equal(flat[k], b)
                or np.array_equal(flat[k], c)
            )
            for k in remaining
            if k not in (prev_i, tip, next_i)
        )
        normal = np.cross(points[tip] - points[prev_i], points[next_i] - points[prev_i])
        norm = np.linalg.norm(normal)
        worst = math.pi
        if norm > 0:
            normal = normal / norm
            angles = [
                math.acos(float(np.clip(np.dot(normal, neighbour_normal[key]), -1, 1)))
                for key in (edge_key(ids[prev_i], ids[tip]), edge_key(ids[tip], ids[next_i]))
                if key in neighbour_normal
            ]
            worst = max(angles, default=0.0)
        return (not blocked, turn, worst, _smallest_angle(a, b, c))

    while len(remaining) > 3:
        best = None
        for slot in range(len(remaining)):
            tip = remaining[slot]
            if tip not in cache:
                cache[tip] = evaluate(slot)
            free, turn, worst, sharpest = cache[tip]
            if not free or turn <= eps:
                continue
            key = (worst if follow_surface else -sharpest, ids[tip])
            if best is None or key < best[0]:
                best = (key, slot)
        if best is None:
            # collinear ears are the last resort
            flat_ears = [
                (-cache[remaining[s]][1], ids[remaining[s]], s)
                for s in range(len(remaining))
                if cache[remaining[s]][0] and cache[remaining[s]][1] >= -eps
            ]
            if not flat_ears:
                raise EarClipFailure(
                    f"No valid ear among {len(remaining)} remaining points"
                )
            slot = min(flat_ears)[2]
        else:
            slot = best[1]

        prev_i = remaining[slot - 1]
        tip = remaining[slot]
        next_i = remaining[(slot + 1) % len(remaining)]
        triangle = (ids[prev_i], ids[tip], ids[next_i])
        triangles.append(triangle)
        normal = np.cross(points[tip] - points[prev_i], points[next_i] - points[prev_i])
        norm = np.linalg.norm(normal)
        if norm > 0:
            neighbour_normal[edge_key(ids[prev_i], ids[next_i])] = normal / norm
        remaining.pop(slot)
        cache.pop(prev_i, None)
        cache.pop(next_i, None)
        # cutting an ear can only unblock other ears
        for k in [k for k, entry in cache.items() if not entry[0]]:
            del cache[k]
    triangles.append(tuple(ids[k] for k in remaining))
    return triangles


def _smallest_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Smallest interior angle of a planar triangle, in radians."""
    corners = []
    for tip, left, right in ((a, b, c), (b, c, a), (c, a, b)):
        u, v = left - tip, right - tip
        norm = float(np.linalg.norm(u) * np.linalg.norm(v))
        if norm == 0:
            return 0.0
        corners.append(math.acos(float(np.clip(np.dot(u, v) / norm, -1.0, 1.0))))
    return min(corners)


def fill_small(mesh: TriangleMesh, hole: Hole, hole_id: int = 0) -> FillRecord:
    """Closes a hole by connecting its boundary points directly.

    Adds no vertices and n - 2 faces for a ring of n points.

    :raises EarClipFailure: when the projected ring cannot be clipped
    """
    triangles = ear_clip(mesh, hole)
    faces = mesh.add_faces(triangles)
    return FillRecord(hole_id, HoleClass.SMALL, "direct", face_ids=faces)


def fill_medium(mesh: TriangleMesh, hole: Hole, hole_id: int = 0) -> FillRecord:
    """Closes a hole with a fan around the mean of its boundary points.

    Adds exactly one vertex and one face per boundary edge.
    """
    centre = mesh.add_vertex(hole.points.mean(axis=0))
    faces = mesh.add_faces([(a, b, centre) for a, b in hole.loop.edge_list])
    return FillRecord(
        hole_id, HoleClass.MEDIUM, "centroid", vertex_ids=[centre], face_ids=faces
    )


def fill_baseline_closehole(
    mesh: TriangleMesh, hole: Hole, hole_id: int = 0
) -> FillRecord:
    """Closes any hole by direct triangulation, however large.

    Only the boundary points are connected and ears are picked by their
    shape in the hole plane, so the patch does not follow creases or
    curvature of the surrounding surface. A ring of three points gives
    the same face as fill_small.
    """
    faces = mesh.add_faces(ear_clip(mesh, hole, follow_surface=False))
    return FillRecord(hole_id, classify_hole(hole), "baseline", face_ids=faces)


def smooth_patch_heights(
    mesh: TriangleMesh,
    new_vertices: Iterable[int],
    frame: LocalFrame,
    iterations: int = 3,
    height_field: Optional[HeightField] = None,
    region: Optional[Set[int]] = None,
) -> None:
    """Umbrella smoothing of the heights of inserted vertices.

    Only the component along the frame normal changes. Each pass
    replaces the height of every inserted vertex by the mean height
    of its neighbours, all updated together. With a height field the
    averaging acts on the offset from the field instead. Vertices
    outside new_vertices never move. When region is given, neighbours
    outside it are left out of the mean.
    """
    targets = sorted(set(new_vertices))
    if not targets or iterations <= 0:
        return
    rings = {v: mesh.vertex_neighbors(v) for v in targets}
    if region is not None:
        rings = {v: [n for n in ring if n in region] for v, ring in rings.items()}
    involved = sorted(set(targets).union(*rings.values()))
    position = {v: k for k, v in enumerate(involved)}
    local = frame.to_local(mesh.vertices[involved])
    reference = np.zeros(len(involved)) if height_field is None else height_field(local[:, :2])
    offset = local[:, 2] - reference

    target_rows = np.array([position[v] for v in targets])
    neighbour_rows = [np.array([position[n] for n in rings[v]]) for v in targets]
    for _ in range(iterations):
        averaged = np.array(
            [offset[rows].mean() if len(rows) else offset[row]
             for row, rows in zip(target_rows, neighbour_rows)]
        )
        offset[target_rows] = averaged

    local[target_rows, 2] = reference[target_rows] + offset[target_rows]
    moved = frame.to_world(local[target_rows])
    for vertex, point in zip(targets, moved):
        mesh.set_vertex(vertex, point)


def smooth_chord_heights(
    mesh: TriangleMesh,
    chord: Sequence[int],
    frame: LocalFrame,
    iterations: int = 3,
) -> None:
    """Umbrella smoothing along a segmentation line. chord lists the
    vertex ids from one endpoint to the other; endpoints stay fixed."""
    if len(chord) < 3 or iterations <= 0:
        return
    local = frame.to_local(mesh.vertices[list(chord)])
    for _ in range(iterations):
        local[1:-1, 2] = 0.5 * (local[:-2, 2] + local[2:, 2])
    moved = frame.to_world(local[1:-1])
    for vertex, point in zip(chord[1:-1], moved):
        mesh.set_vertex(vertex, point)


def bezier_patch_heights(
    mesh: TriangleMesh,
    new_vertices: Iterable[int],
    hole: Hole,
    degree: int = 3,
    height_field: Optional[HeightField] = None,
) -> None:
    """Resets the heights of inserted vertices from a Bezier surface.

    The control net is a regular (degree + 1) x (degree + 1) grid over
    the bounding rectangle of the hole in its frame plane. Control
    heights come from height_field, or are interpolated from the hole
    boundary and the inserted points when there is none.
    """
    targets = sorted(set(new_vertices))
    if not targets:
        return
    frame = hole.frame
    boundary = frame.to_local(hole.points)
    lower = boundary[:, :2].min(axis=0)
    extent = boundary[:, :2].max(axis=0) - lower
    if not np.all(extent > 0):
        return
    axis = np.linspace(0.0, 1.0, degree + 1)
    grid = lower + extent * np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
    if height_field is not None:
        heights = height_field(grid.reshape(-1, 2)).reshape(grid.shape[:2])
    else:
        samples = np.vstack([boundary, frame.to_local(mesh.vertices[targets])])
        heights = griddata(samples[:, :2], samples[:, 2], grid, method="linear")
        missing = np.isnan(heights)
        if missing.any():
            heights[missing] = griddata(
                samples[:, :2], samples[:, 2], grid[missing], method="nearest"
            )
    surface = BezierSurface(heights[:, :, None])
    local = frame.to_local(mesh.vertices[targets])
    uw = np.clip((local[:, :2] - lower) / extent, 0.0, 1.0)
    local[:, 2] = surface_eval(surface, uw[:, 0], uw[:, 1])[:, 0]
    for vertex, point in zip(targets, frame.to_world(local)):
        mesh.set_vertex(vertex, point)


def fill_large(
    mesh: TriangleMesh,
    hole: Hole,
    config: Optional[RunConfig] = None,
    hole_id: int = 0,
) -> FillRecord:
    """Segments a hole at its fracture margins and fills every part.

    Parts no wider than medium_factor * ds are closed directly or with
    a centroid fan. Wider parts grow fronts inward until the remaining
    gap is that small, then are closed the same way. The inserted
    points are smoothed afterwards: segmentation points along their
    line first, then every inserted point over its patch. Segmentation
    points take part in the patches on both sides of their line.
    """
    config = RunConfig() if config is None else config
    ds = hole.ds
    fractures = detect_fracture_points(hole, config.fracture_cos)
    pairs = pair_fracture_points(hole, fractures)
    sub_holes, lines = segment_hole(hole, pairs)

    record = FillRecord(
        hole_id, HoleClass.LARGE, "segmented-ring", sub_holes=len(sub_holes)
    )
    mapping: Dict[int, int] = {}
    chords: List[List[int]] = []
    for line in lines:
        created = mesh.add_vertices(line.inserted_points)
        mapping.update(zip(line.placeholder_ids, created))
        record.vertex_ids.extend(created)
        chords.append([line.endpoints[0], *created, line.endpoints[1]])

    patches = []
    for sub_hole in sub_holes:
        part = sub_hole.relabel(mapping)
        patch_vertices, faces, generations, field_ = _fill_part(mesh, part, ds, config)
        record.vertex_ids.extend(patch_vertices)
        record.face_ids.extend(faces)
        record.generations += generations
        patches.append((part, patch_vertices, field_))

    for chord in chords:
        smooth_chord_heights(mesh, chord, hole.frame, config.smooth_iterations)
    segmentation = set(mapping.values())
    for part, patch_vertices, field_ in patches:
        targets = patch_vertices + [v for v in part.vertex_ids if v in segmentation]
        if config.smoothing == "bezier":
            bezier_patch_heights(mesh, targets, part, config.bezier_degree, field_)
        else:
            smooth_patch_heights(
                mesh,
                targets,
                part.frame,
                config.smooth_iterations,
                field_,
                region=set(part.vertex_ids).union(patch_vertices),
            )
    return record


def _fill_part(
    mesh: TriangleMesh, part: Hole, ds: float, config: RunConfig
) -> Tuple[List[int], List[int], int, Optional[HeightField]]:
    """Fills one sub-hole, returning new vertex and face ids, the
    number of front generations and the fitted height field."""
    vertices: List[int] = []
    faces_before = mesh.face_count
    if part.diameter <= config.medium_factor * ds:
        record = _close(mesh, part, ds, config)
        return record.vertex_ids, record.face_ids, 0, None

    field_ = fit_height_field(mesh, part, config.fracture_cos)
    front: FrontRing = initial_front(part)
    limit = math.ceil(part.diameter / (2.0 * ds)) + 2
    while front.generation < limit and front.diameter(mesh) > config.medium_factor * ds:
        try:
            front = advance_ring(
                mesh, front, ds, config.ring_merge_radius_factor, field_
            )
        except FrontCollapse as err:
            logger.debug("Front stopped at generation %d: %s", front.generation, err)
            break
        vertices.extend(front.vertex_ids)

    if front.generation == 0:
        remainder = part
    else:
        ring_points = front.points(mesh)
        remainder = analyze_points(
            front.vertex_ids, ring_points, np.tile(part.frame.n, (len(front), 1))
        )
    record = _close(mesh, remainder, ds, config)
    vertices.extend(record.vertex_ids)
    faces = list(range(faces_before, mesh.face_count))
    return vertices, faces, front.generation, field_


def _close(mesh: TriangleMesh, part: Hole, ds: float, config: RunConfig) -> FillRecord:
    """Closes a part small enough for step one, measured against the
    parent hole's ds. Anything still wide is clipped directly."""
    size = classify_size(ds, part.diameter, config.small_factor, config.medium_factor)
    if size is HoleClass.MEDIUM:
        return fill_medium(mesh, part)
    return fill_small(mesh, part)


def fill_all_holes(
    mesh: TriangleMesh,
    config: Optional[RunConfig] = None,
    method: FillMethod = FillMethod.SEGMENTED_RING,
) -> FillReport:
    """Fills every hole of a mesh in place.

    With open_surface set the longest boundary loop is taken to be the
    outer rim and left open. A hole that fails is rolled back, recorded
    and skipped; the remaining holes are still filled.

    :param mesh: Mesh to repair.
    :type mesh: TriangleMesh
    :param config: Optional - Thresholds and smoothing settings.
    :type config: RunConfig or None
    :param method: Optional - Strategy. The default dispatches each hole
        by size class.
    :type method: FillMethod
    :rtype: FillReport
    """
    config = RunConfig() if config is None else config
    loops = boundary_loops(mesh)
    holes = list(enumerate(loops))
    if config.open_surface and loops:
        rim = max(range(len(loops)), key=lambda k: (len(loops[k]), -k))
        holes = [(k, loop) for k, loop in holes if k != rim]
        logger.info("Treating loop %d (%d edges) as the outer rim", rim, len(loops[rim]))

    report = FillReport()
    for hole_id, loop in holes:
        vertex_count, face_count = mesh.vertex_count, mesh.face_count
        hole_class = None
        with stopwatch() as elapsed:
            try:
                hole = analyze_hole(mesh, loop)
                hole_class = classify_hole(hole, config.small_factor, config.medium_factor)
                record = _dispatch(mesh, hole, hole_class, config, method, hole_id)
            except (HolepyError, ValueError, RuntimeError) as err:
                mesh.rollback(vertex_count, face_count)
                record = FillRecord(
                    hole_id,
                    hole_class,
                    _method_name(hole_class, method),
                    status="failed",
                    error=str(err),
                )
                logger.warning("Hole %d could not be filled: %s", hole_id, err)
        record.runtime_ms = elapsed[0]
        report.records.append(record)
        logger.info(
            "Hole %d (%s, %d points): %s by %s, +%d vertices, +%d faces in %.1f ms",
            hole_id,
            "?" if hole_class is None else hole_class.value,
            len(loop),
            record.status,
            record.method,
            record.new_vertices,
            record.new_faces,
            record.runtime_ms,
        )
    return report


def _dispatch(
    mesh: TriangleMesh,
    hole: Hole,
    hole_class: HoleClass,
    config: RunConfig,
    method: FillMethod,
    hole_id: int,
) -> FillRecord:
    if method is FillMethod.BASELINE_CLOSEHOLE:
        record = fill_baseline_closehole(mesh, hole, hole_id)
    elif hole_class is HoleClass.SMALL:
        record = fill_small(mesh, hole, hole_id)
    elif hole_class is HoleClass.MEDIUM or method is FillMethod.CENTROID_ONLY:
        record = fill_medium(mesh, hole, hole_id)
    else:
        return fill_large(mesh, hole, config, hole_id)
    record.hole_class = hole_class
    return record


def _method_name(hole_class: Optional[HoleClass], method: FillMethod) -> str:
    if method is FillMethod.BASELINE_CLOSEHOLE:
        return "baseline"
    if hole_class is None:
        return method.value
    if method is FillMethod.CENTROID_ONLY and hole_class is HoleClass.LARGE:
        return "centroid"
    return hole_class.method
